#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ppinfo/grid.hpp"
#include "ppinfo/measure.hpp"
#include "ppinfo/model.hpp"
#include "ppinfo/rational.hpp"
#include "ppinfo/units.hpp"

namespace ppinfo {

struct NonpositiveDensityError : std::runtime_error {
  NonpositiveDensityError() : std::runtime_error("density vanishes on a positive-mass region") {}
};

struct AbsoluteContinuityError : std::runtime_error {
  AbsoluteContinuityError()
      : std::runtime_error("reference model has no mass where the first model does") {}
};

struct NonpositiveLogError : std::runtime_error {
  explicit NonpositiveLogError(double v)
      : std::runtime_error("log of nonpositive value " + std::to_string(v)) {}
};

// Unitless nonnegative function on the grid (the f of the Laplace-style
// functionals; h = e^-f is then a valid test function).
struct NonnegFunction {
  std::vector<double> values;

  NonnegFunction() = default;
  explicit NonnegFunction(std::vector<double> v) : values(std::move(v)) {
    for (double x : values)
      if (!(x >= 0.0)) throw std::invalid_argument("NonnegFunction: values must be >= 0");
  }

  static NonnegFunction constant(const BaseSpace& space, const QuadratureGrid& grid, double v) {
    return NonnegFunction(std::vector<double>(grid.cell_count(space), v));
  }
};

// Evaluation mode for the audit functionals.  Checked derives every term's
// unit exponent and refuses to combine incommensurable terms; the
// nondimensionalized mode deliberately strips units after converting to the
// system scaled by k, to demonstrate that the resulting number depends on the
// unit system and is therefore not a defined quantity.
struct AuditMode {
  enum class Kind { Checked, Nondimensionalized };
  Kind kind = Kind::Checked;
  double k = 1.0;

  static AuditMode checked() { return AuditMode{}; }
  static AuditMode nondimensionalized(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("AuditMode: k must be positive");
    return AuditMode{Kind::Nondimensionalized, k};
  }
};

struct AuditTerm {
  int n = 0;
  double value = 0.0;   // numeric value in the declared unit system
  Rational exponent;    // derived unit exponent (term unit, or log-argument unit)
};

enum class AuditVerdict { WellDefined, IncommensurableSum, DimensionalLog };

inline const char* verdict_name(AuditVerdict v) {
  switch (v) {
    case AuditVerdict::WellDefined: return "WellDefined";
    case AuditVerdict::IncommensurableSum: return "IncommensurableSum";
    case AuditVerdict::DimensionalLog: return "DimensionalLog";
  }
  return "?";
}

struct AuditReport {
  std::vector<AuditTerm> terms;
  AuditVerdict verdict = AuditVerdict::WellDefined;
  std::optional<std::pair<Rational, Rational>> offending_exponents;  // first differing pair
  std::optional<Rational> offending_log_unit;  // unit fed to a failing log
  std::optional<double> value;  // present iff the number is defined in the mode used
  bool nondimensionalized = false;
  double k = 1.0;
};

namespace detail {

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

constexpr double kSupportCutoff = 1e-300;

// Per-cell sums mu_t = sum w (log w)^t vol over the support cells of w, for
// t = 0..t_cap; the engine behind every product-form log-moment integral.
inline std::vector<double> weighted_log_power_sums(const PointProcessModel& model, int t_cap) {
  const GridFunction& w = model.point_weight();
  double vol = cell_volume(model.space(), model.grid()).value();
  std::vector<double> mu(t_cap + 1, 0.0);
  for (double v : w.values) {
    if (v <= kSupportCutoff) continue;
    double lw = std::log(v);
    double p = 1.0;
    for (int t = 0; t <= t_cap; ++t) {
      mu[t] += v * p * vol;
      p *= lw;
    }
  }
  return mu;
}

// K[n][j] = integral over X^n of (sum_i log w(x_i))^j prod_i w(x_i) dx,
// by the convolution recurrence K_n = sum_t C(j,t) mu_t K_{n-1,j-t}.
inline std::vector<std::vector<double>> sum_log_moment_table(const std::vector<double>& mu,
                                                             int n_cap, int j_cap) {
  std::vector<std::vector<double>> K(n_cap + 1, std::vector<double>(j_cap + 1, 0.0));
  K[0][0] = 1.0;
  for (int n = 1; n <= n_cap; ++n)
    for (int j = 0; j <= j_cap; ++j)
      for (int t = 0; t <= j; ++t) K[n][j] += binom(j, t) * mu[t] * K[n - 1][j - t];
  return K;
}

struct MomentAccumulator {
  double value = 0.0;
  double excluded_mass = 0.0;
};

// integral of (log p^(n) + n*shift)^m p^(n) dx over the single slice X^n,
// via the closed slice algebra for product-form models and by cell-tuple
// enumeration for the multi-Bernoulli model.  `shift` is log c for the
// corrected (f_Phi) moments and -log k for the nondimensionalized naive ones.
inline MomentAccumulator slice_log_moment(const PointProcessModel& model, int m, int n,
                                          double shift, const QuadratureGrid& grid) {
  MomentAccumulator acc;
  if (model.product_form()) {
    double a = model.log_prefactor(n);
    if (!std::isfinite(a)) return acc;  // structurally massless slice
    bool empty_only = model.variant() == PointProcessModel::Variant::EmptyOnly;
    std::vector<double> mu =
        empty_only ? std::vector<double>(m + 1, 0.0) : weighted_log_power_sums(model, m);
    auto K = sum_log_moment_table(mu, n, m);
    double A = std::exp(a);
    double base = a + n * shift;
    for (int t = 0; t <= m; ++t) {
      double bp = (m - t == 0) ? 1.0 : std::pow(base, m - t);
      acc.value += A * binom(m, t) * bp * K[n][t];
    }
    return acc;
  }
  if (model.cardinality_pmf(n) == 0.0) return acc;
  if (n == 0) {
    double p0 = model.janossy_at_cells({});
    if (p0 > kSupportCutoff) acc.value = p0 * std::pow(std::log(p0), m);
    return acc;
  }
  long long cells = grid.cell_count(model.space());
  double vol = cell_volume(model.space(), model.grid()).value();
  std::vector<long long> tuple(n, 0);
  double voln = std::pow(vol, n);
  while (true) {
    double p = model.janossy_at_cells(tuple);
    if (p > kSupportCutoff) {
      acc.value += p * std::pow(std::log(p) + n * shift, m) * voln;
    } else if (p > 0.0) {
      acc.excluded_mass += p * voln;
    }
    int k = n - 1;
    while (k >= 0 && ++tuple[k] == cells) tuple[k--] = 0;
    if (k < 0) break;
  }
  return acc;
}

// sum over all slices with mass of the integral above.
inline MomentAccumulator log_moment_integral(const PointProcessModel& model, int m,
                                             double shift, const QuadratureGrid& grid) {
  MomentAccumulator acc;
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  for (int n = 0; n <= cap; ++n) {
    MomentAccumulator s = slice_log_moment(model, m, n, shift, grid);
    acc.value += s.value;
    acc.excluded_mass += s.excluded_mass;
  }
  return acc;
}

inline void require_same_frame(const PointProcessModel& a, const PointProcessModel& b) {
  if (a.space().dimension != b.space().dimension || a.space().bounds != b.space().bounds)
    throw std::invalid_argument("models must share one window");
  if (a.grid().cells_per_axis != b.grid().cells_per_axis)
    throw std::invalid_argument("models must share one grid resolution");
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Corrected m-th log moment: integral of (log f_Phi)^m dP_Phi, with
// f_Phi = c^n p^(n).  The log argument's unit is verified to vanish for every
// cardinality before any number is believed.
inline double corrected_entropy_moments(const PointProcessModel& model,
                                        const ReferenceMeasure& ref, int m,
                                        const QuadratureGrid& grid) {
  if (m < 0 || m > 4) throw std::invalid_argument("corrected_entropy_moments: m in [0,4]");
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  for (int n = 0; n <= cap; ++n) {
    if (model.cardinality_pmf(n) == 0.0) continue;
    UnitExp f_unit = ref.c.unit() * n + model.janossy_unit(n);
    Checked<Quantity> lg = checked_log(Quantity(1.0, f_unit));
    if (!lg.ok()) throw UnitMismatchError(f_unit);
  }
  double log_c = std::log(ref.c.value());
  return detail::log_moment_integral(model, m, log_c, grid).value;
}

// Differential entropy of the process relative to lambda_c:
//   -sum_n integral of log f_Phi(phi) p^(n)(phi) dx.
inline double differential_entropy(const PointProcessModel& model, const ReferenceMeasure& ref,
                                   const QuadratureGrid& grid) {
  return -corrected_entropy_moments(model, ref, 1, grid);
}

// Monte Carlo estimate of the differential entropy: sample mean and standard
// error of -log f_Phi over `sample_count` independent draws.
inline std::pair<double, double> mc_entropy(const PointProcessModel& model,
                                            const ReferenceMeasure& ref, int sample_count,
                                            std::uint64_t seed) {
  if (sample_count < 2) throw std::invalid_argument("mc_entropy: need at least 2 samples");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    PointPattern pattern = model.sample(detail::mix_seed(seed, i));
    double f = pdf(model, ref, pattern);
    if (!(f > 0.0)) throw NonpositiveDensityError();
    double v = -std::log(f);
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / sample_count;
  double var = std::max(0.0, (sumsq - sample_count * mean * mean) / (sample_count - 1.0));
  return {mean, std::sqrt(var / sample_count)};
}

// KL divergence between two processes on the same window,
//   sum_n integral of log(p_1^(n)/p_0^(n)) p_1^(n) dx;
// the density ratio is unitless (the iota^-n factors cancel), which is what
// makes the divergence reference-measure-free.
inline double kl_divergence(const PointProcessModel& model_1, const PointProcessModel& model_0,
                            const QuadratureGrid& grid) {
  detail::require_same_frame(model_1, model_0);
  int cap1 = model_1.support_limit() < 0 ? grid.n_max
                                         : std::min(model_1.support_limit(), grid.n_max);
  for (int n = 0; n <= cap1; ++n) {
    if (model_1.cardinality_pmf(n) == 0.0) continue;
    UnitExp ratio = model_1.janossy_unit(n) - model_0.janossy_unit(n);
    if (!ratio.is_zero()) throw UnitMismatchError(ratio);
    if (model_0.cardinality_pmf(n) == 0.0) throw AbsoluteContinuityError();
  }
  if (model_0.support_limit() >= 0) {
    for (int n = model_0.support_limit() + 1; n <= grid.n_max; ++n)
      if (model_1.cardinality_pmf(n) > grid.tail_tolerance) throw AbsoluteContinuityError();
  }

  if (model_1.product_form() && model_0.product_form()) {
    const GridFunction& w1 = model_1.point_weight();
    const GridFunction& w0 = model_0.point_weight();
    double vol = cell_volume(model_1.space(), model_1.grid()).value();
    double S1 = 0.0, T10 = 0.0;
    for (std::size_t c = 0; c < w1.values.size(); ++c) {
      double v1 = w1.values[c];
      if (v1 <= detail::kSupportCutoff) continue;
      if (w0.values[c] <= detail::kSupportCutoff) throw AbsoluteContinuityError();
      S1 += v1 * vol;
      T10 += v1 * std::log(v1 / w0.values[c]) * vol;
    }
    double kl = 0.0;
    for (int n = 0; n <= cap1; ++n) {
      double a1 = model_1.log_prefactor(n);
      if (!std::isfinite(a1)) continue;
      double a0 = model_0.log_prefactor(n);
      if (!std::isfinite(a0)) throw AbsoluteContinuityError();
      double A1 = std::exp(a1);
      double Sn1 = std::pow(S1, n);  // S1^n; S1 > 0 whenever any slice has mass
      kl += A1 * Sn1 * (a1 - a0);
      if (n >= 1) kl += n * A1 * std::pow(S1, n - 1) * T10;
    }
    return kl;
  }

  // A multi-Bernoulli is involved: enumerate tuples up to the bounded support.
  long long cells = grid.cell_count(model_1.space());
  double vol = cell_volume(model_1.space(), model_1.grid()).value();
  double kl = 0.0;
  for (int n = 0; n <= cap1; ++n) {
    if (model_1.cardinality_pmf(n) == 0.0) continue;
    if (n == 0) {
      double p1 = model_1.janossy_at_cells({});
      double p0 = model_0.janossy_at_cells({});
      if (p1 > detail::kSupportCutoff) {
        if (p0 <= detail::kSupportCutoff) throw AbsoluteContinuityError();
        kl += p1 * std::log(p1 / p0);
      }
      continue;
    }
    std::vector<long long> tuple(n, 0);
    double voln = std::pow(vol, n);
    while (true) {
      double p1 = model_1.janossy_at_cells(tuple);
      if (p1 > detail::kSupportCutoff) {
        double p0 = model_0.janossy_at_cells(tuple);
        if (p0 <= detail::kSupportCutoff) throw AbsoluteContinuityError();
        kl += p1 * std::log(p1 / p0) * voln;
      }
      int k = n - 1;
      while (k >= 0 && ++tuple[k] == cells) tuple[k--] = 0;
      if (k < 0) break;
    }
  }
  return kl;
}

namespace detail {

// Shared assembly for the G^alpha-family audits.  `term_value` gives the
// declared-system number for slice n; `term_exponent` its symbolically
// derived unit exponent.
inline AuditReport power_family_audit(const PointProcessModel& model, const QuadratureGrid& grid,
                                      const AuditMode& mode,
                                      const std::function<double(int)>& term_value,
                                      const std::function<Rational(int)>& term_exponent) {
  AuditReport report;
  report.nondimensionalized = mode.kind == AuditMode::Kind::Nondimensionalized;
  report.k = mode.k;
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  for (int n = 0; n <= cap; ++n) {
    if (model.cardinality_pmf(n) == 0.0) continue;  // zero-mass slices carry no term
    report.terms.push_back(AuditTerm{n, term_value(n), term_exponent(n)});
  }
  bool commensurable = true;
  for (std::size_t i = 1; i < report.terms.size(); ++i) {
    if (!(report.terms[i].exponent == report.terms[0].exponent)) {
      commensurable = false;
      report.offending_exponents = {report.terms[0].exponent, report.terms[i].exponent};
      break;
    }
  }
  report.verdict =
      commensurable ? AuditVerdict::WellDefined : AuditVerdict::IncommensurableSum;
  if (report.nondimensionalized) {
    double sum = 0.0;
    for (const auto& t : report.terms) sum += t.value * std::pow(mode.k, t.exponent.to_double());
    report.value = sum;
  } else if (commensurable) {
    double sum = 0.0;
    for (const auto& t : report.terms) sum += t.value;
    report.value = sum;
  }
  return report;
}

}  // namespace detail

// The power-functional G^alpha audit: per-cardinality terms
//   integral of prod h(x_i) * p^(n)(x_1..x_n)^(1-alpha) dx,
// whose derived unit exponent is n*alpha.  In Checked mode the sum exists
// only when every listed exponent agrees (alpha = 0, or a single-slice
// model); otherwise the report carries the incommensurability verdict.
inline AuditReport generating_functional_audit(const PointProcessModel& model,
                                               const TestFunction& h, const Rational& alpha,
                                               const QuadratureGrid& grid,
                                               const AuditMode& mode = AuditMode::checked()) {
  double power = 1.0 - alpha.to_double();
  return detail::power_family_audit(
      model, grid, mode,
      [&](int n) { return model.power_slice_integral(h.values, power, n); },
      [&](int n) {
        return UnitExp(n, 1) + model.janossy_unit(n) * (Rational(1) - alpha);
      });
}

// Same audit with f_Phi^(1-alpha) = (c^n p^(n))^(1-alpha) substituted for
// p^(n)^(1-alpha): the volume elements are no longer compensated at all, so
// the derived exponent is n for every alpha, including alpha = 0.
inline AuditReport generating_functional_audit_f_substituted(
    const PointProcessModel& model, const ReferenceMeasure& ref, const TestFunction& h,
    const Rational& alpha, const QuadratureGrid& grid,
    const AuditMode& mode = AuditMode::checked()) {
  double power = 1.0 - alpha.to_double();
  return detail::power_family_audit(
      model, grid, mode,
      [&](int n) {
        double cpow = std::pow(ref.c.value(), n * power);
        return cpow * model.power_slice_integral(h.values, power, n);
      },
      [&](int n) {
        UnitExp f_unit = ref.c.unit() * n + model.janossy_unit(n);
        return UnitExp(n, 1) + f_unit * (Rational(1) - alpha);
      });
}

// Laplace-style audit: L^alpha(f) = G^alpha(e^-f).
inline AuditReport laplace_functional_audit(const PointProcessModel& model,
                                            const NonnegFunction& f, const Rational& alpha,
                                            const QuadratureGrid& grid,
                                            const AuditMode& mode = AuditMode::checked()) {
  std::vector<double> h(f.values.size());
  for (std::size_t c = 0; c < h.size(); ++c) h[c] = std::exp(-f.values[c]);
  return generating_functional_audit(model, TestFunction(h), alpha, grid, mode);
}

// Cumulant-style audit: log of the Laplace value when that value exists;
// the verdict (and the term table) propagate unchanged otherwise.
inline AuditReport cumulant_functional_audit(const PointProcessModel& model,
                                             const NonnegFunction& f, const Rational& alpha,
                                             const QuadratureGrid& grid,
                                             const AuditMode& mode = AuditMode::checked()) {
  AuditReport report = laplace_functional_audit(model, f, alpha, grid, mode);
  if (report.value) {
    if (!(*report.value > 0.0)) throw NonpositiveLogError(*report.value);
    report.value = std::log(*report.value);
  }
  return report;
}

namespace detail {

// Shared assembly for the log-family audits (naive Shannon entropy and its
// moments): the failure is a dimensional log argument, detected symbolically
// per cardinality before any numeric value is trusted.
inline AuditReport log_family_audit(const PointProcessModel& model, int m,
                                    const QuadratureGrid& grid, const AuditMode& mode,
                                    bool negate) {
  AuditReport report;
  report.nondimensionalized = mode.kind == AuditMode::Kind::Nondimensionalized;
  report.k = mode.k;
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  std::optional<Rational> bad_unit;
  for (int n = 0; n <= cap; ++n) {
    if (model.cardinality_pmf(n) == 0.0) continue;
    UnitExp log_arg = model.janossy_unit(n);
    if (!log_arg.is_zero() && !bad_unit) bad_unit = log_arg;
    // Declared-system term value: integral of (log p^(n))^m p^(n) over X^n.
    double v = slice_log_moment(model, m, n, 0.0, grid).value;
    report.terms.push_back(AuditTerm{n, negate ? -v : v, log_arg});
  }
  if (bad_unit) {
    report.verdict = AuditVerdict::DimensionalLog;
    report.offending_log_unit = bad_unit;
  } else {
    report.verdict = AuditVerdict::WellDefined;
  }
  if (report.nondimensionalized) {
    double v = log_moment_integral(model, m, -std::log(mode.k), grid).value;
    report.value = negate ? -v : v;
  } else if (!bad_unit) {
    double v = log_moment_integral(model, m, 0.0, grid).value;
    report.value = negate ? -v : v;
  }
  return report;
}

}  // namespace detail

// Naive Shannon entropy of the Janossy family, -sum_n integral of
// log(p^(n)) p^(n) dx: the log argument carries unit iota^-n, so the Checked
// verdict is DimensionalLog for any model with mass beyond the empty pattern.
inline AuditReport shannon_entropy_audit(const PointProcessModel& model,
                                         const QuadratureGrid& grid,
                                         const AuditMode& mode = AuditMode::checked()) {
  return detail::log_family_audit(model, 1, grid, mode, /*negate=*/true);
}

// Naive entropy moments, integral of (log p^(|phi|))^m dP: same dimensional
// defect as the Shannon entropy, for every m (the log happens first).
inline AuditReport entropy_moments_audit(const PointProcessModel& model, int m,
                                         const QuadratureGrid& grid,
                                         const AuditMode& mode = AuditMode::checked()) {
  if (m < 0 || m > 4) throw std::invalid_argument("entropy_moments_audit: m in [0,4]");
  return detail::log_family_audit(model, m, grid, mode, /*negate=*/false);
}

}  // namespace ppinfo
