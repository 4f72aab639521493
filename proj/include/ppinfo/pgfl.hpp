#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ppinfo/grid.hpp"
#include "ppinfo/measure.hpp"
#include "ppinfo/model.hpp"
#include "ppinfo/units.hpp"

namespace ppinfo {

struct NonConvergentError : std::runtime_error {
  NonConvergentError() : std::runtime_error("differential extrapolation did not converge") {}
};

// Direction of a functional perturbation: raw unitless values (any sign), a
// box indicator 1_B, or a Dirac tag handled as the Radon-Nikodym limit of
// shrinking box indicators.
struct Perturbation {
  enum class Kind { Values, Indicator, Dirac };
  Kind kind;
  std::vector<double> values;  // Kind::Values
  Region box;                  // Kind::Indicator
  std::vector<double> point;   // Kind::Dirac

  static Perturbation from_values(std::vector<double> v) {
    Perturbation p;
    p.kind = Kind::Values;
    p.values = std::move(v);
    return p;
  }
  static Perturbation indicator(Region b) {
    Perturbation p;
    p.kind = Kind::Indicator;
    p.box = std::move(b);
    return p;
  }
  static Perturbation dirac(std::vector<double> x) {
    Perturbation p;
    p.kind = Kind::Dirac;
    p.point = std::move(x);
    return p;
  }
};

namespace detail {

// Truncated p.g.fl. series on raw (unclamped) h values; each cardinality
// term is folded through the checked unit algebra before its number is used.
inline double pgfl_series_raw(const PointProcessModel& model, const std::vector<double>& h,
                              const QuadratureGrid& grid) {
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  Quantity acc = Quantity::unitless(0.0);
  for (int n = 0; n <= cap; ++n) {
    Quantity term(model.weighted_slice_integral(h, n),
                  model.janossy_unit(n) + UnitExp(n, 1));
    Checked<Quantity> next = checked_add(acc, term);
    if (!next.ok()) throw UnitMismatchError(term.unit());
    acc = next.value();
  }
  if (!acc.is_unitless()) throw UnitMismatchError(acc.unit());
  return acc.value();
}

using RawFunctional = std::function<double(const std::vector<double>&)>;

// Central-difference derivative of eps -> F(h + eps*eta) at 0, extrapolated
// over the ladder eps_i = eps0 * 2^-i with the standard eps^2 Neville tableau;
// throws when the last two diagonal extrapolants disagree.
inline double richardson_directional(const RawFunctional& F, const std::vector<double>& h,
                                     const std::vector<double>& eta) {
  constexpr int kLevels = 4;
  constexpr double kEps0 = 1e-2;
  constexpr double kRelTol = 1e-4;

  std::vector<double> shifted(h.size());
  auto at = [&](double eps) {
    for (std::size_t c = 0; c < h.size(); ++c) shifted[c] = h[c] + eps * eta[c];
    return F(shifted);
  };

  double diag[kLevels];
  double prev_row[kLevels];
  for (int i = 0; i < kLevels; ++i) {
    double eps = kEps0 * std::pow(2.0, -i);
    double row[kLevels];
    row[0] = (at(eps) - at(-eps)) / (2.0 * eps);
    for (int j = 1; j <= i; ++j) {
      double p4 = std::pow(4.0, j);
      row[j] = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (p4 - 1.0);
    }
    diag[i] = row[i];
    std::copy(row, row + kLevels, prev_row);
  }
  double best = diag[kLevels - 1];
  double check = diag[kLevels - 2];
  if (std::abs(best - check) > kRelTol * std::max(1.0, std::abs(best)))
    throw NonConvergentError();
  return best;
}

// Grid-aligned box of `width` cells per axis containing the cell of x,
// clamped to the window.
inline Region ladder_box(const BaseSpace& space, const QuadratureGrid& grid,
                         const std::vector<double>& x, int width) {
  long long flat = locate_cell(space, grid, x);
  std::vector<int> idx = cell_multi_index(space, grid, flat);
  Region r;
  for (int a = 0; a < space.dimension; ++a) {
    long long start = idx[a] - width / 2;
    start = std::max<long long>(0, std::min<long long>(start, grid.cells_per_axis - width));
    r.axes.push_back(AxisSet{{CellRange{start, start + width}}});
  }
  return r;
}

// d/deps F(h + eps*eta) at eps = 0 for one perturbation; Dirac tags divide
// the indicator differential by the box measure and extrapolate the ladder
// of widths 4, 2, 1 cells linearly to width 0.
inline double directional_derivative(const RawFunctional& F, const std::vector<double>& h,
                                     const Perturbation& eta, const BaseSpace& space,
                                     const QuadratureGrid& grid) {
  switch (eta.kind) {
    case Perturbation::Kind::Values:
      return richardson_directional(F, h, eta.values);
    case Perturbation::Kind::Indicator:
      return richardson_directional(F, h, region_mask(space, grid, eta.box));
    case Perturbation::Kind::Dirac: {
      const int widths[3] = {4, 2, 1};
      double v[3];
      for (int i = 0; i < 3; ++i) {
        int w = std::min(widths[i], grid.cells_per_axis);
        Region box = ladder_box(space, grid, eta.point, w);
        double measure = region_measure(space, grid, box).value();
        v[i] = richardson_directional(F, h, region_mask(space, grid, box)) / measure;
      }
      double coarse = 2.0 * v[1] - v[0];
      double fine = 2.0 * v[2] - v[1];
      if (std::abs(fine - coarse) > 1e-3 * std::max(1.0, std::abs(fine)))
        throw NonConvergentError();
      return fine;
    }
  }
  throw std::logic_error("unreachable perturbation kind");
}

// Unit of a differential: each Dirac tag contributes iota^-1 (the division by
// the box measure), other perturbations are unitless.
inline UnitExp differential_unit(const std::vector<Perturbation>& etas) {
  int diracs = 0;
  for (const auto& e : etas)
    if (e.kind == Perturbation::Kind::Dirac) ++diracs;
  return UnitExp(-diracs, 1);
}

}  // namespace detail

// Truncated-series evaluation of G(h); the closed forms live on the model and
// are used as oracles against this.
inline double pgfl_eval(const PointProcessModel& model, const TestFunction& h,
                        const QuadratureGrid& grid) {
  return detail::pgfl_series_raw(model, h.values, grid);
}

// delta^n G(h; eta_1, ..., eta_n), evaluated recursively: the innermost
// functional is the truncated series, and each nesting level is a numeric
// directional derivative.  n = 0 returns G(h) itself.
inline Quantity nth_differential(const PointProcessModel& model, const TestFunction& h,
                                 const std::vector<Perturbation>& etas,
                                 const QuadratureGrid& grid) {
  if (etas.size() > 3)
    throw std::invalid_argument("nth_differential: at most 3 nested perturbations");
  const BaseSpace& space = model.space();
  detail::RawFunctional F = [&model, &grid](const std::vector<double>& hv) {
    return detail::pgfl_series_raw(model, hv, grid);
  };
  // Nest from the last perturbation inward, so eta_1 is the outermost
  // derivative; the mixed differential is symmetric anyway (a property the
  // tests assert numerically).
  for (std::size_t i = etas.size(); i-- > 1;) {
    detail::RawFunctional inner = F;
    const Perturbation& eta = etas[i];
    F = [inner, &eta, &space, &grid](const std::vector<double>& hv) {
      return detail::directional_derivative(inner, hv, eta, space, grid);
    };
  }
  double value = etas.empty()
                     ? F(h.values)
                     : detail::directional_derivative(F, h.values, etas[0], space, grid);
  return Quantity(value, detail::differential_unit(etas));
}

inline Quantity chain_differential(const PointProcessModel& model, const TestFunction& h,
                                   const Perturbation& eta, const QuadratureGrid& grid) {
  return nth_differential(model, h, {eta}, grid);
}

// Janossy density recovered from the p.g.fl.: (1/n!) delta^n G(0; Dirac tags).
inline Quantity janossy_from_pgfl(const PointProcessModel& model, const PointPattern& pattern,
                                  const QuadratureGrid& grid) {
  if (pattern.size() > 2)
    throw std::invalid_argument("janossy_from_pgfl: patterns up to two points");
  pattern.validate_for_evaluation(model.space());
  std::vector<Perturbation> etas;
  for (const auto& x : pattern.points) etas.push_back(Perturbation::dirac(x));
  TestFunction zero = TestFunction::constant(model.space(), model.grid(), 0.0);
  Quantity d = nth_differential(model, zero, etas, grid);
  double fact = 1.0;
  for (int i = 2; i <= pattern.size(); ++i) fact *= i;
  return Quantity(d.value() / fact, d.unit());
}

// Bundled self-checks used by the CLI and the acceptance gate: series vs
// closed form over deterministic pseudo-random test functions, the Moyal
// identity on box products, and Janossy recovery at up to two points.
struct PgflCheckReport {
  double max_series_vs_closed = 0.0;
  double max_moyal_rel_err = 0.0;
  double max_janossy_rel_err = 0.0;
};

inline PgflCheckReport run_pgfl_checks(const PointProcessModel& model, const QuadratureGrid& grid,
                                       int random_h_count = 20, std::uint64_t seed = 1234) {
  const BaseSpace& space = model.space();
  PgflCheckReport report;

  std::mt19937_64 rng(seed);
  long long cells = grid.cell_count(space);
  for (int t = 0; t < random_h_count; ++t) {
    std::vector<double> hv(cells);
    for (auto& v : hv) v = next_unit_double(rng);
    TestFunction h(hv);
    double series = pgfl_eval(model, h, grid);
    double closed = model.pgfl_closed_form(h);
    report.max_series_vs_closed =
        std::max(report.max_series_vs_closed, std::abs(series - closed));
  }

  // Moyal: (1/n!) delta^n G(0; 1_B1..1_Bn) = P^(n)(B_1 x ... x B_n), n = 1, 2.
  TestFunction zero = TestFunction::constant(space, grid, 0.0);
  auto box = [&](double frac_lo, double frac_hi) {
    std::vector<std::pair<double, double>> b;
    for (int a = 0; a < space.dimension; ++a) {
      double lo = space.bounds[a].first;
      double w = axis_cell_width(space, grid, a);
      b.push_back({lo + std::floor(frac_lo * grid.cells_per_axis) * w,
                   lo + std::floor(frac_hi * grid.cells_per_axis) * w});
    }
    return region_box(space, grid, b);
  };
  Region b1 = box(0.1, 0.4), b2 = box(0.5, 0.9);
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(1e-12, std::abs(want));
  };
  {
    Quantity d = nth_differential(model, zero, {Perturbation::indicator(b1)}, grid);
    double want = prob_measure(model, PatternSet::single_slice({b1}), grid);
    if (std::abs(want) > 1e-12)
      report.max_moyal_rel_err = std::max(report.max_moyal_rel_err, rel(d.value(), want));
  }
  if (model.support_limit() < 0 || model.support_limit() >= 2) {
    Quantity d = nth_differential(
        model, zero, {Perturbation::indicator(b1), Perturbation::indicator(b2)}, grid);
    double want = prob_measure(model, PatternSet::single_slice({b1, b2}), grid);
    if (std::abs(want) > 1e-12)
      report.max_moyal_rel_err = std::max(report.max_moyal_rel_err, rel(d.value() / 2.0, want));
  }

  // Janossy recovery at the empty pattern, one point, and two points.
  std::vector<PointPattern> patterns;
  patterns.push_back(PointPattern::empty_pattern());
  {
    std::vector<double> x1, x2;
    for (int a = 0; a < space.dimension; ++a) {
      double lo = space.bounds[a].first, hi = space.bounds[a].second;
      x1.push_back(lo + 0.305 * (hi - lo));
      x2.push_back(lo + 0.715 * (hi - lo));
    }
    patterns.push_back(PointPattern{{x1}});
    patterns.push_back(PointPattern{{x1, x2}});
  }
  for (const auto& p : patterns) {
    if (model.support_limit() >= 0 && p.size() > model.support_limit()) continue;
    Quantity got = janossy_from_pgfl(model, p, grid);
    Quantity want = model.janossy(p);
    if (!(got.unit() == want.unit())) throw UnitMismatchError(got.unit() - want.unit());
    if (std::abs(want.value()) > 1e-12)
      report.max_janossy_rel_err =
          std::max(report.max_janossy_rel_err, rel(got.value(), want.value()));
  }
  return report;
}

}  // namespace ppinfo
