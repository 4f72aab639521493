#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ppinfo/grid.hpp"
#include "ppinfo/units.hpp"

namespace ppinfo {

struct UnitMismatchError : std::runtime_error {
  UnitExp unit;
  explicit UnitMismatchError(UnitExp u)
      : std::runtime_error("expected unitless result, got iota^" + u.str()), unit(u) {}
};

// Simple point-process models on a measured window.  Every density input is
// piecewise constant on the shared quadrature grid, so slice integrals over
// X^n reduce exactly to powers and products of per-cell sums; the reductions
// below are the midpoint tensor-product values, not approximations to them.
class PointProcessModel {
 public:
  enum class Variant { Poisson, IIDCluster, MultiBernoulli, EmptyOnly };

  struct BernoulliComponent {
    double q;          // existence probability, unitless
    GridFunction pdf;  // spatial density, integrates to 1
  };

  static PointProcessModel poisson(const BaseSpace& space, const QuadratureGrid& grid,
                                   GridFunction intensity) {
    PointProcessModel m(space, grid);
    PoissonData d;
    d.total = raw_integral(space, grid, intensity.values);
    if (!(d.total > 0)) throw std::invalid_argument("poisson: total intensity must be positive");
    d.cdf = mass_cdf(space, grid, intensity.values);
    d.intensity = std::move(intensity);
    m.data_ = std::move(d);
    m.validate_tail();
    return m;
  }

  static PointProcessModel poisson_constant(const BaseSpace& space, const QuadratureGrid& grid,
                                            double intensity_value) {
    return poisson(space, grid,
                   GridFunction::constant(space, grid, intensity_value, UnitExp(-1, 1)));
  }

  static PointProcessModel iid_cluster(const BaseSpace& space, const QuadratureGrid& grid,
                                       std::vector<double> cardinality_pmf, GridFunction spatial_pdf) {
    PointProcessModel m(space, grid);
    double s = 0.0;
    for (double p : cardinality_pmf) {
      if (p < 0) throw std::invalid_argument("iid_cluster: pmf entries must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-10)
      throw std::invalid_argument("iid_cluster: cardinality pmf must sum to 1");
    check_normalized(space, grid, spatial_pdf.values, "iid_cluster: spatial pdf");
    IIDClusterData d;
    d.pmf = std::move(cardinality_pmf);
    d.cdf = mass_cdf(space, grid, spatial_pdf.values);
    d.pdf = std::move(spatial_pdf);
    m.data_ = std::move(d);
    m.validate_tail();
    return m;
  }

  static PointProcessModel multi_bernoulli(const BaseSpace& space, const QuadratureGrid& grid,
                                           std::vector<BernoulliComponent> components) {
    PointProcessModel m(space, grid);
    MultiBernoulliData d;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const auto& c = components[i];
      if (!(c.q >= 0.0 && c.q <= 1.0))
        throw std::invalid_argument("multi_bernoulli: q must lie in [0,1]");
      if (i > 0 && !(c.pdf.unit == components[0].pdf.unit))
        throw std::invalid_argument("multi_bernoulli: components must share one pdf unit");
      check_normalized(space, grid, c.pdf.values, "multi_bernoulli: component pdf");
      d.cdfs.push_back(mass_cdf(space, grid, c.pdf.values));
    }
    // Cardinality is Poisson-binomial over component existence.
    d.card_pmf.assign(components.size() + 1, 0.0);
    d.card_pmf[0] = 1.0;
    for (const auto& c : components) {
      for (std::size_t n = d.card_pmf.size() - 1; n > 0; --n)
        d.card_pmf[n] = d.card_pmf[n] * (1.0 - c.q) + d.card_pmf[n - 1] * c.q;
      d.card_pmf[0] *= (1.0 - c.q);
    }
    d.components = std::move(components);
    m.data_ = std::move(d);
    m.validate_tail();
    return m;
  }

  static PointProcessModel empty_only(const BaseSpace& space, const QuadratureGrid& grid) {
    PointProcessModel m(space, grid);
    m.data_ = EmptyOnlyData{GridFunction::constant(space, grid, 0.0, UnitExp(-1, 1))};
    return m;
  }

  const BaseSpace& space() const { return space_; }
  const QuadratureGrid& grid() const { return grid_; }

  Variant variant() const {
    if (std::holds_alternative<PoissonData>(data_)) return Variant::Poisson;
    if (std::holds_alternative<IIDClusterData>(data_)) return Variant::IIDCluster;
    if (std::holds_alternative<MultiBernoulliData>(data_)) return Variant::MultiBernoulli;
    return Variant::EmptyOnly;
  }

  // Smallest N such that the cardinality has no mass beyond N, or -1 when the
  // support is unbounded (Poisson).
  int support_limit() const {
    if (const auto* p = std::get_if<IIDClusterData>(&data_))
      return static_cast<int>(p->pmf.size()) - 1;
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_))
      return static_cast<int>(p->components.size());
    if (std::holds_alternative<EmptyOnlyData>(data_)) return 0;
    return -1;
  }

  // Whether the n-point density factorizes as A_n * prod_i w(x_i).  True for
  // all variants except the multi-Bernoulli mixture.
  bool product_form() const { return !std::holds_alternative<MultiBernoulliData>(data_); }

  // The per-point factor w for product-form models (intensity or spatial pdf).
  const GridFunction& point_weight() const {
    if (const auto* p = std::get_if<PoissonData>(&data_)) return p->intensity;
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) return p->pdf;
    if (const auto* p = std::get_if<EmptyOnlyData>(&data_)) return p->zero;
    throw std::logic_error("point_weight: model has no product form");
  }

  // log A_n for product-form models; -inf when the slice has no mass.
  double log_prefactor(int n) const {
    if (const auto* p = std::get_if<PoissonData>(&data_))
      return -p->total - std::lgamma(n + 1.0);
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      double rho = n < static_cast<int>(p->pmf.size()) ? p->pmf[n] : 0.0;
      return rho > 0 ? std::log(rho) : -std::numeric_limits<double>::infinity();
    }
    if (std::holds_alternative<EmptyOnlyData>(data_))
      return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    throw std::logic_error("log_prefactor: model has no product form");
  }

  // Janossy density p^(n): the density of the n-point projection measure,
  // symmetric in its arguments, with unit iota^(-n).
  Quantity janossy(const PointPattern& pattern) const {
    pattern.validate_for_evaluation(space_);
    std::vector<long long> cells(pattern.points.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      cells[i] = locate_cell(space_, grid_, pattern.points[i]);
    return Quantity(janossy_at_cells(cells), janossy_unit(pattern.size()));
  }

  // Unit of p^(n), derived from the declared unit of the model's densities.
  UnitExp janossy_unit(int n) const {
    if (const auto* p = std::get_if<PoissonData>(&data_)) return p->intensity.unit * n;
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) return p->pdf.unit * n;
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      if (!p->components.empty()) return p->components[0].pdf.unit * n;
      return UnitExp(-n, 1);
    }
    return UnitExp(-n, 1);
  }

  // p^(n) evaluated at cell midpoints, without the simpleness checks; this is
  // the evaluation the quadrature engines use, where coincident cells carry
  // the piecewise-constant value.
  double janossy_at_cells(const std::vector<long long>& cells) const {
    int n = static_cast<int>(cells.size());
    if (const auto* p = std::get_if<PoissonData>(&data_)) {
      double r = std::exp(-p->total);
      for (int i = 0; i < n; ++i) r *= p->intensity.values[cells[i]] / (i + 1);
      return r;
    }
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      if (n >= static_cast<int>(p->pmf.size())) return 0.0;
      double r = p->pmf[n];
      for (int i = 0; i < n; ++i) r *= p->pdf.values[cells[i]];
      return r;
    }
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      int m = static_cast<int>(p->components.size());
      if (n > m) return 0.0;
      // Sum over injective component assignments, divided by n!.
      double sum = mb_assignment_sum(*p, cells, 0, 0);
      double fact = 1.0;
      for (int i = 2; i <= n; ++i) fact *= i;
      return sum / fact;
    }
    return n == 0 ? 1.0 : 0.0;
  }

  // P(|Phi| = n).
  double cardinality_pmf(int n) const {
    if (n < 0) return 0.0;
    if (const auto* p = std::get_if<PoissonData>(&data_))
      return std::exp(-p->total + n * std::log(p->total) - std::lgamma(n + 1.0));
    if (const auto* p = std::get_if<IIDClusterData>(&data_))
      return n < static_cast<int>(p->pmf.size()) ? p->pmf[n] : 0.0;
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_))
      return n < static_cast<int>(p->card_pmf.size()) ? p->card_pmf[n] : 0.0;
    return n == 0 ? 1.0 : 0.0;
  }

  double mean_cardinality() const {
    if (const auto* p = std::get_if<PoissonData>(&data_)) return p->total;
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      double s = 0.0;
      for (std::size_t n = 1; n < p->pmf.size(); ++n) s += n * p->pmf[n];
      return s;
    }
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      double s = 0.0;
      for (const auto& c : p->components) s += c.q;
      return s;
    }
    return 0.0;
  }

  // Draw one pattern.  Cardinality first (inverse CDF), then points i.i.d.
  // from the conditional spatial law via cell-mass inverse CDF with a uniform
  // position inside the chosen cell.  Deterministic given the seed.
  PointPattern sample(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    PointPattern out;
    if (const auto* p = std::get_if<PoissonData>(&data_)) {
      int n = draw_cardinality(rng);
      for (int i = 0; i < n; ++i) out.points.push_back(draw_point(p->cdf, rng));
      return out;
    }
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      int n = draw_cardinality(rng);
      for (int i = 0; i < n; ++i) out.points.push_back(draw_point(p->cdf, rng));
      return out;
    }
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      for (std::size_t i = 0; i < p->components.size(); ++i) {
        bool present = next_unit_double(rng) < p->components[i].q;
        if (present) out.points.push_back(draw_point(p->cdfs[i], rng));
      }
      return out;
    }
    return out;
  }

  // Closed-form p.g.fl. where available; the truncated-series route lives in
  // the functional layer and is checked against this.
  double pgfl_closed_form(const TestFunction& h) const {
    return pgfl_closed_form_values(h.values);
  }

  double pgfl_closed_form_values(const std::vector<double>& h) const {
    double vol = cell_volume(space_, grid_).value();
    if (const auto* p = std::get_if<PoissonData>(&data_)) {
      double s = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c)
        s += (h[c] - 1.0) * p->intensity.values[c] * vol;
      return std::exp(s);
    }
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      double s = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c) s += h[c] * p->pdf.values[c] * vol;
      double g = 0.0, pw = 1.0;
      for (std::size_t n = 0; n < p->pmf.size(); ++n) {
        g += p->pmf[n] * pw;
        pw *= s;
      }
      return g;
    }
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      double g = 1.0;
      for (const auto& c : p->components) {
        double s = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * c.pdf.values[i] * vol;
        g *= (1.0 - c.q + c.q * s);
      }
      return g;
    }
    return 1.0;
  }

  // --- slice engines -------------------------------------------------------
  // All return plain numbers in the declared unit system; callers attach and
  // verify units through the Quantity algebra.

  // integral over X^n of prod_k w_k(x_k) * p^(n), one weight vector per point.
  double slice_integral(const std::vector<const std::vector<double>*>& point_weights) const {
    int n = static_cast<int>(point_weights.size());
    double vol = cell_volume(space_, grid_).value();
    if (const auto* p = std::get_if<PoissonData>(&data_)) {
      double r = std::exp(-p->total);
      for (int k = 0; k < n; ++k)
        r *= weighted_mass(*point_weights[k], p->intensity.values, vol) / (k + 1);
      return r;
    }
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      if (n >= static_cast<int>(p->pmf.size())) return 0.0;
      double r = p->pmf[n];
      for (int k = 0; k < n; ++k) r *= weighted_mass(*point_weights[k], p->pdf.values, vol);
      return r;
    }
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      int m = static_cast<int>(p->components.size());
      if (n > m) return 0.0;
      // <w_k, q_i pdf_i> table, then the injective assignment sum / n!.
      std::vector<std::vector<double>> mass(n, std::vector<double>(m));
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < m; ++i)
          mass[k][i] =
              p->components[i].q * weighted_mass(*point_weights[k], p->components[i].pdf.values, vol);
      double fact = 1.0;
      for (int i = 2; i <= n; ++i) fact *= i;
      return mb_mass_assignment_sum(*p, mass, 0, 0) / fact;
    }
    return n == 0 ? 1.0 : 0.0;
  }

  // Same integral with one shared weight vector.
  double weighted_slice_integral(const std::vector<double>& w, int n) const {
    std::vector<const std::vector<double>*> ws(n, &w);
    return slice_integral(ws);
  }

  // integral over X^n of prod_i h(x_i) * p^(n)(x_1..x_n)^power.  Cells whose
  // density falls below `support_cutoff` are excluded (support restriction;
  // relevant when power < 0 would otherwise divide by zero).
  double power_slice_integral(const std::vector<double>& h, double power, int n,
                              double support_cutoff = 1e-300) const {
    double vol = cell_volume(space_, grid_).value();
    if (const auto* p = std::get_if<PoissonData>(&data_)) {
      double s = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c) {
        double w = p->intensity.values[c];
        if (w > support_cutoff) s += h[c] * std::pow(w, power) * vol;
      }
      double log_a = power * (-p->total - std::lgamma(n + 1.0));
      if (n == 0) return std::exp(log_a);
      if (s <= 0.0) return 0.0;
      return std::exp(log_a + n * std::log(s));
    }
    if (const auto* p = std::get_if<IIDClusterData>(&data_)) {
      if (n >= static_cast<int>(p->pmf.size()) || p->pmf[n] <= 0.0) return 0.0;
      double s = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c) {
        double w = p->pdf.values[c];
        if (w > support_cutoff) s += h[c] * std::pow(w, power) * vol;
      }
      double r = std::pow(p->pmf[n], power);
      for (int k = 0; k < n; ++k) r *= s;
      return r;
    }
    if (std::holds_alternative<MultiBernoulliData>(data_)) {
      if (n > support_limit()) return 0.0;
      if (n == 0) {
        double p0 = cardinality_pmf(0);
        return p0 > support_cutoff ? std::pow(p0, power) : 0.0;
      }
      // No product form: enumerate cell tuples (support is capped at the
      // component count, so n stays small).
      return enumerate_power_slice(h, power, n, support_cutoff);
    }
    return n == 0 ? 1.0 : 0.0;
  }

  // Relabeled copy: 1 iota = k iota'.  Window coordinates, density values,
  // and nothing else change; probabilities are preserved by construction.
  PointProcessModel relabeled(double k) const {
    PointProcessModel m(space_.relabeled(k), grid_);
    if (const auto* p = std::get_if<PoissonData>(&data_))
      return poisson(m.space_, grid_, relabel_function(p->intensity, k));
    if (const auto* p = std::get_if<IIDClusterData>(&data_))
      return iid_cluster(m.space_, grid_, p->pmf, relabel_function(p->pdf, k));
    if (const auto* p = std::get_if<MultiBernoulliData>(&data_)) {
      std::vector<BernoulliComponent> comps;
      for (const auto& c : p->components)
        comps.push_back({c.q, relabel_function(c.pdf, k)});
      return multi_bernoulli(m.space_, grid_, std::move(comps));
    }
    return empty_only(m.space_, grid_);
  }

 private:
  // Nested payload structs carry no default member initializers: the
  // factories assign every field, and NSDMIs here trip gcc's completeness
  // check for std::variant inside the enclosing class.
  struct PoissonData {
    GridFunction intensity;
    double total;  // numeric integral of the intensity over the window
    std::vector<double> cdf;
  };
  struct IIDClusterData {
    std::vector<double> pmf;
    GridFunction pdf;
    std::vector<double> cdf;
  };
  struct MultiBernoulliData {
    std::vector<BernoulliComponent> components;
    std::vector<std::vector<double>> cdfs;
    std::vector<double> card_pmf;
  };
  struct EmptyOnlyData {
    GridFunction zero;  // all-zero per-point weight, so product-form code is total
  };

  PointProcessModel(const BaseSpace& space, const QuadratureGrid& grid)
      : space_(space), grid_(grid) {
    space_.validate();
    grid_.validate();
  }

  static double raw_integral(const BaseSpace& space, const QuadratureGrid& grid,
                             const std::vector<double>& values) {
    double vol = cell_volume(space, grid).value();
    double s = 0.0;
    for (double v : values) s += v;
    return s * vol;
  }

  static void check_normalized(const BaseSpace& space, const QuadratureGrid& grid,
                               const std::vector<double>& values, const char* what) {
    if (values.size() != static_cast<std::size_t>(grid.cell_count(space)))
      throw std::invalid_argument(std::string(what) + ": wrong number of cells");
    double s = raw_integral(space, grid, values);
    if (std::abs(s - 1.0) > 1e-8)
      throw std::invalid_argument(std::string(what) + ": must integrate to 1 on the window");
  }

  static std::vector<double> mass_cdf(const BaseSpace& space, const QuadratureGrid& grid,
                                      const std::vector<double>& values) {
    std::vector<double> cdf(values.size());
    double run = 0.0, vol = cell_volume(space, grid).value();
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (values[c] < 0) throw std::invalid_argument("density values must be nonnegative");
      run += values[c] * vol;
      cdf[c] = run;
    }
    double total = cdf.back();
    if (total > 0)
      for (double& x : cdf) x /= total;
    return cdf;
  }

  static double weighted_mass(const std::vector<double>& w, const std::vector<double>& density,
                              double vol) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * density[c] * vol;
    return s;
  }

  static GridFunction relabel_function(const GridFunction& f, double k) {
    GridFunction out = f;
    double factor = std::pow(k, f.unit.to_double());
    for (double& v : out.values) v *= factor;
    return out;
  }

  // Tail rule: the configured n_max must hold all but tail_tolerance of the
  // cardinality mass.
  void validate_tail() const {
    double cum = 0.0;
    for (int n = 0; n <= grid_.n_max; ++n) cum += cardinality_pmf(n);
    if (1.0 - cum > grid_.tail_tolerance)
      throw std::invalid_argument(
          "grid n_max leaves cardinality tail mass above tail_tolerance");
  }

  int draw_cardinality(std::mt19937_64& rng) const {
    double u = next_unit_double(rng);
    double cum = 0.0;
    for (int n = 0; n <= grid_.n_max; ++n) {
      cum += cardinality_pmf(n);
      if (u < cum) return n;
    }
    return grid_.n_max;
  }

  std::vector<double> draw_point(const std::vector<double>& cdf, std::mt19937_64& rng) const {
    double u = next_unit_double(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    long long cell = std::min<long long>(it - cdf.begin(), cdf.size() - 1);
    std::vector<int> idx = cell_multi_index(space_, grid_, cell);
    std::vector<double> x(space_.dimension);
    for (int a = 0; a < space_.dimension; ++a) {
      double w = axis_cell_width(space_, grid_, a);
      x[a] = space_.bounds[a].first + (idx[a] + next_unit_double(rng)) * w;
    }
    return x;
  }

  // Sum over injective assignments of points to components of
  // prod_k q_i pdf_i(x_k) * prod_{unused}(1 - q_i), via recursion on points.
  double mb_assignment_sum(const MultiBernoulliData& d, const std::vector<long long>& cells,
                           int k, std::uint64_t used) const {
    int m = static_cast<int>(d.components.size());
    if (k == static_cast<int>(cells.size())) {
      double rest = 1.0;
      for (int i = 0; i < m; ++i)
        if (!(used >> i & 1)) rest *= (1.0 - d.components[i].q);
      return rest;
    }
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (used >> i & 1) continue;
      double f = d.components[i].q * d.components[i].pdf.values[cells[k]];
      if (f != 0.0) s += f * mb_assignment_sum(d, cells, k + 1, used | (1ull << i));
    }
    return s;
  }

  double mb_mass_assignment_sum(const MultiBernoulliData& d,
                                const std::vector<std::vector<double>>& mass, int k,
                                std::uint64_t used) const {
    int m = static_cast<int>(d.components.size());
    if (k == static_cast<int>(mass.size())) {
      double rest = 1.0;
      for (int i = 0; i < m; ++i)
        if (!(used >> i & 1)) rest *= (1.0 - d.components[i].q);
      return rest;
    }
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (used >> i & 1) continue;
      if (mass[k][i] != 0.0)
        s += mass[k][i] * mb_mass_assignment_sum(d, mass, k + 1, used | (1ull << i));
    }
    return s;
  }

  double enumerate_power_slice(const std::vector<double>& h, double power, int n,
                               double support_cutoff) const {
    long long cells = grid_.cell_count(space_);
    double vol = cell_volume(space_, grid_).value();
    std::vector<long long> tuple(n, 0);
    double sum = 0.0;
    while (true) {
      double hw = 1.0;
      for (int k = 0; k < n; ++k) hw *= h[tuple[k]];
      if (hw != 0.0) {
        double p = janossy_at_cells(tuple);
        if (p > support_cutoff) sum += hw * std::pow(p, power) * std::pow(vol, n);
      }
      int k = n - 1;
      while (k >= 0 && ++tuple[k] == cells) tuple[k--] = 0;
      if (k < 0) break;
    }
    return sum;
  }

  BaseSpace space_;
  QuadratureGrid grid_;
  std::variant<PoissonData, IIDClusterData, MultiBernoulliData, EmptyOnlyData> data_;
};

}  // namespace ppinfo
