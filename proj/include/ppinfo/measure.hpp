#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ppinfo/grid.hpp"
#include "ppinfo/model.hpp"
#include "ppinfo/units.hpp"

namespace ppinfo {

// The c-parameterized reference measure on the disjoint-union space:
// lambda_c(B) = 1_B(empty) + sum_n lambda_X^n(B ∩ X^n) / c^n.  The constant c
// carries unit iota, which is what makes the measure (and the pdf taken
// against it) unitless.
struct ReferenceMeasure {
  Quantity c;

  explicit ReferenceMeasure(double c_value) : c(c_value, UnitExp(1, 1)) {
    if (!(c_value > 0)) throw std::invalid_argument("reference measure: c must be positive");
  }

  ReferenceMeasure relabeled(double k) const {
    return ReferenceMeasure(convert_unit_system(c, k).value());
  }
};

// --- grid-aligned measurable sets -----------------------------------------

// Half-open run of cell indices along one axis.
struct CellRange {
  long long lo = 0;
  long long hi = 0;  // exclusive
};

// Union of disjoint, sorted cell ranges along one axis.
struct AxisSet {
  std::vector<CellRange> ranges;
};

// One factor B_i ⊂ X: a product of per-axis cell-range unions.
struct Region {
  std::vector<AxisSet> axes;

  void validate(const BaseSpace& space, const QuadratureGrid& grid) const {
    if (static_cast<int>(axes.size()) != space.dimension)
      throw std::invalid_argument("region: one axis set per dimension required");
    for (const auto& ax : axes) {
      long long prev = 0;
      if (ax.ranges.empty()) throw std::invalid_argument("region: empty axis set");
      for (std::size_t r = 0; r < ax.ranges.size(); ++r) {
        const auto& rg = ax.ranges[r];
        if (rg.lo < 0 || rg.hi > grid.cells_per_axis || rg.lo >= rg.hi)
          throw std::invalid_argument("region: range outside grid or empty");
        if (r > 0 && rg.lo < prev)
          throw std::invalid_argument("region: ranges must be sorted and disjoint");
        prev = rg.hi;
      }
    }
  }
};

// Region covering one coordinate box, snapped to the grid.  Box edges must
// lie on cell boundaries (within a small alignment tolerance).
inline Region region_box(const BaseSpace& space, const QuadratureGrid& grid,
                         const std::vector<std::pair<double, double>>& bounds) {
  if (static_cast<int>(bounds.size()) != space.dimension)
    throw std::invalid_argument("region_box: wrong number of axis bounds");
  Region region;
  for (int a = 0; a < space.dimension; ++a) {
    double w = axis_cell_width(space, grid, a);
    double extent = space.bounds[a].second - space.bounds[a].first;
    auto snap = [&](double x) {
      double rel = (x - space.bounds[a].first) / w;
      long long idx = std::llround(rel);
      if (std::abs(rel - idx) * w > 1e-9 * extent)
        throw std::invalid_argument("region_box: edge not grid-aligned");
      return idx;
    };
    CellRange r{snap(bounds[a].first), snap(bounds[a].second)};
    region.axes.push_back(AxisSet{{r}});
  }
  region.validate(space, grid);
  return region;
}

inline Region region_window(const BaseSpace& space, const QuadratureGrid& grid) {
  Region region;
  for (int a = 0; a < space.dimension; ++a)
    region.axes.push_back(AxisSet{{CellRange{0, grid.cells_per_axis}}});
  return region;
}

// 0/1 weights over flat cells for a region.
inline std::vector<double> region_mask(const BaseSpace& space, const QuadratureGrid& grid,
                                       const Region& region) {
  region.validate(space, grid);
  long long total = grid.cell_count(space);
  std::vector<double> mask(total, 0.0);
  for (long long c = 0; c < total; ++c) {
    std::vector<int> idx = cell_multi_index(space, grid, c);
    bool in = true;
    for (int a = 0; a < space.dimension && in; ++a) {
      bool axis_in = false;
      for (const auto& rg : region.axes[a].ranges) {
        if (idx[a] >= rg.lo && idx[a] < rg.hi) {
          axis_in = true;
          break;
        }
      }
      in = axis_in;
    }
    if (in) mask[c] = 1.0;
  }
  return mask;
}

// lambda_X-measure of a region, unit iota.
inline Quantity region_measure(const BaseSpace& space, const QuadratureGrid& grid,
                               const Region& region) {
  std::vector<double> mask = region_mask(space, grid, region);
  double cells = 0.0;
  for (double m : mask) cells += m;
  Quantity vol = cell_volume(space, grid);
  return Quantity(cells * vol.value(), vol.unit());
}

// A measurable subset of the disjoint-union space: an optional empty-pattern
// atom, one product slice B_1×…×B_n per listed cardinality, and optionally
// the full tail (every n ≥ 1 slice equal to the whole window X^n).
struct PatternSet {
  bool contains_empty = false;
  std::map<int, std::vector<Region>> slices;
  bool full_tail = false;

  static PatternSet empty_only() {
    PatternSet b;
    b.contains_empty = true;
    return b;
  }

  static PatternSet everything() {
    PatternSet b;
    b.contains_empty = true;
    b.full_tail = true;
    return b;
  }

  static PatternSet single_slice(std::vector<Region> factors) {
    PatternSet b;
    int n = static_cast<int>(factors.size());
    if (n < 1) throw std::invalid_argument("pattern set: slice needs at least one factor");
    b.slices[n] = std::move(factors);
    return b;
  }

  PatternSet with_empty() const {
    PatternSet b = *this;
    b.contains_empty = true;
    return b;
  }

  void validate(const BaseSpace& space, const QuadratureGrid& grid) const {
    if (full_tail && !slices.empty())
      throw std::invalid_argument("pattern set: full_tail excludes explicit slices");
    for (const auto& [n, factors] : slices) {
      if (n < 1 || n > grid.n_max)
        throw std::invalid_argument("pattern set: slice cardinality outside [1, n_max]");
      if (static_cast<int>(factors.size()) != n)
        throw std::invalid_argument("pattern set: slice must have n factors");
      for (const auto& f : factors) f.validate(space, grid);
    }
  }
};

// --- the measure and its integrals ------------------------------------------

struct LambdaMeasure {
  double value = 0.0;
  bool infinite = false;
};

// lambda_c(B).  Every summand is folded through the checked unit algebra; the
// full tail uses the exact geometric sum, which diverges when the window
// measure reaches c (the measure is allowed to be infinite).
inline LambdaMeasure lambda_c(const PatternSet& B, const ReferenceMeasure& ref,
                              const BaseSpace& space, const QuadratureGrid& grid) {
  B.validate(space, grid);
  Quantity acc = Quantity::unitless(B.contains_empty ? 1.0 : 0.0);
  for (const auto& [n, factors] : B.slices) {
    Quantity term = pow(ref.c, Rational(-n)).value();
    for (const auto& f : factors) term = term * region_measure(space, grid, f);
    acc = checked_add(acc, term).value();
  }
  if (B.full_tail) {
    Quantity r = space.window_measure() / ref.c;
    if (!r.is_unitless()) throw std::logic_error("lambda_c: tail ratio must be unitless");
    if (r.value() >= 1.0) return LambdaMeasure{std::numeric_limits<double>::infinity(), true};
    acc = checked_add(acc, Quantity::unitless(r.value() / (1.0 - r.value()))).value();
  }
  if (!acc.is_unitless()) throw std::logic_error("lambda_c: result must be unitless");
  return LambdaMeasure{acc.value(), false};
}

// Integrands for the lambda_c integral.  The separable form g(φ) =
// prefactor(n) · prod_i factor(x_i) is evaluated exactly from per-region cell
// sums; the generic form enumerates cell tuples (guarded by a budget) and
// evaluates the callable at jittered in-cell points so patterns stay simple.
struct SeparableIntegrand {
  std::function<Quantity(int)> prefactor;
  GridFunction factor;
};

struct GenericIntegrand {
  std::function<Quantity(const PointPattern&)> fn;
  long long tuple_budget = 20000000;
  // Slices with more points than this are identically zero and are skipped
  // rather than enumerated; -1 means the integrand has unbounded support.
  int support_limit = -1;
};

using PatternIntegrand = std::variant<SeparableIntegrand, GenericIntegrand>;

namespace detail {

// Pattern whose k-th point sits in cell `cells[k]`, offset slightly and
// distinctly from the midpoint so that coincident cells still give a simple
// pattern; on a piecewise-constant density the value is the cell value.
inline PointPattern jittered_pattern(const BaseSpace& space, const QuadratureGrid& grid,
                                     const std::vector<long long>& cells) {
  PointPattern p;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::vector<double> x = cell_midpoint(space, grid, cells[k]);
    double shift = (static_cast<double>(k) + 1.0) * 1e-7;
    for (int a = 0; a < space.dimension; ++a)
      x[a] += shift * axis_cell_width(space, grid, a);
    p.points.push_back(std::move(x));
  }
  return p;
}

// Flat cell lists for each factor of a slice.
inline std::vector<std::vector<long long>> factor_cells(const BaseSpace& space,
                                                        const QuadratureGrid& grid,
                                                        const std::vector<Region>& factors) {
  std::vector<std::vector<long long>> out;
  for (const auto& f : factors) {
    std::vector<double> mask = region_mask(space, grid, f);
    std::vector<long long> cells;
    for (long long c = 0; c < static_cast<long long>(mask.size()); ++c)
      if (mask[c] != 0.0) cells.push_back(c);
    out.push_back(std::move(cells));
  }
  return out;
}

// integral over B_1×…×B_n of the generic callable, unit-checked per slice.
inline Quantity generic_slice_integral(const GenericIntegrand& g, const BaseSpace& space,
                                       const QuadratureGrid& grid,
                                       const std::vector<Region>& factors) {
  auto cells = factor_cells(space, grid, factors);
  long long tuples = 1;
  for (const auto& c : cells) {
    tuples *= static_cast<long long>(c.size());
    if (tuples > g.tuple_budget)
      throw std::runtime_error("integrate: pattern set exceeds the tuple budget");
  }
  int n = static_cast<int>(factors.size());
  double vol = cell_volume(space, grid).value();
  double voln = 1.0;
  for (int k = 0; k < n; ++k) voln *= vol;
  std::vector<std::size_t> pick(n, 0);
  double sum = 0.0;
  bool have_unit = false;
  UnitExp unit(0, 1);
  if (tuples > 0) {
    while (true) {
      std::vector<long long> tuple(n);
      for (int k = 0; k < n; ++k) tuple[k] = cells[k][pick[k]];
      Quantity v = g.fn(jittered_pattern(space, grid, tuple));
      if (!have_unit) {
        unit = v.unit();
        have_unit = true;
      } else if (!(v.unit() == unit)) {
        throw std::invalid_argument("integrate: integrand unit varies within one slice");
      }
      sum += v.value();
      int k = n - 1;
      while (k >= 0 && ++pick[k] == cells[k].size()) pick[k--] = 0;
      if (k < 0) break;
    }
  }
  return Quantity(sum * voln, unit + UnitExp(n, 1));
}

}  // namespace detail

// Integral of g over B with respect to lambda_c:
//   g(∅)·1_B(∅) + sum_n c^{-n} ∫_{B ∩ X^n} g dx_1…dx_n,
// midpoint tensor-product quadrature per slice, per-term units folded through
// checked_add (an integrand whose unit varies with n in a way the c^{-n} and
// volume factors do not cancel yields an IncommensurableSum error value).
inline Checked<Quantity> integrate(const PatternIntegrand& g, const PatternSet& B,
                                   const ReferenceMeasure& ref, const BaseSpace& space,
                                   const QuadratureGrid& grid) {
  B.validate(space, grid);
  bool have = false;
  Quantity acc = Quantity::unitless(0.0);
  std::optional<UnitError> fold_error;
  auto fold = [&](const Quantity& term) -> bool {
    if (!have) {
      acc = term;
      have = true;
      return true;
    }
    Checked<Quantity> next = checked_add(acc, term);
    if (!next.ok()) {
      fold_error = next.error();
      return false;
    }
    acc = next.value();
    return true;
  };

  auto evaluate_empty = [&]() -> Quantity {
    if (const auto* s = std::get_if<SeparableIntegrand>(&g)) return s->prefactor(0);
    return std::get<GenericIntegrand>(g).fn(PointPattern::empty_pattern());
  };

  auto slice_term = [&](const std::vector<Region>& factors) -> Quantity {
    int n = static_cast<int>(factors.size());
    Quantity cn = pow(ref.c, Rational(-n)).value();
    if (const auto* s = std::get_if<SeparableIntegrand>(&g)) {
      Quantity term = cn * s->prefactor(n);
      double vol = cell_volume(space, grid).value();
      for (const auto& f : factors) {
        std::vector<double> mask = region_mask(space, grid, f);
        double m = 0.0;
        for (std::size_t c = 0; c < mask.size(); ++c) m += mask[c] * s->factor.values[c];
        term = term * Quantity(m * vol, s->factor.unit + UnitExp(1, 1));
      }
      return term;
    }
    return cn * detail::generic_slice_integral(std::get<GenericIntegrand>(g), space, grid, factors);
  };

  // Slices beyond a generic integrand's declared support hold no mass; they
  // contribute nothing and are not enumerated.
  const auto* generic = std::get_if<GenericIntegrand>(&g);
  auto slice_void = [&](int n) {
    return generic && generic->support_limit >= 0 && n > generic->support_limit;
  };

  if (B.contains_empty)
    if (!fold(evaluate_empty())) return Checked<Quantity>(*fold_error);

  if (B.full_tail) {
    Region window = region_window(space, grid);
    for (int n = 1; n <= grid.n_max; ++n) {
      if (slice_void(n)) break;
      std::vector<Region> factors(n, window);
      if (!fold(slice_term(factors))) return Checked<Quantity>(*fold_error);
    }
  } else {
    for (const auto& [n, factors] : B.slices) {
      if (slice_void(n)) continue;
      if (!fold(slice_term(factors))) return Checked<Quantity>(*fold_error);
    }
  }
  if (!have) return Checked<Quantity>(Quantity::unitless(0.0));
  return Checked<Quantity>(acc);
}

// Integrand for f_Φ = c^{|φ|} p^(|φ|): separable for product-form models,
// generic (janossy-backed) otherwise.
inline PatternIntegrand pdf_integrand(const PointProcessModel& model,
                                      const ReferenceMeasure& ref) {
  if (model.product_form()) {
    Quantity c = ref.c;
    const PointProcessModel* m = &model;
    return SeparableIntegrand{
        [m, c](int n) {
          double a = std::exp(m->log_prefactor(n));
          return pow(c, Rational(n)).value() * Quantity::unitless(a);
        },
        model.point_weight()};
  }
  const PointProcessModel* m = &model;
  Quantity c = ref.c;
  return GenericIntegrand{[m, c](const PointPattern& p) {
            return pow(c, Rational(p.size())).value() * m->janossy(p);
          },
          20000000, model.support_limit()};
}

// f_Φ(φ) = c^{|φ|}·p^(|φ|)(φ), verified unitless through the Quantity algebra.
inline double pdf(const PointProcessModel& model, const ReferenceMeasure& ref,
                  const PointPattern& pattern) {
  Quantity p = model.janossy(pattern);
  Quantity f = pow(ref.c, Rational(pattern.size())).value() * p;
  if (!f.is_unitless()) throw UnitMismatchError(f.unit());
  return f.value();
}

// P_Φ(B) = sum_n ∫_{B ∩ X^n} p^(n) dx — no reference measure involved.  Each
// slice's unit (janossy unit plus volume powers) is verified to vanish.
inline double prob_measure(const PointProcessModel& model, const PatternSet& B,
                           const QuadratureGrid& grid) {
  const BaseSpace& space = model.space();
  B.validate(space, grid);
  auto checked_term = [&](int n, double value) {
    Quantity term(value, model.janossy_unit(n) + UnitExp(n, 1));
    if (!term.is_unitless()) throw UnitMismatchError(term.unit());
    return term.value();
  };
  double total = 0.0;
  if (B.contains_empty) total += checked_term(0, model.janossy_at_cells({}));
  if (B.full_tail) {
    std::vector<double> ones(grid.cell_count(space), 1.0);
    int cap = model.support_limit() < 0 ? grid.n_max
                                        : std::min(model.support_limit(), grid.n_max);
    for (int n = 1; n <= cap; ++n)
      total += checked_term(n, model.weighted_slice_integral(ones, n));
  } else {
    for (const auto& [n, factors] : B.slices) {
      std::vector<std::vector<double>> masks;
      for (const auto& f : factors) masks.push_back(region_mask(space, grid, f));
      std::vector<const std::vector<double>*> ptrs;
      for (const auto& m : masks) ptrs.push_back(&m);
      total += checked_term(n, model.slice_integral(ptrs));
    }
  }
  return total;
}

}  // namespace ppinfo
