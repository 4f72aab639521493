#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ppinfo/grid.hpp"
#include "ppinfo/measure.hpp"
#include "ppinfo/model.hpp"

namespace ppinfo {

// Most probable realization: the pattern, its unitless score c^n p^(n), and
// the reference constant under which it was computed.
struct MapEstimate {
  PointPattern pattern;
  double score = 0.0;
  Quantity c_used = Quantity::unitless(0.0);
};

namespace detail {

// Best (max p^(n), lexicographically smallest) cell tuple on the n-point
// slice.  Product-form models factorize, so every point independently sits in
// the first cell maximizing the per-point weight; the multi-Bernoulli search
// enumerates nondecreasing tuples (the density is symmetric, so sorted
// representatives cover all values, and the sorted maximizer is also the
// lexicographically smallest ordered one).
struct SliceBest {
  bool has_mass = false;
  double density = 0.0;  // p^(n) at the best tuple
  std::vector<long long> cells;
};

inline SliceBest best_slice_tuple(const PointProcessModel& model, int n,
                                  const QuadratureGrid& grid) {
  SliceBest best;
  if (n == 0) {
    double p0 = model.janossy_at_cells({});
    if (p0 > 0.0) {
      best.has_mass = true;
      best.density = p0;
    }
    return best;
  }
  if (model.support_limit() >= 0 && n > model.support_limit()) return best;

  if (model.product_form()) {
    const GridFunction& w = model.point_weight();
    long long arg = 0;
    for (long long c = 1; c < static_cast<long long>(w.values.size()); ++c)
      if (w.values[c] > w.values[arg]) arg = c;
    double a = model.log_prefactor(n);
    if (!std::isfinite(a) || !(w.values[arg] > 0.0)) return best;
    best.has_mass = true;
    best.density = std::exp(a) * std::pow(w.values[arg], n);
    best.cells.assign(n, arg);
    return best;
  }

  long long cells = grid.cell_count(model.space());
  double combos = 1.0;
  for (int i = 0; i < n; ++i) combos = combos * (cells + i) / (i + 1);
  if (combos > 2e7) throw std::runtime_error("map search: slice too large to enumerate");

  std::vector<long long> tuple(n, 0);
  while (true) {
    double p = model.janossy_at_cells(tuple);
    if (p > best.density) {
      best.has_mass = true;
      best.density = p;
      best.cells = tuple;
    }
    // next nondecreasing tuple in lexicographic order
    int k = n - 1;
    while (k >= 0 && tuple[k] == cells - 1) --k;
    if (k < 0) break;
    long long v = tuple[k] + 1;
    for (int i = k; i < n; ++i) tuple[i] = v;
  }
  return best;
}

// Pattern at the cells' midpoints with deterministic in-cell offsets, sorted
// ascending, so repeated cells still yield a simple, canonical pattern.
inline PointPattern canonical_pattern(const BaseSpace& space, const QuadratureGrid& grid,
                                      const std::vector<long long>& cells) {
  PointPattern p;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::vector<double> x = cell_midpoint(space, grid, cells[k]);
    double shift = (static_cast<double>(k) + 1.0) * 1e-7;
    for (int a = 0; a < space.dimension; ++a)
      x[a] += shift * axis_cell_width(space, grid, a);
    p.points.push_back(std::move(x));
  }
  std::sort(p.points.begin(), p.points.end());
  return p;
}

}  // namespace detail

// arg sup over n <= n_max and grid-cell tuples of c^n p^(n); ties broken by
// smaller n, then lexicographically smallest cell indices.
inline MapEstimate map_estimate(const PointProcessModel& model, const ReferenceMeasure& ref,
                                const QuadratureGrid& grid) {
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  double best_score = -std::numeric_limits<double>::infinity();
  detail::SliceBest best;
  for (int n = 0; n <= cap; ++n) {
    detail::SliceBest sb = detail::best_slice_tuple(model, n, grid);
    if (!sb.has_mass) continue;
    double score = std::pow(ref.c.value(), n) * sb.density;
    if (score > best_score) {  // strict: ties keep the smaller n
      best_score = score;
      best = sb;
    }
  }
  MapEstimate est;
  est.pattern = detail::canonical_pattern(model.space(), grid, best.cells);
  est.score = best_score;
  est.c_used = ref.c;
  double check = pdf(model, ref, est.pattern);
  if (std::abs(check - est.score) > 1e-12 * std::max(1.0, std::abs(est.score)))
    throw std::logic_error("map_estimate: score does not match pdf at the estimate");
  return est;
}

// Set-form estimator: maximizes (c^|X| / |X|!) * f(X) with f(X) = |X|! p^(|X|).
// The factorials cancel term by term, so the argmax provably coincides with
// map_estimate; the agreement is asserted at runtime.
inline MapEstimate set_map_estimate(const PointProcessModel& model, const ReferenceMeasure& ref,
                                    const QuadratureGrid& grid) {
  int cap = model.support_limit() < 0 ? grid.n_max
                                      : std::min(model.support_limit(), grid.n_max);
  double best_score = -std::numeric_limits<double>::infinity();
  detail::SliceBest best;
  for (int n = 0; n <= cap; ++n) {
    detail::SliceBest sb = detail::best_slice_tuple(model, n, grid);
    if (!sb.has_mass) continue;
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    double set_density = fact * sb.density;                       // f(X) = n! p^(n)
    double score = std::pow(ref.c.value(), n) / fact * set_density;
    if (score > best_score) {
      best_score = score;
      best = sb;
    }
  }
  MapEstimate est;
  est.pattern = detail::canonical_pattern(model.space(), grid, best.cells);
  est.score = best_score;
  est.c_used = ref.c;

  MapEstimate direct = map_estimate(model, ref, grid);
  if (direct.pattern.points != est.pattern.points)
    throw std::logic_error("set_map_estimate: argmax disagrees with map_estimate");
  return est;
}

struct CSweepRow {
  double c_value = 0.0;
  MapEstimate estimate;
};

struct CSweepResult {
  std::vector<CSweepRow> rows;                 // ascending in c
  std::optional<double> crossing;              // first c where the MAP cardinality changes
};

// MAP estimate per c (ascending), plus the first cardinality-change point
// located by bisection to 1e-3 relative.
inline CSweepResult c_sensitivity(const PointProcessModel& model, const QuadratureGrid& grid,
                                  std::vector<double> c_values) {
  if (c_values.empty()) throw std::invalid_argument("c_sensitivity: need at least one c");
  std::sort(c_values.begin(), c_values.end());
  CSweepResult result;
  for (double c : c_values) {
    ReferenceMeasure ref(c);
    result.rows.push_back(CSweepRow{c, map_estimate(model, ref, grid)});
  }
  for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
    int n_lo = result.rows[i].estimate.pattern.size();
    int n_hi = result.rows[i + 1].estimate.pattern.size();
    if (n_lo == n_hi) continue;
    double lo = result.rows[i].c_value, hi = result.rows[i + 1].c_value;
    while (hi - lo > 1e-3 * lo) {
      double mid = 0.5 * (lo + hi);
      int n_mid = map_estimate(model, ReferenceMeasure(mid), grid).pattern.size();
      if (n_mid == n_lo)
        lo = mid;
      else
        hi = mid;
    }
    result.crossing = 0.5 * (lo + hi);
    break;
  }
  return result;
}

}  // namespace ppinfo
