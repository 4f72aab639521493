#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppinfo/units.hpp"

namespace ppinfo {

struct OutOfWindowError : std::runtime_error {
  OutOfWindowError() : std::runtime_error("point lies outside the window") {}
};
struct DuplicatePointsError : std::runtime_error {
  DuplicatePointsError() : std::runtime_error("pattern has coincident points (process is simple)") {}
};

// Bounded axis-aligned window in d dimensions.  The base measure of the whole
// window carries unit iota, so each axis extent carries iota^(1/d).
struct BaseSpace {
  int dimension = 1;
  std::vector<std::pair<double, double>> bounds;  // per axis, in the declared unit system
  std::string unit_name = "iota";

  static BaseSpace interval(double lo, double hi, std::string unit_name = "iota") {
    BaseSpace s;
    s.dimension = 1;
    s.bounds = {{lo, hi}};
    s.unit_name = std::move(unit_name);
    s.validate();
    return s;
  }

  void validate() const {
    if (dimension < 1) throw std::invalid_argument("BaseSpace: dimension must be positive");
    if (static_cast<int>(bounds.size()) != dimension)
      throw std::invalid_argument("BaseSpace: bounds must list one interval per axis");
    for (const auto& [lo, hi] : bounds)
      if (!(lo < hi)) throw std::invalid_argument("BaseSpace: lower bound must be below upper");
  }

  UnitExp axis_unit() const { return UnitExp(1, dimension); }

  Quantity axis_extent(int axis) const {
    return Quantity(bounds[axis].second - bounds[axis].first, axis_unit());
  }

  // Total window measure; unit iota by construction.
  Quantity window_measure() const {
    Quantity m = Quantity::unitless(1.0);
    for (int a = 0; a < dimension; ++a) m = m * axis_extent(a);
    return m;
  }

  bool contains(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dimension) return false;
    for (int a = 0; a < dimension; ++a)
      if (x[a] < bounds[a].first || x[a] > bounds[a].second) return false;
    return true;
  }

  // Relabeled copy with 1 iota = k iota': coordinates scale by k^(1/d).
  BaseSpace relabeled(double k) const {
    BaseSpace s = *this;
    double f = std::pow(k, 1.0 / dimension);
    for (auto& [lo, hi] : s.bounds) {
      lo *= f;
      hi *= f;
    }
    return s;
  }
};

// Shared discretization: uniform cells per axis, truncation order for the
// cardinality series, and the tolerated tail mass beyond it.
struct QuadratureGrid {
  int cells_per_axis = 100;
  int n_max = 40;
  double tail_tolerance = 1e-10;

  void validate() const {
    if (cells_per_axis < 1) throw std::invalid_argument("QuadratureGrid: cells_per_axis must be positive");
    if (n_max < 1) throw std::invalid_argument("QuadratureGrid: n_max must be positive");
    if (!(tail_tolerance > 0)) throw std::invalid_argument("QuadratureGrid: tail_tolerance must be positive");
  }

  long long cell_count(const BaseSpace& space) const {
    long long n = 1;
    for (int a = 0; a < space.dimension; ++a) n *= cells_per_axis;
    return n;
  }
};

inline double axis_cell_width(const BaseSpace& space, const QuadratureGrid& grid, int axis) {
  return (space.bounds[axis].second - space.bounds[axis].first) / grid.cells_per_axis;
}

// Volume of one cell; unit iota.
inline Quantity cell_volume(const BaseSpace& space, const QuadratureGrid& grid) {
  Quantity v = Quantity::unitless(1.0);
  for (int a = 0; a < space.dimension; ++a)
    v = v * Quantity(axis_cell_width(space, grid, a), space.axis_unit());
  return v;
}

inline std::vector<int> cell_multi_index(const BaseSpace& space, const QuadratureGrid& grid,
                                         long long flat) {
  std::vector<int> idx(space.dimension);
  for (int a = space.dimension - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % grid.cells_per_axis);
    flat /= grid.cells_per_axis;
  }
  return idx;
}

inline long long cell_flat_index(const BaseSpace& space, const QuadratureGrid& grid,
                                 const std::vector<int>& idx) {
  long long flat = 0;
  for (int a = 0; a < space.dimension; ++a) flat = flat * grid.cells_per_axis + idx[a];
  return flat;
}

inline std::vector<double> cell_midpoint(const BaseSpace& space, const QuadratureGrid& grid,
                                         long long flat) {
  std::vector<int> idx = cell_multi_index(space, grid, flat);
  std::vector<double> x(space.dimension);
  for (int a = 0; a < space.dimension; ++a)
    x[a] = space.bounds[a].first + (idx[a] + 0.5) * axis_cell_width(space, grid, a);
  return x;
}

// Cell containing x; upper-boundary points land in the last cell.
inline long long locate_cell(const BaseSpace& space, const QuadratureGrid& grid,
                             const std::vector<double>& x) {
  if (!space.contains(x)) throw OutOfWindowError();
  std::vector<int> idx(space.dimension);
  for (int a = 0; a < space.dimension; ++a) {
    double rel = (x[a] - space.bounds[a].first) / axis_cell_width(space, grid, a);
    int i = static_cast<int>(rel);
    if (i >= grid.cells_per_axis) i = grid.cells_per_axis - 1;
    idx[a] = i;
  }
  return cell_flat_index(space, grid, idx);
}

// Piecewise-constant function on the grid with a declared unit.  Closed-form
// model inputs are sampled onto this representation at construction, so every
// integral in the toolkit runs through the same midpoint pathway.
struct GridFunction {
  std::vector<double> values;  // one per flat cell index
  UnitExp unit;

  Quantity at(long long cell) const { return Quantity(values[cell], unit); }

  static GridFunction constant(const BaseSpace& space, const QuadratureGrid& grid,
                               double value, UnitExp unit) {
    return GridFunction{std::vector<double>(grid.cell_count(space), value), unit};
  }

  // Spatial density integrating to 1 over the window, unit iota^-1.
  static GridFunction uniform_pdf(const BaseSpace& space, const QuadratureGrid& grid) {
    double inv = 1.0 / space.window_measure().value();
    return constant(space, grid, inv, UnitExp(-1, 1));
  }
};

// Midpoint integral of a grid function over the window; unit follows from
// the function's unit plus one power of iota from the volume element.
inline Quantity grid_integral(const BaseSpace& space, const QuadratureGrid& grid,
                              const GridFunction& f) {
  Quantity vol = cell_volume(space, grid);
  double s = 0.0;
  for (double v : f.values) s += v;
  return Quantity(s, f.unit) * vol;
}

// Unitless test function with values in [0,1].
struct TestFunction {
  std::vector<double> values;

  TestFunction() = default;
  explicit TestFunction(std::vector<double> v) : values(std::move(v)) {
    for (double x : values)
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("TestFunction: values must lie in [0,1]");
  }

  static TestFunction constant(const BaseSpace& space, const QuadratureGrid& grid, double v) {
    return TestFunction(std::vector<double>(grid.cell_count(space), v));
  }
};

// Finite ordered tuple of points; the empty tuple is the empty pattern.
struct PointPattern {
  std::vector<std::vector<double>> points;

  int size() const { return static_cast<int>(points.size()); }
  bool empty() const { return points.empty(); }

  static PointPattern empty_pattern() { return PointPattern{}; }
  static PointPattern of(std::initializer_list<std::vector<double>> pts) {
    return PointPattern{std::vector<std::vector<double>>(pts)};
  }

  // Window membership plus pairwise distinctness (simple point process).
  void validate_for_evaluation(const BaseSpace& space) const {
    for (const auto& p : points)
      if (!space.contains(p)) throw OutOfWindowError();
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j)
        if (points[i] == points[j]) throw DuplicatePointsError();
  }

  PointPattern relabeled(double k, const BaseSpace& space) const {
    PointPattern out = *this;
    double f = std::pow(k, 1.0 / space.dimension);
    for (auto& p : out.points)
      for (double& c : p) c *= f;
    return out;
  }
};

// Uniform double in [0,1) from the top 53 bits of the generator output, so
// sampled streams do not depend on the standard library's distribution
// implementation.
inline double next_unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ppinfo
