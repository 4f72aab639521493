#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include "ppinfo/rational.hpp"

// Dimensional-analysis engine for a single base unit iota, the unit of the
// base measure on the window.  Every scalar that can carry a dimension is a
// Quantity: a finite real value paired with an exact rational exponent of
// iota.  Sums, logs, and exponentials are checked; a failed check is a value
// describing the offending exponents, not an exception, so downstream audits
// can render it.

namespace ppinfo {

using UnitExp = Rational;

inline UnitExp unitless_exp() { return UnitExp(); }

class Quantity {
 public:
  Quantity() : value_(0.0), unit_() {}
  Quantity(double value, UnitExp unit) : value_(value), unit_(unit) {
    if (!std::isfinite(value_))
      throw std::invalid_argument("Quantity: value must be finite");
  }
  static Quantity unitless(double value) { return Quantity(value, UnitExp()); }

  double value() const { return value_; }
  const UnitExp& unit() const { return unit_; }
  bool is_unitless() const { return unit_.is_zero(); }

 private:
  double value_;
  UnitExp unit_;
};

// Unit-check failures.  Each carries the exponent(s) that caused it.
struct IncommensurableSum {
  UnitExp left;
  UnitExp right;
};
struct DimensionalLog {
  UnitExp unit;
};
struct DimensionalExp {
  UnitExp unit;
};
struct NonpositiveLog {
  double value;
};
struct NegativeBase {
  double base;
};

using UnitError = std::variant<IncommensurableSum, DimensionalLog, DimensionalExp,
                               NonpositiveLog, NegativeBase>;

inline std::string describe(const UnitError& err) {
  struct Visitor {
    std::string operator()(const IncommensurableSum& e) const {
      return "incommensurable sum: iota^" + e.left.str() + " vs iota^" + e.right.str();
    }
    std::string operator()(const DimensionalLog& e) const {
      return "log of dimensional quantity iota^" + e.unit.str();
    }
    std::string operator()(const DimensionalExp& e) const {
      return "exp of dimensional quantity iota^" + e.unit.str();
    }
    std::string operator()(const NonpositiveLog& e) const {
      return "log of nonpositive value " + std::to_string(e.value);
    }
    std::string operator()(const NegativeBase& e) const {
      return "non-integer power of nonpositive base " + std::to_string(e.base);
    }
  };
  return std::visit(Visitor{}, err);
}

// Minimal expected-style wrapper around value-or-UnitError.
template <typename T>
class Checked {
 public:
  Checked(T value) : state_(std::move(value)) {}
  Checked(UnitError err) : state_(std::move(err)) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    if (!ok()) throw std::logic_error("Checked: access to value of failed result: " +
                                      describe(std::get<UnitError>(state_)));
    return std::get<T>(state_);
  }
  const UnitError& error() const {
    if (ok()) throw std::logic_error("Checked: access to error of successful result");
    return std::get<UnitError>(state_);
  }

 private:
  std::variant<T, UnitError> state_;
};

inline Quantity operator*(const Quantity& a, const Quantity& b) {
  return Quantity(a.value() * b.value(), a.unit() + b.unit());
}

inline Quantity operator/(const Quantity& a, const Quantity& b) {
  return Quantity(a.value() / b.value(), a.unit() - b.unit());
}

inline Quantity operator-(const Quantity& a) { return Quantity(-a.value(), a.unit()); }

// a^e with exact exponent arithmetic: unit exponent scales by e.
inline Checked<Quantity> pow(const Quantity& a, const Rational& e) {
  if (e.is_zero()) return Quantity::unitless(1.0);
  double v;
  if (e.is_integer()) {
    v = std::pow(a.value(), static_cast<double>(e.num()));
  } else {
    if (a.value() <= 0.0) return UnitError(NegativeBase{a.value()});
    v = std::pow(a.value(), e.to_double());
  }
  return Quantity(v, a.unit() * e);
}

// Addition demands exactly matching exponents; anything else is the
// incommensurable-sum failure mode.
inline Checked<Quantity> checked_add(const Quantity& a, const Quantity& b) {
  if (a.unit() != b.unit())
    return UnitError(IncommensurableSum{a.unit(), b.unit()});
  return Quantity(a.value() + b.value(), a.unit());
}

// Natural log; defined only for positive unitless arguments.
inline Checked<Quantity> checked_log(const Quantity& a) {
  if (!a.is_unitless()) return UnitError(DimensionalLog{a.unit()});
  if (a.value() <= 0.0) return UnitError(NonpositiveLog{a.value()});
  return Quantity::unitless(std::log(a.value()));
}

inline Checked<Quantity> checked_exp(const Quantity& a) {
  if (!a.is_unitless()) return UnitError(DimensionalExp{a.unit()});
  return Quantity::unitless(std::exp(a.value()));
}

// Relabel the unit system: 1 iota = k iota'.  A value with exponent e picks
// up the factor k^e; the exponent itself does not change.
inline Quantity convert_unit_system(const Quantity& a, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("convert_unit_system: k must be positive");
  return Quantity(a.value() * std::pow(k, a.unit().to_double()), a.unit());
}

}  // namespace ppinfo
