#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace ppinfo {

// Exact rational number kept in reduced form (den > 0, gcd(|num|,den) = 1).
// Used for unit exponents and for the alpha parameter of the audit
// functionals, where equality must be exact rather than tolerance-based.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(long long num, long long den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    reduce();
  }
  static Rational integer(long long n) { return Rational(n, 1); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator-() const { return Rational(-num_, den_); }
  Rational operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  Rational operator-(const Rational& o) const { return *this + (-o); }
  Rational operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
  }
  Rational operator*(long long k) const { return Rational(num_ * k, den_); }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return num_ * o.den_ < o.num_ * den_;
  }

  // "p" when integral, "p/q" otherwise.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p" or "p/q"; rejects zero denominators and trailing garbage.
  static std::optional<Rational> parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t slash = text.find('/');
    try {
      std::size_t used = 0;
      long long num = std::stoll(text.substr(0, slash), &used);
      if (used != (slash == std::string::npos ? text.size() : slash)) return std::nullopt;
      long long den = 1;
      if (slash != std::string::npos) {
        den = std::stoll(text.substr(slash + 1), &used);
        if (used != text.size() - slash - 1) return std::nullopt;
        if (den == 0) return std::nullopt;
      }
      return Rational(num, den);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

 private:
  void reduce() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  long long num_;
  long long den_;
};

inline Rational operator*(long long k, const Rational& r) { return r * k; }

}  // namespace ppinfo
