#ifndef CWFIELD_JET_HPP
#define CWFIELD_JET_HPP

#include <array>
#include <cmath>
#include <cstddef>

namespace cwfield {

/// Truncated Taylor series in one variable: holds the coefficients
/// c_j = f^(j)(x0) / j! for j = 0 .. N-1. Arithmetic is exact up to the
/// truncation order, so derivatives of composed expressions come out
/// without finite differencing.
template <std::size_t N>
class Jet {
  static_assert(N >= 1, "a jet needs at least the value coefficient");

public:
  static constexpr std::size_t order = N - 1;

  constexpr Jet() = default;
  explicit constexpr Jet(double value) { c_[0] = value; }

  /// The independent variable t evaluated at x0 (value x0, slope 1).
  static Jet variable(double x0) {
    Jet j(x0);
    if constexpr (N > 1) j.c_[1] = 1.0;
    return j;
  }

  static Jet from_coefficients(const std::array<double, N>& c) {
    Jet j;
    j.c_ = c;
    return j;
  }

  constexpr std::size_t size() const { return N; }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }
  const std::array<double, N>& coefficients() const { return c_; }

  double value() const { return c_[0]; }

  /// j-th derivative at the expansion point.
  double derivative(std::size_t j) const {
    double fact = 1.0;
    for (std::size_t k = 2; k <= j; ++k) fact *= static_cast<double>(k);
    return c_[j] * fact;
  }

  /// Re-expand f(theta * t): coefficient j picks up theta^j.
  Jet scale_argument(double theta) const {
    Jet out = *this;
    double p = 1.0;
    for (std::size_t j = 0; j < N; ++j) {
      out.c_[j] *= p;
      p *= theta;
    }
    return out;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t i = 0; i < N; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t i = 0; i < N; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out;
    for (std::size_t k = 0; k < N; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      out.c_[k] = s;
    }
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet out;
    for (std::size_t k = 0; k < N; ++k) {
      double s = a.c_[k];
      for (std::size_t j = 1; j <= k; ++j) s -= b.c_[j] * out.c_[k - j];
      out.c_[k] = s / b.c_[0];
    }
    return out;
  }

  friend Jet exp(const Jet& a) {
    Jet out;
    out.c_[0] = std::exp(a.c_[0]);
    for (std::size_t k = 1; k < N; ++k) {
      double s = 0.0;
      for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a.c_[j] * out.c_[k - j];
      out.c_[k] = s / static_cast<double>(k);
    }
    return out;
  }

  friend Jet log(const Jet& a) {
    Jet out;
    out.c_[0] = std::log(a.c_[0]);
    for (std::size_t k = 1; k < N; ++k) {
      double s = a.c_[k];
      for (std::size_t j = 1; j < k; ++j)
        s -= static_cast<double>(j) * out.c_[j] * a.c_[k - j] / static_cast<double>(k);
      out.c_[k] = s / a.c_[0];
    }
    return out;
  }

private:
  std::array<double, N> c_{};
};

}  // namespace cwfield

#endif  // CWFIELD_JET_HPP
