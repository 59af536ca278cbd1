#ifndef CWFIELD_TESTS_ORACLES_HPP
#define CWFIELD_TESTS_ORACLES_HPP

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the library under test.

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using Dec = boost::multiprecision::cpp_dec_float_100;

inline Dec L(double phi, const Dec& u) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  return log(Dec(phi) * exp(u) + (1 - Dec(phi)) * exp(-u));
}

/// u / tanh(u) - 1, the log-moment generating function of the uniform field.
inline Dec lambda_uniform(const Dec& u) {
  using boost::multiprecision::abs;
  using boost::multiprecision::tanh;
  if (abs(u) < Dec("1e-12")) return u * u / 3;
  return u / tanh(u) - 1;
}

/// log cosh u + log(1 - g^2 tanh^2 u) / 2 with g = 2 lambda - 1.
inline Dec lambda_two_point(double lambda, const Dec& u) {
  using boost::multiprecision::cosh;
  using boost::multiprecision::log;
  using boost::multiprecision::tanh;
  const Dec g = 2 * Dec(lambda) - 1;
  const Dec t = tanh(u);
  return log(cosh(u)) + log(1 - g * g * t * t) / 2;
}

/// k-th derivative of f at x from central differences in 100-digit
/// arithmetic, Richardson-extrapolated over steps h and h/2 so the
/// truncation error is O(h^4).
template <class F>
double central_difference(const F& f, const Dec& x, int k, const Dec& h) {
  auto quotient = [&](const Dec& step) {
    Dec acc = 0;
    Dec binom = 1;
    for (int j = 0; j <= k; ++j) {
      const Dec offset = (Dec(k) / 2 - j) * step;
      acc += (j % 2 ? -binom : binom) * f(x + offset);
      binom = binom * (k - j) / (j + 1);
    }
    return acc / boost::multiprecision::pow(step, k);
  };
  const Dec coarse = quotient(h), fine = quotient(h / 2);
  return static_cast<double>((4 * fine - coarse) / 3);
}

/// Law of M_n under the Gibbs weights by enumerating all 2^n spin vectors;
/// entry j is P(M_n = -n + 2j).
inline std::vector<double> enumerate_gibbs(const std::vector<double>& p, double theta) {
  const std::size_t n = p.size();
  std::vector<long double> mass(n + 1, 0.0L);
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
    long double w = 1.0L;
    int up = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c >> i & 1) {
        w *= p[i];
        ++up;
      } else {
        w *= 1.0L - p[i];
      }
    }
    const long double M = 2.0L * up - static_cast<long double>(n);
    mass[static_cast<std::size_t>(up)] += w * std::exp(static_cast<long double>(theta) * M * M / (2.0L * n));
  }
  long double z = 0.0L;
  for (auto v : mass) z += v;
  std::vector<double> out(n + 1);
  for (std::size_t j = 0; j <= n; ++j) out[j] = static_cast<double>(mass[j] / z);
  return out;
}

/// Positive root of m = tanh(c m) for c > 1 by plain bisection.
inline double tanh_fixed_point(double c) {
  double lo = 1e-9, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::tanh(c * mid) - mid > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// ((1+z)/2) log(1+z) + ((1-z)/2) log(1-z)
inline double binary_entropy_transform(double z) {
  return 0.5 * (1.0 + z) * std::log1p(z) + 0.5 * (1.0 - z) * std::log1p(-z);
}

}  // namespace oracle

#endif  // CWFIELD_TESTS_ORACLES_HPP
