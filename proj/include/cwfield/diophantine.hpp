#ifndef CWFIELD_DIOPHANTINE_HPP
#define CWFIELD_DIOPHANTINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cwfield/dynsys.hpp"
#include "cwfield/errors.hpp"

namespace cwfield {

using BigInt = boost::multiprecision::cpp_int;

/// floor(a / b) for b != 0 (cpp_int division truncates toward zero).
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// (P + sqrt(D)) / Q with D > 0 not a perfect square and Q != 0.
struct QuadraticIrrational {
  BigInt P;
  BigInt D;
  BigInt Q;

  static QuadraticIrrational golden_fraction() { return {-1, 5, 2}; }
  static QuadraticIrrational sqrt2_minus_one() { return {-1, 2, 1}; }

  double to_double() const {
    return (static_cast<double>(P) + std::sqrt(static_cast<double>(D))) / static_cast<double>(Q);
  }
};

struct Rational {
  BigInt num;
  BigInt den = 1;

  /// Exact value of a finite double.
  static Rational from_double(double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite value has no rational form");
    int e = 0;
    const double m = std::frexp(v, &e);  // v = m * 2^e, 0.5 <= |m| < 1
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    Rational r{BigInt(mant), BigInt(1)};
    const int shift = e - 53;
    if (shift >= 0) {
      r.num <<= shift;
    } else {
      r.den <<= -shift;
    }
    const BigInt g = boost::multiprecision::gcd(r.num, r.den);
    if (g > 1) {
      r.num /= g;
      r.den /= g;
    }
    return r;
  }
};

/// Exactly representable reals the expansion and approximation checks accept.
using ExactReal = std::variant<QuadraticIrrational, Rational>;

/// alpha = [alpha] + [a_1, a_2, ...] with principal convergents p_k / q_k.
/// Index 0 is the integer part: p_0 = [alpha], q_0 = 1.
struct ContinuedFraction {
  BigInt integer_part;
  std::vector<BigInt> quotients;  // a_1 .. a_depth
  std::vector<BigInt> p;          // p_0 .. p_depth
  std::vector<BigInt> q;          // q_0 .. q_depth
  bool terminated = false;        // expansion of a rational ended before depth

  std::size_t depth() const { return quotients.size(); }

  /// Index k with q_k == value (k >= 1 preferred when q_0 == q_1), if any.
  std::optional<std::size_t> denominator_index(const BigInt& value) const {
    for (std::size_t k = q.size(); k-- > 0;)
      if (q[k] == value) return k;
    return std::nullopt;
  }
};

namespace detail {

inline void push_quotient(ContinuedFraction& cf, const BigInt& a) {
  const std::size_t k = cf.p.size();  // index of the new convergent
  if (k == 0) {
    cf.integer_part = a;
    cf.p.push_back(a);
    cf.q.push_back(1);
    return;
  }
  cf.quotients.push_back(a);
  const BigInt p_prev2 = k >= 2 ? cf.p[k - 2] : BigInt(1);
  const BigInt q_prev2 = k >= 2 ? cf.q[k - 2] : BigInt(0);
  cf.p.push_back(a * cf.p[k - 1] + p_prev2);
  cf.q.push_back(a * cf.q[k - 1] + q_prev2);
}

}  // namespace detail

/// Exact expansion of a quadratic irrational via the (P + sqrt D)/Q
/// recurrence; never terminates, so exactly `depth` quotients are produced.
inline ContinuedFraction continued_fraction(const QuadraticIrrational& x, std::size_t depth) {
  if (depth < 1) throw DomainError("continued_fraction: depth must be >= 1");
  if (x.Q == 0 || x.D <= 0) throw DomainError("continued_fraction: need Q != 0 and D > 0");
  const BigInt s0 = boost::multiprecision::sqrt(x.D);
  if (s0 * s0 == x.D) throw DomainError("continued_fraction: D is a perfect square");
  BigInt P = x.P, D = x.D, Q = x.Q;
  // normalise so that Q divides D - P^2
  if ((D - P * P) % Q != 0) {
    const BigInt aq = abs(Q);
    P *= aq;
    D *= Q * Q;
    Q *= aq;
  }
  const BigInt s = boost::multiprecision::sqrt(D);
  ContinuedFraction cf;
  for (std::size_t k = 0; k <= depth; ++k) {
    const BigInt a = Q > 0 ? floor_div(P + s, Q) : floor_div(P + s + 1, Q);
    detail::push_quotient(cf, a);
    P = a * Q - P;
    Q = (D - P * P) / Q;
  }
  return cf;
}

/// Exact expansion of a rational; stops early (terminated = true) when the
/// remainder vanishes.
inline ContinuedFraction continued_fraction(const Rational& x, std::size_t depth) {
  if (depth < 1) throw DomainError("continued_fraction: depth must be >= 1");
  if (x.den == 0) throw DomainError("continued_fraction: zero denominator");
  BigInt num = x.den > 0 ? x.num : BigInt(-x.num);
  BigInt den = abs(x.den);
  ContinuedFraction cf;
  for (std::size_t k = 0; k <= depth; ++k) {
    const BigInt a = floor_div(num, den);
    detail::push_quotient(cf, a);
    const BigInt rem = num - a * den;
    if (rem == 0) {
      cf.terminated = k < depth;
      break;
    }
    num = den;
    den = rem;
  }
  return cf;
}

/// Gauss-map expansion of a double. The propagated rounding error is tracked;
/// PrecisionExhausted is thrown once a residual drops below 1e-14 or the
/// next quotient is no longer determined by the available precision.
inline ContinuedFraction continued_fraction(double x, std::size_t depth) {
  if (depth < 1) throw DomainError("continued_fraction: depth must be >= 1");
  if (!std::isfinite(x)) throw DomainError("continued_fraction: non-finite input");
  ContinuedFraction cf;
  const double a0 = std::floor(x);
  detail::push_quotient(cf, BigInt(static_cast<std::int64_t>(a0)));
  double r = x - a0;
  double err = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
  for (std::size_t k = 1; k <= depth; ++k) {
    if (r < 1e-14)
      throw PrecisionExhausted("continued_fraction: residual below 1e-14 at depth " + std::to_string(k));
    const double y = 1.0 / r;
    err = err / (r * r) + std::numeric_limits<double>::epsilon() * y;
    const double a = std::floor(y);
    const double f = y - a;
    if (err >= std::min(f, 1.0 - f) || err > 1e-3)
      throw PrecisionExhausted("continued_fraction: quotient " + std::to_string(k) +
                               " not determined at double precision");
    detail::push_quotient(cf, BigInt(static_cast<std::int64_t>(a)));
    r = f;
  }
  return cf;
}

/// Exact test of |alpha - p/q| < 1/q^2.
inline bool within_inverse_square(const ExactReal& alpha, const BigInt& p, const BigInt& q) {
  if (q <= 0) throw DomainError("within_inverse_square: q must be positive");
  if (const auto* r = std::get_if<Rational>(&alpha)) {
    BigInt den = abs(r->den);
    BigInt num = r->den > 0 ? r->num : BigInt(-r->num);
    return abs(num * q - p * den) * q < den;
  }
  const auto& x = std::get<QuadraticIrrational>(alpha);
  // |q(P + sqrt D) - pQ| < |Q|/q  <=>  B - |Q| < q^2 sqrt(D) < B + |Q|, B = (pQ - qP) q
  const BigInt aq = abs(x.Q);
  const BigInt B = (p * x.Q - q * x.P) * q;
  const BigInt q4D = q * q * q * q * x.D;
  const BigInt hi = B + aq;
  const BigInt lo = B - aq;
  const bool below_hi = hi > 0 && q4D < hi * hi;
  const bool above_lo = lo < 0 || q4D > lo * lo;
  return below_hi && above_lo;
}

/// Sum of Ostrowski digits b_i of n in the numeration q_0, q_1, ... times V:
/// a rigorous bound on |sum_{l<=n} f(x + l alpha) - n int f| via
/// Denjoy-Koksma applied block by block.
inline double ostrowski_deviation_bound(const ContinuedFraction& cf, std::uint64_t n, double variation) {
  if (cf.q.empty() || cf.q.back() <= n)
    throw DomainError("ostrowski_deviation_bound: expansion too shallow for n");
  std::uint64_t rest = n;
  std::uint64_t digits = 0;
  for (std::size_t k = cf.q.size(); k-- > 0;) {
    if (cf.q[k] > rest) continue;
    const auto qk = static_cast<std::uint64_t>(cf.q[k]);
    digits += rest / qk;
    rest %= qk;
    if (rest == 0) break;
  }
  return variation * static_cast<double>(digits);
}

enum class DiscrepancyMethod { Exact1D, Grid, EtkBound };

inline const char* to_string(DiscrepancyMethod m) {
  switch (m) {
    case DiscrepancyMethod::Exact1D: return "exact-1d";
    case DiscrepancyMethod::Grid: return "grid-r-d";
    case DiscrepancyMethod::EtkBound: return "etk-bound";
  }
  return "?";
}

struct DiscrepancyReport {
  std::size_t n = 0;
  double d_star = 0.0;
  DiscrepancyMethod method = DiscrepancyMethod::Exact1D;
  double constant = 0.0;    // C_r for the ETK bound
  std::size_t depth = 0;    // ETK summation depth m, or grid resolution
};

/// Exact one-dimensional star discrepancy from the sorted sample:
/// max_i max(i/n - x_(i), x_(i) - (i-1)/n).
inline DiscrepancyReport star_discrepancy_1d(std::span<const double> points) {
  if (points.empty()) throw DomainError("star_discrepancy_1d: need at least one point");
  std::vector<double> x(points.begin(), points.end());
  for (double v : x)
    if (!(v >= 0.0 && v < 1.0)) throw DomainError("star_discrepancy_1d: points must lie in [0,1)");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = static_cast<double>(i);
    d = std::max({d, (k + 1.0) / n - x[i], x[i] - k / n});
  }
  return {x.size(), d, DiscrepancyMethod::Exact1D, 0.0, 0};
}

/// Lower bound on the r-dimensional star discrepancy: sup of |A(t)/n - vol|
/// over anchored boxes with corners on the grid {1/res, ..., 1}^r. Doubling
/// the resolution never decreases the value. Work is res^r; memory res^(r-1).
inline DiscrepancyReport star_discrepancy_grid(const PointSet& points, std::size_t resolution,
                                               double cell_cap = 4e8) {
  const std::size_t r = points.dim();
  if (r < 2) throw DomainError("star_discrepancy_grid: use star_discrepancy_1d for r = 1");
  if (resolution < 2) throw DomainError("star_discrepancy_grid: resolution must be >= 2");
  if (points.size() == 0) throw DomainError("star_discrepancy_grid: empty point set");
  if (std::pow(static_cast<double>(resolution), static_cast<double>(r)) > cell_cap)
    throw MemoryBudgetError("star_discrepancy_grid: resolution^r exceeds the configured cap");

  const std::size_t res = resolution;
  const std::size_t n = points.size();
  // bin b(x) = floor(x * res); x < j/res  <=>  b(x) < j
  std::vector<std::size_t> bins(n * r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < r; ++d) {
      const double v = points(i, d);
      if (!(v >= 0.0 && v < 1.0)) throw DomainError("star_discrepancy_grid: points must lie in [0,1)^r");
      bins[i * r + d] = std::min(static_cast<std::size_t>(std::floor(v * static_cast<double>(res))), res - 1);
    }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bins[a * r] < bins[b * r]; });

  const std::size_t slab = static_cast<std::size_t>(std::pow(static_cast<double>(res), static_cast<double>(r - 1)) + 0.5);
  std::vector<std::uint32_t> cnt(slab, 0);
  std::vector<std::uint32_t> pre(slab, 0);
  std::vector<double> tcoord(res);
  for (std::size_t j = 0; j < res; ++j) tcoord[j] = static_cast<double>(j + 1) / static_cast<double>(res);

  auto slab_index = [&](std::size_t i) {
    std::size_t idx = 0;
    for (std::size_t d = 1; d < r; ++d) idx = idx * res + bins[i * r + d];
    return idx;
  };

  double best = 0.0;
  std::size_t cursor = 0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j0 = 0; j0 < res; ++j0) {
    // add points with first bin == j0 (they satisfy x_0 < (j0+1)/res)
    while (cursor < n && bins[order[cursor] * r] == j0) {
      ++cnt[slab_index(order[cursor])];
      ++cursor;
    }
    // inclusive prefix sums over the remaining r-1 axes
    pre = cnt;
    std::size_t stride = 1;
    for (std::size_t d = 1; d < r; ++d) {
      for (std::size_t idx = 0; idx < slab; ++idx)
        if ((idx / stride) % res != 0) pre[idx] += pre[idx - stride];
      stride *= res;
    }
    const double t0 = tcoord[j0];
    for (std::size_t idx = 0; idx < slab; ++idx) {
      double vol = t0;
      std::size_t rem = idx;
      for (std::size_t d = 1; d < r; ++d) {
        vol *= tcoord[rem % res];
        rem /= res;
      }
      best = std::max(best, std::abs(static_cast<double>(pre[idx]) * inv_n - vol));
    }
  }
  return {n, best, DiscrepancyMethod::Grid, 0.0, res};
}

/// C_r in the Erdos-Turan-Koksma inequality. The default 2 (3/2)^r follows
/// from the Kuipers-Niederreiter form D_n <= (3/2)^r (2/(m+1) + sum ...) and
/// D*_n <= D_n.
inline double etk_constant(std::size_t r) { return 2.0 * std::pow(1.5, static_cast<double>(r)); }

/// r(h) = prod_i max(1, |h_i|).
inline double r_of_h(std::span<const std::int64_t> h) {
  double v = 1.0;
  for (auto hi : h) v *= std::max<double>(1.0, static_cast<double>(hi < 0 ? -hi : hi));
  return v;
}

/// Erdos-Turan-Koksma upper bound C_r (1/m + sum_{0<|h|_inf<=m} |S(h)| / r(h)),
/// S(h) = (1/n) sum_l exp(2 pi i <h, x_l>).
inline DiscrepancyReport etk_bound(const PointSet& points, std::size_t m, std::optional<double> constant = std::nullopt) {
  if (m < 1) throw DomainError("etk_bound: m must be >= 1");
  const std::size_t r = points.dim();
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("etk_bound: empty point set");
  const double c = constant.value_or(etk_constant(r));
  const auto side = static_cast<std::int64_t>(2 * m + 1);
  std::size_t total = 1;
  for (std::size_t d = 0; d < r; ++d) total *= static_cast<std::size_t>(side);
  std::vector<std::int64_t> h(r);
  double sum = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  // h and -h give conjugate sums: visit the half with the first nonzero entry positive
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rem = code;
    for (std::size_t d = 0; d < r; ++d) {
      h[d] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(side)) - static_cast<std::int64_t>(m);
      rem /= static_cast<std::size_t>(side);
    }
    auto first = std::find_if(h.begin(), h.end(), [](std::int64_t v) { return v != 0; });
    if (first == h.end() || *first < 0) continue;
    double re = 0.0, im = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      double phase = 0.0;
      for (std::size_t d = 0; d < r; ++d) phase += frac(static_cast<double>(h[d]) * points(l, d));
      const double a = two_pi * frac(phase);
      re += std::cos(a);
      im += std::sin(a);
    }
    sum += 2.0 * std::hypot(re, im) / static_cast<double>(n) / r_of_h(h);
  }
  const double bound = c * (1.0 / static_cast<double>(m) + sum);
  return {n, bound, DiscrepancyMethod::EtkBound, c, m};
}

struct DenjoyKoksmaReport {
  std::uint64_t q = 0;
  double lhs = 0.0;  // |sum_{l=1}^q f(x + l alpha) - q int f|
  double variation = 0.0;
  bool applicable = false;  // q is a principal convergent denominator
  bool pass = false;
};

/// Evaluates the Denjoy-Koksma inequality for a block of q rotation steps.
/// The inequality is asserted only when q is a principal convergent
/// denominator of alpha; otherwise the report is marked not applicable.
inline DenjoyKoksmaReport denjoy_koksma_check_q(const FieldFunction& f, const ContinuedFraction& cf, double alpha,
                                               double x, std::uint64_t q) {
  double integral = 0.0;
  try {
    integral = f.integral();
  } catch (const QuadratureError& e) {
    throw IntegralError(std::string("denjoy_koksma_check: integral unavailable: ") + e.what());
  }
  DenjoyKoksmaReport rep;
  rep.q = q;
  rep.variation = f.variation();
  const TorusRotation rot({alpha});
  double s = 0.0;
  for (std::uint64_t l = 1; l <= q; ++l) {
    const double pt = rot.coordinate(x, 0, l);
    s += f(pt);
  }
  rep.lhs = std::abs(s - static_cast<double>(q) * integral);
  rep.applicable = cf.denominator_index(BigInt(q)).has_value();
  rep.pass = rep.applicable && rep.lhs <= rep.variation + 1e-9;
  return rep;
}

/// Same check at the k-th principal convergent denominator q_k.
inline DenjoyKoksmaReport denjoy_koksma_check(const FieldFunction& f, const ContinuedFraction& cf, double alpha,
                                              double x, std::size_t k) {
  if (k >= cf.q.size()) throw DomainError("denjoy_koksma_check: convergent index beyond expansion depth");
  return denjoy_koksma_check_q(f, cf, alpha, x, static_cast<std::uint64_t>(cf.q[k]));
}

/// sum over nonempty coordinate subsets (bitmask) of V^(p)(f; subset) times
/// the star discrepancy of the points projected on that subset. Every subset
/// with nonzero variation must have a discrepancy entry.
inline double hlawka_zaremba_bound(const std::map<std::uint32_t, double>& variations,
                                   const std::map<std::uint32_t, double>& discrepancies) {
  double bound = 0.0;
  for (const auto& [mask, v] : variations) {
    if (mask == 0) throw DomainError("hlawka_zaremba_bound: empty coordinate subset");
    if (v == 0.0) continue;
    const auto it = discrepancies.find(mask);
    if (it == discrepancies.end())
      throw DomainError("hlawka_zaremba_bound: missing projection discrepancy for subset mask " +
                        std::to_string(mask));
    bound += v * it->second;
  }
  return bound;
}

/// Variation table of f over all nonempty subsets of r coordinates.
inline std::map<std::uint32_t, double> hardy_krause_variations(const FieldFunction& f, std::size_t r) {
  std::map<std::uint32_t, double> out;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << r); ++mask) out[mask] = f.hk_variation(mask);
  return out;
}

struct DiophantineType {
  double eta_hat = 1.0;       // finite-box lower estimate, clamped to >= 1
  double raw_crossing = 1.0;  // unclamped maximum crossing exponent
  std::size_t box = 0;        // H
  std::vector<std::int64_t> h_star;
  double h_star_value = 0.0;  // r(h*)^eta_hat * ||<h*, alpha>||
  /// (log of the scale split, crossing exponent at that split)
  std::vector<std::pair<double, double>> trace;
  std::string warning = "finite box H gives a lower estimate of the type";
};

/// Estimates the diophantine type of alpha from the frequency box
/// 0 < |h|_inf <= H.
///
/// For a scale split T, gamma "vanishes" when the minimum of
/// r(h)^gamma ||<h,alpha>|| over frequencies with r(h) > T undercuts the
/// minimum over r(h) <= T. The difference is nondecreasing in gamma, so the
/// crossing exponent is found by bisection. The estimate is the largest
/// crossing over dyadic splits; enlarging H can only raise it.
inline DiophantineType type_eta_estimate(std::span<const double> alpha, std::size_t H) {
  if (H < 1) throw DomainError("type_eta_estimate: H must be >= 1");
  const std::size_t r = alpha.size();
  if (r == 0) throw DomainError("type_eta_estimate: empty angle vector");
  struct Freq {
    double log_r;
    double log_dist;
    std::size_t code;
  };
  const auto side = static_cast<std::int64_t>(2 * H + 1);
  const double total_d = std::pow(static_cast<double>(side), static_cast<double>(r));
  if (total_d > 1e8) throw MemoryBudgetError("type_eta_estimate: frequency box too large");
  const auto total = static_cast<std::size_t>(total_d);
  std::vector<std::int64_t> h(r);
  auto decode = [&](std::size_t code) {
    for (std::size_t d = 0; d < r; ++d) {
      h[d] = static_cast<std::int64_t>(code % static_cast<std::size_t>(side)) - static_cast<std::int64_t>(H);
      code /= static_cast<std::size_t>(side);
    }
  };

  DiophantineType out;
  out.box = H;
  std::vector<Freq> freqs;
  freqs.reserve(total / 2 + 1);
  for (std::size_t code = 0; code < total; ++code) {
    decode(code);
    auto first = std::find_if(h.begin(), h.end(), [](std::int64_t v) { return v != 0; });
    if (first == h.end() || *first < 0) continue;
    // <h, alpha> mod 1 with the products carried exactly
    double s = 0.0;
    for (std::size_t d = 0; d < r; ++d) {
      const double hd = static_cast<double>(h[d]);
      const double hi = hd * alpha[d];
      const double lo = std::fma(hd, alpha[d], -hi);
      s += (hi - std::floor(hi)) + lo;
    }
    const double fr = frac(s);
    const double dist = std::min(fr, 1.0 - fr);
    if (dist == 0.0) {
      out.eta_hat = std::numeric_limits<double>::infinity();
      out.raw_crossing = out.eta_hat;
      out.h_star = h;
      out.warning = "<h, alpha> vanishes in the box: alpha is rational at this precision";
      return out;
    }
    freqs.push_back({std::log(r_of_h(h)), std::log(dist), code});
  }
  std::stable_sort(freqs.begin(), freqs.end(), [](const Freq& a, const Freq& b) { return a.log_r < b.log_r; });
  const double max_log_r = freqs.back().log_r;

  // left-to-right minima of log_dist: the only frequencies that can realise an
  // inner minimum for gamma >= 0
  std::vector<std::size_t> prefix_records;
  {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < freqs.size(); ++i)
      if (freqs[i].log_dist < best) {
        best = freqs[i].log_dist;
        prefix_records.push_back(i);
      }
  }

  auto min_over = [&](const std::vector<std::size_t>& idx, double gamma, std::size_t* arg) {
    double m = std::numeric_limits<double>::infinity();
    for (auto i : idx) {
      const double v = gamma * freqs[i].log_r + freqs[i].log_dist;
      if (v < m) {
        m = v;
        if (arg) *arg = i;
      }
    }
    return m;
  };

  double best_gamma = -1.0;
  std::vector<std::size_t> best_outer;
  for (double split = std::log(2.0); split < max_log_r; split += std::log(2.0)) {
    std::vector<std::size_t> inner, outer;
    for (auto i : prefix_records)
      if (freqs[i].log_r <= split) inner.push_back(i);
    const auto start = static_cast<std::size_t>(
        std::upper_bound(freqs.begin(), freqs.end(), split, [](double v, const Freq& f) { return v < f.log_r; }) -
        freqs.begin());
    double run = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i < freqs.size(); ++i)
      if (freqs[i].log_dist < run) {
        run = freqs[i].log_dist;
        outer.push_back(i);
      }
    if (inner.empty() || outer.empty()) continue;
    double lo = 0.0, hi = 64.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (min_over(outer, mid, nullptr) < min_over(inner, mid, nullptr)) lo = mid;
      else hi = mid;
    }
    const double crossing = 0.5 * (lo + hi);
    out.trace.emplace_back(split, crossing);
    if (crossing > best_gamma) {
      best_gamma = crossing;
      best_outer = outer;
    }
  }
  if (best_gamma < 0.0) {
    out.warning = "box too small to separate frequency scales";
    return out;
  }
  out.raw_crossing = best_gamma;
  out.eta_hat = std::max(1.0, best_gamma);
  std::size_t arg = best_outer.front();
  min_over(best_outer, out.eta_hat, &arg);
  decode(freqs[arg].code);
  out.h_star = h;
  out.h_star_value = std::exp(out.eta_hat * freqs[arg].log_r + freqs[arg].log_dist);
  return out;
}

}  // namespace cwfield

#endif  // CWFIELD_DIOPHANTINE_HPP
