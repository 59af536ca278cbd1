#ifndef CWFIELD_DISTRIBUTION_HPP
#define CWFIELD_DISTRIBUTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cwfield/csv.hpp"
#include "cwfield/dynsys.hpp"
#include "cwfield/errors.hpp"
#include "cwfield/freeenergy.hpp"
#include "cwfield/quadrature.hpp"

namespace cwfield {

namespace detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double logaddexp(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double logsumexp(const std::vector<double>& v) {
  double m = neg_inf;
  for (double x : v) m = std::max(m, x);
  if (m == neg_inf) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

/// Law of M_n on {-n, -n+2, ..., n}; entry j of log_mass is log P(M_n = -n + 2j).
struct MagnetizationLaw {
  std::size_t n = 0;
  std::vector<double> log_mass;
  ModelParams params;
  FieldSequence field;

  std::size_t size() const { return log_mass.size(); }
  long long k(std::size_t j) const { return -static_cast<long long>(n) + 2 * static_cast<long long>(j); }
  double mass(std::size_t j) const { return std::exp(log_mass[j]); }

  /// P(M_n = k); zero off the support or for the wrong parity.
  double mass_at(long long kk) const {
    const long long nn = static_cast<long long>(n);
    if (kk < -nn || kk > nn || ((kk + nn) % 2) != 0) return 0.0;
    return mass(static_cast<std::size_t>((kk + nn) / 2));
  }

  double total_mass() const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += mass(j);
    return s;
  }

  /// Columns: k,mass
  std::string csv() const {
    std::string out = "k,mass\n";
    for (std::size_t j = 0; j < size(); ++j) out += csv_row({std::to_string(k(j)), fmt17(mass(j))});
    return out;
  }
};

/// Exact law of the walk S_n with independent +-1 steps, P(X_i = 1) = p_i,
/// by sequential convolution in log space.
inline MagnetizationLaw walk_pmf(const FieldSequence& field) {
  const std::size_t n = field.p.size();
  if (n == 0) throw DomainError("walk_pmf: n must be >= 1");
  std::vector<double> cur{0.0}, next;
  cur.reserve(n + 1);
  next.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = field.p[i];
    const double lp = std::log(p), lq = std::log1p(-p);
    next.assign(cur.size() + 1, detail::neg_inf);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      if (cur[j] == detail::neg_inf) continue;
      next[j] = detail::logaddexp(next[j], cur[j] + lq);
      next[j + 1] = detail::logaddexp(next[j + 1], cur[j] + lp);
    }
    std::swap(cur, next);
  }
  const double z = detail::logsumexp(cur);
  for (double& v : cur) v -= z;
  return {n, std::move(cur), ModelParams{0.0, 1.0}, field};
}

/// Exact law of M_n under the Gibbs measure: the walk law tilted by
/// exp(theta k^2 / (2n)) and renormalised in log space.
inline MagnetizationLaw gibbs_pmf(const FieldSequence& field, const ModelParams& params) {
  MagnetizationLaw law = walk_pmf(field);
  law.params = params;
  const double th = params.theta();
  if (th == 0.0) return law;
  const double n = static_cast<double>(law.n);
  for (std::size_t j = 0; j < law.size(); ++j) {
    const double kk = static_cast<double>(law.k(j));
    law.log_mass[j] += th * kk * kk / (2.0 * n);
    if (std::isnan(law.log_mass[j]) || law.log_mass[j] == std::numeric_limits<double>::infinity())
      throw std::overflow_error("gibbs_pmf: log-mass overflow");
  }
  const double z = detail::logsumexp(law.log_mass);
  for (double& v : law.log_mass) v -= z;
  return law;
}

// ---------------------------------------------------------------------------
// Discrete laws on the real line

struct DiscreteLaw {
  std::vector<double> x;  // ascending
  std::vector<double> w;

  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
    return s;
  }
  double variance() const {
    const double mu = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (x[i] - mu) * (x[i] - mu);
    return s;
  }
  double expect(const std::function<double(double)>& h) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * h(x[i]);
    return s;
  }
  /// Mass of points with lo < x < hi.
  double mass_in(double lo, double hi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > lo && x[i] < hi) s += w[i];
    return s;
  }
  double max_mass() const { return w.empty() ? 0.0 : *std::max_element(w.begin(), w.end()); }
};

/// Law of (M_n - n m) / n^(1 - gamma).
inline DiscreteLaw scaled_law(const MagnetizationLaw& law, double m, double gamma) {
  const double n = static_cast<double>(law.n);
  const double scale = std::pow(n, 1.0 - gamma);
  DiscreteLaw out;
  out.x.reserve(law.size());
  out.w.reserve(law.size());
  for (std::size_t j = 0; j < law.size(); ++j) {
    out.x.push_back((static_cast<double>(law.k(j)) - n * m) / scale);
    out.w.push_back(law.mass(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Limit densities C exp(-lt s^(2k) / (2k)!)

class LimitDensity {
public:
  LimitDensity(int order, double lambda_tilde) : order_(order), lt_(lambda_tilde) {
    if (order < 2 || order % 2 != 0) throw DomainError("limit density: order must be even and >= 2");
    if (!(lambda_tilde > 0.0) || !std::isfinite(lambda_tilde))
      throw DomainError("limit density: lambda_tilde must be positive");
    coef_ = lt_ / std::tgamma(order_ + 1.0);
    const double inv = 1.0 / order_;
    C_ = 0.5 / std::tgamma(1.0 + inv) * std::pow(coef_, inv);
    cutoff_ = std::pow(800.0 / coef_, inv);
  }

  /// Normal(0, sigma^2) is the order-2 density with lambda_tilde = 1/sigma^2.
  static LimitDensity normal(double variance) { return LimitDensity(2, 1.0 / variance); }

  int order() const { return order_; }
  double lambda_tilde() const { return lt_; }
  double normalizer() const { return C_; }

  double operator()(double s) const { return C_ * std::exp(-coef_ * std::pow(std::abs(s), order_)); }

  double cdf(double s) const {
    if (order_ == 2) return 0.5 * std::erfc(-s * std::sqrt(0.5 * lt_));
    if (s <= -cutoff_) return 0.0;
    if (s >= cutoff_) return 1.0;
    const double half = integral(0.0, std::abs(s));
    return s >= 0.0 ? 0.5 + half : 0.5 - half;
  }

  /// Integral of the density over [a, b] by adaptive quadrature.
  double integral(double a, double b) const {
    a = std::clamp(a, -cutoff_, cutoff_);
    b = std::clamp(b, -cutoff_, cutoff_);
    return cwfield::integrate([this](double s) { return (*this)(s); }, a, b, {1e-14, 4000});
  }

  /// Total mass by quadrature, independent of the closed-form constant's
  /// derivation (only the density shape is shared).
  double quadrature_mass() const { return 2.0 * integral(0.0, cutoff_); }

private:
  int order_;
  double lt_;
  double coef_ = 0.0;
  double C_ = 0.0;
  double cutoff_ = 0.0;
};

/// sup over the support of |F_law - F_limit|, evaluated on both sides of
/// every jump; the limit CDF is accumulated by quadrature between atoms.
inline double ks_distance(const DiscreteLaw& law, const LimitDensity& limit) {
  std::vector<std::size_t> idx(law.x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return law.x[a] < law.x[b]; });
  double d = 0.0, emp = 0.0;
  double F = 0.0, prev = 0.0;
  bool first = true;
  for (std::size_t i : idx) {
    const double xi = law.x[i];
    F = first ? limit.cdf(xi) : (limit.order() == 2 ? limit.cdf(xi) : F + limit.integral(prev, xi));
    first = false;
    prev = xi;
    d = std::max(d, std::abs(F - emp));
    emp += law.w[i];
    d = std::max(d, std::abs(F - emp));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Mixture weights

struct MixtureWeights {
  std::vector<double> m;
  std::vector<double> log_b;

  std::vector<double> normalized() const {
    const double z = detail::logsumexp(log_b);
    std::vector<double> out;
    for (double v : log_b) out.push_back(std::exp(v - z));
    return out;
  }

  /// sum_i b_i h(m_i) / sum_i b_i
  double predict(const std::function<double(double)>& h) const {
    const auto w = normalized();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * h(m[i]);
    return s;
  }
};

/// log of int exp(-s^(2k)/(2k)!) ds
inline double log_shape_integral(int order) {
  return std::log(2.0) + std::lgamma(1.0 + 1.0 / order) + std::lgamma(order + 1.0) / order;
}

/// b_i = n^(-1/2k) exp(-n G_n(m_i)) lambda_i^(-1/2k) int exp(-s^(2k)/(2k)!) ds
inline MixtureWeights mixture_weights(const FreeEnergyReport& report, const FieldSequence& field) {
  if (report.minima.empty()) throw DomainError("mixture_weights: no classified minima");
  const double n = static_cast<double>(field.p.size());
  MixtureWeights out;
  for (const auto& r : report.minima) {
    if (r.type < 2 || !(r.strength > 0.0)) throw DomainError("mixture_weights: unclassified minimum");
    const double inv = 1.0 / r.type;
    out.m.push_back(r.m);
    out.log_b.push_back(-inv * std::log(n) - n * G_n(r.m, report.params, field) - inv * std::log(r.strength) +
                        log_shape_integral(r.type));
  }
  return out;
}

/// Two-peak form: b_{+-m} = prod_j (p_j e^{+-theta m} + (1 - p_j) e^{-+theta m}).
inline MixtureWeights mixture_weights_symmetric(double m, const ModelParams& params, const FieldSequence& field) {
  const double th = params.theta();
  double lp = 0.0, lm = 0.0;
  for (double p : field.p) {
    lp += L_value(p, th * m);
    lm += L_value(p, -th * m);
  }
  return {{-m, m}, {lm, lp}};
}

// ---------------------------------------------------------------------------
// Metropolis cross-check

/// log acceptance ratio for flipping spin sigma_i (+-1) at total
/// magnetisation M; log_p / log_q are log p_i and log(1 - p_i).
inline double metropolis_log_ratio(int sigma_i, long long M, std::size_t n, double theta, double log_p,
                                   double log_q) {
  const long long Mn = M - 2 * sigma_i;
  const double tilt = theta * (static_cast<double>(Mn) * Mn - static_cast<double>(M) * M) / (2.0 * n);
  const double odds = sigma_i < 0 ? log_p - log_q : log_q - log_p;
  return tilt + odds;
}

struct MetropolisResult {
  std::size_t n = 0;
  std::vector<std::uint64_t> histogram;  // index j <-> M = -n + 2j
  std::uint64_t recorded = 0;
  double acceptance_rate = 0.0;

  std::vector<double> frequencies() const {
    std::vector<double> f(histogram.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = static_cast<double>(histogram[j]) / recorded;
    return f;
  }
};

/// Single-site Metropolis chain targeting the Gibbs measure; records M_n
/// after every sweep of n proposals once the first 10% of sweeps are spent.
inline MetropolisResult metropolis_sample(const FieldSequence& field, const ModelParams& params, std::uint64_t sweeps,
                                          std::uint64_t seed) {
  const std::size_t n = field.p.size();
  if (n == 0) throw DomainError("metropolis: empty field");
  if (sweeps == 0) throw DomainError("metropolis: sweeps must be >= 1");
  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<double> lp(n), lq(n);
  std::vector<int> sigma(n);
  long long M = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lp[i] = std::log(field.p[i]);
    lq[i] = std::log1p(-field.p[i]);
    sigma[i] = field.p[i] >= 0.5 ? 1 : -1;
    M += sigma[i];
  }
  const double th = params.theta();
  const std::uint64_t burn = sweeps / 10;
  MetropolisResult res;
  res.n = n;
  res.histogram.assign(n + 1, 0);
  std::uint64_t accepted = 0, proposed = 0;
  for (std::uint64_t s = 0; s < sweeps; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = static_cast<std::size_t>(rng() % n);
      const double lr = metropolis_log_ratio(sigma[i], M, n, th, lp[i], lq[i]);
      ++proposed;
      if (lr >= 0.0 || uniform01() < std::exp(lr)) {
        M -= 2 * sigma[i];
        sigma[i] = -sigma[i];
        ++accepted;
      }
    }
    if (s >= burn) {
      ++res.histogram[static_cast<std::size_t>((M + static_cast<long long>(n)) / 2)];
      ++res.recorded;
    }
  }
  res.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposed);
  return res;
}

/// Total-variation distance between a sampled histogram and an exact law.
inline double total_variation(const MetropolisResult& sample, const MagnetizationLaw& law) {
  const auto f = sample.frequencies();
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += std::abs(f[j] - law.mass(j));
  return 0.5 * s;
}

}  // namespace cwfield

#endif  // CWFIELD_DISTRIBUTION_HPP
