#ifndef CWFIELD_FREEENERGY_HPP
#define CWFIELD_FREEENERGY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cwfield/csv.hpp"
#include "cwfield/dynsys.hpp"
#include "cwfield/errors.hpp"
#include "cwfield/field_distribution.hpp"
#include "cwfield/jet.hpp"
#include "cwfield/quadrature.hpp"

namespace cwfield {

inline constexpr std::size_t kMaxJetOrder = 12;
using FullJet = Jet<kMaxJetOrder + 1>;

struct ModelParams {
  double beta = 1.0;
  double J = 1.0;

  double theta() const { return beta * J; }

  /// beta = 0 is admitted as the infinite-temperature product measure.
  static ModelParams make(double beta, double J) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
    if (!(J > 0.0) || !std::isfinite(J)) throw DomainError("J must be finite and > 0");
    return {beta, J};
  }
};

// ---------------------------------------------------------------------------
// L(phi, u) = log(phi e^u + (1 - phi) e^-u)

inline double L_value(double phi, double u) {
  if (phi == 1.0) return u;
  if (phi == 0.0) return -u;
  const double c = std::abs(u);
  return c + std::log(phi * std::exp(u - c) + (1.0 - phi) * std::exp(-u - c));
}

/// First u-derivative in closed form: (t + g) / (1 + g t).
inline double L_prime_closed_form(double phi, double u) {
  const double t = std::tanh(u);
  const double g = 2.0 * phi - 1.0;
  return (t + g) / (1.0 + g * t);
}

/// Taylor jet of u -> L(phi, u) at u0.
template <std::size_t N = kMaxJetOrder + 1>
Jet<N> L_jet(double phi, double u0) {
  using J = Jet<N>;
  const J u = J::variable(u0);
  if (phi == 1.0) return u;
  if (phi == 0.0) return -u;
  const double c = std::abs(u0);
  const J inner = exp(u - c) * phi + exp(-u - c) * (1.0 - phi);
  return log(inner) + c;
}

// ---------------------------------------------------------------------------
// Lambda(u) = int L(phi, u) d mu_f

inline double Lambda(double u, const FieldDistribution& dist, double abs_tol = 1e-10) {
  return dist.expect([u](double p) { return L_value(p, u); }, abs_tol);
}

template <std::size_t N = kMaxJetOrder + 1>
Jet<N> Lambda_jet(double u0, const FieldDistribution& dist, double abs_tol = 1e-10) {
  return dist.expect([u0](double p) { return L_jet<N>(p, u0); }, abs_tol);
}

namespace detail {

// Jet of theta s^2 / 2 at s0.
template <std::size_t N>
Jet<N> quadratic_part(double theta, double s0) {
  Jet<N> q(0.5 * theta * s0 * s0);
  if constexpr (N > 1) q[1] = theta * s0;
  if constexpr (N > 2) q[2] = 0.5 * theta;
  return q;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Finite-n free energy G_n(s) = theta s^2/2 - (1/n) sum L(p_i, theta s)

inline double G_n(double s, const ModelParams& params, const FieldSequence& field) {
  if (field.p.empty()) throw DomainError("G_n: empty field sequence");
  const double th = params.theta();
  double acc = 0.0;
  for (double p : field.p) acc += L_value(p, th * s);
  return 0.5 * th * s * s - acc / static_cast<double>(field.p.size());
}

template <std::size_t N = kMaxJetOrder + 1>
Jet<N> G_n_jet(double s0, const ModelParams& params, const FieldSequence& field) {
  if (field.p.empty()) throw DomainError("G_n: empty field sequence");
  const double th = params.theta();
  Jet<N> acc;
  for (double p : field.p) acc += L_jet<N>(p, th * s0);
  acc *= 1.0 / static_cast<double>(field.p.size());
  return detail::quadratic_part<N>(th, s0) - acc.scale_argument(th);
}

// ---------------------------------------------------------------------------
// Limit free energy G(s) = theta s^2/2 - Lambda(theta s)

inline double G_limit(double s, const ModelParams& params, const FieldDistribution& dist) {
  const double th = params.theta();
  return 0.5 * th * s * s - Lambda(th * s, dist);
}

template <std::size_t N = kMaxJetOrder + 1>
Jet<N> G_limit_jet(double s0, const ModelParams& params, const FieldDistribution& dist) {
  const double th = params.theta();
  return detail::quadratic_part<N>(th, s0) - Lambda_jet<N>(th * s0, dist).scale_argument(th);
}

// ---------------------------------------------------------------------------
// Minima

struct MinimumRecord {
  double m = 0.0;
  int type = 2;              // 2k
  double strength = 0.0;     // lambda = G^(2k)(m)
  double g_value = 0.0;      // G(m)
  double strength_tilde = 0.0;
};

enum class HStatus { Pass, Fail, Inconclusive };
enum class Phase { Subcritical, Critical, Supercritical, Unknown };

inline std::string to_string(HStatus s) {
  switch (s) {
    case HStatus::Pass: return "pass";
    case HStatus::Fail: return "fail";
    case HStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline std::string to_string(Phase p) {
  switch (p) {
    case Phase::Subcritical: return "subcritical";
    case Phase::Critical: return "critical";
    case Phase::Supercritical: return "supercritical";
    case Phase::Unknown: return "unknown";
  }
  return "?";
}

struct MinimaOptions {
  double lo = -3.0;
  double hi = 3.0;
  std::size_t grid = 1200;
  double class_tol = 1e-7;
  double value_tol = 1e-10;
};

namespace detail {

inline double lambda_tilde(int type, double lambda, double theta) {
  if (type != 2) return lambda;
  return 1.0 / (1.0 / lambda - 1.0 / theta);
}

// Classify the critical point near m0. Returns nullopt for maxima; throws
// ClassificationFailure if every even derivative up to kMaxJetOrder is flat.
template <class JetFn>
std::optional<MinimumRecord> classify(const JetFn& jet_at, double m0, double theta, const MinimaOptions& opt) {
  const FullJet j0 = jet_at(m0);
  for (int k = 1; 2 * k <= static_cast<int>(kMaxJetOrder); ++k) {
    const std::size_t o = static_cast<std::size_t>(2 * k);
    if (std::abs(j0.derivative(o)) < opt.class_tol) continue;
    double m = m0;
    FullJet jm = j0;
    for (int it = 0; it < 4; ++it) {
      const double step = jm.derivative(o - 1) / jm.derivative(o);
      if (!std::isfinite(step) || std::abs(step) > 1e-3) break;
      m -= step;
      jm = jet_at(m);
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(m))) break;
    }
    if (std::abs(m - m0) > 1e-3) continue;
    const double top = jm.derivative(o);
    const double tol = opt.class_tol * std::max(1.0, std::abs(top));
    bool flat_below = true;
    for (std::size_t j = 1; j < o; ++j)
      if (std::abs(jm.derivative(j)) >= tol) flat_below = false;
    if (!flat_below) continue;
    if (top < 0.0) return std::nullopt;
    MinimumRecord r;
    r.m = m;
    r.type = 2 * k;
    r.strength = top;
    r.g_value = jm.value();
    r.strength_tilde = lambda_tilde(r.type, top, theta);
    return r;
  }
  throw ClassificationFailure("no even derivative up to order " + std::to_string(kMaxJetOrder) +
                              " exceeds tolerance near m = " + fmt17(m0));
}

// All local minima of a free-energy function given by its jets, followed by
// the global selection.
template <class SlopeFn, class JetFn>
std::vector<MinimumRecord> locate_minima(const SlopeFn& slope, const JetFn& jet_at, double theta,
                                         const MinimaOptions& opt, double& g_out) {
  const std::size_t M = opt.grid;
  std::vector<double> s(M + 1), d(M + 1);
  for (std::size_t k = 0; k <= M; ++k) {
    s[k] = opt.lo + (opt.hi - opt.lo) * static_cast<double>(k) / static_cast<double>(M);
    d[k] = slope(s[k]);
  }
  std::vector<double> candidates;
  for (std::size_t k = 0; k < M; ++k) {
    if (!(d[k] < 0.0 && d[k + 1] >= 0.0)) continue;
    double a = s[k], b = s[k + 1];
    if (d[k + 1] == 0.0) {
      candidates.push_back(b);
      continue;
    }
    for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
      const double c = 0.5 * (a + b);
      const double dc = slope(c);
      if (dc == 0.0) {
        a = b = c;
        break;
      }
      (dc < 0.0 ? a : b) = c;
    }
    candidates.push_back(0.5 * (a + b));
  }
  std::vector<MinimumRecord> local;
  for (double c : candidates) {
    auto r = classify(jet_at, c, theta, opt);
    if (!r) continue;
    bool dup = false;
    for (const auto& q : local)
      if (std::abs(q.m - r->m) < 1e-8) dup = true;
    if (!dup) local.push_back(*r);
  }
  if (local.empty()) throw ClassificationFailure("no minimum located on the search interval");
  double g = local.front().g_value;
  for (const auto& r : local) g = std::min(g, r.g_value);
  g_out = g;
  std::vector<MinimumRecord> global;
  for (const auto& r : local)
    if (r.g_value <= g + opt.value_tol) global.push_back(r);
  std::sort(global.begin(), global.end(), [](const auto& x, const auto& y) { return x.m < y.m; });
  return global;
}

// Golden-section maximisation of a unimodal function on [a, b].
template <class F>
std::pair<double, double> golden_max(const F& f, double a, double b, int iters = 80) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

/// Global minima of G_n for a concrete field sequence.
inline std::vector<MinimumRecord> find_minima_finite(const ModelParams& params, const FieldSequence& field,
                                                     const MinimaOptions& opt = {}) {
  double g = 0.0;
  return detail::locate_minima([&](double s) { return G_n_jet<2>(s, params, field)[1]; },
                               [&](double s) { return G_n_jet<kMaxJetOrder + 1>(s, params, field); },
                               params.theta(), opt, g);
}

// ---------------------------------------------------------------------------
// Critical temperature

struct CriticalBetaDetails {
  double beta_c = 0.0;
  double sup_ratio = 0.0;   // sup Lambda(u)/u^2
  double argsup = 0.0;      // 0 when the sup is the limit a/2
};

/// Lambda(u)/u^2 evaluated without the O(u) cancellation (requires mean 1/2).
inline double lambda_ratio(double u, const FieldDistribution& dist) {
  return dist.expect(
      [u](double p) {
        const double g = 2.0 * p - 1.0;
        return (L_value(p, u) - g * u) / (u * u);
      },
      1e-13);
}

inline CriticalBetaDetails critical_beta_details(const FieldDistribution& dist, double J) {
  if (!(J > 0.0)) throw DomainError("critical_beta: J must be > 0");
  const auto& mo = dist.moments();
  if (!(mo.a > 1e-15)) throw DegenerateField("critical_beta: a = 0 (mu_f concentrated on {0,1})");
  if (std::abs(mo.mean - 0.5) > 1e-9)
    throw DomainError("critical_beta: the field must have mean 1/2 (got " + fmt17(mo.mean) + ")");

  const std::size_t K = 320;
  const double t0 = -2.0, t1 = std::log10(60.0);
  std::vector<double> us;
  for (std::size_t i = 0; i <= K; ++i) us.push_back(std::pow(10.0, t0 + (t1 - t0) * static_cast<double>(i) / K));

  CriticalBetaDetails out;
  out.sup_ratio = 0.5 * mo.a;
  out.argsup = 0.0;
  for (double sign : {1.0, -1.0}) {
    std::vector<double> r(us.size());
    std::size_t best = us.size();
    double bv = 0.5 * mo.a;
    for (std::size_t i = 0; i < us.size(); ++i) {
      r[i] = lambda_ratio(sign * us[i], dist);
      if (r[i] > bv) {
        bv = r[i];
        best = i;
      }
    }
    if (best == us.size()) continue;
    const double lo = best == 0 ? 1e-6 : us[best - 1];
    const double hi = best + 1 == us.size() ? us[best] : us[best + 1];
    auto [x, v] = detail::golden_max([&](double u) { return lambda_ratio(sign * u, dist); }, lo, hi);
    if (r[best] > v) {
      x = us[best];
      v = r[best];
    }
    if (v > out.sup_ratio) {
      out.sup_ratio = v;
      out.argsup = sign * x;
    }
  }
  out.beta_c = 1.0 / (2.0 * J * out.sup_ratio);
  return out;
}

inline double critical_beta(const FieldDistribution& dist, double J) { return critical_beta_details(dist, J).beta_c; }

// ---------------------------------------------------------------------------
// Hypothesis (H): Lambda even, Lambda''' <= 0 on (0, inf)

struct HypothesisReport {
  HStatus status = HStatus::Inconclusive;
  std::optional<bool> exact_symmetry;
  double max_asymmetry = 0.0;
  double asymmetry_witness = 0.0;
  double max_third = -std::numeric_limits<double>::infinity();
  double third_witness = 0.0;
  std::string note;
};

struct HypothesisOptions {
  double u_max = 8.0;
  std::size_t points = 400;
  double even_tol = 1e-8;
  double third_tol = 1e-8;
};

inline HypothesisReport hypothesis_H_check(const FieldDistribution& dist, const HypothesisOptions& opt = {}) {
  HypothesisReport rep;
  rep.exact_symmetry = dist.exactly_symmetric();
  try {
    for (std::size_t i = 1; i <= opt.points; ++i) {
      const double u = opt.u_max * static_cast<double>(i) / static_cast<double>(opt.points);
      const double asym = std::abs(Lambda(u, dist, 1e-12) - Lambda(-u, dist, 1e-12));
      if (asym > rep.max_asymmetry) {
        rep.max_asymmetry = asym;
        rep.asymmetry_witness = u;
      }
      const double third = Lambda_jet<4>(u, dist, 1e-12).derivative(3);
      if (third > rep.max_third) {
        rep.max_third = third;
        rep.third_witness = u;
      }
    }
  } catch (const QuadratureError& e) {
    rep.status = HStatus::Inconclusive;
    rep.note = e.what();
    return rep;
  }
  if (rep.exact_symmetry == false) {
    rep.status = HStatus::Fail;
    rep.note = "mu_f differs from its reflection; Lambda is not even";
  } else if (rep.max_asymmetry > 1e3 * opt.even_tol) {
    rep.status = HStatus::Fail;
    rep.note = "Lambda(u) != Lambda(-u) at the asymmetry witness";
  } else if (rep.max_third > opt.third_tol) {
    rep.status = HStatus::Fail;
    rep.note = "Lambda''' > 0 at the third-derivative witness";
  } else if (!rep.exact_symmetry && rep.max_asymmetry > opt.even_tol) {
    rep.status = HStatus::Inconclusive;
    rep.note = "numerical asymmetry above tolerance but within quadrature noise";
  } else {
    rep.status = HStatus::Pass;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report

struct FreeEnergyReport {
  ModelParams params;
  FieldDistribution dist;
  double g = 0.0;
  std::vector<MinimumRecord> minima;
  std::optional<double> beta_c;
  HStatus h_status = HStatus::Inconclusive;
  Phase phase = Phase::Unknown;

  /// Columns: m,type,strength,strength_tilde,G
  std::string minima_csv() const {
    std::string out = "m,type,strength,strength_tilde,G\n";
    for (const auto& r : minima)
      out += csv_row({fmt17(r.m), std::to_string(r.type), fmt17(r.strength), fmt17(r.strength_tilde), fmt17(r.g_value)});
    return out;
  }

  /// Columns: g,beta_c,a,I2,I4,H,phase
  std::string summary_csv() const {
    const auto& mo = dist.moments();
    return "g,beta_c,a,I2,I4,H,phase\n" +
           csv_row({fmt17(g), beta_c ? fmt17(*beta_c) : "nan", fmt17(mo.a), fmt17(mo.i2), fmt17(mo.i4),
                    to_string(h_status), to_string(phase)});
  }
};

inline FreeEnergyReport find_minima(const ModelParams& params, const FieldDistribution& dist,
                                    const MinimaOptions& opt = {}) {
  FreeEnergyReport rep{params, dist, 0.0, {}, std::nullopt, HStatus::Inconclusive, Phase::Unknown};
  rep.minima = detail::locate_minima([&](double s) { return G_limit_jet<2>(s, params, dist)[1]; },
                                     [&](double s) { return G_limit_jet<kMaxJetOrder + 1>(s, params, dist); },
                                     params.theta(), opt, rep.g);
  rep.g = std::min(rep.g, 0.0);  // G(0) = 0 exactly
  rep.h_status = hypothesis_H_check(dist).status;
  const auto& mo = dist.moments();
  if (mo.a > 1e-15 && std::abs(mo.mean - 0.5) <= 1e-9) {
    const double bc = critical_beta(dist, params.J);
    rep.beta_c = bc;
    if (std::abs(params.beta - bc) <= 1e-9 * bc)
      rep.phase = Phase::Critical;
    else
      rep.phase = params.beta < bc ? Phase::Subcritical : Phase::Supercritical;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Spontaneous magnetization: positive root of m = int (t + g)/(1 + g t)

inline double spontaneous_magnetization(const ModelParams& params, const FieldDistribution& dist) {
  const double bc = critical_beta(dist, params.J);
  if (!(params.beta > bc * (1.0 + 1e-12)))
    throw NoRootError("spontaneous magnetization requires beta > beta_c = " + fmt17(bc));
  const double th = params.theta();
  auto F = [&](double m) {
    return dist.expect([&](double p) { return L_prime_closed_form(p, th * m); }, 1e-13) - m;
  };
  std::vector<double> grid;
  for (int j = 48; j >= 12; --j) grid.push_back(std::ldexp(1.0, -j));
  for (int i = 1; i <= 4096; ++i) grid.push_back(static_cast<double>(i) / 4096.0);
  std::optional<std::size_t> bracket;
  double prev = F(grid[0]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double next = F(grid[i + 1]);
    if (prev > 0.0 && next <= 0.0) bracket = i;
    prev = next;
  }
  if (!bracket) throw NoRootError("no positive zero of G' on (0, 1]");
  double a = grid[*bracket], b = grid[*bracket + 1];
  while (b - a > 1e-14) {
    const double c = 0.5 * (a + b);
    (F(c) > 0.0 ? a : b) = c;
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Legendre transform and rate function

/// Lambda*(z) = sup_l (l z - Lambda(l)), solved from Lambda'(l) = z by
/// safeguarded Newton. Returns +inf when z lies outside the range of Lambda'.
inline double legendre_transform(double z, const FieldDistribution& dist, double* argmax = nullptr) {
  auto D = [&](double l) { return Lambda_jet<3>(l, dist); };
  double lo = -1.0, hi = 1.0;
  while (D(hi).derivative(1) < z) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) return std::numeric_limits<double>::infinity();
  }
  while (D(lo).derivative(1) > z) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e4) return std::numeric_limits<double>::infinity();
  }
  double l = 0.0;
  if (!(l > lo && l < hi)) l = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto j = D(l);
    const double r = j.derivative(1) - z;
    if (r == 0.0) break;
    (r > 0.0 ? hi : lo) = l;
    const double curv = j.derivative(2);
    double next = l - r / curv;
    if (!(curv > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - l) <= 1e-15 * std::max(1.0, std::abs(l))) {
      l = next;
      break;
    }
    l = next;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(l))) break;
  }
  if (argmax) *argmax = l;
  return l * z - Lambda(l, dist);
}

struct RateFunction {
  ModelParams params;
  FieldDistribution dist;
  std::vector<double> u, lambda;        // Lambda on a u-grid
  std::vector<double> z, lambda_star;   // Lambda* on the z-grid
  std::vector<double> rate;             // I = Lambda* - theta z^2/2 - inf
  double infimum = 0.0;
  std::vector<double> argmin;           // minimisers of Lambda* - theta z^2/2

  static constexpr double clip = 1e-6;

  double legendre(double z0) const { return legendre_transform(clip_z(z0), dist); }
  double rate_at(double z0) const {
    const double zc = clip_z(z0);
    return legendre_transform(zc, dist) - 0.5 * params.theta() * zc * zc - infimum;
  }

  static double clip_z(double z0) {
    if (!(std::abs(z0) < 1.0)) throw DomainError("rate function: |z| must be < 1");
    return std::clamp(z0, -1.0 + clip, 1.0 - clip);
  }

  /// Columns: z,lambda_star,rate
  std::string csv() const {
    std::string out = "z,lambda_star,rate\n";
    for (std::size_t i = 0; i < z.size(); ++i) out += csv_row({fmt17(z[i]), fmt17(lambda_star[i]), fmt17(rate[i])});
    return out;
  }
};

inline RateFunction rate_function(const ModelParams& params, const FieldDistribution& dist,
                                  const std::vector<double>& zgrid) {
  if (dist.concentrated_on_endpoints())
    throw DegenerateField("rate function: Lambda is linear when mu_f({0,1}) = 1");
  RateFunction rf{params, dist, {}, {}, {}, {}, {}, 0.0, {}};
  for (int i = -120; i <= 120; ++i) {
    const double u = 0.05 * i;
    rf.u.push_back(u);
    rf.lambda.push_back(Lambda(u, dist));
  }
  const double th = params.theta();
  auto h = [&](double z) { return legendre_transform(z, dist) - 0.5 * th * z * z; };

  // infimum of Lambda* - theta z^2/2 over (-1, 1): scan, then refine each
  // local minimum of the scan
  const std::size_t K = 800;
  const double zmax = 1.0 - RateFunction::clip;
  std::vector<double> zs(K + 1), hs(K + 1);
  for (std::size_t i = 0; i <= K; ++i) {
    zs[i] = -zmax + 2.0 * zmax * static_cast<double>(i) / K;
    hs[i] = h(zs[i]);
  }
  double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> locals;
  for (std::size_t i = 0; i <= K; ++i) {
    const bool left = i == 0 || hs[i] <= hs[i - 1];
    const bool right = i == K || hs[i] <= hs[i + 1];
    if (!(left && right)) continue;
    const double a = zs[i == 0 ? 0 : i - 1], b = zs[i == K ? K : i + 1];
    auto [x, v] = detail::golden_max([&](double z) { return -h(z); }, a, b, 60);
    double val = -v, at = x;
    if (hs[i] < val) {
      val = hs[i];
      at = zs[i];
    }
    locals.emplace_back(at, val);
    inf = std::min(inf, val);
  }
  rf.infimum = inf;
  for (const auto& [at, val] : locals)
    if (val <= inf + 1e-10) rf.argmin.push_back(at);

  for (double z0 : zgrid) {
    const double zc = RateFunction::clip_z(z0);
    const double ls = legendre_transform(zc, dist);
    rf.z.push_back(zc);
    rf.lambda_star.push_back(ls);
    rf.rate.push_back(ls - 0.5 * th * zc * zc - inf);
  }
  return rf;
}

}  // namespace cwfield

#endif  // CWFIELD_FREEENERGY_HPP
