#ifndef CWFIELD_FIELD_DISTRIBUTION_HPP
#define CWFIELD_FIELD_DISTRIBUTION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cwfield/dynsys.hpp"
#include "cwfield/errors.hpp"
#include "cwfield/quadrature.hpp"

namespace cwfield {

/// The image measure mu_f of the invariant measure under the field function,
/// living on [0, 1]. Everything in the limit free energy depends on the field
/// only through this measure.
class FieldDistribution {
public:
  enum class Kind { Uniform, Atomic, Sampled };

  struct Moments {
    double mean = 0.0;  // int phi
    double a = 0.0;     // int 4 phi (1 - phi)
    double i2 = 0.0;    // int (2 phi - 1)^2
    double i4 = 0.0;    // int (2 phi - 1)^4
  };

  /// Lebesgue measure on [0, 1] (the pushforward of the rotation by f(x) = x).
  static FieldDistribution uniform() {
    FieldDistribution d(Kind::Uniform, {}, {});
    d.finish();
    return d;
  }

  /// sum_j w_j delta_{phi_j}; weights must be positive and sum to 1 (1e-14).
  static FieldDistribution atomic(std::vector<double> phi, std::vector<double> w) {
    validate_atoms(phi, w, true);
    FieldDistribution d(Kind::Atomic, std::move(phi), std::move(w));
    d.finish();
    return d;
  }

  static FieldDistribution constant(double c) { return atomic({c}, {1.0}); }

  /// (delta_lambda + delta_{1-lambda}) / 2.
  static FieldDistribution two_point(double lambda) {
    if (lambda == 0.5) return constant(0.5);
    return atomic({lambda, 1.0 - lambda}, {0.5, 0.5});
  }

  /// Node/weight list approximating mu_f (weights renormalised to sum 1).
  static FieldDistribution sampled(std::vector<double> phi, std::vector<double> w) {
    validate_atoms(phi, w, false);
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    FieldDistribution d(Kind::Sampled, std::move(phi), std::move(w));
    d.finish();
    return d;
  }

  /// Pushforward of Lebesgue measure on [0,1] by a one-coordinate field
  /// function, by composite Kronrod nodes aligned with its breakpoints.
  static FieldDistribution pushforward(const FieldFunction& f, std::size_t panels = 256) {
    const auto& k = f.kind();
    if (std::holds_alternative<FieldFunction::Identity>(k)) return uniform();
    if (const auto* c = std::get_if<FieldFunction::Constant>(&k)) return constant(c->c);
    if (const auto* t = std::get_if<FieldFunction::TwoPoint>(&k)) return two_point(t->lambda);
    if (const auto* t = std::get_if<FieldFunction::Table>(&k)) {
      const std::size_t cells = t->values.size() - 1;
      const std::size_t per = std::max<std::size_t>(1, panels / cells);
      const auto nw = composite_kronrod(0.0, 1.0, cells * per);
      std::vector<double> phi(nw.nodes.size());
      for (std::size_t i = 0; i < phi.size(); ++i) {
        phi[i] = f(nw.nodes[i]);
        if (!(phi[i] >= 0.0 && phi[i] <= 1.0)) throw DomainError("table field value outside [0,1]");
      }
      return sampled(std::move(phi), nw.weights);
    }
    throw DomainError("pushforward: multi-coordinate field functions are not supported");
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& atoms() const { return phi_; }
  const std::vector<double>& weights() const { return w_; }
  const Moments& moments() const { return moments_; }

  /// int g(phi) d mu_f for scalar or jet-valued g. Uniform integrals use
  /// adaptive quadrature at the given absolute tolerance; atomic and sampled
  /// ones are exact finite sums.
  template <class G>
  auto expect(const G& g, double abs_tol = 1e-10) const {
    if (kind_ == Kind::Uniform) return integrate(g, 0.0, 1.0, {abs_tol, 4000});
    using V = decltype(g(0.5));
    V acc = detail::scaled(g(phi_[0]), w_[0]);
    for (std::size_t i = 1; i < phi_.size(); ++i) acc = detail::axpy(acc, w_[i], g(phi_[i]));
    return acc;
  }

  /// Whether mu_f = mu_{1-f} can be decided exactly from the representation.
  std::optional<bool> exactly_symmetric() const {
    if (kind_ == Kind::Uniform) return true;
    if (kind_ == Kind::Sampled) return std::nullopt;
    std::vector<std::pair<double, double>> a, b;
    for (std::size_t i = 0; i < phi_.size(); ++i) {
      a.emplace_back(phi_[i], w_[i]);
      b.emplace_back(1.0 - phi_[i], w_[i]);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i].first - b[i].first) > 1e-15 || std::abs(a[i].second - b[i].second) > 1e-15) return false;
    return true;
  }

  /// All mass on {0, 1}: Lambda is linear and Legendre transforms degenerate.
  bool concentrated_on_endpoints() const {
    if (kind_ == Kind::Uniform) return false;
    return std::all_of(phi_.begin(), phi_.end(), [](double v) { return v == 0.0 || v == 1.0; });
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Uniform: return "uniform";
      case Kind::Atomic: return "atomic[" + std::to_string(phi_.size()) + "]";
      case Kind::Sampled: return "sampled[" + std::to_string(phi_.size()) + "]";
    }
    return "?";
  }

private:
  FieldDistribution(Kind k, std::vector<double> phi, std::vector<double> w)
      : kind_(k), phi_(std::move(phi)), w_(std::move(w)) {}

  static void validate_atoms(const std::vector<double>& phi, const std::vector<double>& w, bool strict_sum) {
    if (phi.empty() || phi.size() != w.size()) throw DomainError("field distribution: atoms and weights mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (!(phi[i] >= 0.0 && phi[i] <= 1.0)) throw DomainError("field distribution: atom outside [0,1]");
      if (!(w[i] > 0.0)) throw DomainError("field distribution: weights must be positive");
      s += w[i];
    }
    if (strict_sum && std::abs(s - 1.0) > 1e-14) throw DomainError("field distribution: weights must sum to 1");
  }

  void finish() {
    std::array<double, 4> m = expect(
        [](double p) {
          const double g = 2.0 * p - 1.0;
          return std::array<double, 4>{p, 4.0 * p * (1.0 - p), g * g, g * g * g * g};
        },
        1e-14);
    moments_ = {m[0], m[1], m[2], m[3]};
  }

  Kind kind_;
  std::vector<double> phi_;
  std::vector<double> w_;
  Moments moments_;
};

}  // namespace cwfield

#endif  // CWFIELD_FIELD_DISTRIBUTION_HPP
