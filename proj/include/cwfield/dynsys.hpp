#ifndef CWFIELD_DYNSYS_HPP
#define CWFIELD_DYNSYS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cwfield/errors.hpp"
#include "cwfield/quadrature.hpp"

namespace cwfield {

/// Fractional part in [0, 1).
inline double frac(double v) {
  double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

/// Row-major list of points of a fixed dimension.
class PointSet {
public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 || coords_.size() % dim_ != 0) throw DomainError("point set: coordinate count not a multiple of dimension");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  double operator()(std::size_t i, std::size_t j) const { return coords_[i * dim_ + j]; }
  const std::vector<double>& coords() const { return coords_; }

  /// Coordinates j of all points, in order.
  std::vector<double> component(std::size_t j) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, j);
    return out;
  }

  /// Keeps only the listed coordinates.
  PointSet project(std::span<const std::size_t> dims) const {
    std::vector<double> c;
    c.reserve(size() * dims.size());
    for (std::size_t i = 0; i < size(); ++i)
      for (auto d : dims) c.push_back((*this)(i, d));
    return PointSet(dims.size(), std::move(c));
  }

private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// The rotation x -> x + alpha (mod 1) on the r-torus.
class TorusRotation {
public:
  explicit TorusRotation(std::vector<double> angles) : angles_(std::move(angles)) {
    if (angles_.empty()) throw DomainError("torus rotation needs dimension >= 1");
    for (double a : angles_)
      if (!(a > 0.0 && a < 1.0)) throw DomainError("rotation angles must lie in (0, 1)");
  }

  /// (sqrt(5) - 1) / 2, the fractional part of the golden ratio.
  static TorusRotation golden() { return TorusRotation({golden_angle()}); }
  /// sqrt(2) - 1.
  static TorusRotation sqrt2() { return TorusRotation({sqrt2_angle()}); }

  static double golden_angle() { return 0.61803398874989484820458683436563811772; }
  static double sqrt2_angle() { return 0.41421356237309504880168872420969807857; }

  std::size_t dimension() const { return angles_.size(); }
  const std::vector<double>& angles() const { return angles_; }

  /// Component j of T^i x. The product i * alpha is carried with its exact
  /// rounding error and reduced once, so orbits of length 1e6+ do not drift.
  double coordinate(double x, std::size_t j, std::uint64_t i) const {
    const double a = angles_[j];
    const double di = static_cast<double>(i);
    const double hi = di * a;
    const double lo = std::fma(di, a, -hi);
    const double t = hi - std::floor(hi);
    return frac((x + t) + lo);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "rotation(";
    for (std::size_t j = 0; j < angles_.size(); ++j) os << (j ? "," : "") << angles_[j];
    os << ")";
    return os.str();
  }

private:
  std::vector<double> angles_;
};

/// Returns (T^1 x, ..., T^n x).
inline PointSet orbit(const TorusRotation& system, std::span<const double> x, std::size_t n) {
  const std::size_t r = system.dimension();
  if (x.size() != r) throw DomainError("orbit: start point dimension mismatch");
  for (double v : x)
    if (!(v >= 0.0 && v < 1.0)) throw DomainError("orbit: start point must lie in [0,1)^r");
  std::vector<double> c(n * r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) c[i * r + j] = system.coordinate(x[j], j, i + 1);
  return PointSet(r, std::move(c));
}

inline PointSet orbit(const TorusRotation& system, double x, std::size_t n) {
  const double p[1] = {x};
  return orbit(system, std::span<const double>(p, 1), n);
}

/// Field functions f : [0,1]^r -> [0,1].
class FieldFunction {
public:
  struct Identity {
    std::size_t coord = 0;
  };
  struct Constant {
    double c = 0.5;
  };
  /// lambda on {x_coord < 1/2}, 1 - lambda elsewhere.
  struct TwoPoint {
    double lambda = 0.25;
    std::size_t coord = 0;
  };
  /// Piecewise-linear interpolation of values on the uniform grid k/(m-1).
  struct Table {
    std::vector<double> values;
    std::size_t coord = 0;
  };
  /// prod_j x_j over all coordinates.
  struct Product {};

  using Kind = std::variant<Identity, Constant, TwoPoint, Table, Product>;

  static FieldFunction identity(std::size_t coord = 0) { return FieldFunction(Identity{coord}, 1.0, 0.5); }
  static FieldFunction constant(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("constant field must lie in [0,1]");
    return FieldFunction(Constant{c}, 0.0, c);
  }
  static FieldFunction two_point(double lambda, std::size_t coord = 0) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("two-point level must lie in [0,1]");
    return FieldFunction(TwoPoint{lambda, coord}, std::abs(1.0 - 2.0 * lambda), 0.5);
  }
  /// User table; `declared_variation` is the total variation the user vouches
  /// for. Values are validated lazily in field_sequence.
  static FieldFunction table(std::vector<double> values, double declared_variation,
                             std::optional<double> declared_integral = std::nullopt, std::size_t coord = 0) {
    if (values.size() < 2) throw DomainError("table field needs at least two grid values");
    FieldFunction f(Table{std::move(values), coord}, declared_variation, declared_integral);
    return f;
  }
  /// prod_{j<r} x_j. Every Hardy-Krause component variation equals 1.
  static FieldFunction product(std::size_t r) {
    FieldFunction f(Product{}, 1.0, std::pow(0.5, static_cast<double>(r)));
    f.dimension_ = r;
    f.hk_.assign((std::size_t{1} << r) - 1, 1.0);
    return f;
  }

  const Kind& kind() const { return kind_; }
  double variation() const { return variation_; }
  std::optional<double> declared_integral() const { return integral_; }

  /// Minimum torus dimension this function reads.
  std::size_t min_dimension() const {
    return std::visit(
        [&](const auto& k) -> std::size_t {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) return 1;
          else if constexpr (std::is_same_v<K, Product>) return dimension_;
          else return k.coord + 1;
        },
        kind_);
  }

  /// Hardy-Krause component variation V^(p)(f; i_1..i_p) for the coordinate
  /// subset encoded as a bitmask (bit j set <=> j in the subset).
  double hk_variation(std::uint32_t mask) const {
    if (std::holds_alternative<Product>(kind_)) return hk_.at(mask - 1);
    if (std::holds_alternative<Constant>(kind_)) return 0.0;
    return mask == (std::uint32_t{1} << (min_dimension() - 1)) ? variation_ : 0.0;
  }

  double operator()(std::span<const double> x) const {
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Identity>) {
            return x[k.coord];
          } else if constexpr (std::is_same_v<K, Constant>) {
            return k.c;
          } else if constexpr (std::is_same_v<K, TwoPoint>) {
            return x[k.coord] < 0.5 ? k.lambda : 1.0 - k.lambda;
          } else if constexpr (std::is_same_v<K, Table>) {
            return interpolate(k.values, x[k.coord]);
          } else {
            double p = 1.0;
            for (double v : x) p *= v;
            return p;
          }
        },
        kind_);
  }

  double operator()(double x) const {
    const double p[1] = {x};
    return (*this)(std::span<const double>(p, 1));
  }

  /// Integral over [0,1]^r by adaptive quadrature (or exact evaluation for the
  /// product form). Independent of the declared closed form.
  double quadrature_integral(double abs_tol = 1e-10) const {
    if (std::holds_alternative<Product>(kind_)) return std::pow(0.5, static_cast<double>(dimension_));
    if (const auto* c = std::get_if<Constant>(&kind_)) return c->c;
    if (const auto* t = std::get_if<Table>(&kind_)) {
      // exact for piecewise-linear interpolants: integrate panel by panel
      const auto& v = t->values;
      const double h = 1.0 / static_cast<double>(v.size() - 1);
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < v.size(); ++i)
        s += integrate([&](double u) { return interpolate(v, u); }, h * static_cast<double>(i),
                       h * static_cast<double>(i + 1), {abs_tol / static_cast<double>(v.size()), 4000});
      return s;
    }
    if (std::holds_alternative<TwoPoint>(kind_)) {
      // split at the jump
      auto g = [&](double u) { return (*this)(u); };
      return integrate(g, 0.0, 0.5, {abs_tol / 2, 4000}) + integrate(g, 0.5, 1.0, {abs_tol / 2, 4000});
    }
    return integrate([&](double u) { return (*this)(u); }, 0.0, 1.0, {abs_tol, 4000});
  }

  /// Declared closed form when present, quadrature otherwise.
  double integral() const { return integral_ ? *integral_ : quadrature_integral(); }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Identity>) os << "identity";
          else if constexpr (std::is_same_v<K, Constant>) os << "constant:" << k.c;
          else if constexpr (std::is_same_v<K, TwoPoint>) os << "two-point:" << k.lambda;
          else if constexpr (std::is_same_v<K, Table>) os << "table[" << k.values.size() << "]";
          else os << "product";
        },
        kind_);
    return os.str();
  }

private:
  FieldFunction(Kind k, double variation, std::optional<double> integral)
      : kind_(std::move(k)), variation_(variation), integral_(integral) {
    hk_.assign(1, variation);
  }

  static double interpolate(const std::vector<double>& v, double x) {
    const double pos = x * static_cast<double>(v.size() - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i >= v.size() - 1) return v.back();
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
  }

  Kind kind_;
  double variation_ = 0.0;
  std::optional<double> integral_;
  std::size_t dimension_ = 1;
  std::vector<double> hk_;
};

/// The quenched field p_i = f(T^i x), i = 1..n.
struct FieldSequence {
  std::vector<double> p;
  std::string provenance;

  std::size_t size() const { return p.size(); }
  double mean() const {
    double s = 0.0, comp = 0.0;
    for (double v : p) {  // Neumaier
      const double t = s + v;
      comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
      s = t;
    }
    return (s + comp) / static_cast<double>(p.size());
  }
};

/// Wraps an explicit list of probabilities, validating p_i in [0,1].
inline FieldSequence make_field_sequence(std::vector<double> p, std::string provenance = "explicit") {
  if (p.empty()) throw DomainError("field sequence must be nonempty");
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("field value outside [0,1]");
  return FieldSequence{std::move(p), std::move(provenance)};
}

inline FieldSequence field_sequence(const TorusRotation& system, const FieldFunction& f, std::span<const double> x,
                                    std::size_t n) {
  if (n == 0) throw DomainError("field_sequence: n must be >= 1");
  if (f.min_dimension() > system.dimension()) throw DomainError("field function reads a coordinate the torus lacks");
  const PointSet pts = orbit(system, x, n);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = f(pts.point(i));
    if (!(p[i] >= 0.0 && p[i] <= 1.0))
      throw DomainError("field value outside [0,1] at step " + std::to_string(i + 1) + " (corrupt table?)");
  }
  std::ostringstream os;
  os.precision(17);
  os << system.describe() << ";" << f.describe() << ";x=";
  for (std::size_t j = 0; j < x.size(); ++j) os << (j ? "," : "") << x[j];
  return FieldSequence{std::move(p), os.str()};
}

inline FieldSequence field_sequence(const TorusRotation& system, const FieldFunction& f, double x, std::size_t n) {
  const double p[1] = {x};
  return field_sequence(system, f, std::span<const double>(p, 1), n);
}

struct ErgodicDeviationTrace {
  std::vector<std::size_t> n;
  std::vector<double> deviation;  // d_n = sum_{i<=n} h(T^i x) - n * integral
  double integral = 0.0;
  /// Least-squares slope of log|d_n| against log n over the upper half of
  /// the schedule. Empty when fewer than two usable points remain.
  std::optional<double> alpha_hat;
  double alpha_halfwidth = 0.0;  // 95% band from the slope standard error
  bool degenerate = false;
};

struct ExponentFit {
  std::optional<double> slope;
  double halfwidth = 0.0;
};

/// Log-log slope fit shared by the deviation trace and the CLI.
inline ExponentFit fit_growth_exponent(std::span<const std::size_t> n, std::span<const double> d) {
  std::vector<double> lx, ly;
  for (std::size_t i = n.size() / 2; i < n.size(); ++i) {
    if (std::abs(d[i]) < 1e-12) continue;
    lx.push_back(std::log(static_cast<double>(n[i])));
    ly.push_back(std::log(std::abs(d[i])));
  }
  ExponentFit out;
  if (lx.size() < 2) return out;
  const double m = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0) return out;
  const double slope = sxy / sxx;
  out.slope = slope;
  if (lx.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - (my + slope * (lx[i] - mx));
      rss += r * r;
    }
    out.halfwidth = 1.96 * std::sqrt(rss / (m - 2) / sxx);
  }
  return out;
}

/// Running ergodic-sum deviations of h along the orbit of x, recorded at each
/// n of the (strictly increasing) schedule.
inline ErgodicDeviationTrace ergodic_deviation(const FieldFunction& h, const TorusRotation& system,
                                               std::span<const double> x, std::span<const std::size_t> schedule,
                                               double integral_tol = 1e-8) {
  if (schedule.empty()) throw DomainError("ergodic_deviation: empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i)
    if (schedule[i] == 0 || (i > 0 && schedule[i] <= schedule[i - 1]))
      throw DomainError("ergodic_deviation: schedule must be strictly increasing and >= 1");
  if (h.min_dimension() > system.dimension()) throw DomainError("field function reads a coordinate the torus lacks");

  ErgodicDeviationTrace tr;
  const double quad = h.quadrature_integral();
  if (auto dec = h.declared_integral()) {
    if (std::abs(*dec - quad) > integral_tol)
      throw IntegralError("declared integral " + std::to_string(*dec) + " disagrees with quadrature " +
                          std::to_string(quad));
    tr.integral = *dec;
  } else {
    tr.integral = quad;
  }

  const std::size_t r = system.dimension();
  std::vector<double> pt(r);
  double s = 0.0, comp = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 1; i <= schedule.back(); ++i) {
    for (std::size_t j = 0; j < r; ++j) pt[j] = system.coordinate(x[j], j, i);
    const double v = h(std::span<const double>(pt)) - tr.integral;
    const double t = s + v;
    comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
    if (i == schedule[next]) {
      tr.n.push_back(i);
      tr.deviation.push_back(s + comp);
      ++next;
    }
  }
  const auto fit = fit_growth_exponent(tr.n, tr.deviation);
  tr.alpha_hat = fit.slope;
  tr.alpha_halfwidth = fit.halfwidth;
  tr.degenerate = !fit.slope.has_value();
  return tr;
}

inline ErgodicDeviationTrace ergodic_deviation(const FieldFunction& h, const TorusRotation& system, double x,
                                               std::span<const std::size_t> schedule) {
  const double p[1] = {x};
  return ergodic_deviation(h, system, std::span<const double>(p, 1), schedule);
}

}  // namespace cwfield

#endif  // CWFIELD_DYNSYS_HPP
