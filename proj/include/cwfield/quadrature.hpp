#ifndef CWFIELD_QUADRATURE_HPP
#define CWFIELD_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace cwfield {

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double norm_inf(double v) { return std::abs(v); }

template <class V>
double norm_inf(const V& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// Values are either double or fixed-size coefficient containers supporting
// element-wise arithmetic (std::array / Jet coefficients).
template <class V>
V axpy(const V& acc, double w, const V& f) {
  if constexpr (std::is_arithmetic_v<V>) {
    return acc + w * f;
  } else {
    V out = acc;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * f[i];
    return out;
  }
}

template <class V>
V scaled(const V& v, double s) {
  if constexpr (std::is_arithmetic_v<V>) {
    return v * s;
  } else {
    V out = v;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
  }
}

template <class V>
V zero_like(const V& v) {
  return scaled(v, 0.0);
}

template <class V>
V diff(const V& a, const V& b) {
  return axpy(a, -1.0, b);
}

template <class V>
struct Panel {
  double a = 0.0;
  double b = 0.0;
  V value{};
  double error = 0.0;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
auto gk15(const F& f, double a, double b) {
  using V = decltype(f(a));
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const V fc = f(c);
  V kron = scaled(fc, kronrod_w[7]);
  V gauss = scaled(fc, gauss_w[3]);
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = h * kronrod_x[i];
    const V f1 = f(c - dx);
    const V f2 = f(c + dx);
    kron = axpy(axpy(kron, kronrod_w[i], f1), kronrod_w[i], f2);
    if (i % 2 == 1) {
      const double gw = gauss_w[i / 2];
      gauss = axpy(axpy(gauss, gw, f1), gw, f2);
    }
  }
  kron = scaled(kron, h);
  gauss = scaled(gauss, h);
  Panel<V> p;
  p.a = a;
  p.b = b;
  p.error = norm_inf(diff(kron, gauss));
  p.value = std::move(kron);
  return p;
}

}  // namespace detail

struct QuadratureOptions {
  double abs_tol = 1e-10;
  std::size_t max_panels = 4000;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of a scalar or
/// fixed-size vector valued integrand over [a, b]. Subdivides the panel with
/// the largest error estimate until the summed estimate falls below abs_tol.
/// Throws QuadratureError if the panel budget is exhausted first.
template <class F>
auto integrate(const F& f, double a, double b, QuadratureOptions opt = {}) {
  using V = decltype(f(a));
  if (a == b) return detail::zero_like(f(a));
  std::priority_queue<detail::Panel<V>> heap;
  heap.push(detail::gk15(f, a, b));
  double total_err = heap.top().error;
  while (total_err > opt.abs_tol) {
    if (heap.size() >= opt.max_panels) {
      throw QuadratureError("adaptive quadrature did not converge (error estimate " +
                            std::to_string(total_err) + ")");
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    // recompute periodically to avoid drift in the running error sum
    if (heap.size() % 64 == 0) {
      auto copy = heap;
      total_err = 0.0;
      while (!copy.empty()) {
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  V sum = detail::zero_like(heap.top().value);
  // sum smallest panels first
  std::vector<detail::Panel<V>> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  for (auto it = panels.rbegin(); it != panels.rend(); ++it) sum = detail::axpy(sum, 1.0, it->value);
  return sum;
}

/// Nodes and weights of a composite 15-point Kronrod rule on `panels` equal
/// subintervals of [a, b]. Exact for piecewise polynomials of degree <= 22
/// aligned with the panels.
struct NodeWeights {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline NodeWeights composite_kronrod(double a, double b, std::size_t panels) {
  NodeWeights out;
  out.nodes.reserve(15 * panels);
  out.weights.reserve(15 * panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double c = lo + 0.5 * width;
    const double h = 0.5 * width;
    for (std::size_t i = 0; i < 7; ++i) {
      out.nodes.push_back(c - h * detail::kronrod_x[i]);
      out.weights.push_back(h * detail::kronrod_w[i]);
      out.nodes.push_back(c + h * detail::kronrod_x[i]);
      out.weights.push_back(h * detail::kronrod_w[i]);
    }
    out.nodes.push_back(c);
    out.weights.push_back(h * detail::kronrod_w[7]);
  }
  return out;
}

}  // namespace cwfield

#endif  // CWFIELD_QUADRATURE_HPP
