#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "cwfield/jet.hpp"
#include "cwfield/quadrature.hpp"

using namespace cwfield;

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

TEST(Jet, ExpAndLogOfVariableMatchTaylorCoefficients) {
  const auto t = Jet<10>::variable(0.3);
  const auto e = exp(t);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(e.derivative(k), std::exp(0.3), 1e-12 * std::exp(0.3));
  const auto l = log(t);
  // d^k/dt^k log t = (-1)^(k-1) (k-1)! / t^k
  for (int k = 1; k < 10; ++k) {
    const double want = ((k - 1) % 2 ? -1.0 : 1.0) * factorial(k - 1) / std::pow(0.3, k);
    EXPECT_NEAR(l.derivative(k), want, 1e-10 * std::abs(want)) << "k = " << k;
  }
}

TEST(Jet, ProductQuotientAndCompositionAgreeWithFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto f = [](auto t) { return log(exp(t * 2.0) + 1.0) * t / (t * t + 1.0); };
  auto fd = [](double x) { return std::log(std::exp(2 * x) + 1) * x / (x * x + 1); };
  for (int trial = 0; trial < 50; ++trial) {
    const double x = U(rng);
    const auto j = f(Jet<4>::variable(x));
    EXPECT_NEAR(j.value(), fd(x), 1e-14);
    const double h = 1e-3;
    const double d1 = (fd(x - 2 * h) - 8 * fd(x - h) + 8 * fd(x + h) - fd(x + 2 * h)) / (12 * h);
    const double d2 = (-fd(x - 2 * h) + 16 * fd(x - h) - 30 * fd(x) + 16 * fd(x + h) - fd(x + 2 * h)) / (12 * h * h);
    const double d3 = (fd(x + 2 * h) - 2 * fd(x + h) + 2 * fd(x - h) - fd(x - 2 * h)) / (2 * h * h * h);
    EXPECT_NEAR(j.derivative(1), d1, 1e-9);
    EXPECT_NEAR(j.derivative(2), d2, 1e-6);
    EXPECT_NEAR(j.derivative(3), d3, 1e-4);
  }
}

TEST(Jet, ScaleArgumentMatchesChainRule) {
  const double theta = 1.7, x = 0.4;
  const auto base = exp(Jet<8>::variable(theta * x));
  const auto scaled = base.scale_argument(theta);
  const auto direct = exp(Jet<8>::variable(x) * theta);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(scaled[k], direct[k], 1e-12 * std::abs(direct[k]) + 1e-15);
}

TEST(Quadrature, KnownIntegrals) {
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-12);
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0, {1e-14, 4000}), std::sqrt(std::numbers::pi),
              1e-13);
  EXPECT_NEAR(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, {1e-12, 4000}), 2.0 / 3.0, 1e-11);
  EXPECT_EQ(integrate([](double) { return 3.0; }, 0.5, 0.5), 0.0);
  // kink at an interior point
  EXPECT_NEAR(integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {1e-13, 4000}), 0.045 + 0.245, 1e-12);
}

TEST(Quadrature, VectorValuedIntegrand) {
  const auto v = integrate([](double x) { return std::array<double, 3>{1.0, x, x * x}; }, 0.0, 2.0);
  EXPECT_NEAR(v[0], 2.0, 1e-14);
  EXPECT_NEAR(v[1], 2.0, 1e-14);
  EXPECT_NEAR(v[2], 8.0 / 3.0, 1e-13);
}

TEST(Quadrature, BudgetExhaustionThrows) {
  EXPECT_THROW(integrate([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.31)); }, 0.0, 1.0, {1e-15, 20}),
               QuadratureError);
}

TEST(Quadrature, CompositeKronrodIsExactForPolynomials) {
  const auto nw = composite_kronrod(-1.0, 2.0, 5);
  ASSERT_EQ(nw.nodes.size(), 75u);
  for (int deg = 0; deg <= 22; ++deg) {
    double s = 0.0;
    for (std::size_t i = 0; i < nw.nodes.size(); ++i) s += nw.weights[i] * std::pow(nw.nodes[i], deg);
    const double want = (std::pow(2.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
    EXPECT_NEAR(s, want, 1e-12 * std::max(1.0, std::abs(want))) << "degree " << deg;
  }
}
