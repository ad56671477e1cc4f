#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "momeq/errors.hpp"
#include "momeq/oracles.hpp"

namespace momeq {
namespace {

std::vector<double> uniform_axis(std::size_t points) {
  std::vector<double> axis(points);
  for (std::size_t i = 0; i < points; ++i) axis[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  return axis;
}

TEST(FullTensorOracleTest, OneDimensionalIsInterpolation) {
  const LevelFamily family;
  auto f = [](std::span<const double> y) { return std::exp(-3 * y[0]); };
  const FullTensorOracle oracle(family, 3, 1, f);
  std::vector<double> values;
  for (double x : level_nodes(family, 3)) values.push_back(std::exp(-3 * x));
  const auto p = interp_1d(family, 3, values);
  for (double y : {0.0, 0.11, 0.5, 0.93}) {
    const std::vector<double> point{y};
    EXPECT_LE(std::abs(oracle(point) - p(y)), 1e-15);
    EXPECT_LE(std::abs(oracle.full_tensor(point) - p(y)), 1e-15);
  }
}

TEST(FullTensorOracleTest, BaseDifferenceIsCoarseInterpolant) {
  const LevelFamily family;
  auto f = [](std::span<const double> y) { return y[0] * y[0] + y[1]; };
  const FullTensorOracle oracle(family, 2, 2, f);
  for (double a : {0.1, 0.6}) {
    const std::vector<double> y{a, 0.3};
    EXPECT_NEAR(oracle.difference({0, 0}, y), oracle.tensor({0, 0}, y), 1e-15);
    EXPECT_NEAR(oracle.difference({1, 0}, y), oracle.tensor({1, 0}, y) - oracle.tensor({0, 0}, y), 1e-15);
  }
}

TEST(FullTensorOracleTest, CostGuard) {
  auto f = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(FullTensorOracle(LevelFamily(), 2, 4, f), CapacityError);
  EXPECT_THROW(FullTensorOracle(LevelFamily(), 5, 2, f), CapacityError);
}

TEST(Holder, ConstantDataIsZero) {
  const auto data = tabulate({uniform_axis(9), uniform_axis(5)}, [](std::span<const double>) { return 3.0; });
  EXPECT_EQ(mixed_holder_seminorm(data, 0.5), 0.0);
  EXPECT_EQ(mixed_holder_norm(data, 0.5), 3.0);
}

TEST(Holder, LinearDataLipschitz) {
  const auto data = tabulate({uniform_axis(17)}, [](std::span<const double> y) { return y[0]; });
  EXPECT_NEAR(mixed_holder_seminorm(data, 1.0), 1.0, 1e-14);
}

TEST(Holder, ProductIdentity) {
  auto u1 = [](double y) { return 0.5 + std::sin(3 * y); };
  auto u2 = [](double y) { return std::sqrt(y) - 0.2; };
  const auto axis = uniform_axis(13);
  const double gamma = 0.4;
  const double n1 = mixed_holder_norm(tabulate({axis}, [&](std::span<const double> y) { return u1(y[0]); }), gamma);
  const double n2 = mixed_holder_norm(tabulate({axis}, [&](std::span<const double> y) { return u2(y[0]); }), gamma);
  const double n12 = mixed_holder_norm(
      tabulate({axis, axis}, [&](std::span<const double> y) { return u1(y[0]) * u2(y[1]); }), gamma);
  EXPECT_LE(std::abs(n12 - n1 * n2), 1e-12 * n12);
}

TEST(Holder, MonotoneUnderNestedRefinement) {
  auto f = [](std::span<const double> y) { return std::abs(y[0] - 0.3) * (1 + y[1]); };
  double previous = 0.0;
  for (std::size_t points : {3u, 5u, 9u, 17u, 33u}) {
    const double s = mixed_holder_seminorm(tabulate({uniform_axis(points), uniform_axis(points)}, f), 0.7);
    EXPECT_GE(s, previous - 1e-12);
    previous = s;
  }
}

TEST(Holder, Guards) {
  auto f = [](std::span<const double>) { return 0.0; };
  EXPECT_THROW(mixed_holder_seminorm(tabulate({uniform_axis(34)}, f), 0.5), CapacityError);
  EXPECT_THROW(mixed_holder_seminorm(tabulate(std::vector<std::vector<double>>(4, uniform_axis(3)), f), 0.5),
               CapacityError);
  EXPECT_THROW(mixed_holder_seminorm(tabulate({uniform_axis(3)}, f), 0.0), InvalidArgument);
  EXPECT_THROW(mixed_holder_seminorm(tabulate({{0.5}}, f), 0.5), InvalidArgument);
}

TEST(Coefficients, ThetaBaseCases) {
  const CoefficientInputs unit{};
  EXPECT_EQ(theta_coeff(3, 3, unit), 1.0);
  EXPECT_EQ(theta_coeff(2, 3, unit), 0.0);
  // theta_{2,1} = C_S * binom(2,1) * C_tr * theta_{1,1}
  EXPECT_DOUBLE_EQ(theta_coeff(2, 1, {2.0, 3.0, 1.0}), 12.0);
  EXPECT_EQ(theta_coeff_exact(2, 1, {2, 3, 1}), 12u);
}

TEST(Coefficients, LambdaUnitConstants) {
  const auto lambda = lambda_coeffs(6, {});
  ASSERT_EQ(lambda.size(), 7u);
  EXPECT_EQ(lambda[0], 1.0);
  EXPECT_EQ(lambda[1], 1.0);
  EXPECT_EQ(lambda[2], 3.0);
  EXPECT_EQ(lambda[3], 13.0);
  for (std::size_t n = 1; n < lambda.size(); ++n) EXPECT_GE(lambda[n], lambda[n - 1]);
}

TEST(Coefficients, IntegerExactness) {
  const auto exact = lambda_coeffs_exact(8, {1, 2, 3});
  const auto real = lambda_coeffs(8, {1.0, 2.0, 3.0});
  for (std::size_t n = 0; n < exact.size(); ++n) EXPECT_EQ(real[n], static_cast<double>(exact[n]));
  EXPECT_THROW(lambda_coeffs_exact(40, {1, 1000, 1000}), CapacityError);
}

}  // namespace
}  // namespace momeq
