#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "momeq/errors.hpp"
#include "momeq/gaussian.hpp"

namespace momeq {
namespace {

TEST(Covariance, ReferenceValues) {
  EXPECT_DOUBLE_EQ(cov_eval({KernelKind::Exponential, 1.0, 1.0}, 0.3, 0.3), 1.0);
  EXPECT_NEAR(cov_eval({KernelKind::Exponential, 2.0, 0.5}, 0.0, 0.5), 4.0 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(cov_eval({KernelKind::SquaredExponential, 2.0, 0.5}, 0.0, 0.5), 4.0 * std::exp(-1.0), 1e-15);
}

TEST(Covariance, Symmetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto kind : {KernelKind::Exponential, KernelKind::SquaredExponential}) {
    const CovarianceKernel k{kind, 0.7, 0.3};
    for (int i = 0; i < 100; ++i) {
      const double a = u(rng), b = u(rng);
      EXPECT_LE(std::abs(cov_eval(k, a, b) - cov_eval(k, b, a)), 1e-15);
    }
  }
}

TEST(Covariance, Validation) {
  EXPECT_THROW((CovarianceKernel{KernelKind::Exponential, -1.0, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((CovarianceKernel{KernelKind::Exponential, 1.0, 0.0}.validate()), InvalidArgument);
  EXPECT_THROW(kernel_kind_from_string("matern"), InvalidArgument);
  EXPECT_EQ(kernel_kind_from_string(to_string(KernelKind::SquaredExponential)), KernelKind::SquaredExponential);
}

TEST(Pairings, Counts) {
  EXPECT_EQ(pairing_count(0), 1u);
  EXPECT_EQ(pairing_count(3), 0u);
  EXPECT_EQ(pairing_count(6), 15u);
  std::set<std::vector<std::size_t>> seen;
  for_each_pairing(6, [&](std::span<const std::array<std::size_t, 2>> pairs) {
    std::vector<std::size_t> flat;
    for (const auto& p : pairs) flat.insert(flat.end(), p.begin(), p.end());
    std::vector<std::size_t> sorted = flat;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(sorted[i], i);
    seen.insert(flat);
  });
  EXPECT_EQ(seen.size(), 15u);
}

TEST(Moments, LowOrders) {
  const CovarianceKernel k{KernelKind::Exponential, 0.8, 0.5};
  const MomentEvaluator ev(k);
  EXPECT_EQ(ev(std::vector<double>{}), 1.0);
  EXPECT_EQ(ev(std::vector<double>{0.3}), 0.0);
  EXPECT_EQ(ev(std::vector<double>{0.1, 0.2, 0.9}), 0.0);
  EXPECT_DOUBLE_EQ(ev(std::vector<double>{0.2, 0.7}), cov_eval(k, 0.2, 0.7));
  const std::vector<double> y{0.1, 0.35, 0.6, 0.85};
  auto c = [&](int a, int b) { return cov_eval(k, y[a], y[b]); };
  EXPECT_NEAR(moment_eval(ev, y), c(0, 1) * c(2, 3) + c(0, 2) * c(1, 3) + c(0, 3) * c(1, 2), 1e-15);
}

TEST(Moments, PermutationInvariance) {
  const MomentEvaluator ev(CovarianceKernel{KernelKind::Exponential, 1.3, 0.4});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t m : {2u, 4u, 6u, 8u}) {
    std::vector<double> y(m);
    for (auto& v : y) v = u(rng);
    const double base = ev(y);
    for (int t = 0; t < 10; ++t) {
      std::shuffle(y.begin(), y.end(), rng);
      EXPECT_LE(std::abs(ev(y) - base), 1e-13 * std::abs(base));
    }
  }
}

TEST(Moments, Homogeneity) {
  const std::vector<double> y{0.05, 0.3, 0.31, 0.6, 0.8, 0.95};
  const double a = MomentEvaluator(CovarianceKernel{KernelKind::Exponential, 0.4, 0.5})(y);
  const double b = MomentEvaluator(CovarianceKernel{KernelKind::Exponential, 1.2, 0.5})(y);
  EXPECT_LE(std::abs(b - std::pow(3.0, 6) * a), 1e-13 * std::abs(b));
}

TEST(Moments, OrderCap) {
  const MomentEvaluator ev(CovarianceKernel{});
  EXPECT_THROW(ev(std::vector<double>(10, 0.5)), CapacityError);
  const MomentEvaluator small(CovarianceKernel{}, 4);
  EXPECT_THROW(small(std::vector<double>(6, 0.5)), CapacityError);
}

TEST(Moments, ArbitraryCovariance) {
  const SyntheticKlField field({[](double x) { return 1.0 + x; }, [](double x) { return std::sin(3 * x); }});
  const MomentEvaluator ev(field.covariance_function());
  EXPECT_NEAR(ev(std::vector<double>{0.2, 0.4}), 1.2 * 1.4 + std::sin(0.6) * std::sin(1.2), 1e-15);
}

TEST(Sampler, SingleLocation) {
  const GaussianSampler s({KernelKind::Exponential, 2.0, 1.0}, {0.5}, 1e-10, 1);
  ASSERT_EQ(s.factor().lower.size(), 1u);
  EXPECT_NEAR(s.factor().lower[0], 2.0 * std::sqrt(1.0 + 1e-10), 1e-15);
}

TEST(Sampler, NearCoincidentLocations) {
  const CovarianceKernel k{KernelKind::Exponential, 1.0, 0.5};
  const GaussianSampler s(k, {0.3, 0.3 + 1e-12}, 1e-10, 1);
  EXPECT_GT(s.factor().applied_jitter, 0.0);
  EXPECT_LE(s.factor().residual, 10.0 * s.factor().applied_jitter * k.sigma * k.sigma);
}

TEST(Sampler, RejectsNegativeJitter) {
  EXPECT_THROW(GaussianSampler(CovarianceKernel{}, {0.1, 0.2}, -1.0, 1), InvalidArgument);
}

TEST(Sampler, ZeroSigmaGivesZeros) {
  GaussianSampler s({KernelKind::Exponential, 0.0, 0.5}, {0.0, 0.25, 0.5, 0.75, 1.0}, 1e-10, 3);
  for (int i = 0; i < 5; ++i) {
    for (double v : sample_field(s)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Sampler, Deterministic) {
  const std::vector<double> loc{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  GaussianSampler a(CovarianceKernel{}, loc, 1e-10, 99);
  GaussianSampler b(CovarianceKernel{}, loc, 1e-10, 99);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a.sample(), b.sample());
  auto fa = a.fork(4), fb = b.fork(4);
  EXPECT_EQ(fa.sample(), fb.sample());
  EXPECT_NE(a.fork(1).sample(), a.fork(2).sample());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Sampler, EmpiricalCovariance) {
  const CovarianceKernel k{KernelKind::Exponential, 1.0, 0.5};
  std::vector<double> loc(65);
  for (std::size_t i = 0; i < loc.size(); ++i) loc[i] = static_cast<double>(i) / 64.0;
  GaussianSampler s(k, loc, 1e-10, 2024);
  const std::size_t n = 100000;
  const std::array<std::array<std::size_t, 2>, 10> pairs{
      {{0, 64}, {3, 9}, {10, 11}, {20, 40}, {32, 32}, {5, 60}, {17, 18}, {44, 50}, {1, 2}, {30, 35}}};
  std::array<double, 10> sum{}, sum_sq{};
  double mid = 0.0, mid_sq = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto y = s.sample();
    mid += y[32];
    mid_sq += y[32] * y[32];
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double prod = y[pairs[p][0]] * y[pairs[p][1]];
      sum[p] += prod;
      sum_sq[p] += prod * prod;
    }
  }
  const double dn = static_cast<double>(n);
  const double mean_mid = mid / dn;
  EXPECT_NEAR(mid_sq / dn - mean_mid * mean_mid, 1.0, 0.02);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double m = sum[p] / dn;
    const double se = std::sqrt((sum_sq[p] / dn - m * m) / dn);
    EXPECT_LE(std::abs(m - cov_eval(k, loc[pairs[p][0]], loc[pairs[p][1]])), 5.0 * se) << "pair " << p;
  }
}

TEST(SyntheticField, RealizeAndCovariance) {
  const SyntheticKlField field({[](double) { return 1.0; }, [](double x) { return x; }});
  EXPECT_EQ(field.rank(), 2u);
  const std::vector<double> xs{0.0, 0.5, 1.0};
  const auto y = field.realize(std::vector<double>{2.0, -1.0}, xs);
  EXPECT_DOUBLE_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], 1.5);
  EXPECT_DOUBLE_EQ(y[2], 1.0);
  EXPECT_DOUBLE_EQ(field.covariance(0.5, 1.0), 1.5);
  EXPECT_THROW(field.realize(std::vector<double>{1.0}, xs), InvalidArgument);
}

}  // namespace
}  // namespace momeq
