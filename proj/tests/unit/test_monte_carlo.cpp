#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "momeq/errors.hpp"
#include "momeq/monte_carlo.hpp"
#include "momeq/recursion.hpp"

namespace momeq {
namespace {

struct Problem {
  std::shared_ptr<const FeSpace> space;
  FactorizedLaplacian op;
  FeFunction u0;

  explicit Problem(std::size_t n)
      : space(make_space(n, 1)),
        op(assemble_laplacian(space)),
        u0(op.solve(assemble_source_load(*space, [](double) { return 1.0; }))) {}
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

TEST(PerSample, ZeroField) {
  const Problem s(16);
  const std::vector<double> y(s.space->dof_count(), 0.0);
  const auto u = per_sample_corrections(y, 4, s.op, s.u0);
  ASSERT_EQ(u.size(), 5u);
  for (unsigned k = 1; k <= 4; ++k) {
    for (double v : u[k].coefficients()) EXPECT_EQ(v, 0.0);
  }
}

TEST(PerSample, ConstantFieldClosedForm) {
  const Problem s(16);
  const double c = 0.1;
  const std::vector<double> y(s.space->dof_count(), c);
  const auto u = per_sample_corrections(y, 4, s.op, s.u0);
  double scale = 1.0;
  for (unsigned k = 0; k <= 4; ++k) {
    const double norm = fe_norm(s.u0, NormKind::Lp) * std::abs(scale);
    for (std::size_t d = 0; d < s.u0.coefficients().size(); ++d) {
      EXPECT_LE(std::abs(u[k].coefficients()[d] - scale * s.u0.coefficients()[d]), 1e-8 * norm) << "k=" << k;
    }
    scale *= -c;
  }
}

TEST(PerSample, TaylorSumApproximatesSolution) {
  const Problem s(32);
  std::vector<double> y(s.space->dof_count());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.05 * std::sin(7.0 * s.space->dof_coordinates()[i]);
  const auto exact = solve_sample(s.space, y, assemble_source_load(*s.space, [](double) { return 1.0; }));
  const auto u = per_sample_corrections(y, 3, s.op, s.u0);
  FeFunction sum = u[0];
  double factorial = 1.0;
  for (unsigned k = 1; k <= 3; ++k) {
    factorial *= k;
    FeFunction term = u[k];
    term *= 1.0 / factorial;
    sum += term;
  }
  FeFunction diff = sum;
  diff *= -1.0;
  diff += exact;
  EXPECT_LE(fe_norm(diff, NormKind::W1p), 1e-6 * fe_norm(exact, NormKind::W1p));
}

TEST(McMean, ZeroSigmaIsDeterministic) {
  const Problem s(16);
  McConfig cfg;
  cfg.samples = 50;
  const auto est = mc_mean(s.space, [](double) { return 1.0; }, {KernelKind::Exponential, 0.0, 0.5}, cfg);
  EXPECT_EQ(est.samples, 50u);
  for (std::size_t d = 0; d < s.u0.coefficients().size(); ++d) {
    EXPECT_NEAR(est.mean.coefficients()[d], s.u0.coefficients()[d], 1e-15);
    EXPECT_EQ(est.standard_error[d], 0.0);
  }
}

TEST(McMean, AgreesWithFourthOrderTaylorMean) {
  const CovarianceKernel kernel{KernelKind::SquaredExponential, 0.3, 0.5, 1.0};
  const Problem s(64);
  McConfig cfg;
  cfg.samples = 10000;
  const auto est = mc_mean(s.space, [](double) { return 1.0; }, kernel, cfg);
  RecursionConfig rc;
  rc.elements = 64;
  rc.level = 6;
  rc.order = 4;
  const auto table = run_recursion(rc, MomentEvaluator(kernel), s.op);
  const auto mean = taylor_mean(table, 4).mean;
  // Domain average via the P1 mass-lumped weights h at interior nodes.
  const double h = 1.0 / 64.0;
  double avg_mc = 0.0, avg_taylor = 0.0, pooled_se = 0.0;
  for (std::size_t d = 0; d < mean.coefficients().size(); ++d) {
    avg_mc += h * est.mean.coefficients()[d];
    avg_taylor += h * mean.coefficients()[d];
    pooled_se += h * est.standard_error[d];
  }
  EXPECT_LE(std::abs(avg_mc - avg_taylor), 5.0 * pooled_se);
}

TEST(McCorrections, OrderZeroAndOddOrders) {
  const Problem s(16);
  const CovarianceKernel kernel{KernelKind::Exponential, 0.3, 0.5};
  McConfig cfg;
  cfg.samples = 200;
  const auto e0 = mc_corrections_mean(s.op, s.u0, kernel, 0, cfg);
  for (std::size_t d = 0; d < s.u0.coefficients().size(); ++d) {
    EXPECT_EQ(e0.mean.coefficients()[d], s.u0.coefficients()[d]);
    EXPECT_EQ(e0.standard_error[d], 0.0);
  }
  const auto e1 = mc_corrections_mean(s.op, s.u0, kernel, 1, cfg);
  for (double v : e1.mean.coefficients()) EXPECT_EQ(v, 0.0);
  cfg.antithetic = false;
  cfg.samples = 2000;
  for (unsigned k : {1u, 3u}) {
    const auto odd = mc_corrections_mean(s.op, s.u0, kernel, k, cfg);
    for (std::size_t d = 1; d + 1 < s.u0.coefficients().size(); ++d) {
      EXPECT_LE(std::abs(odd.mean.coefficients()[d]), 5.0 * odd.standard_error[d]) << "k=" << k << " dof " << d;
    }
  }
}

TEST(McCorrections, StandardErrorShrinksWithSamples) {
  const Problem s(16);
  const CovarianceKernel kernel{KernelKind::Exponential, 0.3, 0.5};
  McConfig cfg;
  cfg.antithetic = false;
  cfg.samples = 4000;
  const auto a = mc_corrections_mean(s.op, s.u0, kernel, 2, cfg);
  cfg.samples = 8000;
  const auto b = mc_corrections_mean(s.op, s.u0, kernel, 2, cfg);
  auto interior = [](const std::vector<double>& se) { return std::vector<double>(se.begin() + 1, se.end() - 1); };
  const double ratio = median(interior(a.standard_error)) / median(interior(b.standard_error));
  EXPECT_NEAR(ratio, std::sqrt(2.0), 0.1 * std::sqrt(2.0));
}

TEST(McCorrections, ReproducibleAcrossThreads) {
  const Problem s(16);
  const CovarianceKernel kernel{KernelKind::Exponential, 0.3, 0.5};
  McConfig cfg;
  cfg.samples = 500;
  const auto a = mc_corrections_mean(s.op, s.u0, kernel, 2, cfg);
  const auto b = mc_corrections_mean(s.op, s.u0, kernel, 2, cfg);
  cfg.threads = 3;
  const auto c = mc_corrections_mean(s.op, s.u0, kernel, 2, cfg);
  for (std::size_t d = 0; d < s.u0.coefficients().size(); ++d) {
    EXPECT_EQ(a.mean.coefficients()[d], b.mean.coefficients()[d]);
    EXPECT_NEAR(a.mean.coefficients()[d], c.mean.coefficients()[d], 1e-13 * std::abs(a.mean.coefficients()[d]));
    EXPECT_GE(a.standard_error[d], 0.0);
  }
  cfg.seed += 1;
  const auto other = mc_corrections_mean(s.op, s.u0, kernel, 2, cfg);
  EXPECT_NE(other.mean.coefficients()[5], a.mean.coefficients()[5]);
}

TEST(McCorrections, SkippedSamplesAbortRun) {
  const Problem s(8);
  McConfig cfg;
  cfg.samples = 100;
  std::size_t calls = 0;
  EXPECT_THROW(mc_expectation(s.space, {KernelKind::Exponential, 0.3, 0.5}, cfg,
                              [&](std::span<const double>, std::span<double>) {
                                if (++calls % 10 == 0) throw NumericalError("synthetic failure");
                              }),
               NumericalError);
  EXPECT_THROW(mc_mean(s.space, [](double) { return 1.0; }, {}, McConfig{1}), InvalidArgument);
}

}  // namespace
}  // namespace momeq
