#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "momeq/errors.hpp"
#include "momeq/recursion.hpp"

namespace momeq {
namespace {

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den == 0.0 ? num : num / den;
}

FeFunction unit_mean(std::shared_ptr<const FeSpace> space) {
  return assemble_laplacian(space).solve(assemble_source_load(*space, [](double) { return 1.0; }));
}

RecursionConfig small_config(unsigned order, unsigned level = 2, std::size_t elements = 16) {
  RecursionConfig rc;
  rc.elements = elements;
  rc.level = level;
  rc.order = order;
  return rc;
}

const CovarianceKernel kKernel{KernelKind::Exponential, 0.3, 0.5, 0.4};

TEST(Seed, OddOrderIsZero) {
  const auto space = make_space(8, 1);
  const auto u0 = unit_mean(space);
  const GridCache grids(LevelFamily(), 2);
  const auto seed = seed_correlation(u0, MomentEvaluator(kKernel), 3, grids.get(3));
  EXPECT_TRUE(seed.zero);
  const auto at = seed.at(std::vector<double>{0.1, 0.2, 0.3});
  for (double v : at.coefficients()) EXPECT_EQ(v, 0.0);
  const auto dense = seed_correlation(u0, MomentEvaluator(kKernel), 3, grids.get(3), 1, true);
  EXPECT_FALSE(dense.zero);
  for (double v : dense.values->nodal_values()) EXPECT_EQ(v, 0.0);
}

TEST(Seed, DiagonalAndSeparability) {
  const auto space = make_space(8, 1);
  const auto u0 = unit_mean(space);
  const GridCache grids(LevelFamily(), 3);
  const auto seed = seed_correlation(u0, MomentEvaluator(kKernel), 2, grids.get(2));
  const auto& grid = *seed.values->grid_ptr();
  const double var = kKernel.sigma * kKernel.sigma;
  for (std::size_t id = 0; id < grid.node_count(); ++id) {
    const auto y = grid.node(id);
    const auto payload = seed.values->node_payload(id);
    const double c = cov_eval(kKernel, y[0], y[1]);
    for (std::size_t d = 0; d < payload.size(); ++d) {
      EXPECT_NEAR(payload[d], c * u0.coefficients()[d], 1e-15);
    }
    if (y[0] == y[1]) {
      for (std::size_t d = 0; d < payload.size(); ++d) EXPECT_NEAR(payload[d], var * u0.coefficients()[d], 1e-15);
    }
  }
  const auto a = seed.at(std::vector<double>{0.25, 0.75});
  const auto b = seed.at(std::vector<double>{0.5, 0.75});
  const double ratio = cov_eval(kKernel, 0.25, 0.75) / cov_eval(kKernel, 0.5, 0.75);
  for (std::size_t d = 0; d < a.coefficients().size(); ++d) {
    if (std::abs(b.coefficients()[d]) > 1e-12) EXPECT_NEAR(a.coefficients()[d] / b.coefficients()[d], ratio, 1e-12);
  }
}

TEST(Trace, RankOneClosedForm) {
  const auto space = make_space(10, 2);
  const auto g = fe_project([](double x) { return std::sin(3 * x) * x * (1 - x); }, space);
  auto c = [](double y) { return 1.0 + 2.0 * y; };
  const auto grid = std::make_shared<SparseGrid>(LevelFamily(), 2, 3);
  const auto values = std::make_shared<SparseInterpolant>(
      smolyak_build(grid, space->dof_count(), [&](std::span<const double> y, std::span<double> out) {
        const double w = c(y[0]) * c(y[1]) * c(y[2]);
        for (std::size_t d = 0; d < out.size(); ++d) out[d] = w * g.coefficients()[d];
      }));
  const Correlation corr{0, 3, false, space, values};
  const auto grad_g = gradients_at_quadrature(*space, g.coefficients());
  const auto qp = space->qp_coordinates();
  for (unsigned j : {1u, 2u, 3u}) {
    std::vector<double> fixed(3 - j, 0.4);
    const auto t = trace_gradient(corr, j, fixed, *space);
    ASSERT_EQ(t.size(), qp.size());
    for (std::size_t q = 0; q < qp.size(); ++q) {
      const double expected = grad_g[q] * std::pow(c(qp[q]), j) * std::pow(c(0.4), 3 - j);
      EXPECT_NEAR(t[q], expected, 1e-12);
    }
  }
  EXPECT_THROW(trace_gradient(corr, 1, std::vector<double>{0.4}, *space), InvalidArgument);
  EXPECT_THROW(trace_gradient(corr, 0, std::vector<double>{0.4, 0.4, 0.4}, *space), InvalidArgument);
}

TEST(Trace, ZeroCorrelation) {
  const auto space = make_space(8, 1);
  const GridCache grids(LevelFamily(), 2);
  const auto seed = seed_correlation(unit_mean(space), MomentEvaluator(kKernel), 3, grids.get(3));
  for (double v : trace_rhs(seed, 2, std::vector<double>{0.3}, *space)) EXPECT_EQ(v, 0.0);
}

TEST(Trace, SeedAgainstExactKernelQuadrature) {
  const auto space = make_space(16, 1);
  const auto u0 = unit_mean(space);
  const unsigned level = 4;
  const GridCache grids(LevelFamily(), level);
  const auto seed = seed_correlation(u0, MomentEvaluator(kKernel), 2, grids.get(2));
  const double y = 0.375;
  const auto rhs = trace_rhs(seed, 1, std::vector<double>{y}, *space);

  // Same functional with the exact kernel, plus a bound from the measured
  // interpolation error of the kernel at the (x_q, y) points.
  const auto interp = smolyak_build(LevelFamily(), level, 2, [](std::span<const double> p) {
    return cov_eval(kKernel, p[0], p[1]);
  });
  const auto grad = gradients_at_quadrature(*space, u0.coefficients());
  const auto qp = space->qp_coordinates();
  std::vector<double> exact_flux(qp.size()), abs_flux(qp.size());
  double interp_error = 0.0;
  for (std::size_t q = 0; q < qp.size(); ++q) {
    exact_flux[q] = grad[q] * cov_eval(kKernel, qp[q], y);
    abs_flux[q] = std::abs(grad[q]);
    const std::vector<double> point{qp[q], y};
    interp_error = std::max(interp_error, std::abs(interp.evaluate_scalar(point) - cov_eval(kKernel, qp[q], y)));
  }
  const auto exact = assemble_flux_load(*space, exact_flux);
  // A P1 hat has int |phi'| = 2.
  const double bound = 2.0 * interp_error * *std::max_element(abs_flux.begin(), abs_flux.end());
  EXPECT_GT(interp_error, 0.0);
  for (std::size_t dof = 1; dof + 1 < space->dof_count(); ++dof) {
    EXPECT_LE(std::abs(rhs[dof] - exact[dof]), bound + 1e-15) << "dof " << dof;
  }
}

TEST(Solve, MissingLowerTerm) {
  const auto space = make_space(8, 1);
  const auto op = assemble_laplacian(space);
  const GridCache grids(LevelFamily(), 2);
  EXPECT_THROW(solve_correlation(2, 1, {}, op, grids.get(1)), InvalidArgument);
}

TEST(Solve, ZeroLowerGivesZero) {
  const auto space = make_space(8, 1);
  const auto op = assemble_laplacian(space);
  const GridCache grids(LevelFamily(), 2);
  const auto seed = seed_correlation(unit_mean(space), MomentEvaluator(kKernel), 1, grids.get(1));
  std::size_t solves = 0;
  const auto e1 = solve_correlation(1, 0, {{1u, &seed}}, op, grids.get(0), 1, &solves);
  EXPECT_TRUE(e1.zero);
  EXPECT_EQ(solves, 0u);
  const auto value = e1.function();
  for (double v : value.coefficients()) EXPECT_EQ(v, 0.0);
}

TEST(Solve, LinearInSeed) {
  const auto space = make_space(16, 1);
  const auto op = assemble_laplacian(space);
  const auto u0 = unit_mean(space);
  const GridCache grids(LevelFamily(), 3);
  const MomentEvaluator once(kKernel);
  const MomentEvaluator twice([](double a, double b) { return 2.0 * cov_eval(kKernel, a, b); });
  const auto s1 = seed_correlation(u0, once, 2, grids.get(2));
  const auto s2 = seed_correlation(u0, twice, 2, grids.get(2));
  const auto c1 = solve_correlation(2, 1, {{1u, &s1}}, op, grids.get(1));
  const auto c2 = solve_correlation(2, 1, {{1u, &s2}}, op, grids.get(1));
  const auto a = c1.values->nodal_values();
  std::vector<double> doubled(a.begin(), a.end());
  for (auto& v : doubled) v *= 2.0;
  EXPECT_LE(rel_diff(c2.values->nodal_values(), doubled), 1e-12);
}

TEST(Recursion, OrderZeroTable) {
  const auto table = run_recursion(small_config(0), MomentEvaluator(kKernel));
  EXPECT_EQ(table.entries.size(), 1u);
  EXPECT_EQ(table.solve_count, 1u);
  const auto mean = taylor_mean(table, 0).mean;
  const auto u0 = unit_mean(table.space);
  EXPECT_EQ(std::vector<double>(mean.coefficients().begin(), mean.coefficients().end()),
            std::vector<double>(u0.coefficients().begin(), u0.coefficients().end()));
}

TEST(Recursion, SecondOrderEntriesAndSolveCount) {
  RecursionConfig rc;  // n = 128, L = 5, K = 2
  const auto table = run_recursion(rc, MomentEvaluator(kKernel));
  ASSERT_NE(table.find(2, 2), nullptr);
  ASSERT_NE(table.find(2, 1), nullptr);
  ASSERT_NE(table.find(2, 0), nullptr);
  EXPECT_EQ(table.find(1, 0), nullptr);
  const std::size_t h1 = grid_points(LevelFamily(rc.base_step), rc.level, 1).points.size();
  EXPECT_EQ(table.solve_count, 2 + h1);
  EXPECT_EQ(table.projected_solves, table.solve_count);
  EXPECT_EQ(table.solve_count, 67u);
}

TEST(Recursion, ConstantCovarianceClosedForm) {
  // Y is one Gaussian variable times a constant mode: u = e^{-Y} u0, so
  // E[u^k] = E[(-Y)^k] u0.
  const double var = 0.09;
  const auto table = run_recursion(small_config(4, 3, 32), MomentEvaluator([var](double, double) { return var; }));
  const auto u0 = table.correction(0);
  const auto e2 = table.correction(2);
  const auto e4 = table.correction(4);
  std::vector<double> x2(u0.coefficients().begin(), u0.coefficients().end()), x4 = x2;
  for (auto& v : x2) v *= var;
  for (auto& v : x4) v *= 3.0 * var * var;
  EXPECT_LE(rel_diff(e2.coefficients(), x2), 1e-12);
  EXPECT_LE(rel_diff(e4.coefficients(), x4), 1e-12);
}

TEST(Recursion, SigmaHomogeneity) {
  CovarianceKernel doubled = kKernel;
  doubled.sigma *= 2.0;
  const auto a = run_recursion(small_config(4), MomentEvaluator(kKernel));
  const auto b = run_recursion(small_config(4), MomentEvaluator(doubled));
  for (const auto& [key, corr] : a.entries) {
    const auto& other = b.entries.at(key);
    const double scale = std::pow(2.0, key.first);
    std::vector<double> lhs, rhs;
    if (corr.arity == 0) {
      const auto x = corr.function(), y = other.function();
      lhs.assign(x.coefficients().begin(), x.coefficients().end());
      rhs.assign(y.coefficients().begin(), y.coefficients().end());
    } else {
      lhs.assign(corr.values->nodal_values().begin(), corr.values->nodal_values().end());
      rhs.assign(other.values->nodal_values().begin(), other.values->nodal_values().end());
    }
    for (auto& v : lhs) v *= scale;
    EXPECT_LE(rel_diff(rhs, lhs), 1e-10) << "k=" << key.first << " i=" << key.second;
  }
}

TEST(Recursion, OddCorrectionsVanish) {
  auto rc = small_config(3);
  const auto flagged = run_recursion(rc, MomentEvaluator(kKernel));
  for (unsigned k : {1u, 3u}) {
    const auto value = flagged.correction(k);
    for (double v : value.coefficients()) EXPECT_EQ(v, 0.0);
  }
  rc.compute_odd_diagonals = true;
  const auto computed = run_recursion(rc, MomentEvaluator(kKernel));
  EXPECT_GT(computed.solve_count, flagged.solve_count);
  for (unsigned k : {1u, 3u}) {
    const auto value = computed.correction(k);
    for (double v : value.coefficients()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Recursion, PermutationSymmetry) {
  const auto table = run_recursion(small_config(4), MomentEvaluator(kKernel));
  for (unsigned i : {2u, 3u}) {
    const Correlation* corr = table.find(4, i);
    ASSERT_NE(corr, nullptr);
    const auto& grid = corr->values->grid();
    for (std::size_t id = 0; id < grid.node_count(); id += 7) {
      std::vector<double> y(grid.node(id).begin(), grid.node(id).end());
      const auto base = corr->at(y);
      std::reverse(y.begin(), y.end());
      const auto swapped = corr->at(y);
      for (std::size_t d = 0; d < base.coefficients().size(); ++d) {
        EXPECT_NEAR(base.coefficients()[d], swapped.coefficients()[d], 1e-10);
      }
    }
  }
}

TEST(Recursion, DirichletTraceOfPayloads) {
  const auto table = run_recursion(small_config(2), MomentEvaluator(kKernel));
  for (const auto& [key, corr] : table.entries) {
    if (corr.arity == 0 || corr.zero) continue;
    const std::size_t dofs = corr.values->payload_size();
    for (std::size_t id = 0; id < corr.values->grid().node_count(); ++id) {
      const auto p = corr.values->node_payload(id);
      EXPECT_EQ(p[0], 0.0);
      EXPECT_EQ(p[dofs - 1], 0.0);
    }
  }
}

TEST(Recursion, ThreadCountIndependent) {
  auto rc = small_config(4, 3);
  const auto a = run_recursion(rc, MomentEvaluator(kKernel));
  rc.threads = 3;
  const auto b = run_recursion(rc, MomentEvaluator(kKernel));
  for (unsigned k : {2u, 4u}) {
    const auto x = a.correction(k), y = b.correction(k);
    EXPECT_TRUE(std::equal(x.coefficients().begin(), x.coefficients().end(), y.coefficients().begin()));
  }
}

TEST(Recursion, SolveCap) {
  auto rc = small_config(4, 3);
  rc.max_solves = 10;
  EXPECT_THROW(run_recursion(rc, MomentEvaluator(kKernel)), CapacityError);
  rc = small_config(4, 3);
  EXPECT_THROW(run_recursion(rc, MomentEvaluator(kKernel, 2)), CapacityError);
}

TEST(TaylorMeanTest, DegenerateCases) {
  const auto zero_field = run_recursion(small_config(4), MomentEvaluator(CovarianceKernel{KernelKind::Exponential, 0.0, 0.5}));
  const auto u0 = zero_field.correction(0);
  const auto mean = taylor_mean(zero_field, 4);
  EXPECT_LE(rel_diff(mean.mean.coefficients(), u0.coefficients()), 0.0);
  ASSERT_EQ(mean.l2_norms.size(), 5u);
  for (unsigned k = 1; k <= 4; ++k) EXPECT_EQ(mean.l2_norms[k], 0.0);
  const auto table = run_recursion(small_config(2), MomentEvaluator(kKernel));
  EXPECT_THROW(taylor_mean(table, 4), InvalidArgument);
  const auto second = taylor_mean(table, 2).mean;
  for (std::size_t d = 0; d < second.coefficients().size(); ++d) {
    EXPECT_NEAR(second.coefficients()[d],
                table.correction(0).coefficients()[d] + 0.5 * table.correction(2).coefficients()[d], 1e-16);
  }
}

}  // namespace
}  // namespace momeq
