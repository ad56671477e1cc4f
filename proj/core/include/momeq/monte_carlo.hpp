#pragma once

// Monte Carlo oracles for the lognormal Darcy problem.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "momeq/fem.hpp"
#include "momeq/gaussian.hpp"

namespace momeq {

struct McConfig {
  std::size_t samples = 10'000;  // independent Gaussian draws
  std::uint64_t seed = 20240601;
  bool antithetic = true;  // average each draw Y with its mirror -Y
  unsigned threads = 1;
  double jitter = 1e-10;
  std::size_t block_size = 64;  // draws per random stream
};

struct McEstimate {
  FeFunction mean;
  std::vector<double> standard_error;  // per dof
  std::size_t samples = 0;             // accepted draws
  std::uint64_t seed = 0;
  std::size_t skipped = 0;
};

/// Maps a nodal field sample (one value per dof) to an observation of
/// fixed size. Called concurrently; must be reentrant. Throwing
/// NumericalError marks the draw as skipped.
using SampleObservable = std::function<void(std::span<const double> y_nodal, std::span<double> out)>;

/// Mean and standard error of an observable of Y sampled at the dofs of
/// `space`.
///
/// Draws are grouped in blocks; block b uses the stream derive_seed(seed, b)
/// and the per-block Welford statistics are merged by a pairwise tree in
/// block order, so the result does not depend on the thread count. With
/// antithetic sampling the observation of a draw is (g(Y) + g(-Y)) / 2.
/// More than 1% skipped draws throws NumericalError.
McEstimate mc_expectation(std::shared_ptr<const FeSpace> space, const CovarianceKernel& kernel,
                          const McConfig& config, const SampleObservable& observable);

/// u(Y) for -(e^Y u')' = f with Y interpolated from nodal values.
FeFunction solve_sample(std::shared_ptr<const FeSpace> space, std::span<const double> y_nodal,
                        std::span<const double> load);

/// E[u] by sampling the lognormal problem directly.
McEstimate mc_mean(std::shared_ptr<const FeSpace> space, const ScalarFunction& source,
                   const CovarianceKernel& kernel, const McConfig& config);

/// Taylor terms u^k(Y), k = 0..K, of a single sample:
///   int grad u^k . grad v = - sum_{j=1}^k binom(k,j) int Y^j grad u^{k-j} . grad v
/// with Y evaluated at quadrature points by FE interpolation.
std::vector<FeFunction> per_sample_corrections(std::span<const double> y_nodal, unsigned order,
                                               const FactorizedLaplacian& op, const FeFunction& u0);

/// Monte Carlo estimate of E[u^k].
McEstimate mc_corrections_mean(const FactorizedLaplacian& op, const FeFunction& u0,
                               const CovarianceKernel& kernel, unsigned k, const McConfig& config);

}  // namespace momeq
