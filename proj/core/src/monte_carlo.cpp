#include "momeq/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "momeq/errors.hpp"
#include "momeq/parallel.hpp"

namespace momeq {

namespace {

struct Accumulator {
  double count = 0.0;
  std::vector<double> mean;
  std::vector<double> m2;
  std::size_t skipped = 0;

  explicit Accumulator(std::size_t size = 0) : mean(size, 0.0), m2(size, 0.0) {}

  void add(std::span<const double> x) {
    count += 1.0;
    for (std::size_t c = 0; c < mean.size(); ++c) {
      const double delta = x[c] - mean[c];
      mean[c] += delta / count;
      m2[c] += delta * (x[c] - mean[c]);
    }
  }
};

Accumulator merge(const Accumulator& a, const Accumulator& b) {
  if (a.count == 0.0) {
    Accumulator r = b;
    r.skipped += a.skipped;
    return r;
  }
  if (b.count == 0.0) {
    Accumulator r = a;
    r.skipped += b.skipped;
    return r;
  }
  Accumulator r(a.mean.size());
  r.count = a.count + b.count;
  r.skipped = a.skipped + b.skipped;
  for (std::size_t c = 0; c < r.mean.size(); ++c) {
    const double delta = b.mean[c] - a.mean[c];
    r.mean[c] = a.mean[c] + delta * (b.count / r.count);
    r.m2[c] = a.m2[c] + b.m2[c] + delta * delta * (a.count * b.count / r.count);
  }
  return r;
}

double binomial(unsigned n, unsigned k) {
  double b = 1.0;
  for (unsigned j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

}  // namespace

McEstimate mc_expectation(std::shared_ptr<const FeSpace> space, const CovarianceKernel& kernel,
                          const McConfig& config, const SampleObservable& observable) {
  if (!space) throw InvalidArgument("mc_expectation: null space");
  if (config.samples < 2) throw InvalidArgument("Monte Carlo needs at least 2 samples");
  if (config.block_size == 0) throw InvalidArgument("Monte Carlo block size must be positive");

  const auto dofs = space->dof_coordinates();
  const GaussianSampler base(kernel, std::vector<double>(dofs.begin(), dofs.end()), config.jitter,
                             config.seed);
  const std::size_t size = space->dof_count();
  const std::size_t blocks = (config.samples + config.block_size - 1) / config.block_size;

  std::vector<Accumulator> partial(blocks);
  parallel_for(blocks, config.threads, [&](std::size_t b) {
    GaussianSampler sampler = base.fork(b);
    Accumulator acc(size);
    const std::size_t first = b * config.block_size;
    const std::size_t count = std::min(config.block_size, config.samples - first);
    std::vector<double> y(sampler.size());
    std::vector<double> mirrored(y.size());
    std::vector<double> obs(size);
    std::vector<double> obs_mirror(size);
    for (std::size_t s = 0; s < count; ++s) {
      sampler.sample_into(y);
      try {
        observable(y, obs);
        if (config.antithetic) {
          for (std::size_t c = 0; c < y.size(); ++c) mirrored[c] = -y[c];
          observable(mirrored, obs_mirror);
          for (std::size_t c = 0; c < size; ++c) obs[c] = 0.5 * (obs[c] + obs_mirror[c]);
        }
      } catch (const NumericalError&) {
        ++acc.skipped;
        continue;
      }
      acc.add(obs);
    }
    partial[b] = std::move(acc);
  });

  while (partial.size() > 1) {
    std::vector<Accumulator> next;
    next.reserve((partial.size() + 1) / 2);
    for (std::size_t p = 0; p + 1 < partial.size(); p += 2) next.push_back(merge(partial[p], partial[p + 1]));
    if (partial.size() % 2 == 1) next.push_back(std::move(partial.back()));
    partial = std::move(next);
  }
  Accumulator& total = partial.front();

  if (static_cast<double>(total.skipped) > 0.01 * static_cast<double>(config.samples)) {
    throw NumericalError("Monte Carlo skipped " + std::to_string(total.skipped) + " of " +
                         std::to_string(config.samples) + " draws");
  }
  if (total.count < 2.0) throw NumericalError("Monte Carlo accepted fewer than 2 draws");

  McEstimate est{FeFunction(space, total.mean), std::vector<double>(size), 0, config.seed,
                 total.skipped};
  est.samples = static_cast<std::size_t>(total.count);
  for (std::size_t c = 0; c < size; ++c) {
    est.standard_error[c] = std::sqrt(std::max(total.m2[c], 0.0) / (total.count - 1.0) / total.count);
  }
  return est;
}

FeFunction solve_sample(std::shared_ptr<const FeSpace> space, std::span<const double> y_nodal,
                        std::span<const double> load) {
  auto coefficient = values_at_quadrature(*space, y_nodal);
  for (double& a : coefficient) {
    a = std::exp(a);
    if (!std::isfinite(a)) throw NumericalError("diffusion coefficient overflow");
  }
  const auto op = assemble_diffusion(std::move(space), coefficient);
  return op.solve(load);
}

McEstimate mc_mean(std::shared_ptr<const FeSpace> space, const ScalarFunction& source,
                   const CovarianceKernel& kernel, const McConfig& config) {
  const auto load = assemble_source_load(*space, source);
  return mc_expectation(space, kernel, config,
                        [&](std::span<const double> y, std::span<double> out) {
                          const auto u = solve_sample(space, y, load);
                          const auto c = u.coefficients();
                          std::copy(c.begin(), c.end(), out.begin());
                        });
}

std::vector<FeFunction> per_sample_corrections(std::span<const double> y_nodal, unsigned order,
                                               const FactorizedLaplacian& op, const FeFunction& u0) {
  const FeSpace& space = op.space();
  if (y_nodal.size() != space.dof_count()) {
    throw InvalidArgument("per_sample_corrections: one field value per dof expected");
  }
  const auto yq = values_at_quadrature(space, y_nodal);
  const std::size_t nqp = yq.size();

  std::vector<FeFunction> terms;
  terms.reserve(order + 1);
  terms.push_back(u0);
  std::vector<std::vector<double>> gradients{gradients_at_quadrature(space, u0.coefficients())};
  std::vector<double> flux(nqp);
  for (unsigned k = 1; k <= order; ++k) {
    std::fill(flux.begin(), flux.end(), 0.0);
    for (unsigned j = 1; j <= k; ++j) {
      const double scale = -binomial(k, j);
      const auto& g = gradients[k - j];
      for (std::size_t q = 0; q < nqp; ++q) {
        double power = 1.0;
        for (unsigned p = 0; p < j; ++p) power *= yq[q];
        flux[q] += scale * power * g[q];
      }
    }
    terms.push_back(op.solve(assemble_flux_load(space, flux)));
    gradients.push_back(gradients_at_quadrature(space, terms.back().coefficients()));
  }
  return terms;
}

McEstimate mc_corrections_mean(const FactorizedLaplacian& op, const FeFunction& u0,
                               const CovarianceKernel& kernel, unsigned k, const McConfig& config) {
  return mc_expectation(op.space_ptr(), kernel, config,
                        [&](std::span<const double> y, std::span<double> out) {
                          const auto terms = per_sample_corrections(y, k, op, u0);
                          const auto c = terms[k].coefficients();
                          std::copy(c.begin(), c.end(), out.begin());
                        });
}

}  // namespace momeq
