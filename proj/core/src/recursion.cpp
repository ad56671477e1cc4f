#include "momeq/recursion.hpp"

#include <cmath>
#include <string>

#include "momeq/errors.hpp"
#include "momeq/parallel.hpp"

namespace momeq {

namespace {

double binomial(unsigned n, unsigned k) {
  double b = 1.0;
  for (unsigned j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned j = 2; j <= n; ++j) f *= static_cast<double>(j);
  return f;
}

Correlation zero_correlation(unsigned order, unsigned arity, std::shared_ptr<const FeSpace> space) {
  Correlation c;
  c.derivative_order = order;
  c.arity = arity;
  c.zero = true;
  c.space = std::move(space);
  return c;
}

}  // namespace

FeFunction Correlation::at(std::span<const double> y) const {
  if (y.size() != arity) {
    throw InvalidArgument("Correlation: expected " + std::to_string(arity) + " coordinates");
  }
  if (zero) return FeFunction(space);
  return FeFunction(space, values->evaluate(y));
}

FeFunction Correlation::function() const {
  if (arity != 0) throw InvalidArgument("Correlation::function: arity must be 0");
  if (zero) return FeFunction(space);
  const auto payload = values->node_payload(0);
  return FeFunction(space, std::vector<double>(payload.begin(), payload.end()));
}

GridCache::GridCache(LevelFamily family, unsigned level, GridKind kind)
    : family_(family), level_(level), kind_(kind) {}

std::shared_ptr<const SparseGrid> GridCache::get(unsigned arity) const {
  std::lock_guard lock(mutex_);
  auto& slot = grids_[arity];
  if (!slot) slot = std::make_shared<const SparseGrid>(family_, level_, arity, kind_);
  return slot;
}

Correlation seed_correlation(const FeFunction& u0, const MomentEvaluator& moments, unsigned k,
                             std::shared_ptr<const SparseGrid> grid, unsigned threads,
                             bool materialize_zero) {
  if (k == 0) throw InvalidArgument("seed_correlation: k must be >= 1");
  if (!grid || grid->dimension() != k) {
    throw InvalidArgument("seed_correlation: grid dimension must equal k");
  }
  if (k % 2 == 1 && !materialize_zero) return zero_correlation(0, k, u0.space_ptr());

  const auto base = u0.coefficients();
  auto values = smolyak_build(
      grid, base.size(),
      [&](std::span<const double> y, std::span<double> out) {
        const double m = k % 2 == 1 ? 0.0 : moments(y);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = m * base[c];
      },
      threads);

  Correlation c;
  c.derivative_order = 0;
  c.arity = k;
  c.space = u0.space_ptr();
  c.values = std::make_shared<const SparseInterpolant>(std::move(values));
  return c;
}

std::vector<double> trace_gradient(const Correlation& corr, unsigned j,
                                   std::span<const double> y_fixed, const FeSpace& space) {
  if (j == 0) throw InvalidArgument("trace_rhs: contraction count must be >= 1");
  if (corr.arity != j + y_fixed.size()) {
    throw InvalidArgument("trace_rhs: correlation arity " + std::to_string(corr.arity) +
                          " does not match j = " + std::to_string(j) + " plus " +
                          std::to_string(y_fixed.size()) + " fixed arguments");
  }
  std::vector<double> grad(space.quadrature_point_count(), 0.0);
  if (corr.zero) return grad;
  if (corr.space->dof_count() != space.dof_count()) {
    throw InvalidArgument("trace_rhs: correlation lives on a different space");
  }

  const auto& interp = *corr.values;
  const SparseGrid& grid = interp.grid();
  const std::size_t stride = interp.payload_size();
  const auto payload = interp.nodal_values();
  const std::size_t nq = space.points_per_element();
  const std::size_t nloc = space.dofs_per_element();
  const auto xq = space.qp_coordinates();

  std::vector<double> point(corr.arity);
  std::copy(y_fixed.begin(), y_fixed.end(), point.begin() + j);
  std::vector<NodeWeight> weights;

  for (std::size_t e = 0; e < space.mesh().element_count(); ++e) {
    const std::size_t first_dof = space.element_dof(e, 0);
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t g = e * nq + q;
      std::fill(point.begin(), point.begin() + j, xq[g]);
      weights.clear();
      grid.collect_weights(point, weights);
      double value = 0.0;
      for (std::size_t a = 0; a < nloc; ++a) {
        double coeff = 0.0;
        for (const auto& nw : weights) coeff += nw.weight * payload[nw.node * stride + first_dof + a];
        value += coeff * space.qp_shape_gradient(e, q, a);
      }
      grad[g] = value;
    }
  }
  return grad;
}

std::vector<double> trace_rhs(const Correlation& corr, unsigned j, std::span<const double> y_fixed,
                              const FeSpace& space) {
  return assemble_flux_load(space, trace_gradient(corr, j, y_fixed, space));
}

Correlation solve_correlation(unsigned k, unsigned i, const LowerCorrelations& lower,
                              const FactorizedLaplacian& op,
                              std::shared_ptr<const SparseGrid> grid, unsigned threads,
                              std::size_t* solve_counter) {
  if (i >= k) throw InvalidArgument("solve_correlation: need i < k");
  if (!grid || grid->dimension() != i) {
    throw InvalidArgument("solve_correlation: grid dimension must equal i");
  }
  const unsigned order = k - i;
  std::vector<std::pair<double, const Correlation*>> terms;
  for (unsigned j = 1; j <= order; ++j) {
    const auto it = lower.find(j);
    if (it == lower.end() || it->second == nullptr) {
      throw InvalidArgument("solve_correlation: missing lower correlation for j = " +
                            std::to_string(j));
    }
    const Correlation& c = *it->second;
    if (c.derivative_order != order - j || c.arity != i + j) {
      throw InvalidArgument("solve_correlation: lower correlation for j = " + std::to_string(j) +
                            " has the wrong order");
    }
    if (!c.zero) terms.emplace_back(-binomial(order, j), &c);
  }

  const auto& space = op.space();
  if (terms.empty()) return zero_correlation(order, i, op.space_ptr());

  const std::size_t ndof = space.dof_count();
  const std::size_t nqp = space.quadrature_point_count();
  std::vector<double> values(grid->node_count() * ndof);
  parallel_for(grid->node_count(), threads, [&](std::size_t id) {
    const auto y = grid->node(id);
    std::vector<double> flux(nqp, 0.0);
    for (const auto& [scale, corr] : terms) {
      const unsigned j = corr->arity - i;
      const auto g = trace_gradient(*corr, j, y, space);
      for (std::size_t q = 0; q < nqp; ++q) flux[q] += scale * g[q];
    }
    const auto solution = op.solve(assemble_flux_load(space, flux));
    const auto coeffs = solution.coefficients();
    std::copy(coeffs.begin(), coeffs.end(), values.begin() + static_cast<std::ptrdiff_t>(id * ndof));
  });
  if (solve_counter) *solve_counter += grid->node_count();

  Correlation c;
  c.derivative_order = order;
  c.arity = i;
  c.space = op.space_ptr();
  c.values = std::make_shared<const SparseInterpolant>(std::move(grid), ndof, std::move(values));
  return c;
}

const Correlation* CorrectionTable::find(unsigned k, unsigned i) const {
  const auto it = entries.find({k, i});
  return it == entries.end() ? nullptr : &it->second;
}

FeFunction CorrectionTable::correction(unsigned k) const {
  if (k > order) {
    throw InvalidArgument("correction order " + std::to_string(k) + " exceeds table order " +
                          std::to_string(order));
  }
  if (const Correlation* c = find(k, 0)) return c->function();
  if (k % 2 == 1) return FeFunction(space);
  throw InvalidArgument("correction order " + std::to_string(k) + " missing from table");
}

std::size_t projected_solve_count(const GridCache& grids, unsigned order,
                                  bool compute_odd_diagonals) {
  std::size_t total = 1;
  for (unsigned k = 1; k <= order; ++k) {
    if (k % 2 == 1 && !compute_odd_diagonals) continue;
    for (unsigned i = 0; i < k; ++i) total += grids.get(i)->node_count();
  }
  return total;
}

CorrectionTable run_recursion(const RecursionConfig& config, const MomentEvaluator& moments) {
  if (config.elements < 2) throw InvalidArgument("run_recursion: need at least 2 elements");
  auto space = make_space(config.elements, config.degree, config.quadrature_refinement);
  const auto op = assemble_laplacian(space);
  return run_recursion(config, moments, op);
}

CorrectionTable run_recursion(const RecursionConfig& config, const MomentEvaluator& moments,
                              const FactorizedLaplacian& op) {
  if (!config.source) throw InvalidArgument("run_recursion: source function missing");
  const GridCache grids(LevelFamily(config.base_step), config.level, config.grid);

  CorrectionTable table;
  table.order = config.order;
  table.level = config.level;
  table.base_step = grids.family().base_step();
  table.grid = config.grid;
  if (const auto* kernel = moments.kernel()) table.kernel = *kernel;
  table.space = op.space_ptr();

  table.projected_solves = projected_solve_count(grids, config.order, config.compute_odd_diagonals);
  if (table.projected_solves > config.max_solves) {
    throw CapacityError("recursion needs " + std::to_string(table.projected_solves) +
                        " solves, cap is " + std::to_string(config.max_solves));
  }
  const std::size_t ndof = table.space->dof_count();
  for (unsigned k = 1; k <= config.order; ++k) {
    if (k % 2 == 1 && !config.compute_odd_diagonals) continue;
    if (grids.get(k)->node_count() * ndof > config.max_payload_values) {
      throw CapacityError("correlation of arity " + std::to_string(k) + " needs " +
                          std::to_string(grids.get(k)->node_count() * ndof) +
                          " stored values, cap is " + std::to_string(config.max_payload_values));
    }
  }

  const auto u0 = op.solve(assemble_source_load(*table.space, config.source));
  table.solve_count = 1;
  {
    Correlation c;
    c.space = table.space;
    const auto coeffs = u0.coefficients();
    c.values = std::make_shared<const SparseInterpolant>(
        grids.get(0), ndof, std::vector<double>(coeffs.begin(), coeffs.end()));
    table.entries.emplace(CorrelationKey{0, 0}, std::move(c));
  }

  for (unsigned k = 1; k <= config.order; ++k) {
    if (k % 2 == 1 && !config.compute_odd_diagonals) continue;
    table.entries.emplace(CorrelationKey{k, k},
                          seed_correlation(u0, moments, k, grids.get(k), config.threads,
                                           config.compute_odd_diagonals));
    for (unsigned i = k; i-- > 0;) {
      LowerCorrelations lower;
      for (unsigned j = 1; j <= k - i; ++j) lower[j] = &table.entries.at({k, i + j});
      table.entries.emplace(CorrelationKey{k, i},
                            solve_correlation(k, i, lower, op, grids.get(i), config.threads,
                                              &table.solve_count));
    }
  }
  return table;
}

TaylorMean taylor_mean(const CorrectionTable& table, unsigned order) {
  if (order > table.order) {
    throw InvalidArgument("taylor_mean: order " + std::to_string(order) + " exceeds table order " +
                          std::to_string(table.order));
  }
  TaylorMean result{FeFunction(table.space), {}, {}};
  for (unsigned k = 0; k <= order; ++k) {
    FeFunction term = table.correction(k);
    result.l2_norms.push_back(fe_norm(term, NormKind::Lp, 2.0));
    result.h1_seminorms.push_back(fe_norm(term, NormKind::W1pSeminorm, 2.0));
    if (k % 2 == 1) continue;
    term *= 1.0 / factorial(k);
    result.mean += term;
  }
  return result;
}

}  // namespace momeq
