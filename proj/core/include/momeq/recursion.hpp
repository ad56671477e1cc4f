#pragma once

// Recursive first-moment equations for the lognormal Darcy problem
// -div(e^Y grad u) = f, u = 0 on the boundary.
//
// C^{k-i,i} = E[u^{k-i} (x) Y^{(x)i}] solves, for every y in D^i,
//   int grad C^{k-i,i}(.,y) . grad v
//     = - sum_{j=1}^{k-i} binom(k-i,j) int Tr_j(grad C^{k-i-j,i+j})(x; y) . grad v
// where Tr_j collapses the first j auxiliary arguments onto x. The seed is
// C^{0,k} = u0 (x) E[Y^{(x)k}] and E[u^k] = C^{k,0}.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "momeq/fem.hpp"
#include "momeq/gaussian.hpp"
#include "momeq/sparse_grid.hpp"

namespace momeq {

/// Discrete correlation E[u^{order} (x) Y^{(x)arity}]: one FE coefficient
/// vector per node of the arity-dimensional grid (one node when arity = 0).
/// A zero correlation carries no values.
struct Correlation {
  unsigned derivative_order = 0;
  unsigned arity = 0;
  bool zero = false;
  std::shared_ptr<const FeSpace> space;
  std::shared_ptr<const SparseInterpolant> values;

  /// Interpolated FE function at y (arity coordinates).
  FeFunction at(std::span<const double> y) const;
  /// The single payload of an arity-0 correlation.
  FeFunction function() const;
};

/// Lazily built grids of every arity for one level family, level and kind.
/// Thread-safe.
class GridCache {
 public:
  GridCache(LevelFamily family, unsigned level, GridKind kind = GridKind::Sparse);

  std::shared_ptr<const SparseGrid> get(unsigned arity) const;
  const LevelFamily& family() const { return family_; }
  unsigned level() const { return level_; }
  GridKind kind() const { return kind_; }

 private:
  LevelFamily family_;
  unsigned level_;
  GridKind kind_;
  mutable std::mutex mutex_;
  mutable std::map<unsigned, std::shared_ptr<const SparseGrid>> grids_;
};

/// C^{0,k}: payload u0 * E[Y(y_1)...Y(y_k)] at every grid node. Odd k gives
/// a zero-flagged correlation unless `materialize_zero` is set, in which
/// case explicit zero payloads are stored.
Correlation seed_correlation(const FeFunction& u0, const MomentEvaluator& moments, unsigned k,
                             std::shared_ptr<const SparseGrid> grid, unsigned threads = 1,
                             bool materialize_zero = false);

/// x-gradient of the j-fold diagonal trace of `corr` at every quadrature
/// point: the interpolant is evaluated at (x_q, ..., x_q [j times], y_fixed)
/// and differentiated on the element of x_q. Requires corr.arity = j +
/// y_fixed.size() and j >= 1.
std::vector<double> trace_gradient(const Correlation& corr, unsigned j,
                                   std::span<const double> y_fixed, const FeSpace& space);

/// Load vector of v -> int Tr_j(grad corr)(x; y_fixed) v'(x) dx.
std::vector<double> trace_rhs(const Correlation& corr, unsigned j, std::span<const double> y_fixed,
                              const FeSpace& space);

/// Lower correlations keyed by contraction count j: lower.at(j) has order
/// (k-i-j, i+j).
using LowerCorrelations = std::map<unsigned, const Correlation*>;

/// C^{k-i,i}: one Laplace solve per node of `grid` (arity i). Zero-flagged
/// lower terms are skipped; if all are zero, the result is zero-flagged.
Correlation solve_correlation(unsigned k, unsigned i, const LowerCorrelations& lower,
                              const FactorizedLaplacian& op,
                              std::shared_ptr<const SparseGrid> grid, unsigned threads = 1,
                              std::size_t* solve_counter = nullptr);

struct RecursionConfig {
  std::size_t elements = 128;
  int degree = 1;
  unsigned level = 5;
  double base_step = 0.5;
  unsigned order = 2;  // K
  GridKind grid = GridKind::Sparse;
  std::size_t max_solves = 2'000'000;
  std::size_t max_payload_values = std::size_t{1} << 28;
  unsigned threads = 1;
  std::size_t quadrature_refinement = 1;
  ScalarFunction source = [](double) { return 1.0; };
  /// Run odd diagonals through the solver instead of flagging them zero.
  bool compute_odd_diagonals = false;
};

using CorrelationKey = std::pair<unsigned, unsigned>;  // (k, i)

/// Triangle of correlations (k, i), 0 <= i <= k <= K. Entry (0, 0) is u0.
struct CorrectionTable {
  unsigned order = 0;
  unsigned level = 0;
  double base_step = 0.5;
  GridKind grid = GridKind::Sparse;
  std::optional<CovarianceKernel> kernel;
  std::shared_ptr<const FeSpace> space;
  std::map<CorrelationKey, Correlation> entries;
  std::size_t solve_count = 0;
  std::size_t projected_solves = 0;

  const Correlation* find(unsigned k, unsigned i) const;
  /// E[u^k]; zero for an odd k that was flagged. Throws InvalidArgument when
  /// k exceeds the table.
  FeFunction correction(unsigned k) const;
  std::size_t elements() const { return space->mesh().element_count(); }
  int degree() const { return space->degree(); }
};

/// Laplace solves the recursion needs for orders up to K, excluding
/// flagged odd diagonals: 1 + sum over even k <= K of sum_{i<k} |grid_i|.
std::size_t projected_solve_count(const GridCache& grids, unsigned order,
                                  bool compute_odd_diagonals = false);

CorrectionTable run_recursion(const RecursionConfig& config, const MomentEvaluator& moments);

/// Same, reusing a factorized operator (its space defines the mesh and
/// degree; config.elements and config.degree are ignored).
CorrectionTable run_recursion(const RecursionConfig& config, const MomentEvaluator& moments,
                              const FactorizedLaplacian& op);

struct TaylorMean {
  FeFunction mean;
  std::vector<double> l2_norms;      // ||E[u^k]||_{L2}, k = 0..K
  std::vector<double> h1_seminorms;  // |E[u^k]|_{H1}
};

/// sum over even k <= K of E[u^k] / k!.
TaylorMean taylor_mean(const CorrectionTable& table, unsigned order);

}  // namespace momeq
