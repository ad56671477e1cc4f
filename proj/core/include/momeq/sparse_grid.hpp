#pragma once

// Nested dyadic piecewise-linear interpolation on [0,1] and the Smolyak
// sparse interpolation operator in combination-technique form.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace momeq {

/// Uniform dyadic node sets X_l on [0,1] with spacing h_l = h_0 / 2^l,
/// endpoints included, so X_{l-1} is a subset of X_l.
class LevelFamily {
 public:
  /// 1/base_step must be a positive integer.
  explicit LevelFamily(double base_step = 0.5);

  double base_step() const { return 1.0 / static_cast<double>(base_intervals_); }
  std::size_t base_intervals() const { return base_intervals_; }
  std::size_t intervals(unsigned level) const { return base_intervals_ << level; }
  std::size_t node_count(unsigned level) const { return intervals(level) + 1; }
  double step(unsigned level) const { return 1.0 / static_cast<double>(intervals(level)); }
  double node(unsigned level, std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(intervals(level));
  }

 private:
  std::size_t base_intervals_;
};

std::vector<double> level_nodes(const LevelFamily& family, unsigned level);

/// Continuous piecewise-linear interpolant through values at X_level.
class PiecewiseLinearInterpolant {
 public:
  PiecewiseLinearInterpolant(LevelFamily family, unsigned level, std::vector<double> values);
  double operator()(double y) const;
  unsigned level() const { return level_; }

 private:
  LevelFamily family_;
  unsigned level_;
  std::vector<double> values_;
};

PiecewiseLinearInterpolant interp_1d(const LevelFamily& family, unsigned level,
                                     std::vector<double> values);

using MultiIndex = std::vector<unsigned>;

/// One anisotropic full grid X_{l_1} x ... x X_{l_k} of the combination
/// technique. `node_ids` maps its row-major tensor points into the global
/// node table.
struct CombinationTerm {
  MultiIndex levels;
  int coefficient = 0;
  std::vector<std::uint32_t> node_ids;
};

struct NodeWeight {
  std::uint32_t node;
  double weight;
};

enum class GridKind { Sparse, FullTensor };

/// Node table and combination terms of S_{L,k}; payload-free so that one
/// grid can be shared by many interpolants.
///
/// Sparse: terms are the multi-indices with L-k+1 <= |l| <= L and
/// coefficient (-1)^(L-|l|) binom(k-1, L-|l|). FullTensor: the single term
/// (L,...,L). Nodes are deduplicated and sorted lexicographically. k = 0 is
/// allowed and has one node with no coordinates.
class SparseGrid {
 public:
  SparseGrid(const LevelFamily& family, unsigned level, unsigned dimension,
             GridKind kind = GridKind::Sparse);

  const LevelFamily& family() const { return family_; }
  unsigned level() const { return level_; }
  unsigned dimension() const { return dimension_; }
  GridKind kind() const { return kind_; }
  std::size_t node_count() const { return node_count_; }
  std::span<const double> node(std::size_t id) const {
    return {coordinates_.data() + id * dimension_, dimension_};
  }
  const std::vector<CombinationTerm>& terms() const { return terms_; }

  /// Appends the (node, weight) contributions of the combined interpolant
  /// at y: at most 2^k per term, zero weights skipped.
  void collect_weights(std::span<const double> y, std::vector<NodeWeight>& out) const;

  /// Node id of an exact grid point, or -1.
  std::int64_t find_node(std::span<const double> y) const;

 private:
  LevelFamily family_;
  unsigned level_;
  unsigned dimension_;
  GridKind kind_;
  std::size_t node_count_ = 0;
  std::vector<double> coordinates_;     // node-major
  std::vector<std::uint32_t> keys_;     // integer coordinates on the finest level
  std::vector<CombinationTerm> terms_;
};

/// Admissible multi-indices {l : |l| <= L} in lexicographic order.
std::vector<MultiIndex> admissible_indices(unsigned level, unsigned dimension);

struct GridPoints {
  std::vector<std::vector<double>> points;  // H_{L,k}, sorted
  std::vector<MultiIndex> indices;          // {|l| <= L}
};
GridPoints grid_points(const LevelFamily& family, unsigned level, unsigned dimension);

/// Fills `out` (payload_size values) with the target at y. Must be
/// reentrant when used with more than one thread.
using PayloadTarget = std::function<void(std::span<const double> y, std::span<double> out)>;

/// Smolyak interpolant with a vector payload of fixed size per node.
/// Immutable after construction; evaluation is reentrant.
class SparseInterpolant {
 public:
  SparseInterpolant(std::shared_ptr<const SparseGrid> grid, std::size_t payload_size,
                    std::vector<double> nodal_values);

  const SparseGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SparseGrid>& grid_ptr() const { return grid_; }
  std::size_t payload_size() const { return payload_size_; }
  std::span<const double> node_payload(std::size_t id) const {
    return {values_.data() + id * payload_size_, payload_size_};
  }
  std::span<const double> nodal_values() const { return values_; }

  std::vector<double> evaluate(std::span<const double> y) const;
  double evaluate_scalar(std::span<const double> y) const;

 private:
  std::shared_ptr<const SparseGrid> grid_;
  std::size_t payload_size_;
  std::vector<double> values_;
};

/// Evaluates the target once per distinct node of the grid.
SparseInterpolant smolyak_build(std::shared_ptr<const SparseGrid> grid, std::size_t payload_size,
                                const PayloadTarget& target, unsigned threads = 1);
SparseInterpolant smolyak_build(const LevelFamily& family, unsigned level, unsigned dimension,
                                const std::function<double(std::span<const double>)>& target,
                                unsigned threads = 1);

std::vector<double> smolyak_eval(const SparseInterpolant& interpolant, std::span<const double> y);

}  // namespace momeq
