#include "momeq/sparse_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "momeq/errors.hpp"
#include "momeq/parallel.hpp"

namespace momeq {

LevelFamily::LevelFamily(double base_step) {
  if (!(base_step > 0.0 && base_step <= 1.0)) {
    throw InvalidArgument("LevelFamily: base step must be in (0, 1]");
  }
  const double inverse = 1.0 / base_step;
  const double rounded = std::round(inverse);
  if (std::abs(inverse - rounded) > 1e-9 * rounded) {
    throw InvalidArgument("LevelFamily: 1/base_step must be an integer");
  }
  base_intervals_ = static_cast<std::size_t>(rounded);
}

std::vector<double> level_nodes(const LevelFamily& family, unsigned level) {
  std::vector<double> nodes(family.node_count(level));
  for (std::size_t j = 0; j < nodes.size(); ++j) nodes[j] = family.node(level, j);
  return nodes;
}

namespace {

// Left node index and weight of the right node for y in [0,1] at a level
// with n intervals.
inline std::pair<std::size_t, double> bracket(double y, std::size_t n) {
  const double t = y * static_cast<double>(n);
  double left = std::floor(t);
  if (left >= static_cast<double>(n)) left = static_cast<double>(n - 1);
  if (left < 0.0) left = 0.0;
  return {static_cast<std::size_t>(left), t - left};
}

void check_unit(double y) {
  if (!(y >= 0.0 && y <= 1.0)) {
    throw InvalidArgument("interpolation point " + std::to_string(y) + " outside [0,1]");
  }
}

long binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  long b = 1;
  for (unsigned j = 1; j <= k; ++j) b = b * static_cast<long>(n - k + j) / static_cast<long>(j);
  return b;
}

void enumerate_indices(unsigned dimension, unsigned min_sum, unsigned max_sum,
                       std::vector<MultiIndex>& out) {
  MultiIndex current(dimension, 0);
  // depth-first over the leading components, lexicographic order
  auto recurse = [&](auto&& self, unsigned pos, unsigned used) -> void {
    if (pos == dimension) {
      if (used >= min_sum) out.push_back(current);
      return;
    }
    for (unsigned l = 0; used + l <= max_sum; ++l) {
      current[pos] = l;
      self(self, pos + 1, used + l);
    }
    current[pos] = 0;
  };
  recurse(recurse, 0, 0);
}

}  // namespace

PiecewiseLinearInterpolant::PiecewiseLinearInterpolant(LevelFamily family, unsigned level,
                                                       std::vector<double> values)
    : family_(family), level_(level), values_(std::move(values)) {
  if (values_.size() != family_.node_count(level_)) {
    throw InvalidArgument("interp_1d: expected " + std::to_string(family_.node_count(level_)) +
                          " values, got " + std::to_string(values_.size()));
  }
}

double PiecewiseLinearInterpolant::operator()(double y) const {
  check_unit(y);
  const auto [j, w] = bracket(y, family_.intervals(level_));
  if (w == 0.0) return values_[j];
  return (1.0 - w) * values_[j] + w * values_[j + 1];
}

PiecewiseLinearInterpolant interp_1d(const LevelFamily& family, unsigned level,
                                     std::vector<double> values) {
  return PiecewiseLinearInterpolant(family, level, std::move(values));
}

std::vector<MultiIndex> admissible_indices(unsigned level, unsigned dimension) {
  std::vector<MultiIndex> out;
  enumerate_indices(dimension, 0, level, out);
  return out;
}

SparseGrid::SparseGrid(const LevelFamily& family, unsigned level, unsigned dimension, GridKind kind)
    : family_(family), level_(level), dimension_(dimension), kind_(kind) {
  if (level > 24) throw CapacityError("SparseGrid: level " + std::to_string(level) + " too large");

  if (kind == GridKind::FullTensor) {
    terms_.push_back({MultiIndex(dimension, level), 1, {}});
  } else if (dimension == 0) {
    terms_.push_back({MultiIndex{}, 1, {}});
  } else {
    const unsigned min_sum = level + 1 >= dimension ? level + 1 - dimension : 0;
    std::vector<MultiIndex> indices;
    enumerate_indices(dimension, min_sum, level, indices);
    for (auto& l : indices) {
      unsigned sum = 0;
      for (unsigned v : l) sum += v;
      const unsigned gap = level - sum;
      const long c = binomial(dimension - 1, gap) * (gap % 2 == 0 ? 1 : -1);
      if (c != 0) terms_.push_back({std::move(l), static_cast<int>(c), {}});
    }
  }

  const std::size_t fine = family_.intervals(level_);
  std::map<std::vector<std::uint32_t>, std::uint32_t> table;
  std::vector<std::vector<std::vector<std::uint32_t>>> term_keys(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& levels = terms_[t].levels;
    std::size_t count = 1;
    for (unsigned l : levels) {
      count *= family_.node_count(l);
      if (count > (1u << 26)) throw CapacityError("SparseGrid: tensor term too large");
    }
    auto& keys = term_keys[t];
    keys.reserve(count);
    std::vector<std::size_t> digit(dimension, 0);
    for (std::size_t p = 0; p < count; ++p) {
      std::vector<std::uint32_t> key(dimension);
      for (unsigned d = 0; d < dimension; ++d) {
        key[d] = static_cast<std::uint32_t>(digit[d] * (fine / family_.intervals(levels[d])));
      }
      table.emplace(key, 0);
      keys.push_back(std::move(key));
      // row-major increment, last direction fastest
      for (unsigned d = dimension; d-- > 0;) {
        if (++digit[d] < family_.node_count(levels[d])) break;
        digit[d] = 0;
      }
    }
  }

  node_count_ = table.size();
  if (node_count_ > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("SparseGrid: too many nodes");
  }
  coordinates_.reserve(node_count_ * dimension_);
  keys_.reserve(node_count_ * dimension_);
  std::uint32_t id = 0;
  for (auto& [key, slot] : table) {
    slot = id++;
    for (std::uint32_t v : key) {
      keys_.push_back(v);
      coordinates_.push_back(static_cast<double>(v) / static_cast<double>(fine));
    }
  }
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    auto& ids = terms_[t].node_ids;
    ids.reserve(term_keys[t].size());
    for (const auto& key : term_keys[t]) ids.push_back(table.at(key));
  }
}

void SparseGrid::collect_weights(std::span<const double> y, std::vector<NodeWeight>& out) const {
  if (y.size() != dimension_) {
    throw InvalidArgument("SparseGrid: point has " + std::to_string(y.size()) +
                          " coordinates, expected " + std::to_string(dimension_));
  }
  for (double v : y) check_unit(v);

  constexpr unsigned kMaxDim = 16;
  if (dimension_ > kMaxDim) throw CapacityError("SparseGrid: dimension too large");
  std::array<std::size_t, kMaxDim> left{};
  std::array<double, kMaxDim> right_weight{};
  std::array<std::size_t, kMaxDim> stride{};

  for (const auto& term : terms_) {
    std::size_t s = 1;
    for (unsigned d = dimension_; d-- > 0;) {
      const std::size_t n = family_.intervals(term.levels[d]);
      const auto [j, w] = bracket(y[d], n);
      left[d] = j;
      right_weight[d] = w;
      stride[d] = s;
      s *= n + 1;
    }
    const std::size_t corners = std::size_t{1} << dimension_;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      double weight = term.coefficient;
      std::size_t offset = 0;
      for (unsigned d = 0; d < dimension_; ++d) {
        const bool right = (mask >> d) & 1u;
        weight *= right ? right_weight[d] : 1.0 - right_weight[d];
        offset += (left[d] + (right ? 1 : 0)) * stride[d];
      }
      if (weight != 0.0) out.push_back({term.node_ids[offset], weight});
    }
  }
}

std::int64_t SparseGrid::find_node(std::span<const double> y) const {
  if (y.size() != dimension_) return -1;
  const double fine = static_cast<double>(family_.intervals(level_));
  std::vector<std::uint32_t> key(dimension_);
  for (unsigned d = 0; d < dimension_; ++d) {
    if (!(y[d] >= 0.0 && y[d] <= 1.0)) return -1;
    const double t = y[d] * fine;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) return -1;
    key[d] = static_cast<std::uint32_t>(r);
  }
  // keys_ is sorted lexicographically in blocks of dimension_
  std::size_t lo = 0;
  std::size_t hi = node_count_;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto cmp = std::lexicographical_compare_three_way(
        keys_.begin() + static_cast<std::ptrdiff_t>(mid * dimension_),
        keys_.begin() + static_cast<std::ptrdiff_t>((mid + 1) * dimension_), key.begin(), key.end());
    if (cmp == 0) return static_cast<std::int64_t>(mid);
    if (cmp < 0) lo = mid + 1; else hi = mid;
  }
  return -1;
}

GridPoints grid_points(const LevelFamily& family, unsigned level, unsigned dimension) {
  const SparseGrid grid(family, level, dimension);
  GridPoints result;
  result.points.reserve(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const auto p = grid.node(i);
    result.points.emplace_back(p.begin(), p.end());
  }
  result.indices = admissible_indices(level, dimension);
  return result;
}

SparseInterpolant::SparseInterpolant(std::shared_ptr<const SparseGrid> grid, std::size_t payload_size,
                                     std::vector<double> nodal_values)
    : grid_(std::move(grid)), payload_size_(payload_size), values_(std::move(nodal_values)) {
  if (!grid_) throw InvalidArgument("SparseInterpolant: null grid");
  if (values_.size() != grid_->node_count() * payload_size_) {
    throw InvalidArgument("SparseInterpolant: payload size inconsistent with node count");
  }
}

std::vector<double> SparseInterpolant::evaluate(std::span<const double> y) const {
  std::vector<NodeWeight> weights;
  grid_->collect_weights(y, weights);
  std::vector<double> out(payload_size_, 0.0);
  for (const auto& nw : weights) {
    const double* src = values_.data() + nw.node * payload_size_;
    for (std::size_t c = 0; c < payload_size_; ++c) out[c] += nw.weight * src[c];
  }
  return out;
}

double SparseInterpolant::evaluate_scalar(std::span<const double> y) const {
  if (payload_size_ != 1) throw InvalidArgument("SparseInterpolant: payload is not scalar");
  return evaluate(y)[0];
}

SparseInterpolant smolyak_build(std::shared_ptr<const SparseGrid> grid, std::size_t payload_size,
                                const PayloadTarget& target, unsigned threads) {
  if (!grid) throw InvalidArgument("smolyak_build: null grid");
  if (payload_size == 0) throw InvalidArgument("smolyak_build: payload size must be positive");
  std::vector<double> values(grid->node_count() * payload_size);
  parallel_for(grid->node_count(), threads, [&](std::size_t id) {
    target(grid->node(id), std::span<double>(values.data() + id * payload_size, payload_size));
  });
  return SparseInterpolant(std::move(grid), payload_size, std::move(values));
}

SparseInterpolant smolyak_build(const LevelFamily& family, unsigned level, unsigned dimension,
                                const std::function<double(std::span<const double>)>& target,
                                unsigned threads) {
  auto grid = std::make_shared<const SparseGrid>(family, level, dimension);
  return smolyak_build(
      std::move(grid), 1,
      [&](std::span<const double> y, std::span<double> out) { out[0] = target(y); }, threads);
}

std::vector<double> smolyak_eval(const SparseInterpolant& interpolant, std::span<const double> y) {
  return interpolant.evaluate(y);
}

}  // namespace momeq
