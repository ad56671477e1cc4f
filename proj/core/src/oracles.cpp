#include "momeq/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "momeq/errors.hpp"

namespace momeq {

namespace {

double hat(const LevelFamily& family, unsigned level, std::size_t i, double y) {
  const double t = y * static_cast<double>(family.intervals(level)) - static_cast<double>(i);
  return std::max(0.0, 1.0 - std::abs(t));
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("coefficient recursion overflows 64 bits");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw CapacityError("coefficient recursion overflows 64 bits");
  return r;
}

std::vector<std::uint64_t> binomial_row(unsigned n) {
  std::vector<std::uint64_t> row(n + 1, 0);
  row[0] = 1;
  for (unsigned r = 1; r <= n; ++r) {
    for (unsigned j = r; j > 0; --j) row[j] = checked_add(row[j], row[j - 1]);
  }
  return row;
}

bool integral(double v) {
  return v >= 0.0 && v <= 9007199254740992.0 && std::floor(v) == v;
}

bool integral(const CoefficientInputs& c) {
  return integral(c.c_s) && integral(c.c_tr) && integral(c.c_reg);
}

IntegerCoefficients to_integer(const CoefficientInputs& c) {
  return {static_cast<std::uint64_t>(c.c_s), static_cast<std::uint64_t>(c.c_tr),
          static_cast<std::uint64_t>(c.c_reg)};
}

double binomial_double(unsigned n, unsigned k) {
  double b = 1.0;
  for (unsigned j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

}  // namespace

FullTensorOracle::FullTensorOracle(const LevelFamily& family, unsigned level, unsigned dimension,
                                   ScalarTarget target)
    : family_(family), level_(level), dimension_(dimension), target_(std::move(target)) {
  if (dimension == 0) throw InvalidArgument("full_tensor_oracle: dimension must be >= 1");
  if (dimension > 3 || level > 4) {
    throw CapacityError("full_tensor_oracle: limited to k <= 3 and L <= 4");
  }
  if (!target_) throw InvalidArgument("full_tensor_oracle: empty target");
}

double FullTensorOracle::tensor(const MultiIndex& m, std::span<const double> y) const {
  if (m.size() != dimension_ || y.size() != dimension_) {
    throw InvalidArgument("full_tensor_oracle: dimension mismatch");
  }
  std::vector<std::size_t> index(dimension_, 0);
  std::vector<double> node(dimension_);
  double total = 0.0;
  for (;;) {
    double weight = 1.0;
    for (unsigned d = 0; d < dimension_; ++d) {
      weight *= hat(family_, m[d], index[d], y[d]);
      node[d] = family_.node(m[d], index[d]);
    }
    if (weight != 0.0) total += weight * target_(node);
    unsigned d = dimension_;
    while (d-- > 0) {
      if (++index[d] < family_.node_count(m[d])) break;
      index[d] = 0;
    }
    if (d == static_cast<unsigned>(-1)) break;
  }
  return total;
}

double FullTensorOracle::difference(const MultiIndex& l, std::span<const double> y) const {
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << dimension_); ++mask) {
    MultiIndex m(l);
    bool valid = true;
    int sign = 1;
    for (unsigned d = 0; d < dimension_; ++d) {
      if ((mask >> d) & 1u) {
        if (m[d] == 0) {
          valid = false;
          break;
        }
        --m[d];
        sign = -sign;
      }
    }
    if (valid) total += sign * tensor(m, y);
  }
  return total;
}

double FullTensorOracle::shell(unsigned shell, std::span<const double> y) const {
  double total = 0.0;
  for (const auto& l : admissible_indices(shell, dimension_)) {
    unsigned sum = 0;
    for (unsigned v : l) sum += v;
    if (sum == shell) total += difference(l, y);
  }
  return total;
}

double FullTensorOracle::operator()(std::span<const double> y) const {
  double total = 0.0;
  for (unsigned s = 0; s <= level_; ++s) total += shell(s, y);
  return total;
}

double FullTensorOracle::full_tensor(std::span<const double> y) const {
  return tensor(MultiIndex(dimension_, level_), y);
}

FullTensorOracle full_tensor_oracle(const LevelFamily& family, unsigned level, unsigned dimension,
                                    ScalarTarget target) {
  return FullTensorOracle(family, level, dimension, std::move(target));
}

TensorGridData tabulate(std::vector<std::vector<double>> axes, const ScalarTarget& f) {
  TensorGridData data{std::move(axes), {}};
  std::size_t count = 1;
  for (const auto& a : data.axes) count *= a.size();
  if (count == 0) return data;
  data.values.reserve(count);
  const std::size_t k = data.axes.size();
  std::vector<std::size_t> index(k, 0);
  std::vector<double> point(k);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t d = 0; d < k; ++d) point[d] = data.axes[d][index[d]];
    data.values.push_back(f(point));
    for (std::size_t d = k; d-- > 0;) {
      if (++index[d] < data.axes[d].size()) break;
      index[d] = 0;
    }
  }
  return data;
}

double mixed_holder_seminorm(const TensorGridData& data, double gamma) {
  const std::size_t k = data.dimension();
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("mixed_holder_seminorm: gamma must be in (0,1]");
  if (k == 0) throw InvalidArgument("mixed_holder_seminorm: empty grid");
  if (k > 3) throw CapacityError("mixed_holder_seminorm: limited to k <= 3");
  std::size_t count = 1;
  std::vector<std::size_t> stride(k, 1);
  for (std::size_t d = k; d-- > 0;) {
    const auto& a = data.axes[d];
    if (a.size() < 2) throw InvalidArgument("mixed_holder_seminorm: need >= 2 points per direction");
    if (a.size() > 33) throw CapacityError("mixed_holder_seminorm: limited to 33 points per direction");
    if (!std::is_sorted(a.begin(), a.end()) || std::adjacent_find(a.begin(), a.end()) != a.end()) {
      throw InvalidArgument("mixed_holder_seminorm: axes must be strictly increasing");
    }
    stride[d] = count;
    count *= a.size();
  }
  if (data.values.size() != count) throw InvalidArgument("mixed_holder_seminorm: value count mismatch");

  double best = 0.0;
  std::vector<std::size_t> lo(k), hi(k);
  for (unsigned set = 1; set < (1u << k); ++set) {
    // odometer over (lo, hi) pairs in directions of `set`, single indices elsewhere
    std::fill(lo.begin(), lo.end(), 0);
    for (std::size_t d = 0; d < k; ++d) hi[d] = ((set >> d) & 1u) ? 1 : 0;
    for (;;) {
      double diff = 0.0;
      for (unsigned sub = set;; sub = (sub - 1) & set) {
        std::size_t offset = 0;
        for (std::size_t d = 0; d < k; ++d) {
          const bool in_set = (set >> d) & 1u;
          offset += (in_set && ((sub >> d) & 1u) ? hi[d] : lo[d]) * stride[d];
        }
        const int parity = std::popcount(set ^ sub) % 2;
        diff += parity ? -data.values[offset] : data.values[offset];
        if (sub == 0) break;
      }
      double denom = 1.0;
      for (std::size_t d = 0; d < k; ++d) {
        if ((set >> d) & 1u) denom *= std::pow(data.axes[d][hi[d]] - data.axes[d][lo[d]], gamma);
      }
      best = std::max(best, std::abs(diff) / denom);

      std::size_t d = k;
      while (d-- > 0) {
        const std::size_t n = data.axes[d].size();
        if ((set >> d) & 1u) {
          if (++hi[d] < n) break;
          if (++lo[d] + 1 < n) {
            hi[d] = lo[d] + 1;
            break;
          }
          lo[d] = 0;
          hi[d] = 1;
        } else {
          if (++lo[d] < n) break;
          lo[d] = 0;
        }
      }
      if (d == static_cast<std::size_t>(-1)) break;
    }
  }
  return best;
}

double mixed_holder_norm(const TensorGridData& data, double gamma) {
  double sup = 0.0;
  for (double v : data.values) sup = std::max(sup, std::abs(v));
  return std::max(sup, mixed_holder_seminorm(data, gamma));
}

std::uint64_t theta_coeff_exact(unsigned n, unsigned m, const IntegerCoefficients& c) {
  if (n < m) return 0;
  std::vector<std::uint64_t> theta(n + 1, 0);
  theta[m] = 1;
  for (unsigned p = m + 1; p <= n; ++p) {
    const auto binom = binomial_row(p);
    std::uint64_t sum = 0;
    std::uint64_t power = 1;
    for (unsigned j = 1; j <= p - m; ++j) {
      power = checked_mul(power, c.c_tr);
      sum = checked_add(sum, checked_mul(checked_mul(binom[j], power), theta[p - j]));
    }
    theta[p] = checked_mul(c.c_s, sum);
  }
  return theta[n];
}

std::vector<std::uint64_t> lambda_coeffs_exact(unsigned kmax, const IntegerCoefficients& c) {
  std::vector<std::uint64_t> lambda(kmax + 1, 0);
  lambda[0] = 1;
  for (unsigned n = 1; n <= kmax; ++n) {
    const auto binom = binomial_row(n);
    std::uint64_t sum = 0;
    std::uint64_t power = 1;
    for (unsigned j = 1; j <= n; ++j) {
      power = checked_mul(power, c.c_tr);
      sum = checked_add(sum, checked_mul(checked_mul(binom[j], power), lambda[n - j]));
    }
    lambda[n] = checked_mul(c.c_reg, sum);
  }
  return lambda;
}

double theta_coeff(unsigned n, unsigned m, const CoefficientInputs& c) {
  if (n < m) return 0.0;
  if (n == m) return 1.0;
  if (integral(c)) return static_cast<double>(theta_coeff_exact(n, m, to_integer(c)));
  std::vector<double> theta(n + 1, 0.0);
  theta[m] = 1.0;
  for (unsigned p = m + 1; p <= n; ++p) {
    double sum = 0.0;
    for (unsigned j = 1; j <= p - m; ++j) {
      sum += binomial_double(p, j) * std::pow(c.c_tr, static_cast<double>(j)) * theta[p - j];
    }
    theta[p] = c.c_s * sum;
  }
  return theta[n];
}

std::vector<double> lambda_coeffs(unsigned kmax, const CoefficientInputs& c) {
  if (integral(c)) {
    const auto exact = lambda_coeffs_exact(kmax, to_integer(c));
    return {exact.begin(), exact.end()};
  }
  std::vector<double> lambda(kmax + 1, 0.0);
  lambda[0] = 1.0;
  for (unsigned n = 1; n <= kmax; ++n) {
    double sum = 0.0;
    for (unsigned j = 1; j <= n; ++j) {
      sum += binomial_double(n, j) * std::pow(c.c_tr, static_cast<double>(j)) * lambda[n - j];
    }
    lambda[n] = c.c_reg * sum;
  }
  return lambda;
}

}  // namespace momeq
