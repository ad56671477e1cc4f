#pragma once

// Brute-force references: explicit difference-tensor Smolyak sums, discrete
// mixed Holder norms, and the theta / lambda coefficient recursions.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "momeq/sparse_grid.hpp"

namespace momeq {

using ScalarTarget = std::function<double(std::span<const double>)>;

/// Sum over |l| <= L of the tensor difference operators Delta_{l_1} x ... x
/// Delta_{l_k} applied to a scalar target, with Delta_l = P_l - P_{l-1} and
/// P_{-1} = 0. Every tensor interpolant is evaluated by summing over all of
/// its nodes with explicit hat functions; nothing is shared with
/// SparseGrid. Guarded to k <= 3, L <= 4.
class FullTensorOracle {
 public:
  FullTensorOracle(const LevelFamily& family, unsigned level, unsigned dimension, ScalarTarget target);

  unsigned level() const { return level_; }
  unsigned dimension() const { return dimension_; }

  /// sum_{|l| <= L} (x)_j Delta_{l_j}.
  double operator()(std::span<const double> y) const;
  /// sum_{|l| = shell} (x)_j Delta_{l_j}.
  double shell(unsigned shell, std::span<const double> y) const;
  /// (x)_j Delta_{l_j} for one multi-index.
  double difference(const MultiIndex& l, std::span<const double> y) const;
  /// Plain tensor interpolation on X_L^k.
  double full_tensor(std::span<const double> y) const;
  /// Tensor interpolation on X_{m_1} x ... x X_{m_k}.
  double tensor(const MultiIndex& m, std::span<const double> y) const;

 private:
  LevelFamily family_;
  unsigned level_;
  unsigned dimension_;
  ScalarTarget target_;
};

FullTensorOracle full_tensor_oracle(const LevelFamily& family, unsigned level, unsigned dimension,
                                    ScalarTarget target);

/// Values on a tensor grid; row-major with the last axis fastest.
struct TensorGridData {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;

  std::size_t dimension() const { return axes.size(); }
};

/// Tabulates f on the tensor product of the given axes.
TensorGridData tabulate(std::vector<std::vector<double>> axes, const ScalarTarget& f);

/// max over nonempty direction sets S and grid increments h_j (j in S) of
/// |Delta_S f(y)| / prod_{j in S} |h_j|^gamma, where Delta_S is the mixed
/// difference in the directions of S. Exhaustive; guarded to k <= 3 and at
/// most 33 points per direction.
double mixed_holder_seminorm(const TensorGridData& data, double gamma);

/// max(sup |f|, mixed_holder_seminorm).
double mixed_holder_norm(const TensorGridData& data, double gamma);

/// Constants of the coefficient recursions.
struct CoefficientInputs {
  double c_s = 1.0;
  double c_tr = 1.0;
  double c_reg = 1.0;
};

/// theta_{n,m} = 1 if n = m, 0 if n < m, otherwise
/// C_S sum_{j=1}^{n-m} binom(n,j) C_tr^j theta_{n-j,m}.
/// Integral inputs are evaluated in exact integer arithmetic.
double theta_coeff(unsigned n, unsigned m, const CoefficientInputs& c);

/// lambda_0 = 1, lambda_n = C_reg sum_{j=1}^n binom(n,j) C_tr^j lambda_{n-j}.
std::vector<double> lambda_coeffs(unsigned kmax, const CoefficientInputs& c);

struct IntegerCoefficients {
  std::uint64_t c_s = 1;
  std::uint64_t c_tr = 1;
  std::uint64_t c_reg = 1;
};

/// Exact versions; throw CapacityError on 64-bit overflow.
std::uint64_t theta_coeff_exact(unsigned n, unsigned m, const IntegerCoefficients& c);
std::vector<std::uint64_t> lambda_coeffs_exact(unsigned kmax, const IntegerCoefficients& c);

}  // namespace momeq
