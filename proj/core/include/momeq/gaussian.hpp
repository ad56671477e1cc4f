#pragma once

// Covariance kernels, Isserlis (Wick) moments of a centered Gaussian field,
// and correlated field sampling.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace momeq {

enum class KernelKind { Exponential, SquaredExponential };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Stationary covariance of the log-permeability field Y.
struct CovarianceKernel {
  KernelKind kind = KernelKind::Exponential;
  double sigma = 1.0;               // standard deviation
  double correlation_length = 1.0;  // lambda_c > 0
  double holder_exponent = 0.4;     // metadata only

  /// Throws InvalidArgument if sigma < 0 or correlation_length <= 0.
  void validate() const;
};

/// exponential: sigma^2 exp(-|a-b|/lambda_c);
/// squared-exponential: sigma^2 exp(-|a-b|^2/lambda_c^2).
double cov_eval(const CovarianceKernel& kernel, double a, double b);

using CovarianceFunction = std::function<double(double, double)>;

/// Number of perfect pairings of m items, (m-1)!! for even m, 0 for odd m.
std::size_t pairing_count(std::size_t m);

/// Calls `visit` once per perfect pairing of {0..m-1}; each pairing is given
/// as m/2 index pairs.
void for_each_pairing(std::size_t m,
                      const std::function<void(std::span<const std::array<std::size_t, 2>>)>& visit);

/// E[Y(y_1) ... Y(y_m)] for a centered Gaussian field, by summing products of
/// covariances over all perfect pairings. Immutable and thread-safe.
class MomentEvaluator {
 public:
  static constexpr std::size_t kDefaultMaxOrder = 8;

  explicit MomentEvaluator(CovarianceKernel kernel, std::size_t max_order = kDefaultMaxOrder);
  /// Arbitrary covariance, e.g. a finite-rank expansion.
  MomentEvaluator(CovarianceFunction covariance, std::size_t max_order = kDefaultMaxOrder);

  /// m = 0 gives 1, odd m gives exactly 0. Throws CapacityError when m
  /// exceeds the configured maximum order.
  double operator()(std::span<const double> points) const;

  double covariance(double a, double b) const { return covariance_(a, b); }
  std::size_t max_order() const { return max_order_; }
  /// The kernel, when constructed from one.
  const CovarianceKernel* kernel() const { return has_kernel_ ? &kernel_ : nullptr; }

 private:
  CovarianceFunction covariance_;
  CovarianceKernel kernel_{};
  bool has_kernel_ = false;
  std::size_t max_order_;
};

double moment_eval(const MomentEvaluator& evaluator, std::span<const double> points);

/// Derives an independent 64-bit seed for stream `stream` of a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Lower-triangular Cholesky factor of the covariance matrix at a fixed set
/// of locations.
struct CovarianceFactor {
  std::vector<double> locations;
  std::vector<double> lower;       // row-major n x n
  double applied_jitter = 0.0;     // relative to sigma^2
  double residual = 0.0;           // max |L L^T - C|
};

/// Correlated Gaussian draws at fixed locations.
///
/// The factor is shared between forks; each sampler owns its random stream,
/// so a sampler must not be used from several threads at once. Identical
/// seeds give bit-identical draws.
class GaussianSampler {
 public:
  /// Adds jitter * sigma^2 to the diagonal; escalates x10 up to 1e-6 sigma^2
  /// if the factorization fails, then throws NumericalError.
  GaussianSampler(const CovarianceKernel& kernel, std::vector<double> locations,
                  double jitter, std::uint64_t seed);

  std::size_t size() const { return factor_->locations.size(); }
  const CovarianceFactor& factor() const { return *factor_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<double> sample();
  void sample_into(std::span<double> out);
  /// Standard normal vector mapped through the factor.
  void correlate(std::span<const double> standard_normals, std::span<double> out) const;

  /// Sampler sharing this factor with an independent stream keyed by
  /// (seed, stream).
  GaussianSampler fork(std::uint64_t stream) const;

 private:
  GaussianSampler(std::shared_ptr<const CovarianceFactor> factor, std::uint64_t seed);

  std::shared_ptr<const CovarianceFactor> factor_;
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::vector<double> scratch_;
};

GaussianSampler build_sampler(const CovarianceKernel& kernel, std::vector<double> locations,
                              double jitter, std::uint64_t seed);

std::vector<double> sample_field(GaussianSampler& sampler);

/// Finite-rank field Y = sum_n xi_n phi_n(x) with i.i.d. standard normal xi_n.
class SyntheticKlField {
 public:
  explicit SyntheticKlField(std::vector<std::function<double(double)>> modes);

  std::size_t rank() const { return modes_.size(); }
  double covariance(double a, double b) const;
  CovarianceFunction covariance_function() const;
  /// Field values at `locations` for the given mode coefficients.
  std::vector<double> realize(std::span<const double> coefficients,
                              std::span<const double> locations) const;

 private:
  std::vector<std::function<double(double)>> modes_;
};

}  // namespace momeq
