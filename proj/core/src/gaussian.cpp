#include "momeq/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>

#include "momeq/errors.hpp"

namespace momeq {

std::string to_string(KernelKind kind) {
  return kind == KernelKind::Exponential ? "exponential" : "squared-exponential";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "exponential") return KernelKind::Exponential;
  if (name == "squared-exponential" || name == "squared_exponential" || name == "gaussian") {
    return KernelKind::SquaredExponential;
  }
  throw InvalidArgument("unknown covariance kernel '" + name + "'");
}

void CovarianceKernel::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("kernel: sigma must be >= 0");
  if (!(correlation_length > 0.0) || !std::isfinite(correlation_length)) {
    throw InvalidArgument("kernel: correlation length must be > 0");
  }
  if (!(holder_exponent > 0.0 && holder_exponent <= 1.0)) {
    throw InvalidArgument("kernel: Holder exponent must be in (0, 1]");
  }
}

double cov_eval(const CovarianceKernel& kernel, double a, double b) {
  const double r = std::abs(a - b) / kernel.correlation_length;
  const double variance = kernel.sigma * kernel.sigma;
  if (kernel.kind == KernelKind::Exponential) return variance * std::exp(-r);
  return variance * std::exp(-r * r);
}

std::size_t pairing_count(std::size_t m) {
  if (m % 2 == 1) return 0;
  std::size_t count = 1;
  for (std::size_t k = m; k > 1; k -= 2) count *= k - 1;
  return count;
}

namespace {

// Pairs the first unpaired index with every later unpaired one.
void enumerate_pairings(std::vector<bool>& used, std::vector<std::array<std::size_t, 2>>& current,
                        const std::function<void(std::span<const std::array<std::size_t, 2>>)>& visit) {
  const auto first = std::find(used.begin(), used.end(), false);
  if (first == used.end()) {
    visit(current);
    return;
  }
  const auto i = static_cast<std::size_t>(first - used.begin());
  used[i] = true;
  for (std::size_t j = i + 1; j < used.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    current.push_back({i, j});
    enumerate_pairings(used, current, visit);
    current.pop_back();
    used[j] = false;
  }
  used[i] = false;
}

double pairing_sum(const double* cov, std::size_t m, std::uint32_t unused_mask) {
  if (unused_mask == 0) return 1.0;
  const int i = std::countr_zero(unused_mask);
  const std::uint32_t rest = unused_mask & ~(1u << i);
  double total = 0.0;
  for (std::uint32_t scan = rest; scan != 0; scan &= scan - 1) {
    const int j = std::countr_zero(scan);
    total += cov[static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)] *
             pairing_sum(cov, m, rest & ~(1u << j));
  }
  return total;
}

}  // namespace

void for_each_pairing(std::size_t m,
                      const std::function<void(std::span<const std::array<std::size_t, 2>>)>& visit) {
  if (m % 2 == 1) return;
  std::vector<bool> used(m, false);
  std::vector<std::array<std::size_t, 2>> current;
  enumerate_pairings(used, current, visit);
}

MomentEvaluator::MomentEvaluator(CovarianceKernel kernel, std::size_t max_order)
    : kernel_(kernel), has_kernel_(true), max_order_(max_order) {
  kernel_.validate();
  covariance_ = [k = kernel_](double a, double b) { return cov_eval(k, a, b); };
}

MomentEvaluator::MomentEvaluator(CovarianceFunction covariance, std::size_t max_order)
    : covariance_(std::move(covariance)), max_order_(max_order) {
  if (!covariance_) throw InvalidArgument("MomentEvaluator: empty covariance function");
}

double MomentEvaluator::operator()(std::span<const double> points) const {
  const std::size_t m = points.size();
  if (m > max_order_ || m > 16) {
    throw CapacityError("moment order " + std::to_string(m) + " exceeds the configured maximum " +
                        std::to_string(max_order_));
  }
  if (m == 0) return 1.0;
  if (m % 2 == 1) return 0.0;
  std::array<double, 16 * 16> cov{};
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      cov[a * m + b] = cov[b * m + a] = covariance_(points[a], points[b]);
    }
  }
  return pairing_sum(cov.data(), m, (1u << m) - 1u);
}

double moment_eval(const MomentEvaluator& evaluator, std::span<const double> points) {
  return evaluator(points);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over a mix of seed and stream id
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

std::shared_ptr<const CovarianceFactor> factorize(const CovarianceKernel& kernel,
                                                  std::vector<double> locations, double jitter) {
  kernel.validate();
  if (!(jitter >= 0.0)) throw InvalidArgument("build_sampler: jitter must be >= 0");
  if (locations.empty()) throw InvalidArgument("build_sampler: no locations");
  const auto n = static_cast<Eigen::Index>(locations.size());
  const double variance = kernel.sigma * kernel.sigma;

  auto factor = std::make_shared<CovarianceFactor>();
  factor->locations = std::move(locations);
  factor->lower.assign(static_cast<std::size_t>(n * n), 0.0);
  if (variance == 0.0) return factor;

  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      cov(i, j) = cov(j, i) = cov_eval(kernel, factor->locations[static_cast<std::size_t>(i)],
                                       factor->locations[static_cast<std::size_t>(j)]);
    }
  }

  constexpr double kMaxJitter = 1e-6;
  double current = jitter;
  for (;;) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += current * variance;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    bool ok = llt.info() == Eigen::Success;
    Eigen::MatrixXd lower;
    if (ok) {
      lower = llt.matrixL();
      ok = lower.allFinite() && (lower.diagonal().array() > 0.0).all();
    }
    if (ok) {
      factor->applied_jitter = current;
      factor->residual = (lower * lower.transpose() - cov).cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          factor->lower[static_cast<std::size_t>(i * n + j)] = lower(i, j);
        }
      }
      return factor;
    }
    if (current >= kMaxJitter) break;
    current = current == 0.0 ? 1e-12 : std::min(current * 10.0, kMaxJitter);
  }
  throw NumericalError("covariance factorization failed at " + std::to_string(n) +
                       " locations even with jitter " + std::to_string(current) +
                       " sigma^2; locations may be duplicated");
}

}  // namespace

GaussianSampler::GaussianSampler(const CovarianceKernel& kernel, std::vector<double> locations,
                                 double jitter, std::uint64_t seed)
    : GaussianSampler(factorize(kernel, std::move(locations), jitter), seed) {}

GaussianSampler::GaussianSampler(std::shared_ptr<const CovarianceFactor> factor, std::uint64_t seed)
    : factor_(std::move(factor)), seed_(seed), engine_(seed), scratch_(factor_->locations.size()) {}

std::vector<double> GaussianSampler::sample() {
  std::vector<double> out(size());
  sample_into(out);
  return out;
}

void GaussianSampler::sample_into(std::span<double> out) {
  for (double& z : scratch_) z = normal_(engine_);
  correlate(scratch_, out);
}

void GaussianSampler::correlate(std::span<const double> standard_normals, std::span<double> out) const {
  const std::size_t n = size();
  if (standard_normals.size() != n || out.size() != n) {
    throw InvalidArgument("GaussianSampler: vector size mismatch");
  }
  const double* lower = factor_->lower.data();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j <= i; ++j) v += lower[i * n + j] * standard_normals[j];
    out[i] = v;
  }
}

GaussianSampler GaussianSampler::fork(std::uint64_t stream) const {
  return GaussianSampler(factor_, derive_seed(seed_, stream));
}

GaussianSampler build_sampler(const CovarianceKernel& kernel, std::vector<double> locations,
                              double jitter, std::uint64_t seed) {
  return GaussianSampler(kernel, std::move(locations), jitter, seed);
}

std::vector<double> sample_field(GaussianSampler& sampler) { return sampler.sample(); }

SyntheticKlField::SyntheticKlField(std::vector<std::function<double(double)>> modes)
    : modes_(std::move(modes)) {
  if (modes_.empty()) throw InvalidArgument("SyntheticKlField: need at least one mode");
}

double SyntheticKlField::covariance(double a, double b) const {
  double c = 0.0;
  for (const auto& phi : modes_) c += phi(a) * phi(b);
  return c;
}

CovarianceFunction SyntheticKlField::covariance_function() const {
  return [modes = modes_](double a, double b) {
    double c = 0.0;
    for (const auto& phi : modes) c += phi(a) * phi(b);
    return c;
  };
}

std::vector<double> SyntheticKlField::realize(std::span<const double> coefficients,
                                              std::span<const double> locations) const {
  if (coefficients.size() != modes_.size()) {
    throw InvalidArgument("SyntheticKlField: one coefficient per mode expected");
  }
  std::vector<double> values(locations.size(), 0.0);
  for (std::size_t n = 0; n < modes_.size(); ++n) {
    for (std::size_t i = 0; i < locations.size(); ++i) values[i] += coefficients[n] * modes_[n](locations[i]);
  }
  return values;
}

}  // namespace momeq
