#pragma once

// The validation battery run by `momeq validate` and the acceptance suite.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "momeq/fem.hpp"
#include "momeq/studies/config.hpp"

namespace momeq::studies {

struct CheckResult {
  std::string name;
  double value = 0.0;
  std::string bound;  // human-readable acceptance condition, e.g. "<=1e-12"
  bool pass = false;
};

struct Criterion {
  int id;
  std::string name;
  std::function<std::vector<CheckResult>(const StudyConfig&)> run;
};

/// All criteria in order.
const std::vector<Criterion>& battery();

std::vector<CheckResult> check_fe_rates(const StudyConfig& config);
std::vector<CheckResult> check_smolyak_identity(const StudyConfig& config);
std::vector<CheckResult> check_sparse_rate(const StudyConfig& config);
std::vector<CheckResult> check_isserlis(const StudyConfig& config);
std::vector<CheckResult> check_recursion_oracles(const StudyConfig& config);
std::vector<CheckResult> check_homogeneity_parity(const StudyConfig& config);
std::vector<CheckResult> check_taylor_remainder(const StudyConfig& config);
std::vector<CheckResult> check_second_order(const StudyConfig& config);
std::vector<CheckResult> check_discretization_decay(const StudyConfig& config);
std::vector<CheckResult> check_coefficients(const StudyConfig& config);
std::vector<CheckResult> check_holder_product(const StudyConfig& config);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// E[u^K] on the reference discretization, read from config.reference.file
/// when set (IoError if unreadable or inconsistent with the reference
/// mesh), otherwise computed.
FeFunction reference_correction(const StudyConfig& config, unsigned order);

/// Reads a two-column CSV (x,value) onto the dofs of `space`.
FeFunction read_function_csv(const std::filesystem::path& path, std::shared_ptr<const FeSpace> space);

}  // namespace momeq::studies
