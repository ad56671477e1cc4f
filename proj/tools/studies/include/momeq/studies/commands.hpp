#pragma once

// CLI subcommands. Each returns a process exit code and writes its files
// plus meta.json into the output directory.
//
// Exit codes: 0 success, 1 validation failure or numerical breakdown,
// 2 I/O or configuration error, 3 resource cap exceeded.

#include <filesystem>

#include "momeq/studies/config.hpp"

namespace momeq::studies {

enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitIo = 2, kExitCapacity = 3 };

struct RunOptions {
  std::filesystem::path out = "momeq-out";
  bool plots = false;
};

enum class ConvergeAxis { Mesh, Sparse };

/// mean.csv (x,value), corrections.csv (k,L2_norm,H1_seminorm).
int cmd_solve(const StudyConfig& config, const RunOptions& options);

/// converge_h.csv or converge_sparse.csv (param,L2_error,H1_error,slope).
int cmd_converge(const StudyConfig& config, const RunOptions& options, ConvergeAxis axis);

/// validate.csv (check,value,bound,pass); exit 0 iff every check passes.
int cmd_validate(const StudyConfig& config, const RunOptions& options);

/// sigma_sweep.csv (sigma,K,error) behind an "exploratory" comment line.
int cmd_sigma_sweep(const StudyConfig& config, const RunOptions& options);

/// mc_mean.csv (x,mean,stderr).
int cmd_mc(const StudyConfig& config, const RunOptions& options);

/// Parses arguments, runs one subcommand and maps exceptions to exit codes.
int run_cli(int argc, char** argv);

}  // namespace momeq::studies
