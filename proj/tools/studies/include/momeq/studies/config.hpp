#pragma once

// Study configuration: a single JSON file, every field optional.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "momeq/fem.hpp"
#include "momeq/gaussian.hpp"
#include "momeq/monte_carlo.hpp"
#include "momeq/recursion.hpp"

namespace momeq::studies {

struct StudyConfig {
  struct Mesh {
    int dimension = 1;
    std::size_t elements = 128;
    int degree = 1;
    std::size_t quadrature_refinement = 1;
  } mesh;

  struct Sparse {
    double base_step = 0.5;
    unsigned level = 5;
  } sparse;

  CovarianceKernel kernel{KernelKind::Exponential, 0.3, 0.5, 0.4};
  unsigned order = 2;  // K

  struct Mc {
    std::size_t samples = 10'000;
    std::uint64_t seed = 20240601;
    bool antithetic = true;
    double jitter = 1e-10;
  } mc;

  struct Sweeps {
    std::vector<std::size_t> elements{16, 32, 64, 128};
    std::vector<unsigned> levels{2, 3, 4, 5};
    std::vector<double> sigmas{0.0, 0.1, 0.3, 0.6, 1.0, 1.5};
    std::vector<unsigned> orders{0, 2, 4};
  } sweeps;

  struct Reference {
    std::size_t elements = 512;
    unsigned level = 7;
    std::string file;  // optional CSV (x,value) of E[u^2] on the reference mesh
  } reference;

  struct Validate {
    std::size_t isserlis_samples = 1'000'000;
    std::size_t remainder_samples = 200;
    std::size_t full_tensor_elements = 8;
    unsigned full_tensor_level = 2;
  } validate;

  struct Caps {
    std::size_t max_solves = 2'000'000;
    std::size_t max_pairing_order = 8;
  } caps;

  std::string source = "one";  // "one": f = 1, "sine": f = pi^2 sin(pi x)
  unsigned threads = 1;
  bool write_table = false;
};

/// Parses JSON text over the defaults. Unknown keys and out-of-range values
/// throw InvalidArgument; malformed JSON throws IoError.
StudyConfig parse_config(const std::string& text);

/// Reads and parses a config file; unreadable files throw IoError.
StudyConfig load_config(const std::filesystem::path& path);

/// Range checks shared by parsing and programmatic construction.
void validate_config(const StudyConfig& config);

/// Full config, defaults included, as pretty-printed JSON.
std::string config_json(const StudyConfig& config);

ScalarFunction source_function(const std::string& name);

/// Recursion settings for one (elements, level, order) point of a study.
RecursionConfig recursion_config(const StudyConfig& config, std::size_t elements, unsigned level,
                                 unsigned order);

McConfig mc_config(const StudyConfig& config);

}  // namespace momeq::studies
