#include "momeq/studies/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "momeq/errors.hpp"
#include "momeq/monte_carlo.hpp"
#include "momeq/recursion.hpp"
#include "momeq/table_io.hpp"
#include "momeq/studies/checks.hpp"

namespace momeq::studies {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void prepare(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_meta(const fs::path& dir, const std::string& command, const StudyConfig& config, json extra) {
  json meta;
  meta["command"] = command;
  meta["config"] = json::parse(config_json(config));
  meta["norm_exponent"] = 2;
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  std::ofstream out(dir / "meta.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
}

std::vector<std::string> row(std::initializer_list<double> values) {
  std::vector<std::string> r;
  for (double v : values) r.push_back(format_number(v));
  return r;
}

// Log-log plot of one or more error series against a parameter.
void write_svg(const fs::path& path, const std::string& xlabel, const std::vector<double>& x,
               const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  constexpr double W = 480, H = 360, M = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (double v : x) {
    xmin = std::min(xmin, std::log10(v));
    xmax = std::max(xmax, std::log10(v));
  }
  for (const auto& [name, ys] : series) {
    for (double v : ys) {
      if (v <= 0.0) continue;
      ymin = std::min(ymin, std::log10(v));
      ymax = std::max(ymax, std::log10(v));
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double v) { return M + (std::log10(v) - xmin) / (xmax - xmin) * (W - 2 * M); };
  auto py = [&](double v) { return H - M - (std::log10(v) - ymin) / (ymax - ymin) * (H - 2 * M); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel
      << " (log)</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[s % 3] << "\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (series[s].second[i] > 0.0) out << px(x[i]) << ',' << py(series[s].second[i]) << ' ';
    }
    out << "\"/>\n<text x=\"" << W - M << "\" y=\"" << M + 16.0 * static_cast<double>(s)
        << "\" text-anchor=\"end\" fill=\"" << colors[s % 3] << "\">" << series[s].first << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

int cmd_solve(const StudyConfig& config, const RunOptions& options) {
  prepare(options.out);
  const auto rc = recursion_config(config, config.mesh.elements, config.sparse.level, config.order);
  const auto table = run_recursion(rc, MomentEvaluator(config.kernel, config.caps.max_pairing_order));
  const auto mean = taylor_mean(table, config.order);

  CsvTable mean_csv{{"x", "value"}, {}};
  const auto x = table.space->dof_coordinates();
  for (std::size_t i = 0; i < x.size(); ++i) mean_csv.rows.push_back(row({x[i], mean.mean.coefficients()[i]}));
  write_csv(options.out / "mean.csv", mean_csv);

  CsvTable corrections{{"k", "L2_norm", "H1_seminorm"}, {}};
  for (unsigned k = 0; k <= config.order; ++k) {
    corrections.rows.push_back(row({static_cast<double>(k), mean.l2_norms[k], mean.h1_seminorms[k]}));
  }
  write_csv(options.out / "corrections.csv", corrections);

  if (config.write_table) write_table(table, options.out / "table");

  const SparseGrid line(LevelFamily(config.sparse.base_step), config.sparse.level, 1);
  write_meta(options.out, "solve", config,
             {{"solve_count", table.solve_count},
              {"projected_solves", table.projected_solves},
              {"grid_nodes_1d", line.node_count()},
              {"seed", nullptr}});
  std::cout << "solve: K=" << config.order << " L=" << config.sparse.level << " n=" << config.mesh.elements
            << " solves=" << table.solve_count << "\n";
  return kExitOk;
}

int cmd_converge(const StudyConfig& config, const RunOptions& options, ConvergeAxis axis) {
  const bool mesh_axis = axis == ConvergeAxis::Mesh;
  const std::size_t points = mesh_axis ? config.sweeps.elements.size() : config.sweeps.levels.size();
  if (points == 0) throw InvalidArgument(mesh_axis ? "sweeps.n is empty" : "sweeps.L is empty");
  prepare(options.out);

  const auto reference = reference_correction(config, config.order);
  const MomentEvaluator moments(config.kernel, config.caps.max_pairing_order);
  std::vector<double> params, e_l2, e_h1;
  for (std::size_t p = 0; p < points; ++p) {
    const std::size_t n = mesh_axis ? config.sweeps.elements[p] : config.mesh.elements;
    const unsigned level = mesh_axis ? config.sparse.level : config.sweeps.levels[p];
    const auto rc = recursion_config(config, n, level, config.order);
    const auto value = run_recursion(rc, moments).correction(config.order);
    params.push_back(mesh_axis ? static_cast<double>(n) : static_cast<double>(level));
    e_l2.push_back(fe_difference_norm(value, reference, NormKind::Lp));
    e_h1.push_back(fe_difference_norm(value, reference, NormKind::W1pSeminorm));
  }

  CsvTable csv{{"param", "L2_error", "H1_error", "slope"}, {}};
  for (std::size_t p = 0; p < points; ++p) {
    std::string slope;
    if (p > 0 && e_h1[p] > 0.0 && e_h1[p - 1] > 0.0) {
      const double ratio = std::log(e_h1[p - 1] / e_h1[p]);
      slope = format_number(mesh_axis ? ratio / std::log(params[p] / params[p - 1])
                                      : ratio / std::log(2.0) / (params[p] - params[p - 1]));
    }
    csv.rows.push_back({format_number(params[p]), format_number(e_l2[p]), format_number(e_h1[p]), slope});
  }
  const std::string stem = mesh_axis ? "converge_h" : "converge_sparse";
  write_csv(options.out / (stem + ".csv"), csv);
  if (options.plots) {
    std::vector<double> xs = params;
    if (!mesh_axis) {
      for (double& v : xs) v = config.sparse.base_step * std::ldexp(1.0, -static_cast<int>(v));
    }
    write_svg(options.out / (stem + ".svg"), mesh_axis ? "n" : "h_L", xs,
              {{"L2 error", e_l2}, {"H1 error", e_h1}});
  }
  write_meta(options.out, mesh_axis ? "converge-h" : "converge-sparse", config,
             {{"quantity", "E[u^" + std::to_string(config.order) + "]"},
              {"reference", config.reference.file.empty() ? json("computed") : json(config.reference.file)},
              {"seed", nullptr}});
  std::cout << stem << ": " << points << " points written\n";
  return kExitOk;
}

int cmd_validate(const StudyConfig& config, const RunOptions& options) {
  prepare(options.out);
  CsvTable csv{{"check", "value", "bound", "pass"}, {}};
  bool all = true;
  json criteria = json::array();
  for (const auto& criterion : battery()) {
    const auto results = criterion.run(config);
    bool pass = true;
    for (const auto& r : results) {
      csv.rows.push_back({r.name, format_number(r.value), r.bound, r.pass ? "1" : "0"});
      pass = pass && r.pass;
    }
    all = all && pass;
    criteria.push_back({{"id", criterion.id}, {"name", criterion.name}, {"pass", pass}});
    std::cout << (pass ? "PASS " : "FAIL ") << criterion.id << ' ' << criterion.name << "\n";
  }
  write_csv(options.out / "validate.csv", csv);
  write_meta(options.out, "validate", config, {{"criteria", criteria}, {"seed", config.mc.seed}});
  return all ? kExitOk : kExitFailed;
}

int cmd_sigma_sweep(const StudyConfig& config, const RunOptions& options) {
  if (config.sweeps.sigmas.empty() || config.sweeps.orders.empty()) {
    throw InvalidArgument("sigma-sweep needs nonempty sweeps.sigma and sweeps.K");
  }
  prepare(options.out);
  const unsigned kmax = *std::max_element(config.sweeps.orders.begin(), config.sweeps.orders.end());
  auto unit = config.kernel;
  unit.sigma = 1.0;
  const auto rc = recursion_config(config, config.mesh.elements, config.sparse.level, kmax);
  auto space = make_space(rc.elements, rc.degree, rc.quadrature_refinement);
  const auto op = assemble_laplacian(space);
  const auto table = run_recursion(rc, MomentEvaluator(unit, config.caps.max_pairing_order), op);

  CsvTable csv{{"sigma", "K", "error"}, {}};
  for (double sigma : config.sweeps.sigmas) {
    auto kernel = config.kernel;
    kernel.sigma = sigma;
    const auto mc = mc_mean(space, rc.source, kernel, mc_config(config));
    for (unsigned order : config.sweeps.orders) {
      FeFunction approx(space);
      double factorial = 1.0;
      for (unsigned k = 0; k <= order; ++k) {
        if (k > 0) factorial *= k;
        if (k % 2 == 1) continue;
        FeFunction term = table.correction(k);
        term *= std::pow(sigma, static_cast<double>(k)) / factorial;
        approx += term;
      }
      FeFunction diff = approx;
      diff *= -1.0;
      diff += mc.mean;
      csv.rows.push_back(row({sigma, static_cast<double>(order), fe_norm(diff, NormKind::Lp)}));
    }
  }
  write_csv(options.out / "sigma_sweep.csv", csv,
            {"exploratory: L2 distance between the Monte Carlo mean and the K-th order Taylor mean;",
             "growth in K at large sigma is expected and is not a failure"});
  write_meta(options.out, "sigma-sweep", config, {{"seed", config.mc.seed}, {"exploratory", true}});
  std::cout << "sigma-sweep: " << csv.rows.size() << " rows written\n";
  return kExitOk;
}

int cmd_mc(const StudyConfig& config, const RunOptions& options) {
  prepare(options.out);
  auto space = make_space(config.mesh.elements, config.mesh.degree, config.mesh.quadrature_refinement);
  const auto est = mc_mean(space, source_function(config.source), config.kernel, mc_config(config));
  CsvTable csv{{"x", "mean", "stderr"}, {}};
  const auto x = space->dof_coordinates();
  for (std::size_t i = 0; i < x.size(); ++i) {
    csv.rows.push_back(row({x[i], est.mean.coefficients()[i], est.standard_error[i]}));
  }
  write_csv(options.out / "mc_mean.csv", csv);
  write_meta(options.out, "mc", config,
             {{"seed", est.seed}, {"samples", est.samples}, {"skipped", est.skipped}});
  std::cout << "mc: " << est.samples << " samples, " << est.skipped << " skipped\n";
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Moment equations for the lognormal Darcy problem"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "momeq-out";
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  bool plots = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--seed", seed, "Override mc.seed");
  app.add_flag("--plots", plots, "Also write SVG plots");

  std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "Compute the Taylor mean and correction norms"},
      {"converge-h", "Error against the reference over sweeps.n"},
      {"converge-sparse", "Error against the reference over sweeps.L"},
      {"validate", "Run the validation battery"},
      {"sigma-sweep", "Taylor mean vs Monte Carlo over sweeps.sigma and sweeps.K"},
      {"mc", "Monte Carlo mean of the solution"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    StudyConfig config = config_path.empty() ? StudyConfig{} : load_config(config_path);
    if (threads) config.threads = *threads;
    if (seed) config.mc.seed = *seed;
    validate_config(config);
    const RunOptions options{out_dir, plots};
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "solve") return cmd_solve(config, options);
    if (name == "converge-h") return cmd_converge(config, options, ConvergeAxis::Mesh);
    if (name == "converge-sparse") return cmd_converge(config, options, ConvergeAxis::Sparse);
    if (name == "validate") return cmd_validate(config, options);
    if (name == "sigma-sweep") return cmd_sigma_sweep(config, options);
    return cmd_mc(config, options);
  } catch (const CapacityError& e) {
    std::cerr << "momeq: resource cap exceeded: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const IoError& e) {
    std::cerr << "momeq: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "momeq: invalid configuration: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "momeq: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace momeq::studies
