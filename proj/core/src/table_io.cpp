#include "momeq/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "momeq/errors.hpp"

namespace momeq {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

double parse_number(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size() || text.empty()) {
    throw IoError("malformed number '" + std::string(text) + "'");
  }
  return value;
}

void write_csv(const fs::path& path, const CsvTable& table, const std::vector<std::string>& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : comment) out << "# " << line << '\n';
  auto write_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << ',';
      out << cells[c];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw IoError("failed writing " + path.string());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      cells.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cells = split(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw IoError(path.string() + ": row with " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError(path.string() + ": missing header");
  return table;
}

std::string to_string(GridKind kind) {
  return kind == GridKind::Sparse ? "sparse" : "full-tensor";
}

GridKind grid_kind_from_string(const std::string& name) {
  if (name == "sparse") return GridKind::Sparse;
  if (name == "full-tensor" || name == "full_tensor") return GridKind::FullTensor;
  throw InvalidArgument("unknown grid kind '" + name + "'");
}

namespace {

std::string correlation_file(unsigned k, unsigned i) {
  return "corr_k" + std::to_string(k) + "_i" + std::to_string(i) + ".csv";
}

}  // namespace

void write_table(const CorrectionTable& table, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());

  const std::size_t ndof = table.space->dof_count();
  CsvTable manifest{{"k", "i", "derivative_order", "arity", "zero", "file", "nodes", "dofs"}, {}};
  for (const auto& [key, corr] : table.entries) {
    const auto [k, i] = key;
    std::string file;
    std::size_t nodes = 0;
    if (!corr.zero) {
      file = correlation_file(k, i);
      nodes = corr.values->grid().node_count();
      CsvTable data;
      for (unsigned a = 1; a <= i; ++a) data.header.push_back("y" + std::to_string(a));
      for (std::size_t c = 0; c < ndof; ++c) data.header.push_back("c" + std::to_string(c));
      data.rows.reserve(nodes);
      for (std::size_t n = 0; n < nodes; ++n) {
        std::vector<std::string> row;
        row.reserve(i + ndof);
        for (double y : corr.values->grid().node(n)) row.push_back(format_number(y));
        for (double v : corr.values->node_payload(n)) row.push_back(format_number(v));
        data.rows.push_back(std::move(row));
      }
      write_csv(directory / file, data);
    }
    manifest.rows.push_back({std::to_string(k), std::to_string(i), std::to_string(corr.derivative_order),
                             std::to_string(corr.arity), corr.zero ? "1" : "0", file,
                             std::to_string(nodes), std::to_string(ndof)});
  }
  write_csv(directory / "manifest.csv", manifest);

  json meta;
  meta["K"] = table.order;
  meta["L"] = table.level;
  meta["elements"] = table.elements();
  meta["h"] = 1.0 / static_cast<double>(table.elements());
  meta["degree"] = table.degree();
  meta["quadrature_refinement"] = table.space->quadrature_refinement();
  meta["base_step"] = table.base_step;
  meta["grid"] = to_string(table.grid);
  if (table.kernel) {
    meta["kernel"] = {{"kind", to_string(table.kernel->kind)},
                      {"sigma", table.kernel->sigma},
                      {"correlation_length", table.kernel->correlation_length},
                      {"holder_exponent", table.kernel->holder_exponent}};
  } else {
    meta["kernel"] = nullptr;
  }
  meta["seed"] = nullptr;
  meta["norm_exponent"] = 2;
  meta["solve_count"] = table.solve_count;
  meta["projected_solves"] = table.projected_solves;
  std::ofstream out(directory / "meta.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (directory / "meta.json").string());
  out << meta.dump(2) << '\n';
}

CorrectionTable read_table(const fs::path& directory) {
  json meta;
  {
    std::ifstream in(directory / "meta.json", std::ios::binary);
    if (!in) throw IoError("cannot read " + (directory / "meta.json").string());
    try {
      in >> meta;
    } catch (const json::exception& e) {
      throw IoError("malformed meta.json: " + std::string(e.what()));
    }
  }

  CorrectionTable table;
  try {
    table.order = meta.at("K").get<unsigned>();
    table.level = meta.at("L").get<unsigned>();
    table.base_step = meta.at("base_step").get<double>();
    table.grid = grid_kind_from_string(meta.at("grid").get<std::string>());
    table.solve_count = meta.value("solve_count", std::size_t{0});
    table.projected_solves = meta.value("projected_solves", std::size_t{0});
    if (!meta.at("kernel").is_null()) {
      const auto& k = meta["kernel"];
      table.kernel = CovarianceKernel{kernel_kind_from_string(k.at("kind").get<std::string>()),
                                      k.at("sigma").get<double>(),
                                      k.at("correlation_length").get<double>(),
                                      k.at("holder_exponent").get<double>()};
    }
    table.space = make_space(meta.at("elements").get<std::size_t>(), meta.at("degree").get<int>(),
                             meta.value("quadrature_refinement", std::size_t{1}));
  } catch (const json::exception& e) {
    throw IoError("invalid meta.json: " + std::string(e.what()));
  } catch (const InvalidArgument& e) {
    throw IoError("invalid meta.json: " + std::string(e.what()));
  }

  const GridCache grids(LevelFamily(table.base_step), table.level, table.grid);
  const std::size_t ndof = table.space->dof_count();
  const auto manifest = read_csv(directory / "manifest.csv");
  if (manifest.header.size() != 8 || manifest.header[0] != "k") {
    throw IoError("manifest.csv: unexpected header");
  }
  auto to_unsigned = [](const std::string& s) {
    const double v = parse_number(s);
    if (v < 0 || std::floor(v) != v) throw IoError("manifest.csv: expected an integer, got '" + s + "'");
    return static_cast<unsigned>(v);
  };

  for (const auto& row : manifest.rows) {
    Correlation corr;
    const unsigned k = to_unsigned(row[0]);
    const unsigned i = to_unsigned(row[1]);
    corr.derivative_order = to_unsigned(row[2]);
    corr.arity = to_unsigned(row[3]);
    corr.zero = row[4] == "1";
    corr.space = table.space;
    if (corr.arity != i || corr.derivative_order + i != k) throw IoError("manifest.csv: inconsistent orders");
    if (to_unsigned(row[7]) != ndof) throw IoError("manifest.csv: dof count does not match meta.json");
    if (!corr.zero) {
      const auto grid = grids.get(i);
      const auto data = read_csv(directory / row[5]);
      if (data.header.size() != i + ndof || data.rows.size() != grid->node_count()) {
        throw IoError(row[5] + ": shape does not match the grid");
      }
      std::vector<double> values;
      values.reserve(grid->node_count() * ndof);
      for (std::size_t n = 0; n < data.rows.size(); ++n) {
        const auto node = grid->node(n);
        for (unsigned a = 0; a < i; ++a) {
          if (std::abs(parse_number(data.rows[n][a]) - node[a]) > 1e-12) {
            throw IoError(row[5] + ": node coordinates do not match the grid");
          }
        }
        for (std::size_t c = 0; c < ndof; ++c) values.push_back(parse_number(data.rows[n][i + c]));
      }
      corr.values = std::make_shared<const SparseInterpolant>(grid, ndof, std::move(values));
    }
    table.entries.emplace(CorrelationKey{k, i}, std::move(corr));
  }
  if (!table.find(0, 0)) throw IoError("manifest.csv: missing u0 entry");
  return table;
}

}  // namespace momeq
