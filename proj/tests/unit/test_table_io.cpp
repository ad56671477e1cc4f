#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "momeq/errors.hpp"
#include "momeq/table_io.hpp"

namespace momeq {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("momeq_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Numbers, FormatRoundTrip) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(format_number(-0.0), "0");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min()}) {
    EXPECT_EQ(parse_number(format_number(v)), v);
  }
  EXPECT_THROW(parse_number("1.5x"), IoError);
  EXPECT_THROW(parse_number(""), IoError);
  EXPECT_THROW(parse_number("abc"), IoError);
}

TEST(Csv, WriteAndRead) {
  const auto dir = fresh_dir("csv");
  const CsvTable table{{"a", "b"}, {{"1", "2.5"}, {"3", "-4"}}};
  write_csv(dir / "t.csv", table, {"exploratory"});
  const auto text = slurp(dir / "t.csv");
  EXPECT_EQ(text, "# exploratory\na,b\n1,2.5\n3,-4\n");
  const auto back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, table.header);
  EXPECT_EQ(back.rows, table.rows);
  EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
}

TEST(Csv, RaggedRowsRejected) {
  const auto dir = fresh_dir("ragged");
  std::ofstream(dir / "r.csv") << "a,b\n1,2\n3\n";
  EXPECT_THROW(read_csv(dir / "r.csv"), IoError);
}

CorrectionTable sample_table() {
  RecursionConfig rc;
  rc.elements = 8;
  rc.level = 2;
  rc.order = 2;
  return run_recursion(rc, MomentEvaluator(CovarianceKernel{KernelKind::Exponential, 0.3, 0.5, 0.4}));
}

TEST(TableIo, RoundTrip) {
  const auto dir = fresh_dir("table");
  auto table = sample_table();
  table.kernel = CovarianceKernel{KernelKind::Exponential, 0.3, 0.5, 0.4};
  write_table(table, dir);
  EXPECT_TRUE(fs::exists(dir / "manifest.csv"));
  EXPECT_TRUE(fs::exists(dir / "meta.json"));
  const auto back = read_table(dir);
  EXPECT_EQ(back.order, table.order);
  EXPECT_EQ(back.level, table.level);
  EXPECT_EQ(back.solve_count, table.solve_count);
  EXPECT_EQ(back.elements(), table.elements());
  ASSERT_EQ(back.entries.size(), table.entries.size());
  for (const auto& [key, corr] : table.entries) {
    const auto& other = back.entries.at(key);
    EXPECT_EQ(other.arity, corr.arity);
    EXPECT_EQ(other.zero, corr.zero);
    if (corr.arity == 0) {
      const auto a = corr.function(), b = other.function();
      EXPECT_TRUE(std::equal(a.coefficients().begin(), a.coefficients().end(), b.coefficients().begin()));
    } else if (!corr.zero) {
      const auto a = corr.values->nodal_values(), b = other.values->nodal_values();
      ASSERT_EQ(a.size(), b.size());
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
  write_table(back, dir / "again");
  EXPECT_EQ(slurp(dir / "manifest.csv"), slurp(dir / "again" / "manifest.csv"));
  EXPECT_EQ(slurp(dir / "corr_k2_i1.csv"), slurp(dir / "again" / "corr_k2_i1.csv"));
}

TEST(TableIo, CorruptedFilesRejected) {
  const auto dir = fresh_dir("corrupt");
  write_table(sample_table(), dir);
  {
    std::ofstream out(dir / "corr_k2_i1.csv", std::ios::app);
    out << "0.5,1,2\n";
  }
  EXPECT_THROW(read_table(dir), IoError);
  fs::remove(dir / "manifest.csv");
  EXPECT_THROW(read_table(dir), IoError);
}

TEST(GridKindNames, RoundTrip) {
  EXPECT_EQ(grid_kind_from_string(to_string(GridKind::Sparse)), GridKind::Sparse);
  EXPECT_EQ(grid_kind_from_string(to_string(GridKind::FullTensor)), GridKind::FullTensor);
  EXPECT_THROW(grid_kind_from_string("dense"), InvalidArgument);
}

}  // namespace
}  // namespace momeq
