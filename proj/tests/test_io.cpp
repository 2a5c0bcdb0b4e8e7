#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "coreset/artifact.hpp"
#include "coreset/csv.hpp"

using namespace coreset;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "exact_coreset_io_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path path = temp_dir() / name;
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_csv parses a plain numeric table") {
  const auto path = write_file("plain.csv", "1,2,3\n4,5,6\n7,8,9\n");
  const auto table = io::load_csv(path.string());
  CHECK(table.header.empty());
  REQUIRE(table.values.rows() == 3);
  REQUIRE(table.values.cols() == 3);
  CHECK(table.values(2, 1) == 8.0);

  const auto data = io::split_label(table);
  CHECK(data.x.rows() == 3);
  CHECK(data.x.cols() == 2);
  CHECK(data.y(0) == 3.0);
}

TEST_CASE("load_csv skips a header row") {
  const auto path = write_file("header.csv", "a,b,y\n1,2,3\n4,5,6\n");
  const auto table = io::load_csv(path.string());
  REQUIRE(table.header.size() == 3);
  CHECK(table.header[2] == "y");
  CHECK(table.values.rows() == 2);
}

TEST_CASE("load_csv handles CRLF and blank lines") {
  const auto path = write_file("crlf.csv", "1,2\r\n3,4\r\n\r\n");
  const auto table = io::load_csv(path.string());
  CHECK(table.values.rows() == 2);
  CHECK(table.values(1, 1) == 4.0);
}

TEST_CASE("load_csv reports ragged and non-numeric rows by location") {
  const auto ragged = write_file("ragged.csv", "1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(io::load_csv(ragged.string()),
                       doctest::Contains("row 2"), input_error);

  const auto sour = write_file("nonnumeric.csv", "1,2\n3,oops\n");
  CHECK_THROWS_WITH_AS(io::load_csv(sour.string()),
                       doctest::Contains("row 2, column 2"), input_error);

  const auto empty = write_file("empty.csv", "");
  CHECK_THROWS_AS(io::load_csv(empty.string()), input_error);
  CHECK_THROWS_AS(io::load_csv((temp_dir() / "missing.csv").string()), input_error);
}

TEST_CASE("split_label honors an explicit column") {
  const auto path = write_file("labeled.csv", "1,2,3\n4,5,6\n");
  const auto table = io::load_csv(path.string());
  const auto data = io::split_label(table, 0);
  CHECK(data.y(1) == 4.0);
  CHECK(data.x(1, 0) == 5.0);
  CHECK_THROWS_AS(io::split_label(table, 3), input_error);
}

TEST_CASE("artifact round trip is exact") {
  io::CoresetArtifact artifact;
  artifact.indices = {3, 17, 42};
  artifact.weights = {1.5, 0.123456789012345678, 40.25};
  artifact.reg_diag[0] = -2.75;
  artifact.reg_diag[5] = 1.0 / 3.0;
  artifact.lambda = 0.1;
  artifact.p = 2;
  artifact.n = 100;
  artifact.d = 3;
  artifact.kernel_rank = 15;
  artifact.sd_bound = 10.25;
  artifact.selected_count = 3;

  const std::string json = io::to_json(artifact);
  const auto back = io::artifact_from_json(json);
  CHECK(back.indices == artifact.indices);
  REQUIRE(back.weights.size() == artifact.weights.size());
  for (std::size_t i = 0; i < back.weights.size(); ++i) {
    CHECK(back.weights[i] == artifact.weights[i]);  // 17 digits round-trip binary64
  }
  CHECK(back.reg_diag == artifact.reg_diag);
  CHECK(back.lambda == artifact.lambda);
  CHECK(back.p == artifact.p);
  CHECK_FALSE(back.k.has_value());
  CHECK(back.kernel_rank == 15);
  CHECK(back.sd_bound == 10.25);

  // Serialization is deterministic.
  CHECK(io::to_json(back) == json);
}

TEST_CASE("artifact validation") {
  CHECK_THROWS_AS(io::artifact_from_json("not json"), input_error);
  CHECK_THROWS_AS(io::artifact_from_json("{}"), input_error);
  CHECK_THROWS_AS(
      io::artifact_from_json(R"({"schema_version":"1","indices":[0],"weights":[0.0],)"
                             R"("reg_diag":{},"meta":{"lambda":0,"p":2,"n":1,"d":1,)"
                             R"("kernel_rank":1,"sd_bound":1,"selected_count":1}})"),
      input_error);
  CHECK_THROWS_AS(
      io::artifact_from_json(R"({"schema_version":"0","indices":[],"weights":[],)"
                             R"("reg_diag":{},"meta":{"lambda":0,"p":2,"n":1,"d":1,)"
                             R"("kernel_rank":1,"sd_bound":1,"selected_count":0}})"),
      input_error);
}

TEST_CASE("atomic_write replaces content") {
  const fs::path path = temp_dir() / "atomic.txt";
  io::atomic_write(path.string(), "first");
  io::atomic_write(path.string(), "second");
  CHECK(io::read_file(path.string()) == "second");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("format_double round-trips binary64") {
  for (double value : {1.0 / 3.0, 1e-300, 12345.6789012345678, -0.0, 2.2250738585072014e-308}) {
    const std::string text = io::format_double(value);
    CHECK(std::strtod(text.c_str(), nullptr) == value);
  }
}
