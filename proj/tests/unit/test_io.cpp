// SPDX-License-Identifier: MIT
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rcp/io.hpp"
#include "support/oracles.hpp"

using namespace rcp;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  return fs::temp_directory_path() / ("rcp_io_test_" + name);
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spit(const fs::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("tensor files round-trip bit-exactly") {
  const TensorXd t = oracle::random_tensor({5, 7, 3});
  const fs::path path = tmp("tensor.dten");
  io::write_tensor(path, t);
  const TensorXd back = io::read_tensor(path);
  CHECK(back.shape() == t.shape());
  CHECK(back.values() == t.values());
}

TEST_CASE("rewriting a tensor file is byte-identical") {
  const TensorXd t = oracle::random_tensor({4, 6, 5, 2});
  const fs::path a = tmp("tensor_a.dten");
  const fs::path b = tmp("tensor_b.dten");
  io::write_tensor(a, t);
  io::write_tensor(b, io::read_tensor(a));
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("order-1 tensors are valid files") {
  const TensorXd t = oracle::random_tensor({9});
  const fs::path path = tmp("vector.dten");
  io::write_tensor(path, t);
  CHECK(io::read_tensor(path).values() == t.values());
}

TEST_CASE("model files store the canonical form and round-trip bit-exactly") {
  const KruskalXd k = oracle::random_model({6, 4, 5}, 3);
  const fs::path a = tmp("model_a.kten");
  const fs::path b = tmp("model_b.kten");
  io::write_kruskal(a, k);
  const KruskalXd back = io::read_kruskal(a);

  const KruskalXd canonical = normalize(k);
  CHECK(back.weights == canonical.weights);
  for (std::size_t m = 0; m < back.factors.size(); ++m)
    CHECK(back.factors[m] == canonical.factors[m]);

  io::write_kruskal(b, back);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("corrupt magic bytes are rejected") {
  const fs::path path = tmp("magic.dten");
  io::write_tensor(path, oracle::random_tensor({3, 3}));
  std::string bytes = slurp(path);
  bytes[0] = 'X';
  spit(path, bytes);
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);
}

TEST_CASE("unsupported version and dtype are rejected") {
  const fs::path path = tmp("version.dten");
  io::write_tensor(path, oracle::random_tensor({3, 3}));
  std::string bytes = slurp(path);

  std::string wrong_version = bytes;
  wrong_version[4] = 2;
  spit(path, wrong_version);
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);

  std::string wrong_dtype = bytes;
  wrong_dtype[5] = 1;
  spit(path, wrong_dtype);
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);
}

TEST_CASE("truncated payloads are rejected") {
  const fs::path path = tmp("short.dten");
  io::write_tensor(path, oracle::random_tensor({4, 4}));
  std::string bytes = slurp(path);
  bytes.resize(bytes.size() - 5);
  spit(path, bytes);
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);
}

TEST_CASE("trailing bytes are rejected") {
  const fs::path path = tmp("long.dten");
  io::write_tensor(path, oracle::random_tensor({4, 4}));
  spit(path, slurp(path) + "tail");
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);

  const fs::path kpath = tmp("long.kten");
  io::write_kruskal(kpath, oracle::random_model({3, 3, 3}, 2));
  spit(kpath, slurp(kpath) + "x");
  CHECK_THROWS_AS(io::read_kruskal(kpath), io::IoError);
}

TEST_CASE("non-finite payload values are rejected on read") {
  const fs::path path = tmp("nan.dten");
  io::write_tensor(path, oracle::random_tensor({2, 2}));
  std::string bytes = slurp(path);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bytes.replace(bytes.size() - 8, 8, reinterpret_cast<const char*>(&nan), 8);
  spit(path, bytes);
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);
}

TEST_CASE("missing files and zero extents are rejected") {
  CHECK_THROWS_AS(io::read_tensor(tmp("missing.dten")), io::IoError);

  const fs::path path = tmp("extent.dten");
  io::write_tensor(path, oracle::random_tensor({3, 3}));
  std::string bytes = slurp(path);
  for (int b = 0; b < 8; ++b) bytes[7 + b] = 0;  // first extent -> 0
  spit(path, bytes);
  CHECK_THROWS_AS(io::read_tensor(path), io::IoError);
}

TEST_CASE("model files reject the wrong magic") {
  const fs::path path = tmp("cross.kten");
  io::write_tensor(path, oracle::random_tensor({3, 3}));
  CHECK_THROWS_AS(io::read_kruskal(path), io::IoError);
}

TEST_CASE("trace CSV uses the documented header") {
  FitTrace trace;
  trace.entries = {{1, 0.25, 0.001}, {2, 0.75, 0.002}};
  const fs::path path = tmp("trace.csv");
  io::write_trace_csv(path, trace);

  std::ifstream is(path);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "iteration,fit,seconds");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("tensor CSV export lists one value per line") {
  const TensorXd t = oracle::random_tensor({3, 4});
  const fs::path path = tmp("flat.csv");
  io::write_tensor_csv(path, t);

  std::ifstream is(path);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "value");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 12);
}
