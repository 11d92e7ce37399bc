// SPDX-License-Identifier: MIT
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "rcp/kruskal.hpp"
#include "rcp/solve.hpp"
#include "rcp/tensor.hpp"

namespace rcp::io {

static_assert(std::endian::native == std::endian::little,
              "file formats are defined little-endian");

inline constexpr char kTensorMagic[4] = {'D', 'T', 'E', 'N'};
inline constexpr char kModelMagic[4] = {'K', 'T', 'E', 'N'};
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::uint8_t kDtypeFloat64 = 0;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw IoError("write failed");
}

inline void read_bytes(std::istream& is, void* p, std::size_t n,
                       const std::string& what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw IoError("truncated file while reading " + what);
}

inline void write_u64(std::ostream& os, std::uint64_t v) { write_bytes(os, &v, 8); }

inline std::uint64_t read_u64(std::istream& is, const std::string& what) {
  std::uint64_t v = 0;
  read_bytes(is, &v, 8, what);
  return v;
}

inline void expect_eof(std::istream& is, const std::string& what) {
  char extra = 0;
  is.read(&extra, 1);
  if (is.gcount() != 0) throw IoError(what + ": trailing bytes after payload");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

/// Writes an Eigen matrix row by row (files are row-major).
inline void write_matrix(std::ostream& os, const MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      write_bytes(os, &v, 8);
    }
}

inline void read_matrix(std::istream& is, MatrixXd& m, const std::string& what) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double v = 0;
      read_bytes(is, &v, 8, what);
      m(i, j) = v;
    }
}

}  // namespace detail

inline void write_tensor(const std::filesystem::path& path, const TensorXd& t) {
  if (t.order() > 255) throw IoError("write_tensor: order exceeds 255");
  auto os = detail::open_out(path);
  detail::write_bytes(os, kTensorMagic, 4);
  detail::write_bytes(os, &kFormatVersion, 1);
  detail::write_bytes(os, &kDtypeFloat64, 1);
  const auto order = static_cast<std::uint8_t>(t.order());
  detail::write_bytes(os, &order, 1);
  for (Index e : t.shape()) detail::write_u64(os, static_cast<std::uint64_t>(e));
  detail::write_bytes(os, t.data(), static_cast<std::size_t>(t.size()) * 8);
}

inline TensorXd read_tensor(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  char magic[4] = {};
  detail::read_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, kTensorMagic, 4) != 0)
    throw IoError("read_tensor: bad magic, not a tensor file");
  std::uint8_t version = 0, dtype = 0, order = 0;
  detail::read_bytes(is, &version, 1, "version");
  if (version != kFormatVersion)
    throw IoError("read_tensor: unsupported version " + std::to_string(version));
  detail::read_bytes(is, &dtype, 1, "dtype");
  if (dtype != kDtypeFloat64)
    throw IoError("read_tensor: unsupported dtype " + std::to_string(dtype));
  detail::read_bytes(is, &order, 1, "order");
  if (order == 0) throw IoError("read_tensor: order must be at least 1");
  Shape shape(order);
  for (auto& e : shape) {
    const std::uint64_t v = detail::read_u64(is, "extent");
    if (v == 0 || v > static_cast<std::uint64_t>(std::numeric_limits<Index>::max()))
      throw IoError("read_tensor: invalid extent");
    e = static_cast<Index>(v);
  }
  Index total = 0;
  try {
    total = shape_size(shape);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("read_tensor: ") + e.what());
  }
  VectorXd values(total);
  detail::read_bytes(is, values.data(), static_cast<std::size_t>(total) * 8, "payload");
  detail::expect_eof(is, "read_tensor");
  if (!values.allFinite()) throw IoError("read_tensor: non-finite values");
  return TensorXd(std::move(shape), std::move(values));
}

/// The stored model is canonicalized on the way out, so files always hold
/// the normalized form.
inline void write_kruskal(const std::filesystem::path& path, const KruskalXd& k) {
  const KruskalXd canonical = normalize(k);
  auto os = detail::open_out(path);
  detail::write_bytes(os, kModelMagic, 4);
  detail::write_bytes(os, &kFormatVersion, 1);
  detail::write_u64(os, static_cast<std::uint64_t>(canonical.rank()));
  detail::write_u64(os, static_cast<std::uint64_t>(canonical.order()));
  for (const auto& f : canonical.factors)
    detail::write_u64(os, static_cast<std::uint64_t>(f.rows()));
  detail::write_bytes(os, canonical.weights.data(),
                      static_cast<std::size_t>(canonical.rank()) * 8);
  for (const auto& f : canonical.factors) detail::write_matrix(os, f);
}

inline KruskalXd read_kruskal(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  char magic[4] = {};
  detail::read_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    throw IoError("read_kruskal: bad magic, not a model file");
  std::uint8_t version = 0;
  detail::read_bytes(is, &version, 1, "version");
  if (version != kFormatVersion)
    throw IoError("read_kruskal: unsupported version " + std::to_string(version));
  const std::uint64_t rank = detail::read_u64(is, "rank");
  const std::uint64_t order = detail::read_u64(is, "order");
  if (rank == 0 || order == 0 || rank > (1u << 20) || order > 255)
    throw IoError("read_kruskal: implausible rank or order");
  KruskalXd k;
  k.weights.resize(static_cast<Index>(rank));
  k.factors.resize(order);
  Shape shape(order);
  for (auto& e : shape) {
    const std::uint64_t v = detail::read_u64(is, "extent");
    if (v == 0 || v > static_cast<std::uint64_t>(std::numeric_limits<Index>::max()))
      throw IoError("read_kruskal: invalid extent");
    e = static_cast<Index>(v);
  }
  detail::read_bytes(is, k.weights.data(), rank * 8, "weights");
  for (std::size_t m = 0; m < order; ++m) {
    k.factors[m].resize(shape[m], static_cast<Index>(rank));
    detail::read_matrix(is, k.factors[m], "factor");
  }
  detail::expect_eof(is, "read_kruskal");
  for (const auto& f : k.factors)
    if (!f.allFinite()) throw IoError("read_kruskal: non-finite factor values");
  if (!k.weights.allFinite()) throw IoError("read_kruskal: non-finite weights");
  return k;
}

inline void write_trace_csv(const std::filesystem::path& path, const FitTrace& trace) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << std::setprecision(17) << "iteration,fit,seconds\n";
  for (const auto& e : trace.entries)
    os << e.iteration << ',' << e.fit << ',' << e.seconds << '\n';
}

/// Flattened row-major dump, one value per line; the escape hatch for
/// external plotting tools.
inline void write_tensor_csv(const std::filesystem::path& path, const TensorXd& t) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << std::setprecision(17) << "value\n";
  for (Index i = 0; i < t.size(); ++i) os << t.values()(i) << '\n';
}

}  // namespace rcp::io
