// stylerank/embedding.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Dense row-major embedding matrices and their on-disk format:
//
//   offset 0   "PSEM"
//   offset 4   u32 LE format version (1)
//   offset 8   u32 LE rows
//   offset 12  u32 LE dims
//   offset 16  rows*dims IEEE-754 binary32 LE, row-major
//
// Speaker/text embedding tables and per-utterance frame-feature files
// (<utterance_id>.fse) share this format.

#ifndef STYLERANK_EMBEDDING_HPP_
#define STYLERANK_EMBEDDING_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "stylerank/error.hpp"

namespace stylerank {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline constexpr char kEmbeddingMagic[4] = {'P', 'S', 'E', 'M'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dims)
      : rows_(rows), dims_(dims), values_(rows * dims, 0.0) {}
  EmbeddingMatrix(std::size_t rows, std::size_t dims,
                  std::vector<double> values)
      : rows_(rows), dims_(dims), values_(std::move(values)) {
    if (values_.size() != rows_ * dims_)
      throw ShapeError("embedding matrix: expected " +
                       std::to_string(rows_ * dims_) + " values, got " +
                       std::to_string(values_.size()));
  }

  std::size_t rows() const { return rows_; }
  std::size_t dims() const { return dims_; }
  const std::vector<double> &values() const { return values_; }

  std::span<const double> row(std::size_t i) const {
    if (i >= rows_)
      throw LookupError("embedding row " + std::to_string(i) +
                        " out of range (rows=" + std::to_string(rows_) + ")");
    return {values_.data() + i * dims_, dims_};
  }
  std::span<double> row(std::size_t i) {
    if (i >= rows_)
      throw LookupError("embedding row " + std::to_string(i) +
                        " out of range (rows=" + std::to_string(rows_) + ")");
    return {values_.data() + i * dims_, dims_};
  }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * dims_ + j];
  }
  double &operator()(std::size_t i, std::size_t j) {
    return values_[i * dims_ + j];
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> values_;
};

namespace detail {

inline void put_u32(std::vector<char> &buf, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.insert(buf.end(), b, b + 4);
}

inline std::uint32_t get_u32(const char *p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

inline std::vector<char> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path &path,
                       const std::vector<char> &bytes) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline std::vector<char> encode_embedding(const EmbeddingMatrix &m) {
  std::vector<char> buf(16 + 4 * m.values().size());
  const std::uint32_t header[3] = {kEmbeddingVersion, static_cast<std::uint32_t>(m.rows()),
                                   static_cast<std::uint32_t>(m.dims())};
  std::memcpy(buf.data(), kEmbeddingMagic, 4);
  std::memcpy(buf.data() + 4, header, sizeof header);
  char *p = buf.data() + 16;
  for (double v : m.values()) {
    const float f = static_cast<float>(v);
    std::memcpy(p, &f, 4);
    p += 4;
  }
  return buf;
}

inline EmbeddingMatrix decode_embedding(std::span<const char> bytes,
                                        const std::string &what = "embedding") {
  if (bytes.size() < 16) throw IoError(what + ": truncated header");
  if (std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0)
    throw IoError(what + ": bad magic");
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  if (version != kEmbeddingVersion)
    throw IoError(what + ": unsupported version " + std::to_string(version));
  const std::uint64_t rows = detail::get_u32(bytes.data() + 8);
  const std::uint64_t dims = detail::get_u32(bytes.data() + 12);
  if (bytes.size() != 16 + 4 * rows * dims)
    throw IoError(what + ": expected " + std::to_string(16 + 4 * rows * dims) +
                  " bytes, found " + std::to_string(bytes.size()));
  std::vector<double> values(rows * dims);
  const char *p = bytes.data() + 16;
  for (auto &v : values) {
    float f;
    std::memcpy(&f, p, 4);
    p += 4;
    if (!std::isfinite(f)) throw ValidationError(what + ": non-finite value");
    v = f;
  }
  return EmbeddingMatrix(rows, dims, std::move(values));
}

inline EmbeddingMatrix load_embedding(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  return decode_embedding(bytes, path.string());
}

inline void save_embedding(const std::filesystem::path &path,
                           const EmbeddingMatrix &m) {
  detail::write_file(path, encode_embedding(m));
}

}  // namespace stylerank

#endif  // STYLERANK_EMBEDDING_HPP_
