#pragma once

#include <hsdenoise/cube.hpp>
#include <hsdenoise/error.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace hsdenoise {

// Cube file layout (all integers little-endian):
//
//   offset  size  field
//   0       4     magic "HSC1"
//   4       4     n1 (u32)
//   8       4     n2 (u32)
//   12      4     n3 (u32)
//   16      1     dtype code, 1 = float64 LE
//   17      3     reserved, zero
//   20      8*N   payload in cube storage order
inline constexpr std::array<char, 4> kCubeMagic{'H', 'S', 'C', '1'};
inline constexpr std::uint8_t kDtypeFloat64 = 1;
inline constexpr std::size_t kCubeHeaderSize = 20;

namespace detail {

inline void put_u32(std::vector<unsigned char> &buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f64(std::vector<unsigned char> &buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu));
}

inline double get_f64(const unsigned char *p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<double>(bits);
}

inline std::vector<unsigned char> read_all(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::Open, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_all(const std::filesystem::path &path, const std::vector<unsigned char> &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::Write, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoErrorKind::Write, "failed writing " + path.string());
}

} // namespace detail

inline std::vector<unsigned char> encode_cube(const HSCube &cube) {
  const Dims &d = cube.dims();
  std::vector<unsigned char> buf;
  buf.reserve(kCubeHeaderSize + 8 * cube.size());
  buf.insert(buf.end(), kCubeMagic.begin(), kCubeMagic.end());
  detail::put_u32(buf, static_cast<std::uint32_t>(d.n1));
  detail::put_u32(buf, static_cast<std::uint32_t>(d.n2));
  detail::put_u32(buf, static_cast<std::uint32_t>(d.n3));
  buf.push_back(kDtypeFloat64);
  buf.insert(buf.end(), 3, 0);
  for (double v : cube.values()) detail::put_f64(buf, v);
  return buf;
}

inline HSCube decode_cube(const std::vector<unsigned char> &bytes, const std::string &origin = "<memory>") {
  if (bytes.size() < kCubeHeaderSize) {
    if (bytes.size() >= 4 && !std::equal(kCubeMagic.begin(), kCubeMagic.end(), bytes.begin())) {
      throw IoError(IoErrorKind::MagicMismatch, origin + ": not a cube file (bad magic)");
    }
    throw IoError(IoErrorKind::Truncated, origin + ": header truncated");
  }
  if (!std::equal(kCubeMagic.begin(), kCubeMagic.end(), bytes.begin())) {
    throw IoError(IoErrorKind::MagicMismatch, origin + ": not a cube file (bad magic)");
  }
  const Dims d{detail::get_u32(&bytes[4]), detail::get_u32(&bytes[8]), detail::get_u32(&bytes[12])};
  if (bytes[16] != kDtypeFloat64) {
    throw IoError(IoErrorKind::UnsupportedDtype, origin + ": unsupported dtype code " + std::to_string(bytes[16]));
  }
  if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0) {
    throw IoError(IoErrorKind::Truncated, origin + ": header declares an empty cube");
  }
  const std::size_t expected = 8 * d.count();
  const std::size_t payload = bytes.size() - kCubeHeaderSize;
  if (payload < expected) {
    throw IoError(IoErrorKind::Truncated, origin + ": payload has " + std::to_string(payload) + " bytes, expected " +
                                              std::to_string(expected));
  }
  if (payload > expected) {
    throw IoError(IoErrorKind::TrailingData, origin + ": " + std::to_string(payload - expected) +
                                                 " unexpected bytes after payload");
  }
  std::vector<double> data(d.count());
  for (std::size_t n = 0; n < data.size(); ++n) {
    data[n] = detail::get_f64(&bytes[kCubeHeaderSize + 8 * n]);
    if (!std::isfinite(data[n])) {
      throw IoError(IoErrorKind::NonFinite, origin + ": non-finite value at element " + std::to_string(n));
    }
  }
  return HSCube(d, std::move(data));
}

inline HSCube read_cube(const std::filesystem::path &path) {
  return decode_cube(detail::read_all(path), path.string());
}

inline void write_cube(const HSCube &cube, const std::filesystem::path &path) {
  detail::write_all(path, encode_cube(cube));
}

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples) of one band.
/// Values are multiplied by `scale`, clamped to [0, 1] and mapped to
/// round-half-up(v * 65535). Image rows are the cube's vertical axis.
inline void export_band_pgm(const HSCube &cube, std::size_t band, const std::filesystem::path &path,
                            std::optional<double> scale = std::nullopt) {
  const Dims &d = cube.dims();
  if (band >= d.n3) {
    throw InvalidArgument("band " + std::to_string(band) + " out of range (cube has " + std::to_string(d.n3) + ")");
  }
  const std::string header = "P5\n" + std::to_string(d.n2) + " " + std::to_string(d.n1) + "\n65535\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + 2 * d.band_size());
  const double a = scale.value_or(1.0);
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      const double v = std::clamp(cube(i, j, band) * a, 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::floor(v * 65535.0 + 0.5));
      bytes.push_back(static_cast<unsigned char>(q >> 8));
      bytes.push_back(static_cast<unsigned char>(q & 0xFFu));
    }
  }
  detail::write_all(path, bytes);
}

} // namespace hsdenoise
