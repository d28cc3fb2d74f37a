#pragma once

#include <hsdenoise/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsdenoise {

struct Dims {
  std::size_t n1 = 0; // vertical pixels (rows)
  std::size_t n2 = 0; // horizontal pixels (columns)
  std::size_t n3 = 0; // bands

  std::size_t count() const noexcept { return n1 * n2 * n3; }
  std::size_t band_size() const noexcept { return n1 * n2; }
  friend bool operator==(const Dims &, const Dims &) = default;
};

inline std::string to_string(const Dims &d) {
  return std::to_string(d.n1) + "x" + std::to_string(d.n2) + "x" + std::to_string(d.n3);
}

enum class Axis { Vertical, Horizontal, Spectral };

/// Dense real hyperspectral cube.
///
/// Storage is band-sequential; inside a band the vertical index varies
/// fastest, so voxel (i, j, k) lives at i + n1 * (j + n2 * k). Bands are
/// therefore contiguous and a band's columns are contiguous runs of n1 values.
class HSCube {
public:
  HSCube() = default;

  explicit HSCube(Dims dims) : dims_(dims), data_(dims.count(), 0.0) { check_dims(dims); }

  HSCube(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    check_dims(dims);
    if (data_.size() != dims.count()) {
      throw InvalidArgument("cube data length " + std::to_string(data_.size()) + " does not match dims " +
                            to_string(dims));
    }
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
      throw InvalidArgument("cube data contains non-finite values");
    }
  }

  static HSCube filled(Dims dims, double value) {
    HSCube c(dims);
    std::fill(c.data_.begin(), c.data_.end(), value);
    return c;
  }

  const Dims &dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims_.n1 * (j + dims_.n2 * k);
  }

  double &operator()(std::size_t i, std::size_t j, std::size_t k) noexcept { return data_[index(i, j, k)]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept { return data_[index(i, j, k)]; }
  double &operator[](std::size_t n) noexcept { return data_[n]; }
  double operator[](std::size_t n) const noexcept { return data_[n]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::span<double> band(std::size_t k) noexcept { return values().subspan(k * dims_.band_size(), dims_.band_size()); }
  std::span<const double> band(std::size_t k) const noexcept {
    return values().subspan(k * dims_.band_size(), dims_.band_size());
  }

  HSCube &operator+=(const HSCube &o) {
    require_same_dims(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  HSCube &operator-=(const HSCube &o) {
    require_same_dims(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  HSCube &operator*=(double a) {
    for (double &v : data_) v *= a;
    return *this;
  }

  friend HSCube operator+(HSCube a, const HSCube &b) { return a += b; }
  friend HSCube operator-(HSCube a, const HSCube &b) { return a -= b; }
  friend HSCube operator*(double a, HSCube b) { return b *= a; }

  friend bool operator==(const HSCube &, const HSCube &) = default;

  void require_same_dims(const HSCube &o) const {
    if (o.dims_ != dims_) {
      throw InvalidArgument("cube dims mismatch: " + to_string(dims_) + " vs " + to_string(o.dims_));
    }
  }

private:
  static void check_dims(const Dims &d) {
    if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0) throw InvalidArgument("cube dims must be positive, got " + to_string(d));
  }

  Dims dims_{};
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Norms and inner products. Sums run in storage order so results are
// reproducible bit for bit.

inline double dot(const HSCube &a, const HSCube &b) {
  a.require_same_dims(b);
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += a[n] * b[n];
  return acc;
}

inline double norm2(const HSCube &a) { return std::sqrt(dot(a, a)); }

inline double norm1(const HSCube &a) {
  double acc = 0.0;
  for (double v : a.values()) acc += std::abs(v);
  return acc;
}

inline double sum(const HSCube &a) { return std::accumulate(a.values().begin(), a.values().end(), 0.0); }

inline double distance2(const HSCube &a, const HSCube &b) {
  a.require_same_dims(b);
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Periodic forward differences and their adjoints.

namespace detail {

// Calls f(n, n_next) for every voxel, where n_next is the periodic successor
// along the axis.
template <class F>
void for_each_successor(const Dims &d, Axis axis, F &&f) {
  const std::size_t n1 = d.n1, n2 = d.n2, n3 = d.n3;
  const std::size_t band = n1 * n2;
  for (std::size_t k = 0; k < n3; ++k) {
    for (std::size_t j = 0; j < n2; ++j) {
      const std::size_t col = k * band + j * n1;
      for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t n = col + i;
        std::size_t next = 0;
        switch (axis) {
        case Axis::Vertical: next = col + (i + 1 == n1 ? 0 : i + 1); break;
        case Axis::Horizontal: next = k * band + (j + 1 == n2 ? 0 : j + 1) * n1 + i; break;
        case Axis::Spectral: next = (k + 1 == n3 ? 0 : k + 1) * band + j * n1 + i; break;
        }
        f(n, next);
      }
    }
  }
}

} // namespace detail

/// out[n] = x[next(n)] - x[n] with periodic wrap along the axis.
inline HSCube forward_diff(const HSCube &x, Axis axis) {
  HSCube out(x.dims());
  detail::for_each_successor(x.dims(), axis, [&](std::size_t n, std::size_t next) { out[n] = x[next] - x[n]; });
  return out;
}

/// Transpose of forward_diff: out[n] = y[prev(n)] - y[n].
inline HSCube adjoint_diff(const HSCube &y, Axis axis) {
  HSCube out(y.dims());
  // Scatter form of the transpose: row n of D has -1 at n and +1 at next(n).
  detail::for_each_successor(y.dims(), axis, [&](std::size_t n, std::size_t next) {
    out[n] -= y[n];
    out[next] += y[n];
  });
  return out;
}

/// Pair of cubes living in the range of D = (Dv; Dh).
struct SpatialPair {
  HSCube vertical;
  HSCube horizontal;
};

/// (Dv Ds x, Dh Ds x).
inline SpatialPair second_order_diff(const HSCube &x) {
  const HSCube ds = forward_diff(x, Axis::Spectral);
  return {forward_diff(ds, Axis::Vertical), forward_diff(ds, Axis::Horizontal)};
}

/// Ds^T (Dv^T p.vertical + Dh^T p.horizontal), the transpose of second_order_diff.
inline HSCube second_order_diff_adjoint(const SpatialPair &p) {
  HSCube acc = adjoint_diff(p.vertical, Axis::Vertical);
  acc += adjoint_diff(p.horizontal, Axis::Horizontal);
  return adjoint_diff(acc, Axis::Spectral);
}

} // namespace hsdenoise
