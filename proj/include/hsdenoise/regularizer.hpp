#pragma once

#include <hsdenoise/cube.hpp>
#include <hsdenoise/error.hpp>
#include <hsdenoise/prox.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace hsdenoise {

/// Spatial block size and stride. The block always spans every band.
struct BlockGeometry {
  std::size_t block_h = 10;
  std::size_t block_w = 10;
  std::size_t stride_h = 10;
  std::size_t stride_w = 10;

  static BlockGeometry tiling(std::size_t h, std::size_t w) { return {h, w, h, w}; }
  friend bool operator==(const BlockGeometry &, const BlockGeometry &) = default;
};

/// A geometry bound to concrete cube dims: the list of block origins.
///
/// Origins sit on the stride grid 0, stride, 2*stride, ... below n. A block
/// reaching past the last row or column wraps around to the opposite side.
class BlockLayout {
public:
  BlockLayout(BlockGeometry geom, Dims dims) : geom_(geom), dims_(dims) {
    if (geom.block_h == 0 || geom.block_w == 0 || geom.stride_h == 0 || geom.stride_w == 0) {
      throw InvalidArgument("block size and stride must be positive");
    }
    if (geom.block_h > dims.n1 || geom.block_w > dims.n2) {
      throw InvalidArgument("block " + std::to_string(geom.block_h) + "x" + std::to_string(geom.block_w) +
                            " does not fit spatial extent " + std::to_string(dims.n1) + "x" +
                            std::to_string(dims.n2));
    }
    for (std::size_t c = 0; c < dims.n2; c += geom.stride_w) {
      for (std::size_t r = 0; r < dims.n1; r += geom.stride_h) origins_.emplace_back(r, c);
    }
  }

  const BlockGeometry &geometry() const noexcept { return geom_; }
  const Dims &dims() const noexcept { return dims_; }
  std::size_t count() const noexcept { return origins_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>> &origins() const noexcept { return origins_; }

  std::size_t rows() const noexcept { return geom_.block_h * geom_.block_w; }
  std::size_t cols() const noexcept { return 2 * dims_.n3; }

  /// Number of blocks covering each spatial position (vertical index fastest).
  std::vector<std::size_t> coverage() const {
    std::vector<std::size_t> hits(dims_.n1 * dims_.n2, 0);
    for_each_pixel([&](std::size_t, std::size_t, std::size_t pixel) { ++hits[pixel]; });
    return hits;
  }

  /// Largest number of blocks sharing one spatial position.
  std::size_t max_coverage() const {
    const auto hits = coverage();
    return *std::max_element(hits.begin(), hits.end());
  }

  /// Visits (block, row-in-block, pixel offset in a band) for every block entry.
  template <class F>
  void for_each_pixel(F &&f) const {
    const std::size_t n1 = dims_.n1, n2 = dims_.n2;
    for (std::size_t b = 0; b < origins_.size(); ++b) {
      const auto [r0, c0] = origins_[b];
      for (std::size_t dj = 0; dj < geom_.block_w; ++dj) {
        const std::size_t j = (c0 + dj) % n2;
        for (std::size_t di = 0; di < geom_.block_h; ++di) {
          const std::size_t i = (r0 + di) % n1;
          f(b, di + geom_.block_h * dj, i + n1 * j);
        }
      }
    }
  }

private:
  BlockGeometry geom_;
  Dims dims_;
  std::vector<std::pair<std::size_t, std::size_t>> origins_;
};

/// The (block_h*block_w) x (2*n3) matrix of one block. Column 2k holds the
/// vectorized Dv Ds slice of band k, column 2k+1 the Dh Ds slice. Rows follow
/// the cube's vertical-fastest order. `index` is zero-based.
struct StructureTensorBlock {
  Eigen::MatrixXd matrix;
  std::size_t index = 0;
};

inline std::vector<StructureTensorBlock> extract_blocks(const SpatialPair &diffs, const BlockLayout &layout) {
  const Dims &d = layout.dims();
  if (diffs.vertical.dims() != d || diffs.horizontal.dims() != d) {
    throw InvalidArgument("difference cubes do not match block layout dims " + to_string(d));
  }
  std::vector<StructureTensorBlock> blocks(layout.count());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].matrix.resize(static_cast<Eigen::Index>(layout.rows()), static_cast<Eigen::Index>(layout.cols()));
    blocks[b].index = b;
  }
  const std::size_t band = d.band_size();
  const auto v = diffs.vertical.values();
  const auto h = diffs.horizontal.values();
  layout.for_each_pixel([&](std::size_t b, std::size_t row, std::size_t pixel) {
    Eigen::MatrixXd &m = blocks[b].matrix;
    const auto r = static_cast<Eigen::Index>(row);
    for (std::size_t k = 0; k < d.n3; ++k) {
      m(r, static_cast<Eigen::Index>(2 * k)) = v[k * band + pixel];
      m(r, static_cast<Eigen::Index>(2 * k + 1)) = h[k * band + pixel];
    }
  });
  return blocks;
}

/// Transpose of extract_blocks: block entries are summed back onto the voxels
/// they came from.
inline SpatialPair scatter_blocks_adjoint(const std::vector<StructureTensorBlock> &blocks, const BlockLayout &layout) {
  if (blocks.size() != layout.count()) {
    throw InvalidArgument("expected " + std::to_string(layout.count()) + " blocks, got " +
                          std::to_string(blocks.size()));
  }
  for (const auto &blk : blocks) {
    if (static_cast<std::size_t>(blk.matrix.rows()) != layout.rows() ||
        static_cast<std::size_t>(blk.matrix.cols()) != layout.cols()) {
      throw InvalidArgument("block matrix has wrong shape");
    }
  }
  const Dims &d = layout.dims();
  SpatialPair out{HSCube(d), HSCube(d)};
  const std::size_t band = d.band_size();
  auto v = out.vertical.values();
  auto h = out.horizontal.values();
  layout.for_each_pixel([&](std::size_t b, std::size_t row, std::size_t pixel) {
    const Eigen::MatrixXd &m = blocks[b].matrix;
    const auto r = static_cast<Eigen::Index>(row);
    for (std::size_t k = 0; k < d.n3; ++k) {
      v[k * band + pixel] += m(r, static_cast<Eigen::Index>(2 * k));
      h[k * band + pixel] += m(r, static_cast<Eigen::Index>(2 * k + 1));
    }
  });
  return out;
}

/// Sum over blocks of the nuclear norms of the structure tensors of u.
inline double s3ttv_value(const HSCube &u, const BlockLayout &layout) {
  const auto blocks = extract_blocks(second_order_diff(u), layout);
  double total = 0.0;
  for (const auto &blk : blocks) total += nuclear_norm(blk.matrix, blk.index);
  return total;
}

inline double s3ttv_value(const HSCube &u, const BlockGeometry &geom) {
  return s3ttv_value(u, BlockLayout(geom, u.dims()));
}

/// ||Dv Ds u||_1 + ||Dh Ds u||_1.
inline double sstv_value(const HSCube &u) {
  const SpatialPair p = second_order_diff(u);
  return norm1(p.vertical) + norm1(p.horizontal);
}

} // namespace hsdenoise
