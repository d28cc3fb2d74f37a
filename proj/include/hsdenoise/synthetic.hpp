#pragma once

#include <hsdenoise/cube.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace hsdenoise {

/// Spatially piecewise-constant test cube with smooth per-region spectra.
///
/// A background plus `regions` axis-aligned rectangles are painted in order;
/// each material gets a spectrum a + b sin(2 pi f k / n3 + phase) that stays
/// inside [0.1, 0.9].
inline HSCube make_piecewise_cube(Dims dims, std::uint64_t seed = 7, std::size_t regions = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::size_t> label(dims.n1 * dims.n2, 0);
  for (std::size_t r = 1; r <= regions; ++r) {
    const auto i0 = static_cast<std::size_t>(unit(rng) * 0.7 * static_cast<double>(dims.n1));
    const auto j0 = static_cast<std::size_t>(unit(rng) * 0.7 * static_cast<double>(dims.n2));
    const auto h = 1 + static_cast<std::size_t>((0.2 + 0.4 * unit(rng)) * static_cast<double>(dims.n1));
    const auto w = 1 + static_cast<std::size_t>((0.2 + 0.4 * unit(rng)) * static_cast<double>(dims.n2));
    for (std::size_t j = j0; j < std::min(dims.n2, j0 + w); ++j) {
      for (std::size_t i = i0; i < std::min(dims.n1, i0 + h); ++i) label[i + dims.n1 * j] = r;
    }
  }

  std::vector<std::vector<double>> spectra(regions + 1, std::vector<double>(dims.n3));
  for (auto &spec : spectra) {
    const double base = 0.3 + 0.4 * unit(rng);
    const double amp = 0.05 + 0.15 * unit(rng);
    const double freq = 0.5 + 1.5 * unit(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    for (std::size_t k = 0; k < dims.n3; ++k) {
      const double x = static_cast<double>(k) / static_cast<double>(dims.n3);
      spec[k] = std::clamp(base + amp * std::sin(2.0 * std::numbers::pi * freq * x + phase), 0.1, 0.9);
    }
  }

  HSCube cube(dims);
  for (std::size_t k = 0; k < dims.n3; ++k) {
    for (std::size_t j = 0; j < dims.n2; ++j) {
      for (std::size_t i = 0; i < dims.n1; ++i) cube(i, j, k) = spectra[label[i + dims.n1 * j]][k];
    }
  }
  return cube;
}

} // namespace hsdenoise
