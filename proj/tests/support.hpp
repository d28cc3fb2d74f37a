#pragma once

#include <hsdenoise/cube.hpp>

#include <filesystem>
#include <random>
#include <string>

namespace hsd_test {

inline hsdenoise::HSCube random_cube(hsdenoise::Dims d, std::mt19937_64 &rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  hsdenoise::HSCube c(d);
  for (std::size_t n = 0; n < c.size(); ++n) c[n] = unif(rng);
  return c;
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("hsdenoise_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace hsd_test
