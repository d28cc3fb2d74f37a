#pragma once

#include <hsdenoise/cube.hpp>
#include <hsdenoise/error.hpp>
#include <hsdenoise/solver.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace hsdenoise {

struct NoiseSpec {
  double gaussian_sigma = 0.0;
  double sparse_rate = 0.0;
  double stripe_rate = 0.0;
  double stripe_amplitude = 0.5;
  double rho = 0.95;
  std::uint64_t seed = 0;

  void validate() const {
    if (gaussian_sigma < 0.0) throw InvalidArgument("gaussian sigma must be nonnegative");
    if (sparse_rate < 0.0 || sparse_rate > 1.0) throw InvalidArgument("sparse rate must lie in [0, 1]");
    if (stripe_rate < 0.0 || stripe_rate > 1.0) throw InvalidArgument("stripe rate must lie in [0, 1]");
    if (!(stripe_amplitude > 0.0)) throw InvalidArgument("stripe amplitude must be positive");
    if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("rho must lie in (0, 1]");
  }
};

/// The six mixed-noise scenarios (1-based numbering).
inline NoiseSpec noise_case(int number, std::uint64_t seed = 0) {
  NoiseSpec spec;
  spec.seed = seed;
  switch (number) {
  case 1: spec.gaussian_sigma = 0.05, spec.sparse_rate = 0.05; break;
  case 2: spec.gaussian_sigma = 0.1, spec.sparse_rate = 0.05; break;
  case 3: spec.gaussian_sigma = 0.05, spec.stripe_rate = 0.05; break;
  case 4: spec.gaussian_sigma = 0.1, spec.stripe_rate = 0.05; break;
  case 5: spec.gaussian_sigma = 0.05, spec.sparse_rate = 0.05, spec.stripe_rate = 0.05; break;
  case 6: spec.gaussian_sigma = 0.1, spec.sparse_rate = 0.05, spec.stripe_rate = 0.05; break;
  default: throw InvalidArgument("noise case must be 1..6, got " + std::to_string(number));
  }
  return spec;
}

namespace detail {

// Independent generator per noise component so that toggling one component
// leaves the others' samples untouched.
inline std::mt19937_64 noise_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

enum : std::uint32_t { kSparseStream = 1, kStripeStream = 2, kGaussianStream = 3 };

// First `count` entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> choose_without_replacement(std::size_t n, std::size_t count, std::mt19937_64 &rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t m = 0; m < count; ++m) {
    std::uniform_int_distribution<std::size_t> pick(m, n - 1);
    std::swap(idx[m], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

inline HSCube gaussian_field(Dims dims, double sigma, std::uint64_t seed) {
  HSCube n(dims);
  if (sigma == 0.0) return n;
  auto rng = noise_stream(seed, kGaussianStream);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double &v : n.values()) v = normal(rng);
  return n;
}

} // namespace detail

/// u + n with n i.i.d. N(0, sigma^2).
inline HSCube add_gaussian(const HSCube &u, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidArgument("gaussian sigma must be nonnegative");
  return u + detail::gaussian_field(u.dims(), sigma, seed);
}

struct SparseCorruption {
  HSCube corrupted;
  HSCube s_true; // corrupted - u on the replaced voxels, zero elsewhere
  std::vector<std::size_t> replaced;
};

/// Replaces round(rate * N) voxels, chosen without replacement, by 0 or 1.
inline SparseCorruption add_salt_pepper(const HSCube &u, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw InvalidArgument("salt-and-pepper rate must lie in [0, 1]");
  for (double v : u.values()) {
    if (v < 0.0 || v > 1.0) throw InvalidArgument("salt-and-pepper needs a cube normalized to [0, 1]");
  }
  SparseCorruption out{u, HSCube(u.dims()), {}};
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(u.size())));
  if (count == 0) return out;
  auto rng = detail::noise_stream(seed, detail::kSparseStream);
  out.replaced = detail::choose_without_replacement(u.size(), count, rng);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t n : out.replaced) {
    const double value = coin(rng) ? 1.0 : 0.0;
    out.s_true[n] = value - u[n];
    out.corrupted[n] = value;
  }
  return out;
}

struct StripeCorruption {
  HSCube corrupted;
  HSCube t_true; // constant along every column, so Dv t_true = 0
};

/// Adds one Uniform[-amplitude, amplitude] offset to every row of
/// round(rate * n2 * n3) randomly chosen (column, band) pairs.
inline StripeCorruption add_stripes(const HSCube &u, double rate, double amplitude, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw InvalidArgument("stripe rate must lie in [0, 1]");
  const Dims d = u.dims();
  StripeCorruption out{u, HSCube(d)};
  const std::size_t pairs = d.n2 * d.n3;
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(pairs)));
  if (count == 0) return out;
  auto rng = detail::noise_stream(seed, detail::kStripeStream);
  const auto picked = detail::choose_without_replacement(pairs, count, rng);
  std::uniform_real_distribution<double> level(-amplitude, amplitude);
  for (std::size_t p : picked) {
    const std::size_t j = p % d.n2;
    const std::size_t k = p / d.n2;
    const double offset = level(rng);
    for (std::size_t i = 0; i < d.n1; ++i) {
      out.t_true(i, j, k) = offset;
      out.corrupted(i, j, k) += offset;
    }
  }
  return out;
}

/// Radii that just contain the expected noise energy, shrunk by rho:
///   alpha = rho N p_s / 2
///   beta  = rho 0.5 N p_t (1 - p_s) / 2
///   eps   = rho sqrt(sigma^2 N (1 - p_s))
inline Radii calibrate_radii(const NoiseSpec &spec, std::size_t n_total) {
  spec.validate();
  const double n = static_cast<double>(n_total);
  const double ps = spec.sparse_rate, pt = spec.stripe_rate, sigma = spec.gaussian_sigma;
  return {spec.rho * n * ps / 2.0, spec.rho * 0.5 * n * pt * (1.0 - ps) / 2.0,
          spec.rho * std::sqrt(sigma * sigma * n * (1.0 - ps))};
}

struct Degraded {
  HSCube observed;
  HSCube s_true;
  HSCube t_true;
  HSCube n_true;
};

/// observed = ((u + s_true) + t_true) + n_true, evaluated in that order.
///
/// Salt-and-pepper replaces voxels of the clean cube; Gaussian noise is only
/// applied to voxels that were not replaced.
inline Degraded degrade(const HSCube &clean, const NoiseSpec &spec) {
  spec.validate();
  const SparseCorruption sparse = add_salt_pepper(clean, spec.sparse_rate, spec.seed);
  const StripeCorruption stripes = add_stripes(clean, spec.stripe_rate, spec.stripe_amplitude, spec.seed);
  HSCube n = detail::gaussian_field(clean.dims(), spec.gaussian_sigma, spec.seed);
  for (std::size_t m : sparse.replaced) n[m] = 0.0;
  Degraded out{HSCube(clean.dims()), sparse.s_true, stripes.t_true, std::move(n)};
  for (std::size_t m = 0; m < clean.size(); ++m) {
    out.observed[m] = ((clean[m] + out.s_true[m]) + out.t_true[m]) + out.n_true[m];
  }
  return out;
}

} // namespace hsdenoise
