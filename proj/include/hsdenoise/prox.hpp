#pragma once

#include <hsdenoise/cube.hpp>
#include <hsdenoise/error.hpp>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace hsdenoise {

/// Elementwise clamp into [lower, upper].
inline HSCube project_box(const HSCube &x, double lower, double upper) {
  if (!(lower < upper)) throw InvalidArgument("box projection needs lower < upper");
  HSCube out(x.dims());
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = std::clamp(x[n], lower, upper);
  return out;
}

/// Projection onto {z : ||z - center||_2 <= radius}.
inline HSCube project_l2_ball(const HSCube &x, const HSCube &center, double radius) {
  if (radius < 0.0) throw InvalidArgument("l2-ball radius must be nonnegative");
  const double dist = distance2(x, center);
  if (dist <= radius) return x;
  const double scale = radius / dist;
  HSCube out(x.dims());
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = center[n] + scale * (x[n] - center[n]);
  return out;
}

namespace detail {

// Threshold tau of the Euclidean projection of y >= 0 onto the simplex
// {z >= 0, sum z = a}, using Condat's active-set scan (expected linear time).
// Requires sum(y) > a > 0 and y nonempty.
inline double simplex_threshold(std::span<const double> y, double a) {
  std::vector<double> active;
  std::vector<double> waiting;
  active.reserve(y.size());
  active.push_back(y[0]);
  double rho = y[0] - a;
  for (std::size_t n = 1; n < y.size(); ++n) {
    const double yn = y[n];
    if (yn > rho) {
      rho += (yn - rho) / static_cast<double>(active.size() + 1);
      if (rho > yn - a) {
        active.push_back(yn);
      } else {
        waiting.insert(waiting.end(), active.begin(), active.end());
        active.assign(1, yn);
        rho = yn - a;
      }
    }
  }
  for (double yn : waiting) {
    if (yn > rho) {
      active.push_back(yn);
      rho += (yn - rho) / static_cast<double>(active.size());
    }
  }
  std::size_t before = 0;
  do {
    before = active.size();
    std::size_t keep = 0;
    for (std::size_t n = 0; n < active.size(); ++n) {
      const double yn = active[n];
      if (yn > rho) {
        active[keep++] = yn;
      } else {
        const std::size_t remaining = active.size() - (n - keep) - 1;
        // remaining counts the entries still in the set after dropping yn
        if (remaining > 0) rho += (rho - yn) / static_cast<double>(remaining);
      }
    }
    active.resize(keep);
  } while (active.size() != before && !active.empty());
  return rho;
}

} // namespace detail

/// Euclidean projection onto {z : ||z||_1 <= radius}. Coordinates whose
/// magnitude equals the threshold exactly map to 0.
inline std::vector<double> project_l1_ball(std::span<const double> x, double radius) {
  if (radius < 0.0) throw InvalidArgument("l1-ball radius must be nonnegative");
  std::vector<double> out(x.begin(), x.end());
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  if (l1 <= radius) return out;
  if (radius == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  std::vector<double> mag(x.size());
  std::transform(x.begin(), x.end(), mag.begin(), [](double v) { return std::abs(v); });
  const double tau = detail::simplex_threshold(mag, radius);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double m = mag[n] - tau;
    out[n] = m > 0.0 ? std::copysign(m, x[n]) : 0.0;
  }
  return out;
}

inline HSCube project_l1_ball(const HSCube &x, double radius) {
  return HSCube(x.dims(), project_l1_ball(x.values(), radius));
}

/// Soft thresholding, the prox of gamma * ||.||_1.
inline HSCube prox_l1(const HSCube &x, double gamma) {
  HSCube out(x.dims());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double m = std::abs(x[n]) - gamma;
    out[n] = m > 0.0 ? std::copysign(m, x[n]) : 0.0;
  }
  return out;
}

/// Prox of the indicator of {0}.
template <class T>
T prox_zero_set(const T &x) {
  T out = x;
  if constexpr (std::is_same_v<T, HSCube>) {
    std::fill(out.values().begin(), out.values().end(), 0.0);
  } else {
    out.setZero();
  }
  return out;
}

/// Singular value thresholding: prox of gamma * ||.||_*.
///
/// Works on the Gram matrix of the smaller side: with M^T M = V diag(s^2) V^T,
/// the result is M V diag(max(s - gamma, 0) / s) V^T. Directions with s <= gamma
/// are dropped, so small (inaccurate) singular values never get divided by.
/// `block` only labels the failure if the eigensolver does not converge.
inline Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd &m, double gamma,
                                    std::size_t block = NumericalFailure::npos) {
  if (gamma < 0.0) throw InvalidArgument("nuclear prox threshold must be nonnegative");
  if (gamma == 0.0 || m.size() == 0) return m;
  const bool wide = m.cols() > m.rows();
  const Eigen::MatrixXd gram = wide ? Eigen::MatrixXd(m * m.transpose()) : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("eigensolver did not converge in nuclear-norm prox (block " + std::to_string(block) + ")",
                           block);
  }
  // Eigenvalues come out ascending; keep the trailing ones above gamma^2.
  const Eigen::VectorXd &lambda = eig.eigenvalues();
  const Eigen::Index q = lambda.size();
  Eigen::Index first = q;
  while (first > 0 && lambda[first - 1] > gamma * gamma) --first;
  const Eigen::Index rank = q - first;
  if (rank == 0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  Eigen::VectorXd factor(rank);
  for (Eigen::Index r = 0; r < rank; ++r) {
    const double sigma = std::sqrt(lambda[first + r]);
    factor[r] = (sigma - gamma) / sigma;
  }
  const auto basis = eig.eigenvectors().rightCols(rank);
  if (wide) return basis * factor.asDiagonal() * (basis.transpose() * m);
  return (m * basis) * factor.asDiagonal() * basis.transpose();
}

/// Singular values of m (descending).
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd &m, std::size_t block = NumericalFailure::npos) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m.cols() > m.rows() ? Eigen::MatrixXd(m.transpose()) : m);
  if (svd.info() != Eigen::Success) {
    throw NumericalFailure("SVD did not converge (block " + std::to_string(block) + ")", block);
  }
  return svd.singularValues();
}

inline double nuclear_norm(const Eigen::MatrixXd &m, std::size_t block = NumericalFailure::npos) {
  return singular_values(m, block).sum();
}

/// Prox of the conjugate through Moreau's identity:
///   prox_{gamma f*}(x) = x - gamma * prox_{f/gamma}(x/gamma).
/// `prox_f(point, scale)` must return prox_{scale * f}(point).
template <class T, class ProxF>
T prox_conjugate(const T &x, double gamma, ProxF &&prox_f) {
  if (!(gamma > 0.0)) throw InvalidArgument("conjugate prox needs gamma > 0");
  const T scaled = (1.0 / gamma) * x;
  const T p = prox_f(scaled, 1.0 / gamma);
  T out = x - gamma * p;
  return out;
}

} // namespace hsdenoise
