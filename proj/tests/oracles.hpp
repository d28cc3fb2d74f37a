#pragma once

// Slow, independent reference implementations used by the unit tests and the
// acceptance run. None of these call into the library's own algorithms.

#include <hsdenoise/cube.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace hsd_oracle {

// Sort-and-scan threshold: the largest k with u_k > (sum_{i<=k} u_i - r) / k.
inline std::vector<double> l1_ball_by_sorting(const std::vector<double> &x, double radius) {
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  if (l1 <= radius) return x;
  std::vector<double> u(x.size());
  std::transform(x.begin(), x.end(), u.begin(), [](double v) { return std::abs(v); });
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - radius) / static_cast<double>(k + 1);
    if (u[k] > t) theta = t;
  }
  std::vector<double> out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = std::copysign(std::max(std::abs(x[n]) - theta, 0.0), x[n]);
  return out;
}

// Singular value thresholding through a two-sided Jacobi SVD.
inline Eigen::MatrixXd svt_jacobi(const Eigen::MatrixXd &m, double gamma) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = (svd.singularValues().array() - gamma).cwiseMax(0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

// Optimality certificate for Z = prox_{gamma ||.||_*}(M): G = (M - Z) / gamma
// must be a subgradient of the nuclear norm at Z, i.e. G = U1 V1^T + W with
// U1^T W = 0, W V1 = 0 and ||W||_2 <= 1, where Z = U1 S1 V1^T. Returns the
// largest violation of those conditions.
inline double nuclear_certificate_violation(const Eigen::MatrixXd &m, const Eigen::MatrixXd &z, double gamma) {
  const Eigen::MatrixXd g = (m - z) / gamma;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd &s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > 1e-9) ++r;
  const Eigen::MatrixXd u1 = svd.matrixU().leftCols(r), v1 = svd.matrixV().leftCols(r);
  const Eigen::MatrixXd w = g - u1 * v1.transpose();
  double viol = std::max((u1.transpose() * w).norm(), (w * v1).norm());
  if (w.size() > 0) viol = std::max(viol, Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues()[0] - 1.0);
  return viol;
}

// Projection onto the unit spectral-norm ball (the conjugate prox of ||.||_*).
inline Eigen::MatrixXd spectral_ball(const Eigen::MatrixXd &m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.singularValues().cwiseMin(1.0).asDiagonal() * svd.matrixV().transpose();
}

// Band PSNR averaged over bands, summing errors in reverse storage order.
inline double mpsnr(const hsdenoise::HSCube &est, const hsdenoise::HSCube &ref) {
  const auto &d = ref.dims();
  double total = 0.0;
  for (std::size_t k = 0; k < d.n3; ++k) {
    double err = 0.0;
    for (std::size_t i = d.n1; i-- > 0;)
      for (std::size_t j = d.n2; j-- > 0;) err += std::pow(est(i, j, k) - ref(i, j, k), 2);
    total += err > 0.0 ? std::min(300.0, 10.0 * std::log10(static_cast<double>(d.n1 * d.n2) / err)) : 300.0;
  }
  return total / static_cast<double>(d.n3);
}

// Direct 2-D window SSIM of band k (11x11 Gaussian, sigma 1.5) with one
// mirror reflection at each edge. Needs bands at least 6 pixels on a side.
inline double ssim_band(const hsdenoise::HSCube &x, const hsdenoise::HSCube &y, std::size_t k) {
  const long n1 = static_cast<long>(x.dims().n1), n2 = static_cast<long>(x.dims().n2);
  const int r = 5;
  const double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  auto mirror = [](long p, long n) { return p < 0 ? -p - 1 : (p >= n ? 2 * n - p - 1 : p); };
  double wsum = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b) wsum += std::exp(-(a * a + b * b) / (2 * sigma * sigma));
  double total = 0.0;
  for (long j = 0; j < n2; ++j) {
    for (long i = 0; i < n1; ++i) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int b = -r; b <= r; ++b) {
        for (int a = -r; a <= r; ++a) {
          const double w = std::exp(-(a * a + b * b) / (2 * sigma * sigma)) / wsum;
          const auto ii = static_cast<std::size_t>(mirror(i + a, n1));
          const auto jj = static_cast<std::size_t>(mirror(j + b, n2));
          const double xv = x(ii, jj, k), yv = y(ii, jj, k);
          mx += w * xv;
          my += w * yv;
          sxx += w * xv * xv;
          syy += w * yv * yv;
          sxy += w * xv * yv;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return total / static_cast<double>(n1 * n2);
}

inline double mssim(const hsdenoise::HSCube &x, const hsdenoise::HSCube &y) {
  double total = 0.0;
  for (std::size_t k = 0; k < x.dims().n3; ++k) total += ssim_band(x, y, k);
  return total / static_cast<double>(x.dims().n3);
}

} // namespace hsd_oracle
