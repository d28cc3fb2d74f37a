#pragma once

#include <hsdenoise/cube.hpp>
#include <hsdenoise/error.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace hsdenoise {

/// Per-band PSNR for a zero-error band.
inline constexpr double kPsnrCapDb = 300.0;

struct SsimParams {
  int radius = 5; // 11x11 window
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

struct MetricReport {
  double mpsnr_db = 0.0;
  double mssim = 0.0;
  std::vector<double> per_band_psnr;
  std::vector<double> per_band_ssim;
};

namespace detail {

inline void require_same(const HSCube &a, const HSCube &b) {
  if (a.dims() != b.dims()) {
    throw InvalidArgument("metric inputs differ in dims: " + to_string(a.dims()) + " vs " + to_string(b.dims()));
  }
}

inline double mean(const std::vector<double> &v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...
inline std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

inline std::vector<double> gaussian_kernel(const SsimParams &p) {
  std::vector<double> w(static_cast<std::size_t>(2 * p.radius + 1));
  double total = 0.0;
  for (int t = -p.radius; t <= p.radius; ++t) {
    const double v = std::exp(-(t * t) / (2.0 * p.sigma * p.sigma));
    w[static_cast<std::size_t>(t + p.radius)] = v;
    total += v;
  }
  for (double &v : w) v /= total;
  return w;
}

// Separable Gaussian smoothing of an n1 x n2 band (vertical index fastest).
inline std::vector<double> smooth(const std::vector<double> &img, std::size_t n1, std::size_t n2,
                                  const std::vector<double> &w, int radius) {
  std::vector<double> tmp(img.size()), out(img.size());
  const long l1 = static_cast<long>(n1), l2 = static_cast<long>(n2);
  for (std::size_t j = 0; j < n2; ++j) {
    for (std::size_t i = 0; i < n1; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += w[static_cast<std::size_t>(t + radius)] * img[reflect(static_cast<long>(i) + t, l1) + n1 * j];
      }
      tmp[i + n1 * j] = acc;
    }
  }
  for (std::size_t j = 0; j < n2; ++j) {
    for (std::size_t i = 0; i < n1; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += w[static_cast<std::size_t>(t + radius)] * tmp[i + n1 * reflect(static_cast<long>(j) + t, l2)];
      }
      out[i + n1 * j] = acc;
    }
  }
  return out;
}

} // namespace detail

/// 10 log10(n1 n2 / ||x_k - y_k||^2) per band, capped at kPsnrCapDb.
/// Assumes intensities normalized so the peak is 1.
inline std::vector<double> band_psnr(const HSCube &estimate, const HSCube &reference) {
  detail::require_same(estimate, reference);
  const Dims &d = reference.dims();
  std::vector<double> out(d.n3);
  for (std::size_t k = 0; k < d.n3; ++k) {
    const auto e = estimate.band(k);
    const auto r = reference.band(k);
    double err = 0.0;
    for (std::size_t n = 0; n < e.size(); ++n) err += (e[n] - r[n]) * (e[n] - r[n]);
    out[k] = err > 0.0 ? std::min(kPsnrCapDb, 10.0 * std::log10(static_cast<double>(d.band_size()) / err)) : kPsnrCapDb;
  }
  return out;
}

/// Windowed SSIM of each band (Gaussian window, symmetric boundary).
inline std::vector<double> band_ssim(const HSCube &estimate, const HSCube &reference, const SsimParams &p = {}) {
  detail::require_same(estimate, reference);
  const Dims &d = reference.dims();
  const auto w = detail::gaussian_kernel(p);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  std::vector<double> out(d.n3);
  const std::size_t m = d.band_size();
  for (std::size_t k = 0; k < d.n3; ++k) {
    std::vector<double> x(estimate.band(k).begin(), estimate.band(k).end());
    std::vector<double> y(reference.band(k).begin(), reference.band(k).end());
    std::vector<double> xx(m), yy(m), xy(m);
    for (std::size_t n = 0; n < m; ++n) {
      xx[n] = x[n] * x[n];
      yy[n] = y[n] * y[n];
      xy[n] = x[n] * y[n];
    }
    const auto mx = detail::smooth(x, d.n1, d.n2, w, p.radius);
    const auto my = detail::smooth(y, d.n1, d.n2, w, p.radius);
    const auto sxx = detail::smooth(xx, d.n1, d.n2, w, p.radius);
    const auto syy = detail::smooth(yy, d.n1, d.n2, w, p.radius);
    const auto sxy = detail::smooth(xy, d.n1, d.n2, w, p.radius);
    double total = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
      const double vx = sxx[n] - mx[n] * mx[n];
      const double vy = syy[n] - my[n] * my[n];
      const double cov = sxy[n] - mx[n] * my[n];
      total += ((2.0 * mx[n] * my[n] + c1) * (2.0 * cov + c2)) /
               ((mx[n] * mx[n] + my[n] * my[n] + c1) * (vx + vy + c2));
    }
    out[k] = total / static_cast<double>(m);
  }
  return out;
}

inline MetricReport mpsnr(const HSCube &estimate, const HSCube &reference) {
  MetricReport r;
  r.per_band_psnr = band_psnr(estimate, reference);
  r.mpsnr_db = detail::mean(r.per_band_psnr);
  return r;
}

inline MetricReport mssim(const HSCube &estimate, const HSCube &reference, const SsimParams &p = {}) {
  MetricReport r;
  r.per_band_ssim = band_ssim(estimate, reference, p);
  r.mssim = detail::mean(r.per_band_ssim);
  return r;
}

/// Both metrics in one report.
inline MetricReport evaluate(const HSCube &estimate, const HSCube &reference, const SsimParams &p = {}) {
  MetricReport r = mpsnr(estimate, reference);
  r.per_band_ssim = band_ssim(estimate, reference, p);
  r.mssim = detail::mean(r.per_band_ssim);
  return r;
}

inline nlohmann::json to_json(const MetricReport &r) {
  return {{"mpsnr_db", r.mpsnr_db},
          {"mssim", r.mssim},
          {"per_band_psnr", r.per_band_psnr},
          {"per_band_ssim", r.per_band_ssim}};
}

inline constexpr const char *kMetricCsvHeader = "dataset,case,method,mpsnr,mssim";

inline std::string metric_csv_row(const std::string &dataset, const std::string &noise_case, const std::string &method,
                                  const MetricReport &r) {
  return fmt::format("{},{},{},{:.4f},{:.4f}", dataset, noise_case, method, r.mpsnr_db, r.mssim);
}

} // namespace hsdenoise
