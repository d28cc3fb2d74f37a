#include "oracles.hpp"
#include "support.hpp"

#include <hsdenoise/metrics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hsdenoise;
using hsd_test::random_cube;

using hsd_oracle::ssim_band;

TEST(Mpsnr, IdenticalCubesHitTheCap) {
  std::mt19937_64 rng(1);
  const HSCube u = random_cube({6, 5, 3}, rng, 0.0, 1.0);
  const MetricReport r = mpsnr(u, u);
  EXPECT_EQ(r.mpsnr_db, kPsnrCapDb);
  for (double p : r.per_band_psnr) EXPECT_EQ(p, kPsnrCapDb);
}

TEST(Mpsnr, ConstantErrorOfOneTenthIsTwentyDecibels) {
  const HSCube ref = HSCube::filled({7, 9, 1}, 0.5);
  const HSCube est = HSCube::filled({7, 9, 1}, 0.6);
  EXPECT_NEAR(mpsnr(est, ref).mpsnr_db, 20.0, 1e-10);
}

TEST(Mpsnr, MatchesReverseOrderSummationOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Dims d{9, 7, 5};
    const HSCube ref = random_cube(d, rng, 0.0, 1.0);
    const HSCube est = random_cube(d, rng, 0.0, 1.0);
    const double want = hsd_oracle::mpsnr(est, ref);
    EXPECT_NEAR(mpsnr(est, ref).mpsnr_db, want, 1e-10);
  }
}

TEST(Mssim, IdenticalCubesGiveExactlyOne) {
  std::mt19937_64 rng(3);
  const HSCube u = random_cube({12, 10, 3}, rng, 0.0, 1.0);
  const MetricReport r = mssim(u, u);
  EXPECT_EQ(r.mssim, 1.0);
}

TEST(Mssim, MatchesDirectWindowOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Dims d{12, 10, 2};
    const HSCube ref = random_cube(d, rng, 0.0, 1.0);
    HSCube est = ref;
    for (std::size_t n = 0; n < est.size(); ++n) est[n] += 0.2 * (random_cube({1, 1, 1}, rng)[0]);
    const auto got = band_ssim(est, ref);
    for (std::size_t k = 0; k < d.n3; ++k) EXPECT_NEAR(got[k], ssim_band(est, ref, k), 1e-8);
  }
}

TEST(Mssim, ContrastInversionOfCheckerboardIsPoor) {
  HSCube ref({16, 16, 1});
  for (std::size_t j = 0; j < 16; ++j)
    for (std::size_t i = 0; i < 16; ++i) ref(i, j, 0) = ((i / 2 + j / 2) % 2) ? 0.9 : 0.1;
  HSCube inv = ref;
  for (double &v : inv.values()) v = 1.0 - v;
  const double got = mssim(inv, ref).mssim;
  EXPECT_LT(got, 0.5);
  EXPECT_NEAR(got, ssim_band(inv, ref, 0), 1e-8);
}

TEST(Mssim, MoreNoiseLowersSsim) {
  std::mt19937_64 rng(5);
  const HSCube ref = random_cube({20, 20, 1}, rng, 0.2, 0.8);
  std::normal_distribution<double> g;
  HSCube pattern(ref.dims());
  for (double &v : pattern.values()) v = g(rng);
  const HSCube low = ref + 0.05 * pattern;
  const HSCube high = ref + 0.1 * pattern;
  EXPECT_LT(mssim(high, ref).mssim, mssim(low, ref).mssim);
}

TEST(Metrics, DimMismatchThrows) {
  EXPECT_THROW(evaluate(HSCube({2, 2, 1}), HSCube({2, 2, 2})), InvalidArgument);
}

TEST(Metrics, CsvRowFormat) {
  MetricReport r;
  r.mpsnr_db = 31.234567;
  r.mssim = 1.0;
  EXPECT_EQ(metric_csv_row("cube", "3", "s3ttv", r), "cube,3,s3ttv,31.2346,1.0000");
  EXPECT_STREQ(kMetricCsvHeader, "dataset,case,method,mpsnr,mssim");
}
