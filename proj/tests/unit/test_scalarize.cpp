#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "insane/errors.hpp"
#include "insane/scalarize.hpp"
#include "insane/synthgen.hpp"

using namespace insane;

TEST(Scalarize, SquareLoop) {
  const std::vector<double> v = {-1, -1, 1, 1}, r = {-1, 1, 1, -1};
  EXPECT_DOUBLE_EQ(loop_area(r, v), 4.0);
}

TEST(Scalarize, ConstantSpectrumHasNoArea) {
  const auto wf = triangular_waveform(64);
  const std::vector<double> r(64, 0.75);
  EXPECT_EQ(loop_area(r, wf), 0.0);
}

TEST(Scalarize, LengthMismatch) {
  const auto wf = triangular_waveform(64);
  const std::vector<double> r(63, 0.0);
  EXPECT_THROW(loop_area(r, wf), ConfigError);
}

TEST(Scalarize, DefaultNoiselessLoopMatchesBranchTrapezoid) {
  const auto cfg = SynthConfig::defaults();
  const auto wf = triangular_waveform(64);
  const auto volts = wf.as_double();
  Rng rng(0);
  for (int c = 0; c < 4; ++c) {
    auto p = cfg.classes[static_cast<std::size_t>(c)];
    p.sigma = 0.0;
    const auto loop = loop_model(p, wf, rng);
    EXPECT_NEAR(loop_area(loop, wf), std::abs(oracle::branch_trapezoid_area(volts, loop)), 1e-9) << c;
  }
  auto p = cfg.anomaly.params;
  p.sigma = 0.0;
  const auto loop = loop_model(p, wf, rng);
  EXPECT_NEAR(loop_area(loop, wf), std::abs(oracle::branch_trapezoid_area(volts, loop)), 1e-9);
}

TEST(Scalarize, FineSamplingApproachesClosedFormIntegral) {
  // Area between A tanh((V+Vc)/w) and A tanh((V-Vc)/w) over [-3, 3].
  const double a = 1.0, vc = 1.0, w = 0.2;
  auto prim = [&](double v, double shift) { return a * w * std::log(std::cosh((v + shift) / w)); };
  const double exact = (prim(3, vc) - prim(-3, vc)) - (prim(3, -vc) - prim(-3, -vc));
  const auto wf = triangular_waveform(8192);
  Rng rng(0);
  const auto loop = loop_model(LoopParams{.amplitude = a, .coercive_v = vc, .width = w}, wf, rng);
  EXPECT_NEAR(loop_area(loop, wf), exact, 1e-3);
}

TEST(Scalarize, Invariances) {
  const auto wf = triangular_waveform(64);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<double> r(64);
  for (auto& x : r) x = g(rng);
  const double base = loop_area(r, wf);
  ASSERT_GT(base, 0.0);

  auto scaled = r;
  for (auto& x : scaled) x *= -4.0;
  EXPECT_EQ(loop_area(scaled, wf), 4.0 * base);  // power of two: exact
  for (auto& x : scaled) x = r[static_cast<std::size_t>(&x - scaled.data())] * 0.3;
  EXPECT_NEAR(loop_area(scaled, wf), 0.3 * base, 1e-12 * base);

  auto shifted = r;
  for (auto& x : shifted) x += 5.0;
  EXPECT_NEAR(loop_area(shifted, wf), base, 1e-12 * std::max(1.0, base));

  auto volts = wf.as_double();
  auto rr = r;
  std::reverse(volts.begin(), volts.end());
  std::reverse(rr.begin(), rr.end());
  EXPECT_NEAR(loop_area(rr, volts), base, 1e-12 * std::max(1.0, base));
}

TEST(Scalarize, GridMaps) {
  const auto flat = testing_util::make_dataset(4, 4, 8, [](int, int, int) { return 1.0; });
  for (double a : scalarize_grid(flat)) EXPECT_EQ(a, 0.0);

  const auto one = testing_util::make_dataset(4, 4, 8, [](int r, int c, int t) {
    return (r == 2 && c == 1) ? std::sin(t) : 0.0;
  });
  const auto m = scalarize_grid(one);
  int nonzero = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] != 0.0) {
      ++nonzero;
      EXPECT_EQ(i, 2u * 4u + 1u);
    }
  EXPECT_EQ(nonzero, 1);
}

TEST(Scalarize, OutOfPlaneAreaExceedsInPlane) {
  const auto ds = generate(SynthConfig::defaults(), 1);
  const auto areas = scalarize_grid(ds);
  std::array<double, kNumClasses> sum{};
  std::array<int, kNumClasses> n{};
  for (std::size_t p = 0; p < areas.size(); ++p) {
    sum[(*ds.labels)[p]] += areas[p];
    ++n[(*ds.labels)[p]];
  }
  const double up = sum[0] / n[0], down = sum[1] / n[1], in = sum[2] / n[2];
  EXPECT_GT(up, in);
  EXPECT_GT(down, in);
}
