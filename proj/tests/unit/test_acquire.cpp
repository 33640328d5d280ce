#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "insane/acquire.hpp"
#include "insane/dataspace.hpp"
#include "insane/errors.hpp"

using namespace insane;
using namespace insane::acquire;

namespace {

std::vector<Location> grid(int h, int w) {
  std::vector<Location> out;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.push_back({r, c});
  return out;
}

MeasuredSet measured_at(std::initializer_list<Location> locs) {
  MeasuredSet m;
  for (auto l : locs) m.add(l, {0.0});
  return m;
}

Config sane_cfg(double tau, double rho) {
  Config c;
  c.sane = true;
  c.tau = tau;
  c.rho = rho;
  return c;
}

}  // namespace

TEST(Acquire, ExpectedImprovementExamples) {
  EXPECT_EQ(expected_improvement(0.5, 0.0, 1.0, 0.0), 0.0);
  EXPECT_EQ(expected_improvement(1.0, 0.0, 1.0, 0.0), 0.0);
  EXPECT_NEAR(expected_improvement(1.31, 0.0, 1.0, 0.01), 0.3, 1e-15);
  EXPECT_NEAR(expected_improvement(2.0, 1.0, 2.0, 0.0), 0.3989422804014327, 1e-15);
  // Far below the incumbent the tail stays non-negative.
  EXPECT_GE(expected_improvement(-50.0, 1.0, 0.0, 0.0), 0.0);
}

TEST(Acquire, ExpectedImprovementMatchesQuadrature) {
  // E[max(Y - best - xi, 0)] for Y ~ N(mu, sd^2) by the midpoint rule.
  const double mu = 0.3, sd = 0.7, best = 0.5, xi = 0.05;
  double s = 0.0;
  const double h = 1e-4;
  for (double z = -12.0; z < 12.0; z += h) {
    const double zc = z + 0.5 * h;
    const double y = mu + sd * zc;
    s += std::max(y - best - xi, 0.0) * std::exp(-0.5 * zc * zc) / std::sqrt(2 * M_PI) * h;
  }
  EXPECT_NEAR(expected_improvement(mu, sd, best, xi), s, 1e-9);
}

TEST(Acquire, UpperConfidenceBound) {
  EXPECT_EQ(ucb(1.5, 3.0, 0.0), 1.5);
  EXPECT_EQ(ucb(1.5, 0.0, 2.0), 1.5);
  EXPECT_EQ(ucb(1.0, 2.0, 1.5), 4.0);
}

TEST(Acquire, ProximityCost) {
  const std::vector<Location> m = {{3, 3}, {10, 10}};
  EXPECT_EQ(proximity_cost({3, 3}, m, 2.0), 1.0);
  EXPECT_NEAR(proximity_cost({3, 5}, m, 2.0), std::exp(-0.5), 1e-15);
  EXPECT_LT(proximity_cost({1000, 1000}, m, 2.0), 1e-300);
  EXPECT_DOUBLE_EQ(min_distance({6, 7}, m), 5.0);
  EXPECT_THROW(proximity_cost({0, 0}, std::vector<Location>{}, 2.0), ConfigError);
}

TEST(Acquire, PlainArgmaxWithLowestIndexTies) {
  const auto cands = grid(2, 3);
  const auto m = measured_at({{0, 0}});
  const std::vector<double> acq = {9, 1, 5, 5, 2, 0};
  const auto s = select_next(acq, cands, m, 1, Config{});
  EXPECT_EQ(s.loc, (Location{0, 2}));
  EXPECT_EQ(s.acq, 5.0);
  EXPECT_FALSE(s.was_jump);
}

TEST(Acquire, UniformAcquisitionFollowsUndersampling) {
  const auto cands = grid(5, 5);
  const auto m = measured_at({{0, 2}});
  const std::vector<double> acq(25, 1.0);
  const auto s = select_next(acq, cands, m, 1, sane_cfg(2.0, 100.0));
  // (4,0) and (4,4) are the two farthest points; the lower row-major index wins.
  EXPECT_EQ(s.loc, (Location{4, 0}));
  EXPECT_FALSE(s.was_jump);
}

TEST(Acquire, JumpStepStaysRemote) {
  const auto cands = grid(20, 20);
  const auto m = measured_at({{0, 0}, {1, 1}});
  std::vector<double> acq(400);
  for (std::size_t i = 0; i < acq.size(); ++i) acq[i] = 1.0 / (1.0 + static_cast<double>(i));
  const auto s = select_next(acq, cands, m, 5, sane_cfg(2.0, 10.0));
  EXPECT_TRUE(s.was_jump);
  EXPECT_FALSE(s.remote_fallback);
  EXPECT_GE(min_distance(s.loc, m.locations()), 10.0);
  EXPECT_EQ(s.loc, (Location{0, 11}));  // first remote candidate in row-major order has the highest acq
}

TEST(Acquire, EmptyRemoteSetFallsBack) {
  const auto cands = grid(4, 4);
  const auto m = measured_at({{1, 1}});
  const std::vector<double> acq(16, 1.0);
  const auto s = select_next(acq, cands, m, 10, sane_cfg(1.0, 50.0));
  EXPECT_FALSE(s.was_jump);
  EXPECT_TRUE(s.remote_fallback);
  EXPECT_EQ(s.loc, (Location{3, 3}));
}

TEST(Acquire, NonJumpStepsNeverJump) {
  const auto cands = grid(20, 20);
  const auto m = measured_at({{0, 0}});
  const std::vector<double> acq(400, 1.0);
  for (int t = 1; t <= 12; ++t) {
    const auto s = select_next(acq, cands, m, t, sane_cfg(2.0, 5.0));
    EXPECT_EQ(s.was_jump, t % 5 == 0) << t;
  }
  const auto plain = select_next(acq, cands, m, 5, Config{});
  EXPECT_FALSE(plain.was_jump);
}

TEST(Acquire, NeverSelectsMeasuredAndExhausts) {
  const auto cands = grid(1, 3);
  auto m = measured_at({{0, 0}, {0, 1}});
  const std::vector<double> acq = {10, 10, 0};
  EXPECT_EQ(select_next(acq, cands, m, 1, Config{}).loc, (Location{0, 2}));
  m.add({0, 2}, {0.0});
  EXPECT_THROW(select_next(acq, cands, m, 1, Config{}), ExhaustionError);
}

TEST(Acquire, ArgmaxInvariances) {
  const auto cands = grid(12, 12);
  const auto m = measured_at({{2, 2}, {9, 4}, {5, 10}});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> acq(cands.size());
    for (auto& a : acq) a = u(rng);
    auto shifted = acq, scaled = acq;
    for (auto& a : shifted) a += 3.0;
    for (auto& a : scaled) a *= 7.5;
    EXPECT_EQ(select_next(acq, cands, m, 1, Config{}).loc, select_next(shifted, cands, m, 1, Config{}).loc);
    const auto jump = sane_cfg(2.0, 4.0);
    EXPECT_EQ(select_next(acq, cands, m, 5, jump).loc, select_next(shifted, cands, m, 5, jump).loc);
    EXPECT_EQ(select_next(acq, cands, m, 3, jump).loc, select_next(scaled, cands, m, 3, jump).loc);
  }
}

TEST(Acquire, ScaledDefaults) {
  const auto c = Config::scaled_for(128, 256);
  EXPECT_EQ(c.tau, 8.0);
  EXPECT_EQ(c.rho, 30.0);
  Config bad = sane_cfg(1.0, 1.0);
  bad.jump_period = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = Config{};
  bad.tau = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}
