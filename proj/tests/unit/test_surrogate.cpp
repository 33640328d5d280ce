#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "helpers.hpp"
#include "insane/errors.hpp"
#include "insane/surrogate.hpp"

using namespace insane;
using namespace insane::surrogate;
using testing_util::random_points;
using testing_util::to_matrix;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

FeatureNet tiny_net(int p, int h, int d, std::uint64_t seed, Activation act = Activation::Tanh) {
  Rng rng(seed);
  auto net = FeatureNet::random(p, h, d, rng);
  std::normal_distribution<double> g(0.0, 0.3);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1[i] = g(rng);
  for (Eigen::Index i = 0; i < net.b2.size(); ++i) net.b2[i] = g(rng);
  net.activation = act;
  return net;
}

std::vector<double> targets(std::uint64_t seed, int n) {
  std::vector<double> y;
  for (const auto& row : random_points(seed, n, 1)) y.push_back(row[0]);
  return y;
}

oracle::Points oracle_latents(const FeatureNet& net, const oracle::Points& x) {
  oracle::Points z;
  for (const auto& xi : x) {
    std::vector<double> hidden(static_cast<std::size_t>(net.hidden()));
    for (int a = 0; a < net.hidden(); ++a) {
      double s = net.b1[a];
      for (int b = 0; b < net.inputs(); ++b) s += net.w1(a, b) * xi[static_cast<std::size_t>(b)];
      hidden[static_cast<std::size_t>(a)] = net.activation == Activation::Tanh ? std::tanh(s) : s;
    }
    std::vector<double> out(static_cast<std::size_t>(net.latent_dim()));
    for (int a = 0; a < net.latent_dim(); ++a) {
      double s = net.b2[a];
      for (int b = 0; b < net.hidden(); ++b) s += net.w2(a, b) * hidden[static_cast<std::size_t>(b)];
      out[static_cast<std::size_t>(a)] = s;
    }
    z.push_back(out);
  }
  return z;
}

}  // namespace

TEST(Surrogate, ZeroNetGivesZeroLatent) {
  const auto net = FeatureNet::zeros(9, 4, 2);
  const std::vector<double> x(9, 0.7);
  const auto z = latent(net, x);
  EXPECT_EQ(z.size(), 2);
  EXPECT_EQ(z.norm(), 0.0);
  EXPECT_THROW(latent(net, std::vector<double>(8, 0.0)), ConfigError);
}

TEST(Surrogate, SmallWeightsLinearize) {
  const int p = 4;
  auto net = FeatureNet::zeros(p, p, p);
  const double eps = 1e-4;
  net.w1 = eps * Matrix::Identity(p, p);
  Rng rng(3);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) net.w2.data()[i] = g(rng);
  const std::vector<double> x = {0.3, -0.2, 0.9, 0.5};
  const Vector z = latent(net, x);
  const Vector xv = Eigen::Map<const Vector>(x.data(), p);
  const Vector lin = eps * net.w2 * xv;
  EXPECT_LT((z - lin).norm(), 1e-7 * lin.norm());  // cubic term of tanh
}

TEST(Surrogate, RandomNetIsReproducible) {
  Rng a(11), b(11);
  const auto n1 = FeatureNet::random(25, 8, 2, a), n2 = FeatureNet::random(25, 8, 2, b);
  const std::vector<double> x(25, 0.4);
  EXPECT_EQ(latent(n1, x), latent(n2, x));
}

TEST(Surrogate, KernelValues) {
  GPHyper h;
  h.log_signal_var = std::log(2.5);
  const std::vector<double> z = {0.3, -1.0};
  EXPECT_DOUBLE_EQ(kernel(z, z, h), 2.5);
  EXPECT_LT(kernel(z, std::vector<double>{1e3, 1e3}, h), 1e-300);
  GPHyper unit{0.0, 0.0, 0.0};
  EXPECT_NEAR(kernel(std::vector<double>{0, 0}, std::vector<double>{1, 1}, unit), std::exp(-1.0), 1e-15);
}

TEST(Surrogate, EvidenceOfSinglePoint) {
  const auto net = tiny_net(3, 4, 2, 1);
  GPHyper h;
  h.log_signal_var = std::log(0.8);
  h.log_noise_var = std::log(0.2);
  const Matrix x = to_matrix(random_points(2, 1, 3));
  const double v = 0.8 + 0.2;
  EXPECT_NEAR(log_marginal_likelihood(net, h, x, std::vector<double>{0.0}), -0.5 * std::log(v) - kHalfLog2Pi, 1e-14);
  // Raw targets are used below two points.
  EXPECT_NEAR(log_marginal_likelihood(net, h, x, std::vector<double>{2.0}),
              -0.5 * 4.0 / v - 0.5 * std::log(v) - kHalfLog2Pi, 1e-14);
}

TEST(Surrogate, EvidenceMatchesTwoByTwoClosedForm) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto net = tiny_net(5, 6, 2, s);
    GPHyper h{0.3 * s - 0.5, 0.2, std::log(0.05 + 0.1 * s)};
    const auto xp = random_points(s + 10, 2, 5);
    const auto z = oracle_latents(net, xp);
    const double d = oracle::distance(z[0], z[1]);
    const double sf2 = std::exp(h.log_signal_var), sn2 = std::exp(h.log_noise_var);
    const double l = std::exp(h.log_lengthscale);
    const double a = sf2 + sn2, b = sf2 * std::exp(-d * d / (2 * l * l));
    // Two standardized targets are always -1 and +1 in input order.
    const std::vector<double> y = {1.7, -0.4};
    const double y0 = 1.0, y1 = -1.0;
    const double det = a * a - b * b;
    const double quad = (a * y0 * y0 - 2 * b * y0 * y1 + a * y1 * y1) / det;
    const double expected = -0.5 * quad - 0.5 * std::log(det) - 2 * kHalfLog2Pi;
    EXPECT_NEAR(log_marginal_likelihood(net, h, to_matrix(xp), y), expected, 1e-10);
  }
}

TEST(Surrogate, DuplicateInputsWithNoiseNeedNoJitter) {
  const auto net = tiny_net(3, 4, 2, 2);
  Matrix x(3, 3);
  x << 0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.5, 0.5, 0.5;
  GPHyper h;
  const std::vector<double> y = {1.0, 1.2, -0.3};
  EXPECT_TRUE(std::isfinite(log_marginal_likelihood(net, h, x, y)));
  EXPECT_EQ(condition(net, h, x, y).jitter_used, 0.0);
}

TEST(Surrogate, DuplicateNoiselessInputsEscalateJitter) {
  const auto net = tiny_net(3, 4, 2, 2);
  Matrix x(2, 3);
  x << 0.1, 0.2, 0.3, 0.1, 0.2, 0.3;
  GPHyper h;
  h.log_noise_var = -std::numeric_limits<double>::infinity();
  const auto m = condition(net, h, x, std::vector<double>{1.0, 2.0});
  EXPECT_GT(m.jitter_used, 0.0);
}

TEST(Surrogate, AnalyticGradientMatchesCentralDifferences) {
  const double h = 1e-4;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (auto act : {Activation::Tanh, Activation::Identity}) {
      const int n = 5 + static_cast<int>(s % 4);
      auto net = tiny_net(9, 4, 2, s, act);
      GPHyper hy{0.2, -0.1, std::log(0.1)};
      const Matrix x = to_matrix(random_points(s + 50, n, 9));
      const auto y = targets(s + 90, n);
      EvidenceGradient g;
      log_marginal_likelihood(net, hy, x, y, 1e-8, &g);

      double worst = 0.0;
      auto check = [&](double analytic, auto&& eval) {
        const double fd = (eval(h) - eval(-h)) / (2 * h);
        const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
      };
      auto each = [&](Matrix& param, const Matrix& grad) {
        for (Eigen::Index i = 0; i < param.size(); ++i) {
          check(grad.data()[i], [&](double d) {
            const double keep = param.data()[i];
            param.data()[i] = keep + d;
            const double v = log_marginal_likelihood(net, hy, x, y);
            param.data()[i] = keep;
            return v;
          });
        }
      };
      auto each_vec = [&](Vector& param, const Vector& grad) {
        for (Eigen::Index i = 0; i < param.size(); ++i) {
          check(grad[i], [&](double d) {
            const double keep = param[i];
            param[i] = keep + d;
            const double v = log_marginal_likelihood(net, hy, x, y);
            param[i] = keep;
            return v;
          });
        }
      };
      each(net.w1, g.net.w1);
      each_vec(net.b1, g.net.b1);
      each(net.w2, g.net.w2);
      each_vec(net.b2, g.net.b2);
      for (auto [ptr, an] : {std::pair{&hy.log_lengthscale, g.log_lengthscale},
                             std::pair{&hy.log_signal_var, g.log_signal_var},
                             std::pair{&hy.log_noise_var, g.log_noise_var}}) {
        check(an, [&, ptr = ptr](double d) {
          const double keep = *ptr;
          *ptr = keep + d;
          const double v = log_marginal_likelihood(net, hy, x, y);
          *ptr = keep;
          return v;
        });
      }
      EXPECT_LE(worst, 1e-3) << "seed " << s;
    }
  }
}

TEST(Surrogate, FixedFeaturesMatchDenseGp) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const int n = 4 + static_cast<int>(s);
    const auto net = tiny_net(6, 5, 2, s + 7, Activation::Identity);
    GPHyper h{0.4, std::log(1.3), std::log(0.02)};
    const auto xtr = random_points(s + 1, n, 6), xte = random_points(s + 100, 7, 6);
    const auto y = targets(s + 200, n);
    const auto m = condition(net, h, to_matrix(xtr), y);
    const auto pred = predict(m, to_matrix(xte));
    const auto ref = oracle::dense_gp(oracle_latents(net, xtr), y, oracle_latents(net, xte), std::exp(0.4), 1.3, 0.02);
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_NEAR(pred.mean[i], ref.mean[i], 1e-8);
      EXPECT_NEAR(pred.var[i], ref.var[i], 1e-8);
    }
  }
}

TEST(Surrogate, NoiselessInterpolation) {
  const auto net = tiny_net(4, 6, 2, 21);
  GPHyper h{0.5, 0.0, -std::numeric_limits<double>::infinity()};
  const auto xp = random_points(22, 6, 4, 2.0);
  const auto y = targets(23, 6);
  const auto m = condition(net, h, to_matrix(xp), y);
  const auto pred = predict(m, to_matrix(xp));
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(pred.mean[i], y[i], 1e-6);
    EXPECT_LE(pred.var[i], 1e-8);
  }
}

TEST(Surrogate, SinglePointPosterior) {
  const auto net = tiny_net(3, 3, 2, 4);
  GPHyper h{0.0, std::log(2.0), std::log(0.5)};
  const Matrix x = to_matrix(random_points(5, 1, 3));
  const auto m = condition(net, h, x, std::vector<double>{3.0});
  const auto pred = predict(m, x);
  EXPECT_NEAR(pred.mean[0], 2.0 / 2.5 * 3.0, 1e-12);
}

TEST(Surrogate, FarPredictionsRevertToPrior) {
  auto net = tiny_net(3, 3, 2, 6, Activation::Identity);
  GPHyper h{-1.0, std::log(0.7), std::log(0.1)};
  const Matrix x = to_matrix(random_points(7, 5, 3, 0.1));
  const auto y = targets(8, 5);
  const auto m = condition(net, h, x, y);
  const auto pred = predict(m, Matrix::Constant(1, 3, 1e4));
  EXPECT_NEAR(pred.mean[0], m.y_mean, 1e-12);
  EXPECT_NEAR(pred.var[0], 0.7 * m.y_scale * m.y_scale, 1e-12);
}

TEST(Surrogate, FitRecoversConstantTargets) {
  const Matrix x = to_matrix(random_points(9, 8, 9));
  const std::vector<double> y(8, 4.25);
  FitConfig cfg;
  cfg.hidden = 6;
  cfg.epochs = 20;
  const auto m = fit(x, y, cfg);
  for (double v : predict(m, x).mean) EXPECT_NEAR(v, 4.25, 1e-6);
}

TEST(Surrogate, FitIsDeterministicAndNeverWorse) {
  const Matrix x = to_matrix(random_points(10, 12, 9));
  const auto y = targets(11, 12);
  FitConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 30;
  cfg.seed = 5;
  const auto a = fit(x, y, cfg), b = fit(x, y, cfg);
  EXPECT_EQ(a.net.w1, b.net.w1);
  EXPECT_EQ(a.hyper.log_lengthscale, b.hyper.log_lengthscale);
  EXPECT_GE(a.evidence, a.initial_evidence);
  const auto warm = fit(x, y, cfg, {}, &a);
  EXPECT_GE(warm.evidence, a.evidence - 1e-9);
  EXPECT_THROW(fit(x.topRows(1), std::vector<double>{1.0}, cfg), InsufficientPointsError);
}

TEST(Surrogate, VarianceIsNonNegative) {
  const Matrix x = to_matrix(random_points(12, 15, 9));
  const auto y = targets(13, 15);
  FitConfig cfg;
  cfg.hidden = 8;
  const auto m = fit(x, y, cfg);
  for (double v : predict(m, to_matrix(random_points(14, 200, 9))).var) EXPECT_GE(v, 0.0);
}

TEST(Surrogate, FitConfigValidation) {
  FitConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.step = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.jitter = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Surrogate, ModelDumpRoundTrip) {
  const Matrix x = to_matrix(random_points(15, 6, 9));
  FitConfig cfg;
  cfg.hidden = 5;
  cfg.epochs = 5;
  const auto m = fit(x, targets(16, 6), cfg, PatchScaling{-1.0, 2.0});
  const auto path = testing_util::scratch_dir("model") / "model.bin";
  save_model(m, path);
  const auto back = load_model(path);
  EXPECT_EQ(back.net.w1, m.net.w1);
  EXPECT_EQ(back.net.b2, m.net.b2);
  EXPECT_EQ(back.hyper.log_noise_var, m.hyper.log_noise_var);
  EXPECT_EQ(back.scaling.lo, -1.0);
  EXPECT_EQ(back.latents, m.latents);
  EXPECT_EQ(back.y_scale, m.y_scale);
  EXPECT_EQ(predict(back, x).mean, predict(m, x).mean);
}
