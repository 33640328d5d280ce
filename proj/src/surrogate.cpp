#include "insane/surrogate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "insane/errors.hpp"
#include "insane/simd/kernels.hpp"

namespace insane::surrogate {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Matrix activate(const Matrix& u, Activation act) {
  if (act == Activation::Identity) return u;
  return u.array().tanh().matrix();
}

/// Squared pairwise distances between rows of a and rows of b.
Matrix squared_distances(const Matrix& a, const Matrix& b) {
  Matrix d(a.rows(), b.rows());
  const auto& kern = simd::active();
  const auto dim = static_cast<std::size_t>(a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    kern.squared_l2_rows(a.row(i).data(), b.data(), static_cast<std::size_t>(b.rows()), dim, dim,
                         d.row(i).data());
  }
  return d;
}

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

Factor factorize(Eigen::MatrixXd k, double jitter) {
  Factor f;
  f.llt.compute(k);
  if (f.llt.info() == Eigen::Success) return f;
  double eps = jitter;
  for (int attempt = 0; attempt < 3; ++attempt, eps *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += eps;
    f.llt.compute(kj);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = eps;
      return f;
    }
  }
  throw NumericalError("Cholesky factorization failed after jitter escalation to " +
                       std::to_string(eps / 10.0));
}

void check_inputs(const FeatureNet& net, const Matrix& inputs) {
  if (inputs.cols() != net.inputs()) {
    throw ConfigError("input dimension " + std::to_string(inputs.cols()) +
                      " does not match feature net input " + std::to_string(net.inputs()));
  }
}

}  // namespace

FeatureNet FeatureNet::zeros(int inputs, int hidden, int latent) {
  FeatureNet net;
  net.w1 = Matrix::Zero(hidden, inputs);
  net.b1 = Vector::Zero(hidden);
  net.w2 = Matrix::Zero(latent, hidden);
  net.b2 = Vector::Zero(latent);
  return net;
}

FeatureNet FeatureNet::random(int inputs, int hidden, int latent, Rng& rng) {
  FeatureNet net = zeros(inputs, hidden, latent);
  std::normal_distribution<double> g1(0.0, 1.0 / std::sqrt(static_cast<double>(inputs)));
  std::normal_distribution<double> g2(0.0, 1.0 / std::sqrt(static_cast<double>(hidden)));
  for (Eigen::Index i = 0; i < net.w1.size(); ++i) net.w1.data()[i] = g1(rng);
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) net.w2.data()[i] = g2(rng);
  return net;
}

Matrix FeatureNet::forward(const Matrix& x) const {
  Matrix u = x * w1.transpose();
  u.rowwise() += b1.transpose();
  Matrix z = activate(u, activation) * w2.transpose();
  z.rowwise() += b2.transpose();
  return z;
}

Vector latent(const FeatureNet& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.inputs()) {
    throw ConfigError("patch has " + std::to_string(input.size()) + " values, feature net expects " +
                      std::to_string(net.inputs()));
  }
  const Eigen::Map<const Vector> x(input.data(), static_cast<Eigen::Index>(input.size()));
  Vector u = net.w1 * x + net.b1;
  if (net.activation == Activation::Tanh) u = u.array().tanh().matrix();
  return net.w2 * u + net.b2;
}

double kernel(std::span<const double> z1, std::span<const double> z2, const GPHyper& hyper) {
  const double d2 = simd::squared_l2(z1, z2);
  const double l = hyper.lengthscale();
  return hyper.signal_var() * std::exp(-d2 / (2.0 * l * l));
}

PatchScaling PatchScaling::from_image(const GridDataset& ds) {
  PatchScaling s;
  if (ds.image.empty()) return s;
  const auto [lo, hi] = std::minmax_element(ds.image.begin(), ds.image.end());
  s.lo = *lo;
  s.hi = *hi;
  return s;
}

Matrix inputs_from_patches(const std::vector<Patch>& patches, const PatchScaling& scaling) {
  if (patches.empty()) return Matrix(0, 0);
  const auto p = static_cast<Eigen::Index>(patches.front().values.size());
  Matrix x(static_cast<Eigen::Index>(patches.size()), p);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (static_cast<Eigen::Index>(patches[i].values.size()) != p) {
      throw ConfigError("patches must all have the same side");
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      x(static_cast<Eigen::Index>(i), j) = scaling.apply(patches[i].values[static_cast<std::size_t>(j)]);
    }
  }
  return x;
}

void FitConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(step > 0.0)) throw ConfigError("step size must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(jitter > 0.0)) throw ConfigError("jitter must be > 0");
  if (hidden < 1 || latent < 1) throw ConfigError("hidden and latent widths must be >= 1");
  if (!(min_noise_var >= 0.0)) throw ConfigError("min_noise_var must be >= 0");
}

Standardization standardization_of(std::span<const double> y) {
  Standardization s;
  if (y.size() < 2) return s;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  s.mean = mean;
  s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return s;
}

double log_marginal_likelihood(const FeatureNet& net, const GPHyper& hyper, const Matrix& inputs,
                               std::span<const double> y, double jitter, EvidenceGradient* grad) {
  const auto n = inputs.rows();
  if (n < 1) throw InsufficientPointsError("log marginal likelihood needs at least one point");
  if (static_cast<Eigen::Index>(y.size()) != n) throw ConfigError("target count does not match inputs");
  check_inputs(net, inputs);

  const auto st = standardization_of(y);
  Vector ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys[i] = (y[static_cast<std::size_t>(i)] - st.mean) / st.scale;

  Matrix u = inputs * net.w1.transpose();
  u.rowwise() += net.b1.transpose();
  const Matrix act = activate(u, net.activation);
  Matrix z = act * net.w2.transpose();
  z.rowwise() += net.b2.transpose();

  const double l2 = std::exp(2.0 * hyper.log_lengthscale);
  const double sf2 = hyper.signal_var();
  const double sn2 = hyper.noise_var();
  const Matrix d2 = squared_distances(z, z);
  const Eigen::MatrixXd kf = (sf2 * (-d2.array() / (2.0 * l2)).exp()).matrix();
  Eigen::MatrixXd ky = kf;
  ky.diagonal().array() += sn2;
  const Factor f = factorize(ky, jitter);
  const Vector alpha = f.llt.solve(ys);
  const auto& lmat = f.llt.matrixLLT();
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet_half += std::log(lmat(i, i));
  const double value = -0.5 * ys.dot(alpha) - logdet_half - 0.5 * static_cast<double>(n) * kLog2Pi;

  if (grad != nullptr) {
    // dL/dK = A = (alpha alpha^T - Ky^-1) / 2
    const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd a = 0.5 * (alpha * alpha.transpose() - kinv);
    const Eigen::MatrixXd b = a.cwiseProduct(kf);

    grad->log_noise_var = sn2 * a.trace();
    grad->log_signal_var = b.sum();
    grad->log_lengthscale = (b.array() * d2.array()).sum() / l2;

    // dL/dz_i = -(2/l^2) sum_j B_ij (z_i - z_j)
    const Vector row_sums = b.rowwise().sum();
    Matrix gz = z.array().colwise() * row_sums.array();
    gz -= b * z;
    gz *= -2.0 / l2;

    grad->net.activation = net.activation;
    grad->net.w2 = gz.transpose() * act;
    grad->net.b2 = gz.colwise().sum().transpose();
    Matrix gact = gz * net.w2;
    if (net.activation == Activation::Tanh) {
      gact.array() *= (1.0 - act.array().square());
    }
    grad->net.w1 = gact.transpose() * inputs;
    grad->net.b1 = gact.colwise().sum().transpose();
  }
  return value;
}

DKLModel condition(const FeatureNet& net, const GPHyper& hyper, const Matrix& inputs,
                   std::span<const double> y, double jitter, const PatchScaling& scaling) {
  const auto n = inputs.rows();
  if (n < 1) throw InsufficientPointsError("conditioning needs at least one point");
  if (static_cast<Eigen::Index>(y.size()) != n) throw ConfigError("target count does not match inputs");
  check_inputs(net, inputs);

  DKLModel m;
  m.net = net;
  m.hyper = hyper;
  m.scaling = scaling;
  const auto st = standardization_of(y);
  m.y_mean = st.mean;
  m.y_scale = st.scale;
  Vector ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys[i] = (y[static_cast<std::size_t>(i)] - st.mean) / st.scale;

  m.latents = net.forward(inputs);
  const double l2 = std::exp(2.0 * hyper.log_lengthscale);
  const Matrix d2 = squared_distances(m.latents, m.latents);
  Eigen::MatrixXd ky = (hyper.signal_var() * (-d2.array() / (2.0 * l2)).exp()).matrix();
  ky.diagonal().array() += hyper.noise_var();
  const Factor f = factorize(ky, jitter);
  m.jitter_used = f.jitter;
  m.alpha = f.llt.solve(ys);
  m.chol = f.llt.matrixL();
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet_half += std::log(m.chol(i, i));
  m.evidence = -0.5 * ys.dot(m.alpha) - logdet_half - 0.5 * static_cast<double>(n) * kLog2Pi;
  return m;
}

namespace {

struct Params {
  FeatureNet net;
  GPHyper hyper;
};

void clamp_hyper(GPHyper& h, double min_noise_var) {
  h.log_lengthscale = std::clamp(h.log_lengthscale, -6.0, 6.0);
  h.log_signal_var = std::clamp(h.log_signal_var, -10.0, 10.0);
  const double lo = min_noise_var > 0.0 ? std::log(min_noise_var) : -40.0;
  h.log_noise_var = std::clamp(h.log_noise_var, lo, 5.0);
}

bool finite(const EvidenceGradient& g) {
  return std::isfinite(g.log_lengthscale) && std::isfinite(g.log_signal_var) &&
         std::isfinite(g.log_noise_var) && g.net.w1.allFinite() && g.net.b1.allFinite() &&
         g.net.w2.allFinite() && g.net.b2.allFinite();
}

}  // namespace

DKLModel fit(const Matrix& inputs, std::span<const double> y, const FitConfig& cfg,
             const PatchScaling& scaling, const DKLModel* warm) {
  cfg.validate();
  const auto n = inputs.rows();
  if (n < 2) throw InsufficientPointsError("fit needs at least 2 training points");
  if (static_cast<Eigen::Index>(y.size()) != n) throw ConfigError("target count does not match inputs");
  for (double v : y) {
    if (!std::isfinite(v)) throw NonFiniteError("fit targets contain non-finite values");
  }

  Params p;
  if (warm != nullptr) {
    p.net = warm->net;
    p.hyper = warm->hyper;
  } else {
    Rng rng = substream(cfg.seed, {0xd41u});
    p.net = FeatureNet::random(static_cast<int>(inputs.cols()), cfg.hidden, cfg.latent, rng);
  }
  check_inputs(p.net, inputs);
  clamp_hyper(p.hyper, cfg.min_noise_var);

  Params vel;
  vel.net = FeatureNet::zeros(p.net.inputs(), p.net.hidden(), p.net.latent_dim());
  vel.hyper = GPHyper{0.0, 0.0, 0.0};

  Params best = p;
  double best_value = -INFINITY;
  double initial = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  EvidenceGradient g;

  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    const bool last = epoch == cfg.epochs;
    const double value = log_marginal_likelihood(p.net, p.hyper, inputs, y, cfg.jitter, last ? nullptr : &g);
    if (epoch == 0) initial = value;
    if (value > best_value) {
      best_value = value;
      best = p;
    }
    if (last) break;
    if (!finite(g)) {
      throw NumericalError("non-finite evidence gradient at epoch " + std::to_string(epoch) +
                           " (evidence " + std::to_string(value) + ", lengthscale " +
                           std::to_string(p.hyper.lengthscale()) + ", noise " +
                           std::to_string(p.hyper.noise_var()) + ")");
    }

    // Ascent step on the per-point evidence.
    const double eta = cfg.step * inv_n;
    auto update = [&](auto& param, auto& v, const auto& gp) {
      v = cfg.momentum * v + eta * gp;
      param += v;
    };
    if (cfg.train_net) {
      update(p.net.w1, vel.net.w1, g.net.w1);
      update(p.net.b1, vel.net.b1, g.net.b1);
      update(p.net.w2, vel.net.w2, g.net.w2);
      update(p.net.b2, vel.net.b2, g.net.b2);
    }
    update(p.hyper.log_lengthscale, vel.hyper.log_lengthscale, g.log_lengthscale);
    update(p.hyper.log_signal_var, vel.hyper.log_signal_var, g.log_signal_var);
    update(p.hyper.log_noise_var, vel.hyper.log_noise_var, g.log_noise_var);
    clamp_hyper(p.hyper, cfg.min_noise_var);
  }

  DKLModel m = condition(best.net, best.hyper, inputs, y, cfg.jitter, scaling);
  m.initial_evidence = initial;
  return m;
}

Prediction predict(const DKLModel& model, const Matrix& inputs) {
  check_inputs(model.net, inputs);
  const auto m = inputs.rows();
  Prediction out;
  out.mean.resize(static_cast<std::size_t>(m));
  out.var.resize(static_cast<std::size_t>(m));
  if (m == 0) return out;

  const Matrix zc = model.net.forward(inputs);
  const double l2 = std::exp(2.0 * model.hyper.log_lengthscale);
  const double sf2 = model.hyper.signal_var();
  const Matrix d2 = squared_distances(zc, model.latents);
  const Eigen::MatrixXd kc = (sf2 * (-d2.array() / (2.0 * l2)).exp()).matrix();  // m x n
  const Vector mu = kc * model.alpha;
  const Eigen::MatrixXd v = model.chol.triangularView<Eigen::Lower>().solve(kc.transpose());  // n x m
  const double scale2 = model.y_scale * model.y_scale;
  for (Eigen::Index i = 0; i < m; ++i) {
    double var = sf2 - v.col(i).squaredNorm();
    if (var < 0.0) {
      var = 0.0;
      ++out.clamped;
    }
    out.mean[static_cast<std::size_t>(i)] = mu[i] * model.y_scale + model.y_mean;
    out.var[static_cast<std::size_t>(i)] = var * scale2;
  }
  return out;
}

namespace {

constexpr std::uint8_t kModelVersion = 1;

void put(std::ofstream& out, double v) {
  static_assert(std::endian::native == std::endian::little, "model dump assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put(std::ofstream& out, const auto& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) put(out, m.data()[i]);
}

double get(std::ifstream& in) {
  double v = 0.0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated model file");
  return v;
}

void get(std::ifstream& in, auto& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get(in);
}

}  // namespace

void save_model(const DKLModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.put(static_cast<char>(kModelVersion));
  out.put(static_cast<char>(model.net.activation == Activation::Tanh ? 0 : 1));
  for (double dim : {double(model.net.inputs()), double(model.net.hidden()), double(model.net.latent_dim()),
                     double(model.size())}) {
    put(out, dim);
  }
  put(out, model.net.w1);
  put(out, model.net.b1);
  put(out, model.net.w2);
  put(out, model.net.b2);
  for (double v : {model.hyper.log_lengthscale, model.hyper.log_signal_var, model.hyper.log_noise_var,
                   model.scaling.lo, model.scaling.hi, model.y_mean, model.y_scale, model.jitter_used,
                   model.evidence}) {
    put(out, v);
  }
  put(out, model.latents);
  put(out, model.alpha);
  put(out, model.chol);
  if (!out) throw IoError("write failed for " + path.string());
}

DKLModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const int version = in.get();
  if (version != kModelVersion) throw ConfigError("unsupported model version " + std::to_string(version));
  const int act = in.get();
  const auto p = static_cast<int>(get(in));
  const auto h = static_cast<int>(get(in));
  const auto d = static_cast<int>(get(in));
  const auto n = static_cast<Eigen::Index>(get(in));
  DKLModel m;
  m.net = FeatureNet::zeros(p, h, d);
  m.net.activation = act == 0 ? Activation::Tanh : Activation::Identity;
  get(in, m.net.w1);
  get(in, m.net.b1);
  get(in, m.net.w2);
  get(in, m.net.b2);
  m.hyper.log_lengthscale = get(in);
  m.hyper.log_signal_var = get(in);
  m.hyper.log_noise_var = get(in);
  m.scaling.lo = get(in);
  m.scaling.hi = get(in);
  m.y_mean = get(in);
  m.y_scale = get(in);
  m.jitter_used = get(in);
  m.evidence = get(in);
  m.latents.resize(n, d);
  m.alpha.resize(n);
  m.chol.resize(n, n);
  get(in, m.latents);
  get(in, m.alpha);
  get(in, m.chol);
  return m;
}

}  // namespace insane::surrogate
