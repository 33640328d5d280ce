#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "insane/dataspace.hpp"
#include "insane/rng.hpp"
#include "insane/types.hpp"

namespace insane::surrogate {

enum class Activation { Tanh, Identity };

/// Two-layer feature map z = W2 act(W1 x + b1) + b2 from a flattened patch
/// to a low-dimensional latent space.
struct FeatureNet {
  Matrix w1;  // hidden x inputs
  Vector b1;  // hidden
  Matrix w2;  // latent x hidden
  Vector b2;  // latent
  Activation activation = Activation::Tanh;

  int inputs() const noexcept { return static_cast<int>(w1.cols()); }
  int hidden() const noexcept { return static_cast<int>(w1.rows()); }
  int latent_dim() const noexcept { return static_cast<int>(w2.rows()); }

  /// Weights ~ N(0, 1/fan_in), biases zero.
  static FeatureNet random(int inputs, int hidden, int latent, Rng& rng);
  static FeatureNet zeros(int inputs, int hidden, int latent);

  /// Latent codes for each row of `x` (n x inputs) -> n x latent.
  Matrix forward(const Matrix& x) const;
};

/// Kernel hyperparameters stored as unconstrained logarithms.
struct GPHyper {
  double log_lengthscale = 0.0;
  double log_signal_var = 0.0;
  double log_noise_var = -2.302585092994046;  // log 0.1

  double lengthscale() const { return std::exp(log_lengthscale); }
  double signal_var() const { return std::exp(log_signal_var); }
  double noise_var() const { return std::exp(log_noise_var); }
};

/// Affine map of raw image amplitudes onto [0, 1].
struct PatchScaling {
  double lo = 0.0;
  double hi = 1.0;

  static PatchScaling from_image(const GridDataset& ds);
  double apply(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

struct FitConfig {
  int epochs = 50;
  double step = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double jitter = 1e-8;
  int hidden = 64;
  int latent = 2;
  /// Lower bound on the noise variance kept during optimization.
  double min_noise_var = 1e-6;
  bool train_net = true;

  void validate() const;
};

struct DKLModel {
  FeatureNet net;
  GPHyper hyper;
  PatchScaling scaling;
  Matrix latents;        // n x latent
  Vector alpha;          // (K + s_n^2 I)^-1 y, standardized targets
  Matrix chol;           // lower Cholesky factor of K + s_n^2 I (+ jitter)
  double jitter_used = 0.0;
  double y_mean = 0.0;
  double y_scale = 1.0;
  double evidence = 0.0;
  double initial_evidence = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(latents.rows()); }
};

struct Prediction {
  std::vector<double> mean;
  std::vector<double> var;
  std::size_t clamped = 0;  // variances that rounded below zero
};

/// Gradient of the log evidence with respect to every trainable value.
struct EvidenceGradient {
  FeatureNet net;
  double log_lengthscale = 0.0;
  double log_signal_var = 0.0;
  double log_noise_var = 0.0;
};

Vector latent(const FeatureNet& net, std::span<const double> input);
inline Vector latent(const FeatureNet& net, const Patch& patch) { return latent(net, patch.values); }

double kernel(std::span<const double> z1, std::span<const double> z2, const GPHyper& hyper);

/// Flattened, scaled patches as rows.
Matrix inputs_from_patches(const std::vector<Patch>& patches, const PatchScaling& scaling);

/// Targets are standardized internally when n >= 2.
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
};
Standardization standardization_of(std::span<const double> y);

/// Log marginal likelihood of (standardized) y under the deep-kernel GP.
/// Jitter escalates jitter, 10*jitter, 100*jitter on Cholesky failure.
double log_marginal_likelihood(const FeatureNet& net, const GPHyper& hyper, const Matrix& inputs,
                               std::span<const double> y, double jitter = 1e-8,
                               EvidenceGradient* grad = nullptr);

/// Gradient ascent with momentum on the log evidence, returning the best
/// iterate seen. Starts from `warm` when given, otherwise from a random net.
DKLModel fit(const Matrix& inputs, std::span<const double> y, const FitConfig& cfg,
             const PatchScaling& scaling = {}, const DKLModel* warm = nullptr);

/// Builds the cached factorization for fixed net and hyperparameters.
DKLModel condition(const FeatureNet& net, const GPHyper& hyper, const Matrix& inputs,
                   std::span<const double> y, double jitter = 1e-8, const PatchScaling& scaling = {});

Prediction predict(const DKLModel& model, const Matrix& inputs);

/// Single-file binary dump: version byte, dimensions, then little-endian doubles.
void save_model(const DKLModel& model, const std::filesystem::path& path);
DKLModel load_model(const std::filesystem::path& path);

}  // namespace insane::surrogate
