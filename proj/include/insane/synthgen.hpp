#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "insane/dataspace.hpp"
#include "insane/rng.hpp"

namespace insane {

/// Parametric hysteresis loop. The ascending branch follows
/// A*tanh((V - Vc)/w) + b, the descending branch A*tanh((V + Vc)/w) + b.
/// An optional second tanh term (hump_*) with the same width produces
/// double-humped loops.
struct LoopParams {
  double amplitude = 1.0;
  double coercive_v = 1.0;
  double width = 0.2;
  double offset = 0.0;
  double sigma = 0.0;
  double hump_amplitude = 0.0;
  double hump_coercive_v = 0.0;
};

enum class LayoutKind { Stripe, Voronoi };

struct LayoutConfig {
  LayoutKind kind = LayoutKind::Voronoi;
  int stripes = 3;   // stripe layout: vertical bands
  int sites = 8;     // voronoi layout: seed points
  std::uint64_t seed = 7;
};

struct AnomalyConfig {
  int count = 1;
  int radius = 2;
  /// Minimum distance from a disk center to the grid border (keeps disks
  /// inside the acquisition interior for the default patch size).
  int margin = 8;
  LoopParams params;
};

struct SynthConfig {
  int height = 64;
  int width = 64;
  int spectrum_len = 64;
  double vmin = -3.0;
  double vmax = 3.0;
  LayoutConfig layout;
  /// Loop parameters for classes 0..3 (up, down, in-plane, wall).
  std::array<LoopParams, 4> classes;
  AnomalyConfig anomaly;
  /// Waveform sample copied into the image channel.
  int read_index = 48;
  std::uint64_t seed = 1;

  static SynthConfig defaults();
  void validate() const;
};

/// Per-branch membership of each sample: true where the sweep ascends.
std::vector<bool> ascending_mask(std::span<const float> volts);

/// One loop sampled on `waveform`. Noise is N(0, sigma^2) i.i.d. per sample.
std::vector<double> loop_model(const LoopParams& p, const VoltageWaveform& waveform, Rng& rng);

/// Class layout only (labels 0..4). Depends on the layout seed and
/// anomaly settings, never on the noise seed.
std::vector<std::uint8_t> generate_labels(const SynthConfig& cfg);

/// Full dataset. Pure function of (cfg, seed); each pixel draws noise from
/// its own substream keyed by (seed, row, col).
GridDataset generate(const SynthConfig& cfg, std::uint64_t seed);

/// Fraction of pixels labelled as anomaly.
double anomaly_fraction(const GridDataset& ds);

/// Count of pixels per class id 0..4.
std::array<std::size_t, kNumClasses> label_histogram(const GridDataset& ds);

}  // namespace insane
