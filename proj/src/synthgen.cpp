#include "insane/synthgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "insane/errors.hpp"

namespace insane {

SynthConfig SynthConfig::defaults() {
  SynthConfig cfg;
  constexpr double sigma = 0.02;
  cfg.classes[0] = {.amplitude = 1.0, .coercive_v = 1.0, .width = 0.2, .sigma = sigma};
  cfg.classes[1] = {.amplitude = -1.0, .coercive_v = 1.0, .width = 0.2, .sigma = sigma};
  cfg.classes[2] = {.amplitude = 0.1, .coercive_v = 1.0, .width = 0.2, .sigma = sigma};
  cfg.classes[3] = {.amplitude = 0.5, .coercive_v = 0.5, .width = 0.2, .sigma = sigma};
  cfg.anomaly.params = {.amplitude = 0.7,
                        .coercive_v = 0.3,
                        .width = 0.2,
                        .offset = 0.3,
                        .sigma = sigma,
                        .hump_amplitude = 0.7,
                        .hump_coercive_v = 2.0};
  return cfg;
}

void SynthConfig::validate() const {
  if (height < 1 || width < 1) throw ConfigError("grid dimensions must be positive");
  if (spectrum_len < 4) throw ConfigError("spectrum_len must be at least 4");
  if (!(vmax > vmin)) throw ConfigError("vmax must exceed vmin");
  if (read_index < 0 || read_index >= spectrum_len) {
    throw ConfigError("read_index " + std::to_string(read_index) + " outside [0, spectrum_len)");
  }
  auto check = [](const LoopParams& p, const std::string& name) {
    if (!(p.width > 0.0)) throw ConfigError(name + ": loop width must be > 0");
    if (!(p.sigma >= 0.0)) throw ConfigError(name + ": noise sigma must be >= 0");
  };
  for (std::size_t c = 0; c < classes.size(); ++c) check(classes[c], "class " + std::to_string(c));
  if (layout.kind == LayoutKind::Stripe && layout.stripes < 1) {
    throw ConfigError("stripe layout needs at least one stripe");
  }
  if (layout.kind == LayoutKind::Voronoi && layout.sites < 1) {
    throw ConfigError("voronoi layout needs at least one site");
  }
  if (anomaly.count < 0 || anomaly.radius < 0 || anomaly.margin < 0) {
    throw ConfigError("anomaly count, radius and margin must be >= 0");
  }
  if (anomaly.count > 0) {
    check(anomaly.params, "anomaly");
    const int m = std::max(anomaly.margin, anomaly.radius);
    if (2 * m + 1 > height || 2 * m + 1 > width) {
      throw ConfigError("anomaly disks of radius " + std::to_string(anomaly.radius) +
                        " with margin " + std::to_string(anomaly.margin) + " do not fit the " +
                        std::to_string(height) + "x" + std::to_string(width) + " grid");
    }
  }
}

std::vector<bool> ascending_mask(std::span<const float> volts) {
  std::vector<bool> asc(volts.size(), true);
  for (std::size_t i = 1; i < volts.size(); ++i) asc[i] = volts[i] > volts[i - 1];
  if (volts.size() > 1) asc[0] = asc[1];
  return asc;
}

std::vector<double> loop_model(const LoopParams& p, const VoltageWaveform& waveform, Rng& rng) {
  if (!(p.width > 0.0)) throw ConfigError("loop width must be > 0");
  if (!(p.sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  const auto asc = ascending_mask(waveform.volts);
  std::normal_distribution<double> noise(0.0, p.sigma > 0.0 ? p.sigma : 1.0);
  std::vector<double> out(waveform.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = waveform.volts[i];
    const double sign = asc[i] ? -1.0 : 1.0;
    double r = p.amplitude * std::tanh((v + sign * p.coercive_v) / p.width) + p.offset;
    if (p.hump_amplitude != 0.0) {
      r += p.hump_amplitude * std::tanh((v + sign * p.hump_coercive_v) / p.width);
    }
    if (p.sigma > 0.0) r += noise(rng);
    out[i] = r;
  }
  return out;
}

namespace {

std::vector<std::uint8_t> base_layout(const SynthConfig& cfg, Rng& rng) {
  const int h = cfg.height;
  const int w = cfg.width;
  std::vector<std::uint8_t> base(static_cast<std::size_t>(h * w));
  if (cfg.layout.kind == LayoutKind::Stripe) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int stripe = c * cfg.layout.stripes / w;
        base[static_cast<std::size_t>(r * w + c)] = static_cast<std::uint8_t>(stripe % 3);
      }
    }
    return base;
  }

  const int n = cfg.layout.sites;
  std::vector<std::uint8_t> site_class(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) site_class[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i % 3);
  std::shuffle(site_class.begin(), site_class.end(), rng);
  std::uniform_real_distribution<double> ur(0.0, static_cast<double>(h));
  std::uniform_real_distribution<double> uc(0.0, static_cast<double>(w));
  std::vector<std::pair<double, double>> sites(static_cast<std::size_t>(n));
  for (auto& s : sites) s = {ur(rng), uc(rng)};

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t s = 0; s < sites.size(); ++s) {
        const double dr = r + 0.5 - sites[s].first;
        const double dc = c + 0.5 - sites[s].second;
        const double d = dr * dr + dc * dc;
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      base[static_cast<std::size_t>(r * w + c)] = site_class[best];
    }
  }
  return base;
}

}  // namespace

std::vector<std::uint8_t> generate_labels(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng = substream(cfg.layout.seed, {0x1a70u});
  const auto base = base_layout(cfg, rng);
  const int h = cfg.height;
  const int w = cfg.width;
  auto labels = base;

  // A pixel is a wall when its closed 4-neighborhood spans two domain classes.
  constexpr int dr[] = {0, -1, 1, 0, 0};
  constexpr int dc[] = {0, 0, 0, -1, 1};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      unsigned seen = 0;
      for (int k = 0; k < 5; ++k) {
        const int rr = r + dr[k];
        const int cc = c + dc[k];
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
        seen |= 1u << base[static_cast<std::size_t>(rr * w + cc)];
      }
      if (std::popcount(seen) >= 2) {
        labels[static_cast<std::size_t>(r * w + c)] = static_cast<std::uint8_t>(DomainClass::Wall);
      }
    }
  }

  const int m = std::max(cfg.anomaly.margin, cfg.anomaly.radius);
  std::uniform_int_distribution<int> row_dist(m, h - 1 - m);
  std::uniform_int_distribution<int> col_dist(m, w - 1 - m);
  const int rad = cfg.anomaly.radius;
  for (int a = 0; a < cfg.anomaly.count; ++a) {
    const int cr = row_dist(rng);
    const int cc = col_dist(rng);
    for (int r = cr - rad; r <= cr + rad; ++r) {
      for (int c = cc - rad; c <= cc + rad; ++c) {
        if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) {
          labels[static_cast<std::size_t>(r * w + c)] = static_cast<std::uint8_t>(DomainClass::Anomaly);
        }
      }
    }
  }
  return labels;
}

GridDataset generate(const SynthConfig& cfg, std::uint64_t seed) {
  auto labels = generate_labels(cfg);
  GridDataset ds;
  ds.height = cfg.height;
  ds.width = cfg.width;
  ds.waveform = triangular_waveform(static_cast<std::size_t>(cfg.spectrum_len), cfg.vmin, cfg.vmax);
  const std::size_t t = ds.spectrum_len();
  ds.image.resize(ds.pixel_count());
  ds.spectra.resize(ds.pixel_count() * t);

#pragma omp parallel for schedule(static)
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(cfg.width) +
                              static_cast<std::size_t>(c);
      const auto cls = labels[idx];
      const LoopParams& p = cls == static_cast<std::uint8_t>(DomainClass::Anomaly)
                                ? cfg.anomaly.params
                                : cfg.classes[cls];
      Rng rng = substream(seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)});
      const auto loop = loop_model(p, ds.waveform, rng);
      for (std::size_t k = 0; k < t; ++k) ds.spectra[idx * t + k] = static_cast<float>(loop[k]);
      ds.image[idx] = ds.spectra[idx * t + static_cast<std::size_t>(cfg.read_index)];
    }
  }
  ds.labels = std::move(labels);
  return ds;
}

std::array<std::size_t, kNumClasses> label_histogram(const GridDataset& ds) {
  std::array<std::size_t, kNumClasses> hist{};
  if (!ds.labels) return hist;
  for (auto l : *ds.labels) {
    if (l < kNumClasses) ++hist[l];
  }
  return hist;
}

double anomaly_fraction(const GridDataset& ds) {
  if (!ds.labels || ds.pixel_count() == 0) return 0.0;
  return static_cast<double>(label_histogram(ds)[4]) / static_cast<double>(ds.pixel_count());
}

}  // namespace insane
