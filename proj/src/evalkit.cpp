#include "insane/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "insane/config_json.hpp"
#include "insane/engine.hpp"
#include "insane/errors.hpp"
#include "insane/rng.hpp"
#include "insane/scalarize.hpp"

namespace insane::evalkit {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_map(std::span<const double> map, int height, int width) {
  if (height < 1 || width < 1 || map.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ConfigError("map size does not match " + std::to_string(height) + "x" + std::to_string(width));
  }
  for (double v : map) {
    if (!std::isfinite(v)) throw NonFiniteError("map contains a non-finite value");
  }
}

}  // namespace

double nme(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || truth.empty()) {
    throw ConfigError("prediction and truth sizes differ (" + std::to_string(pred.size()) + " vs " +
                      std::to_string(truth.size()) + ")");
  }
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw DegenerateRangeError("ground truth is constant; NME is undefined");
  double err = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) err += std::abs(pred[i] - truth[i]);
  return err / static_cast<double>(truth.size()) / range;
}

double variability(const Matrix& loops) {
  if (loops.rows() < 2) throw InsufficientPointsError("variability needs at least 2 loops");
  const Eigen::RowVectorXd mean = loops.colwise().mean();
  const Eigen::RowVectorXd var = (loops.rowwise() - mean).array().square().colwise().mean();
  return var.array().sqrt().mean();
}

NmeEvaluator::NmeEvaluator(const GridDataset& ds, int patch_side, surrogate::FitConfig fit)
    : ds_(&ds), side_(patch_side), fit_(fit), scaling_(surrogate::PatchScaling::from_image(ds)) {
  candidates_ = candidate_locations(ds, patch_side);
  area_ = scalarize_grid(ds);
  std::vector<Patch> patches;
  patches.reserve(candidates_.size());
  truth_.reserve(candidates_.size());
  for (const auto& loc : candidates_) {
    patches.push_back(extract_patch(ds, loc, patch_side));
    truth_.push_back(area_[ds.flat(loc)]);
  }
  inputs_ = surrogate::inputs_from_patches(patches, scaling_);
  const auto [lo, hi] = std::minmax_element(truth_.begin(), truth_.end());
  if (!(*hi - *lo > 0.0)) throw DegenerateRangeError("loop area is constant over the candidates");
}

double NmeEvaluator::evaluate(const MeasuredSet& measured) const {
  if (measured.size() < 2) throw InsufficientPointsError("NME evaluation needs at least 2 measured points");
  std::vector<Patch> patches;
  std::vector<double> y;
  for (const auto& loc : measured.locations()) {
    patches.push_back(extract_patch(*ds_, loc, side_));
    y.push_back(area_[ds_->flat(loc)]);
  }
  const auto model = surrogate::fit(surrogate::inputs_from_patches(patches, scaling_), y, fit_, scaling_);
  const auto pred = surrogate::predict(model, inputs_);
  return nme(pred.mean, truth_);
}

double eval_nme(const GridDataset& ds, const MeasuredSet& measured, const surrogate::FitConfig& fit,
                int patch_side) {
  return NmeEvaluator(ds, patch_side, fit).evaluate(measured);
}

BaselineStats random_baseline(const GridDataset& ds, std::size_t n_points, std::size_t n_realizations,
                              std::uint64_t seed) {
  const std::size_t pixels = ds.pixel_count();
  if (n_points < 2 || n_points > pixels) {
    throw ConfigError("n_points must lie in [2, " + std::to_string(pixels) + "], got " + std::to_string(n_points));
  }
  if (n_realizations < 2) throw ConfigError("n_realizations must be >= 2");

  const std::size_t t = ds.spectrum_len();
  BaselineStats out;
  out.samples.resize(n_realizations);
#pragma omp parallel
  {
    std::vector<std::size_t> pool(pixels);
    Matrix loops(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(t));
#pragma omp for schedule(static)
    for (long r = 0; r < static_cast<long>(n_realizations); ++r) {
      Rng rng = substream(seed, {static_cast<std::uint64_t>(r)});
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t i = 0; i < n_points; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pixels - 1);
        std::swap(pool[i], pool[pick(rng)]);
        const float* src = ds.spectra.data() + pool[i] * t;
        for (std::size_t k = 0; k < t; ++k) loops(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = src[k];
      }
      out.samples[static_cast<std::size_t>(r)] = variability(loops);
    }
  }
  double mean = 0.0;
  for (double v : out.samples) mean += v;
  mean /= static_cast<double>(n_realizations);
  double var = 0.0;
  for (double v : out.samples) var += (v - mean) * (v - mean);
  out.mean = mean;
  out.std = std::sqrt(var / static_cast<double>(n_realizations));
  return out;
}

void export_map_csv(std::span<const double> map, int height, int width, const std::filesystem::path& path) {
  check_map(map, height, width);
  auto out = open_out(path, true);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (c > 0) out << ',';
      out << fmt17(map[static_cast<std::size_t>(r * width + c)]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void export_map_pgm(std::span<const double> map, int height, int width, const std::filesystem::path& path) {
  check_map(map, height, width);
  const auto [lo_it, hi_it] = std::minmax_element(map.begin(), map.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  auto out = open_out(path, true);
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  for (double v : map) {
    const auto s = static_cast<unsigned>(range > 0.0 ? std::lround((v - lo) / range * 65535.0) : 0);
    const char be[2] = {static_cast<char>((s >> 8) & 0xff), static_cast<char>(s & 0xff)};
    out.write(be, 2);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void export_trace_csv(const ExperimentTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path, true);
  out << "step,row,col,mode,target,acq,was_jump,variability,nme\n";
  const auto mode = mode_name(trace.config.mode);
  for (const auto& r : trace.records) {
    out << r.step << ',' << r.loc.row << ',' << r.loc.col << ',' << mode << ',' << fmt17(r.target) << ','
        << fmt17(r.acq) << ',' << (r.was_jump ? 1 : 0) << ',';
    if (std::isfinite(r.variability)) out << fmt17(r.variability);
    out << ',';
    if (r.nme) out << fmt17(*r.nme);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void export_trace_metadata(const ExperimentTrace& trace, const std::filesystem::path& path) {
  nlohmann::json j;
  j["config"] = to_json(trace.config);
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(trace.dataset_hash));
  j["dataset_hash"] = hash;
  j["complete"] = trace.complete;
  j["records"] = trace.records.size();
  j["jump_count"] = trace.jump_count();
  nlohmann::json fallbacks = nlohmann::json::array();
  for (const auto& r : trace.records) {
    if (r.remote_fallback) fallbacks.push_back(r.step - trace.config.n_init + 1);
  }
  j["remote_fallback_steps"] = fallbacks;
  nlohmann::json nme = nlohmann::json::array();
  for (const auto& [step, v] : trace.nme_series) nme.push_back({{"step", step}, {"nme", v}});
  j["nme"] = nme;
  // Ratio to the variability of the seed set.
  const double initial = trace.config.n_init >= 2 && trace.variability_series.size() >= static_cast<std::size_t>(trace.config.n_init)
                             ? trace.variability_series[static_cast<std::size_t>(trace.config.n_init - 1)]
                             : std::nan("");
  nlohmann::json var = nlohmann::json::array();
  nlohmann::json ratio = nlohmann::json::array();
  for (double v : trace.variability_series) {
    var.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json());
    ratio.push_back(std::isfinite(v) && initial > 0.0 ? nlohmann::json(v / initial) : nlohmann::json());
  }
  j["variability"] = var;
  j["variability_ratio"] = ratio;
  j["warnings"] = trace.warnings;
  auto out = open_out(path, true);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Location> read_trace_locations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,row,col", 0) != 0) {
    throw ConfigError(path.string() + ": not a trace CSV (missing header)");
  }
  std::vector<Location> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string step, row, col;
    if (!std::getline(ss, step, ',') || !std::getline(ss, row, ',') || !std::getline(ss, col, ',')) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    try {
      out.push_back({std::stoi(row), std::stoi(col)});
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return out;
}

}  // namespace insane::evalkit
