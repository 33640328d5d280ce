#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "insane/dataspace.hpp"
#include "insane/surrogate.hpp"

namespace insane {

struct ExperimentTrace;

namespace evalkit {

/// mean|pred - truth| / (max(truth) - min(truth)).
double nme(std::span<const double> pred, std::span<const double> truth);

/// Mean over timesteps of the population standard deviation across loops
/// (rows of `loops`).
double variability(const Matrix& loops);

/// Fits a loop-area surrogate on the measured set and scores its prediction
/// over all acquisition candidates. Reuses the candidate inputs and ground
/// truth across calls.
class NmeEvaluator {
 public:
  NmeEvaluator(const GridDataset& ds, int patch_side, surrogate::FitConfig fit);

  double evaluate(const MeasuredSet& measured) const;

  std::span<const Location> candidates() const noexcept { return candidates_; }
  std::span<const double> truth() const noexcept { return truth_; }

 private:
  const GridDataset* ds_;
  int side_;
  surrogate::FitConfig fit_;
  surrogate::PatchScaling scaling_;
  std::vector<Location> candidates_;
  Matrix inputs_;               // one row per candidate
  std::vector<double> truth_;   // loop area per candidate
  std::vector<double> area_;    // loop area per pixel
};

double eval_nme(const GridDataset& ds, const MeasuredSet& measured, const surrogate::FitConfig& fit,
                int patch_side = 17);

struct BaselineStats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> samples;
};

/// Variability of `n_points` pixels drawn without replacement, repeated
/// over realizations keyed by (seed, realization index).
BaselineStats random_baseline(const GridDataset& ds, std::size_t n_points, std::size_t n_realizations,
                              std::uint64_t seed);

/// Grid maps are H*W row-major.
void export_map_csv(std::span<const double> map, int height, int width, const std::filesystem::path& path);
void export_map_pgm(std::span<const double> map, int height, int width, const std::filesystem::path& path);
void export_trace_csv(const ExperimentTrace& trace, const std::filesystem::path& path);

/// Config snapshot, dataset hash, completion flag, NME series, variability
/// and variability ratio-to-initial series.
void export_trace_metadata(const ExperimentTrace& trace, const std::filesystem::path& path);

/// Locations (in order) read back from a trace CSV.
std::vector<Location> read_trace_locations(const std::filesystem::path& path);

}  // namespace evalkit
}  // namespace insane
