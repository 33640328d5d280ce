#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "insane/acquire.hpp"
#include "insane/dataspace.hpp"
#include "insane/errors.hpp"
#include "insane/novelty.hpp"
#include "insane/surrogate.hpp"

namespace insane {

enum class Mode { Scalarizer, Novelty, Insane };

std::string_view mode_name(Mode m) noexcept;
std::optional<Mode> parse_mode(std::string_view name);

struct RunConfig {
  Mode mode = Mode::Scalarizer;
  novelty::Config novelty;
  int n_init = 10;
  int n_steps = 200;
  std::uint64_t seed = 0;
  int patch_side = 17;
  surrogate::FitConfig fit;
  /// Cold-start fit used only for NME evaluation.
  surrogate::FitConfig eval_fit{.epochs = 200};
  acquire::Config acquisition;
  /// Steps between NME evaluations; 0 disables NME entirely.
  int eval_every = 10;
  /// Re-score every measured loop each step (false freezes scores at
  /// measurement time).
  bool recompute_novelty = true;

  /// Mode-appropriate defaults; tau/rho scaled to the grid.
  static RunConfig defaults(Mode mode, int height = 64, int width = 64);
  void validate() const;
};

struct TraceRecord {
  int step = 0;  // 0-based; seeds first
  Location loc;
  double target = 0.0;
  double acq = 0.0;
  bool was_jump = false;
  bool remote_fallback = false;
  double variability = 0.0;  // NaN while fewer than two loops are measured
  std::optional<double> nme;
  double wall_ms = 0.0;
};

struct ExperimentTrace {
  RunConfig config;
  std::uint64_t dataset_hash = 0;
  std::vector<TraceRecord> records;
  std::vector<std::pair<int, double>> nme_series;  // (post-seed step, NME); step 0 = after seeds
  std::vector<double> variability_series;          // one per record
  std::vector<std::string> warnings;
  bool complete = false;

  std::size_t jump_count() const;
};

/// Thrown when a run stops on a numerical failure; carries the partial trace.
class RunAborted : public NumericalError {
 public:
  RunAborted(const std::string& what, ExperimentTrace partial)
      : NumericalError(what), trace(std::move(partial)) {}
  ExperimentTrace trace;
};

/// Fitting targets for the measured loops (rows). Novelty modes clamp k to
/// n-1 and psi to n, appending a note to `warnings`; below a scorer's
/// minimum population the targets are zero.
std::vector<double> compute_targets(const Matrix& loops, Mode mode, const novelty::Config& cfg,
                                    const VoltageWaveform& waveform,
                                    std::vector<std::string>* warnings = nullptr);

ExperimentTrace run_experiment(const GridDataset& ds, const RunConfig& cfg);

}  // namespace insane
