#include "insane/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "insane/evalkit.hpp"
#include "insane/rng.hpp"
#include "insane/scalarize.hpp"

namespace insane {

std::string_view mode_name(Mode m) noexcept {
  switch (m) {
    case Mode::Scalarizer:
      return "scalarizer";
    case Mode::Novelty:
      return "novelty";
    case Mode::Insane:
      return "insane";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name) {
  for (Mode m : {Mode::Scalarizer, Mode::Novelty, Mode::Insane}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

RunConfig RunConfig::defaults(Mode mode, int height, int width) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.acquisition = acquire::Config::scaled_for(height, width);
  cfg.acquisition.sane = mode == Mode::Insane;
  return cfg;
}

void RunConfig::validate() const {
  if (n_init < 2) throw ConfigError("n_init must be >= 2");
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (patch_side < 3 || patch_side % 2 == 0) throw ConfigError("patch side must be odd and >= 3");
  if (eval_every < 0) throw ConfigError("eval cadence must be >= 0");
  if (mode == Mode::Insane && !acquisition.sane) {
    throw ConfigError("insane mode requires strategic sampling (acquisition.sane = true)");
  }
  fit.validate();
  eval_fit.validate();
  acquisition.validate();
  if (mode != Mode::Scalarizer) novelty.validate();
}

std::size_t ExperimentTrace::jump_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.was_jump; }));
}

std::vector<double> compute_targets(const Matrix& loops, Mode mode, const novelty::Config& cfg,
                                    const VoltageWaveform& waveform, std::vector<std::string>* warnings) {
  const auto n = static_cast<int>(loops.rows());
  if (n < 1) throw ConfigError("targets need at least one measured loop");
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (mode == Mode::Scalarizer) {
    const auto volts = waveform.as_double();
    for (int i = 0; i < n; ++i) {
      const auto row = loops.row(i);
      out[static_cast<std::size_t>(i)] =
          loop_area(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), volts);
    }
    return out;
  }

  auto warn = [&](std::string msg) {
    if (warnings != nullptr) warnings->push_back(std::move(msg));
  };
  novelty::Config eff = cfg;
  using novelty::Method;
  switch (cfg.method) {
    case Method::DistanceToCentroid:
      break;
    case Method::NearestNeighbors:
    case Method::LocalOutlierFactor:
      if (n < 2) return out;
      if (eff.k > n - 1) {
        eff.k = n - 1;
        warn("k clamped from " + std::to_string(cfg.k) + " to " + std::to_string(eff.k) + " for " +
             std::to_string(n) + " measured loops");
      }
      break;
    case Method::IsolationForest:
      if (n < 2) return out;
      if (eff.subsample > n) {
        eff.subsample = n;
        warn("isolation-forest subsample clamped from " + std::to_string(cfg.subsample) + " to " +
             std::to_string(n));
      }
      break;
    case Method::OneClassSvm:
      if (n < 2) return out;
      break;
  }
  return novelty::score(loops, eff);
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

Matrix rows_of(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

ExperimentTrace run_experiment(const GridDataset& ds, const RunConfig& cfg) {
  cfg.validate();
  const auto candidates = candidate_locations(ds, cfg.patch_side);
  const std::size_t total = static_cast<std::size_t>(cfg.n_init) + static_cast<std::size_t>(cfg.n_steps);
  if (total > candidates.size()) {
    throw ConfigError("n_init + n_steps = " + std::to_string(total) + " exceeds the " +
                      std::to_string(candidates.size()) + " candidate locations");
  }

  ExperimentTrace trace;
  trace.config = cfg;
  trace.dataset_hash = ds.content_hash();

  const auto scaling = surrogate::PatchScaling::from_image(ds);
  std::vector<Patch> patches;
  patches.reserve(candidates.size());
  for (const auto& loc : candidates) patches.push_back(extract_patch(ds, loc, cfg.patch_side));
  const Matrix cand_inputs = surrogate::inputs_from_patches(patches, scaling);
  patches.clear();

  std::optional<evalkit::NmeEvaluator> evaluator;
  if (cfg.eval_every > 0) evaluator.emplace(ds, cfg.patch_side, cfg.eval_fit);

  Rng rng(mix64(cfg.seed));
  novelty::Config ncfg = cfg.novelty;
  ncfg.seed = mix64(cfg.seed ^ mix64(cfg.novelty.seed));

  MeasuredSet measured;
  std::vector<std::size_t> measured_idx;  // candidate indices in acquisition order
  std::vector<double> targets;
  std::optional<surrogate::DKLModel> model;

  auto refresh_targets = [&]() {
    const Matrix loops = measured.spectra_matrix();
    if (cfg.recompute_novelty || cfg.mode == Mode::Scalarizer || targets.empty()) {
      targets = compute_targets(loops, cfg.mode, ncfg, ds.waveform, &trace.warnings);
    } else {
      const auto fresh = compute_targets(loops, cfg.mode, ncfg, ds.waveform, &trace.warnings);
      targets.push_back(fresh.back());
    }
  };
  auto record_variability = [&](TraceRecord& rec) {
    rec.variability = measured.size() >= 2 ? evalkit::variability(measured.spectra_matrix())
                                           : std::numeric_limits<double>::quiet_NaN();
    trace.variability_series.push_back(rec.variability);
  };
  auto record_nme = [&](TraceRecord& rec, int step) {
    if (!evaluator) return;
    const double v = evaluator->evaluate(measured);
    rec.nme = v;
    trace.nme_series.emplace_back(step, v);
  };

  const auto started = std::chrono::steady_clock::now();
  try {
    // Seed phase: uniform draw without replacement over the candidates.
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int i = 0; i < cfg.n_init; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), order.size() - 1);
      std::swap(order[static_cast<std::size_t>(i)], order[pick(rng)]);
      const std::size_t ci = order[static_cast<std::size_t>(i)];
      measured.add(candidates[ci], spectrum_at(ds, candidates[ci]));
      measured_idx.push_back(ci);
      TraceRecord rec;
      rec.step = i;
      rec.loc = candidates[ci];
      record_variability(rec);
      rec.wall_ms = elapsed_ms(started);
      trace.records.push_back(rec);
    }
    refresh_targets();
    for (int i = 0; i < cfg.n_init; ++i) trace.records[static_cast<std::size_t>(i)].target = targets[static_cast<std::size_t>(i)];
    record_nme(trace.records.back(), 0);

    surrogate::FitConfig fit_cfg = cfg.fit;
    fit_cfg.seed = mix64(cfg.seed ^ 0x5eedf17ULL);
    std::vector<double> acq(candidates.size(), 0.0);
    std::vector<std::size_t> open;
    open.reserve(candidates.size());

    for (int t = 1; t <= cfg.n_steps; ++t) {
      const Matrix train_x = rows_of(cand_inputs, measured_idx);
      model = surrogate::fit(train_x, targets, fit_cfg, scaling, model ? &*model : nullptr);

      open.clear();
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!measured.contains(candidates[i])) open.push_back(i);
      }
      const auto pred = surrogate::predict(*model, rows_of(cand_inputs, open));
      if (pred.clamped > 0) {
        trace.warnings.push_back("step " + std::to_string(t) + ": " + std::to_string(pred.clamped) +
                                 " predictive variances clamped at 0");
      }
      const double best = *std::max_element(targets.begin(), targets.end());
      std::fill(acq.begin(), acq.end(), 0.0);
      for (std::size_t k = 0; k < open.size(); ++k) {
        const double sd = std::sqrt(pred.var[k]);
        acq[open[k]] = cfg.acquisition.kind == acquire::Kind::ExpectedImprovement
                           ? acquire::expected_improvement(pred.mean[k], sd, best, cfg.acquisition.xi)
                           : acquire::ucb(pred.mean[k], sd, cfg.acquisition.beta);
      }

      const auto sel = acquire::select_next(acq, candidates, measured, t, cfg.acquisition);
      if (sel.remote_fallback) {
        trace.warnings.push_back("step " + std::to_string(t) + ": remote set empty, regular selection used");
      }
      measured.add(sel.loc, spectrum_at(ds, sel.loc));
      measured_idx.push_back(sel.index);
      refresh_targets();

      TraceRecord rec;
      rec.step = cfg.n_init + t - 1;
      rec.loc = sel.loc;
      rec.target = targets.back();
      rec.acq = sel.acq;
      rec.was_jump = sel.was_jump;
      rec.remote_fallback = sel.remote_fallback;
      record_variability(rec);
      if (cfg.eval_every > 0 && (t % cfg.eval_every == 0 || t == cfg.n_steps)) record_nme(rec, t);
      rec.wall_ms = elapsed_ms(started);
      trace.records.push_back(rec);
    }
  } catch (const NumericalError& e) {
    throw RunAborted(e.what(), std::move(trace));
  }
  trace.complete = true;
  return trace;
}

}  // namespace insane
