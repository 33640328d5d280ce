// Command-line front end: generate, score-map, run, baseline, eval.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "insane/config_json.hpp"
#include "insane/dataspace.hpp"
#include "insane/engine.hpp"
#include "insane/errors.hpp"
#include "insane/evalkit.hpp"
#include "insane/novelty.hpp"
#include "insane/synthgen.hpp"

namespace {

using namespace insane;

enum Exit : int { kOk = 0, kConfig = 2, kIo = 3, kCap = 4, kNumerical = 5 };

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "error (" << kind << "): " << e.what() << '\n';
  return code;
}

/// Maps library exceptions onto the exit-code taxonomy.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ResourceCapError& e) {
    return report("resource cap", e, kCap);
  } catch (const IoError& e) {
    return report("io", e, kIo);
  } catch (const SizeMismatchError& e) {
    return report("io", e, kIo);
  } catch (const NonFiniteError& e) {
    return report("data", e, kIo);
  } catch (const NumericalError& e) {
    return report("numerical", e, kNumerical);
  } catch (const DegenerateRangeError& e) {
    return report("numerical", e, kNumerical);
  } catch (const Error& e) {
    return report("config", e, kConfig);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("io", e, kIo);
  }
}

struct GenerateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
  SynthConfig cfg = SynthConfig::defaults();
  if (!a.config.empty()) cfg = synth_config_from_json(read_json_file(a.config));
  cfg.validate();
  const std::uint64_t seed = a.seed.value_or(cfg.seed);
  const auto ds = generate(cfg, seed);
  save_dataset(ds, a.out);

  const auto hist = label_histogram(ds);
  static constexpr const char* names[] = {"out_of_plane_up", "out_of_plane_down", "in_plane", "wall", "anomaly"};
  std::cout << "dataset " << a.out << ": " << ds.height << "x" << ds.width << ", T=" << ds.spectrum_len()
            << ", seed=" << seed << '\n';
  for (int c = 0; c < kNumClasses; ++c) std::cout << "  class " << c << " " << names[c] << ": " << hist[static_cast<std::size_t>(c)] << '\n';
  std::cout << "anomaly_fraction=" << fmt(anomaly_fraction(ds)) << '\n';
  std::cout << "dataset_variability=" << fmt(evalkit::variability(ds.spectra_matrix())) << '\n';
  return kOk;
}

struct ScoreArgs {
  std::string dataset;
  std::string method = "nn";
  novelty::Config cfg;
  bool raw = false;
  std::string out;
};

int cmd_score_map(ScoreArgs a) {
  const auto method = novelty::parse_method(a.method);
  if (!method) throw ConfigError("unknown scorer \"" + a.method + "\" (dtc, nn, if, ocsvm, lof)");
  a.cfg.method = *method;
  a.cfg.normalize = !a.raw;
  a.cfg.validate();
  const auto ds = load_dataset(a.dataset);
  const auto map = novelty::novelty_map(ds, a.cfg);
  evalkit::export_map_csv(map, ds.height, ds.width, a.out + ".csv");
  evalkit::export_map_pgm(map, ds.height, ds.width, a.out + ".pgm");
  std::cout << "wrote " << a.out << ".csv and " << a.out << ".pgm (" << novelty::method_name(*method) << ")\n";
  return kOk;
}

struct RunArgs {
  std::string dataset;
  std::string config;
  std::string out;
  std::optional<std::string> mode;
  std::optional<std::string> scorer;
  std::optional<int> n_init, n_steps, patch, eval_every, epochs, k, trees, jump_period;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, rho, xi;
  std::optional<std::string> acq;
};

int cmd_run(const RunArgs& a) {
  const auto ds = load_dataset(a.dataset);

  Mode mode = Mode::Scalarizer;
  nlohmann::json file_cfg;
  if (!a.config.empty()) file_cfg = read_json_file(a.config);
  if (a.mode) {
    const auto m = parse_mode(*a.mode);
    if (!m) throw ConfigError("unknown mode \"" + *a.mode + "\" (scalarizer, novelty, insane)");
    mode = *m;
  } else if (file_cfg.contains("mode") && file_cfg["mode"].is_string()) {
    const auto m = parse_mode(file_cfg["mode"].get<std::string>());
    if (m) mode = *m;
  }
  if (mode == Mode::Scalarizer && (a.scorer || a.k || a.trees)) {
    throw ConfigError("scorer options are incompatible with scalarizer mode");
  }

  RunConfig cfg = RunConfig::defaults(mode, ds.height, ds.width);
  if (!file_cfg.is_null()) cfg = run_config_from_json(file_cfg, cfg);
  cfg.mode = mode;
  if (mode == Mode::Insane) cfg.acquisition.sane = true;
  if (a.scorer) {
    const auto m = novelty::parse_method(*a.scorer);
    if (!m) throw ConfigError("unknown scorer \"" + *a.scorer + "\" (dtc, nn, if, ocsvm, lof)");
    cfg.novelty.method = *m;
  }
  if (a.n_init) cfg.n_init = *a.n_init;
  if (a.n_steps) cfg.n_steps = *a.n_steps;
  if (a.seed) cfg.seed = *a.seed;
  if (a.patch) cfg.patch_side = *a.patch;
  if (a.eval_every) cfg.eval_every = *a.eval_every;
  if (a.epochs) cfg.fit.epochs = *a.epochs;
  if (a.k) cfg.novelty.k = *a.k;
  if (a.trees) cfg.novelty.n_trees = *a.trees;
  if (a.jump_period) cfg.acquisition.jump_period = *a.jump_period;
  if (a.tau) cfg.acquisition.tau = *a.tau;
  if (a.rho) cfg.acquisition.rho = *a.rho;
  if (a.xi) cfg.acquisition.xi = *a.xi;
  if (a.acq) {
    if (*a.acq == "ei") {
      cfg.acquisition.kind = acquire::Kind::ExpectedImprovement;
    } else if (*a.acq == "ucb") {
      cfg.acquisition.kind = acquire::Kind::UpperConfidenceBound;
    } else {
      throw ConfigError("unknown acquisition \"" + *a.acq + "\" (ei, ucb)");
    }
  }
  cfg.validate();

  const std::string meta = a.out + ".json";
  ExperimentTrace trace;
  int code = kOk;
  try {
    trace = run_experiment(ds, cfg);
  } catch (const RunAborted& e) {
    std::cerr << "error (numerical): " << e.what() << "; partial trace written\n";
    trace = e.trace;
    code = kNumerical;
  }
  evalkit::export_trace_csv(trace, a.out);
  evalkit::export_trace_metadata(trace, meta);
  for (const auto& w : trace.warnings) std::cerr << "warning: " << w << '\n';

  const double final_var = trace.variability_series.empty() ? std::nan("") : trace.variability_series.back();
  std::cout << "final_nme=" << (trace.nme_series.empty() ? std::string("nan") : fmt(trace.nme_series.back().second))
            << " final_variability=" << fmt(final_var) << " jumps=" << trace.jump_count()
            << " records=" << trace.records.size() << (trace.complete ? "" : " incomplete") << '\n';
  return code;
}

struct BaselineArgs {
  std::string dataset;
  long points = 200;
  long realizations = 200;
  std::uint64_t seed = 0;
};

int cmd_baseline(const BaselineArgs& a) {
  if (a.points < 2) throw ConfigError("--points must be >= 2");
  if (a.realizations < 2) throw ConfigError("--realizations must be >= 2");
  const auto ds = load_dataset(a.dataset);
  if (static_cast<std::size_t>(a.points) > ds.pixel_count()) {
    throw ConfigError("--points " + std::to_string(a.points) + " exceeds the " + std::to_string(ds.pixel_count()) +
                      " grid pixels");
  }
  const auto stats = evalkit::random_baseline(ds, static_cast<std::size_t>(a.points),
                                              static_cast<std::size_t>(a.realizations), a.seed);
  std::cout << "random baseline over " << a.realizations << " realizations of " << a.points << " points\n";
  std::cout << "baseline_mean=" << fmt(stats.mean) << " baseline_std=" << fmt(stats.std) << '\n';
  return kOk;
}

struct EvalArgs {
  std::string dataset;
  std::string trace;
  int patch = 17;
  int epochs = 200;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  const auto ds = load_dataset(a.dataset);
  const auto locs = evalkit::read_trace_locations(a.trace);
  MeasuredSet measured;
  for (const auto& loc : locs) measured.add(loc, spectrum_at(ds, loc));
  surrogate::FitConfig fit;
  fit.epochs = a.epochs;
  fit.seed = a.seed;
  const double v = evalkit::variability(measured.spectra_matrix());
  const double e = evalkit::eval_nme(ds, measured, fit, a.patch);
  std::cout << "points=" << measured.size() << " nme=" << fmt(e) << " variability=" << fmt(v) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Novelty-driven autonomous experiment simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 1;
  if (const char* env = std::getenv("INSANE_THREADS")) threads = std::max(1, std::atoi(env));
  app.add_option("--threads", threads, "Worker threads (default: $INSANE_THREADS or 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset directory");
  g->add_option("--config", gen.config, "SynthConfig JSON (defaults when omitted)");
  g->add_option("--out", gen.out, "Output dataset directory")->required();
  g->add_option("--seed", gen.seed, "Noise seed (overrides the config seed)");

  ScoreArgs sc;
  auto* s = app.add_subcommand("score-map", "Novelty score map over a whole dataset");
  s->add_option("--dataset", sc.dataset, "Dataset directory")->required();
  s->add_option("--method", sc.method, "Scorer: dtc, nn, if, ocsvm, lof")->capture_default_str();
  s->add_option("--k", sc.cfg.k, "Neighbors for nn/lof")->capture_default_str();
  s->add_option("--trees", sc.cfg.n_trees, "Isolation-forest trees")->capture_default_str();
  s->add_option("--subsample", sc.cfg.subsample, "Isolation-forest subsample (0 = min(256, n))")->capture_default_str();
  s->add_option("--nu", sc.cfg.nu, "One-class SVM nu")->capture_default_str();
  s->add_option("--gamma", sc.cfg.gamma, "One-class SVM RBF gamma (0 = 1/(d var X))")->capture_default_str();
  s->add_option("--seed", sc.cfg.seed, "Isolation-forest seed")->capture_default_str();
  s->add_flag("--raw", sc.raw, "Skip min-max normalization");
  s->add_flag("--whiten", sc.cfg.whiten, "Z-score spectra features first");
  s->add_option("--max-points", sc.cfg.max_points, "Point cap for quadratic scorers")->capture_default_str();
  s->add_option("--out", sc.out, "Output prefix; writes <prefix>.csv and <prefix>.pgm")->required();

  RunArgs ra;
  auto* r = app.add_subcommand("run", "Run one autonomous-experiment realization");
  r->add_option("--dataset", ra.dataset, "Dataset directory")->required();
  r->add_option("--config", ra.config, "RunConfig JSON; flags override its fields");
  r->add_option("--out", ra.out, "Trace CSV path (metadata goes to <out>.json)")->required();
  r->add_option("--mode", ra.mode, "scalarizer, novelty or insane (default scalarizer)");
  r->add_option("--scorer", ra.scorer, "Novelty scorer: dtc, nn, if, ocsvm, lof (default nn)");
  r->add_option("--init", ra.n_init, "Random seed points (default 10)");
  r->add_option("--steps", ra.n_steps, "Acquisition steps (default 200)");
  r->add_option("--seed", ra.seed, "Master seed (default 0)");
  r->add_option("--patch", ra.patch, "Odd patch side (default 17)");
  r->add_option("--eval-every", ra.eval_every, "Steps between NME evaluations, 0 disables (default 10)");
  r->add_option("--epochs", ra.epochs, "Surrogate epochs per step (default 50)");
  r->add_option("--k", ra.k, "Neighbors for nn/lof (default 5)");
  r->add_option("--trees", ra.trees, "Isolation-forest trees (default 100)");
  r->add_option("--jump-period", ra.jump_period, "Remote jump every m steps (default 5)");
  r->add_option("--tau", ra.tau, "Proximity scale in px (default 4 * min(H,W)/64)");
  r->add_option("--rho", ra.rho, "Jump radius in px (default 15 * min(H,W)/64)");
  r->add_option("--xi", ra.xi, "EI margin (default 0.01)");
  r->add_option("--acq", ra.acq, "Acquisition: ei or ucb (default ei)");

  BaselineArgs ba;
  auto* b = app.add_subcommand("baseline", "Variability of random point selections");
  b->add_option("--dataset", ba.dataset, "Dataset directory")->required();
  b->add_option("--points", ba.points, "Points per realization")->capture_default_str();
  b->add_option("--realizations", ba.realizations, "Number of realizations")->capture_default_str();
  b->add_option("--seed", ba.seed, "Seed")->capture_default_str();

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Recompute NME and variability from a trace");
  e->add_option("--dataset", ea.dataset, "Dataset directory")->required();
  e->add_option("--trace", ea.trace, "Trace CSV")->required();
  e->add_option("--patch", ea.patch, "Odd patch side")->capture_default_str();
  e->add_option("--epochs", ea.epochs, "Evaluation surrogate epochs")->capture_default_str();
  e->add_option("--seed", ea.seed, "Evaluation surrogate seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kConfig;
  }

  omp_set_num_threads(threads);
  if (g->parsed()) return guarded([&] { return cmd_generate(gen); });
  if (s->parsed()) return guarded([&] { return cmd_score_map(sc); });
  if (r->parsed()) return guarded([&] { return cmd_run(ra); });
  if (b->parsed()) return guarded([&] { return cmd_baseline(ba); });
  if (e->parsed()) return guarded([&] { return cmd_eval(ea); });
  return kConfig;
}
