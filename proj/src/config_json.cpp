#include "insane/config_json.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "insane/errors.hpp"

namespace insane {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

json loop_json(const LoopParams& p) {
  return {{"amplitude", p.amplitude}, {"coercive_v", p.coercive_v}, {"width", p.width},
          {"offset", p.offset},       {"sigma", p.sigma},           {"hump_amplitude", p.hump_amplitude},
          {"hump_coercive_v", p.hump_coercive_v}};
}

LoopParams loop_from(const json& j, LoopParams p, const std::string& where) {
  only_keys(j, where, {"amplitude", "coercive_v", "width", "offset", "sigma", "hump_amplitude", "hump_coercive_v"});
  take(j, "amplitude", p.amplitude, where);
  take(j, "coercive_v", p.coercive_v, where);
  take(j, "width", p.width, where);
  take(j, "offset", p.offset, where);
  take(j, "sigma", p.sigma, where);
  take(j, "hump_amplitude", p.hump_amplitude, where);
  take(j, "hump_coercive_v", p.hump_coercive_v, where);
  return p;
}

json fit_json(const surrogate::FitConfig& f) {
  return {{"epochs", f.epochs}, {"step", f.step},     {"momentum", f.momentum}, {"jitter", f.jitter},
          {"hidden", f.hidden}, {"latent", f.latent}, {"min_noise_var", f.min_noise_var}};
}

surrogate::FitConfig fit_from(const json& j, surrogate::FitConfig f, const std::string& where) {
  only_keys(j, where, {"epochs", "step", "momentum", "jitter", "hidden", "latent", "min_noise_var"});
  take(j, "epochs", f.epochs, where);
  take(j, "step", f.step, where);
  take(j, "momentum", f.momentum, where);
  take(j, "jitter", f.jitter, where);
  take(j, "hidden", f.hidden, where);
  take(j, "latent", f.latent, where);
  take(j, "min_noise_var", f.min_noise_var, where);
  return f;
}

}  // namespace

json to_json(const SynthConfig& cfg) {
  json classes = json::array();
  for (const auto& c : cfg.classes) classes.push_back(loop_json(c));
  return {{"height", cfg.height},
          {"width", cfg.width},
          {"spectrum_len", cfg.spectrum_len},
          {"vmin", cfg.vmin},
          {"vmax", cfg.vmax},
          {"read_index", cfg.read_index},
          {"seed", cfg.seed},
          {"layout",
           {{"kind", cfg.layout.kind == LayoutKind::Stripe ? "stripe" : "voronoi"},
            {"stripes", cfg.layout.stripes},
            {"sites", cfg.layout.sites},
            {"seed", cfg.layout.seed}}},
          {"classes", classes},
          {"anomaly",
           {{"count", cfg.anomaly.count},
            {"radius", cfg.anomaly.radius},
            {"margin", cfg.anomaly.margin},
            {"params", loop_json(cfg.anomaly.params)}}}};
}

SynthConfig synth_config_from_json(const json& j, SynthConfig cfg) {
  const std::string w = "synth";
  only_keys(j, w, {"height", "width", "spectrum_len", "vmin", "vmax", "read_index", "seed", "layout", "classes", "anomaly"});
  take(j, "height", cfg.height, w);
  take(j, "width", cfg.width, w);
  take(j, "spectrum_len", cfg.spectrum_len, w);
  take(j, "vmin", cfg.vmin, w);
  take(j, "vmax", cfg.vmax, w);
  take(j, "read_index", cfg.read_index, w);
  take(j, "seed", cfg.seed, w);
  if (j.contains("layout")) {
    const auto& l = j["layout"];
    only_keys(l, "synth.layout", {"kind", "stripes", "sites", "seed"});
    std::string kind = cfg.layout.kind == LayoutKind::Stripe ? "stripe" : "voronoi";
    take(l, "kind", kind, "synth.layout");
    if (kind == "stripe") {
      cfg.layout.kind = LayoutKind::Stripe;
    } else if (kind == "voronoi") {
      cfg.layout.kind = LayoutKind::Voronoi;
    } else {
      throw ConfigError("synth.layout.kind: expected \"stripe\" or \"voronoi\", got \"" + kind + "\"");
    }
    take(l, "stripes", cfg.layout.stripes, "synth.layout");
    take(l, "sites", cfg.layout.sites, "synth.layout");
    take(l, "seed", cfg.layout.seed, "synth.layout");
  }
  if (j.contains("classes")) {
    const auto& c = j["classes"];
    if (!c.is_array() || c.size() != 4) throw ConfigError("synth.classes: expected an array of 4 loop objects");
    for (std::size_t i = 0; i < 4; ++i) {
      cfg.classes[i] = loop_from(c[i], cfg.classes[i], "synth.classes[" + std::to_string(i) + "]");
    }
  }
  if (j.contains("anomaly")) {
    const auto& a = j["anomaly"];
    only_keys(a, "synth.anomaly", {"count", "radius", "margin", "params"});
    take(a, "count", cfg.anomaly.count, "synth.anomaly");
    take(a, "radius", cfg.anomaly.radius, "synth.anomaly");
    take(a, "margin", cfg.anomaly.margin, "synth.anomaly");
    if (a.contains("params")) cfg.anomaly.params = loop_from(a["params"], cfg.anomaly.params, "synth.anomaly.params");
  }
  cfg.validate();
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const auto& n = cfg.novelty;
  const auto& a = cfg.acquisition;
  json j = {{"mode", mode_name(cfg.mode)},
            {"n_init", cfg.n_init},
            {"n_steps", cfg.n_steps},
            {"seed", cfg.seed},
            {"patch_side", cfg.patch_side},
            {"eval_every", cfg.eval_every},
            {"recompute_novelty", cfg.recompute_novelty},
            {"fit", fit_json(cfg.fit)},
            {"eval_fit", fit_json(cfg.eval_fit)},
            {"acquisition",
             {{"kind", a.kind == acquire::Kind::ExpectedImprovement ? "ei" : "ucb"},
              {"xi", a.xi},
              {"beta", a.beta},
              {"sane", a.sane},
              {"jump_period", a.jump_period},
              {"tau", a.tau},
              {"rho", a.rho}}}};
  if (cfg.mode != Mode::Scalarizer) {
    j["novelty"] = {{"method", novelty::method_name(n.method)},
                    {"k", n.k},
                    {"n_trees", n.n_trees},
                    {"subsample", n.subsample},
                    {"nu", n.nu},
                    {"gamma", n.gamma},
                    {"seed", n.seed},
                    {"normalize", n.normalize},
                    {"whiten", n.whiten},
                    {"max_points", n.max_points}};
  }
  return j;
}

RunConfig run_config_from_json(const json& j, RunConfig cfg) {
  const std::string w = "run";
  only_keys(j, w, {"mode", "n_init", "n_steps", "seed", "patch_side", "eval_every", "recompute_novelty", "novelty",
                   "fit", "eval_fit", "acquisition"});
  if (j.contains("mode")) {
    std::string m;
    take(j, "mode", m, w);
    const auto mode = parse_mode(m);
    if (!mode) throw ConfigError("run.mode: expected scalarizer, novelty or insane, got \"" + m + "\"");
    cfg.mode = *mode;
  }
  take(j, "n_init", cfg.n_init, w);
  take(j, "n_steps", cfg.n_steps, w);
  take(j, "seed", cfg.seed, w);
  take(j, "patch_side", cfg.patch_side, w);
  take(j, "eval_every", cfg.eval_every, w);
  take(j, "recompute_novelty", cfg.recompute_novelty, w);
  if (j.contains("novelty")) {
    const auto& n = j["novelty"];
    const std::string nw = "run.novelty";
    only_keys(n, nw, {"method", "k", "n_trees", "subsample", "nu", "gamma", "seed", "normalize", "whiten", "max_points"});
    if (n.contains("method")) {
      std::string m;
      take(n, "method", m, nw);
      const auto method = novelty::parse_method(m);
      if (!method) throw ConfigError(nw + ".method: unknown scorer \"" + m + "\"");
      cfg.novelty.method = *method;
    }
    take(n, "k", cfg.novelty.k, nw);
    take(n, "n_trees", cfg.novelty.n_trees, nw);
    take(n, "subsample", cfg.novelty.subsample, nw);
    take(n, "nu", cfg.novelty.nu, nw);
    take(n, "gamma", cfg.novelty.gamma, nw);
    take(n, "seed", cfg.novelty.seed, nw);
    take(n, "normalize", cfg.novelty.normalize, nw);
    take(n, "whiten", cfg.novelty.whiten, nw);
    take(n, "max_points", cfg.novelty.max_points, nw);
  }
  if (j.contains("fit")) cfg.fit = fit_from(j["fit"], cfg.fit, "run.fit");
  if (j.contains("eval_fit")) cfg.eval_fit = fit_from(j["eval_fit"], cfg.eval_fit, "run.eval_fit");
  if (j.contains("acquisition")) {
    const auto& a = j["acquisition"];
    const std::string aw = "run.acquisition";
    only_keys(a, aw, {"kind", "xi", "beta", "sane", "jump_period", "tau", "rho"});
    if (a.contains("kind")) {
      std::string k;
      take(a, "kind", k, aw);
      if (k == "ei") {
        cfg.acquisition.kind = acquire::Kind::ExpectedImprovement;
      } else if (k == "ucb") {
        cfg.acquisition.kind = acquire::Kind::UpperConfidenceBound;
      } else {
        throw ConfigError(aw + ".kind: expected \"ei\" or \"ucb\", got \"" + k + "\"");
      }
    }
    take(a, "xi", cfg.acquisition.xi, aw);
    take(a, "beta", cfg.acquisition.beta, aw);
    take(a, "sane", cfg.acquisition.sane, aw);
    take(a, "jump_period", cfg.acquisition.jump_period, aw);
    take(a, "tau", cfg.acquisition.tau, aw);
    take(a, "rho", cfg.acquisition.rho, aw);
  }
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON: " + e.what());
  }
}

}  // namespace insane
