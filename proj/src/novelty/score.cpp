#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "insane/errors.hpp"
#include "insane/novelty.hpp"

namespace insane::novelty {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kNames{{
    {Method::DistanceToCentroid, "dtc"},
    {Method::NearestNeighbors, "nn"},
    {Method::IsolationForest, "if"},
    {Method::OneClassSvm, "ocsvm"},
    {Method::LocalOutlierFactor, "lof"},
}};

Matrix whitened(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    const double sd = std::sqrt((x.col(c).array() - mean).square().mean());
    out.col(c).array() -= mean;
    if (sd > 0.0) out.col(c).array() /= sd;
  }
  return out;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  for (const auto& [method, name] : kNames) {
    if (method == m) return name;
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, n] : kNames) {
    if (n == name) return method;
  }
  return std::nullopt;
}

bool is_quadratic(Method m) noexcept {
  return m == Method::NearestNeighbors || m == Method::LocalOutlierFactor || m == Method::OneClassSvm;
}

void Config::validate() const {
  switch (method) {
    case Method::NearestNeighbors:
    case Method::LocalOutlierFactor:
      if (k < 1) throw ConfigError("k must be >= 1, got " + std::to_string(k));
      break;
    case Method::IsolationForest:
      if (n_trees < 1) throw ConfigError("n_trees must be >= 1, got " + std::to_string(n_trees));
      if (subsample != 0 && subsample < 2) {
        throw ConfigError("subsample must be >= 2 (or 0 for automatic), got " + std::to_string(subsample));
      }
      break;
    case Method::OneClassSvm:
      if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("nu must lie in (0, 1], got " + std::to_string(nu));
      if (gamma < 0.0) throw ConfigError("gamma must be > 0 (or 0 for automatic)");
      break;
    case Method::DistanceToCentroid:
      break;
  }
}

std::vector<double> minmax_normalize(std::vector<double> v) {
  if (v.empty()) return v;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  for (double& s : v) s = range > 0.0 ? (s - lo) / range : 0.0;
  return v;
}

std::vector<double> score(const Matrix& x, const Config& cfg) {
  cfg.validate();
  const Matrix wx = cfg.whiten ? whitened(x) : Matrix();
  const Matrix& data = cfg.whiten ? wx : x;
  std::vector<double> s;
  switch (cfg.method) {
    case Method::DistanceToCentroid:
      s = dtc_scores(data);
      break;
    case Method::NearestNeighbors:
      s = knn_scores(data, cfg.k);
      break;
    case Method::IsolationForest: {
      const int psi = cfg.subsample > 0 ? cfg.subsample : std::min<int>(256, static_cast<int>(data.rows()));
      s = iforest_scores(data, cfg.n_trees, psi, cfg.seed);
      break;
    }
    case Method::OneClassSvm:
      s = ocsvm_scores(data, cfg.nu, cfg.gamma);
      break;
    case Method::LocalOutlierFactor:
      s = lof_scores(data, cfg.k);
      break;
  }
  return cfg.normalize ? minmax_normalize(std::move(s)) : s;
}

std::vector<double> novelty_map(const GridDataset& ds, const Config& cfg) {
  cfg.validate();
  const std::size_t n = ds.pixel_count();
  if (is_quadratic(cfg.method) && n > cfg.max_points) {
    throw ResourceCapError(std::string(method_name(cfg.method)) + " scoring of " + std::to_string(n) +
                           " points exceeds the cap of " + std::to_string(cfg.max_points) +
                           " points for quadratic-cost scorers");
  }
  return score(ds.spectra_matrix(), cfg);
}

}  // namespace insane::novelty
