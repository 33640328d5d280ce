#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "insane/dataspace.hpp"
#include "insane/types.hpp"

namespace insane::novelty {

enum class Method { DistanceToCentroid, NearestNeighbors, IsolationForest, OneClassSvm, LocalOutlierFactor };

/// Short names used on the command line and in configs: dtc, nn, if, ocsvm, lof.
std::string_view method_name(Method m) noexcept;
std::optional<Method> parse_method(std::string_view name);

/// True for scorers whose cost grows with the square of the population.
bool is_quadratic(Method m) noexcept;

struct Config {
  Method method = Method::NearestNeighbors;
  int k = 5;                   // NN, LOF
  int n_trees = 100;           // IF
  int subsample = 0;           // IF; 0 selects min(256, n)
  double nu = 0.1;             // OCSVM
  double gamma = 0.0;          // OCSVM; 0 selects 1 / (d * var(X))
  std::uint64_t seed = 0;      // IF
  bool normalize = true;       // min-max to [0, 1] per call
  bool whiten = false;         // z-score each feature column first
  std::size_t max_points = 10000;  // cap for quadratic scorers in novelty_map

  void validate() const;
};

/// ||x_i - mean(X)||.
std::vector<double> dtc_scores(const Matrix& x);

/// Mean distance to the k nearest other points; ties by ascending index.
std::vector<double> knn_scores(const Matrix& x, int k);

/// k nearest neighbors of every point (self excluded), sorted by
/// (distance, index), plus each point's k-distance computed over neighbors
/// that do not coincide with it.
struct Neighborhoods {
  int k = 0;
  std::vector<int> index;         // n*k
  std::vector<double> distance;   // n*k
  std::vector<double> k_distance; // n
};
Neighborhoods nearest_neighbors(const Matrix& x, int k);

/// Isolation-forest anomaly score 2^(-E[h(x)] / c(psi)).
std::vector<double> iforest_scores(const Matrix& x, int n_trees, int subsample, std::uint64_t seed);

/// Average path length of an unsuccessful BST search over m points,
/// 2 H(m-1) - 2 (m-1) / m, with c(0) = c(1) = 0.
double average_path_length(std::size_t m);

struct OcsvmSolution {
  std::vector<double> alpha;   // sums to 1, each in [0, 1/(nu n)]
  double rho = 0.0;
  double objective = 0.0;      // 0.5 alpha^T Q alpha
  double kkt_gap = 0.0;        // max KKT violation at exit
  double gamma = 0.0;
  long iterations = 0;
  std::vector<double> decision;  // f(x_i) = sum_j alpha_j K_ij - rho
};

struct OcsvmOptions {
  double tolerance = 1e-10;
  long max_iterations = 0;  // 0 selects max(100000, 1000 n)
};

/// Solves the nu-one-class SVM dual with an RBF kernel by SMO with
/// second-order working-set selection. Throws NumericalError when the
/// iteration cap is hit before the KKT gap drops below tolerance.
OcsvmSolution ocsvm_solve(const Matrix& x, double nu, double gamma, const OcsvmOptions& opts = {});

/// Default RBF width 1 / (d * var(X)), or 1 when X has zero variance.
double default_gamma(const Matrix& x);

/// -f(x_i): higher means more novel.
std::vector<double> ocsvm_scores(const Matrix& x, double nu, double gamma);

/// Local outlier factor with k-distinct k-distance.
std::vector<double> lof_scores(const Matrix& x, int k);

/// Min-max to [0, 1]; constant input maps to all zeros.
std::vector<double> minmax_normalize(std::vector<double> v);

/// Dispatch on cfg.method, optional whitening and normalization.
std::vector<double> score(const Matrix& x, const Config& cfg);

/// Scores for every pixel of the dataset as one population, H*W row-major.
/// Throws ResourceCapError for quadratic scorers above cfg.max_points.
std::vector<double> novelty_map(const GridDataset& ds, const Config& cfg);

}  // namespace insane::novelty
