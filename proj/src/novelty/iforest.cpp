#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "insane/errors.hpp"
#include "insane/novelty.hpp"
#include "insane/rng.hpp"

namespace insane::novelty {

double average_path_length(std::size_t m) {
  if (m <= 1) return 0.0;
  const double mm = static_cast<double>(m);
  // Exact harmonic number for moderate sizes, asymptotic expansion beyond.
  double harmonic = 0.0;
  const std::size_t terms = m - 1;
  if (terms <= 100000) {
    for (std::size_t i = terms; i >= 1; --i) harmonic += 1.0 / static_cast<double>(i);
  } else {
    const double t = static_cast<double>(terms);
    harmonic = std::log(t) + 0.57721566490153286 + 0.5 / t - 1.0 / (12.0 * t * t);
  }
  return 2.0 * harmonic - 2.0 * (mm - 1.0) / mm;
}

namespace {

struct Node {
  int feature = -1;  // -1 marks an external node
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int size = 0;
};

class IsolationTree {
 public:
  IsolationTree(const Matrix& x, std::vector<int> sample, int depth_limit, Rng& rng)
      : x_(x), depth_limit_(depth_limit) {
    nodes_.reserve(2 * sample.size());
    build(sample, 0, rng);
  }

  double path_length(const double* point) const {
    int node = 0;
    int depth = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const Node& nd = nodes_[static_cast<std::size_t>(node)];
      node = point[nd.feature] < nd.threshold ? nd.left : nd.right;
      ++depth;
    }
    return depth + average_path_length(static_cast<std::size_t>(nodes_[static_cast<std::size_t>(node)].size));
  }

 private:
  int build(std::vector<int>& idx, int depth, Rng& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{.size = static_cast<int>(idx.size())});
    if (depth >= depth_limit_ || idx.size() <= 1) return id;

    // Only features that vary within the node can separate its points.
    std::vector<int> splittable;
    std::vector<std::pair<double, double>> ranges;
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      double lo = x_(idx[0], f);
      double hi = lo;
      for (int i : idx) {
        lo = std::min(lo, x_(i, f));
        hi = std::max(hi, x_(i, f));
      }
      if (hi > lo) {
        splittable.push_back(static_cast<int>(f));
        ranges.emplace_back(lo, hi);
      }
    }
    if (splittable.empty()) return id;

    std::uniform_int_distribution<std::size_t> pick(0, splittable.size() - 1);
    const std::size_t which = pick(rng);
    const int feature = splittable[which];
    const auto [lo, hi] = ranges[which];
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Any threshold in (lo, hi] separates the node; x < threshold goes left.
    double threshold = lo + unit(rng) * (hi - lo);
    if (!(threshold > lo)) threshold = hi;

    std::vector<int> left;
    std::vector<int> right;
    for (int i : idx) (x_(i, feature) < threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    nodes_[static_cast<std::size_t>(id)].feature = feature;
    nodes_[static_cast<std::size_t>(id)].threshold = threshold;
    const int l = build(left, depth + 1, rng);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = build(right, depth + 1, rng);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Matrix& x_;
  int depth_limit_;
  std::vector<Node> nodes_;
};

}  // namespace

std::vector<double> iforest_scores(const Matrix& x, int n_trees, int subsample, std::uint64_t seed) {
  const auto n = static_cast<int>(x.rows());
  if (n < 2) throw InsufficientPointsError("isolation forest needs at least 2 points");
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (subsample < 2) throw ConfigError("subsample must be >= 2, got " + std::to_string(subsample));
  if (subsample > n) {
    throw ConfigError("subsample " + std::to_string(subsample) + " exceeds population " +
                      std::to_string(n));
  }
  if (!x.allFinite()) throw NonFiniteError("novelty input contains non-finite values");

  const int depth_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(subsample))));
  const auto nu = static_cast<std::size_t>(n);
  std::vector<double> paths(static_cast<std::size_t>(n_trees) * nu);

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n_trees; ++t) {
    Rng rng = substream(seed, {static_cast<std::uint64_t>(t)});
    std::vector<int> pool(nu);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < subsample; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(subsample));
    const IsolationTree tree(x, std::move(pool), depth_limit, rng);
    for (int i = 0; i < n; ++i) {
      paths[static_cast<std::size_t>(t) * nu + static_cast<std::size_t>(i)] = tree.path_length(x.row(i).data());
    }
  }

  const double norm = average_path_length(static_cast<std::size_t>(subsample));
  std::vector<double> out(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    double mean = 0.0;
    for (int t = 0; t < n_trees; ++t) mean += paths[static_cast<std::size_t>(t) * nu + i];
    mean /= static_cast<double>(n_trees);
    out[i] = std::exp2(-mean / norm);
  }
  return out;
}

}  // namespace insane::novelty
