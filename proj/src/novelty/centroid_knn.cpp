#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "insane/errors.hpp"
#include "insane/novelty.hpp"
#include "insane/simd/kernels.hpp"

namespace insane::novelty {

namespace {

void require_finite(const Matrix& x) {
  if (!x.allFinite()) throw NonFiniteError("novelty input contains non-finite values");
}

void require_neighbors(const Matrix& x, int k) {
  if (k < 1) throw ConfigError("k must be >= 1, got " + std::to_string(k));
  if (x.rows() <= k) {
    throw InsufficientPointsError("need more than k=" + std::to_string(k) + " points, got " +
                                  std::to_string(x.rows()));
  }
}

}  // namespace

std::vector<double> dtc_scores(const Matrix& x) {
  if (x.rows() < 1) throw InsufficientPointsError("distance to centroid needs at least one point");
  require_finite(x);
  const Eigen::RowVectorXd centroid = x.colwise().mean();
  const auto& kern = simd::active();
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] =
        std::sqrt(kern.squared_l2(x.row(i).data(), centroid.data(), static_cast<std::size_t>(x.cols())));
  }
  return out;
}

Neighborhoods nearest_neighbors(const Matrix& x, int k) {
  require_neighbors(x, k);
  require_finite(x);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  const auto ku = static_cast<std::size_t>(k);
  Neighborhoods nb;
  nb.k = k;
  nb.index.resize(n * ku);
  nb.distance.resize(n * ku);
  nb.k_distance.resize(n);
  const auto& kern = simd::active();

#pragma omp parallel
  {
    std::vector<double> sq(n);
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n);
#pragma omp for schedule(static)
    for (long li = 0; li < static_cast<long>(n); ++li) {
      const auto i = static_cast<std::size_t>(li);
      kern.squared_l2_rows(x.row(li).data(), x.data(), n, d, d, sq.data());
      cand.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) cand.emplace_back(std::sqrt(sq[j]), static_cast<int>(j));
      }
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
      for (std::size_t m = 0; m < ku; ++m) {
        nb.distance[i * ku + m] = cand[m].first;
        nb.index[i * ku + m] = cand[m].second;
      }
      // k-distance over neighbors distinct from the point itself.
      auto distinct_end = std::partition(cand.begin(), cand.end(),
                                         [](const auto& p) { return p.first > 0.0; });
      const auto n_distinct = static_cast<std::size_t>(distinct_end - cand.begin());
      double kd = 0.0;
      if (n_distinct >= ku) {
        std::nth_element(cand.begin(), cand.begin() + (k - 1), distinct_end);
        kd = cand[ku - 1].first;
      } else if (n_distinct > 0) {
        kd = std::max_element(cand.begin(), distinct_end)->first;
      }
      nb.k_distance[i] = kd;
    }
  }
  return nb;
}

std::vector<double> knn_scores(const Matrix& x, int k) {
  const auto nb = nearest_neighbors(x, k);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto ku = static_cast<std::size_t>(k);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < ku; ++m) s += nb.distance[i * ku + m];
    out[i] = s / static_cast<double>(k);
  }
  return out;
}

}  // namespace insane::novelty
