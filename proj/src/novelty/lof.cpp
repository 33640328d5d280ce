#include <algorithm>
#include <cmath>
#include <limits>

#include "insane/novelty.hpp"

namespace insane::novelty {

std::vector<double> lof_scores(const Matrix& x, int k) {
  const auto nb = nearest_neighbors(x, k);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto ku = static_cast<std::size_t>(k);
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t m = 0; m < ku; ++m) {
      const auto o = static_cast<std::size_t>(nb.index[i * ku + m]);
      reach += std::max(nb.k_distance[o], nb.distance[i * ku + m]);
    }
    reach /= static_cast<double>(k);
    lrd[i] = reach > 0.0 ? 1.0 / reach : inf;
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < ku; ++m) {
      const double lo = lrd[static_cast<std::size_t>(nb.index[i * ku + m])];
      if (std::isinf(lo) && std::isinf(lrd[i])) {
        s += 1.0;
      } else {
        s += lo / lrd[i];
      }
    }
    out[i] = s / static_cast<double>(k);
  }
  return out;
}

}  // namespace insane::novelty
