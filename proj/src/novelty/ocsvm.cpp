#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "insane/errors.hpp"
#include "insane/novelty.hpp"
#include "insane/simd/kernels.hpp"

namespace insane::novelty {

namespace {

// RBF kernel rows computed on demand. Rows are cached until the cache budget
// is exhausted, then the cache is flushed wholesale.
class KernelRows {
 public:
  KernelRows(const Matrix& x, double gamma) : x_(x), gamma_(gamma), rows_(static_cast<std::size_t>(x.rows())) {
    constexpr std::size_t budget_bytes = std::size_t{256} << 20;
    const auto n = static_cast<std::size_t>(x.rows());
    capacity_ = std::max<std::size_t>(4, budget_bytes / (sizeof(double) * std::max<std::size_t>(n, 1)));
  }

  const std::vector<double>& row(std::size_t i) {
    auto& r = rows_[i];
    if (r.empty()) {
      if (cached_ >= capacity_) {
        for (auto& other : rows_) std::vector<double>().swap(other);
        cached_ = 0;
      }
      const auto n = static_cast<std::size_t>(x_.rows());
      const auto d = static_cast<std::size_t>(x_.cols());
      r.resize(n);
      simd::active().squared_l2_rows(x_.row(static_cast<Eigen::Index>(i)).data(), x_.data(), n, d, d, r.data());
      for (double& v : r) v = std::exp(-gamma_ * v);
      ++cached_;
    }
    return r;
  }

 private:
  const Matrix& x_;
  double gamma_;
  std::vector<std::vector<double>> rows_;
  std::size_t capacity_ = 0;
  std::size_t cached_ = 0;
};

}  // namespace

double default_gamma(const Matrix& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

OcsvmSolution ocsvm_solve(const Matrix& x, double nu, double gamma, const OcsvmOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw InsufficientPointsError("one-class SVM needs at least 2 points");
  if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("nu must lie in (0, 1], got " + std::to_string(nu));
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0, got " + std::to_string(gamma));
  if (!x.allFinite()) throw NonFiniteError("novelty input contains non-finite values");

  const double upper = 1.0 / (nu * static_cast<double>(n));
  KernelRows q(x, gamma);

  // Feasible start: fill alphas at the upper bound in index order.
  std::vector<double> alpha(n, 0.0);
  double remaining = 1.0;
  for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
    alpha[i] = std::min(upper, remaining);
    remaining -= alpha[i];
  }

  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    const auto& qi = q.row(i);
    for (std::size_t t = 0; t < n; ++t) grad[t] += alpha[i] * qi[t];
  }

  const long max_iter = opts.max_iterations > 0
                            ? opts.max_iterations
                            : std::max<long>(100000, 1000 * static_cast<long>(n));
  constexpr double tau = 1e-12;
  const auto at_upper = [&](std::size_t t) { return alpha[t] >= upper; };
  const auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  OcsvmSolution sol;
  double gap = std::numeric_limits<double>::infinity();
  long iter = 0;
  for (;; ++iter) {
    // i maximizes -G over coordinates that may increase.
    std::size_t i = n;
    double g_max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!at_upper(t) && -grad[t] > g_max) {
        g_max = -grad[t];
        i = t;
      }
    }
    // j: second-order selection among coordinates that may decrease.
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_gain = std::numeric_limits<double>::infinity();
    // Rows are copied: fetching another row may flush the cache.
    const std::vector<double> qi = i < n ? q.row(i) : std::vector<double>();
    for (std::size_t t = 0; t < n; ++t) {
      if (at_lower(t)) continue;
      g_min = std::min(g_min, -grad[t]);
      if (qi.empty()) continue;
      const double b = g_max + grad[t];
      if (b > 0.0) {
        // RBF diagonal is exactly 1.
        double a = 2.0 - 2.0 * qi[t];
        if (a <= 0.0) a = tau;
        const double gain = -(b * b) / a;
        if (gain < best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    gap = g_max - g_min;
    if (gap < opts.tolerance || i == n || j == n) break;
    if (iter >= max_iter) {
      throw NumericalError("one-class SVM did not converge in " + std::to_string(max_iter) +
                           " iterations; KKT gap " + std::to_string(gap));
    }

    const std::vector<double> qj = q.row(j);
    double a = 2.0 - 2.0 * qi[j];
    if (a <= 0.0) a = tau;
    double delta = (g_max + grad[j]) / a;
    delta = std::min({delta, upper - alpha[i], alpha[j]});
    alpha[i] += delta;
    alpha[j] -= delta;
    if (upper - alpha[i] <= upper * 1e-15) alpha[i] = upper;
    if (alpha[j] <= upper * 1e-15) alpha[j] = 0.0;
    for (std::size_t t = 0; t < n; ++t) grad[t] += delta * (qi[t] - qj[t]);
  }

  // rho: mean gradient over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (at_upper(t)) {
      lb = std::max(lb, grad[t]);
    } else if (at_lower(t)) {
      ub = std::min(ub, grad[t]);
    } else {
      free_sum += grad[t];
      ++n_free;
    }
  }
  sol.rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (ub + lb);

  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * grad[t];
  sol.objective = 0.5 * obj;
  sol.kkt_gap = std::max(0.0, gap);
  sol.gamma = gamma;
  sol.iterations = iter;
  sol.decision.resize(n);
  for (std::size_t t = 0; t < n; ++t) sol.decision[t] = grad[t] - sol.rho;
  sol.alpha = std::move(alpha);
  return sol;
}

std::vector<double> ocsvm_scores(const Matrix& x, double nu, double gamma) {
  const auto sol = ocsvm_solve(x, nu, gamma > 0.0 ? gamma : default_gamma(x));
  std::vector<double> out(sol.decision.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -sol.decision[i];
  return out;
}

}  // namespace insane::novelty
