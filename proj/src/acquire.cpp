#include "insane/acquire.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "insane/dataspace.hpp"
#include "insane/errors.hpp"

namespace insane::acquire {

Config Config::scaled_for(int height, int width) {
  Config cfg;
  const double f = std::min(height, width) / 64.0;
  cfg.tau *= f;
  cfg.rho *= f;
  return cfg;
}

void Config::validate() const {
  if (!(xi >= 0.0)) throw ConfigError("EI margin xi must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("UCB beta must be >= 0");
  if (!(tau > 0.0)) throw ConfigError("proximity scale tau must be > 0");
  if (!(rho > 0.0)) throw ConfigError("jump radius rho must be > 0");
  if (sane && jump_period < 2) throw ConfigError("jump period must be >= 2");
}

double expected_improvement(double mean, double sd, double best, double xi) {
  const double u = mean - best - xi;
  if (!(sd > 0.0)) return std::max(u, 0.0);
  const double z = u / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, u * cdf + sd * pdf);
}

double ucb(double mean, double sd, double beta) { return mean + beta * sd; }

double min_distance(Location loc, std::span<const Location> measured) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : measured) {
    const double dr = loc.row - m.row;
    const double dc = loc.col - m.col;
    best = std::min(best, dr * dr + dc * dc);
  }
  return std::sqrt(best);
}

double proximity_cost(Location loc, std::span<const Location> measured, double tau) {
  if (measured.empty()) throw ConfigError("proximity cost needs at least one measured location");
  const double d = min_distance(loc, measured);
  return std::exp(-d * d / (2.0 * tau * tau));
}

Selection select_next(std::span<const double> acq, std::span<const Location> candidates,
                      const MeasuredSet& measured, int step, const Config& cfg) {
  cfg.validate();
  if (acq.size() != candidates.size()) throw ConfigError("acquisition values and candidates differ in length");

  const auto& done = measured.locations();
  const bool jump_step = cfg.sane && step % cfg.jump_period == 0;
  std::vector<double> dmin;
  if (cfg.sane) {
    if (done.empty()) throw ConfigError("strategic sampling needs at least one measured location");
    dmin.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) dmin[i] = min_distance(candidates[i], done);
  }

  // Strict '>' keeps the lowest index on ties.
  auto argmax = [&](auto&& eligible, auto&& value) {
    std::size_t best = candidates.size();
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (measured.contains(candidates[i]) || !eligible(i)) continue;
      const double v = value(i);
      if (best == candidates.size() || v > best_v) {
        best = i;
        best_v = v;
      }
    }
    return best;
  };

  const auto any = [](std::size_t) { return true; };
  const auto raw = [&](std::size_t i) { return acq[i]; };
  Selection sel;
  std::size_t pick = candidates.size();
  if (!cfg.sane) {
    pick = argmax(any, raw);
  } else {
    if (jump_step) {
      pick = argmax([&](std::size_t i) { return dmin[i] >= cfg.rho; }, raw);
      sel.was_jump = pick != candidates.size();
      sel.remote_fallback = !sel.was_jump;
    }
    if (pick == candidates.size()) {
      const double two_tau2 = 2.0 * cfg.tau * cfg.tau;
      pick = argmax(any, [&](std::size_t i) {
        return acq[i] * (1.0 - std::exp(-dmin[i] * dmin[i] / two_tau2));
      });
    }
  }
  if (pick == candidates.size()) {
    throw ExhaustionError("every candidate location has already been measured");
  }
  sel.index = pick;
  sel.loc = candidates[pick];
  sel.acq = acq[pick];
  return sel;
}

}  // namespace insane::acquire
