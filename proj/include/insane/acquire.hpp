#pragma once

#include <span>
#include <vector>

#include "insane/types.hpp"

namespace insane {

class MeasuredSet;

namespace acquire {

enum class Kind { ExpectedImprovement, UpperConfidenceBound };

struct Config {
  Kind kind = Kind::ExpectedImprovement;
  double xi = 0.01;    // EI margin
  double beta = 2.0;   // UCB weight
  bool sane = false;   // proximity cost + periodic remote jumps
  int jump_period = 5;
  double tau = 4.0;    // proximity scale, px
  double rho = 15.0;   // jump radius, px

  /// Default tau/rho rescaled by min(H, W) / 64.
  static Config scaled_for(int height, int width);
  void validate() const;
};

double expected_improvement(double mean, double sd, double best, double xi);
double ucb(double mean, double sd, double beta);

/// exp(-dmin^2 / (2 tau^2)), dmin the distance to the nearest measured point.
double proximity_cost(Location loc, std::span<const Location> measured, double tau);

/// Smallest Euclidean pixel distance from loc to any of `measured`.
double min_distance(Location loc, std::span<const Location> measured);

struct Selection {
  std::size_t index = 0;  // into the candidate list
  Location loc;
  double acq = 0.0;       // raw acquisition value at the selected candidate
  bool was_jump = false;
  bool remote_fallback = false;  // jump step whose remote set was empty
};

/// Picks the next measurement among unmeasured candidates. `step` counts
/// post-seed acquisitions from 1. Ties go to the lowest candidate index.
Selection select_next(std::span<const double> acq, std::span<const Location> candidates,
                      const MeasuredSet& measured, int step, const Config& cfg);

}  // namespace acquire
}  // namespace insane
