#pragma once

#include <compare>
#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace insane {

/// Row-major dense matrix; one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Pixel coordinate on the acquisition grid.
struct Location {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(const Location&, const Location&) = default;
};

}  // namespace insane

template <>
struct std::hash<insane::Location> {
  std::size_t operator()(const insane::Location& loc) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(loc.row) << 32) ^
                                  static_cast<unsigned int>(loc.col));
  }
};
