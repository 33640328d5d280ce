#pragma once

#include <span>

#include "insane/dataspace.hpp"

namespace insane {

/// Unsigned area enclosed by the closed polygon (volts[i], spectrum[i]),
/// closed back to the first vertex.
double loop_area(std::span<const double> spectrum, std::span<const double> volts);
double loop_area(std::span<const double> spectrum, const VoltageWaveform& waveform);

/// Per-pixel loop area, H*W values in row-major order.
std::vector<double> scalarize_grid(const GridDataset& ds);

}  // namespace insane
