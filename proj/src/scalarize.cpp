#include "insane/scalarize.hpp"

#include <cmath>
#include <string>

#include "insane/errors.hpp"
#include "insane/simd/kernels.hpp"

namespace insane {

double loop_area(std::span<const double> spectrum, std::span<const double> volts) {
  if (spectrum.size() != volts.size()) {
    throw ConfigError("spectrum length " + std::to_string(spectrum.size()) +
                      " does not match waveform length " + std::to_string(volts.size()));
  }
  return 0.5 * std::abs(simd::active().shoelace2(volts.data(), spectrum.data(), volts.size()));
}

double loop_area(std::span<const double> spectrum, const VoltageWaveform& waveform) {
  const auto volts = waveform.as_double();
  return loop_area(spectrum, volts);
}

std::vector<double> scalarize_grid(const GridDataset& ds) {
  const auto volts = ds.waveform.as_double();
  const std::size_t t = ds.spectrum_len();
  std::vector<double> out(ds.pixel_count());
  const auto n = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    std::vector<double> s(t);
    const float* src = ds.spectra.data() + static_cast<std::size_t>(i) * t;
    for (std::size_t k = 0; k < t; ++k) s[k] = src[k];
    out[static_cast<std::size_t>(i)] = loop_area(s, volts);
  }
  return out;
}

}  // namespace insane
