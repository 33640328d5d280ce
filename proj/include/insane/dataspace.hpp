#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "insane/types.hpp"

namespace insane {

/// Bias sweep shared by every spectrum in a dataset.
struct VoltageWaveform {
  std::vector<float> volts;
  bool cyclic = true;

  std::size_t size() const noexcept { return volts.size(); }
  std::vector<double> as_double() const { return {volts.begin(), volts.end()}; }
};

/// Single triangular cycle vmin -> vmax -> vmin over `length` samples; the
/// first value is not repeated at the end.
VoltageWaveform triangular_waveform(std::size_t length, double vmin = -3.0, double vmax = 3.0);

/// Domain class ids used in label maps.
enum class DomainClass : std::uint8_t {
  OutOfPlaneUp = 0,
  OutOfPlaneDown = 1,
  InPlane = 2,
  Wall = 3,
  Anomaly = 4,
};
inline constexpr int kNumClasses = 5;

/// Image/spectrum grid. Values are stored as 32-bit floats (the on-disk
/// precision); computation widens to double.
struct GridDataset {
  int height = 0;
  int width = 0;
  std::vector<float> image;    // [H][W]
  std::vector<float> spectra;  // [H][W][T]
  VoltageWaveform waveform;
  std::optional<std::vector<std::uint8_t>> labels;  // [H][W]

  std::size_t spectrum_len() const noexcept { return waveform.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t flat(Location loc) const noexcept {
    return static_cast<std::size_t>(loc.row) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(loc.col);
  }
  bool contains(Location loc) const noexcept {
    return loc.row >= 0 && loc.col >= 0 && loc.row < height && loc.col < width;
  }
  float image_at(Location loc) const { return image[flat(loc)]; }
  std::span<const float> spectrum_view(Location loc) const {
    return {spectra.data() + flat(loc) * spectrum_len(), spectrum_len()};
  }

  /// Throws ConfigError / NonFiniteError when an invariant is violated.
  void validate() const;

  /// All spectra widened to an (H*W) x T matrix, row-major pixel order.
  Matrix spectra_matrix() const;

  /// FNV-1a over the raw array bytes; identifies the dataset in traces.
  std::uint64_t content_hash() const;
};

/// Fixed odd-side window of image values centered on a pixel.
struct Patch {
  Location center;
  int side = 0;
  std::vector<double> values;  // row-major side x side

  double at(int i, int j) const { return values[static_cast<std::size_t>(i * side + j)]; }
};

void save_dataset(const GridDataset& ds, const std::filesystem::path& dir);
GridDataset load_dataset(const std::filesystem::path& dir);

Patch extract_patch(const GridDataset& ds, Location loc, int side);

/// Interior pixels whose patch of `side` fits in the image, row-major.
std::vector<Location> candidate_locations(const GridDataset& ds, int side);

/// Simulated measurement: a copy of the stored spectrum.
std::vector<double> spectrum_at(const GridDataset& ds, Location loc);

/// Measured locations with their spectra, in acquisition order.
class MeasuredSet {
 public:
  /// Throws ConfigError if `loc` is already present.
  void add(Location loc, std::vector<double> spectrum);

  bool contains(Location loc) const { return index_.contains(loc); }
  std::size_t size() const noexcept { return locations_.size(); }
  bool empty() const noexcept { return locations_.empty(); }

  const std::vector<Location>& locations() const noexcept { return locations_; }
  const std::vector<double>& spectrum(std::size_t i) const { return spectra_[i]; }
  std::optional<std::size_t> index_of(Location loc) const;

  /// n x T matrix of the measured spectra in insertion order.
  Matrix spectra_matrix() const;

 private:
  std::vector<Location> locations_;
  std::vector<std::vector<double>> spectra_;
  std::unordered_map<Location, std::size_t> index_;
};

}  // namespace insane
