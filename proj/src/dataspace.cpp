#include "insane/dataspace.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "json.hpp"

#include "insane/errors.hpp"

namespace insane {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

constexpr int kFormatVersion = 1;

template <typename T>
void write_le(const fs::path& path, const std::vector<T>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
  } else {
    for (T v : values) {
      auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
      std::reverse(bytes.begin(), bytes.end());
      out.write(bytes.data(), sizeof(T));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename T>
std::vector<T> read_le(const fs::path& path, std::size_t count) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw IoError("missing array file " + path.string());
  const auto actual = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  const std::uintmax_t expected = count * sizeof(T);
  if (actual != expected) throw SizeMismatchError(path.string(), expected, actual);

  std::vector<T> values(count);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected));
  if (!in) throw IoError("short read on " + path.string());
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    for (T& v : values) {
      auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
      std::reverse(bytes.begin(), bytes.end());
      v = std::bit_cast<T>(bytes);
    }
  }
  return values;
}

void require_finite(std::span<const float> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteError(std::string(what) + " contains a non-finite value at index " +
                           std::to_string(i));
    }
  }
}

template <typename T>
void fnv1a(std::uint64_t& h, const std::vector<T>& values) {
  const auto* p = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < values.size() * sizeof(T); ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

VoltageWaveform triangular_waveform(std::size_t length, double vmin, double vmax) {
  if (length < 4) throw ConfigError("waveform length must be at least 4");
  VoltageWaveform wf;
  wf.cyclic = true;
  wf.volts.resize(length);
  const double n = static_cast<double>(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double frac = 1.0 - std::abs(1.0 - 2.0 * static_cast<double>(i) / n);
    wf.volts[i] = static_cast<float>(vmin + (vmax - vmin) * frac);
  }
  return wf;
}

void GridDataset::validate() const {
  if (height < 1 || width < 1) throw ConfigError("dataset must have at least one pixel");
  if (waveform.size() < 4) throw ConfigError("waveform must have at least 4 samples");
  if (image.size() != pixel_count()) throw ConfigError("image size does not match H*W");
  if (spectra.size() != pixel_count() * spectrum_len()) {
    throw ConfigError("spectra size does not match H*W*T");
  }
  if (labels && labels->size() != pixel_count()) throw ConfigError("labels size does not match H*W");
  require_finite(waveform.volts, "voltage");
  require_finite(image, "image");
  require_finite(spectra, "spectra");
}

Matrix GridDataset::spectra_matrix() const {
  const auto t = static_cast<Eigen::Index>(spectrum_len());
  Matrix m(static_cast<Eigen::Index>(pixel_count()), t);
  for (std::size_t i = 0; i < spectra.size(); ++i) m.data()[i] = spectra[i];
  return m;
}

std::uint64_t GridDataset::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::vector<int> dims{height, width, static_cast<int>(spectrum_len()), waveform.cyclic};
  fnv1a(h, dims);
  fnv1a(h, waveform.volts);
  fnv1a(h, image);
  fnv1a(h, spectra);
  if (labels) fnv1a(h, *labels);
  return h;
}

void save_dataset(const GridDataset& ds, const fs::path& dir) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json arrays = {{"image", "image.f32"}, {"spectra", "spectra.f32"}, {"voltage", "voltage.f32"}};
  if (ds.labels) arrays["labels"] = "labels.u8";
  const json manifest = {{"version", kFormatVersion},
                         {"height", ds.height},
                         {"width", ds.width},
                         {"spectrum_len", ds.spectrum_len()},
                         {"cyclic", ds.waveform.cyclic},
                         {"arrays", arrays}};

  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot open " + (dir / "manifest.json").string() + " for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + (dir / "manifest.json").string());
  }
  write_le(dir / "image.f32", ds.image);
  write_le(dir / "spectra.f32", ds.spectra);
  write_le(dir / "voltage.f32", ds.waveform.volts);
  if (ds.labels) write_le(dir / "labels.u8", *ds.labels);
}

GridDataset load_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("missing manifest " + manifest_path.string());

  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }

  GridDataset ds;
  std::size_t t = 0;
  json arrays;
  try {
    const int version = manifest.at("version").get<int>();
    if (version != kFormatVersion) {
      throw ConfigError("unsupported dataset version " + std::to_string(version));
    }
    ds.height = manifest.at("height").get<int>();
    ds.width = manifest.at("width").get<int>();
    t = manifest.at("spectrum_len").get<std::size_t>();
    ds.waveform.cyclic = manifest.at("cyclic").get<bool>();
    arrays = manifest.at("arrays");
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
  if (ds.height < 1 || ds.width < 1 || t < 4) {
    throw ConfigError(manifest_path.string() + ": invalid dimensions");
  }

  auto array_path = [&](const char* key) {
    try {
      return dir / arrays.at(key).get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError(manifest_path.string() + ": arrays." + key + ": " + e.what());
    }
  };

  const std::size_t pixels = ds.pixel_count();
  ds.image = read_le<float>(array_path("image"), pixels);
  ds.spectra = read_le<float>(array_path("spectra"), pixels * t);
  ds.waveform.volts = read_le<float>(array_path("voltage"), t);
  if (arrays.contains("labels")) ds.labels = read_le<std::uint8_t>(array_path("labels"), pixels);
  ds.validate();
  return ds;
}

Patch extract_patch(const GridDataset& ds, Location loc, int side) {
  if (side < 3 || side % 2 == 0) {
    throw ConfigError("patch side must be odd and >= 3, got " + std::to_string(side));
  }
  const int half = (side - 1) / 2;
  if (loc.row - half < 0 || loc.col - half < 0 || loc.row + half >= ds.height ||
      loc.col + half >= ds.width) {
    throw BoundsError("patch of side " + std::to_string(side) + " at (" + std::to_string(loc.row) +
                      "," + std::to_string(loc.col) + ") crosses the image margin");
  }
  Patch p{loc, side, std::vector<double>(static_cast<std::size_t>(side * side))};
  for (int i = 0; i < side; ++i) {
    const float* src = ds.image.data() + ds.flat({loc.row - half + i, loc.col - half});
    for (int j = 0; j < side; ++j) p.values[static_cast<std::size_t>(i * side + j)] = src[j];
  }
  return p;
}

std::vector<Location> candidate_locations(const GridDataset& ds, int side) {
  if (side < 3 || side % 2 == 0) {
    throw ConfigError("patch side must be odd and >= 3, got " + std::to_string(side));
  }
  if (ds.height < side || ds.width < side) {
    throw ConfigError("grid " + std::to_string(ds.height) + "x" + std::to_string(ds.width) +
                      " is smaller than patch side " + std::to_string(side) +
                      "; no candidate locations");
  }
  const int half = (side - 1) / 2;
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>((ds.height - side + 1) * (ds.width - side + 1)));
  for (int r = half; r < ds.height - half; ++r) {
    for (int c = half; c < ds.width - half; ++c) out.push_back({r, c});
  }
  return out;
}

std::vector<double> spectrum_at(const GridDataset& ds, Location loc) {
  if (!ds.contains(loc)) {
    throw BoundsError("location (" + std::to_string(loc.row) + "," + std::to_string(loc.col) +
                      ") outside " + std::to_string(ds.height) + "x" + std::to_string(ds.width) +
                      " grid");
  }
  const auto view = ds.spectrum_view(loc);
  return {view.begin(), view.end()};
}

void MeasuredSet::add(Location loc, std::vector<double> spectrum) {
  if (index_.contains(loc)) {
    throw ConfigError("location (" + std::to_string(loc.row) + "," + std::to_string(loc.col) +
                      ") already measured");
  }
  index_.emplace(loc, locations_.size());
  locations_.push_back(loc);
  spectra_.push_back(std::move(spectrum));
}

std::optional<std::size_t> MeasuredSet::index_of(Location loc) const {
  if (auto it = index_.find(loc); it != index_.end()) return it->second;
  return std::nullopt;
}

Matrix MeasuredSet::spectra_matrix() const {
  if (spectra_.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(spectra_.size()), static_cast<Eigen::Index>(spectra_[0].size()));
  for (std::size_t i = 0; i < spectra_.size(); ++i) {
    for (std::size_t j = 0; j < spectra_[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spectra_[i][j];
    }
  }
  return m;
}

}  // namespace insane
