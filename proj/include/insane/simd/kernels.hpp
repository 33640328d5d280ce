#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace insane::simd {

enum class Isa { Scalar, Avx2 };

/// Data-parallel inner loops used by the scorers, the surrogate and the
/// scalarizer. Every entry has a scalar reference implementation; wider
/// variants must agree with it to rounding.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_l2)(const double* a, const double* b, std::size_t n);
  /// out[r] = ||query - rows[r*stride .. r*stride+dim)||^2 for r in [0, n_rows).
  void (*squared_l2_rows)(const double* query, const double* rows, std::size_t n_rows,
                          std::size_t dim, std::size_t stride, double* out);
  /// Twice the signed shoelace area of the closed polygon (x[i], y[i]).
  double (*shoelace2)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

/// True when the binary carries the variant and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Table for a specific ISA; falls back to scalar when unavailable.
const KernelTable& kernels_for(Isa isa) noexcept;

/// The table selected at startup: the widest available ISA, unless the
/// INSANE_SIMD environment variable is set to "scalar".
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
  return active().squared_l2(a.data(), b.data(), a.size());
}

}  // namespace insane::simd
