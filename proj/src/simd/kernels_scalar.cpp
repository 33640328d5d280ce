#include "insane/simd/kernels.hpp"

namespace insane::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_l2_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void squared_l2_rows_scalar(const double* query, const double* rows, std::size_t n_rows,
                            std::size_t dim, std::size_t stride, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = squared_l2_scalar(query, rows + r * stride, dim);
}

// Coordinates are taken relative to the first vertex so that large offsets do
// not cancel catastrophically.
double shoelace2_scalar(const double* x, const double* y, std::size_t n) {
  if (n < 3) return 0.0;
  const double x0 = x[0];
  const double y0 = y[0];
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    s += (x[i] - x0) * (y[i + 1] - y0) - (x[i + 1] - x0) * (y[i] - y0);
  }
  return s;
}

constexpr KernelTable kScalar{Isa::Scalar, dot_scalar, squared_l2_scalar, squared_l2_rows_scalar,
                              shoelace2_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace insane::simd
