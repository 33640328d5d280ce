#include <cstdlib>
#include <string_view>

#include "insane/simd/kernels.hpp"

namespace insane::simd {

#if defined(INSANE_BUILD_AVX2)
extern const KernelTable kAvx2Kernels;
#endif

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(INSANE_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) noexcept {
#if defined(INSANE_BUILD_AVX2)
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) return kAvx2Kernels;
#endif
  (void)isa;
  return scalar_kernels();
}

namespace {

const KernelTable& select() noexcept {
  if (const char* env = std::getenv("INSANE_SIMD"); env && std::string_view(env) == "scalar") {
    return scalar_kernels();
  }
  return kernels_for(Isa::Avx2);
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace insane::simd
