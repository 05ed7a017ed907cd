#include "arpqn/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace arpqn::kernels {

#if defined(ARPQN_HAVE_AVX2)
const Table& avx2_table_impl();
#endif

const Table* avx2_table() {
#if defined(ARPQN_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() {
  static const Table& chosen = []() -> const Table& {
    const char* env = std::getenv("ARPQN_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return scalar_table();
    if (const Table* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace arpqn::kernels
