#include <cstdlib>
#include <string_view>

#include "dlab/kernels.hpp"

namespace dlab::kernels {

#if defined(DLAB_WITH_AVX2)
const KernelTable* avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#if defined(DLAB_WITH_AVX2)
  return avx2_table_impl();
#else
  return nullptr;
#endif
}

bool cpu_has_avx2() {
#if defined(DLAB_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("LAB_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return scalar_table();
  }
  if (cpu_has_avx2()) {
    if (const KernelTable* t = avx2_table()) return *t;
  }
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace dlab::kernels
