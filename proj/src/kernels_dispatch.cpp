#include "nfp/kernels.hpp"

namespace nfp::kernels {

#if defined(__x86_64__)
bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#endif

const Dispatch& active() {
#if defined(__x86_64__)
  static const Dispatch& chosen = cpu_has_avx2() ? avx2 : scalar;
#else
  static const Dispatch& chosen = scalar;
#endif
  return chosen;
}

}  // namespace nfp::kernels
