#include <stdexcept>

#include "ccd/evolution/kernels.hpp"

namespace ccd::evolution {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

KernelKind resolve_kernel(KernelKind k) {
  if (k == KernelKind::automatic) return avx2_available() ? KernelKind::avx2 : KernelKind::portable;
  if (k == KernelKind::avx2 && !avx2_available()) throw std::runtime_error("avx2 kernel requested but the CPU lacks AVX2/FMA");
  return k;
}

void step_batch(KernelKind k, BlochBatch& b, const StepCoefficients& c) {
  switch (k) {
    case KernelKind::reference: step_reference(b, c); return;
    case KernelKind::portable: step_portable(b, c); return;
    case KernelKind::avx2: step_avx2(b, c); return;
    case KernelKind::automatic: step_batch(resolve_kernel(k), b, c); return;
  }
}

}  // namespace ccd::evolution
