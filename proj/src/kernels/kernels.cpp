#include "smallball/kernels.hpp"

#include <cstdlib>
#include <string>

namespace smallball::kernels {
namespace {

const Ops& select() {
  const char* env = std::getenv("SMALLBALL_VI_KERNELS");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
  if ((want == "auto" || want == "avx2") && avx2_supported()) return avx2_ops();
#endif
#if defined(__aarch64__)
  if (want == "auto" || want == "neon") return neon_ops();
#endif
  return scalar_ops();
}

}  // namespace

const Ops& active_ops() {
  static const Ops& ops = select();
  return ops;
}

std::string active_name() { return active_ops().name; }

std::size_t argmax(std::size_t k, const double* a, double* max_out) {
  std::size_t best = 0;
  double best_v = a[0];
  for (std::size_t i = 1; i < k; ++i) {
    if (a[i] > best_v) {
      best_v = a[i];
      best = i;
    }
  }
  if (max_out) *max_out = best_v;
  return best;
}

}  // namespace smallball::kernels
