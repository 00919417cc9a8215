#include "terrafit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace terrafit::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops* avx2_ops();
#endif
#if defined(__aarch64__)
const Ops* neon_ops();
#endif

namespace {

const Ops* detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_ops();
#endif
#if defined(__aarch64__)
  return neon_ops();
#endif
  return &scalar_ops();
}

const Ops* find_by_name(const char* name) {
  for (const Ops* ops : available_ops()) {
    if (std::strcmp(ops->name, name) == 0) return ops;
  }
  return nullptr;
}

std::atomic<const Ops*>& active_slot() {
  static std::atomic<const Ops*> slot{nullptr};
  return slot;
}

}  // namespace

std::vector<const Ops*> available_ops() {
  std::vector<const Ops*> out{&scalar_ops()};
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) out.push_back(avx2_ops());
#endif
#if defined(__aarch64__)
  out.push_back(neon_ops());
#endif
  return out;
}

const Ops& active_ops() {
  const Ops* ops = active_slot().load(std::memory_order_acquire);
  if (ops) return *ops;
  if (const char* env = std::getenv("TERRAFIT_KERNELS")) {
    if (const Ops* forced = find_by_name(env)) {
      active_slot().store(forced, std::memory_order_release);
      return *forced;
    }
  }
  ops = detect_best();
  active_slot().store(ops, std::memory_order_release);
  return *ops;
}

bool force_ops(const char* name) {
  const Ops* ops = find_by_name(name);
  if (!ops) return false;
  active_slot().store(ops, std::memory_order_release);
  return true;
}

}  // namespace terrafit::kernels
