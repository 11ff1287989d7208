#include <atomic>
#include <cstdlib>
#include <string>

#include "fairtext/kernels.hpp"

namespace fairtext::kernels {

#ifdef FAIRTEXT_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

namespace {

bool cpu_has_avx2() {
#if defined(FAIRTEXT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  const char* env = std::getenv("FAIRTEXT_ISA");
  if (env != nullptr && std::string(env) == "scalar") return &scalar_table();
  if (const KernelTable* wide = avx2_table()) return wide;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#ifdef FAIRTEXT_HAVE_AVX2
  static const bool available = cpu_has_avx2();
  return available ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool force_isa(Isa isa) {
  const KernelTable* table = isa == Isa::Scalar ? &scalar_table() : avx2_table();
  if (table == nullptr) return false;
  current().store(table, std::memory_order_release);
  return true;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Scalar ? "scalar" : "avx2"; }

}  // namespace fairtext::kernels
