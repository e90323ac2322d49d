#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "req/diffcore/kernels.hpp"

namespace req::kernels {
namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &scalar_table();
    case Isa::Avx2: return avx2_table();
    case Isa::Neon: return neon_table();
  }
  return nullptr;
}

Isa initial_isa() {
  if (const char* env = std::getenv("REQ_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && avx2_table() != nullptr) return Isa::Avx2;
    if (v == "neon" && neon_table() != nullptr) return Isa::Neon;
  }
  return detect_isa();
}

struct ActiveState {
  std::atomic<const KernelTable*> table;
  std::atomic<Isa> isa;
  ActiveState() {
    const Isa i = initial_isa();
    isa.store(i);
    table.store(table_for(i));
  }
};

ActiveState& state() {
  static ActiveState s;
  return s;
}

}  // namespace

Isa detect_isa() {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_table() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::Avx2;
  }
#endif
#if defined(__aarch64__)
  if (neon_table() != nullptr) return Isa::Neon;
#endif
  return Isa::Scalar;
}

const KernelTable& active() { return *state().table.load(std::memory_order_relaxed); }

Isa active_isa() { return state().isa.load(); }

void select(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) {
    throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
  }
  state().isa.store(isa);
  state().table.store(t);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace req::kernels
