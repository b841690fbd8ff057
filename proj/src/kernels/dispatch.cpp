#include <atomic>
#include <stdexcept>

#include "epiplan/kernels.hpp"

namespace epiplan::kernels {

#ifndef EPIPLAN_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

const KernelTable* best_table() {
    if (cpu_supports(Isa::kAvx2)) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{best_table()};
    return table;
}

}  // namespace

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return true;
        case Isa::kAvx2:
#if defined(EPIPLAN_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

void force_isa(Isa isa) {
    if (!cpu_supports(isa)) throw std::runtime_error("ISA not supported on this CPU: " + std::string(isa_name(isa)));
    current().store(isa == Isa::kAvx2 ? avx2_table() : &scalar_table());
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace epiplan::kernels
