#include <atomic>
#include <cstdlib>
#include <string_view>

#include "heliotower/kernels.hpp"

namespace heliotower::kernels {

const KernelTable* avx2_kernel_table_unchecked() noexcept;

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept {
    const KernelTable* best = avx2_table();
    if (const char* env = std::getenv("HELIOTOWER_SIMD")) {
        const std::string_view want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && best != nullptr) return best;
    }
    return best != nullptr ? best : &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
    static const KernelTable* table = cpu_has_avx2() ? avx2_kernel_table_unchecked() : nullptr;
    return table;
}

std::vector<const KernelTable*> available_tables() {
    std::vector<const KernelTable*> out{&scalar_table()};
    if (const auto* t = avx2_table()) out.push_back(t);
    return out;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept {
    const KernelTable* t = isa == Isa::Scalar ? &scalar_table() : avx2_table();
    if (t == nullptr) return false;
    current().store(t, std::memory_order_release);
    return true;
}

}  // namespace heliotower::kernels
