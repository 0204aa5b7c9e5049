#include "idsm/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace idsm::kernels {

#if !defined(IDSM_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(IDSM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Isa detect() {
    if (const char* env = std::getenv("IDSM_SIMD")) {
        std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{&table(detect())};
    return slot;
}

void check_size(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("kernel operand size mismatch");
}

}  // namespace

const KernelTable& table(Isa isa) {
    if (isa == Isa::avx2 && cpu_has_avx2()) return *avx2_table();
    return scalar_table();
}

Isa active_isa() { return active_slot().load() == &scalar_table() ? Isa::scalar : Isa::avx2; }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) { active_slot().store(&table(isa)); }

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    check_size(w.size(), a.size());
    check_size(w.size(), b.size());
    return active_slot().load()->weighted_dot(w.data(), a.data(), b.data(), w.size());
}

double weighted_abs_sum(std::span<const double> w, std::span<const double> a) {
    check_size(w.size(), a.size());
    return active_slot().load()->weighted_abs_sum(w.data(), a.data(), w.size());
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    check_size(a.size(), b.size());
    check_size(a.size(), out.size());
    active_slot().load()->multiply(a.data(), b.data(), out.data(), a.size());
}

void multiply3(std::span<const double> a, std::span<const double> b, std::span<const double> c,
               std::span<double> out) {
    check_size(a.size(), b.size());
    check_size(a.size(), c.size());
    check_size(a.size(), out.size());
    active_slot().load()->multiply3(a.data(), b.data(), c.data(), out.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), y.size());
    active_slot().load()->axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { active_slot().load()->scale(alpha, x.data(), x.size()); }

}  // namespace idsm::kernels
