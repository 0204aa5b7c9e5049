#pragma once

// Data-parallel inner loops used by the field algebra. Each kernel has a
// scalar reference implementation and, on x86-64, an AVX2/FMA variant.
// The active variant is picked once at startup from the CPU feature set and
// can be forced with IDSM_SIMD=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace idsm::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
    double (*weighted_abs_sum)(const double* w, const double* a, std::size_t n);
    void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    // out[i] = a[i]*b[i]*c[i]
    void (*multiply3)(const double* a, const double* b, const double* c, double* out, std::size_t n);
};

const KernelTable& scalar_table();
// Returns nullptr when the AVX2 variant is not compiled in.
const KernelTable* avx2_table();
bool cpu_has_avx2();

Isa active_isa();
std::string_view isa_name(Isa isa);
// Overrides the runtime choice; falls back to scalar if the ISA is unavailable.
void force_isa(Isa isa);
const KernelTable& table(Isa isa);

// Dispatching front-ends. Sizes of all spans must agree.
double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double weighted_abs_sum(std::span<const double> w, std::span<const double> a);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void multiply3(std::span<const double> a, std::span<const double> b, std::span<const double> c,
               std::span<double> out);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

}  // namespace idsm::kernels
