#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense numeric inner loops with a portable scalar reference and an AVX2
// variant picked at runtime. Elementwise kernels are bit-identical across
// variants; reductions may differ in the last bits because of summation order.
namespace epiplan::kernels {

enum class Isa { kScalar, kAvx2 };

struct SumStats {
    double sum = 0.0;
    double sum_sq = 0.0;
};

struct AdamStep {
    double learning_rate = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double bias_correction1 = 1.0;  // 1 - beta1^t
    double bias_correction2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[r] = bias[r] + sum_c w[r*cols + c] * x[c], optionally max(0, .)
    void (*dense_forward)(const double* w, const double* bias, const double* x, double* out, std::size_t rows,
                          std::size_t cols, bool relu);
    // grad_w[r*cols + c] += delta[r] * x[c]
    void (*outer_accumulate)(const double* delta, const double* x, double* grad_w, std::size_t rows,
                             std::size_t cols);
    SumStats (*sum_stats)(const double* x, std::size_t n);
    void (*adam_update)(double* param, const double* grad, double* m, double* v, std::size_t n,
                        const AdamStep& step);
};

const KernelTable& scalar_table();
// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);
// Currently dispatched table; defaults to the best ISA the CPU supports.
const KernelTable& active();
Isa active_isa();
// Overrides dispatch (tests, benchmarking). Throws if the CPU lacks the ISA.
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline SumStats sum_stats(std::span<const double> x) { return active().sum_stats(x.data(), x.size()); }

}  // namespace epiplan::kernels
