#include <immintrin.h>

#include <cmath>

#include "epiplan/kernels.hpp"

// Compiled with -mavx2 -mfma -ffp-contract=off; only entered after a CPUID check.
namespace epiplan::kernels {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void dense_forward_avx2(const double* w, const double* bias, const double* x, double* out, std::size_t rows,
                        std::size_t cols, bool relu) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double v = bias[r] + dot_avx2(w + r * cols, x, cols);
        out[r] = relu && v < 0.0 ? 0.0 : v;
    }
}

void outer_accumulate_avx2(const double* delta, const double* x, double* grad_w, std::size_t rows,
                           std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_avx2(delta[r], x, grad_w + r * cols, cols);
}

SumStats sum_stats_avx2(const double* x, std::size_t n) {
    __m256d s = _mm256_setzero_pd();
    __m256d q = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        s = _mm256_add_pd(s, v);
        q = _mm256_fmadd_pd(v, v, q);
    }
    SumStats out{hsum(s), hsum(q)};
    for (; i < n; ++i) {
        out.sum += x[i];
        out.sum_sq += x[i] * x[i];
    }
    return out;
}

void adam_update_avx2(double* param, const double* grad, double* m, double* v, std::size_t n,
                      const AdamStep& step) {
    const __m256d b1 = _mm256_set1_pd(step.beta1);
    const __m256d b2 = _mm256_set1_pd(step.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - step.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - step.beta2);
    const __m256d bc1 = _mm256_set1_pd(step.bias_correction1);
    const __m256d bc2 = _mm256_set1_pd(step.bias_correction2);
    const __m256d lr = _mm256_set1_pd(step.learning_rate);
    const __m256d eps = _mm256_set1_pd(step.epsilon);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
        const __m256d vi =
            _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d m_hat = _mm256_div_pd(mi, bc1);
        const __m256d v_hat = _mm256_div_pd(vi, bc2);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
    }
    const double one_minus_b1 = 1.0 - step.beta1;
    const double one_minus_b2 = 1.0 - step.beta2;
    for (; i < n; ++i) {
        m[i] = step.beta1 * m[i] + one_minus_b1 * grad[i];
        v[i] = step.beta2 * v[i] + one_minus_b2 * (grad[i] * grad[i]);
        const double m_hat = m[i] / step.bias_correction1;
        const double v_hat = v[i] / step.bias_correction2;
        param[i] = param[i] - step.learning_rate * m_hat / (std::sqrt(v_hat) + step.epsilon);
    }
}

constexpr KernelTable kAvx2{
    Isa::kAvx2,     dot_avx2,        axpy_avx2, dense_forward_avx2, outer_accumulate_avx2,
    sum_stats_avx2, adam_update_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace epiplan::kernels
