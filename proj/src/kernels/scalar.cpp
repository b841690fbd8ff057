#include <cmath>

#include "epiplan/kernels.hpp"

namespace epiplan::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void dense_forward_scalar(const double* w, const double* bias, const double* x, double* out, std::size_t rows,
                          std::size_t cols, bool relu) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double v = bias[r] + dot_scalar(w + r * cols, x, cols);
        out[r] = relu && v < 0.0 ? 0.0 : v;
    }
}

void outer_accumulate_scalar(const double* delta, const double* x, double* grad_w, std::size_t rows,
                             std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(delta[r], x, grad_w + r * cols, cols);
}

SumStats sum_stats_scalar(const double* x, std::size_t n) {
    SumStats s;
    for (std::size_t i = 0; i < n; ++i) {
        s.sum += x[i];
        s.sum_sq += x[i] * x[i];
    }
    return s;
}

void adam_update_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                        const AdamStep& step) {
    const double one_minus_b1 = 1.0 - step.beta1;
    const double one_minus_b2 = 1.0 - step.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = step.beta1 * m[i] + one_minus_b1 * grad[i];
        v[i] = step.beta2 * v[i] + one_minus_b2 * (grad[i] * grad[i]);
        const double m_hat = m[i] / step.bias_correction1;
        const double v_hat = v[i] / step.bias_correction2;
        param[i] = param[i] - step.learning_rate * m_hat / (std::sqrt(v_hat) + step.epsilon);
    }
}

constexpr KernelTable kScalar{
    Isa::kScalar,         dot_scalar,       axpy_scalar, dense_forward_scalar, outer_accumulate_scalar,
    sum_stats_scalar,     adam_update_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace epiplan::kernels
