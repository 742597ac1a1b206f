#include "textrl/kernels.hpp"

#include <cmath>

namespace textrl::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void matvec_acc_scalar(double* y, const double* a, const double* x,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

void matvec_t_acc_scalar(double* y, const double* a, const double* x,
                         std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
    }
}

void ger_acc_scalar(double* a, const double* x, const double* y,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = a + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += xr * y[c];
    }
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void rmsprop_update_scalar(double* p, double* cache, const double* g,
                           std::size_t n, double rho, double lr, double eps) {
    for (std::size_t i = 0; i < n; ++i) {
        cache[i] = rho * cache[i] + (1.0 - rho) * g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(cache[i]) + eps);
    }
}

} // namespace

const Backend& scalar() {
    static const Backend backend{
        "scalar",
        dot_scalar,
        matvec_acc_scalar,
        matvec_t_acc_scalar,
        ger_acc_scalar,
        axpy_scalar,
        rmsprop_update_scalar,
    };
    return backend;
}

} // namespace textrl::kernels
