#pragma once

#include <cstddef>
#include <string>

namespace textrl::kernels {

// Double-precision primitives behind the network's inner loops. Every entry
// has a scalar reference implementation; wider variants (AVX2) are selected
// at runtime and must agree with the reference within floating-point
// reassociation error (see tests/test_kernels.cpp).
struct Backend {
    const char* name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += A x, A row-major (rows x cols), x has cols entries, y has rows.
    void (*matvec_acc)(double* y, const double* a, const double* x,
                       std::size_t rows, std::size_t cols);
    // y += A^T x, A row-major (rows x cols), x has rows entries, y has cols.
    void (*matvec_t_acc)(double* y, const double* a, const double* x,
                         std::size_t rows, std::size_t cols);
    // A += x y^T, rank-1 update of a row-major (rows x cols) matrix.
    void (*ger_acc)(double* a, const double* x, const double* y,
                    std::size_t rows, std::size_t cols);
    // y += alpha * x
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    // cache = rho*cache + (1-rho)*g^2;  p -= lr * g / (sqrt(cache) + eps)
    void (*rmsprop_update)(double* p, double* cache, const double* g,
                           std::size_t n, double rho, double lr, double eps);
};

const Backend& scalar();

// Null when the binary was built without AVX2 support or the CPU lacks it.
const Backend* avx2();

// Backend used by the network. Picks the widest supported variant once per
// process; override with TEXTRL_KERNELS=scalar|avx2 in the environment.
const Backend& active();

// All compiled-in backends usable on this machine (for equivalence tests).
std::size_t available_count();
const Backend& available(std::size_t i);

} // namespace textrl::kernels
