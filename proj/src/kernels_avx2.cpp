#include "textrl/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace textrl::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double total = hsum(acc);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

void matvec_acc_avx2(double* y, const double* a, const double* x,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] += dot_avx2(a + r * cols, x, cols);
}

void matvec_t_acc_avx2(double* y, const double* a, const double* x,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        const __m256d xr = _mm256_set1_pd(x[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), xr,
                                          _mm256_loadu_pd(y + c));
            _mm256_storeu_pd(y + c, acc);
        }
        for (; c < cols; ++c) y[c] += row[c] * x[r];
    }
}

void ger_acc_avx2(double* a, const double* x, const double* y,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = a + r * cols;
        const __m256d xr = _mm256_set1_pd(x[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d acc = _mm256_fmadd_pd(xr, _mm256_loadu_pd(y + c),
                                          _mm256_loadu_pd(row + c));
            _mm256_storeu_pd(row + c, acc);
        }
        for (; c < cols; ++c) row[c] += x[r] * y[c];
    }
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void rmsprop_update_avx2(double* p, double* cache, const double* g,
                         std::size_t n, double rho, double lr, double eps) {
    const __m256d vrho = _mm256_set1_pd(rho);
    const __m256d vone_m_rho = _mm256_set1_pd(1.0 - rho);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d ci = _mm256_mul_pd(vrho, _mm256_loadu_pd(cache + i));
        ci = _mm256_fmadd_pd(vone_m_rho, _mm256_mul_pd(gi, gi), ci);
        _mm256_storeu_pd(cache + i, ci);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(ci), veps);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, gi), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        cache[i] = rho * cache[i] + (1.0 - rho) * g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(cache[i]) + eps);
    }
}

} // namespace

const Backend* avx2_impl() {
    static const Backend backend{
        "avx2",
        dot_avx2,
        matvec_acc_avx2,
        matvec_t_acc_avx2,
        ger_acc_avx2,
        axpy_avx2,
        rmsprop_update_avx2,
    };
    return &backend;
}

} // namespace textrl::kernels
