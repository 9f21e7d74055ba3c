// AVX2 variants of the grid kernels. This translation unit is compiled with
// -mavx2 -mfma; callers go through the runtime dispatch in kernels_dispatch.cpp.

#include "spinspec/kernels.hpp"

#if defined(SPINSPEC_HAVE_AVX2) && defined(__x86_64__)

#include <immintrin.h>

namespace spinspec::kernels {

void psd_grid_avx2(const BudgetFactors& f, const double* omega, double* out, std::size_t n) {
    if (f.atomic_zero) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f.flat;
        return;
    }
    const __m256d base = _mm256_set1_pd(f.base);
    const __m256d gamma_sq = _mm256_set1_pd(f.gamma_sq);
    const __m256d lorentz_num = _mm256_set1_pd(f.lorentz_num);
    const __m256d corr_num = _mm256_set1_pd(f.corr_num);
    const __m256d flat = _mm256_set1_pd(f.flat);
    const __m256d dc_num = _mm256_set1_pd(f.dc_num);
    const __m256d dc_k2 = _mm256_set1_pd(f.dc_k2);

    const std::size_t tail = n % 4;
    const std::size_t main = n - tail;
    for (std::size_t i = 0; i < main; i += 4) {
        const __m256d w = _mm256_loadu_pd(omega + i);
        const __m256d w2 = _mm256_mul_pd(w, w);
        const __m256d re_d = _mm256_sub_pd(base, w2);
        const __m256d m2 = _mm256_fmadd_pd(re_d, re_d, _mm256_mul_pd(gamma_sq, w2));
        const __m256d num = _mm256_fmadd_pd(corr_num, re_d, lorentz_num);
        __m256d acc = _mm256_add_pd(flat, _mm256_div_pd(num, m2));
        acc = _mm256_add_pd(acc, _mm256_div_pd(dc_num, _mm256_add_pd(dc_k2, w2)));
        _mm256_storeu_pd(out + i, acc);
    }
    if (tail != 0) psd_grid_scalar(f, omega + main, out + main, tail);
}

void mors_grid_avx2(const MorsFactors& f, const double* omega, double* out, std::size_t n) {
    const __m256d hw = _mm256_set1_pd(f.hw);
    const __m256d hw2 = _mm256_set1_pd(f.hw * f.hw);

    const std::size_t tail = n % 4;
    const std::size_t main = n - tail;
    for (std::size_t i = 0; i < main; i += 4) {
        const __m256d w = _mm256_loadu_pd(omega + i);
        __m256d re = _mm256_setzero_pd();
        __m256d im = _mm256_setzero_pd();
        for (int m = 0; m < 8; ++m) {
            const __m256d center = _mm256_set1_pd(f.center[static_cast<std::size_t>(m)]);
            const __m256d amp = _mm256_set1_pd(f.amp[static_cast<std::size_t>(m)]);
            const __m256d d = _mm256_sub_pd(w, center);
            const __m256d denom = _mm256_fmadd_pd(d, d, hw2);
            const __m256d s = _mm256_div_pd(amp, denom);
            re = _mm256_fmadd_pd(s, hw2, re);
            im = _mm256_fnmadd_pd(_mm256_mul_pd(s, hw), d, im);
        }
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im)));
    }
    if (tail != 0) mors_grid_scalar(f, omega + main, out + main, tail);
}

}  // namespace spinspec::kernels

#endif  // SPINSPEC_HAVE_AVX2 && __x86_64__
