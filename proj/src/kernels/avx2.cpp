// Built with -mavx2 for this translation unit only; entered solely after a
// runtime CPU check in dispatch.cpp.
#include "heliotower/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace heliotower::kernels {

namespace {

// exp(x) for x in [-700, 700]: Cody-Waite reduction by ln 2, degree-13 Taylor
// polynomial on |r| <= ln2/2, exponent assembled from the rounded multiple.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-700.0)), _mm256_set1_pd(700.0));
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d r =
        _mm256_sub_pd(_mm256_sub_pd(x, _mm256_mul_pd(k, ln2_hi)), _mm256_mul_pd(k, ln2_lo));

    static constexpr double kInvFact[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
        1.0,                1.0};
    __m256d p = _mm256_set1_pd(kInvFact[0]);
    for (int i = 1; i < 14; ++i) {
        p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(kInvFact[i]));
    }

    // 2^k: round-trip k through the mantissa of 2^52 + 2^51.
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);
    const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)),
                                        _mm256_castpd_si256(magic));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

void cosine(const Vec3& sun, const double* tx, const double* ty, const double* tz, double* out,
            std::size_t n) {
    const __m256d sx = _mm256_set1_pd(sun.x);
    const __m256d sy = _mm256_set1_pd(sun.y);
    const __m256d sz = _mm256_set1_pd(sun.z);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_mul_pd(sx, _mm256_loadu_pd(tx + i));
        d = _mm256_add_pd(d, _mm256_mul_pd(sy, _mm256_loadu_pd(ty + i)));
        d = _mm256_add_pd(d, _mm256_mul_pd(sz, _mm256_loadu_pd(tz + i)));
        const __m256d c = _mm256_mul_pd(half, _mm256_add_pd(one, d));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_max_pd(zero, c)));
    }
    if (i < n) scalar_table().cosine(sun, tx + i, ty + i, tz + i, out + i, n - i);
}

void bisector(const Vec3& sun, const double* tx, const double* ty, const double* tz, double* nx,
              double* ny, double* nz, std::size_t n) {
    const __m256d sx = _mm256_set1_pd(sun.x);
    const __m256d sy = _mm256_set1_pd(sun.y);
    const __m256d sz = _mm256_set1_pd(sun.z);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d hx = _mm256_add_pd(sx, _mm256_loadu_pd(tx + i));
        const __m256d hy = _mm256_add_pd(sy, _mm256_loadu_pd(ty + i));
        const __m256d hz = _mm256_add_pd(sz, _mm256_loadu_pd(tz + i));
        __m256d len = _mm256_mul_pd(hx, hx);
        len = _mm256_add_pd(len, _mm256_mul_pd(hy, hy));
        len = _mm256_add_pd(len, _mm256_mul_pd(hz, hz));
        len = _mm256_sqrt_pd(len);
        _mm256_storeu_pd(nx + i, _mm256_div_pd(hx, len));
        _mm256_storeu_pd(ny + i, _mm256_div_pd(hy, len));
        _mm256_storeu_pd(nz + i, _mm256_div_pd(hz, len));
    }
    if (i < n) scalar_table().bisector(sun, tx + i, ty + i, tz + i, nx + i, ny + i, nz + i, n - i);
}

void attenuation_batch(const double* slant, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c0 = _mm256_set1_pd(0.99321);
    const __m256d c1 = _mm256_set1_pd(1.176e-4);
    const __m256d c2 = _mm256_set1_pd(1.97e-8);
    const __m256d ce = _mm256_set1_pd(-1.106e-4);
    const __m256d knee = _mm256_set1_pd(1000.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d s = _mm256_max_pd(zero, _mm256_loadu_pd(slant + i));
        const __m256d poly = _mm256_add_pd(_mm256_sub_pd(c0, _mm256_mul_pd(c1, s)),
                                           _mm256_mul_pd(_mm256_mul_pd(c2, s), s));
        const __m256d near = _mm256_cmp_pd(s, knee, _CMP_LE_OQ);
        __m256d value = poly;
        if (_mm256_movemask_pd(near) != 0xF) {
            value = _mm256_blendv_pd(exp_pd(_mm256_mul_pd(ce, s)), poly, near);
        }
        value = _mm256_min_pd(_mm256_max_pd(value, zero), one);
        _mm256_storeu_pd(out + i, value);
    }
    if (i < n) scalar_table().attenuation(slant + i, out + i, n - i);
}

void disc_capture_batch(const double* radius, const double* sigma, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_max_pd(zero, _mm256_loadu_pd(radius + i));
        const __m256d s = _mm256_loadu_pd(sigma + i);
        const __m256d x =
            _mm256_div_pd(_mm256_mul_pd(r, r), _mm256_mul_pd(two, _mm256_mul_pd(s, s)));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(one, exp_pd(_mm256_sub_pd(zero, x))));
    }
    if (i < n) scalar_table().disc_capture(radius + i, sigma + i, out + i, n - i);
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (std::size_t i = n4; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, v);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable* avx2_kernel_table_unchecked() noexcept {
    static const KernelTable table{"avx2", cosine, bisector, attenuation_batch,
                                   disc_capture_batch, dot, axpy};
    return &table;
}

}  // namespace heliotower::kernels

#else

namespace heliotower::kernels {
const KernelTable* avx2_kernel_table_unchecked() noexcept { return nullptr; }
}  // namespace heliotower::kernels

#endif
