// Compiled with -mavx2 (see src/CMakeLists.txt). Only reached after a CPUID
// check, so the rest of the binary keeps the baseline ISA.

#include "fn/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define FN_HAVE_AVX2_TU 1
#endif

namespace fn::simd::avx2 {

#ifdef FN_HAVE_AVX2_TU

bool supported() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
}

void accumulate(std::span<const float> src, std::span<double> acc) {
    const std::size_t n = src.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(src.data() + i);
        const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
        const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
        _mm256_storeu_pd(acc.data() + i, _mm256_add_pd(_mm256_loadu_pd(acc.data() + i), lo));
        _mm256_storeu_pd(acc.data() + i + 4, _mm256_add_pd(_mm256_loadu_pd(acc.data() + i + 4), hi));
    }
    for (; i < n; ++i) acc[i] += static_cast<double>(src[i]);
}

void divide(std::span<const double> acc, double n, std::span<float> out) {
    const std::size_t len = acc.size();
    const __m256d denom = _mm256_set1_pd(n);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const __m256d q = _mm256_div_pd(_mm256_loadu_pd(acc.data() + i), denom);
        _mm_storeu_ps(out.data() + i, _mm256_cvtpd_ps(q));
    }
    for (; i < len; ++i) out[i] = static_cast<float>(acc[i] / n);
}

void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out) {
    const std::size_t n = boxes.size();
    const double area_a_s = a.width * a.height;
    const __m256d ax1 = _mm256_set1_pd(a.x);
    const __m256d ay1 = _mm256_set1_pd(a.y);
    const __m256d ax2 = _mm256_set1_pd(a.x + a.width);
    const __m256d ay2 = _mm256_set1_pd(a.y + a.height);
    const __m256d area_a = _mm256_set1_pd(area_a_s);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d bx = _mm256_loadu_pd(boxes.x.data() + j);
        const __m256d by = _mm256_loadu_pd(boxes.y.data() + j);
        const __m256d bw = _mm256_loadu_pd(boxes.width.data() + j);
        const __m256d bh = _mm256_loadu_pd(boxes.height.data() + j);
        const __m256d bx2 = _mm256_add_pd(bx, bw);
        const __m256d by2 = _mm256_add_pd(by, bh);
        // Operand order mirrors std::min/std::max in the scalar reference.
        const __m256d ix = _mm256_max_pd(
            _mm256_sub_pd(_mm256_min_pd(bx2, ax2), _mm256_max_pd(bx, ax1)), zero);
        const __m256d iy = _mm256_max_pd(
            _mm256_sub_pd(_mm256_min_pd(by2, ay2), _mm256_max_pd(by, ay1)), zero);
        const __m256d inter = _mm256_mul_pd(ix, iy);
        const __m256d uni = _mm256_sub_pd(_mm256_add_pd(area_a, _mm256_mul_pd(bw, bh)), inter);
        const __m256d positive = _mm256_cmp_pd(uni, zero, _CMP_GT_OQ);
        const __m256d q = _mm256_div_pd(inter, _mm256_blendv_pd(_mm256_set1_pd(1.0), uni, positive));
        _mm256_storeu_pd(out.data() + j, _mm256_blendv_pd(zero, q, positive));
    }
    for (; j < n; ++j) {
        out[j] = scalar::iou_pair(a, {boxes.x[j], boxes.y[j], boxes.width[j], boxes.height[j]});
    }
}

#else

bool supported() { return false; }
void accumulate(std::span<const float> src, std::span<double> acc) { scalar::accumulate(src, acc); }
void divide(std::span<const double> acc, double n, std::span<float> out) { scalar::divide(acc, n, out); }
void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out) {
    scalar::iou_one_to_many(a, boxes, out);
}

#endif

}  // namespace fn::simd::avx2
