#pragma once

// Data-parallel inner loops used by stats (pixel averaging) and evaluation
// (IoU matrices). Each kernel has a scalar reference and an AVX2 variant;
// the variant is chosen once at runtime from CPUID. Both variants perform the
// same IEEE operations in the same order per element, so results are
// bit-identical and the equivalence tests compare with ==.

#include <span>
#include <string_view>

namespace fn::simd {

enum class Isa { scalar, avx2 };

/// Best ISA the running CPU supports (ignores any override).
Isa detected_isa();

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// Pin the dispatch target. Requests for an unsupported ISA fall back to scalar.
void force_isa(Isa isa);
void reset_isa();

std::string_view isa_name(Isa isa);

/// Axis-aligned box in top-left/extent form.
struct BoxF64 {
    double x, y, width, height;
};

/// Structure-of-arrays box list; all four spans share one length.
struct BoxColumns {
    std::span<const double> x, y, width, height;
    std::size_t size() const { return x.size(); }
};

// acc[i] += src[i]
void accumulate(std::span<const float> src, std::span<double> acc);

// out[i] = acc[i] / n
void divide(std::span<const double> acc, double n, std::span<float> out);

// out[j] = IoU(a, boxes[j])
void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out);

namespace scalar {
double iou_pair(const BoxF64& a, const BoxF64& b);
void accumulate(std::span<const float> src, std::span<double> acc);
void divide(std::span<const double> acc, double n, std::span<float> out);
void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out);
}  // namespace scalar

namespace avx2 {
bool supported();
void accumulate(std::span<const float> src, std::span<double> acc);
void divide(std::span<const double> acc, double n, std::span<float> out);
void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out);
}  // namespace avx2

}  // namespace fn::simd
