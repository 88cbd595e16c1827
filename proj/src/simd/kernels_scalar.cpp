#include <algorithm>

#include "fn/simd/kernels.hpp"

namespace fn::simd::scalar {

double iou_pair(const BoxF64& a, const BoxF64& b) {
    const double area_a = a.width * a.height;
    const double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = (area_a + b.width * b.height) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

void accumulate(std::span<const float> src, std::span<double> acc) {
    for (std::size_t i = 0; i < src.size(); ++i) acc[i] += static_cast<double>(src[i]);
}

void divide(std::span<const double> acc, double n, std::span<float> out) {
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / n);
}

void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out) {
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        out[j] = iou_pair(a, {boxes.x[j], boxes.y[j], boxes.width[j], boxes.height[j]});
    }
}

}  // namespace fn::simd::scalar
