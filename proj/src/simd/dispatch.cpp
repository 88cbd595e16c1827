#include <atomic>
#include <cstdlib>

#include "fn/simd/kernels.hpp"

namespace fn::simd {
namespace {

Isa detect() {
    if (const char* env = std::getenv("FN_FORCE_SCALAR"); env && *env && *env != '0') return Isa::scalar;
    return avx2::supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

Isa detected_isa() { return avx2::supported() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2::supported()) isa = Isa::scalar;
    current().store(isa);
}

void reset_isa() { current().store(detect()); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void accumulate(std::span<const float> src, std::span<double> acc) {
    if (active_isa() == Isa::avx2) return avx2::accumulate(src, acc);
    scalar::accumulate(src, acc);
}

void divide(std::span<const double> acc, double n, std::span<float> out) {
    if (active_isa() == Isa::avx2) return avx2::divide(acc, n, out);
    scalar::divide(acc, n, out);
}

void iou_one_to_many(const BoxF64& a, const BoxColumns& boxes, std::span<double> out) {
    if (active_isa() == Isa::avx2) return avx2::iou_one_to_many(a, boxes, out);
    scalar::iou_one_to_many(a, boxes, out);
}

}  // namespace fn::simd
