#include "fn/costmodel.hpp"

#include <cmath>

namespace fn::costmodel {

namespace {

void positive(double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw CostError(std::string(name) + " must be positive");
}

void nonnegative(double v, const char* name) {
    if (!(v >= 0) || !std::isfinite(v)) throw CostError(std::string(name) + " must not be negative");
}

}  // namespace

long long round_half_up(double value) { return static_cast<long long>(std::floor(value + 0.5)); }

double estimate_hours(double images, double images_per_hour, double redundancy) {
    positive(images, "images");
    positive(images_per_hour, "images per hour");
    positive(redundancy, "redundancy");
    return images * redundancy / images_per_hour;
}

long long estimate_cost(double hours, double hourly_rate) {
    positive(hours, "hours");
    positive(hourly_rate, "hourly rate");
    return round_half_up(hours * hourly_rate);
}

long long expert_cost(double midwater_images, double benthic_images, double midwater_rate, double benthic_rate) {
    nonnegative(midwater_images, "midwater images");
    nonnegative(benthic_images, "benthic images");
    nonnegative(midwater_rate, "midwater rate");
    nonnegative(benthic_rate, "benthic rate");
    return round_half_up(midwater_images * midwater_rate + benthic_images * benthic_rate);
}

}  // namespace fn::costmodel
