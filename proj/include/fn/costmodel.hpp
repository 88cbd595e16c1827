#pragma once

#include <stdexcept>
#include <string>

namespace fn::costmodel {

struct CostError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// images × redundancy / images_per_hour. All inputs > 0.
double estimate_hours(double images, double images_per_hour, double redundancy = 1);

/// hours × rate rounded half-up to whole units. Both > 0.
long long estimate_cost(double hours, double hourly_rate);

/// Linear in both image counts; counts and rates >= 0. Rounded like
/// estimate_cost.
long long expert_cost(double midwater_images, double benthic_images, double midwater_rate = 1,
                      double benthic_rate = 3);

/// Half-up rounding to a whole unit.
long long round_half_up(double value);

}  // namespace fn::costmodel
