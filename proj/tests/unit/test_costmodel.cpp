#include <doctest.h>

#include <cmath>
#include <random>

#include "fn/costmodel.hpp"

using namespace fn::costmodel;

TEST_CASE("crowd labor hours") {
    CHECK(std::abs(estimate_hours(1'400'000, 92.4) - 15'151) <= 2);
    CHECK(std::abs(estimate_hours(1'400'000, 92.4, 5) - 75'755) <= 5);
    CHECK(estimate_hours(80, 80) == 1.0);
    CHECK_THROWS_AS(estimate_hours(0, 92.4), CostError);
    CHECK_THROWS_AS(estimate_hours(10, -1), CostError);
    CHECK_THROWS_AS(estimate_hours(10, 1, 0), CostError);
}

TEST_CASE("labor cost") {
    CHECK(estimate_cost(17'751 + 8'417, 3.25) == 85'046);
    CHECK(std::llabs(estimate_cost(75'755, 3.25) - 246'203) <= 1);
    CHECK(estimate_cost(75'755, 3.25) == 246'204);  // 246,203.75 rounds up
    CHECK(estimate_cost(75'755, 80) == 6'060'400);
    CHECK(estimate_cost(1, 0.5) == 1);  // half-up
    CHECK(estimate_cost(1, 0.49) == 0);
    CHECK_THROWS_AS(estimate_cost(0, 3.25), CostError);
    CHECK_THROWS_AS(estimate_cost(1, std::nan("")), CostError);
}

TEST_CASE("expert cost") {
    CHECK(expert_cost(0, 0) == 0);
    CHECK(expert_cost(80, 0) == 80);
    CHECK(expert_cost(66'039 / 2.0, 66'039 / 2.0) == 132'078);
    CHECK(expert_cost(10, 10, 2, 5) == 70);
    CHECK_THROWS_AS(expert_cost(-1, 0), CostError);
}

TEST_CASE("linearity") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> pos(1, 1e5);
    std::uniform_int_distribution<int> k(1, 9);
    for (int i = 0; i < 500; ++i) {
        const double images = pos(rng), iph = pos(rng) / 100, red = k(rng), scale = k(rng);
        CHECK(estimate_hours(images * scale, iph, red) == doctest::Approx(scale * estimate_hours(images, iph, red)));
        CHECK(estimate_hours(images, iph, red * scale) == doctest::Approx(scale * estimate_hours(images, iph, red)));
        // whole-unit rounding bounds the deviation from exact linearity
        const double hours = pos(rng), rate = pos(rng) / 1000;
        const auto base = estimate_cost(hours, rate);
        CHECK(std::abs(static_cast<double>(estimate_cost(hours * scale, rate)) - scale * static_cast<double>(base)) <=
              scale / 2 + 1);
        CHECK(std::abs(static_cast<double>(estimate_cost(hours, rate * scale)) - scale * static_cast<double>(base)) <=
              scale / 2 + 1);
        CHECK(base >= 0);
    }
}
