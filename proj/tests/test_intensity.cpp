#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace cococat;

TEST(Intensity, ValueAtZero) {
    const IntensityParams ip;
    const double expected = 24.93 + 5.61 * std::sin(2 * std::numbers::pi * 7.07) + 0.30 * std::exp(1.0);
    EXPECT_NEAR(intensity_at(ip, 0.0), expected, 1e-12);
    EXPECT_NEAR(intensity_at(ip, 0.0), 28.13, 0.01);
}

TEST(Intensity, MajorantBoundsOnGrid) {
    const IntensityParams ip;
    const double m = intensity_majorant(ip, 5.0);
    for (int i = 0; i <= 50000; ++i) ASSERT_LE(intensity_at(ip, 5.0 * i / 50000), m);
}

TEST(Intensity, CumulativeMatchesSimpson) {
    const IntensityParams ip;
    for (double T : {0.3, 1.0, 5.0}) {
        const double ref = oracle::simpson([&](double t) { return intensity_at(ip, t); }, 0.0, T, 1000000);
        EXPECT_NEAR(cumulative_intensity(ip, 0.0, T), ref, 1e-9 * ref) << "T=" << T;
    }
}

TEST(Intensity, TableMatchesDirect) {
    const IntensityParams ip;
    const CumulativeIntensity table(ip, 5.0);
    for (double t : {0.0, 0.01, 0.5, 1.2345, 4.999, 5.0, 6.0})
        EXPECT_NEAR(table(t), cumulative_intensity(ip, 0.0, t), 1e-10) << "t=" << t;
}

TEST(Intensity, ConstantIsExact) {
    IntensityParams ip{10.0, 0, 0, 0, 0, 1.0};
    EXPECT_TRUE(ip.constant());
    EXPECT_EQ(cumulative_intensity(ip, 0.5, 2.0), 15.0);
    EXPECT_EQ(CumulativeIntensity(ip, 1.0)(0.3), 3.0);
}

TEST(Intensity, ZeroIntensity) {
    IntensityParams ip{0, 0, 0, 0, 0, 1.0};
    EXPECT_TRUE(ip.identically_zero());
    RandomStream rng(1);
    EXPECT_TRUE(simulate_event_times(ip, 5.0, rng).empty());
}

TEST(Intensity, RejectsBadRange) {
    EXPECT_THROW(cumulative_intensity(IntensityParams{}, 2.0, 1.0), std::invalid_argument);
}

TEST(Intensity, MinimumOnGridPositiveForCanonical) {
    EXPECT_GT(min_intensity_on_grid(IntensityParams{}, 5.0), 18.0);
    IntensityParams neg{1.0, 0, 5.0, 0, 0, 1.0};
    EXPECT_LT(min_intensity_on_grid(neg, 1.0), 0.0);
}
