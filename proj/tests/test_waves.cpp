#include <hydrores/waves.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace hydrores;

TEST(Soliton, PeakAndVelocity) {
    const auto g = SpatialGrid::centered(80.0, 256);
    const SolitonParams s(1.0, 1.0, 0.5, 1.0 / 3.0, 0.0);
    EXPECT_DOUBLE_EQ(s.vs(), 4.0 / 3.0);
    const auto f = soliton_profile(s, g);
    EXPECT_DOUBLE_EQ(f.heights[128], 2.0);  // coord(128) == 0
}

TEST(Soliton, FarFieldIsRestHeight) {
    const auto g = SpatialGrid::centered(200.0, 512);
    const SolitonParams s(1.0, 1.0, 0.5, 1.0 / 3.0, -60.0);
    const auto f = soliton_profile(s, g);
    const std::size_t far = 480;  // xi = 87.5, 147.5 units from the center
    EXPECT_NEAR(f.heights[far], 1.0, 1e-10);
}

TEST(Soliton, RejectsNonPositiveShape) {
    EXPECT_THROW(SolitonParams(1.0, 0.0, 0.5, 1.0 / 3.0, 0.0), ArgumentError);
    EXPECT_THROW(SolitonParams(1.0, 1.0, -0.5, 1.0 / 3.0, 0.0), ArgumentError);
}

TEST(CnoidalVelocity, Substitutions) {
    EXPECT_DOUBLE_EQ(cnoidal_velocity(1.0, 0.5, 1.0, 1.0 / 3.0), 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(cnoidal_velocity(0.0, 0.5, 1.0, 1.0 / 3.0), 2.0 / 3.0);
    EXPECT_NEAR(cnoidal_velocity(0.0, 1e-9, 1.0, 1.0 / 3.0), 1.0, 1e-15);
    // Only |lambda| enters the velocity.
    EXPECT_DOUBLE_EQ(cnoidal_velocity(0.7, 1.3, 1.0, -0.25), cnoidal_velocity(0.7, 1.3, 1.0, 0.25));
}

TEST(CnoidalParams, VelocityDerivedExactly) {
    const CnoidalParams c(0.8, 1.7, 1.0, 1.0 / 3.0);
    EXPECT_EQ(c.v(), cnoidal_velocity(0.8, 1.7, 1.0, 1.0 / 3.0));
    EXPECT_THROW(CnoidalParams(-0.1, 1.0, 1.0, 1.0 / 3.0), ArgumentError);
    EXPECT_THROW(CnoidalParams(0.1, 0.0, 1.0, 1.0 / 3.0), ArgumentError);
}

TEST(CnoidalProfile, PhaseCenterZeroAmplitudeAndQuarterWave) {
    const auto g = SpatialGrid::centered(80.0, 256);
    const double k = std::numbers::pi / 2.5;  // quarter wavelength 1.25, four grid spacings
    const CnoidalParams c(0.6, k, 1.0, 1.0 / 3.0, 0.0);
    const auto f = cnoidal_profile(c, g);
    EXPECT_DOUBLE_EQ(f.heights[128], 0.6);
    EXPECT_NEAR(f.heights[132], 0.0, 1e-15);
    const auto zero = cnoidal_profile(CnoidalParams(0.0, k, 1.0, 1.0 / 3.0), g);
    for (double h : zero.heights) EXPECT_EQ(h, 0.0);
}

TEST(SuperGaussian, CenterScaleAndTail) {
    const auto g = SpatialGrid::centered(80.0, 256);  // index 128 is xi = 0, 192 is xi = 20
    const WindowParams w{};
    const auto env = super_gaussian(g, w);
    EXPECT_DOUBLE_EQ(env[128], 1.0);
    EXPECT_NEAR(env[128 + 64], std::exp(-1.0), 1e-15);
    EXPECT_NEAR(env[0], 0.0, 1e-100);  // xi = -40 = -2l
    for (std::size_t i = 1; i < 128; ++i) EXPECT_EQ(env[128 + i], env[128 - i]);
}

TEST(SuperGaussian, RejectsOddOrder) {
    const auto g = SpatialGrid::centered(80.0, 64);
    EXPECT_THROW(super_gaussian(g, WindowParams{20.0, 7}), ArgumentError);
    EXPECT_THROW(super_gaussian(g, WindowParams{0.0, 8}), ArgumentError);
}

TEST(InitialCondition, EmptyAndZeroAmplitudeGivePureSoliton) {
    const auto g = SpatialGrid::centered(80.0, 256);
    const SolitonParams s(1.0, 1.0, 0.5, 1.0 / 3.0, -20.0);
    const auto pure = soliton_profile(s, g);
    EXPECT_EQ(build_initial_condition({}, s, {}, g).heights, pure.heights);
    const std::vector<CnoidalParams> zeros{CnoidalParams(0.0, 1.0, 1.0, 1.0 / 3.0), CnoidalParams(0.0, 2.0, 1.0, 1.0 / 3.0)};
    EXPECT_EQ(build_initial_condition(zeros, s, {}, g).heights, pure.heights);
}

TEST(InitialCondition, PointwiseHandValue) {
    const auto g = SpatialGrid::centered(80.0, 256);
    const SolitonParams s(1.0, 1.0, 0.5, 1.0 / 3.0, -25.0);
    const std::vector<CnoidalParams> one{CnoidalParams(0.5, 1.0, 1.0, 1.0 / 3.0)};
    const auto f = build_initial_condition(one, s, {}, g);
    // At xi = 0 the window is 1, cos^2(0) = 1 and the soliton tail is 4 sech^2(12.5) ~ 5.6e-11.
    EXPECT_NEAR(f.heights[128], 1.5, 1e-9);
    // xi = 0.3125: 1 + 0.5 cos^2(0.3125) times a window of exp(-(0.3125/20)^8) ~ 1.
    EXPECT_NEAR(f.heights[129], 1.0 + 0.5 * std::pow(std::cos(0.3125), 2), 1e-9);
}

TEST(InitialCondition, SuperpositionIsLinear) {
    const auto g = SpatialGrid::centered(80.0, 256);
    const SolitonParams s(1.0, 1.0, 0.5, 1.0 / 3.0, -20.0);
    const std::vector<CnoidalParams> a{CnoidalParams(0.4, 0.7, 1.0, 1.0 / 3.0)};
    const std::vector<CnoidalParams> b{CnoidalParams(1.1, 2.3, 1.0, 1.0 / 3.0), CnoidalParams(0.2, 0.3, 1.0, 1.0 / 3.0)};
    std::vector<CnoidalParams> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto base = soliton_profile(s, g);
    const auto full = build_initial_condition(ab, s, {}, g);
    const auto env = super_gaussian(g, {});
    for (std::size_t i = 0; i < g.num_points; ++i) {
        double sum = 0.0;
        for (const auto& w : ab) sum += cnoidal_profile(w, g).heights[i];
        EXPECT_NEAR(full.heights[i] - base.heights[i], env[i] * sum, 1e-14);
    }
}
