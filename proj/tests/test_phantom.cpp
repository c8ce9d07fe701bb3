#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <gpstomo/linalg.hpp>
#include <gpstomo/phantom.hpp>

using namespace gpstomo;

TEST(VerticalProfile, Examples)
{
    const PhantomParams p;
    EXPECT_DOUBLE_EQ(vertical_profile(0.0, p), 350.0);
    const double oracle = 175.0 * (std::exp(-7.0) + std::exp(-1.0));
    EXPECT_NEAR(vertical_profile(7.0, p), oracle, 1e-12);
    EXPECT_NEAR(vertical_profile(7.0, p), 64.54, 5e-3);
    EXPECT_LT(vertical_profile(500.0, p), 1e-20);
}

TEST(VerticalProfile, StrictlyDecreasing)
{
    const PhantomParams p;
    double prev = vertical_profile(0.0, p);
    for (int i = 1; i <= 300; ++i) {
        const double v = vertical_profile(0.1 * i, p);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(HorizontalProfile, Examples)
{
    const PhantomParams p;
    const Bounds b = toy_bounds;
    EXPECT_DOUBLE_EQ(horizontal_profile(0.0, 0.0, p, b), p.N0 + p.N2);
    EXPECT_NEAR(horizontal_profile(1.0, 0.0, p, b), p.N0 + p.Nx_grad + p.N2, 1e-10);
    EXPECT_NEAR(horizontal_profile(0.5, 0.5, p, b), 410.0, 1e-10);
}

TEST(HorizontalProfile, StaysInBand)
{
    const PhantomParams p;
    const double lo = p.N0 - p.N1 - p.N2 - std::abs(p.Nx_grad) - std::abs(p.Ny_grad);
    const double hi = p.N0 + p.N1 + p.N2 + std::abs(p.Nx_grad) + std::abs(p.Ny_grad);
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j) {
            const double v = horizontal_profile(i / 200.0, j / 200.0, p, toy_bounds);
            EXPECT_GE(v, lo);
            EXPECT_LE(v, hi);
        }
}

TEST(PhantomParams, Validation)
{
    PhantomParams p;
    EXPECT_NO_THROW(p.validate());
    p.H1c = 0.0;
    EXPECT_THROW(p.validate(), Error);
    p = PhantomParams{};
    p.N1 = 100.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(TrueProfile, GroundValueAtOrigin)
{
    const Grid3 g = make_grid(30, 30, 30, toy_bounds);
    const Field f = true_profile(g, PhantomParams{});
    EXPECT_DOUBLE_EQ(f(0, 0, 0), 129500.0);
}

TEST(TrueProfile, DecaysWithAltitudeAndPositive)
{
    const Grid3 g = make_grid(30, 30, 30, toy_bounds);
    const Field f = true_profile(g, PhantomParams{});
    double mn = INFINITY;
    for (double v : f.values) {
        EXPECT_TRUE(std::isfinite(v));
        mn = std::min(mn, v);
    }
    EXPECT_GT(mn, 0.0);
    for (std::size_t j = 0; j < 30; ++j)
        for (std::size_t i = 0; i < 30; ++i)
            EXPECT_LE(f(i, j, 29), f(i, j, 0));
}

TEST(TrueProfile, Separable)
{
    const Grid3 g = make_grid(30, 30, 30, toy_bounds);
    const PhantomParams p;
    const Field f = true_profile(g, p);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> u(0, 29);
    for (int t = 0; t < 100; ++t) {
        const std::size_t i = u(rng), j = u(rng), k = u(rng);
        const Vec3 x = g.node(i, j, k);
        // independent factors: exponential pair at N0 = 1, bracket, N0/2
        const double vert = std::exp(-x.z / p.H1c) + std::exp(-x.z / p.H2c);
        const double bracket = p.N0 + p.Nx_grad * x.x + p.Ny_grad * x.y +
                               p.N1 * std::sin(2 * std::numbers::pi * p.mu_x * x.x) +
                               p.N2 * std::cos(2 * std::numbers::pi * p.mu_y * x.y);
        const double oracle = 0.5 * p.N0 * bracket * vert;
        EXPECT_NEAR(f(i, j, k), oracle, 1e-12 * std::abs(oracle));
    }
}

TEST(TrueProfile, RefractiveIndexToggle)
{
    const Grid3 g = make_grid(4, 4, 4, toy_bounds);
    PhantomParams p;
    const Field n = true_profile(g, p);
    p.refractive_index = true;
    const Field r = true_profile(g, p);
    for (std::size_t i = 0; i < n.size(); ++i)
        EXPECT_NEAR(r.values[i], 1e-6 * n.values[i] + 1.0, 1e-15);
}

TEST(AddNoise, ZeroNoiseIsExact)
{
    const Vector f{1.0, 2.0, 3.0};
    const NoisyData d = add_noise(f, 0.0, 5);
    EXPECT_EQ(d.data, f);
    EXPECT_EQ(d.delta, 0.0);
}

TEST(AddNoise, TwoPercent)
{
    Vector f(200);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = 100.0 + static_cast<double>(i);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const NoisyData d = add_noise(f, 0.02, seed);
        const double ratio = la::distance(d.data, f) / la::norm(f);
        EXPECT_GT(ratio, 0.02 * 0.7);
        EXPECT_LT(ratio, 0.02 * 1.3);
        EXPECT_NEAR(d.delta, 0.02 * la::norm(f) / std::sqrt(200.0), 1e-12);
    }
}

TEST(AddNoise, Deterministic)
{
    const Vector f(60, 3.0);
    EXPECT_EQ(add_noise(f, 0.1, 9).data, add_noise(f, 0.1, 9).data);
    EXPECT_NE(add_noise(f, 0.1, 9).data, add_noise(f, 0.1, 10).data);
}

TEST(AddNoise, ExpectedSquaredNorm)
{
    const Vector f(50, 2.0);
    double sum = 0.0, delta = 0.0;
    const int seeds = 400;
    for (int s = 0; s < seeds; ++s) {
        const NoisyData d = add_noise(f, 0.05, static_cast<std::uint64_t>(s));
        const double e = la::distance(d.data, f);
        sum += e * e;
        delta = d.delta;
    }
    const double expected = delta * delta * 50.0;
    EXPECT_NEAR(sum / seeds, expected, 0.1 * expected);
}

TEST(AddNoise, Errors)
{
    EXPECT_THROW(add_noise(Vector{}, 0.01, 1), Error);
    EXPECT_THROW(add_noise(Vector{1.0}, -0.5, 1), Error);
}
