#ifndef GPSTOMO_PHANTOM_HPP
#define GPSTOMO_PHANTOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

#include "error.hpp"
#include "field.hpp"
#include "linalg.hpp"

namespace gpstomo {

/// Synthetic refractivity: two-scale exponential decay in altitude times a
/// lateral bracket with linear gradients and periodic variations.
struct PhantomParams {
    double N0 = 350.0;
    double H1c = 1.0;
    double H2c = 7.0;
    double Nx_grad = 30.0;
    double Ny_grad = 50.0;
    double N1 = 30.0;
    double N2 = 20.0;
    double mu_x = 4.0;
    double mu_y = 6.0;
    bool refractive_index = false; // map N -> 1e-6 N + 1 after evaluation

    void validate() const
    {
        if (!(H1c > 0.0) || !(H2c > 0.0))
            throw Error(ErrorKind::invalid_argument, "scale heights must be positive");
        if (!(N0 - N1 - N2 >= 200.0) || !(N0 + N1 + N2 <= 400.0))
            throw Error(ErrorKind::invalid_argument, "periodic amplitudes outside the admissible band");
    }
};

inline double vertical_profile(double h, const PhantomParams& p)
{
    return 0.5 * p.N0 * (std::exp(-h / p.H1c) + std::exp(-h / p.H2c));
}

inline double horizontal_profile(double x, double y, const PhantomParams& p, const Bounds& b)
{
    const double Lx = b.x_max - b.x_min;
    const double Ly = b.y_max - b.y_min;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return p.N0 + p.Nx_grad * x / Lx + p.Ny_grad * y / Ly + p.N1 * std::sin(two_pi * p.mu_x * x / Lx) +
           p.N2 * std::cos(two_pi * p.mu_y * y / Ly);
}

/// (N0/2) * bracket(x, y) * (exp(-h/H1c) + exp(-h/H2c)), taken verbatim,
/// so ground values are of order N0^2.
inline Field true_profile(const Grid3& grid, const PhantomParams& p)
{
    p.validate();
    Field f(grid);
    for (std::size_t k = 0; k < grid.nz; ++k)
        for (std::size_t j = 0; j < grid.ny; ++j)
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const Vec3 x = grid.node(i, j, k);
                const double decay = std::exp(-x.z / p.H1c) + std::exp(-x.z / p.H2c);
                double v = 0.5 * p.N0 * horizontal_profile(x.x, x.y, p, grid.bounds) * decay;
                if (p.refractive_index)
                    v = 1e-6 * v + 1.0;
                f(i, j, k) = v;
            }
    return f;
}

struct NoisyData {
    Vector data;
    double delta = 0.0; // per-component noise standard deviation
};

/// f + delta*z with z ~ N(0, I) and delta = fraction * ||f|| / sqrt(M).
inline NoisyData add_noise(std::span<const double> clean, double fraction, std::uint64_t seed)
{
    if (clean.empty())
        throw Error(ErrorKind::invalid_count, "add_noise needs a nonempty measurement vector");
    if (!(fraction >= 0.0))
        throw Error(ErrorKind::invalid_argument, "noise fraction must be >= 0");
    NoisyData out;
    out.data.assign(clean.begin(), clean.end());
    out.delta = fraction * la::norm(clean) / std::sqrt(static_cast<double>(clean.size()));
    if (out.delta == 0.0)
        return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    for (double& v : out.data)
        v += out.delta * z(rng);
    return out;
}

} // namespace gpstomo

#endif // GPSTOMO_PHANTOM_HPP
