#ifndef GPSTOMO_TV_HPP
#define GPSTOMO_TV_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "error.hpp"
#include "field.hpp"
#include "linalg.hpp"

namespace gpstomo {

struct SmoothingParam {
    double beta = 1e-2;

    explicit SmoothingParam(double b = 1e-2) : beta(b)
    {
        if (!(b > 0.0 && b < 1.0))
            throw Error(ErrorKind::invalid_argument, "smoothing beta must lie in (0, 1)");
    }
};

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> all_axes{Axis::x, Axis::y, Axis::z};

namespace detail {

struct AxisLayout {
    std::size_t stride;
    std::size_t extent;
    double spacing;
};

inline AxisLayout layout(const Grid3& g, Axis a)
{
    switch (a) {
    case Axis::x: return {1, g.nx, g.dx};
    case Axis::y: return {g.nx, g.ny, g.dy};
    case Axis::z: return {g.nx * g.ny, g.nz, g.dz};
    }
    return {1, g.nx, g.dx};
}

// Central difference with replicate padding: neighbours outside the grid
// are replaced by the boundary node itself.
template <class Visit>
void for_each_stencil(const Grid3& g, Axis a, Visit&& visit)
{
    const AxisLayout L = layout(g, a);
    const double inv = 1.0 / (2.0 * L.spacing);
    const std::size_t n = g.node_count();
    // view the node array as [outer][extent][stride]
    const std::size_t block = L.stride * L.extent;
    for (std::size_t base = 0; base < n; base += block)
        for (std::size_t c = 0; c < L.extent; ++c) {
            const std::size_t row = base + c * L.stride;
            const std::size_t up = c + 1 < L.extent ? L.stride : 0;
            const std::size_t down = c > 0 ? L.stride : 0;
            for (std::size_t t = 0; t < L.stride; ++t)
                visit(row + t, row + t + up, row + t - down, inv);
        }
}

inline void diff(const Grid3& g, Axis a, std::span<const double> v, std::span<double> out)
{
    for_each_stencil(g, a, [&](std::size_t idx, std::size_t ip, std::size_t im, double inv) {
        out[idx] = (v[ip] - v[im]) * inv;
    });
}

// out += D_a^T w
inline void diff_transpose_add(const Grid3& g, Axis a, std::span<const double> w, std::span<double> out)
{
    for_each_stencil(g, a, [&](std::size_t idx, std::size_t ip, std::size_t im, double inv) {
        out[ip] += w[idx] * inv;
        out[im] -= w[idx] * inv;
    });
}

} // namespace detail

inline Field diff_axis(const Field& f, Axis a)
{
    Field out(f.grid);
    detail::diff(f.grid, a, f.values, out.values);
    return out;
}

/// Transpose of diff_axis applied to a node vector.
inline Vector diff_axis_transpose(const Grid3& g, std::span<const double> w, Axis a)
{
    la::require_same_size(w.size(), g.node_count(), "diff_axis_transpose");
    Vector out(g.node_count(), 0.0);
    detail::diff_transpose_add(g, a, w, out);
    return out;
}

/// Squared central-difference gradient magnitude at every node.
inline Vector squared_gradient(const Grid3& g, std::span<const double> v)
{
    la::require_same_size(v.size(), g.node_count(), "squared_gradient");
    Vector sq(g.node_count(), 0.0), d(g.node_count());
    for (Axis a : all_axes) {
        detail::diff(g, a, v, d);
        for (std::size_t i = 0; i < sq.size(); ++i)
            sq[i] += d[i] * d[i];
    }
    return sq;
}

/// sum_n sqrt(|D phi|_n^2 + beta) * dx*dy*dz
inline double tv_value(const Grid3& g, std::span<const double> v, SmoothingParam beta)
{
    const Vector sq = squared_gradient(g, v);
    double s = 0.0;
    for (double q : sq)
        s += std::sqrt(q + beta.beta);
    return s * g.cell_volume();
}

inline double tv_value(const Field& f, SmoothingParam beta) { return tv_value(f.grid, f.values, beta); }

/// The lagged-diffusivity operator L(phi) = vol * sum_a D_a^T diag(1/sqrt(|D phi|^2 + beta)) D_a,
/// with the diffusivity frozen at construction.
class TvLinearization {
public:
    TvLinearization(const Grid3& g, std::span<const double> at, SmoothingParam beta) : grid_(g), diffusivity_(g.node_count())
    {
        const Vector sq = squared_gradient(g, at);
        const double vol = g.cell_volume();
        double sum = 0.0;
        for (std::size_t i = 0; i < sq.size(); ++i) {
            const double gamma = std::sqrt(sq[i] + beta.beta);
            sum += gamma;
            diffusivity_[i] = vol / gamma;
        }
        value_ = sum * vol;
    }

    /// tv_value at the linearization point.
    double value() const { return value_; }

    const Grid3& grid() const { return grid_; }
    std::span<const double> diffusivity() const { return diffusivity_; }

    void apply(std::span<const double> v, std::span<double> out) const
    {
        la::require_same_size(v.size(), grid_.node_count(), "TvLinearization::apply input");
        la::require_same_size(out.size(), grid_.node_count(), "TvLinearization::apply output");
        std::fill(out.begin(), out.end(), 0.0);
        Vector d(v.size());
        for (Axis a : all_axes) {
            detail::diff(grid_, a, v, d);
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] *= diffusivity_[i];
            detail::diff_transpose_add(grid_, a, d, out);
        }
    }

    Vector apply(std::span<const double> v) const
    {
        Vector out(v.size());
        apply(v, out);
        return out;
    }

private:
    Grid3 grid_;
    Vector diffusivity_;
    double value_ = 0.0;
};

inline Vector apply_L(const Field& at, std::span<const double> v, SmoothingParam beta)
{
    la::require_same_size(v.size(), at.size(), "apply_L");
    return TvLinearization(at.grid, at.values, beta).apply(v);
}

/// Gradient of tv_value: L(phi) phi.
inline Vector tv_gradient(const Grid3& g, std::span<const double> v, SmoothingParam beta)
{
    return TvLinearization(g, v, beta).apply(v);
}

inline Vector tv_gradient(const Field& f, SmoothingParam beta) { return tv_gradient(f.grid, f.values, beta); }

} // namespace gpstomo

#endif // GPSTOMO_TV_HPP
