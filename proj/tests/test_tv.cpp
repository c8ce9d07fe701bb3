#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <gpstomo/phantom.hpp>
#include <gpstomo/tv.hpp>

using namespace gpstomo;

namespace {

Field random_field(const Grid3& g, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Field f(g);
    for (double& v : f.values)
        v = z(rng);
    return f;
}

// Triple-loop central difference with clamped neighbours.
double oracle_diff(const Field& f, std::size_t i, std::size_t j, std::size_t k, Axis a)
{
    const Grid3& g = f.grid;
    auto clamp = [](std::ptrdiff_t v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
    };
    const auto I = static_cast<std::ptrdiff_t>(i), J = static_cast<std::ptrdiff_t>(j), K = static_cast<std::ptrdiff_t>(k);
    switch (a) {
    case Axis::x: return (f(clamp(I + 1, g.nx), j, k) - f(clamp(I - 1, g.nx), j, k)) / (2 * g.dx);
    case Axis::y: return (f(i, clamp(J + 1, g.ny), k) - f(i, clamp(J - 1, g.ny), k)) / (2 * g.dy);
    case Axis::z: return (f(i, j, clamp(K + 1, g.nz)) - f(i, j, clamp(K - 1, g.nz))) / (2 * g.dz);
    }
    return 0.0;
}

double oracle_tv(const Field& f, double beta)
{
    const Grid3& g = f.grid;
    double s = 0.0;
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i) {
                double q = 0.0;
                for (Axis a : all_axes) {
                    const double d = oracle_diff(f, i, j, k, a);
                    q += d * d;
                }
                s += std::sqrt(q + beta);
            }
    return s * g.dx * g.dy * g.dz;
}

// Dense difference matrix built column by column from unit fields.
Eigen::MatrixXd dense_diff(const Grid3& g, Axis a)
{
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                for (Eigen::Index c = 0; c < n; ++c) {
                    Field e(g);
                    e.values[static_cast<std::size_t>(c)] = 1.0;
                    D(static_cast<Eigen::Index>(g.index(i, j, k)), c) = oracle_diff(e, i, j, k, a);
                }
    return D;
}

Eigen::MatrixXd dense_L(const Field& at, double beta)
{
    const Grid3& g = at.grid;
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(at.values.data(), n);
    std::array<Eigen::MatrixXd, 3> D;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < 3; ++a) {
        D[a] = dense_diff(g, all_axes[a]);
        q += (D[a] * phi).cwiseAbs2();
    }
    const Eigen::VectorXd w = (q.array() + beta).rsqrt().matrix() * (g.dx * g.dy * g.dz);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < 3; ++a)
        L += D[a].transpose() * w.asDiagonal() * D[a];
    return L;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(SmoothingParam, Range)
{
    EXPECT_NO_THROW(SmoothingParam(0.5));
    EXPECT_THROW(SmoothingParam(0.0), Error);
    EXPECT_THROW(SmoothingParam(1.0), Error);
    EXPECT_THROW(SmoothingParam(-1e-3), Error);
}

TEST(DiffAxis, ConstantIsZero)
{
    const Grid3 g = make_grid(4, 5, 6, toy_bounds);
    const Field c(g, 3.25);
    for (Axis a : all_axes)
        for (double v : diff_axis(c, a).values)
            EXPECT_EQ(v, 0.0);
}

TEST(DiffAxis, LinearInX)
{
    const Grid3 g = make_grid(7, 4, 4, {0, 2, 0, 1, 0, 1});
    Field f(g);
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                f.values[g.index(i, j, k)] = g.node(i, j, k).x;
    const Field d = diff_axis(f, Axis::x);
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j) {
            for (std::size_t i = 1; i + 1 < g.nx; ++i)
                EXPECT_NEAR(d(i, j, k), 1.0, 1e-12);
            EXPECT_NEAR(d(0, j, k), 0.5, 1e-12);
            EXPECT_NEAR(d(g.nx - 1, j, k), 0.5, 1e-12);
        }
}

TEST(DiffAxis, MatchesTripleLoopOracle)
{
    for (std::size_t n : {3u, 5u}) {
        const Grid3 g = make_grid(n, n + 1, n + 2, toy_bounds);
        const Field f = random_field(g, n);
        for (Axis a : all_axes) {
            const Field d = diff_axis(f, a);
            for (std::size_t k = 0; k < g.nz; ++k)
                for (std::size_t j = 0; j < g.ny; ++j)
                    for (std::size_t i = 0; i < g.nx; ++i)
                        EXPECT_NEAR(d(i, j, k), oracle_diff(f, i, j, k, a), 1e-12 * (1 + std::abs(d(i, j, k))));
        }
    }
}

TEST(DiffAxis, TransposeIsAdjoint)
{
    const Grid3 g = make_grid(4, 5, 3, toy_bounds);
    const Field u = random_field(g, 1), w = random_field(g, 2);
    for (Axis a : all_axes) {
        const double lhs = la::dot(diff_axis(u, a).values, w.values);
        const double rhs = la::dot(u.values, diff_axis_transpose(g, w.values, a));
        EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1));
    }
}

TEST(TvValue, ConstantToyGrid)
{
    const Grid3 g = make_grid(30, 30, 30, toy_bounds);
    const double v = tv_value(Field(g, 7.0), SmoothingParam(0.01));
    EXPECT_NEAR(v, 0.1 * 27000.0 * (1.0 / 29) * (1.0 / 29) * (15.0 / 29), 1e-12);
    EXPECT_NEAR(v, 1.66058, 1e-5);
}

TEST(TvValue, IncreasesWithBeta)
{
    const Grid3 g = make_grid(5, 5, 5, toy_bounds);
    const Field f = random_field(g, 4);
    double prev = 0.0;
    for (double b : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9}) {
        const double v = tv_value(f, SmoothingParam(b));
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(TvValue, LowerBound)
{
    const Grid3 g = make_grid(5, 5, 5, toy_bounds);
    const Field f = random_field(g, 5);
    EXPECT_GE(tv_value(f, SmoothingParam(0.01)), 0.1 * g.cell_volume() * static_cast<double>(g.node_count()));
}

TEST(TvValue, MatchesOracle)
{
    for (std::size_t n : {3u, 5u}) {
        const Grid3 g = make_grid(n, n, n, toy_bounds);
        const Field f = random_field(g, 10 + n);
        EXPECT_LE(rel(tv_value(f, SmoothingParam(0.01)), oracle_tv(f, 0.01)), 1e-12);
    }
    const Grid3 g = make_grid(5, 5, 5, toy_bounds);
    const Field ph = true_profile(g, PhantomParams{});
    EXPECT_LE(rel(tv_value(ph, SmoothingParam(0.01)), oracle_tv(ph, 0.01)), 1e-12);
}

TEST(TvValue, ConstantShiftInvariant)
{
    const Grid3 g = make_grid(5, 4, 6, toy_bounds);
    Field f = random_field(g, 6);
    const double v = tv_value(f, SmoothingParam(0.01));
    for (double& x : f.values)
        x += 4.0;
    EXPECT_NEAR(tv_value(f, SmoothingParam(0.01)), v, 1e-12 * v);
}

TEST(TvValue, TwoSlabConvergesToJumpTimesArea)
{
    // the jump sits between z-layers 3 and 4; central differences spread it
    // over the two adjacent layers, each seeing half the jump per 2 dz
    const Grid3 g = make_grid(4, 4, 8, {0, 1, 0, 1, 0, 7});
    Field f(g);
    const double jump = 2.0;
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                f.values[g.index(i, j, k)] = k >= 4 ? jump : 0.0;
    // unsmoothed value: jump times the node-quadrature interface area nx*ny*dx*dy
    const double analytic = 2.0 * 16.0 * (jump / (2 * g.dz)) * g.cell_volume();
    double prev_gap = INFINITY;
    for (double b : {1e-2, 1e-4, 1e-6}) {
        const double v = tv_value(f, SmoothingParam(b));
        const double gap = v - analytic;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-2 * analytic);
}

TEST(TvGradient, ConstantIsZero)
{
    const Grid3 g = make_grid(4, 4, 4, toy_bounds);
    for (double v : tv_gradient(Field(g, -2.0), SmoothingParam(0.01)))
        EXPECT_EQ(v, 0.0);
}

TEST(TvGradient, DirectionalDerivative)
{
    const Grid3 g = make_grid(6, 6, 6, toy_bounds);
    const SmoothingParam beta(0.01);
    const Field phi = random_field(g, 21);
    const Vector grad = tv_gradient(phi, beta);
    std::mt19937_64 rng(22);
    std::normal_distribution<double> z;
    const double t = 1e-6;
    for (int r = 0; r < 20; ++r) {
        Field psi(g);
        for (double& v : psi.values)
            v = z(rng);
        Field p = phi, m = phi;
        la::axpy(t, psi.values, p.values);
        la::axpy(-t, psi.values, m.values);
        const double fd = (tv_value(p, beta) - tv_value(m, beta)) / (2 * t);
        EXPECT_LE(rel(la::dot(grad, psi.values), fd), 1e-5);
    }
}

TEST(TvGradient, MatchesDenseOracle)
{
    for (std::size_t n : {3u, 5u}) {
        const Grid3 g = make_grid(n, n, n, toy_bounds);
        const Field phi = random_field(g, 30 + n);
        const Eigen::MatrixXd L = dense_L(phi, 0.01);
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(phi.values.data(), static_cast<Eigen::Index>(phi.size()));
        const Eigen::VectorXd ref = L * x;
        const Vector grad = tv_gradient(phi, SmoothingParam(0.01));
        const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(grad.data(), static_cast<Eigen::Index>(grad.size()));
        EXPECT_LE((got - ref).norm() / ref.norm(), 1e-12);

        // L applied to an arbitrary vector
        const Field v = random_field(g, 40 + n);
        const Vector lv = apply_L(phi, v.values, SmoothingParam(0.01));
        const Eigen::VectorXd vref = L * Eigen::Map<const Eigen::VectorXd>(v.values.data(), x.size());
        EXPECT_LE((Eigen::Map<const Eigen::VectorXd>(lv.data(), x.size()) - vref).norm() / vref.norm(), 1e-12);
    }
}

TEST(ApplyL, ConsistencySymmetryPsdLinearity)
{
    const Grid3 g = make_grid(5, 6, 4, toy_bounds);
    const SmoothingParam beta(0.01);
    const Field at = random_field(g, 50);
    const TvLinearization L(g, at.values, beta);

    const Vector a = apply_L(at, at.values, beta);
    const Vector b = tv_gradient(at, beta);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(a[i], b[i]);
    EXPECT_NEAR(L.value(), tv_value(at, beta), 1e-14 * L.value());

    for (int t = 0; t < 100; ++t) {
        const Field v = random_field(g, 100 + t), w = random_field(g, 300 + t);
        const Vector lv = L.apply(v.values), lw = L.apply(w.values);
        const double vlw = la::dot(v.values, lw), wlv = la::dot(w.values, lv);
        EXPECT_LE(std::abs(vlw - wlv), 1e-12 * std::max(std::abs(vlw), 1e-12));
        EXPECT_GE(la::dot(lv, v.values), 0.0);
        if (t < 5) {
            Vector comb(v.size());
            for (std::size_t i = 0; i < comb.size(); ++i)
                comb[i] = 2.5 * v.values[i] - 0.75 * w.values[i];
            const Vector lc = L.apply(comb);
            for (std::size_t i = 0; i < comb.size(); ++i)
                EXPECT_NEAR(lc[i], 2.5 * lv[i] - 0.75 * lw[i], 1e-12 * (1 + std::abs(lc[i])));
        }
    }
}

TEST(ApplyL, DimensionMismatch)
{
    const Grid3 g = make_grid(3, 3, 3, toy_bounds);
    EXPECT_THROW(apply_L(Field(g), Vector(5), SmoothingParam(0.01)), Error);
}
