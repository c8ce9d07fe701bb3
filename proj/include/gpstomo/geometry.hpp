#ifndef GPSTOMO_GEOMETRY_HPP
#define GPSTOMO_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"

namespace gpstomo {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Axis-aligned box [x_min,x_max] x [y_min,y_max] x [z_min,z_max].
struct Bounds {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    double z_min = 0.0, z_max = 1.0;

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// The toy-model domain [0,1] x [0,1] x [0,15].
inline constexpr Bounds toy_bounds{0.0, 1.0, 0.0, 1.0, 0.0, 15.0};

/// Node grid over a box. Nodes sit on the box faces, so spacing is extent/(n-1).
/// Linear index is x-fastest: i + nx*(j + ny*k).
struct Grid3 {
    std::size_t nx = 2, ny = 2, nz = 2;
    Bounds bounds;
    double dx = 1.0, dy = 1.0, dz = 1.0;

    std::size_t node_count() const { return nx * ny * nz; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + nx * (j + ny * k); }

    Vec3 node(std::size_t i, std::size_t j, std::size_t k) const
    {
        return {bounds.x_min + static_cast<double>(i) * dx, bounds.y_min + static_cast<double>(j) * dy,
                bounds.z_min + static_cast<double>(k) * dz};
    }

    double cell_volume() const { return dx * dy * dz; }

    bool contains(Vec3 p) const
    {
        return p.x >= bounds.x_min && p.x <= bounds.x_max && p.y >= bounds.y_min && p.y <= bounds.y_max &&
               p.z >= bounds.z_min && p.z <= bounds.z_max;
    }

    friend bool operator==(const Grid3&, const Grid3&) = default;
};

inline Grid3 make_grid(std::size_t nx, std::size_t ny, std::size_t nz, const Bounds& b)
{
    if (nx < 2 || ny < 2 || nz < 2)
        throw Error(ErrorKind::invalid_count, "grid needs at least 2 nodes per axis");
    const double lo[] = {b.x_min, b.y_min, b.z_min};
    const double hi[] = {b.x_max, b.y_max, b.z_max};
    for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(hi[a] > lo[a]))
            throw Error(ErrorKind::invalid_bounds, "axis " + std::to_string(a) + " has max <= min");
    }
    Grid3 g;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    g.bounds = b;
    g.dx = (b.x_max - b.x_min) / static_cast<double>(nx - 1);
    g.dy = (b.y_max - b.y_min) / static_cast<double>(ny - 1);
    g.dz = (b.z_max - b.z_min) / static_cast<double>(nz - 1);
    return g;
}

/// Ground surface z = g(x, y). Flat (g = 0) unless a height map on the grid's
/// nx*ny lateral nodes is supplied; heights are bilinearly interpolated.
class Surface {
public:
    Surface() = default;

    Surface(const Grid3& grid, std::vector<double> heights) : grid_(grid), heights_(std::move(heights))
    {
        if (heights_.size() != grid.nx * grid.ny)
            throw Error(ErrorKind::dimension_mismatch, "height map must have nx*ny entries");
        for (double h : heights_)
            if (!std::isfinite(h) || h < 0.0)
                throw Error(ErrorKind::invalid_argument, "surface heights must be finite and >= 0");
    }

    bool flat() const { return heights_.empty(); }

    double height(double x, double y) const
    {
        if (flat())
            return 0.0;
        const auto locate = [](double v, double lo, double d, std::size_t n, std::size_t& i, double& t) {
            double u = std::clamp((v - lo) / d, 0.0, static_cast<double>(n - 1));
            i = std::min(static_cast<std::size_t>(u), n - 2);
            t = u - static_cast<double>(i);
        };
        std::size_t i = 0, j = 0;
        double tx = 0.0, ty = 0.0;
        locate(x, grid_.bounds.x_min, grid_.dx, grid_.nx, i, tx);
        locate(y, grid_.bounds.y_min, grid_.dy, grid_.ny, j, ty);
        const auto h = [&](std::size_t a, std::size_t b) { return heights_[a + grid_.nx * b]; };
        return (1 - tx) * (1 - ty) * h(i, j) + tx * (1 - ty) * h(i + 1, j) + (1 - tx) * ty * h(i, j + 1) +
               tx * ty * h(i + 1, j + 1);
    }

    /// Max finite-difference slope of the height map; 0 for flat ground.
    double lipschitz() const
    {
        if (flat())
            return 0.0;
        double L = 0.0;
        for (std::size_t j = 0; j < grid_.ny; ++j)
            for (std::size_t i = 0; i < grid_.nx; ++i) {
                const double h = heights_[i + grid_.nx * j];
                if (i + 1 < grid_.nx)
                    L = std::max(L, std::abs(heights_[i + 1 + grid_.nx * j] - h) / grid_.dx);
                if (j + 1 < grid_.ny)
                    L = std::max(L, std::abs(heights_[i + grid_.nx * (j + 1)] - h) / grid_.dy);
            }
        return L;
    }

private:
    Grid3 grid_;
    std::vector<double> heights_;
};

struct Station {
    Vec3 position;
    double inclination = 0.0; // rho_s
    double azimuth = 0.0;     // sigma_s
};

inline Station make_station(Vec3 p)
{
    Station s{p, 0.0, 0.0};
    const double r = p.norm();
    if (r > 0.0) {
        s.inclination = std::asin(std::clamp(p.z / r, -1.0, 1.0));
        s.azimuth = std::atan2(p.y, p.x);
    }
    return s;
}

struct Emitter {
    Vec3 position;
};

/// Straight station -> emitter path. elevation is the inclination against the
/// horizontal (rho~), azimuth the horizontal angle in [0, 2pi) (sigma~).
struct Ray {
    std::size_t station = 0;
    std::size_t emitter = 0;
    Vec3 origin;
    Vec3 direction;
    double elevation = 0.0;
    double azimuth = 0.0;
};

inline Ray ray_from_pair(const Station& station, const Emitter& emitter, std::size_t station_index = 0,
                         std::size_t emitter_index = 0)
{
    const Vec3 d = emitter.position - station.position;
    const double len = d.norm();
    if (!(len > 0.0))
        throw Error(ErrorKind::degenerate_ray, "station and emitter coincide");
    Ray r;
    r.station = station_index;
    r.emitter = emitter_index;
    r.origin = station.position;
    r.direction = (1.0 / len) * d;
    if (!(r.direction.z > 0.0))
        throw Error(ErrorKind::degenerate_ray, "emitter is not above the station");
    r.elevation = std::asin(std::clamp(r.direction.z, -1.0, 1.0));
    double az = std::atan2(r.direction.y, r.direction.x);
    if (az < 0.0)
        az += 2.0 * std::numbers::pi;
    if (az >= 2.0 * std::numbers::pi)
        az = 0.0;
    r.azimuth = az;
    return r;
}

/// Does the segment from the ray origin up to altitude z_max touch the grid box?
inline bool segment_hits_box(const Ray& ray, const Grid3& grid)
{
    const double sin_el = std::sin(ray.elevation);
    if (!(sin_el > 0.0) || !(ray.direction.z > 0.0))
        return false;
    const Bounds& b = grid.bounds;
    double t0 = 0.0;
    double t1 = (b.z_max - ray.origin.z) / ray.direction.z;
    if (t1 < 0.0)
        return false;
    const double o[] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const double d[] = {ray.direction.x, ray.direction.y, ray.direction.z};
    const double lo[] = {b.x_min, b.y_min, b.z_min};
    const double hi[] = {b.x_max, b.y_max, b.z_max};
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a])
                return false;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a];
        double tb = (hi[a] - o[a]) / d[a];
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1)
            return false;
    }
    return true;
}

/// Admissible measurement: elevation no flatter than the steepest surface
/// slope, strictly below pi, and the path reaches the domain.
inline bool is_admissible(const Ray& ray, const Grid3& grid, double surface_lipschitz = 0.0)
{
    if (!(ray.elevation >= std::abs(std::atan(surface_lipschitz))))
        return false;
    if (!(std::numbers::pi - ray.elevation > 0.0))
        return false;
    if (!(std::sin(ray.elevation) > 0.0))
        return false;
    return segment_hits_box(ray, grid);
}

struct RaySamples {
    std::vector<Vec3> points;
    double increment = 0.0; // arc length per altitude step, d_eps / sin(elevation)
};

/// Points s + ((eps - z_s)/sin(elevation)) * theta for eps uniform in [z_s, z_max].
inline RaySamples sample_ray(const Ray& ray, const Grid3& grid, std::size_t n_samples)
{
    if (n_samples < 2)
        throw Error(ErrorKind::invalid_count, "sample_ray needs at least 2 samples");
    const double sin_el = std::sin(ray.elevation);
    if (!(sin_el > 0.0))
        throw Error(ErrorKind::horizontal_ray, "ray parallel to the surface");
    const double z_s = ray.origin.z;
    const double h_inf = grid.bounds.z_max;
    const double d_eps = (h_inf - z_s) / static_cast<double>(n_samples - 1);
    RaySamples out;
    out.increment = d_eps / sin_el;
    out.points.reserve(n_samples);
    for (std::size_t l = 0; l < n_samples; ++l) {
        const double t = static_cast<double>(l) * d_eps / sin_el;
        out.points.push_back(ray.origin + t * ray.direction);
    }
    // pin the end exactly on the top plane
    out.points.back().z = h_inf;
    return out;
}

struct NetworkOptions {
    Surface surface;
    double emitter_extension = 1.5; // emitter plane width relative to the lateral domain
};

struct Network {
    Grid3 grid;
    std::vector<Station> stations;
    std::vector<Emitter> emitters;
    std::vector<Ray> rays;
    std::uint64_t seed = 0;
    double surface_lipschitz = 0.0;

    /// Copy keeping only the first `count` rays (station-major order).
    Network first_rays(std::size_t count) const
    {
        Network n = *this;
        if (count < n.rays.size())
            n.rays.resize(count);
        return n;
    }
};

/// Random stations on the surface, random emitters on the z = z_max plane,
/// and every admissible station -> emitter ray in station-major order.
inline Network place_network(const Grid3& grid, std::size_t n_stations, std::size_t n_emitters, std::uint64_t seed,
                             const NetworkOptions& opts = {})
{
    if (n_stations < 1 || n_emitters < 1)
        throw Error(ErrorKind::invalid_count, "network needs at least one station and one emitter");
    if (!(opts.emitter_extension > 0.0))
        throw Error(ErrorKind::invalid_argument, "emitter_extension must be positive");

    const Bounds& b = grid.bounds;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(b.x_min, b.x_max);
    std::uniform_real_distribution<double> uy(b.y_min, b.y_max);

    Network net;
    net.grid = grid;
    net.seed = seed;
    net.surface_lipschitz = opts.surface.lipschitz();

    net.stations.reserve(n_stations);
    for (std::size_t s = 0; s < n_stations; ++s) {
        const double x = ux(rng);
        const double y = uy(rng);
        net.stations.push_back(make_station({x, y, opts.surface.height(x, y)}));
    }

    const double cx = 0.5 * (b.x_min + b.x_max), hx = 0.5 * opts.emitter_extension * (b.x_max - b.x_min);
    const double cy = 0.5 * (b.y_min + b.y_max), hy = 0.5 * opts.emitter_extension * (b.y_max - b.y_min);
    std::uniform_real_distribution<double> ex(cx - hx, cx + hx);
    std::uniform_real_distribution<double> ey(cy - hy, cy + hy);
    net.emitters.reserve(n_emitters);
    for (std::size_t e = 0; e < n_emitters; ++e) {
        const double x = ex(rng);
        const double y = ey(rng);
        net.emitters.push_back({{x, y, b.z_max}});
    }

    for (std::size_t s = 0; s < n_stations; ++s)
        for (std::size_t e = 0; e < n_emitters; ++e) {
            const Vec3 d = net.emitters[e].position - net.stations[s].position;
            if (!(d.z > 0.0))
                continue;
            Ray r = ray_from_pair(net.stations[s], net.emitters[e], s, e);
            if (is_admissible(r, grid, net.surface_lipschitz))
                net.rays.push_back(r);
        }
    return net;
}

/// One ray per line: station xyz, emitter xyz, elevation, azimuth.
inline void write_network(std::ostream& os, const Network& net)
{
    os << "# sx sy sz ex ey ez elevation azimuth\n";
    os << std::setprecision(17);
    for (const Ray& r : net.rays) {
        const Vec3 s = net.stations[r.station].position;
        const Vec3 e = net.emitters[r.emitter].position;
        os << s.x << ' ' << s.y << ' ' << s.z << ' ' << e.x << ' ' << e.y << ' ' << e.z << ' ' << r.elevation << ' '
           << r.azimuth << '\n';
    }
}

} // namespace gpstomo

#endif // GPSTOMO_GEOMETRY_HPP
