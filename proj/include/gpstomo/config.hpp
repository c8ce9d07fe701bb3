#ifndef GPSTOMO_CONFIG_HPP
#define GPSTOMO_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "error.hpp"
#include "geometry.hpp"
#include "phantom.hpp"
#include "solvers/lbfgs.hpp"
#include "solvers/reconstruct.hpp"

namespace gpstomo {

enum class SolverKind { lbfgs, ldfp };
enum class PenaltyKind { tv, quadratic };

inline const char* to_string(SolverKind s) { return s == SolverKind::lbfgs ? "lbfgs" : "ldfp"; }
inline const char* to_string(PenaltyKind p) { return p == PenaltyKind::tv ? "tv" : "quadratic"; }

inline SolverKind parse_solver(const std::string& s)
{
    if (s == "lbfgs")
        return SolverKind::lbfgs;
    if (s == "ldfp")
        return SolverKind::ldfp;
    throw Error(ErrorKind::config, "unknown solver '" + s + "'");
}

inline PenaltyKind parse_penalty(const std::string& s)
{
    if (s == "tv")
        return PenaltyKind::tv;
    if (s == "quadratic")
        return PenaltyKind::quadratic;
    throw Error(ErrorKind::config, "unknown penalty '" + s + "'");
}

/// Everything an experiment run depends on. Defaults reproduce the toy
/// model: 30^3 nodes on [0,1]^2 x [0,15], 15 stations, 30 emitters.
struct ExperimentConfig {
    std::size_t nx = 30, ny = 30, nz = 30;
    Bounds bounds = toy_bounds;

    PhantomParams phantom;

    std::size_t stations = 15;
    std::size_t emitters = 30;
    std::uint64_t seed = 42;
    double emitter_extension = 1.5;
    std::size_t samples_per_ray = 0; // 0 = 2 * nz

    std::vector<std::size_t> ray_counts{1, 50, 100, 240, 360, 450};
    std::vector<double> noise_levels{0.001};
    std::vector<SolverKind> solvers{SolverKind::lbfgs};
    std::vector<PenaltyKind> penalties{PenaltyKind::tv};

    double alpha_tv = default_tv_alpha;
    double alpha_quadratic = default_quadratic_alpha;
    double beta = 1e-2;

    LbfgsOptions lbfgs;
    LdfpOptions ldfp{30, 0.0, {1e-8, 200}};

    // benchmark mode: two solver setups on one problem instance
    std::size_t bench_rays = 450;
    double bench_noise = 0.02;
    SolverKind bench_first = SolverKind::ldfp;
    SolverKind bench_second = SolverKind::lbfgs;
    std::size_t bench_first_iterations = 30;
    std::size_t bench_second_iterations = 1000;

    std::filesystem::path output_dir = "out";

    std::size_t resolved_samples() const { return samples_per_ray ? samples_per_ray : 2 * nz; }

    void validate() const
    {
        if (ray_counts.empty() || noise_levels.empty() || solvers.empty() || penalties.empty())
            throw Error(ErrorKind::config, "every sweep list must be nonempty");
        for (std::size_t s : ray_counts)
            if (s > stations * emitters)
                throw Error(ErrorKind::config, "ray count " + std::to_string(s) + " exceeds stations*emitters");
        if (bench_rays > stations * emitters)
            throw Error(ErrorKind::config, "benchmark ray count exceeds stations*emitters");
        for (double p : noise_levels)
            if (!(p >= 0.0))
                throw Error(ErrorKind::config, "noise levels must be >= 0");
        if (!(alpha_tv > 0.0) || !(alpha_quadratic > 0.0))
            throw Error(ErrorKind::config, "alpha must be positive");
        (void)SmoothingParam{beta};
        phantom.validate();
        lbfgs.validate();
        make_grid(nx, ny, nz, bounds);
    }
};

namespace detail {

template <class T>
std::string join(const std::vector<T>& v)
{
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            os << ',';
        if constexpr (std::is_enum_v<T>)
            os << to_string(v[i]);
        else
            os << v[i];
    }
    return os.str();
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (!cur.empty())
            out.push_back(cur);
    }
    return out;
}

} // namespace detail

/// Canonical INI text of the fully resolved config; also the hash input.
inline std::string to_ini(const ExperimentConfig& c)
{
    using detail::join;
    std::ostringstream os;
    os << std::setprecision(17) << std::boolalpha;
    os << "[grid]\nnx = " << c.nx << "\nny = " << c.ny << "\nnz = " << c.nz << "\nx_min = " << c.bounds.x_min
       << "\nx_max = " << c.bounds.x_max << "\ny_min = " << c.bounds.y_min << "\ny_max = " << c.bounds.y_max
       << "\nz_min = " << c.bounds.z_min << "\nz_max = " << c.bounds.z_max << "\n\n";
    const PhantomParams& p = c.phantom;
    os << "[phantom]\nN0 = " << p.N0 << "\nH1c = " << p.H1c << "\nH2c = " << p.H2c << "\nNx_grad = " << p.Nx_grad
       << "\nNy_grad = " << p.Ny_grad << "\nN1 = " << p.N1 << "\nN2 = " << p.N2 << "\nmu_x = " << p.mu_x
       << "\nmu_y = " << p.mu_y << "\nrefractive_index = " << p.refractive_index << "\n\n";
    os << "[network]\nstations = " << c.stations << "\nemitters = " << c.emitters << "\nseed = " << c.seed
       << "\nemitter_extension = " << c.emitter_extension << "\nsamples_per_ray = " << c.samples_per_ray << "\n\n";
    os << "[sweep]\nrays = " << join(c.ray_counts) << "\nnoise = " << join(c.noise_levels)
       << "\nsolvers = " << join(c.solvers) << "\npenalties = " << join(c.penalties) << "\n\n";
    os << "[regularization]\nalpha_tv = " << c.alpha_tv << "\nalpha_quadratic = " << c.alpha_quadratic
       << "\nbeta = " << c.beta << "\n\n";
    const LbfgsOptions& l = c.lbfgs;
    os << "[lbfgs]\nmemory = " << l.memory << "\nmax_iterations = " << l.max_iterations << "\ngrad_tol = " << l.grad_tol
       << "\ninitial_radius = " << l.initial_radius << "\nmin_radius = " << l.min_radius
       << "\nmax_radius = " << l.max_radius << "\neta1 = " << l.eta1 << "\neta2 = " << l.eta2
       << "\nshrink = " << l.shrink << "\ngrow = " << l.grow << "\ncurvature_threshold = " << l.curvature_threshold
       << "\nstagnation_tol = " << l.stagnation_tol << "\nstagnation_count = " << l.stagnation_count << "\n\n";
    os << "[ldfp]\nmax_outer = " << c.ldfp.max_outer << "\ngrad_tol = " << c.ldfp.grad_tol
       << "\ninner_tol = " << c.ldfp.inner.tol << "\ninner_max = " << c.ldfp.inner.max_iterations << "\n\n";
    os << "[benchmark]\nrays = " << c.bench_rays << "\nnoise = " << c.bench_noise
       << "\nfirst = " << to_string(c.bench_first) << "\nsecond = " << to_string(c.bench_second)
       << "\nfirst_iterations = " << c.bench_first_iterations
       << "\nsecond_iterations = " << c.bench_second_iterations << "\n\n";
    os << "[output]\ndir = " << c.output_dir.string() << "\n";
    return os.str();
}

/// FNV-1a 64 of the canonical config text.
inline std::uint64_t config_hash(const ExperimentConfig& c)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : to_ini(c)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

/// Missing keys keep their defaults; unknown sections or keys are rejected.
inline ExperimentConfig parse_config(std::istream& is)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::config, e.what());
    }
    ExperimentConfig c;
    const ExperimentConfig defaults;
    std::istringstream canonical(to_ini(defaults));
    pt::ptree known;
    pt::read_ini(canonical, known);
    for (const auto& [section, keys] : tree) {
        const auto sec = known.get_child_optional(section);
        if (!sec)
            throw Error(ErrorKind::config, "unknown section [" + section + "]");
        for (const auto& kv : keys)
            if (!sec->get_child_optional(kv.first))
                throw Error(ErrorKind::config, "unknown key " + section + "." + kv.first);
    }

    try {
        // strict translation: a malformed value is an error, not a fallback
        const auto get = [&](const char* key, auto fallback) {
            return tree.get_optional<std::string>(key) ? tree.get<decltype(fallback)>(key) : fallback;
        };
        c.nx = get("grid.nx", c.nx);
        c.ny = get("grid.ny", c.ny);
        c.nz = get("grid.nz", c.nz);
        c.bounds.x_min = get("grid.x_min", c.bounds.x_min);
        c.bounds.x_max = get("grid.x_max", c.bounds.x_max);
        c.bounds.y_min = get("grid.y_min", c.bounds.y_min);
        c.bounds.y_max = get("grid.y_max", c.bounds.y_max);
        c.bounds.z_min = get("grid.z_min", c.bounds.z_min);
        c.bounds.z_max = get("grid.z_max", c.bounds.z_max);

        PhantomParams& p = c.phantom;
        p.N0 = get("phantom.N0", p.N0);
        p.H1c = get("phantom.H1c", p.H1c);
        p.H2c = get("phantom.H2c", p.H2c);
        p.Nx_grad = get("phantom.Nx_grad", p.Nx_grad);
        p.Ny_grad = get("phantom.Ny_grad", p.Ny_grad);
        p.N1 = get("phantom.N1", p.N1);
        p.N2 = get("phantom.N2", p.N2);
        p.mu_x = get("phantom.mu_x", p.mu_x);
        p.mu_y = get("phantom.mu_y", p.mu_y);
        p.refractive_index = get("phantom.refractive_index", p.refractive_index);

        c.stations = get("network.stations", c.stations);
        c.emitters = get("network.emitters", c.emitters);
        c.seed = get("network.seed", c.seed);
        c.emitter_extension = get("network.emitter_extension", c.emitter_extension);
        c.samples_per_ray = get("network.samples_per_ray", c.samples_per_ray);

        if (auto v = tree.get_optional<std::string>("sweep.rays")) {
            c.ray_counts.clear();
            for (const auto& s : detail::split_list(*v))
                c.ray_counts.push_back(std::stoul(s));
        }
        if (auto v = tree.get_optional<std::string>("sweep.noise")) {
            c.noise_levels.clear();
            for (const auto& s : detail::split_list(*v))
                c.noise_levels.push_back(std::stod(s));
        }
        if (auto v = tree.get_optional<std::string>("sweep.solvers")) {
            c.solvers.clear();
            for (const auto& s : detail::split_list(*v))
                c.solvers.push_back(parse_solver(s));
        }
        if (auto v = tree.get_optional<std::string>("sweep.penalties")) {
            c.penalties.clear();
            for (const auto& s : detail::split_list(*v))
                c.penalties.push_back(parse_penalty(s));
        }

        c.alpha_tv = get("regularization.alpha_tv", c.alpha_tv);
        c.alpha_quadratic = get("regularization.alpha_quadratic", c.alpha_quadratic);
        c.beta = get("regularization.beta", c.beta);

        LbfgsOptions& l = c.lbfgs;
        l.memory = get("lbfgs.memory", l.memory);
        l.max_iterations = get("lbfgs.max_iterations", l.max_iterations);
        l.grad_tol = get("lbfgs.grad_tol", l.grad_tol);
        l.initial_radius = get("lbfgs.initial_radius", l.initial_radius);
        l.min_radius = get("lbfgs.min_radius", l.min_radius);
        l.max_radius = get("lbfgs.max_radius", l.max_radius);
        l.eta1 = get("lbfgs.eta1", l.eta1);
        l.eta2 = get("lbfgs.eta2", l.eta2);
        l.shrink = get("lbfgs.shrink", l.shrink);
        l.grow = get("lbfgs.grow", l.grow);
        l.curvature_threshold = get("lbfgs.curvature_threshold", l.curvature_threshold);
        l.stagnation_tol = get("lbfgs.stagnation_tol", l.stagnation_tol);
        l.stagnation_count = get("lbfgs.stagnation_count", l.stagnation_count);

        c.ldfp.max_outer = get("ldfp.max_outer", c.ldfp.max_outer);
        c.ldfp.grad_tol = get("ldfp.grad_tol", c.ldfp.grad_tol);
        c.ldfp.inner.tol = get("ldfp.inner_tol", c.ldfp.inner.tol);
        c.ldfp.inner.max_iterations = get("ldfp.inner_max", c.ldfp.inner.max_iterations);

        c.bench_rays = get("benchmark.rays", c.bench_rays);
        c.bench_noise = get("benchmark.noise", c.bench_noise);
        c.bench_first = parse_solver(get("benchmark.first", std::string(to_string(c.bench_first))));
        c.bench_second = parse_solver(get("benchmark.second", std::string(to_string(c.bench_second))));
        c.bench_first_iterations = get("benchmark.first_iterations", c.bench_first_iterations);
        c.bench_second_iterations = get("benchmark.second_iterations", c.bench_second_iterations);

        c.output_dir = get("output.dir", c.output_dir.string());
    } catch (const boost::property_tree::ptree_error& e) {
        throw Error(ErrorKind::config, e.what());
    } catch (const std::logic_error& e) {
        throw Error(ErrorKind::config, e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorKind::io, "cannot open config " + path.string());
    try {
        return parse_config(is);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

} // namespace gpstomo

#endif // GPSTOMO_CONFIG_HPP
