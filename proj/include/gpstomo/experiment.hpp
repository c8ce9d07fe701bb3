#ifndef GPSTOMO_EXPERIMENT_HPP
#define GPSTOMO_EXPERIMENT_HPP

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "field.hpp"
#include "forward.hpp"
#include "geometry.hpp"
#include "objective.hpp"
#include "phantom.hpp"
#include "solvers/reconstruct.hpp"

namespace gpstomo {

/// A fully assembled synthetic problem: truth, operator and noisy data.
struct Problem {
    Grid3 grid;
    Network network;
    Field truth;
    SparseOperator op;
    Vector clean;
    NoisyData noisy;
};

inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Noise seed for one (ray count, noise level) cell of a sweep.
inline std::uint64_t noise_seed(std::uint64_t base, std::size_t rays, double noise)
{
    return base ^ mix64(static_cast<std::uint64_t>(rays) ^ mix64(std::bit_cast<std::uint64_t>(noise)));
}

inline Network build_network(const ExperimentConfig& c)
{
    const Grid3 g = make_grid(c.nx, c.ny, c.nz, c.bounds);
    NetworkOptions no;
    no.emitter_extension = c.emitter_extension;
    return place_network(g, c.stations, c.emitters, c.seed, no);
}

inline Problem build_problem(const ExperimentConfig& c, const Network& full, std::size_t rays, double noise)
{
    if (rays < 1 || rays > full.rays.size())
        throw Error(ErrorKind::invalid_count, "requested " + std::to_string(rays) + " rays but the network has " +
                                                  std::to_string(full.rays.size()) + " admissible rays");
    Problem p{full.grid, full.first_rays(rays), true_profile(full.grid, c.phantom), {}, {}, {}};
    p.op = assemble_operator(p.network, c.resolved_samples());
    p.clean = p.op.apply(p.truth.values);
    p.noisy = add_noise(p.clean, noise, noise_seed(c.seed, rays, noise));
    return p;
}

inline Problem build_problem(const ExperimentConfig& c, std::size_t rays, double noise)
{
    return build_problem(c, build_network(c), rays, noise);
}

inline Objective make_objective(const ExperimentConfig& c, const Problem& p, PenaltyKind penalty)
{
    if (penalty == PenaltyKind::tv)
        return Objective(p.op, p.grid, p.noisy.data, c.alpha_tv, TvPenalty{SmoothingParam{c.beta}});
    return Objective(p.op, p.grid, p.noisy.data, c.alpha_quadratic, QuadraticPenalty{});
}

inline SolveResult run_solver(const ExperimentConfig& c, const Problem& p, SolverKind solver, PenaltyKind penalty,
                              std::size_t iterations = 0)
{
    const Objective obj = make_objective(c, p, penalty);
    const Field phi0(p.grid);
    if (solver == SolverKind::ldfp) {
        LdfpOptions o = c.ldfp;
        if (iterations)
            o.max_outer = iterations;
        return ldfp(obj, phi0, o, &p.truth);
    }
    LbfgsOptions o = c.lbfgs;
    if (iterations)
        o.max_iterations = iterations;
    return lbfgs_trust_region(obj, phi0, o, &p.truth);
}

/// Percent token for file names, e.g. 0.001 -> "0.1pct".
inline std::string noise_token(double noise)
{
    std::ostringstream os;
    os << std::setprecision(12) << noise * 100.0 << "pct";
    return os.str();
}

inline std::string solver_token(SolverKind s, PenaltyKind p)
{
    return std::string(to_string(s)) + "-" + to_string(p);
}

inline std::string output_stem(SolverKind s, PenaltyKind p, std::size_t rays, double noise)
{
    return solver_token(s, p) + "_" + std::to_string(rays) + "rays_" + noise_token(noise);
}

struct SweepOutcome {
    std::vector<std::filesystem::path> outputs;
    std::size_t combinations = 0;
    std::size_t failures = 0;
};

/// One reconstruction per (rays, noise, solver, penalty); each writes a
/// convergence CSV and the final field. Failures are logged and skipped.
inline SweepOutcome run_sweep(const ExperimentConfig& c, const std::filesystem::path& out_dir, std::ostream& log)
{
    c.validate();
    std::filesystem::create_directories(out_dir);
    const std::string hash = hex(config_hash(c));
    {
        std::ofstream cfg(out_dir / "config.ini");
        cfg << to_ini(c);
    }
    SweepOutcome outcome;
    const Network full = build_network(c);
    log << "network: " << full.rays.size() << " admissible rays, " << c.resolved_samples() << " samples per ray\n";

    for (std::size_t rays : c.ray_counts)
        for (double noise : c.noise_levels) {
            std::optional<Problem> problem;
            for (SolverKind s : c.solvers)
                for (PenaltyKind pen : c.penalties) {
                    if (s == SolverKind::ldfp && pen == PenaltyKind::quadratic) {
                        log << "skip ldfp-quadratic: lagged diffusivity needs the TV penalty\n";
                        continue;
                    }
                    ++outcome.combinations;
                    const std::string stem = output_stem(s, pen, rays, noise);
                    try {
                        if (!problem)
                            problem = build_problem(c, full, rays, noise);
                        SolveResult r = run_solver(c, *problem, s, pen);
                        const auto csv = out_dir / (stem + ".csv");
                        const auto fld = out_dir / (stem + ".fld");
                        write_csv(csv, r.records);
                        write_field(fld, r.field);
                        outcome.outputs.push_back(csv);
                        outcome.outputs.push_back(fld);
                        log << stem << ": " << r.iterations << " iterations (" << to_string(r.reason)
                            << "), rel_error " << r.records.back().rel_error.value_or(0.0) << ", " << r.seconds
                            << " s\n";
                    } catch (const std::exception& e) {
                        ++outcome.failures;
                        log << stem << ": FAILED: " << e.what() << '\n';
                    }
                }
        }

    std::ofstream manifest(out_dir / "manifest.txt");
    manifest << "# config_hash " << hash << '\n';
    for (const auto& f : outcome.outputs)
        manifest << hash << ' ' << f.filename().string() << '\n';
    if (!manifest)
        throw Error(ErrorKind::io, "cannot write manifest in " + out_dir.string());
    return outcome;
}

struct BenchmarkEntry {
    std::string name;
    std::size_t iterations = 0;
    double seconds = 0.0;
    double seconds_per_iteration = 0.0;
    double final_rel_error = 0.0;
};

struct BenchmarkReport {
    BenchmarkEntry first, second;
    std::size_t rays = 0;
    double noise = 0.0;
    double per_iteration_ratio = 0.0; // first / second
    double equal_count_ratio = 0.0;   // first total / second time after as many iterations
    double second_rel_error_at_first_count = 0.0;
};

namespace detail {

inline BenchmarkEntry summarize(std::string name, const SolveResult& r)
{
    BenchmarkEntry e;
    e.name = std::move(name);
    e.iterations = r.iterations;
    e.seconds = r.records.back().seconds;
    e.seconds_per_iteration = r.iterations ? e.seconds / static_cast<double>(r.iterations) : 0.0;
    e.final_rel_error = r.records.back().rel_error.value_or(0.0);
    return e;
}

} // namespace detail

/// Two solver setups on the identical problem instance.
inline BenchmarkReport run_benchmark(const ExperimentConfig& c, std::ostream& log)
{
    c.validate();
    const Problem p = build_problem(c, c.bench_rays, c.bench_noise);
    log << "benchmark: " << c.bench_rays << " rays, noise " << noise_token(c.bench_noise) << '\n';
    const SolveResult a = run_solver(c, p, c.bench_first, PenaltyKind::tv, c.bench_first_iterations);
    log << to_string(c.bench_first) << " done: " << a.iterations << " iterations, " << a.seconds << " s\n";
    const SolveResult b = run_solver(c, p, c.bench_second, PenaltyKind::tv, c.bench_second_iterations);
    log << to_string(c.bench_second) << " done: " << b.iterations << " iterations, " << b.seconds << " s\n";

    BenchmarkReport rep;
    rep.rays = c.bench_rays;
    rep.noise = c.bench_noise;
    rep.first = detail::summarize(to_string(c.bench_first), a);
    rep.second = detail::summarize(to_string(c.bench_second), b);
    if (rep.second.seconds_per_iteration > 0.0)
        rep.per_iteration_ratio = rep.first.seconds_per_iteration / rep.second.seconds_per_iteration;
    const std::size_t n = std::min(a.iterations, b.iterations);
    const double b_time = b.records[n].seconds;
    const double a_time = a.records[n].seconds;
    rep.equal_count_ratio = b_time > 0.0 ? a_time / b_time : 0.0;
    rep.second_rel_error_at_first_count = b.records[n].rel_error.value_or(0.0);
    return rep;
}

inline void write_report(std::ostream& os, const BenchmarkReport& r)
{
    os << std::setprecision(6);
    os << "rays " << r.rays << "\nnoise " << r.noise << '\n';
    for (const BenchmarkEntry* e : {&r.first, &r.second})
        os << e->name << ".iterations " << e->iterations << '\n'
           << e->name << ".seconds " << e->seconds << '\n'
           << e->name << ".seconds_per_iteration " << e->seconds_per_iteration << '\n'
           << e->name << ".final_rel_error " << e->final_rel_error << '\n';
    os << "per_iteration_ratio " << r.per_iteration_ratio << '\n'
       << "equal_count_ratio " << r.equal_count_ratio << '\n'
       << r.second.name << ".rel_error_at_" << r.first.iterations << " " << r.second_rel_error_at_first_count << '\n';
}

} // namespace gpstomo

#endif // GPSTOMO_EXPERIMENT_HPP
