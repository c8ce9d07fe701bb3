#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <gpstomo/config.hpp>
#include <gpstomo/experiment.hpp>

using namespace gpstomo;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.nx = c.ny = c.nz = 8;
    c.stations = 4;
    c.emitters = 5;
    c.ray_counts = {20};
    c.noise_levels = {0.001};
    c.lbfgs.max_iterations = 30;
    c.ldfp.max_outer = 3;
    c.bench_rays = 20;
    return c;
}

fs::path fresh_dir(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / "gpstomo_cli_test" / name;
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string without_seconds(const std::string& csv)
{
    std::istringstream is(csv);
    std::string line, out;
    while (std::getline(is, line))
        out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

ExperimentConfig parse(const std::string& text)
{
    std::istringstream is(text);
    return parse_config(is);
}

} // namespace

TEST(Config, DefaultsMatchToyModel)
{
    const ExperimentConfig c = parse("");
    EXPECT_EQ(c.nx, 30u);
    EXPECT_EQ(c.nz, 30u);
    EXPECT_EQ(c.bounds.z_max, 15.0);
    EXPECT_EQ(c.stations, 15u);
    EXPECT_EQ(c.emitters, 30u);
    EXPECT_EQ(c.beta, 1e-2);
    EXPECT_EQ(c.alpha_tv, 1e-13);
    EXPECT_EQ(c.alpha_quadratic, 1e-15);
    EXPECT_EQ(c.ray_counts, (std::vector<std::size_t>{1, 50, 100, 240, 360, 450}));
    EXPECT_EQ(c.noise_levels, std::vector<double>{0.001});
    EXPECT_EQ(c.bench_noise, 0.02);
    EXPECT_EQ(c.resolved_samples(), 60u);
    EXPECT_EQ(c.ldfp.max_outer, 30u);
    EXPECT_EQ(c.lbfgs.memory, 10u);
}

TEST(Config, ParsesSectionsAndLists)
{
    const ExperimentConfig c = parse("[grid]\nnx = 10\n[sweep]\nrays = 5, 7\nnoise = 0.02,0.1\n"
                                     "solvers = lbfgs, ldfp\npenalties = quadratic\n[lbfgs]\nmemory = 4\n"
                                     "[output]\ndir = somewhere\n");
    EXPECT_EQ(c.nx, 10u);
    EXPECT_EQ(c.ray_counts, (std::vector<std::size_t>{5, 7}));
    EXPECT_EQ(c.noise_levels, (std::vector<double>{0.02, 0.1}));
    EXPECT_EQ(c.solvers, (std::vector<SolverKind>{SolverKind::lbfgs, SolverKind::ldfp}));
    EXPECT_EQ(c.penalties, std::vector<PenaltyKind>{PenaltyKind::quadratic});
    EXPECT_EQ(c.lbfgs.memory, 4u);
    EXPECT_EQ(c.output_dir, fs::path("somewhere"));
}

TEST(Config, CanonicalTextRoundTrips)
{
    ExperimentConfig c = small_config();
    c.noise_levels = {0.001, 0.1};
    c.penalties = {PenaltyKind::tv, PenaltyKind::quadratic};
    const ExperimentConfig back = parse(to_ini(c));
    EXPECT_EQ(to_ini(back), to_ini(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, Errors)
{
    for (const char* bad : {"[grid]\nnx = banana\n", "[nope]\nx = 1\n", "[grid]\nwidth = 3\n",
                            "[sweep]\nrays = 451\n", "[sweep]\nsolvers = newton\n", "[sweep]\nrays =\n",
                            "[regularization]\nbeta = 2\n", "[lbfgs]\neta1 = 0.9\n"}) {
        try {
            parse(bad);
            ADD_FAILURE() << "accepted: " << bad;
        } catch (const Error& e) {
            EXPECT_TRUE(e.kind() == ErrorKind::config || e.kind() == ErrorKind::invalid_argument) << bad;
        }
    }
    EXPECT_THROW(load_config("/nonexistent/config.ini"), Error);
}

TEST(Config, HashChangesWithEveryField)
{
    const ExperimentConfig base;
    const std::uint64_t h = config_hash(base);
    std::vector<ExperimentConfig> variants(12, base);
    variants[0].nx = 31;
    variants[1].bounds.z_max = 16;
    variants[2].phantom.N1 = 31;
    variants[3].seed = 7;
    variants[4].ray_counts = {1, 50};
    variants[5].noise_levels = {0.002};
    variants[6].solvers = {SolverKind::ldfp};
    variants[7].alpha_tv = 2e-13;
    variants[8].lbfgs.memory = 11;
    variants[9].ldfp.inner.max_iterations = 201;
    variants[10].bench_noise = 0.03;
    variants[11].output_dir = "elsewhere";
    for (const auto& v : variants)
        EXPECT_NE(config_hash(v), h);
    EXPECT_EQ(config_hash(ExperimentConfig{}), h);
}

TEST(Experiment, NoiseSeedsDiffer)
{
    EXPECT_NE(noise_seed(1, 50, 0.001), noise_seed(1, 100, 0.001));
    EXPECT_NE(noise_seed(1, 50, 0.001), noise_seed(1, 50, 0.02));
    EXPECT_EQ(noise_seed(1, 50, 0.001), noise_seed(1, 50, 0.001));
    EXPECT_EQ(noise_token(0.001), "0.1pct");
    EXPECT_EQ(noise_token(0.02), "2pct");
    EXPECT_EQ(output_stem(SolverKind::lbfgs, PenaltyKind::tv, 450, 0.001), "lbfgs-tv_450rays_0.1pct");
}

TEST(Sweep, SingleCombination)
{
    const fs::path d = fresh_dir("single");
    std::ostringstream log;
    const SweepOutcome out = run_sweep(small_config(), d, log);
    EXPECT_EQ(out.combinations, 1u);
    EXPECT_EQ(out.failures, 0u);
    std::size_t csv = 0, fld = 0, manifest = 0;
    for (const auto& e : fs::directory_iterator(d)) {
        csv += e.path().extension() == ".csv";
        fld += e.path().extension() == ".fld";
        manifest += e.path().filename() == "manifest.txt";
    }
    EXPECT_EQ(csv, 1u);
    EXPECT_EQ(fld, 1u);
    EXPECT_EQ(manifest, 1u);
    EXPECT_TRUE(fs::exists(d / "lbfgs-tv_20rays_0.1pct.csv"));
    const std::string m = slurp(d / "manifest.txt");
    EXPECT_NE(m.find(hex(config_hash(small_config()))), std::string::npos);
    EXPECT_NE(m.find("lbfgs-tv_20rays_0.1pct.fld"), std::string::npos);
}

TEST(Sweep, FullGridOfCombinations)
{
    ExperimentConfig c = small_config();
    c.ray_counts = {1, 10, 20};
    c.solvers = {SolverKind::lbfgs, SolverKind::ldfp};
    c.penalties = {PenaltyKind::tv, PenaltyKind::quadratic};
    const fs::path d = fresh_dir("grid");
    std::ostringstream log;
    const SweepOutcome out = run_sweep(c, d, log);
    // ldfp pairs only with the TV penalty
    EXPECT_EQ(out.combinations, 9u);
    EXPECT_EQ(out.failures, 0u);
    EXPECT_EQ(out.outputs.size(), 18u);
    const auto recs = read_csv(d / "ldfp-tv_10rays_0.1pct.csv");
    EXPECT_EQ(recs.size(), 4u);
}

TEST(Sweep, FailureIsLoggedAndSweepContinues)
{
    ExperimentConfig c = small_config();
    c.ray_counts = {0, 5};
    const fs::path d = fresh_dir("fail");
    std::ostringstream log;
    const SweepOutcome out = run_sweep(c, d, log);
    EXPECT_EQ(out.combinations, 2u);
    EXPECT_EQ(out.failures, 1u);
    EXPECT_NE(log.str().find("lbfgs-tv_0rays_0.1pct: FAILED"), std::string::npos);
    EXPECT_TRUE(fs::exists(d / "lbfgs-tv_5rays_0.1pct.csv"));
    EXPECT_FALSE(fs::exists(d / "lbfgs-tv_0rays_0.1pct.csv"));
}

TEST(Sweep, ReproducibleModuloTiming)
{
    ExperimentConfig c = small_config();
    c.ray_counts = {10, 20};
    const fs::path a = fresh_dir("rep_a"), b = fresh_dir("rep_b");
    std::ostringstream log;
    run_sweep(c, a, log);
    run_sweep(c, b, log);
    for (const char* f : {"lbfgs-tv_10rays_0.1pct.csv", "lbfgs-tv_20rays_0.1pct.csv"})
        EXPECT_EQ(without_seconds(slurp(a / f)), without_seconds(slurp(b / f)));
    EXPECT_EQ(slurp(a / "lbfgs-tv_20rays_0.1pct.fld"), slurp(b / "lbfgs-tv_20rays_0.1pct.fld"));
    EXPECT_EQ(slurp(a / "manifest.txt"), slurp(b / "manifest.txt"));
}

TEST(Benchmark, SingleIterationEach)
{
    ExperimentConfig c = small_config();
    c.bench_first_iterations = 1;
    c.bench_second_iterations = 1;
    std::ostringstream log;
    const BenchmarkReport r = run_benchmark(c, log);
    EXPECT_EQ(r.first.iterations, 1u);
    EXPECT_EQ(r.second.iterations, 1u);
    EXPECT_GT(r.per_iteration_ratio, 0.0);
    EXPECT_NEAR(r.equal_count_ratio, r.first.seconds / r.second.seconds, 1e-9 * r.equal_count_ratio);
    std::ostringstream os;
    write_report(os, r);
    EXPECT_NE(os.str().find("per_iteration_ratio"), std::string::npos);
    EXPECT_NE(os.str().find("ldfp.seconds_per_iteration"), std::string::npos);
}

TEST(Benchmark, SelfComparisonRatioNearOne)
{
    ExperimentConfig c = small_config();
    c.nx = c.ny = c.nz = 16;
    c.bench_first = c.bench_second = SolverKind::ldfp;
    c.bench_first_iterations = c.bench_second_iterations = 10;
    std::ostringstream log;
    const BenchmarkReport r = run_benchmark(c, log);
    EXPECT_GE(r.per_iteration_ratio, 0.5);
    EXPECT_LE(r.per_iteration_ratio, 2.0);
    EXPECT_EQ(r.first.final_rel_error, r.second.final_rel_error);
}
