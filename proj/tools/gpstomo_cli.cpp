#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <gpstomo/gpstomo.hpp>

int main(int argc, char** argv)
{
    CLI::App app{"Synthetic GPS tomography reconstructions"};
    std::string config_path;
    std::string mode = "sweep";
    std::string dump_network, dump_operator, out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "INI experiment config (defaults apply to missing keys)");
    app.add_option("--mode", mode, "sweep or benchmark")->check(CLI::IsMember({"sweep", "benchmark"}));
    app.add_option("--dump-network", dump_network, "write the ray list to this file");
    app.add_option("--dump-operator", dump_operator, "write the forward operator as row col weight triples");
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_option("--seed", seed, "network seed (overrides [network] seed)");
    CLI11_PARSE(app, argc, argv);

    try {
        gpstomo::ExperimentConfig cfg;
        if (!config_path.empty())
            cfg = gpstomo::load_config(config_path);
        if (seed)
            cfg.seed = *seed;
        if (!out_dir.empty())
            cfg.output_dir = out_dir;
        cfg.validate();
        std::cerr << "config hash " << gpstomo::hex(gpstomo::config_hash(cfg)) << '\n';

        if (!dump_network.empty() || !dump_operator.empty()) {
            const gpstomo::Network net = gpstomo::build_network(cfg);
            if (!dump_network.empty()) {
                std::ofstream os(dump_network);
                gpstomo::write_network(os, net);
                if (!os)
                    throw gpstomo::Error(gpstomo::ErrorKind::io, "cannot write " + dump_network);
            }
            if (!dump_operator.empty()) {
                std::ofstream os(dump_operator);
                gpstomo::assemble_operator(net, cfg.resolved_samples()).write_triples(os);
                if (!os)
                    throw gpstomo::Error(gpstomo::ErrorKind::io, "cannot write " + dump_operator);
            }
        }

        if (mode == "benchmark") {
            const gpstomo::BenchmarkReport rep = gpstomo::run_benchmark(cfg, std::cerr);
            std::filesystem::create_directories(cfg.output_dir);
            std::ofstream os(cfg.output_dir / "benchmark.txt");
            gpstomo::write_report(os, rep);
            gpstomo::write_report(std::cout, rep);
            return os ? 0 : 1;
        }
        const gpstomo::SweepOutcome res = gpstomo::run_sweep(cfg, cfg.output_dir, std::cerr);
        std::cerr << res.combinations - res.failures << "/" << res.combinations << " combinations succeeded\n";
        return res.failures ? 1 : 0;
    } catch (const gpstomo::Error& e) {
        std::cerr << "error (" << gpstomo::to_string(e.kind()) << "): " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
