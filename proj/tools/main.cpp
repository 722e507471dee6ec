#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "hklab/errors.hpp"
#include "hklab/generators.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace hklab;
    CLI::App app{"hklab: random walks on weighted pre-fractal graphs"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "write a generated graph and its sidecar");
    std::string family;
    GeneratorSpec spec;
    std::string out_path;
    gen->add_option("--family", family, "lattice | gasket | vicsek | stretched_vicsek | weighted_vicsek")->required();
    gen->add_option("--level", spec.level, "construction level");
    gen->add_option("--dim", spec.dim, "lattice dimension");
    gen->add_option("--halfwidth", spec.halfwidth, "lattice half width");
    gen->add_option("--q", spec.q, "weighted_vicsek weight ratio");
    gen->add_option("--vertex-cap", spec.vertex_cap, "refuse to build larger graphs");
    gen->add_option("-o,--out", out_path, "output .hkgraph path")->required();

    auto* check = app.add_subcommand("check", "run the configured checkers on a graph");
    std::string graph_path, config_path, checkers;
    int threads = 1;
    cli::CheckFlags flags;
    check->add_option("graph", graph_path, "hkgraph file")->required();
    check->add_option("--config", config_path, "run config JSON (wins over flags)");
    check->add_option("--threads", threads, "worker threads; results do not depend on it");
    check->add_option("--output", flags.output, "report directory");
    check->add_option("--seed", flags.seed, "random seed");
    check->add_option("--checkers", checkers, "comma separated checker names");
    check->add_option("--centers", flags.centers, "auto | labels | vertices | random");
    check->add_option("--r0", flags.r0, "smallest grid radius");
    check->add_option("--horizon", flags.horizon, "largest heat-kernel time");
    check->add_option("--trials", flags.trials, "random boundary data per cell");
    check->add_option("--mc-walks", flags.mc_walks, "Monte Carlo walks per cell");

    auto* report = app.add_subcommand("report", "summarise a directory of reports");
    std::string report_dir;
    report->add_option("dir", report_dir, "report directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            spec.family = family_from_name(family);
            return cli::cmd_generate(spec, out_path, std::cout);
        }
        if (*check) {
            if (!checkers.empty()) flags.checkers = split_list(checkers);
            std::optional<nlohmann::json> file;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw DomainError("cannot read config " + config_path);
                try {
                    file = nlohmann::json::parse(in);
                } catch (const nlohmann::json::exception& e) {
                    throw DomainError(std::string("config is not valid JSON: ") + e.what());
                }
            }
            cli::RunConfig cfg = cli::resolve_run_config(flags, file, std::cerr);
            return cli::cmd_check(graph_path, cfg, threads, std::cout);
        }
        return cli::cmd_report(report_dir, std::cout, std::cerr);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
