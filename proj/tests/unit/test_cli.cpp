#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "hklab/errors.hpp"
#include "hklab/graph_io.hpp"

using namespace hklab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("hklab-cli-" + std::to_string(::getpid()) + "-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int exe(const std::string& args) {
    int status = std::system((std::string(HKLAB_EXE) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config parsing") {
    auto cfg = cli::run_config_from_json({{"seed", 5}, {"checkers", {"einstein"}}});
    CHECK(cfg.seed == 5);
    CHECK(cfg.options.seed == 5);
    CHECK(cfg.checkers == std::vector<std::string>{"einstein"});
    CHECK(cli::run_config_from_json(json::object()).checkers == checker_names());
    CHECK_THROWS_AS(cli::run_config_from_json({{"sed", 5}}), DomainError);
    CHECK_THROWS_AS(cli::run_config_from_json({{"checkers", {"einsteinn"}}}), DomainError);
    CHECK_THROWS_AS(cli::run_config_from_json({{"options", {{"seed", 3}}}}), DomainError);
    auto back = cli::run_config_from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("config file wins over flags with a warning") {
    cli::CheckFlags flags;
    flags.seed = 3;
    flags.trials = 10;
    std::ostringstream warn;
    auto cfg = cli::resolve_run_config(flags, json{{"seed", 9}}, warn);
    CHECK(cfg.seed == 9);
    CHECK(cfg.options.trials == 10);
    CHECK(warn.str().find("/seed") != std::string::npos);
    std::ostringstream quiet;
    cli::resolve_run_config(flags, json{{"seed", 3}}, quiet);
    CHECK(quiet.str().empty());
}

TEST_CASE("generate round trip is byte identical") {
    auto dir = scratch("gen");
    GeneratorSpec spec;
    spec.family = Family::weighted_vicsek;
    spec.level = 2;
    std::ostringstream log;
    CHECK(cli::cmd_generate(spec, dir / "a.hkg", log) == 0);
    auto g = read_graph(dir / "a.hkg");
    write_graph(g, dir / "b.hkg", to_json(spec));
    CHECK(slurp(dir / "a.hkg") == slurp(dir / "b.hkg"));
    CHECK(slurp(dir / "a.hkg.json") == slurp(dir / "b.hkg.json"));
    CHECK(g.frontier().size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("check output does not depend on threads") {
    auto dir = scratch("threads");
    GeneratorSpec spec;
    spec.family = Family::gasket;
    spec.level = 4;
    std::ostringstream log;
    cli::cmd_generate(spec, dir / "g.hkg", log);
    cli::CheckFlags flags;
    std::ostringstream warn;
    auto cfg = cli::resolve_run_config(flags, json{{"grid", {{"centers", "random"}, {"count", 3}}}}, warn);
    cfg.output = (dir / "one").string();
    int a = cli::cmd_check(dir / "g.hkg", cfg, 1, log);
    cfg.output = (dir / "four").string();
    int b = cli::cmd_check(dir / "g.hkg", cfg, 4, log);
    CHECK(a == b);
    for (const auto& name : checker_names()) {
        CHECK(slurp(dir / "one" / (name + ".json")) == slurp(dir / "four" / (name + ".json")));
        CHECK(slurp(dir / "one" / (name + ".csv")) == slurp(dir / "four" / (name + ".csv")));
    }
    auto rep = json::parse(slurp(dir / "one" / "einstein.json"));
    CHECK(rep["graph_spec"]["family"] == "gasket");

    std::ostringstream out, err;
    CHECK(cli::cmd_report(dir / "one", out, err) == 0);
    CHECK(out.str().find("einstein") != std::string::npos);
    CHECK(fs::exists(dir / "one" / "summary.csv"));
    fs::remove_all(dir);
}

TEST_CASE("report errors") {
    auto dir = scratch("report");
    std::ostringstream out, err;
    CHECK(cli::cmd_report(dir, out, err) == 1);
    std::ofstream(dir / "x.json") << R"({"schema": "other/2"})";
    CHECK(cli::cmd_report(dir, out, err) == 2);
    CHECK(err.str().find("mixed schemas") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("executable exit codes") {
    auto dir = scratch("exe");
    const std::string g = (dir / "z.hkg").string();
    CHECK(exe("generate --family lattice --dim 1 --halfwidth 50 -o " + g) == 0);
    CHECK(exe("generate --family carpet --level 2 -o " + g) == 2);
    CHECK(exe("generate --family gasket --level 12 --vertex-cap 1000 -o " + g) == 2);
    std::ofstream(dir / "cfg.json") << R"({"checkers": ["einstein", "uniform_exit"], "output": ")" +
                                           (dir / "rep").string() + "\"}";
    CHECK(exe("check " + g + " --config " + (dir / "cfg.json").string()) == 0);
    CHECK(fs::exists(dir / "rep" / "einstein.json"));
    CHECK(fs::exists(dir / "rep" / "run_config.json"));
    std::ofstream(dir / "bad.json") << R"({"grid": {"radius": 2}})";
    CHECK(exe("check " + g + " --config " + (dir / "bad.json").string()) == 2);
    CHECK(exe("report " + (dir / "rep").string()) == 0);
    CHECK(exe("report " + (dir / "empty").string()) != 0);
    fs::remove_all(dir);
}
