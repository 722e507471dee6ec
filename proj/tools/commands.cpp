#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "hklab/errors.hpp"
#include "hklab/generators.hpp"
#include "hklab/graph_io.hpp"
#include "hklab/workspace.hpp"

namespace hklab::cli {

using nlohmann::json;

namespace {

constexpr const char* kRunConfigName = "run_config.json";

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

std::string cell(const json& v) {
    if (v.is_null()) return "-";
    if (v.is_number()) {
        std::ostringstream s;
        s << std::setprecision(4) << v.get<double>();
        return s.str();
    }
    return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

json RunConfig::to_json() const {
    json opts = options_to_json(options);
    opts.erase("seed");
    return json{{"grid", hklab::to_json(grid)},
                {"checkers", checkers},
                {"seed", seed},
                {"output", output},
                {"options", opts},
                {"thresholds", hklab::to_json(options.thresholds)}};
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    static const std::set<std::string> known{"grid", "checkers", "seed", "output", "options", "thresholds"};
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) throw DomainError("unknown config key '" + k + "'");
    }
    RunConfig cfg;
    try {
        if (j.contains("grid")) cfg.grid = grid_spec_from_json(j.at("grid"));
        if (j.contains("checkers")) cfg.checkers = j.at("checkers").get<std::vector<std::string>>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    } catch (const json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    if (!j.contains("checkers")) cfg.checkers = checker_names();
    for (const auto& name : cfg.checkers) {
        const auto& all = checker_names();
        if (std::find(all.begin(), all.end(), name) == all.end()) throw DomainError("unknown checker '" + name + "'");
    }
    if (j.contains("options")) {
        if (j.at("options").contains("seed")) throw DomainError("seed belongs at the top level of the config");
        apply_options(cfg.options, j.at("options"));
    }
    if (j.contains("thresholds")) cfg.options.thresholds = thresholds_from_json(j.at("thresholds"));
    cfg.options.seed = cfg.seed;
    return cfg;
}

RunConfig resolve_run_config(const CheckFlags& flags, const std::optional<json>& file, std::ostream& warn) {
    json merged = file.value_or(json::object());
    if (!merged.is_object()) throw DomainError("config must be a JSON object");
    // one flag per config key; the file wins
    auto apply = [&](const json::json_pointer& ptr, const json& flag_value) {
        if (merged.contains(ptr)) {
            if (merged.at(ptr) != flag_value) {
                warn << "warning: " << ptr.to_string() << " is set by both the config file and a flag; using "
                     << merged.at(ptr).dump() << " from the config file\n";
            }
            return;
        }
        merged[ptr] = flag_value;
    };
    if (flags.output) apply(json::json_pointer("/output"), *flags.output);
    if (flags.seed) apply(json::json_pointer("/seed"), *flags.seed);
    if (flags.checkers) apply(json::json_pointer("/checkers"), *flags.checkers);
    if (flags.centers) apply(json::json_pointer("/grid/centers"), *flags.centers);
    if (flags.r0) apply(json::json_pointer("/grid/r0"), *flags.r0);
    if (flags.horizon) apply(json::json_pointer("/grid/horizon"), *flags.horizon);
    if (flags.trials) apply(json::json_pointer("/options/trials"), *flags.trials);
    if (flags.mc_walks) apply(json::json_pointer("/options/mc_walks"), *flags.mc_walks);
    return run_config_from_json(merged);
}

int cmd_generate(const GeneratorSpec& spec, const std::filesystem::path& out, std::ostream& log) {
    WeightedGraph g = generate(spec);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_graph(g, out, to_json(spec));
    log << "wrote " << out.string() << ": " << g.vertex_count() << " vertices, " << g.edge_count() << " edges\n";
    return 0;
}

int cmd_check(const std::filesystem::path& graph_path, const RunConfig& cfg, int threads, std::ostream& log) {
    if (cfg.checkers.empty()) {
        log << "no checkers configured\n";
        return 0;
    }
    WeightedGraph g = read_graph(graph_path);
    json spec = nullptr;
    if (auto side = sidecar_path(graph_path); std::filesystem::exists(side)) spec = read_json(side).value("spec", json());

    Workspace ws(g);
    if (const char* cache = std::getenv("HKLAB_CACHE"); cache && *cache) ws.attach_disk_cache(cache);
    Grid grid = make_grid(ws, cfg.grid, cfg.seed);
    CheckOptions opt = cfg.options;
    opt.seed = cfg.seed;
    opt.threads = std::max(1, threads);

    const std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    write_text(dir / kRunConfigName, cfg.to_json().dump(2) + "\n");

    bool all = true;
    for (const auto& name : cfg.checkers) {
        ConditionReport r = run_checker(name, ws, grid, opt);
        r.graph_spec = spec;
        write_text(dir / (name + ".json"), r.to_json().dump(2) + "\n");
        write_text(dir / (name + ".csv"), r.to_csv());
        std::size_t flagged = std::count_if(r.cells.begin(), r.cells.end(), [](const CellResult& c) { return !c.flag.empty(); });
        log << std::left << std::setw(18) << name << " " << (r.pass ? "pass" : "FAIL") << "  (" << r.cells.size()
            << " cells, " << flagged << " flagged)\n";
        all = all && r.pass;
    }
    ws.flush();
    return all ? 0 : 1;
}

int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::is_directory(dir)) {
        err << "not a directory: " << dir.string() << "\n";
        return 2;
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto& p = entry.path();
        if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != kRunConfigName) files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    std::vector<json> reports;
    for (const auto& p : files) {
        json j;
        try {
            j = read_json(p);
        } catch (const std::exception& e) {
            err << "unreadable report " << p.filename().string() << ": " << e.what() << "\n";
            return 2;
        }
        const std::string schema = j.is_object() ? j.value("schema", std::string()) : std::string();
        if (schema != kReportSchema) {
            err << "mixed schemas: " << p.filename().string() << " has schema '" << schema << "', expected '"
                << kReportSchema << "'\n";
            return 2;
        }
        reports.push_back(std::move(j));
    }
    if (reports.empty()) {
        err << "no reports in " << dir.string() << "\n";
        return 1;
    }

    std::ostringstream csv;
    csv << "kind,name,verdict,cells,flagged,max,min,spread,exponent,r2\n";
    auto csv_num = [](const json& v) { return v.is_number() ? format_double(v.get<double>()) : std::string(); };
    out << std::left << std::setw(18) << "condition" << std::setw(8) << "verdict" << std::setw(7) << "cells"
        << std::setw(8) << "flagged" << std::setw(12) << "max" << std::setw(12) << "min" << std::setw(12) << "spread"
        << std::setw(10) << "exponent" << "r2\n";
    std::size_t passed = 0;
    std::vector<std::pair<std::string, json>> exponents;
    for (const auto& r : reports) {
        const auto& s = r.at("summary");
        const std::size_t n = r.at("cells").size();
        std::size_t flagged = 0;
        for (const auto& c : r.at("cells")) flagged += c.contains("flag") ? 1 : 0;
        const std::string verdict = r.at("verdict");
        passed += verdict == "pass" ? 1 : 0;
        out << std::setw(18) << r.at("condition").get<std::string>() << std::setw(8) << verdict << std::setw(7) << n
            << std::setw(8) << flagged << std::setw(12) << cell(s.at("max")) << std::setw(12) << cell(s.at("min"))
            << std::setw(12) << cell(s.at("spread")) << std::setw(10) << cell(s.at("exponent")) << cell(s.at("r2"))
            << "\n";
        csv << "report," << r.at("condition").get<std::string>() << "," << verdict << "," << n << "," << flagged << ","
            << csv_num(s.at("max")) << "," << csv_num(s.at("min")) << "," << csv_num(s.at("spread")) << ","
            << csv_num(s.at("exponent")) << "," << csv_num(s.at("r2")) << "\n";
        const auto& m = r.at("metrics");
        for (const char* name : {"alpha", "beta", "beta_prime"}) {
            if (m.contains(name)) {
                json e{{"value", m.at(name)}, {"r2", m.value(std::string(name) + "_r2", json())}};
                exponents.emplace_back(name, e);
            }
        }
    }
    if (!exponents.empty()) {
        out << "\n" << std::setw(18) << "exponent" << std::setw(12) << "value" << "r2\n";
        for (const auto& [name, e] : exponents) {
            out << std::setw(18) << name << std::setw(12) << cell(e.at("value")) << cell(e.at("r2")) << "\n";
            csv << "exponent," << name << ",,,,,,," << csv_num(e.at("value")) << "," << csv_num(e.at("r2")) << "\n";
        }
    }
    out << "\n" << passed << "/" << reports.size() << " conditions pass\n";
    write_text(dir / "summary.csv", csv.str());
    return 0;
}

}  // namespace hklab::cli
