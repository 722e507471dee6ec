#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hklab/checkers.hpp"
#include "hklab/generators.hpp"

namespace hklab::cli {

/// Everything a check run depends on. Serialised next to the reports as run_config.json.
struct RunConfig {
    GridSpec grid;
    std::vector<std::string> checkers;
    std::uint64_t seed = 1;
    std::string output = "reports";
    CheckOptions options;

    nlohmann::json to_json() const;
};

/// Strict parse: unknown keys, unknown checkers and bad values throw DomainError.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Command-line values for the keys that also exist in the config file.
struct CheckFlags {
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::string>> checkers;
    std::optional<std::string> centers;
    std::optional<int> r0;
    std::optional<int> horizon;
    std::optional<int> trials;
    std::optional<long> mc_walks;
};

/// Flags first, then the config file on top; conflicts are reported on `warn`.
RunConfig resolve_run_config(const CheckFlags& flags, const std::optional<nlohmann::json>& file, std::ostream& warn);

int cmd_generate(const GeneratorSpec& spec, const std::filesystem::path& out, std::ostream& log);
int cmd_check(const std::filesystem::path& graph, const RunConfig& cfg, int threads, std::ostream& log);
int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

}  // namespace hklab::cli
