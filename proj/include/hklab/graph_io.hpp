#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hklab/graph.hpp"

namespace hklab {

/// `hkgraph v1 <n> <m>` header, one `u v weight` line per edge, then `label u name` lines.
std::string to_hkgraph(const WeightedGraph& g);
WeightedGraph parse_hkgraph(std::string_view text);

/// Sidecar metadata: generator spec, labels, truncation frontier and per-label safe radii.
nlohmann::json graph_sidecar(const WeightedGraph& g, const nlohmann::json& spec);

void write_graph(const WeightedGraph& g, const std::filesystem::path& path, const nlohmann::json& spec);
/// Reads `path` and, when present, `path.json` for the truncation frontier.
WeightedGraph read_graph(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& graph_path);

std::string format_double(double value);

}  // namespace hklab
