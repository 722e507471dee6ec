#include "hklab/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hklab/errors.hpp"

namespace hklab {

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string to_hkgraph(const WeightedGraph& g) {
    std::string out = "hkgraph v1 " + std::to_string(g.vertex_count()) + " " + std::to_string(g.edge_count()) + "\n";
    for (const Edge& e : g.edges()) {
        out += std::to_string(e.u) + " " + std::to_string(e.v) + " " + format_double(e.weight) + "\n";
    }
    for (const auto& [name, v] : g.labels()) out += "label " + std::to_string(v) + " " + name + "\n";
    return out;
}

namespace {

template <typename T>
T parse_number(std::string_view token, std::size_t line) {
    T value{};
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw DomainError("hkgraph line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
        if (pos > start) tokens.push_back(line.substr(start, pos - start));
    }
    return tokens;
}

}  // namespace

WeightedGraph parse_hkgraph(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    if (lines.empty()) throw DomainError("empty hkgraph input");

    auto header = split(lines[0]);
    if (header.size() != 4 || header[0] != "hkgraph" || header[1] != "v1") {
        throw DomainError("missing 'hkgraph v1 <n> <m>' header");
    }
    auto n = parse_number<Vertex>(header[2], 1);
    auto m = parse_number<std::size_t>(header[3], 1);

    std::vector<Edge> edges;
    edges.reserve(m);
    std::map<std::string, Vertex> labels;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto tok = split(lines[i]);
        if (tok.empty()) continue;
        if (tok[0] == "label") {
            if (tok.size() != 3) throw DomainError("hkgraph line " + std::to_string(i + 1) + ": bad label line");
            labels.emplace(std::string(tok[2]), parse_number<Vertex>(tok[1], i + 1));
            continue;
        }
        if (tok.size() != 3) throw DomainError("hkgraph line " + std::to_string(i + 1) + ": expected 'u v weight'");
        edges.push_back({parse_number<Vertex>(tok[0], i + 1), parse_number<Vertex>(tok[1], i + 1),
                         parse_number<double>(tok[2], i + 1)});
    }
    if (edges.size() != m) {
        throw DomainError("hkgraph header declares " + std::to_string(m) + " edges, found " +
                          std::to_string(edges.size()));
    }
    return WeightedGraph(n, std::move(edges), std::move(labels));
}

nlohmann::json graph_sidecar(const WeightedGraph& g, const nlohmann::json& spec) {
    nlohmann::json side;
    side["spec"] = spec;
    side["vertex_count"] = g.vertex_count();
    side["edge_count"] = g.edge_count();
    side["labels"] = nlohmann::json::object();
    side["safe_radius"] = nlohmann::json::object();
    for (const auto& [name, v] : g.labels()) {
        side["labels"][name] = v;
        side["safe_radius"][name] = safe_radius(g, v);
    }
    side["frontier"] = std::vector<Vertex>(g.frontier().begin(), g.frontier().end());
    return side;
}

std::filesystem::path sidecar_path(const std::filesystem::path& graph_path) {
    return std::filesystem::path(graph_path.string() + ".json");
}

void write_graph(const WeightedGraph& g, const std::filesystem::path& path, const nlohmann::json& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_hkgraph(g);
    std::ofstream side(sidecar_path(path), std::ios::binary);
    if (!side) throw std::runtime_error("cannot write " + sidecar_path(path).string());
    side << graph_sidecar(g, spec).dump(2) << "\n";
    if (!out || !side) throw std::runtime_error("write failed for " + path.string());
}

WeightedGraph read_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    WeightedGraph g = parse_hkgraph(buf.str());

    auto side_path = sidecar_path(path);
    if (!std::filesystem::exists(side_path)) return g;
    std::ifstream side_in(side_path);
    auto side = nlohmann::json::parse(side_in);
    std::vector<Vertex> frontier = side.value("frontier", std::vector<Vertex>{});
    if (frontier.empty()) return g;
    return WeightedGraph(g.vertex_count(), std::vector<Edge>(g.edges().begin(), g.edges().end()), g.labels(),
                         std::move(frontier));
}

}  // namespace hklab
