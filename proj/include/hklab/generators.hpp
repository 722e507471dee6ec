#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include <json.hpp>

#include "hklab/graph.hpp"

namespace hklab {

enum class Family { lattice, gasket, vicsek, stretched_vicsek, weighted_vicsek };

struct GeneratorSpec {
    Family family = Family::lattice;
    int level = 0;        // gasket / vicsek families
    int dim = 1;          // lattice
    int halfwidth = 1;    // lattice
    double q = 1.25;      // weighted_vicsek: w(i) = q^i on annulus i
    std::size_t vertex_cap = 4'000'000;
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);
nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);

WeightedGraph generate(const GeneratorSpec& spec);

/// Box {-h..h}^d with nearest-neighbour unit edges; frontier = box faces.
WeightedGraph lattice_zd(int dim, int halfwidth, std::size_t vertex_cap = 4'000'000);

/// Level-n gasket: corners c0,c1,c2; c0 is the root of the one-sided infinite gasket,
/// so c1 and c2 form the truncation frontier.
WeightedGraph sierpinski_gasket(int level, std::size_t vertex_cap = 4'000'000);

/// Cross-shaped Vicsek tree; root z0 at the centre, extremes e0..e3 (E, N, W, S) form the frontier.
WeightedGraph vicsek_tree(int level, std::size_t vertex_cap = 4'000'000);

/// Annulus index of each edge of vicsek_tree(level): smallest i whose central block T_i holds it.
std::vector<int> vicsek_annulus_index(const WeightedGraph& tree, int level);

/// Vicsek tree rooted at extreme e2 with the block annuli G_i \ G_{i-1} subdivided into
/// paths of length i+1. Cut vertices z1..zn lie towards extreme e0 (the infinite direction);
/// zn is the truncation frontier.
WeightedGraph stretched_vicsek(int level, std::size_t vertex_cap = 4'000'000);

using WeightRule = std::function<double(int)>;

/// vicsek_tree(level) with every annulus-i edge weighted rule(i).
WeightedGraph weighted_vicsek(int level, const WeightRule& rule, std::size_t vertex_cap = 4'000'000);
WeightedGraph weighted_vicsek(int level, double q, std::size_t vertex_cap = 4'000'000);

}  // namespace hklab
