#pragma once

#include <deque>
#include <vector>

#include "hklab/graph.hpp"

namespace oracle {

// all-pairs BFS, no shared code with the library
inline std::vector<std::vector<int>> distance_matrix(const hklab::WeightedGraph& g) {
    const int n = g.vertex_count();
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : g.edges()) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<std::vector<int>> d(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
        std::deque<int> q{s};
        d[s][s] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : adj[u]) {
                if (d[s][v] < 0) {
                    d[s][v] = d[s][u] + 1;
                    q.push_back(v);
                }
            }
        }
    }
    return d;
}

inline std::vector<double> measures(const hklab::WeightedGraph& g) {
    std::vector<double> mu(g.vertex_count(), 0.0);
    for (const auto& e : g.edges()) {
        mu[e.u] += e.weight;
        mu[e.v] += e.weight;
    }
    return mu;
}

}  // namespace oracle
