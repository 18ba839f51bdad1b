#pragma once

// Independent reference implementations and fixtures shared by the unit
// tests and the acceptance suite. Nothing here calls the library's solvers.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "keyterrain/centrality.hpp"
#include "keyterrain/equilibrium.hpp"
#include "keyterrain/network.hpp"

namespace kt_test {

using keyterrain::TownId;
using Edge = std::pair<int, int>;

/// Scenario on an explicit edge list. Every road gets `road_time` seconds of
/// travel (length = road_time * speed); towns sit on a line.
keyterrain::Scenario make_scenario(int n, const std::vector<Edge>& edges, std::vector<TownId> enemy = {},
                                   double deployment = 7200.0, double road_time = 1800.0, int units = 1);

/// Connected random graph: random spanning tree plus each other pair with probability p.
std::vector<Edge> random_connected_edges(int n, double p, std::mt19937_64& gen);

/// Same graph with random road lengths in [lo, hi] seconds of travel at 10 m/s.
keyterrain::Scenario random_scenario(int n, double p, std::mt19937_64& gen, double lo = 300.0,
                                     double hi = 3000.0);

keyterrain::CentralityGraph centrality_graph(int n, const std::vector<Edge>& edges);

/// Shortest-path betweenness by enumerating every shortest path of every
/// pair. Unweighted (hop count).
std::vector<double> brute_betweenness(int n, const std::vector<Edge>& edges);

/// PageRank by dense-matrix power iteration run to 1e-15.
std::vector<double> dense_pagerank(int n, const std::vector<Edge>& edges, double damping = 0.85);

struct BrutePath {
    double time;
    std::vector<TownId> path;
};
/// Minimum travel time over all simple paths, with the lexicographically
/// smallest optimal path.
BrutePath brute_shortest_path(const keyterrain::RoadNetwork& net, TownId src, TownId dst);

/// Long-run occupancy of one unit under the town/road Markov chain, by
/// direct event simulation with exponential holding times. Indexed like
/// BaselineDistribution (towns, then directed road states).
keyterrain::BaselineDistribution ctmc_occupancy(const keyterrain::RoadNetwork& net,
                                                const keyterrain::MarkovParams& params,
                                                double horizon, std::uint64_t seed);

double l1_distance(const keyterrain::BaselineDistribution& a, const keyterrain::BaselineDistribution& b);

/// Six-vertex analog of the two-hub graph: hubs 0 and 3 each joined to both
/// middle vertices 1 and 2, plus pendant 4 on hub 0 and pendant 5 on hub 3.
std::vector<Edge> two_hub_edges();

/// Hub-and-cut-vertex analog: hub 0 with leaves 2..6 and neighbor 1; town 1
/// is the only way to the enemy leaf 7.
struct CutVertexCase {
    keyterrain::Scenario scenario;
    TownId hub = 0;
    TownId cut = 1;
    TownId enemy = 7;
};
CutVertexCase cut_vertex_case();

}  // namespace kt_test
