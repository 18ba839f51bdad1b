#pragma once

#include <map>
#include <span>
#include <variant>
#include <vector>

#include "keyterrain/network.hpp"

namespace keyterrain {

/// Undirected graph with removable vertices. Vertex ids are stable under
/// removal, matching town ids of the network it was built from.
class CentralityGraph {
public:
    explicit CentralityGraph(std::size_t n = 0);
    static CentralityGraph from_network(const RoadNetwork& network);

    void add_edge(TownId u, TownId v, double weight = 1.0);
    /// Deletes `v` and its incident edges.
    void remove(TownId v);

    std::size_t capacity() const { return adjacency_.size(); }
    bool present(TownId v) const { return present_.at(static_cast<std::size_t>(v)); }
    std::size_t num_present() const;

    struct Edge {
        TownId to;
        double weight;
    };
    /// Incident edges to present vertices only.
    std::vector<Edge> edges(TownId v) const;

private:
    std::vector<std::vector<Edge>> adjacency_;
    std::vector<bool> present_;
};

struct PageRankParams {
    double damping = 0.85;
    double tolerance = 1e-10;
    int max_iters = 1000;
};

struct BetweennessParams {
    /// Use edge weights (travel times) instead of hop counts.
    bool weighted = false;
};

using CentralityMetric = std::variant<PageRankParams, BetweennessParams>;

/// Score per present vertex.
using CentralityScores = std::map<TownId, double>;

CentralityScores pagerank(const CentralityGraph& graph, const PageRankParams& params = {});
CentralityScores betweenness(const CentralityGraph& graph, const BetweennessParams& params = {});
CentralityScores compute_centrality(const CentralityGraph& graph, const CentralityMetric& metric);

/// Scores closer than this are treated as ties and broken by lowest id.
inline constexpr double kScoreTieTolerance = 1e-9;

/// The k highest-scoring vertices not in `excluded`, best first.
std::vector<TownId> select_topk(const CentralityScores& scores, int k,
                                std::span<const TownId> excluded);

/// Delete-and-recompute selection: k rounds of scoring the residual graph and
/// removing its best non-excluded vertex. Returns removed vertices in order.
std::vector<TownId> select_iterative(const RoadNetwork& network, const CentralityMetric& metric,
                                     int k, std::span<const TownId> excluded);
std::vector<TownId> select_iterative(CentralityGraph graph, const CentralityMetric& metric, int k,
                                     std::span<const TownId> excluded);

}  // namespace keyterrain
