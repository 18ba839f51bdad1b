#include "keyterrain/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "keyterrain/errors.hpp"

namespace keyterrain {

CentralityGraph::CentralityGraph(std::size_t n) : adjacency_(n), present_(n, true) {}

CentralityGraph CentralityGraph::from_network(const RoadNetwork& network) {
    CentralityGraph g(network.num_towns());
    for (const Road& r : network.roads()) {
        if (!network.valid_town(r.a) || !network.valid_town(r.b) || r.a == r.b) continue;
        g.add_edge(r.a, r.b, r.travel_time);
    }
    return g;
}

void CentralityGraph::add_edge(TownId u, TownId v, double weight) {
    adjacency_.at(static_cast<std::size_t>(u)).push_back({v, weight});
    adjacency_.at(static_cast<std::size_t>(v)).push_back({u, weight});
}

void CentralityGraph::remove(TownId v) {
    present_.at(static_cast<std::size_t>(v)) = false;
}

std::size_t CentralityGraph::num_present() const {
    return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), true));
}

std::vector<CentralityGraph::Edge> CentralityGraph::edges(TownId v) const {
    std::vector<Edge> out;
    for (const Edge& e : adjacency_.at(static_cast<std::size_t>(v))) {
        if (present_[static_cast<std::size_t>(e.to)]) out.push_back(e);
    }
    return out;
}

CentralityScores pagerank(const CentralityGraph& graph, const PageRankParams& params) {
    if (!(params.damping > 0.0 && params.damping < 1.0)) {
        throw ValidationError("pagerank: damping must lie in (0,1)");
    }
    if (!(params.tolerance > 0.0)) throw ValidationError("pagerank: tolerance must be positive");

    std::vector<TownId> ids;
    for (std::size_t v = 0; v < graph.capacity(); ++v) {
        if (graph.present(static_cast<TownId>(v))) ids.push_back(static_cast<TownId>(v));
    }
    if (ids.empty()) throw ValidationError("pagerank: graph has no vertices");

    const auto n = ids.size();
    std::vector<std::size_t> slot(graph.capacity(), 0);
    for (std::size_t i = 0; i < n; ++i) slot[static_cast<std::size_t>(ids[i])] = i;
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : graph.edges(ids[i])) nbrs[i].push_back(slot[static_cast<std::size_t>(e.to)]);
    }

    const double d = params.damping;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> rank(n, inv_n), next(n);
    double residual = 0.0;
    for (int iter = 0; iter < params.max_iters; ++iter) {
        // Dangling (isolated) vertices spread their mass uniformly, like teleport.
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (nbrs[i].empty()) dangling += rank[i];
        }
        const double base = (1.0 - d) * inv_n + d * dangling * inv_n;
        std::fill(next.begin(), next.end(), base);
        for (std::size_t i = 0; i < n; ++i) {
            if (nbrs[i].empty()) continue;
            const double share = d * rank[i] / static_cast<double>(nbrs[i].size());
            for (std::size_t j : nbrs[i]) next[j] += share;
        }
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(next[i] - rank[i]));
        rank.swap(next);
        if (residual < params.tolerance) {
            double total = 0.0;
            for (double r : rank) total += r;
            CentralityScores out;
            for (std::size_t i = 0; i < n; ++i) out[ids[i]] = rank[i] / total;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "pagerank: no convergence after " << params.max_iters << " iterations (residual "
        << residual << ")";
    throw SolverError(msg.str());
}

CentralityScores betweenness(const CentralityGraph& graph, const BetweennessParams& params) {
    // Brandes' accumulation; each unordered pair is counted once.
    const auto cap = graph.capacity();
    std::vector<std::vector<CentralityGraph::Edge>> adj(cap);
    for (std::size_t v = 0; v < cap; ++v) {
        if (graph.present(static_cast<TownId>(v))) adj[v] = graph.edges(static_cast<TownId>(v));
    }
    std::vector<double> score(cap, 0.0);
    std::vector<double> sigma(cap), delta(cap), dist(cap);
    std::vector<std::vector<std::size_t>> preds(cap);
    const double inf = std::numeric_limits<double>::infinity();

    auto same = [](double a, double b) {
        return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    };

    for (std::size_t s = 0; s < cap; ++s) {
        if (!graph.present(static_cast<TownId>(s))) continue;
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), inf);
        for (auto& p : preds) p.clear();
        std::vector<std::size_t> order;
        sigma[s] = 1.0;
        dist[s] = 0.0;

        if (!params.weighted) {
            std::queue<std::size_t> q;
            q.push(s);
            while (!q.empty()) {
                std::size_t v = q.front();
                q.pop();
                order.push_back(v);
                for (const auto& e : adj[v]) {
                    auto w = static_cast<std::size_t>(e.to);
                    if (dist[w] == inf) {
                        dist[w] = dist[v] + 1.0;
                        q.push(w);
                    }
                    if (dist[w] == dist[v] + 1.0) {
                        sigma[w] += sigma[v];
                        preds[w].push_back(v);
                    }
                }
            }
        } else {
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            std::vector<bool> done(cap, false);
            pq.push({0.0, s});
            while (!pq.empty()) {
                auto [d, v] = pq.top();
                pq.pop();
                if (done[v]) continue;
                done[v] = true;
                order.push_back(v);
                for (const auto& e : adj[v]) {
                    auto w = static_cast<std::size_t>(e.to);
                    if (done[w]) continue;
                    double nd = d + e.weight;
                    if (dist[w] == inf || (nd < dist[w] && !same(nd, dist[w]))) {
                        dist[w] = nd;
                        sigma[w] = sigma[v];
                        preds[w].assign(1, v);
                        pq.push({nd, w});
                    } else if (same(nd, dist[w])) {
                        sigma[w] += sigma[v];
                        preds[w].push_back(v);
                    }
                }
            }
        }

        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            std::size_t w = *it;
            for (std::size_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) score[w] += delta[w];
        }
    }

    CentralityScores out;
    for (std::size_t v = 0; v < cap; ++v) {
        if (graph.present(static_cast<TownId>(v))) out[static_cast<TownId>(v)] = score[v] / 2.0;
    }
    return out;
}

CentralityScores compute_centrality(const CentralityGraph& graph, const CentralityMetric& metric) {
    return std::visit(
        [&](const auto& p) -> CentralityScores {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PageRankParams>) {
                return pagerank(graph, p);
            } else {
                return betweenness(graph, p);
            }
        },
        metric);
}

namespace {

/// True when (a_id, a) ranks strictly ahead of (b_id, b).
bool ranks_before(TownId a_id, double a, TownId b_id, double b) {
    if (std::abs(a - b) > kScoreTieTolerance) return a > b;
    return a_id < b_id;
}

}  // namespace

std::vector<TownId> select_topk(const CentralityScores& scores, int k,
                                std::span<const TownId> excluded) {
    if (k < 0) throw ValidationError("select_topk: k must be non-negative");
    std::set<TownId> skip(excluded.begin(), excluded.end());
    std::vector<std::pair<TownId, double>> pool;
    for (const auto& [id, value] : scores) {
        if (!skip.contains(id)) pool.emplace_back(id, value);
    }
    if (static_cast<std::size_t>(k) > pool.size()) {
        throw InfeasibleError("select_topk: k=" + std::to_string(k) + " exceeds " +
                              std::to_string(pool.size()) + " eligible vertices");
    }
    // Tolerance-based ties are not a strict weak ordering in general, so pick
    // greedily instead of sorting.
    std::vector<TownId> out;
    std::vector<bool> used(pool.size(), false);
    for (int round = 0; round < k; ++round) {
        std::size_t best = pool.size();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (used[i]) continue;
            if (best == pool.size() ||
                ranks_before(pool[i].first, pool[i].second, pool[best].first, pool[best].second)) {
                best = i;
            }
        }
        used[best] = true;
        out.push_back(pool[best].first);
    }
    return out;
}

std::vector<TownId> select_iterative(CentralityGraph graph, const CentralityMetric& metric, int k,
                                     std::span<const TownId> excluded) {
    if (k < 0) throw ValidationError("select_iterative: k must be non-negative");
    std::set<TownId> skip(excluded.begin(), excluded.end());
    std::size_t available = 0;
    for (std::size_t v = 0; v < graph.capacity(); ++v) {
        if (graph.present(static_cast<TownId>(v)) && !skip.contains(static_cast<TownId>(v))) ++available;
    }
    if (static_cast<std::size_t>(k) > available) {
        throw InfeasibleError("select_iterative: k=" + std::to_string(k) + " exceeds " +
                              std::to_string(available) + " eligible vertices");
    }
    std::vector<TownId> out;
    for (int i = 0; i < k; ++i) {
        auto scores = compute_centrality(graph, metric);
        TownId pick = select_topk(scores, 1, excluded).front();
        out.push_back(pick);
        graph.remove(pick);
    }
    return out;
}

std::vector<TownId> select_iterative(const RoadNetwork& network, const CentralityMetric& metric,
                                     int k, std::span<const TownId> excluded) {
    return select_iterative(CentralityGraph::from_network(network), metric, k, excluded);
}

}  // namespace keyterrain
