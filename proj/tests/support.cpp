#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace kt_test {

using namespace keyterrain;

Scenario make_scenario(int n, const std::vector<Edge>& edges, std::vector<TownId> enemy, double deployment,
                       double road_time, int units) {
    std::vector<Town> towns;
    for (int i = 0; i < n; ++i) towns.push_back(Town{i, 1000.0 * i, 0.0, 100.0, std::nullopt});
    std::vector<Road> roads;
    for (auto [a, b] : edges) {
        roads.push_back(Road{std::min(a, b), std::max(a, b), road_time * 10.0, road_time, false});
    }
    Scenario s;
    s.network = RoadNetwork(std::move(towns), std::move(roads));
    std::sort(enemy.begin(), enemy.end());
    s.enemy_towns = std::move(enemy);
    s.deployment_mean = deployment;
    s.num_units = units;
    s.unit_speed = 10.0;
    return s;
}

std::vector<Edge> random_connected_edges(int n, double p, std::mt19937_64& gen) {
    std::set<Edge> edges;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> parent(0, v - 1);
        edges.insert({parent(gen), v});
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (u(gen) < p) edges.insert({a, b});
        }
    }
    return {edges.begin(), edges.end()};
}

Scenario random_scenario(int n, double p, std::mt19937_64& gen, double lo, double hi) {
    auto edges = random_connected_edges(n, p, gen);
    Scenario s = make_scenario(n, edges);
    std::vector<Road> roads(s.network.roads().begin(), s.network.roads().end());
    std::uniform_real_distribution<double> t(lo, hi);
    for (Road& r : roads) {
        r.travel_time = t(gen);
        r.length = r.travel_time * 10.0;
    }
    std::vector<Town> towns(s.network.towns().begin(), s.network.towns().end());
    s.network = RoadNetwork(std::move(towns), std::move(roads));
    return s;
}

CentralityGraph centrality_graph(int n, const std::vector<Edge>& edges) {
    CentralityGraph g(static_cast<std::size_t>(n));
    for (auto [a, b] : edges) g.add_edge(a, b);
    return g;
}

std::vector<double> brute_betweenness(int n, const std::vector<Edge>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<double> score(n, 0.0);
    for (int s = 0; s < n; ++s) {
        for (int t = s + 1; t < n; ++t) {
            // Enumerate simple paths, keep the shortest ones.
            std::vector<std::vector<int>> best;
            std::size_t best_len = std::numeric_limits<std::size_t>::max();
            std::vector<int> path{s};
            std::vector<bool> on(n, false);
            on[s] = true;
            std::function<void(int)> dfs = [&](int v) {
                if (path.size() > best_len) return;
                if (v == t) {
                    if (path.size() < best_len) {
                        best_len = path.size();
                        best.clear();
                    }
                    best.push_back(path);
                    return;
                }
                for (int w : adj[v]) {
                    if (on[w]) continue;
                    on[w] = true;
                    path.push_back(w);
                    dfs(w);
                    path.pop_back();
                    on[w] = false;
                }
            };
            dfs(s);
            for (const auto& p : best) {
                for (std::size_t i = 1; i + 1 < p.size(); ++i) score[p[i]] += 1.0 / best.size();
            }
        }
    }
    return score;
}

std::vector<double> dense_pagerank(int n, const std::vector<Edge>& edges, double damping) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));  // m[to][from]
    std::vector<int> deg(n, 0);
    for (auto [a, b] : edges) {
        ++deg[a];
        ++deg[b];
    }
    for (auto [a, b] : edges) {
        m[b][a] += 1.0 / deg[a];
        m[a][b] += 1.0 / deg[b];
    }
    for (int j = 0; j < n; ++j) {
        if (deg[j] == 0) {
            for (int i = 0; i < n; ++i) m[i][j] = 1.0 / n;
        }
    }
    std::vector<double> x(n, 1.0 / n), y(n);
    for (int it = 0; it < 100000; ++it) {
        double change = 0.0;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += m[i][j] * x[j];
            y[i] = (1.0 - damping) / n + damping * acc;
        }
        for (int i = 0; i < n; ++i) change = std::max(change, std::abs(y[i] - x[i]));
        x = y;
        if (change < 1e-15) break;
    }
    return x;
}

BrutePath brute_shortest_path(const RoadNetwork& net, TownId src, TownId dst) {
    BrutePath best{std::numeric_limits<double>::infinity(), {}};
    std::vector<TownId> path{src};
    std::vector<bool> on(net.num_towns(), false);
    on[static_cast<std::size_t>(src)] = true;
    std::function<void(TownId, double)> dfs = [&](TownId v, double t) {
        if (v == dst) {
            const double tol = 1e-9 * std::max(1.0, t);
            if (best.path.empty() || t < best.time - tol || (std::abs(t - best.time) <= tol && path < best.path)) {
                best = {std::min(t, best.time), path};
            }
            return;
        }
        for (const Neighbor& nb : net.neighbors(v)) {
            if (on[static_cast<std::size_t>(nb.town)]) continue;
            on[static_cast<std::size_t>(nb.town)] = true;
            path.push_back(nb.town);
            dfs(nb.town, t + net.road(nb.road).travel_time);
            path.pop_back();
            on[static_cast<std::size_t>(nb.town)] = false;
        }
    };
    dfs(src, 0.0);
    return best;
}

BaselineDistribution ctmc_occupancy(const RoadNetwork& net, const MarkovParams& params, double horizon,
                                    std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto expo = [&](double mean) { return -mean * std::log1p(-u(gen)); };
    BaselineDistribution occ;
    occ.town.assign(net.num_towns(), 0.0);
    occ.road.assign(2 * net.num_roads(), 0.0);
    TownId at = 0;
    double t = 0.0;
    while (t < horizon) {
        double stay = std::min(expo(params.wait_town[static_cast<std::size_t>(at)]), horizon - t);
        occ.town[static_cast<std::size_t>(at)] += stay;
        t += stay;
        if (t >= horizon) break;
        auto nbrs = net.neighbors(at);
        const Neighbor nb = nbrs[static_cast<std::size_t>(u(gen) * nbrs.size())];
        const std::size_t state = 2 * nb.road + (net.road(nb.road).a == at ? 0 : 1);
        double travel = std::min(expo(params.wait_road[state]), horizon - t);
        occ.road[state] += travel;
        t += travel;
        at = nb.town;
    }
    for (double& v : occ.town) v /= horizon;
    for (double& v : occ.road) v /= horizon;
    return occ;
}

double l1_distance(const BaselineDistribution& a, const BaselineDistribution& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.town.size(); ++i) d += std::abs(a.town[i] - b.town[i]);
    for (std::size_t i = 0; i < a.road.size(); ++i) d += std::abs(a.road[i] - b.road[i]);
    return d;
}

std::vector<Edge> two_hub_edges() { return {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {0, 4}, {3, 5}}; }

CutVertexCase cut_vertex_case() {
    std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}, {1, 7}};
    CutVertexCase c;
    c.scenario = make_scenario(8, edges, {7}, 7200.0, 600.0, 5);
    return c;
}

}  // namespace kt_test
