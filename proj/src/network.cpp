#include "keyterrain/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include "keyterrain/errors.hpp"
#include "keyterrain/rng.hpp"

namespace keyterrain {

RoadNetwork::RoadNetwork(std::vector<Town> towns, std::vector<Road> roads)
    : towns_(std::move(towns)), roads_(std::move(roads)), adjacency_(towns_.size()) {
    for (std::size_t r = 0; r < roads_.size(); ++r) {
        const Road& road = roads_[r];
        if (!valid_town(road.a) || !valid_town(road.b) || road.a == road.b) continue;
        adjacency_[static_cast<std::size_t>(road.a)].push_back({road.b, r});
        adjacency_[static_cast<std::size_t>(road.b)].push_back({road.a, r});
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Neighbor& l, const Neighbor& r) {
            return l.town != r.town ? l.town < r.town : l.road < r.road;
        });
    }
}

std::optional<std::size_t> RoadNetwork::road_between(TownId u, TownId v) const {
    if (!valid_town(u) || !valid_town(v)) return std::nullopt;
    for (const Neighbor& nb : neighbors(u)) {
        if (nb.town == v) return nb.road;
    }
    return std::nullopt;
}

std::vector<int> RoadNetwork::components() const {
    std::vector<int> label(towns_.size(), -1);
    int next = 0;
    for (std::size_t s = 0; s < towns_.size(); ++s) {
        if (label[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        label[s] = next;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (const Neighbor& nb : adjacency_[u]) {
                auto v = static_cast<std::size_t>(nb.town);
                if (label[v] < 0) {
                    label[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    return label;
}

bool RoadNetwork::connected() const {
    auto label = components();
    return std::all_of(label.begin(), label.end(), [](int c) { return c == 0; });
}

std::string to_string(Mobility m) {
    return m == Mobility::RandomWalk ? "walk" : "waypoint";
}

Mobility parse_mobility(const std::string& s) {
    if (s == "walk") return Mobility::RandomWalk;
    if (s == "waypoint") return Mobility::RandomWaypoint;
    throw ParseError("mobility: expected \"walk\" or \"waypoint\", got \"" + s + "\"");
}

bool Scenario::is_enemy(TownId id) const {
    return std::binary_search(enemy_towns.begin(), enemy_towns.end(), id);
}

std::vector<TownId> Scenario::eligible_towns() const {
    std::vector<TownId> out;
    for (std::size_t i = 0; i < network.num_towns(); ++i) {
        auto id = static_cast<TownId>(i);
        if (!is_enemy(id)) out.push_back(id);
    }
    return out;
}

std::vector<std::string> validate(const Scenario& scenario) {
    std::vector<std::string> out;
    const RoadNetwork& net = scenario.network;
    const auto n = net.num_towns();

    for (std::size_t i = 0; i < n; ++i) {
        const Town& t = net.towns()[i];
        if (t.id != static_cast<TownId>(i)) {
            out.push_back("town ids not consecutive at index " + std::to_string(i));
        }
        if (!(t.radius > 0.0)) out.push_back("radius not positive at town " + std::to_string(i));
        if (t.deployment && !(*t.deployment > 0.0)) {
            out.push_back("deployment time not positive at town " + std::to_string(i));
        }
    }

    std::set<std::pair<TownId, TownId>> seen;
    for (std::size_t r = 0; r < net.num_roads(); ++r) {
        const Road& road = net.roads()[r];
        const std::string where = " at road " + std::to_string(r);
        if (!net.valid_town(road.a) || !net.valid_town(road.b)) {
            out.push_back("road endpoint out of range" + where);
            continue;
        }
        if (road.a == road.b) {
            out.push_back("road endpoints equal" + where);
            continue;
        }
        auto key = std::minmax(road.a, road.b);
        if (!seen.insert({key.first, key.second}).second) {
            out.push_back("duplicate road {" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + "}");
        }
        if (!(road.length >= 0.0)) out.push_back("road length negative" + where);
        if (!(road.travel_time > 0.0)) out.push_back("travel time not positive" + where);
    }

    if (n == 0) {
        out.push_back("no towns");
    } else if (!net.connected()) {
        out.push_back("graph not connected");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (net.degree(static_cast<TownId>(i)) == 0) {
            out.push_back("degree 0 at town " + std::to_string(i));
        }
    }

    std::set<TownId> enemies;
    for (TownId e : scenario.enemy_towns) {
        if (!net.valid_town(e)) {
            out.push_back("enemy town out of range: " + std::to_string(e));
        } else if (!enemies.insert(e).second) {
            out.push_back("duplicate enemy town: " + std::to_string(e));
        }
    }
    if (!std::is_sorted(scenario.enemy_towns.begin(), scenario.enemy_towns.end())) {
        out.push_back("enemy towns not sorted");
    }

    if (scenario.budget < 0) {
        out.push_back("budget negative");
    } else if (static_cast<std::size_t>(scenario.budget) + enemies.size() > n) {
        out.push_back("budget exceeds n − |V_I|");
    }
    if (scenario.num_units < 1) out.push_back("num_units below 1");
    if (!(scenario.deployment_mean > 0.0)) out.push_back("deployment_mean not positive");
    if (!(scenario.unit_speed > 0.0)) out.push_back("unit_speed not positive");
    return out;
}

double geometric_radius_for_probability(double p) {
    // P(|X - Y| <= t) for X, Y uniform in the unit square, valid for t <= 1.
    auto cdf = [](double t) {
        return std::numbers::pi * t * t - 8.0 * t * t * t / 3.0 + 0.5 * t * t * t * t;
    };
    if (p <= 0.0) return 0.0;
    if (p >= cdf(1.0)) return std::numbers::sqrt2;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Scenario generate_scenario(const GenerateParams& params) {
    if (params.num_towns < 2) throw ValidationError("generate_scenario: need at least 2 towns");
    if (params.num_enemy < 0 || params.num_enemy > params.num_towns) {
        throw ValidationError("generate_scenario: num_enemy out of range");
    }
    const auto n = static_cast<std::size_t>(params.num_towns);

    Rng place(derive_seed(params.seed, 0));
    std::vector<Town> towns(n);
    for (std::size_t i = 0; i < n; ++i) {
        towns[i].id = static_cast<TownId>(i);
        towns[i].x = place.uniform() * params.area_side;
        towns[i].y = place.uniform() * params.area_side;
        towns[i].radius = params.town_radius;
    }

    auto dist = [&](std::size_t i, std::size_t j) {
        return std::hypot(towns[i].x - towns[j].x, towns[i].y - towns[j].y);
    };
    auto make_road = [&](std::size_t i, std::size_t j) {
        Road r;
        r.a = static_cast<TownId>(i);
        r.b = static_cast<TownId>(j);
        r.length = dist(i, j);
        r.travel_time = r.length / params.unit_speed;
        return r;
    };

    const double p = std::min(1.0, params.target_mean_degree / static_cast<double>(n - 1));
    const double radius = geometric_radius_for_probability(p) * params.area_side;

    std::vector<Road> roads;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dist(i, j) <= radius) roads.push_back(make_road(i, j));
        }
    }

    // Join components by the shortest inter-component edge until connected.
    for (;;) {
        RoadNetwork probe(towns, roads);
        auto label = probe.components();
        if (std::all_of(label.begin(), label.end(), [](int c) { return c == 0; })) break;
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (label[i] == label[j]) continue;
                double d = dist(i, j);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        roads.push_back(make_road(bi, bj));
    }
    std::sort(roads.begin(), roads.end(), [](const Road& l, const Road& r) {
        return l.a != r.a ? l.a < r.a : l.b < r.b;
    });

    Scenario s;
    s.network = RoadNetwork(std::move(towns), std::move(roads));
    std::vector<TownId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<TownId>(i);
    Rng pick(derive_seed(params.seed, 1));
    s.enemy_towns = pick.sample<TownId>(ids, static_cast<std::size_t>(params.num_enemy));
    std::sort(s.enemy_towns.begin(), s.enemy_towns.end());
    s.budget = params.budget;
    s.num_units = params.num_units;
    s.deployment_mean = params.deployment_mean;
    s.mobility = params.mobility;
    s.unit_speed = params.unit_speed;
    s.seed = params.seed;
    return s;
}

namespace {

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::vector<TownId> shortest_path(const RoadNetwork& network, TownId src, TownId dst) {
    if (!network.valid_town(src) || !network.valid_town(dst)) {
        throw ValidationError("shortest_path: invalid town id");
    }
    // Distances to dst, then walk forward from src taking the lowest-id
    // neighbor that stays on some shortest path.
    const auto n = network.num_towns();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, TownId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<std::size_t>(dst)] = 0.0;
    pq.push({0.0, dst});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        for (const Neighbor& nb : network.neighbors(u)) {
            double nd = d + network.road(nb.road).travel_time;
            auto v = static_cast<std::size_t>(nb.town);
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.push({nd, nb.town});
            }
        }
    }
    if (!std::isfinite(dist[static_cast<std::size_t>(src)])) {
        throw SolverError("shortest_path: town " + std::to_string(dst) +
                          " unreachable from " + std::to_string(src) + " (network disconnected)");
    }

    std::vector<TownId> path{src};
    TownId u = src;
    while (u != dst) {
        const double du = dist[static_cast<std::size_t>(u)];
        TownId next = -1;
        for (const Neighbor& nb : network.neighbors(u)) {
            double via = network.road(nb.road).travel_time + dist[static_cast<std::size_t>(nb.town)];
            if (nearly_equal(via, du) && dist[static_cast<std::size_t>(nb.town)] < du) {
                next = nb.town;
                break;
            }
        }
        if (next < 0) throw SolverError("shortest_path: inconsistent distance labels");
        path.push_back(next);
        u = next;
    }
    return path;
}

Seconds path_travel_time(const RoadNetwork& network, std::span<const TownId> path) {
    Seconds total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        auto r = network.road_between(path[i - 1], path[i]);
        if (!r) throw ValidationError("path_travel_time: towns not adjacent");
        total += network.road(*r).travel_time;
    }
    return total;
}

}  // namespace keyterrain
