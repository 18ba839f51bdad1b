#include "keyterrain/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "keyterrain/errors.hpp"

namespace keyterrain {

void check_config(const SimConfig& config) {
    if (!(config.tick > 0.0)) throw ValidationError("tick must be positive");
    if (config.steps < 1) throw ValidationError("steps must be at least 1");
    if (!(config.contact_radius >= 0.0)) throw ValidationError("contact_radius must be non-negative");
}

RouteTable::RouteTable(const RoadNetwork& network) : n_(network.num_towns()), paths_(n_ * n_) {
    for (std::size_t s = 0; s < n_; ++s) {
        for (std::size_t d = 0; d < n_; ++d) {
            paths_[s * n_ + d] = shortest_path(network, static_cast<TownId>(s), static_cast<TownId>(d));
        }
    }
}

std::span<const TownId> RouteTable::path(TownId src, TownId dst) const {
    return paths_.at(static_cast<std::size_t>(src) * n_ + static_cast<std::size_t>(dst));
}

namespace {

template <typename PathFn>
std::vector<TownId> pick_destination(const Scenario& scenario, TownId current, Mobility mobility,
                                     Rng& rng, PathFn&& path_to) {
    const RoadNetwork& net = scenario.network;
    if (mobility == Mobility::RandomWalk) {
        auto nbrs = net.neighbors(current);
        if (nbrs.empty()) throw ValidationError("town " + std::to_string(current) + " has no roads");
        return {nbrs[rng.index(nbrs.size())].town};
    }
    const auto n = net.num_towns();
    if (n < 2) throw ValidationError("waypoint mobility needs at least two towns");
    auto pick = static_cast<TownId>(rng.index(n - 1));
    if (pick >= current) ++pick;
    auto path = path_to(pick);
    return std::vector<TownId>(path.begin() + 1, path.end());
}

}  // namespace

std::vector<TownId> next_destination(const Scenario& scenario, TownId current, Mobility mobility,
                                     Rng& rng) {
    return pick_destination(scenario, current, mobility, rng, [&](TownId dst) {
        return shortest_path(scenario.network, current, dst);
    });
}

std::vector<TownId> next_destination(const Scenario& scenario, const RouteTable& routes,
                                     TownId current, Mobility mobility, Rng& rng) {
    return pick_destination(scenario, current, mobility, rng,
                            [&](TownId dst) { return routes.path(current, dst); });
}

namespace {

/// Straight-line movement on one road during part of a tick, in the road's
/// own coordinate (distance from endpoint a).
struct Segment {
    int unit;
    std::size_t road;
    bool forward;  // a -> b
    double t0, t1;
    double x0, x1;
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

bool segments_meet(const Segment& a, const Segment& b, double radius) {
    const double t0 = std::max(a.t0, b.t0);
    const double t1 = std::min(a.t1, b.t1);
    if (t0 > t1) return false;
    auto at = [](const Segment& s, double t) {
        if (s.t1 <= s.t0) return s.x0;
        return s.x0 + (s.x1 - s.x0) * (t - s.t0) / (s.t1 - s.t0);
    };
    const double gap0 = at(a, t0) - at(b, t0);
    const double gap1 = at(a, t1) - at(b, t1);
    // Linear relative motion: the closest approach is at an end of the window
    // unless the units cross inside it.
    return std::abs(gap0) <= radius || std::abs(gap1) <= radius || (gap0 < 0.0) != (gap1 < 0.0);
}

class Simulation {
public:
    Simulation(const Scenario& scenario, std::span<const TownId> remediation, const SimConfig& config,
               std::uint64_t seed, const TrialHooks& hooks, const RouteTable* routes)
        : scenario_(scenario),
          net_(scenario.network),
          config_(config),
          hooks_(hooks),
          routes_(routes),
          rng_(seed),
          enemy_(net_.num_towns(), false),
          remedy_(net_.num_towns(), false),
          occupants_(net_.num_towns()) {
        for (TownId v : scenario.enemy_towns) enemy_[static_cast<std::size_t>(v)] = true;
        for (TownId v : remediation) {
            if (!net_.valid_town(v)) throw ValidationError("remediation town out of range");
            if (enemy_[static_cast<std::size_t>(v)]) {
                throw ValidationError("town " + std::to_string(v) + " is both enemy and remediation");
            }
            remedy_[static_cast<std::size_t>(v)] = true;
        }
        for (const Road& r : net_.roads()) {
            if (!(r.length > 0.0) || !(r.travel_time > 0.0)) {
                throw ValidationError("simulation needs positive road lengths and travel times");
            }
        }
        if (hooks_.town_time) hooks_.town_time->resize(net_.num_towns(), 0.0);
        if (hooks_.road_time) hooks_.road_time->resize(2 * net_.num_roads(), 0.0);

        const auto n = net_.num_towns();
        for (int u = 0; u < scenario.num_units; ++u) {
            UnitState s;
            s.id = u;
            const auto town = static_cast<TownId>(rng_.index(n));
            s.location = Deployed{town, deployment(town)};
            s.infected = hooks_.start_infected;
            apply_town_effects(s, town);
            units_.push_back(std::move(s));
        }
    }

    void run() {
        if (hooks_.on_tick) hooks_.on_tick(0, units_);
        for (int tick = 1; tick <= config_.steps; ++tick) {
            step();
            if (hooks_.on_tick) hooks_.on_tick(tick, units_);
        }
    }

    TrialOutcome outcome() const {
        TrialOutcome out;
        out.num_units = static_cast<int>(units_.size());
        out.infected_count = static_cast<int>(
            std::count_if(units_.begin(), units_.end(), [](const UnitState& u) { return u.infected; }));
        out.final_states = units_;
        return out;
    }

private:
    Seconds deployment(TownId town) {
        const Seconds mean = scenario_.deployment_time(town);
        return config_.exponential_deployments ? rng_.exponential(mean) : mean;
    }

    void apply_town_effects(UnitState& unit, TownId town) {
        if (remedy_[static_cast<std::size_t>(town)]) unit.infected = false;
        if (enemy_[static_cast<std::size_t>(town)]) unit.infected = true;
    }

    void occupy(int unit, TownId town) {
        auto& list = occupants_[static_cast<std::size_t>(town)];
        if (list.empty()) touched_.push_back(town);
        if (list.empty() || list.back() != unit) list.push_back(unit);
    }

    OnRoad enter_road(TownId from, std::vector<TownId> itinerary) {
        const TownId to = itinerary.front();
        auto road = net_.road_between(from, to);
        if (!road) throw SolverError("itinerary uses a missing road");
        return OnRoad{*road, from, to, 0.0, std::move(itinerary)};
    }

    std::size_t directed_state(const OnRoad& r) const {
        return 2 * r.road + (net_.road(r.road).a == r.from ? 0U : 1U);
    }

    void move(UnitState& unit) {
        double t = 0.0;
        const double tick = config_.tick;
        for (;;) {
            if (auto* dep = std::get_if<Deployed>(&unit.location)) {
                occupy(unit.id, dep->town);
                const double left = tick - t;
                if (dep->remaining > left) {
                    dep->remaining -= left;
                    if (hooks_.town_time) (*hooks_.town_time)[static_cast<std::size_t>(dep->town)] += left;
                    return;
                }
                t += dep->remaining;
                if (hooks_.town_time) {
                    (*hooks_.town_time)[static_cast<std::size_t>(dep->town)] += dep->remaining;
                }
                const TownId from = dep->town;
                auto itinerary = routes_ ? next_destination(scenario_, *routes_, from, scenario_.mobility, rng_)
                                         : next_destination(scenario_, from, scenario_.mobility, rng_);
                unit.location = enter_road(from, std::move(itinerary));
                continue;
            }

            auto& road = std::get<OnRoad>(unit.location);
            const Road& geom = net_.road(road.road);
            const double speed = geom.length / geom.travel_time;
            const bool forward = geom.a == road.from;
            auto coord = [&](double progress) { return forward ? progress : geom.length - progress; };
            const double left = tick - t;
            const double needed = (geom.length - road.progress) / speed;
            if (needed > left) {
                const double p1 = road.progress + speed * left;
                segments_.push_back({unit.id, road.road, forward, t, tick, coord(road.progress), coord(p1)});
                if (hooks_.road_time) (*hooks_.road_time)[directed_state(road)] += left;
                road.progress = p1;
                return;
            }
            segments_.push_back(
                {unit.id, road.road, forward, t, t + needed, coord(road.progress), coord(geom.length)});
            if (hooks_.road_time) (*hooks_.road_time)[directed_state(road)] += needed;
            t += needed;

            const TownId town = road.to;
            occupy(unit.id, town);
            apply_town_effects(unit, town);
            std::vector<TownId> rest(road.itinerary.begin() + 1, road.itinerary.end());
            if (rest.empty()) {
                unit.location = Deployed{town, deployment(town)};
            } else {
                unit.location = enter_road(town, std::move(rest));
            }
        }
    }

    void spread_contacts() {
        UnionFind groups(units_.size());
        for (TownId town : touched_) {
            auto& list = occupants_[static_cast<std::size_t>(town)];
            for (std::size_t i = 1; i < list.size(); ++i) {
                groups.unite(static_cast<std::size_t>(list[0]), static_cast<std::size_t>(list[i]));
            }
            list.clear();
        }
        touched_.clear();
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            for (std::size_t j = i + 1; j < segments_.size(); ++j) {
                const Segment& a = segments_[i];
                const Segment& b = segments_[j];
                if (a.road != b.road || a.forward == b.forward || a.unit == b.unit) continue;
                if (segments_meet(a, b, config_.contact_radius)) {
                    groups.unite(static_cast<std::size_t>(a.unit), static_cast<std::size_t>(b.unit));
                }
            }
        }
        segments_.clear();
        // Whole contact groups share infection: the transitive closure within the tick.
        std::vector<bool> group_infected(units_.size(), false);
        for (const UnitState& u : units_) {
            if (u.infected) group_infected[groups.find(static_cast<std::size_t>(u.id))] = true;
        }
        for (UnitState& u : units_) {
            if (group_infected[groups.find(static_cast<std::size_t>(u.id))]) u.infected = true;
        }
    }

    void step() {
        for (UnitState& u : units_) move(u);
        spread_contacts();
    }

    const Scenario& scenario_;
    const RoadNetwork& net_;
    SimConfig config_;
    TrialHooks hooks_;
    const RouteTable* routes_;
    Rng rng_;
    std::vector<bool> enemy_;
    std::vector<bool> remedy_;
    std::vector<UnitState> units_;
    std::vector<std::vector<int>> occupants_;
    std::vector<TownId> touched_;
    std::vector<Segment> segments_;
};

TrialOutcome run_trial_with(const Scenario& scenario, std::span<const TownId> remediation,
                            const SimConfig& config, std::uint64_t trial_seed, const TrialHooks& hooks,
                            const RouteTable* routes) {
    check_config(config);
    if (scenario.num_units < 1) throw ValidationError("num_units must be at least 1");
    Simulation sim(scenario, remediation, config, trial_seed, hooks, routes);
    sim.run();
    return sim.outcome();
}

}  // namespace

TrialOutcome run_trial(const Scenario& scenario, std::span<const TownId> remediation,
                       const SimConfig& config, std::uint64_t trial_seed, const TrialHooks& hooks) {
    std::optional<RouteTable> routes;
    if (scenario.mobility == Mobility::RandomWaypoint) routes.emplace(scenario.network);
    return run_trial_with(scenario, remediation, config, trial_seed, hooks, routes ? &*routes : nullptr);
}

Evaluation evaluate_placement(const Scenario& scenario, std::span<const TownId> remediation,
                              const SimConfig& config, std::uint64_t seed, int trials) {
    if (trials < 1) throw ValidationError("evaluate_placement: trials must be at least 1");
    check_config(config);
    std::optional<RouteTable> routes;
    if (scenario.mobility == Mobility::RandomWaypoint) routes.emplace(scenario.network);
    const RouteTable* table = routes ? &*routes : nullptr;

    Evaluation ev;
    ev.fractions.assign(static_cast<std::size_t>(trials), 0.0);
    auto run_one = [&](int t) {
        auto out = run_trial_with(scenario, remediation, config, derive_seed(seed, static_cast<std::uint64_t>(t)),
                                  {}, table);
        ev.fractions[static_cast<std::size_t>(t)] =
            static_cast<double>(out.infected_count) / static_cast<double>(out.num_units);
    };

    const unsigned workers = std::min<unsigned>(std::max(1U, config.threads), static_cast<unsigned>(trials));
    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) run_one(t);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int t = static_cast<int>(w); t < trials; t += static_cast<int>(workers)) run_one(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    // Reduce in trial order so the result is independent of scheduling.
    double sum = 0.0;
    for (double f : ev.fractions) sum += f;
    ev.mean = sum / trials;
    if (trials > 1) {
        double sq = 0.0;
        for (double f : ev.fractions) sq += (f - ev.mean) * (f - ev.mean);
        ev.stddev = std::sqrt(sq / (trials - 1));
    }
    return ev;
}

void write_trace_csv(std::ostream& out, const Scenario& scenario,
                     std::span<const TownId> remediation, const SimConfig& config,
                     std::uint64_t trial_seed) {
    out << "tick,unit,kind,location,infected\n";
    TrialHooks hooks;
    hooks.on_tick = [&](int tick, std::span<const UnitState> units) {
        for (const UnitState& u : units) {
            out << tick << ',' << u.id << ',';
            if (const auto* d = std::get_if<Deployed>(&u.location)) {
                out << "town," << d->town;
            } else {
                const auto& r = std::get<OnRoad>(u.location);
                out << "road," << r.from << '>' << r.to;
            }
            out << ',' << (u.infected ? 1 : 0) << '\n';
        }
    };
    run_trial(scenario, remediation, config, trial_seed, hooks);
}

}  // namespace keyterrain
