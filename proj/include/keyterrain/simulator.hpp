#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "keyterrain/network.hpp"
#include "keyterrain/rng.hpp"

namespace keyterrain {

struct Deployed {
    TownId town;
    Seconds remaining;
};

struct OnRoad {
    std::size_t road;
    TownId from;
    TownId to;
    Meters progress;  // distance travelled from `from`
    std::vector<TownId> itinerary;  // front() == to

    bool operator==(const OnRoad&) const = default;
};

struct UnitState {
    int id = 0;
    std::variant<Deployed, OnRoad> location;
    bool infected = false;
};

inline bool operator==(const Deployed& a, const Deployed& b) {
    return a.town == b.town && a.remaining == b.remaining;
}
inline bool operator==(const UnitState& a, const UnitState& b) {
    return a.id == b.id && a.infected == b.infected && a.location == b.location;
}

struct SimConfig {
    Seconds tick = 60.0;
    int steps = 10'000;
    Meters contact_radius = 100.0;
    int eval_trials = 10;
    int final_trials = 20;
    /// Exponential deployment times instead of fixed ones (matches the Markov model).
    bool exponential_deployments = false;
    /// Worker threads for multi-trial evaluation; results do not depend on it.
    unsigned threads = 1;
};

/// Validates a SimConfig; throws ValidationError.
void check_config(const SimConfig& config);

struct TrialOutcome {
    int infected_count = 0;
    int num_units = 0;
    std::vector<UnitState> final_states;
};

/// Optional instrumentation for a single trial.
struct TrialHooks {
    /// Called after initialization (tick 0) and after every tick.
    std::function<void(int tick, std::span<const UnitState>)> on_tick;
    /// Accumulated deployed time per town, if non-null (resized as needed).
    std::vector<Seconds>* town_time = nullptr;
    /// Accumulated travel time per directed road state (2r: a->b, 2r+1: b->a).
    std::vector<Seconds>* road_time = nullptr;
    /// Start every unit infected instead of clean.
    bool start_infected = false;
};

/// Precomputed shortest paths between all town pairs.
class RouteTable {
public:
    explicit RouteTable(const RoadNetwork& network);
    std::span<const TownId> path(TownId src, TownId dst) const;

private:
    std::size_t n_ = 0;
    std::vector<std::vector<TownId>> paths_;
};

/// Itinerary for a unit leaving `current`: the towns still to be reached, in order.
std::vector<TownId> next_destination(const Scenario& scenario, TownId current, Mobility mobility,
                                     Rng& rng);
std::vector<TownId> next_destination(const Scenario& scenario, const RouteTable& routes,
                                     TownId current, Mobility mobility, Rng& rng);

TrialOutcome run_trial(const Scenario& scenario, std::span<const TownId> remediation,
                       const SimConfig& config, std::uint64_t trial_seed,
                       const TrialHooks& hooks = {});

struct Evaluation {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    std::vector<double> fractions;  // per trial, in trial order
};

/// Runs `trials` trials with sub-seeds derive_seed(seed, t).
Evaluation evaluate_placement(const Scenario& scenario, std::span<const TownId> remediation,
                              const SimConfig& config, std::uint64_t seed, int trials);

/// Per-tick CSV trace of one trial: tick,unit,kind,location,infected.
void write_trace_csv(std::ostream& out, const Scenario& scenario,
                     std::span<const TownId> remediation, const SimConfig& config,
                     std::uint64_t trial_seed);

}  // namespace keyterrain
