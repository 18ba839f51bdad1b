#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace keyterrain {

using TownId = int;
using Seconds = double;
using Meters = double;

struct Town {
    TownId id = 0;
    Meters x = 0.0;
    Meters y = 0.0;
    Meters radius = 0.0;
    /// Per-town mean deployment time; the scenario default applies when unset.
    std::optional<Seconds> deployment;

    bool operator==(const Town&) const = default;
};

struct Road {
    TownId a = 0;
    TownId b = 0;
    Meters length = 0.0;
    Seconds travel_time = 0.0;
    /// Whether travel_time was given explicitly rather than derived from length.
    bool travel_time_override = false;

    bool operator==(const Road&) const = default;
};

/// One endpoint of an incident road, as seen from a town.
struct Neighbor {
    TownId town;
    std::size_t road;
};

/// Undirected road graph. Adjacency is built once at construction; roads with
/// out-of-range or equal endpoints are kept in `roads()` but left out of the
/// adjacency so that validate() can still report them.
class RoadNetwork {
public:
    RoadNetwork() = default;
    RoadNetwork(std::vector<Town> towns, std::vector<Road> roads);

    std::size_t num_towns() const { return towns_.size(); }
    std::size_t num_roads() const { return roads_.size(); }
    std::span<const Town> towns() const { return towns_; }
    std::span<const Road> roads() const { return roads_; }
    const Town& town(TownId id) const { return towns_.at(static_cast<std::size_t>(id)); }
    const Road& road(std::size_t idx) const { return roads_.at(idx); }

    /// Neighbors sorted by town id.
    std::span<const Neighbor> neighbors(TownId id) const {
        return adjacency_.at(static_cast<std::size_t>(id));
    }
    std::size_t degree(TownId id) const { return neighbors(id).size(); }
    std::optional<std::size_t> road_between(TownId u, TownId v) const;

    bool valid_town(TownId id) const {
        return id >= 0 && static_cast<std::size_t>(id) < towns_.size();
    }

    /// Connected-component label per town, components numbered by lowest member id.
    std::vector<int> components() const;
    bool connected() const;

    bool operator==(const RoadNetwork& other) const {
        return towns_ == other.towns_ && roads_ == other.roads_;
    }

private:
    std::vector<Town> towns_;
    std::vector<Road> roads_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

enum class Mobility { RandomWalk, RandomWaypoint };

std::string to_string(Mobility m);
Mobility parse_mobility(const std::string& s);

struct Scenario {
    RoadNetwork network;
    std::vector<TownId> enemy_towns;  // V_I, sorted ascending
    int budget = 0;                   // k
    int num_units = 1;                // N
    Seconds deployment_mean = 7200.0;
    Mobility mobility = Mobility::RandomWalk;
    double unit_speed = 10.0;  // m/s
    std::uint64_t seed = 0;

    Seconds deployment_time(TownId id) const {
        return network.town(id).deployment.value_or(deployment_mean);
    }
    bool is_enemy(TownId id) const;
    /// V(G) \ V_I in ascending order.
    std::vector<TownId> eligible_towns() const;

    bool operator==(const Scenario&) const = default;
};

/// Every invariant violation, in a fixed order. Empty means valid.
std::vector<std::string> validate(const Scenario& scenario);

struct GenerateParams {
    int num_towns = 35;
    double target_mean_degree = 4.0;
    Meters area_side = 50'000.0;
    Meters town_radius = 500.0;
    double unit_speed = 10.0;
    Seconds deployment_mean = 7200.0;
    int num_units = 5;
    int num_enemy = 0;
    int budget = 0;
    Mobility mobility = Mobility::RandomWalk;
    std::uint64_t seed = 0;
};

/// Random geometric road network with greedy connectivity repair.
Scenario generate_scenario(const GenerateParams& params);

/// Connection radius r (in units of the square side) at which two uniform
/// points in the unit square lie within distance r with probability `p`.
double geometric_radius_for_probability(double p);

/// Minimum-travel-time path from src to dst, inclusive. Among equal-time paths
/// the lexicographically smallest town sequence wins.
std::vector<TownId> shortest_path(const RoadNetwork& network, TownId src, TownId dst);

/// Total travel time along consecutive towns of `path`.
Seconds path_travel_time(const RoadNetwork& network, std::span<const TownId> path);

Scenario load_scenario(const std::string& text);
std::string save_scenario(const Scenario& scenario);

}  // namespace keyterrain
