#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "keyterrain/linalg.hpp"
#include "keyterrain/network.hpp"

namespace keyterrain {

/// Directed road state. Road r of the network yields states 2r (a -> b) and
/// 2r + 1 (b -> a).
struct DirectedRoad {
    TownId from;
    TownId to;
    std::size_t road;
};

std::vector<DirectedRoad> directed_roads(const RoadNetwork& network);

inline std::size_t reverse_state(std::size_t k) { return k ^ 1U; }

struct MarkovParams {
    std::vector<Seconds> wait_town;  // mean deployment time per town
    std::vector<Seconds> wait_road;  // mean travel time per directed road state
    int num_units = 1;
};

/// Waits taken from the scenario: per-town deployment means and road travel times.
MarkovParams markov_params(const Scenario& scenario);

struct BaselineDistribution {
    std::vector<double> town;
    std::vector<double> road;  // per directed road state
};

struct DualDistribution {
    std::vector<double> town_clean;
    std::vector<double> town_infected;
    std::vector<double> road_clean;
    std::vector<double> road_infected;
};

/// Square system as solved, kept for debugging dumps.
struct EquilibriumSystem {
    DenseMatrix matrix;
    std::vector<double> rhs;
    std::vector<double> solution;
    std::size_t dropped_row = 0;
};

inline constexpr double kResidualTolerance = 1e-9;
inline constexpr double kNegativeSlack = 1e-9;

/// Occupancy equilibrium of a single unit's town/road Markov chain. The
/// flow equation of town 0 is replaced by normalization; its residual is
/// checked afterwards along with every other equation.
BaselineDistribution baseline_equilibrium(const RoadNetwork& network, const MarkovParams& params,
                                          EquilibriumSystem* capture = nullptr);

/// Largest absolute residual over all flow equations (each scaled by its
/// state's wait) and the normalization.
double baseline_residual(const RoadNetwork& network, const MarkovParams& params,
                         const BaselineDistribution& dist);

/// States that can ever hold infected mass: reachable by infected movement or
/// contact from an enemy town without entering a remediation town.
struct InfectableStates {
    std::vector<bool> town;
    std::vector<bool> road;
};

InfectableStates infectable_states(const RoadNetwork& network, std::span<const TownId> enemy,
                                   std::span<const TownId> remediation);

/// Linearized dual (clean/infected) equilibrium: infected-occupancy terms in
/// the infection rates are replaced by baseline occupancies, which bounds the
/// infected mass from above.
DualDistribution dual_equilibrium_linearized(const RoadNetwork& network, const MarkovParams& params,
                                             std::span<const TownId> enemy,
                                             std::span<const TownId> remediation,
                                             EquilibriumSystem* capture = nullptr);
DualDistribution dual_equilibrium_linearized(const RoadNetwork& network, const MarkovParams& params,
                                             const BaselineDistribution& baseline,
                                             std::span<const TownId> enemy,
                                             std::span<const TownId> remediation,
                                             EquilibriumSystem* capture = nullptr);

struct FixedPointOptions {
    double mixing = 0.5;
    double tolerance = 1e-8;
    int max_iterations = 10'000;
};

struct FixedPointResult {
    DualDistribution distribution;
    bool converged = false;
    int iterations = 0;
    double last_change = 0.0;
};

/// Exact (nonlinear) dual equilibrium by damped Picard iteration on the
/// frozen-coefficient linear system. Used as a test oracle; check `converged`.
FixedPointResult nonlinear_fixed_point(const RoadNetwork& network, const MarkovParams& params,
                                       std::span<const TownId> enemy,
                                       std::span<const TownId> remediation,
                                       const FixedPointOptions& options = {});

/// Largest residual of the nonlinear equilibrium equations evaluated at
/// `dist`, with the infection terms taken from `dist` itself.
double dual_residual(const RoadNetwork& network, const MarkovParams& params,
                     std::span<const TownId> enemy, std::span<const TownId> remediation,
                     const DualDistribution& dist);

/// Total infected mass, clamped to [0, 1].
double infected_fraction(const DualDistribution& dist);

/// CSV dump: one line per equation (coefficients then rhs), then the solution.
void write_system_csv(std::ostream& out, const EquilibriumSystem& system);

}  // namespace keyterrain
