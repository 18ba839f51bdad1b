#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "keyterrain/network.hpp"
#include "keyterrain/simulator.hpp"

namespace keyterrain {

/// f(V_R): predicted infected fraction for a sorted remediation set.
using ObjectiveFn = std::function<double(std::span<const TownId>)>;

enum class Evaluator { DynSys, Abm };

/// Linearized dual-equilibrium infected fraction. The baseline chain is solved once.
ObjectiveFn dynsys_objective(const Scenario& scenario);

/// Mean infected fraction over `trials` simulation trials. Every call reuses
/// the same seed, so candidate sets are compared on common random numbers.
ObjectiveFn abm_objective(const Scenario& scenario, const SimConfig& config, std::uint64_t seed,
                          int trials);

/// Samples per selected town used by the sampling methods.
inline constexpr int kDynSysSamples = 100;
inline constexpr int kAbmSamples = 10;

inline constexpr std::uint64_t kExhaustiveCap = 100'000;

struct PlacementResult {
    std::vector<TownId> remediation;  // sorted
    double predicted_value = 0.0;
    std::string method;
    long evaluations_used = 0;
    Seconds elapsed = 0.0;
};

/// Number of k-subsets of an n-set, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

PlacementResult exhaustive(const ObjectiveFn& f, std::span<const TownId> eligible, int k,
                           std::uint64_t cap = kExhaustiveCap);

PlacementResult random_sampling(const ObjectiveFn& f, std::span<const TownId> eligible, int k,
                                int samples, std::uint64_t seed);

/// Internal state of a monte_carlo run, for auditing.
struct McTrace {
    std::vector<TownId> commit_order;
    std::vector<TownId> best_set;  // V_R^*
    double best_value = 0.0;       // f^*
};

/// Greedy marginal-average Monte Carlo search. Returns the committed set,
/// scored by one final evaluation.
PlacementResult monte_carlo(const ObjectiveFn& f, std::span<const TownId> eligible, int k,
                            int samples_per_round, std::uint64_t seed, McTrace* trace = nullptr);

PlacementResult uniform_baseline(std::span<const TownId> eligible, int k, std::uint64_t seed);

}  // namespace keyterrain
