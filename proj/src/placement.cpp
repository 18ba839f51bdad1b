#include "keyterrain/placement.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <memory>

#include "keyterrain/centrality.hpp"
#include "keyterrain/equilibrium.hpp"
#include "keyterrain/errors.hpp"
#include "keyterrain/rng.hpp"

namespace keyterrain {

ObjectiveFn dynsys_objective(const Scenario& scenario) {
    auto params = std::make_shared<MarkovParams>(markov_params(scenario));
    auto baseline = std::make_shared<BaselineDistribution>(baseline_equilibrium(scenario.network, *params));
    return [&scenario, params, baseline](std::span<const TownId> vr) {
        auto dist = dual_equilibrium_linearized(scenario.network, *params, *baseline,
                                                scenario.enemy_towns, vr);
        return infected_fraction(dist);
    };
}

ObjectiveFn abm_objective(const Scenario& scenario, const SimConfig& config, std::uint64_t seed,
                          int trials) {
    if (trials < 1) throw ValidationError("eval trials must be at least 1");
    check_config(config);
    return [&scenario, config, seed, trials](std::span<const TownId> vr) {
        return evaluate_placement(scenario, vr, config, seed, trials).mean;
    };
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(c);
}

namespace {

using Clock = std::chrono::steady_clock;

void check_k(std::span<const TownId> eligible, int k) {
    if (k < 0) throw InfeasibleError("k must be non-negative");
    if (static_cast<std::size_t>(k) > eligible.size()) {
        throw InfeasibleError("k = " + std::to_string(k) + " exceeds " + std::to_string(eligible.size()) +
                              " eligible towns");
    }
}

std::vector<TownId> sorted_subset(std::span<const TownId> eligible, int k, Rng& rng) {
    auto picked = rng.sample(eligible, static_cast<std::size_t>(k));
    std::sort(picked.begin(), picked.end());
    return picked;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

PlacementResult exhaustive(const ObjectiveFn& f, std::span<const TownId> eligible, int k,
                           std::uint64_t cap) {
    const auto start = Clock::now();
    check_k(eligible, k);
    const auto total = binomial(eligible.size(), static_cast<std::uint64_t>(k));
    if (total > cap) {
        throw InfeasibleError("exhaustive search over " + std::to_string(total) +
                              " subsets exceeds cap " + std::to_string(cap));
    }
    std::vector<TownId> pool(eligible.begin(), eligible.end());
    std::sort(pool.begin(), pool.end());

    PlacementResult best;
    best.method = "exhaustive";
    best.predicted_value = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<TownId> set(idx.size());
    for (;;) {
        for (std::size_t i = 0; i < idx.size(); ++i) set[i] = pool[idx[i]];
        const double v = f(set);
        ++best.evaluations_used;
        // Lexicographic enumeration plus strict improvement keeps the smallest tuple on ties.
        if (v < best.predicted_value) {
            best.predicted_value = v;
            best.remediation = set;
        }
        std::size_t i = idx.size();
        while (i > 0 && idx[i - 1] == pool.size() - idx.size() + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < idx.size(); ++j) idx[j] = idx[j - 1] + 1;
    }
    best.elapsed = seconds_since(start);
    return best;
}

PlacementResult random_sampling(const ObjectiveFn& f, std::span<const TownId> eligible, int k,
                                int samples, std::uint64_t seed) {
    const auto start = Clock::now();
    check_k(eligible, k);
    if (samples < 1) throw ValidationError("samples must be at least 1");
    Rng rng(seed);
    PlacementResult best;
    best.method = "random-sampling";
    best.predicted_value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
        auto set = sorted_subset(eligible, k, rng);
        const double v = f(set);
        ++best.evaluations_used;
        if (v < best.predicted_value) {
            best.predicted_value = v;
            best.remediation = std::move(set);
        }
    }
    best.elapsed = seconds_since(start);
    return best;
}

PlacementResult monte_carlo(const ObjectiveFn& f, std::span<const TownId> eligible, int k,
                            int samples_per_round, std::uint64_t seed, McTrace* trace) {
    const auto start = Clock::now();
    check_k(eligible, k);
    if (samples_per_round < 1) throw ValidationError("samples per round must be at least 1");
    Rng rng(seed);
    PlacementResult result;
    result.method = "monte-carlo";

    std::vector<TownId> committed;
    std::vector<TownId> best_set;
    double best_value = std::numeric_limits<double>::infinity();

    for (int i = 1; i <= k; ++i) {
        std::vector<TownId> open;
        for (TownId v : eligible) {
            if (std::find(committed.begin(), committed.end(), v) == committed.end()) open.push_back(v);
        }
        std::map<TownId, double> sum;
        std::map<TownId, int> count;
        const int fresh = k - (i - 1);
        for (int j = 0; j < samples_per_round; ++j) {
            auto picked = rng.sample(std::span<const TownId>(open), static_cast<std::size_t>(fresh));
            std::vector<TownId> candidate = committed;
            candidate.insert(candidate.end(), picked.begin(), picked.end());
            std::sort(candidate.begin(), candidate.end());
            const double v = f(candidate);
            ++result.evaluations_used;
            for (TownId t : picked) {
                sum[t] += v;
                ++count[t];
            }
            if (v < best_value) {
                best_value = v;
                best_set = std::move(candidate);
            }
        }

        auto argmin = [&](auto&& admissible) {
            TownId pick = -1;
            double pick_avg = std::numeric_limits<double>::infinity();
            for (const auto& [t, c] : count) {
                if (!admissible(t)) continue;
                const double avg = sum[t] / c;
                if (pick < 0 || avg < pick_avg - kScoreTieTolerance) {
                    pick = t;
                    pick_avg = avg;
                }
            }
            return pick;
        };
        auto uncommitted = [&](TownId t) {
            return std::find(committed.begin(), committed.end(), t) == committed.end();
        };
        TownId v = argmin([&](TownId t) {
            return uncommitted(t) && std::binary_search(best_set.begin(), best_set.end(), t);
        });
        if (v < 0) v = argmin(uncommitted);
        committed.push_back(v);
    }

    if (trace) *trace = McTrace{committed, best_set, best_value};
    std::sort(committed.begin(), committed.end());
    result.remediation = committed;
    result.predicted_value = f(committed);
    ++result.evaluations_used;
    result.elapsed = seconds_since(start);
    return result;
}

PlacementResult uniform_baseline(std::span<const TownId> eligible, int k, std::uint64_t seed) {
    const auto start = Clock::now();
    check_k(eligible, k);
    Rng rng(seed);
    PlacementResult result;
    result.method = "uniform-random";
    result.remediation = sorted_subset(eligible, k, rng);
    result.predicted_value = std::numeric_limits<double>::quiet_NaN();
    result.elapsed = seconds_since(start);
    return result;
}

}  // namespace keyterrain
