#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "keyterrain/network.hpp"
#include "keyterrain/placement.hpp"
#include "keyterrain/simulator.hpp"

namespace keyterrain {

enum class Method {
    BetweennessTopk,
    BetweennessIter,
    PagerankTopk,
    PagerankIter,
    DynsysBasic,
    DynsysMc,
    AbmBasic,
    AbmMc,
    UniformRandom,
    Exhaustive,
};

std::string method_tag(Method m);
/// Throws ParseError on unknown tags.
Method parse_method(std::string_view tag);
/// The nine table columns, in table order.
const std::vector<Method>& table_methods();
bool is_random_baseline(Method m);

struct SelectOptions {
    SimConfig sim;
    /// Samples per selected town for the sampling methods; 0 picks the
    /// evaluator's default.
    int mc_samples = 0;
    Evaluator exhaustive_objective = Evaluator::DynSys;
    std::uint64_t exhaustive_cap = kExhaustiveCap;
};

/// Throws ValidationError listing every problem if the scenario is invalid.
void require_valid(const Scenario& scenario);

/// Chooses k remediation towns outside the scenario's enemy set.
PlacementResult select_placement(const Scenario& scenario, Method method, int k,
                                 std::uint64_t seed, const SelectOptions& options = {});

struct ExperimentGrid {
    /// Zipped with remediation_counts: cell i is (infection_counts[i], remediation_counts[i]).
    std::vector<int> infection_counts;
    std::vector<int> remediation_counts;
    std::vector<std::string> methods;
    Mobility mobility = Mobility::RandomWalk;
    int trials = 20;
    int steps = 10'000;
    std::vector<std::uint64_t> seeds{1};

    GenerateParams scenario;  // num_enemy, budget, mobility and seed are set per cell
    SelectOptions select;     // select.sim.steps is overridden by `steps`
    unsigned threads = 1;
};

/// The standard grid: seven (inf, rmd) rows by the nine table methods.
ExperimentGrid table_grid(Mobility mobility);

/// Parses a grid file; unknown keys are rejected.
ExperimentGrid load_grid(const std::string& text);

struct ResultRow {
    int inf_count = 0;
    int rmd_count = 0;
    std::string method;
    double mean_infected_fraction = 0.0;
    double std = 0.0;
    double selection_runtime_s = 0.0;
    double eval_runtime_s = 0.0;
    /// Pooled per-trial fractions behind mean and std.
    std::vector<double> fractions;
    std::vector<TownId> remediation;  // from the first seed
};

/// Scenario used for one cell: generated from `seed`, with the first
/// inf_count towns of a seeded permutation as enemies. Enemy sets are nested
/// across inf_count for a fixed seed.
Scenario cell_scenario(const ExperimentGrid& grid, std::uint64_t seed, int inf_count, int rmd_count);

ResultRow run_cell(const ExperimentGrid& grid, int inf_count, int rmd_count, const std::string& method);

std::vector<ResultRow> run_table(const ExperimentGrid& grid);

inline constexpr const char* kCsvHeader =
    "inf_count,rmd_count,method,mean_infected_fraction,std,selection_runtime_s,eval_runtime_s";

/// CSV text; with include_runtimes false the two runtime columns are written as 0.
std::string to_csv(const std::vector<ResultRow>& rows, bool include_runtimes = true);

struct MonotonicityViolation {
    std::string method;
    std::string series;  // "rmd at inf=5" or "inf at rmd=5"
    int from_inf, from_rmd, to_inf, to_rmd;
    double from_mean, to_mean;
    double from_half_width, to_half_width;  // 95% normal half-widths
};

/// Checks that means fall (within `slack`) as remediation grows at 5 enemy
/// towns and as enemy towns shrink at 5 remediation towns.
std::vector<MonotonicityViolation> monotonicity_report(const std::vector<ResultRow>& rows,
                                                       double slack = 0.10);
std::string format_report(const std::vector<MonotonicityViolation>& violations);

}  // namespace keyterrain
