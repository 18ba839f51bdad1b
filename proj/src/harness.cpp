#include "keyterrain/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "keyterrain/centrality.hpp"
#include "keyterrain/errors.hpp"
#include "keyterrain/rng.hpp"

namespace keyterrain {

namespace {

constexpr std::array<std::pair<Method, const char*>, 10> kTags{{
    {Method::BetweennessTopk, "betweenness-topk"},
    {Method::BetweennessIter, "betweenness-iter"},
    {Method::PagerankTopk, "pagerank-topk"},
    {Method::PagerankIter, "pagerank-iter"},
    {Method::DynsysBasic, "dynsys-basic"},
    {Method::DynsysMc, "dynsys-mc"},
    {Method::AbmBasic, "abm-basic"},
    {Method::AbmMc, "abm-mc"},
    {Method::UniformRandom, "uniform-random"},
    {Method::Exhaustive, "exhaustive"},
}};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string method_tag(Method m) {
    for (const auto& [method, tag] : kTags) {
        if (method == m) return tag;
    }
    throw Error("unknown method");
}

Method parse_method(std::string_view tag) {
    for (const auto& [method, name] : kTags) {
        if (tag == name) return method;
    }
    throw ParseError("unknown method \"" + std::string(tag) + "\"");
}

const std::vector<Method>& table_methods() {
    static const std::vector<Method> methods{
        Method::BetweennessTopk, Method::BetweennessIter, Method::PagerankTopk,
        Method::PagerankIter,    Method::DynsysBasic,     Method::DynsysMc,
        Method::AbmBasic,        Method::AbmMc,           Method::UniformRandom,
    };
    return methods;
}

bool is_random_baseline(Method m) { return m == Method::UniformRandom; }

void require_valid(const Scenario& scenario) {
    auto problems = validate(scenario);
    if (problems.empty()) return;
    std::string msg = "invalid scenario: " + problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
    throw ValidationError(msg);
}

PlacementResult select_placement(const Scenario& scenario, Method method, int k, std::uint64_t seed,
                                 const SelectOptions& options) {
    const auto start = Clock::now();
    const auto eligible = scenario.eligible_towns();
    if (k < 0 || static_cast<std::size_t>(k) > eligible.size()) {
        throw InfeasibleError("k = " + std::to_string(k) + " but only " + std::to_string(eligible.size()) +
                              " towns are eligible");
    }
    const auto& net = scenario.network;
    auto samples_for = [&](Evaluator e) {
        if (options.mc_samples > 0) return options.mc_samples;
        return e == Evaluator::DynSys ? kDynSysSamples : kAbmSamples;
    };
    auto abm = [&] {
        return abm_objective(scenario, options.sim, derive_seed(seed, 1), options.sim.eval_trials);
    };
    auto centrality = [&](const std::vector<TownId>& picked) {
        PlacementResult r;
        r.remediation = picked;
        std::sort(r.remediation.begin(), r.remediation.end());
        r.predicted_value = std::numeric_limits<double>::quiet_NaN();
        return r;
    };

    PlacementResult result;
    switch (method) {
        case Method::BetweennessTopk:
            result = centrality(select_topk(betweenness(CentralityGraph::from_network(net)), k,
                                            scenario.enemy_towns));
            break;
        case Method::PagerankTopk:
            result = centrality(
                select_topk(pagerank(CentralityGraph::from_network(net)), k, scenario.enemy_towns));
            break;
        case Method::BetweennessIter:
            result = centrality(select_iterative(net, BetweennessParams{}, k, scenario.enemy_towns));
            break;
        case Method::PagerankIter:
            result = centrality(select_iterative(net, PageRankParams{}, k, scenario.enemy_towns));
            break;
        case Method::DynsysBasic:
            result = random_sampling(dynsys_objective(scenario), eligible, k,
                                     std::max(1, k * samples_for(Evaluator::DynSys)), seed);
            break;
        case Method::DynsysMc:
            result = monte_carlo(dynsys_objective(scenario), eligible, k, samples_for(Evaluator::DynSys), seed);
            break;
        case Method::AbmBasic:
            result = random_sampling(abm(), eligible, k, std::max(1, k * samples_for(Evaluator::Abm)), seed);
            break;
        case Method::AbmMc:
            result = monte_carlo(abm(), eligible, k, samples_for(Evaluator::Abm), seed);
            break;
        case Method::UniformRandom:
            result = uniform_baseline(eligible, k, seed);
            break;
        case Method::Exhaustive:
            result = exhaustive(options.exhaustive_objective == Evaluator::DynSys ? dynsys_objective(scenario)
                                                                                 : abm(),
                                eligible, k, options.exhaustive_cap);
            break;
    }
    result.method = method_tag(method);
    result.elapsed = seconds_since(start);
    return result;
}

ExperimentGrid table_grid(Mobility mobility) {
    ExperimentGrid g;
    g.infection_counts = {5, 5, 5, 5, 3, 1, 0};
    g.remediation_counts = {0, 1, 3, 5, 5, 5, 5};
    for (Method m : table_methods()) g.methods.push_back(method_tag(m));
    g.mobility = mobility;
    return g;
}

namespace {

using nlohmann::json;

template <typename T>
T get_field(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("grid: bad value for \"") + key + "\": " + e.what());
    }
}

}  // namespace

ExperimentGrid load_grid(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("grid: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("grid: top level must be an object");
    static const std::set<std::string> known{
        "infection_counts", "remediation_counts", "methods",      "mobility",
        "trials",           "steps",              "seeds",        "num_towns",
        "num_units",        "mean_degree",        "eval_trials",  "mc_samples",
        "exhaustive_objective", "tick_s",         "contact_radius_m", "threads",
    };
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw ParseError("grid: unknown key \"" + key + "\"");
    }
    for (const char* key : {"infection_counts", "remediation_counts", "methods"}) {
        if (!doc.contains(key)) throw ParseError(std::string("grid: missing key \"") + key + "\"");
    }

    ExperimentGrid g;
    g.infection_counts = get_field<std::vector<int>>(doc, "infection_counts");
    g.remediation_counts = get_field<std::vector<int>>(doc, "remediation_counts");
    g.methods = get_field<std::vector<std::string>>(doc, "methods");
    if (doc.contains("mobility")) g.mobility = parse_mobility(get_field<std::string>(doc, "mobility"));
    if (doc.contains("trials")) g.trials = get_field<int>(doc, "trials");
    if (doc.contains("steps")) g.steps = get_field<int>(doc, "steps");
    if (doc.contains("seeds")) g.seeds = get_field<std::vector<std::uint64_t>>(doc, "seeds");
    if (doc.contains("num_towns")) g.scenario.num_towns = get_field<int>(doc, "num_towns");
    if (doc.contains("num_units")) g.scenario.num_units = get_field<int>(doc, "num_units");
    if (doc.contains("mean_degree")) g.scenario.target_mean_degree = get_field<double>(doc, "mean_degree");
    if (doc.contains("eval_trials")) g.select.sim.eval_trials = get_field<int>(doc, "eval_trials");
    if (doc.contains("mc_samples")) g.select.mc_samples = get_field<int>(doc, "mc_samples");
    if (doc.contains("exhaustive_objective")) {
        const auto obj = get_field<std::string>(doc, "exhaustive_objective");
        if (obj == "dynsys") {
            g.select.exhaustive_objective = Evaluator::DynSys;
        } else if (obj == "abm") {
            g.select.exhaustive_objective = Evaluator::Abm;
        } else {
            throw ParseError("grid: exhaustive_objective must be \"dynsys\" or \"abm\"");
        }
    }
    if (doc.contains("tick_s")) g.select.sim.tick = get_field<double>(doc, "tick_s");
    if (doc.contains("contact_radius_m")) g.select.sim.contact_radius = get_field<double>(doc, "contact_radius_m");
    if (doc.contains("threads")) g.threads = get_field<unsigned>(doc, "threads");

    if (g.infection_counts.size() != g.remediation_counts.size()) {
        throw ValidationError("grid: infection_counts and remediation_counts differ in length");
    }
    for (const auto& m : g.methods) parse_method(m);
    if (g.trials < 1) throw ValidationError("grid: trials must be at least 1");
    if (g.steps < 1) throw ValidationError("grid: steps must be at least 1");
    if (g.seeds.empty()) throw ValidationError("grid: seeds must not be empty");
    return g;
}

Scenario cell_scenario(const ExperimentGrid& grid, std::uint64_t seed, int inf_count, int rmd_count) {
    GenerateParams p = grid.scenario;
    p.num_enemy = inf_count;
    p.budget = rmd_count;
    p.mobility = grid.mobility;
    p.seed = seed;
    if (inf_count < 0 || inf_count > p.num_towns) {
        throw InfeasibleError("infection count " + std::to_string(inf_count) + " out of range");
    }
    if (rmd_count < 0 || rmd_count > p.num_towns - inf_count) {
        throw InfeasibleError("remediation count " + std::to_string(rmd_count) + " exceeds " +
                              std::to_string(p.num_towns - inf_count) + " eligible towns");
    }
    // Enemy towns are a prefix of one seeded permutation, so they nest across cells.
    Scenario s = generate_scenario(p);
    require_valid(s);
    return s;
}

namespace {

ResultRow run_cell_with(const ExperimentGrid& grid, int inf_count, int rmd_count, const std::string& tag,
                        unsigned eval_threads) {
    const Method method = parse_method(tag);
    ResultRow row;
    row.inf_count = inf_count;
    row.rmd_count = rmd_count;
    row.method = tag;

    SelectOptions options = grid.select;
    options.sim.steps = grid.steps;
    options.sim.threads = eval_threads;
    for (std::size_t i = 0; i < grid.seeds.size(); ++i) {
        const std::uint64_t seed = grid.seeds[i];
        const Scenario scenario = cell_scenario(grid, seed, inf_count, rmd_count);
        const std::uint64_t cell_seed =
            derive_seed(derive_seed(seed, 1000 + static_cast<std::uint64_t>(inf_count)),
                        static_cast<std::uint64_t>(rmd_count));

        auto t0 = Clock::now();
        const auto placement = select_placement(scenario, method, rmd_count, derive_seed(cell_seed, 1), options);
        row.selection_runtime_s += seconds_since(t0);
        if (i == 0) row.remediation = placement.remediation;

        t0 = Clock::now();
        // Movement never depends on infection, so one set of trial seeds for the
        // whole grid gives every cell the same unit trajectories.
        const auto ev = evaluate_placement(scenario, placement.remediation, options.sim,
                                           derive_seed(seed, 2), grid.trials);
        row.eval_runtime_s += seconds_since(t0);
        row.fractions.insert(row.fractions.end(), ev.fractions.begin(), ev.fractions.end());
    }

    const double n = static_cast<double>(row.fractions.size());
    double sum = 0.0;
    for (double f : row.fractions) sum += f;
    row.mean_infected_fraction = sum / n;
    if (row.fractions.size() > 1) {
        double sq = 0.0;
        for (double f : row.fractions) sq += (f - row.mean_infected_fraction) * (f - row.mean_infected_fraction);
        row.std = std::sqrt(sq / (n - 1.0));
    }
    return row;
}

}  // namespace

ResultRow run_cell(const ExperimentGrid& grid, int inf_count, int rmd_count, const std::string& method) {
    return run_cell_with(grid, inf_count, rmd_count, method, grid.threads);
}

std::vector<ResultRow> run_table(const ExperimentGrid& grid) {
    if (grid.infection_counts.size() != grid.remediation_counts.size()) {
        throw ValidationError("grid: infection_counts and remediation_counts differ in length");
    }
    std::vector<std::pair<int, int>> cells;
    for (std::size_t i = 0; i < grid.infection_counts.size(); ++i) {
        cells.emplace_back(grid.infection_counts[i], grid.remediation_counts[i]);
    }
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

    struct Job {
        int inf, rmd;
        std::string method;
    };
    std::vector<Job> jobs;
    for (const auto& [inf, rmd] : cells) {
        for (const auto& m : grid.methods) jobs.push_back({inf, rmd, m});
    }

    std::vector<ResultRow> rows(jobs.size());
    const unsigned workers =
        std::min<unsigned>(std::max(1U, grid.threads), static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
    if (workers <= 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            rows[j] = run_cell_with(grid, jobs[j].inf, jobs[j].rmd, jobs[j].method, 1);
        }
        return rows;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t j = w; j < jobs.size(); j += workers) {
                    rows[j] = run_cell_with(grid, jobs[j].inf, jobs[j].rmd, jobs[j].method, 1);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows, bool include_runtimes) {
    std::string out = std::string(kCsvHeader) + "\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%s,%.6f,%.6f,%.6f,%.6f\n", r.inf_count, r.rmd_count,
                      r.method.c_str(), r.mean_infected_fraction, r.std,
                      include_runtimes ? r.selection_runtime_s : 0.0, include_runtimes ? r.eval_runtime_s : 0.0);
        out += buf;
    }
    return out;
}

std::vector<MonotonicityViolation> monotonicity_report(const std::vector<ResultRow>& rows, double slack) {
    std::vector<std::string> methods;
    for (const auto& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    auto half_width = [](const ResultRow& r) {
        const auto n = std::max<std::size_t>(1, r.fractions.size());
        return 1.96 * r.std / std::sqrt(static_cast<double>(n));
    };

    std::vector<MonotonicityViolation> out;
    for (const auto& m : methods) {
        auto scan = [&](const std::string& series, auto&& member, auto&& before) {
            std::vector<const ResultRow*> chain;
            for (const auto& r : rows) {
                if (r.method == m && member(r)) chain.push_back(&r);
            }
            std::sort(chain.begin(), chain.end(), [&](const ResultRow* a, const ResultRow* b) { return before(*a, *b); });
            for (std::size_t i = 1; i < chain.size(); ++i) {
                const ResultRow& a = *chain[i - 1];
                const ResultRow& b = *chain[i];
                if (b.mean_infected_fraction > a.mean_infected_fraction + slack) {
                    out.push_back({m, series, a.inf_count, a.rmd_count, b.inf_count, b.rmd_count,
                                   a.mean_infected_fraction, b.mean_infected_fraction, half_width(a),
                                   half_width(b)});
                }
            }
        };
        scan("rmd at inf=5", [](const ResultRow& r) { return r.inf_count == 5; },
             [](const ResultRow& a, const ResultRow& b) { return a.rmd_count < b.rmd_count; });
        scan("inf at rmd=5", [](const ResultRow& r) { return r.rmd_count == 5; },
             [](const ResultRow& a, const ResultRow& b) { return a.inf_count > b.inf_count; });
    }
    return out;
}

std::string format_report(const std::vector<MonotonicityViolation>& violations) {
    std::ostringstream out;
    if (violations.empty()) {
        out << "monotonicity: no violations\n";
        return out.str();
    }
    char buf[320];
    for (const auto& v : violations) {
        std::snprintf(buf, sizeof buf,
                      "monotonicity violation: %s, %s: (%d,%d) %.3f +/- %.3f -> (%d,%d) %.3f +/- %.3f\n",
                      v.method.c_str(), v.series.c_str(), v.from_inf, v.from_rmd, v.from_mean,
                      v.from_half_width, v.to_inf, v.to_rmd, v.to_mean, v.to_half_width);
        out << buf;
    }
    return out.str();
}

}  // namespace keyterrain
