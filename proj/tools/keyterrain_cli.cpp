#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "keyterrain/equilibrium.hpp"
#include "keyterrain/errors.hpp"
#include "keyterrain/harness.hpp"

using namespace keyterrain;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

Scenario read_scenario(const std::string& path) {
    Scenario s = load_scenario(read_file(path));
    require_valid(s);
    return s;
}

std::vector<TownId> parse_ids(const std::string& text) {
    std::vector<TownId> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ParseError("bad town id \"" + item + "\"");
        }
        if (used != item.size()) throw ParseError("bad town id \"" + item + "\"");
        ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("duplicate remediation town");
    return ids;
}

void check_remediation(const Scenario& s, const std::vector<TownId>& ids) {
    for (TownId v : ids) {
        if (!s.network.valid_town(v)) throw ValidationError("remediation town " + std::to_string(v) + " out of range");
        if (s.is_enemy(v)) throw ValidationError("remediation town " + std::to_string(v) + " is an enemy town");
    }
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Remediation-zone placement against proximity malware"};
    app.require_subcommand(1);

    SimConfig sim;
    auto add_sim_flags = [&sim](CLI::App* cmd) {
        cmd->add_option("--steps", sim.steps, "Simulation ticks per trial");
        cmd->add_option("--tick", sim.tick, "Tick length in seconds");
        cmd->add_option("--contact-radius", sim.contact_radius, "Road contact radius in meters");
        cmd->add_flag("--exponential", sim.exponential_deployments, "Exponential deployment times");
        cmd->add_option("--threads", sim.threads, "Worker threads");
    };

    GenerateParams gen;
    std::string gen_out;
    std::string gen_mobility = "walk";
    auto* generate = app.add_subcommand("generate", "Generate a random scenario");
    generate->add_option("--n", gen.num_towns, "Number of towns");
    generate->add_option("--enemy", gen.num_enemy, "Number of enemy towns");
    generate->add_option("--budget", gen.budget, "Remediation budget");
    generate->add_option("--units", gen.num_units, "Number of units");
    generate->add_option("--degree", gen.target_mean_degree, "Target mean degree");
    generate->add_option("--mobility", gen_mobility, "walk or waypoint");
    generate->add_option("--seed", gen.seed, "Master seed");
    generate->add_option("--out", gen_out, "Output path (default stdout)");

    std::string scenario_path;
    std::string method_name;
    int k = -1;
    std::uint64_t seed = 0;
    int mc_samples = 0;
    std::string exhaustive_objective = "dynsys";
    std::string dump_system;
    auto* select = app.add_subcommand("select", "Choose remediation towns");
    select->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    select->add_option("--method", method_name, "Placement method")->required();
    select->add_option("--k", k, "Number of remediation towns (default: scenario budget)");
    select->add_option("--seed", seed, "Seed");
    select->add_option("--mc-samples", mc_samples, "Samples per selected town");
    select->add_option("--eval-trials", sim.eval_trials, "Simulation trials per objective evaluation");
    select->add_option("--objective", exhaustive_objective, "Objective for exhaustive: dynsys or abm");
    select->add_option("--dump-system", dump_system, "Write the equilibrium system for the chosen set as CSV");
    add_sim_flags(select);

    std::string remediation_text;
    int trials = 20;
    std::string trace_path;
    auto* evaluate = app.add_subcommand("evaluate", "Score a placement by simulation");
    evaluate->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    evaluate->add_option("--remediation", remediation_text, "Comma-separated town ids");
    evaluate->add_option("--trials", trials, "Trials");
    evaluate->add_option("--seed", seed, "Seed");
    evaluate->add_option("--trace", trace_path, "Write a per-tick CSV trace of the first trial");
    add_sim_flags(evaluate);

    std::string grid_path;
    std::string results_path;
    bool report = false;
    bool no_runtimes = false;
    unsigned grid_threads = 0;
    auto* experiment = app.add_subcommand("experiment", "Run an experiment grid");
    experiment->add_option("--grid", grid_path, "Grid JSON")->required();
    experiment->add_option("--out", results_path, "Output CSV (default stdout)");
    experiment->add_option("--threads", grid_threads, "Worker threads (overrides the grid file)");
    experiment->add_flag("--report", report, "Print the monotonicity report to stderr");
    experiment->add_flag("--no-runtimes", no_runtimes, "Write runtime columns as zero");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) {
            gen.mobility = parse_mobility(gen_mobility);
            Scenario s = generate_scenario(gen);
            require_valid(s);
            const auto text = save_scenario(s);
            if (gen_out.empty()) {
                std::cout << text;
            } else {
                write_file(gen_out, text);
            }
        } else if (*select) {
            const Scenario s = read_scenario(scenario_path);
            SelectOptions options;
            check_config(sim);
            options.sim = sim;
            options.mc_samples = mc_samples;
            if (exhaustive_objective == "dynsys") {
                options.exhaustive_objective = Evaluator::DynSys;
            } else if (exhaustive_objective == "abm") {
                options.exhaustive_objective = Evaluator::Abm;
            } else {
                throw ValidationError("--objective must be dynsys or abm");
            }
            const Method method = parse_method(method_name);
            const auto result = select_placement(s, method, k >= 0 ? k : s.budget, seed, options);
            ordered_json out;
            out["method"] = result.method;
            out["remediation"] = result.remediation;
            out["predicted_value"] = number_or_null(result.predicted_value);
            out["evaluations_used"] = result.evaluations_used;
            std::cout << out.dump(2) << "\n";
            if (!dump_system.empty()) {
                EquilibriumSystem system;
                dual_equilibrium_linearized(s.network, markov_params(s), s.enemy_towns, result.remediation, &system);
                std::ofstream f(dump_system, std::ios::binary);
                if (!f) throw ValidationError("cannot write " + dump_system);
                write_system_csv(f, system);
            }
        } else if (*evaluate) {
            const Scenario s = read_scenario(scenario_path);
            const auto ids = parse_ids(remediation_text);
            check_remediation(s, ids);
            check_config(sim);
            if (trials < 1) throw ValidationError("--trials must be at least 1");
            const auto ev = evaluate_placement(s, ids, sim, seed, trials);
            ordered_json out;
            out["remediation"] = ids;
            out["trials"] = trials;
            out["mean"] = ev.mean;
            out["std"] = ev.stddev;
            std::cout << out.dump(2) << "\n";
            if (!trace_path.empty()) {
                std::ofstream f(trace_path, std::ios::binary);
                if (!f) throw ValidationError("cannot write " + trace_path);
                write_trace_csv(f, s, ids, sim, derive_seed(seed, 0));
            }
        } else if (*experiment) {
            ExperimentGrid grid = load_grid(read_file(grid_path));
            if (grid_threads > 0) grid.threads = grid_threads;
            const auto rows = run_table(grid);
            const auto csv = to_csv(rows, !no_runtimes);
            if (results_path.empty()) {
                std::cout << csv;
            } else {
                write_file(results_path, csv);
            }
            if (report) std::cerr << format_report(monotonicity_report(rows));
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
