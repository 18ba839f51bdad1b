#include "keyterrain/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "keyterrain/errors.hpp"

namespace keyterrain {

std::vector<DirectedRoad> directed_roads(const RoadNetwork& network) {
    std::vector<DirectedRoad> out;
    out.reserve(2 * network.num_roads());
    for (std::size_t r = 0; r < network.num_roads(); ++r) {
        const Road& road = network.road(r);
        out.push_back({road.a, road.b, r});
        out.push_back({road.b, road.a, r});
    }
    return out;
}

MarkovParams markov_params(const Scenario& scenario) {
    const RoadNetwork& net = scenario.network;
    MarkovParams p;
    p.num_units = scenario.num_units;
    for (std::size_t i = 0; i < net.num_towns(); ++i) {
        p.wait_town.push_back(scenario.deployment_time(static_cast<TownId>(i)));
    }
    for (const DirectedRoad& d : directed_roads(net)) p.wait_road.push_back(net.road(d.road).travel_time);
    return p;
}

namespace {

enum class Role { Plain, Enemy, Remedy };

/// Shared per-call bookkeeping for the town/road state space.
struct StateSpace {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<DirectedRoad> dirs;
    std::vector<std::vector<std::size_t>> incoming;  // directed states entering each town
    std::vector<double> degree;

    StateSpace(const RoadNetwork& net, const MarkovParams& params) {
        n = net.num_towns();
        dirs = directed_roads(net);
        m = dirs.size();
        if (params.wait_town.size() != n || params.wait_road.size() != m) {
            throw ValidationError("markov params do not match the network");
        }
        for (double w : params.wait_town) {
            if (!(w > 0.0)) throw ValidationError("town waits must be positive");
        }
        for (double w : params.wait_road) {
            if (!(w > 0.0)) throw ValidationError("road waits must be positive");
        }
        if (params.num_units < 1) throw ValidationError("num_units must be at least 1");
        incoming.resize(n);
        degree.assign(n, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            incoming[static_cast<std::size_t>(dirs[k].to)].push_back(k);
            degree[static_cast<std::size_t>(dirs[k].from)] += 1.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (degree[i] == 0.0) throw ValidationError("town " + std::to_string(i) + " has no roads");
        }
    }

    std::size_t town_from(std::size_t k) const { return static_cast<std::size_t>(dirs[k].from); }
    std::size_t town_to(std::size_t k) const { return static_cast<std::size_t>(dirs[k].to); }

    // Dual variable layout: clean towns, infected towns, clean roads, infected roads.
    std::size_t ct(std::size_t i) const { return i; }
    std::size_t it(std::size_t i) const { return n + i; }
    std::size_t cr(std::size_t k) const { return 2 * n + k; }
    std::size_t ir(std::size_t k) const { return 2 * n + m + k; }
    std::size_t dual_size() const { return 2 * n + 2 * m; }
};

std::vector<Role> town_roles(const RoadNetwork& net, std::span<const TownId> enemy,
                             std::span<const TownId> remediation) {
    std::vector<Role> roles(net.num_towns(), Role::Plain);
    for (TownId v : enemy) {
        if (!net.valid_town(v)) throw ValidationError("enemy town out of range");
        roles[static_cast<std::size_t>(v)] = Role::Enemy;
    }
    for (TownId v : remediation) {
        if (!net.valid_town(v)) throw ValidationError("remediation town out of range");
        if (roles[static_cast<std::size_t>(v)] == Role::Enemy) {
            throw ValidationError("town " + std::to_string(v) + " is both enemy and remediation");
        }
        roles[static_cast<std::size_t>(v)] = Role::Remedy;
    }
    return roles;
}

double max_row_residual(const DenseMatrix& a, std::span<const double> x) {
    double worst = 0.0;
    for (double r : a.multiply(x)) worst = std::max(worst, std::abs(r));
    return worst;
}

/// Replaces `drop` with the normalization row, pins the requested variables
/// to zero, solves, verifies every balance row and clamps numerical dust.
std::vector<double> solve_normalized(const DenseMatrix& balance, std::size_t drop,
                                     const std::vector<bool>& pinned, EquilibriumSystem* capture,
                                     const char* what) {
    const std::size_t size = balance.rows();
    DenseMatrix a = balance;
    std::vector<double> rhs(size, 0.0);
    for (std::size_t v = 0; v < size; ++v) {
        if (!pinned[v]) continue;
        auto row = a.row(v);
        std::fill(row.begin(), row.end(), 0.0);
        row[v] = 1.0;
    }
    {
        auto row = a.row(drop);
        std::fill(row.begin(), row.end(), 1.0);
        rhs[drop] = 1.0;
    }
    std::vector<double> x = solve_dense(a, rhs);
    for (std::size_t v = 0; v < size; ++v) {
        if (pinned[v]) x[v] = 0.0;
    }

    double total = 0.0;
    for (double v : x) total += v;
    const double residual = std::max(max_row_residual(balance, x), std::abs(total - 1.0));
    if (!(residual < kResidualTolerance)) {
        std::ostringstream msg;
        msg << what << ": residual check failed (" << residual << ")";
        throw SolverError(msg.str());
    }
    for (double& v : x) {
        if (v < -kNegativeSlack) {
            std::ostringstream msg;
            msg << what << ": negative probability " << v;
            throw SolverError(msg.str());
        }
        v = std::max(v, 0.0);
    }
    if (capture) {
        capture->matrix = std::move(a);
        capture->rhs = std::move(rhs);
        capture->solution = x;
        capture->dropped_row = drop;
    }
    return x;
}

DenseMatrix baseline_balance(const StateSpace& s, const MarkovParams& p) {
    DenseMatrix a(s.n + s.m, s.n + s.m);
    for (std::size_t i = 0; i < s.n; ++i) {
        a(i, i) = 1.0;
        for (std::size_t k : s.incoming[i]) a(i, s.n + k) -= p.wait_town[i] / p.wait_road[k];
    }
    for (std::size_t k = 0; k < s.m; ++k) {
        const std::size_t i = s.town_from(k);
        a(s.n + k, s.n + k) = 1.0;
        a(s.n + k, i) -= p.wait_road[k] / (p.wait_town[i] * s.degree[i]);
    }
    return a;
}

/// Balance rows of the dual chain, each scaled by its state's wait. The
/// infection rates are evaluated from `inf_town` / `inf_road`, which hold
/// either baseline occupancies (linearized) or the current infected iterate.
DenseMatrix dual_balance(const StateSpace& s, const MarkovParams& p, const std::vector<Role>& roles,
                         std::span<const double> inf_town, std::span<const double> inf_road) {
    const double others = static_cast<double>(p.num_units - 1);
    DenseMatrix a(s.dual_size(), s.dual_size());

    for (std::size_t i = 0; i < s.n; ++i) {
        const double w = p.wait_town[i];
        const std::size_t ci = s.ct(i), ii = s.it(i);
        switch (roles[i]) {
            case Role::Remedy:
                // every arrival is cleaned
                a(ci, ci) = 1.0;
                for (std::size_t k : s.incoming[i]) {
                    a(ci, s.cr(k)) -= w / p.wait_road[k];
                    a(ci, s.ir(k)) -= w / p.wait_road[k];
                }
                a(ii, ii) = 1.0;
                break;
            case Role::Enemy:
                // every arrival is infected
                a(ci, ci) = 1.0;
                a(ii, ii) = 1.0;
                for (std::size_t k : s.incoming[i]) {
                    a(ii, s.cr(k)) -= w / p.wait_road[k];
                    a(ii, s.ir(k)) -= w / p.wait_road[k];
                }
                break;
            case Role::Plain: {
                const double stay_clean = std::pow(1.0 - inf_town[i], others);
                double arrivals_infected = 0.0;  // sum of infected arrival rates
                for (std::size_t k : s.incoming[i]) arrivals_infected += inf_road[k] / p.wait_road[k];
                const double contact = others * arrivals_infected * w;
                // clean: lose mass to infection by arriving infected units
                a(ci, ci) = 1.0 + contact;
                for (std::size_t k : s.incoming[i]) a(ci, s.cr(k)) -= w * stay_clean / p.wait_road[k];
                a(ii, ii) = 1.0;
                for (std::size_t k : s.incoming[i]) {
                    a(ii, s.cr(k)) -= w * (1.0 - stay_clean) / p.wait_road[k];
                    a(ii, s.ir(k)) -= w / p.wait_road[k];
                }
                a(ii, ci) -= contact;
                break;
            }
        }
    }

    for (std::size_t k = 0; k < s.m; ++k) {
        const double w = p.wait_road[k];
        const std::size_t i = s.town_from(k), j = s.town_to(k);
        const double depart = w / (p.wait_town[i] * s.degree[i]);
        const double stay_clean = std::pow(1.0 - inf_road[reverse_state(k)], others);
        const double contact = others * inf_town[j] / (p.wait_town[j] * s.degree[j]) * w;
        const std::size_t ck = s.cr(k), ik = s.ir(k);
        a(ck, ck) = 1.0 + contact;
        a(ck, s.ct(i)) -= depart * stay_clean;
        a(ik, ik) = 1.0;
        a(ik, s.ct(i)) -= depart * (1.0 - stay_clean);
        a(ik, s.it(i)) -= depart;
        a(ik, ck) -= contact;
    }
    return a;
}

std::vector<bool> pinned_variables(const StateSpace& s, const std::vector<Role>& roles,
                                   const InfectableStates& mask) {
    std::vector<bool> pinned(s.dual_size(), false);
    for (std::size_t i = 0; i < s.n; ++i) {
        pinned[s.it(i)] = !mask.town[i];
        pinned[s.ct(i)] = roles[i] == Role::Enemy;
    }
    for (std::size_t k = 0; k < s.m; ++k) pinned[s.ir(k)] = !mask.road[k];
    return pinned;
}

DualDistribution unpack(const StateSpace& s, std::span<const double> x) {
    DualDistribution d;
    d.town_clean.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s.n));
    d.town_infected.assign(x.begin() + static_cast<std::ptrdiff_t>(s.n),
                           x.begin() + static_cast<std::ptrdiff_t>(2 * s.n));
    d.road_clean.assign(x.begin() + static_cast<std::ptrdiff_t>(2 * s.n),
                        x.begin() + static_cast<std::ptrdiff_t>(2 * s.n + s.m));
    d.road_infected.assign(x.begin() + static_cast<std::ptrdiff_t>(2 * s.n + s.m), x.end());
    return d;
}

std::vector<double> pack(const DualDistribution& d) {
    std::vector<double> x;
    x.insert(x.end(), d.town_clean.begin(), d.town_clean.end());
    x.insert(x.end(), d.town_infected.begin(), d.town_infected.end());
    x.insert(x.end(), d.road_clean.begin(), d.road_clean.end());
    x.insert(x.end(), d.road_infected.begin(), d.road_infected.end());
    return x;
}

}  // namespace

BaselineDistribution baseline_equilibrium(const RoadNetwork& network, const MarkovParams& params,
                                          EquilibriumSystem* capture) {
    StateSpace s(network, params);
    DenseMatrix balance = baseline_balance(s, params);
    std::vector<double> x =
        solve_normalized(balance, 0, std::vector<bool>(s.n + s.m, false), capture, "baseline_equilibrium");
    BaselineDistribution out;
    out.town.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s.n));
    out.road.assign(x.begin() + static_cast<std::ptrdiff_t>(s.n), x.end());
    return out;
}

double baseline_residual(const RoadNetwork& network, const MarkovParams& params,
                         const BaselineDistribution& dist) {
    StateSpace s(network, params);
    std::vector<double> x = dist.town;
    x.insert(x.end(), dist.road.begin(), dist.road.end());
    double total = 0.0;
    for (double v : x) total += v;
    return std::max(max_row_residual(baseline_balance(s, params), x), std::abs(total - 1.0));
}

InfectableStates infectable_states(const RoadNetwork& network, std::span<const TownId> enemy,
                                   std::span<const TownId> remediation) {
    const auto roles = town_roles(network, enemy, remediation);
    const auto dirs = directed_roads(network);
    InfectableStates s{std::vector<bool>(network.num_towns(), false),
                       std::vector<bool>(dirs.size(), false)};
    for (TownId v : enemy) s.town[static_cast<std::size_t>(v)] = true;

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            if (s.road[k]) continue;
            const auto i = static_cast<std::size_t>(dirs[k].from);
            const auto j = static_cast<std::size_t>(dirs[k].to);
            // infected departure from i, contact with infected leaving j, or
            // infection while departing past infected traffic on the reverse road
            if (s.town[i] || s.town[j] || s.road[reverse_state(k)]) {
                s.road[k] = true;
                changed = true;
            }
        }
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const auto j = static_cast<std::size_t>(dirs[k].to);
            if (s.road[k] && !s.town[j] && roles[j] != Role::Remedy) {
                s.town[j] = true;
                changed = true;
            }
        }
    }
    return s;
}

DualDistribution dual_equilibrium_linearized(const RoadNetwork& network, const MarkovParams& params,
                                             std::span<const TownId> enemy,
                                             std::span<const TownId> remediation,
                                             EquilibriumSystem* capture) {
    return dual_equilibrium_linearized(network, params, baseline_equilibrium(network, params), enemy,
                                       remediation, capture);
}

DualDistribution dual_equilibrium_linearized(const RoadNetwork& network, const MarkovParams& params,
                                             const BaselineDistribution& baseline,
                                             std::span<const TownId> enemy,
                                             std::span<const TownId> remediation,
                                             EquilibriumSystem* capture) {
    StateSpace s(network, params);
    const auto roles = town_roles(network, enemy, remediation);
    const auto mask = infectable_states(network, enemy, remediation);

    // Baseline occupancy stands in for infected occupancy wherever infection
    // can reach; elsewhere the infected occupancy is exactly zero.
    std::vector<double> inf_town(s.n, 0.0), inf_road(s.m, 0.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        if (mask.town[i]) inf_town[i] = baseline.town[i];
    }
    for (std::size_t k = 0; k < s.m; ++k) {
        if (mask.road[k]) inf_road[k] = baseline.road[k];
    }
    DenseMatrix balance = dual_balance(s, params, roles, inf_town, inf_road);
    auto x = solve_normalized(balance, s.ct(0), pinned_variables(s, roles, mask), capture,
                              "dual_equilibrium_linearized");
    return unpack(s, x);
}

FixedPointResult nonlinear_fixed_point(const RoadNetwork& network, const MarkovParams& params,
                                       std::span<const TownId> enemy,
                                       std::span<const TownId> remediation,
                                       const FixedPointOptions& options) {
    StateSpace s(network, params);
    const auto roles = town_roles(network, enemy, remediation);
    const auto mask = infectable_states(network, enemy, remediation);
    const auto pinned = pinned_variables(s, roles, mask);
    const BaselineDistribution base = baseline_equilibrium(network, params);

    std::vector<double> x(s.dual_size(), 0.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        if (roles[i] == Role::Enemy) {
            x[s.it(i)] = base.town[i];
        } else if (roles[i] == Role::Remedy || !mask.town[i]) {
            x[s.ct(i)] = base.town[i];
        } else {
            x[s.ct(i)] = x[s.it(i)] = 0.5 * base.town[i];
        }
    }
    for (std::size_t k = 0; k < s.m; ++k) {
        if (mask.road[k]) {
            x[s.cr(k)] = x[s.ir(k)] = 0.5 * base.road[k];
        } else {
            x[s.cr(k)] = base.road[k];
        }
    }

    FixedPointResult result;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        std::span<const double> all(x);
        DenseMatrix balance =
            dual_balance(s, params, roles, all.subspan(s.n, s.n), all.subspan(2 * s.n + s.m, s.m));
        std::vector<double> solved;
        try {
            solved = solve_normalized(balance, s.ct(0), pinned, nullptr, "nonlinear_fixed_point");
        } catch (const SolverError&) {
            result.distribution = unpack(s, x);
            result.iterations = iter;
            return result;
        }
        std::vector<double> next(x.size());
        double total = 0.0;
        for (std::size_t v = 0; v < x.size(); ++v) {
            next[v] = (1.0 - options.mixing) * x[v] + options.mixing * solved[v];
            total += next[v];
        }
        double change = 0.0;
        for (std::size_t v = 0; v < x.size(); ++v) {
            next[v] /= total;
            change = std::max(change, std::abs(next[v] - x[v]));
        }
        x.swap(next);
        result.iterations = iter;
        result.last_change = change;
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.distribution = unpack(s, x);
    return result;
}

double dual_residual(const RoadNetwork& network, const MarkovParams& params,
                     std::span<const TownId> enemy, std::span<const TownId> remediation,
                     const DualDistribution& dist) {
    StateSpace s(network, params);
    const auto roles = town_roles(network, enemy, remediation);
    const auto x = pack(dist);
    DenseMatrix balance = dual_balance(s, params, roles, dist.town_infected, dist.road_infected);
    double total = 0.0;
    for (double v : x) total += v;
    return std::max(max_row_residual(balance, x), std::abs(total - 1.0));
}

double infected_fraction(const DualDistribution& dist) {
    double total = 0.0;
    for (double v : dist.town_infected) total += v;
    for (double v : dist.road_infected) total += v;
    return std::clamp(total, 0.0, 1.0);
}

void write_system_csv(std::ostream& out, const EquilibriumSystem& system) {
    const std::size_t n = system.matrix.cols();
    out << "row";
    for (std::size_t c = 0; c < n; ++c) out << ",x" << c;
    out << ",rhs\n";
    out.precision(17);
    for (std::size_t r = 0; r < system.matrix.rows(); ++r) {
        out << r;
        for (std::size_t c = 0; c < n; ++c) out << ',' << system.matrix(r, c);
        out << ',' << system.rhs[r] << '\n';
    }
    out << "solution";
    for (double v : system.solution) out << ',' << v;
    out << ",\n";
}

}  // namespace keyterrain
