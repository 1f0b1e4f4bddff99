// Seeded Monte-Carlo sweeps over scenario parameters, one CSV row per
// (sweep point, trial, solver).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "softran/rrm.hpp"
#include "softran/solve.hpp"

namespace softran {

/// Sweep keys and what they set on the scenario.
///   p_max_mbs_w   macro BS budget
///   p_max_mvno_w  every MVNO budget
///   r_min         every MVNO minimum rate
///   r_min1        the first MVNO minimum rate
///   users         user count
///   bs_per_inp    BSs per InP
struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

struct ExperimentSpec {
    std::string name = "p_max_bs";
    ScenarioConfig base;
    std::vector<SweepAxis> axes;  // cartesian product, first axis outermost
    int trials = 1;
    std::uint64_t seed = 1;
    std::vector<std::string> solvers{"scrm"};
    double eps = 1e-3;
    int max_iter = 50;
    bool timing = true;      // wall_time column; off gives byte-identical reruns
    int threads = 0;         // 0: hardware concurrency
    int modeled_inner = 145; // inner iterations charged by accounting-only runs
};

struct ExperimentRow {
    std::vector<double> point;  // one value per axis
    int trial = 0;
    std::uint64_t seed = 0;
    std::string solver;
    double sum_rate = 0.0;
    bool feasible = false;
    bool outage = false;
    bool failed = false;
    int iterations = 0;
    int inner_iterations = 0;
    double overhead_kb = 0.0;
    double wall_seconds = 0.0;
    std::string diagnostics;
};

struct ExperimentResult {
    std::vector<std::string> axis_keys;
    bool timing = true;
    std::vector<ExperimentRow> rows;
};

/// Known experiment names, their default axes, and whether they solve.
struct ExperimentPreset {
    std::string name;
    std::vector<SweepAxis> axes;
    std::vector<std::string> solvers;
    bool accounting_only = false;
};

inline const std::vector<ExperimentPreset>& experiment_presets() {
    static const std::vector<ExperimentPreset> presets{
        {"p_max_bs", {{"p_max_mbs_w", {1, 2, 3, 4, 5}}}, {"scrm"}, false},
        {"p_max_mvno_r_min", {{"p_max_mvno_w", {1, 2, 3, 4}}, {"r_min1", {2, 3}}}, {"scrm"}, false},
        {"users_scheme", {{"users", {6, 8, 10, 12}}}, {"scrm", "no-comp", "heuristic-nos"}, false},
        {"r_min", {{"r_min", {0, 0.5, 1, 2, 3, 4}}}, {"scrm"}, false},
        {"users_bs", {{"users", {10, 50, 100, 150, 200}}, {"bs_per_inp", {6, 12}}}, {"crm", "scrm"}, true},
    };
    return presets;
}

inline const ExperimentPreset& experiment_preset(const std::string& name) {
    for (const auto& p : experiment_presets())
        if (p.name == name) return p;
    throw std::invalid_argument("unknown experiment: " + name);
}

inline bool known_axis(const std::string& key) {
    static const char* keys[] = {"p_max_mbs_w", "p_max_mvno_w", "r_min", "r_min1", "users", "bs_per_inp"};
    return std::any_of(std::begin(keys), std::end(keys), [&](const char* k) { return key == k; });
}

/// Parses "key=v1,v2;key2=v3" into axes.
inline std::vector<SweepAxis> parse_sweep(const std::string& text) {
    std::vector<SweepAxis> axes;
    std::stringstream groups(text);
    std::string group;
    while (std::getline(groups, group, ';')) {
        if (group.empty()) continue;
        const auto eq = group.find('=');
        if (eq == std::string::npos) throw ConfigError("sweep", "expected key=values in '" + group + "'");
        SweepAxis a{group.substr(0, eq), {}};
        if (!known_axis(a.key)) throw ConfigError("sweep", "unknown axis " + a.key);
        std::stringstream vals(group.substr(eq + 1));
        std::string v;
        while (std::getline(vals, v, ',')) {
            try {
                std::size_t used = 0;
                a.values.push_back(std::stod(v, &used));
                if (used != v.size()) throw std::invalid_argument(v);
            } catch (const std::exception&) {
                throw ConfigError("sweep", "bad value '" + v + "' for " + a.key);
            }
        }
        if (a.values.empty()) throw ConfigError("sweep", "no values for " + a.key);
        axes.push_back(std::move(a));
    }
    return axes;
}

inline void validate(const ExperimentSpec& e) {
    experiment_preset(e.name);
    validate(e.base);
    if (e.trials < 1) throw ConfigError("trials", "must be at least 1");
    if (e.axes.empty()) throw ConfigError("sweep", "no axes");
    for (const auto& a : e.axes) {
        if (!known_axis(a.key)) throw ConfigError("sweep", "unknown axis " + a.key);
        if (a.values.empty()) throw ConfigError("sweep", "no values for " + a.key);
    }
    if (e.solvers.empty()) throw ConfigError("solver", "none given");
    for (const auto& s : e.solvers)
        if (!known_solver(s)) throw ConfigError("solver", "unknown tag " + s);
    if (!(e.eps > 0.0)) throw ConfigError("eps", "must be positive");
    if (e.max_iter < 1) throw ConfigError("max_iter", "must be at least 1");
}

/// Scenario config at one sweep point; rejects values the scenario cannot take.
inline ScenarioConfig apply_point(ScenarioConfig c, const std::vector<SweepAxis>& axes, const std::vector<double>& point) {
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const std::string& key = axes[a].key;
        const double v = point[a];
        if (key == "p_max_mbs_w") {
            c.p_max_mbs_w = v;
        } else if (key == "p_max_mvno_w") {
            c.p_max_mvno_w = v;
        } else if (key == "r_min") {
            c.r_min_bps_hz.assign(c.mvnos, v);
        } else if (key == "r_min1") {
            c.r_min_bps_hz.resize(c.mvnos, c.r_min_bps_hz.empty() ? 0.0 : c.r_min_bps_hz.back());
            c.r_min_bps_hz[0] = v;
        } else if (key == "users" || key == "bs_per_inp") {
            if (v != std::floor(v)) throw ConfigError(key, "must be an integer");
            (key == "users" ? c.users : c.bs_per_inp) = static_cast<int>(v);
            c.users_per_mvno.clear();
        }
    }
    validate(c);
    return c;
}

namespace experiment_detail {

// Warm starts follow budget and rate axes in an order where a neighbour's
// allocation stays feasible: budgets ascending, minimum rates descending.
inline bool chainable(const std::string& key) {
    return key == "p_max_mbs_w" || key == "p_max_mvno_w" || key == "r_min" || key == "r_min1";
}

inline bool descending(const std::string& key) { return key == "r_min" || key == "r_min1"; }

/// Point with one chainable coordinate moved to its predecessor in solve order.
inline std::optional<std::vector<double>> predecessor(const std::vector<SweepAxis>& axes,
                                                      const std::vector<double>& point, std::size_t axis) {
    const bool down = descending(axes[axis].key);
    std::optional<double> best;
    for (double v : axes[axis].values) {
        const bool before = down ? v > point[axis] : v < point[axis];
        if (before && (!best || (down ? v < *best : v > *best))) best = v;
    }
    if (!best) return std::nullopt;
    auto p = point;
    p[axis] = *best;
    return p;
}

inline std::vector<std::vector<double>> points(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& a : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& p : out)
            for (double v : a.values) {
                next.push_back(p);
                next.back().push_back(v);
            }
        out = std::move(next);
    }
    return out;
}

inline int total_inner(const SolverResult& r) {
    return std::accumulate(r.inner_iterations.begin(), r.inner_iterations.end(), 0);
}

inline ExperimentRow row_of(const NetworkScenario& s, const SolverResult& r, const std::string& tag) {
    ExperimentRow row;
    row.solver = tag;
    row.sum_rate = r.sum_rate;
    row.feasible = r.feasible;
    row.outage = r.outage;
    row.failed = r.failed;
    row.iterations = r.iterations;
    row.inner_iterations = total_inner(r);
    row.overhead_kb = signaling_overhead(s, tag, {r.iterations, row.inner_iterations});
    row.wall_seconds = r.wall_seconds;
    row.diagnostics = r.diagnostics;
    return row;
}

inline std::vector<ExperimentRow> failed_rows(const std::vector<std::string>& solvers, const std::string& why) {
    std::vector<ExperimentRow> rows;
    for (const auto& tag : solvers) {
        ExperimentRow row;
        row.solver = tag;
        row.failed = true;
        row.outage = true;
        row.diagnostics = why;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// One trial over the sweep points in `order`; rows come back indexed by point.
inline std::vector<std::vector<ExperimentRow>> run_trial(const ExperimentSpec& e, const ExperimentPreset& preset,
                                                         const std::vector<std::vector<double>>& pts,
                                                         const std::vector<std::size_t>& order, int trial) {
    const std::uint64_t seed = e.seed + static_cast<std::uint64_t>(trial);
    std::vector<std::vector<ExperimentRow>> out(pts.size());
    // final allocation per (point, solver)
    std::map<std::pair<std::vector<double>, std::string>, AllocationState> done;
    for (std::size_t p : order) {
        std::vector<ExperimentRow> rows;
        try {
            const ScenarioConfig cfg = apply_point(e.base, e.axes, pts[p]);
            const NetworkScenario s = generate_scenario(cfg, seed);
            if (preset.accounting_only) {
                for (const auto& tag : e.solvers) {
                    ExperimentRow row;
                    row.solver = tag;
                    row.iterations = tag == "crm" ? 1 : 0;
                    row.inner_iterations = tag == "crm" ? 0 : e.modeled_inner;
                    row.overhead_kb = signaling_overhead(s, tag, {row.iterations, row.inner_iterations});
                    row.sum_rate = std::nan("");
                    rows.push_back(std::move(row));
                }
            } else {
                const ChannelState ch = generate_channels(s, seed);
                SolveOptions so;
                so.eps = e.eps;
                so.max_iter = e.max_iter;
                // best-merit neighbour per solver, if any
                std::map<std::string, AllocationState> starts;
                for (const auto& tag : e.solvers) {
                    std::optional<Merit> best;
                    for (std::size_t a = 0; a < e.axes.size(); ++a) {
                        if (!chainable(e.axes[a].key)) continue;
                        const auto prev = predecessor(e.axes, pts[p], a);
                        if (!prev) continue;
                        const auto it = done.find({*prev, tag});
                        if (it == done.end()) continue;
                        SolverResult probe;
                        probe.alloc = it->second;
                        finalize(probe, s, ch);
                        const Merit m = Merit::of(s, probe.user_rates);
                        if (!best || m.better_than(*best, 0.0)) {
                            best = m;
                            starts[tag] = it->second;
                        }
                    }
                }
                // solvers without a warm start share their staged runs
                std::vector<std::string> cold;
                for (const auto& tag : e.solvers)
                    if (!starts.contains(tag)) cold.push_back(tag);
                auto cold_results = run_solvers(s, ch, cold, so);
                for (const auto& tag : e.solvers) {
                    SolverResult r;
                    if (auto it = starts.find(tag); it != starts.end()) {
                        so.warm = &it->second;
                        r = run_solver(s, ch, tag, so);
                        so.warm = nullptr;
                    } else {
                        r = std::move(cold_results[std::find(cold.begin(), cold.end(), tag) - cold.begin()]);
                    }
                    rows.push_back(row_of(s, r, tag));
                    done[{pts[p], tag}] = std::move(r.alloc);
                }
            }
        } catch (const std::exception& ex) {
            rows = failed_rows(e.solvers, ex.what());
        }
        for (auto& r : rows) {
            r.point = pts[p];
            r.trial = trial;
            r.seed = seed;
        }
        out[p] = std::move(rows);
    }
    return out;
}

}  // namespace experiment_detail

/// Runs every (point, trial, solver). Trials run concurrently; rows come out in
/// sweep x trial x solver order whatever the completion order.
inline ExperimentResult run_experiment(const ExperimentSpec& e) {
    using namespace experiment_detail;
    validate(e);
    const ExperimentPreset& preset = experiment_preset(e.name);
    const auto pts = points(e.axes);
    for (const auto& p : pts) apply_point(e.base, e.axes, p);  // config errors abort before any trial

    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // lexicographic in the chain direction of each budget or rate axis
    auto rank = [&](std::size_t p) {
        std::vector<double> r;
        for (std::size_t a = 0; a < e.axes.size(); ++a)
            if (chainable(e.axes[a].key)) r.push_back(descending(e.axes[a].key) ? -pts[p][a] : pts[p][a]);
        return r;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });

    const int workers = std::max(1, e.threads > 0 ? e.threads : static_cast<int>(std::thread::hardware_concurrency()));
    std::vector<std::vector<std::vector<ExperimentRow>>> by_trial(e.trials);
    for (int start = 0; start < e.trials; start += workers) {
        std::vector<std::future<std::vector<std::vector<ExperimentRow>>>> jobs;
        for (int t = start; t < std::min(e.trials, start + workers); ++t)
            jobs.push_back(std::async(std::launch::async, run_trial, std::cref(e), std::cref(preset), std::cref(pts),
                                      std::cref(order), t));
        for (int t = start; t < std::min(e.trials, start + workers); ++t) by_trial[t] = jobs[t - start].get();
    }

    ExperimentResult res;
    res.timing = e.timing;
    for (const auto& a : e.axes) res.axis_keys.push_back(a.key);
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (int t = 0; t < e.trials; ++t)
            for (auto& r : by_trial[t][p]) res.rows.push_back(std::move(r));
    return res;
}

inline void write_csv(std::ostream& os, const ExperimentResult& r) {
    os.precision(12);
    for (const auto& k : r.axis_keys) os << k << ',';
    os << "trial,seed,solver,sum_rate,feasible,outage,failed,iterations,inner_iterations,overhead_kb,wall_time\n";
    for (const auto& row : r.rows) {
        for (double v : row.point) os << v << ',';
        os << row.trial << ',' << row.seed << ',' << row.solver << ',';
        if (std::isnan(row.sum_rate))
            os << ',';
        else
            os << row.sum_rate << ',';
        os << row.feasible << ',' << row.outage << ',' << row.failed << ',' << row.iterations << ','
           << row.inner_iterations << ',' << row.overhead_kb << ',';
        if (r.timing) os << row.wall_seconds;
        os << '\n';
    }
}

/// Mean sum rate per (point, solver) counting outage rows as zero, and outage share.
struct PointSummary {
    std::vector<double> point;
    std::string solver;
    double mean_rate = 0.0;
    double outage = 0.0;
    int runs = 0;
    int failures = 0;
};

inline std::vector<PointSummary> summarize(const ExperimentResult& r) {
    std::vector<PointSummary> out;
    for (const auto& row : r.rows) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const PointSummary& s) { return s.point == row.point && s.solver == row.solver; });
        if (it == out.end()) {
            out.push_back({row.point, row.solver});
            it = std::prev(out.end());
        }
        ++it->runs;
        if (row.failed) ++it->failures;
        if (!row.outage && !row.failed && !std::isnan(row.sum_rate)) it->mean_rate += row.sum_rate;
        if (row.outage) it->outage += 1.0;
    }
    for (auto& s : out) {
        s.mean_rate /= s.runs;
        s.outage /= s.runs;
    }
    return out;
}

}  // namespace softran
