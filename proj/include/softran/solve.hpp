// Solver selection by tag and the nearest-femto baseline.
#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "softran/crm.hpp"
#include "softran/sca.hpp"

namespace softran {

inline constexpr double kFemtoReach = 50.0;  // meters

/// Home BS per user (flat inp * bs_per_inp + bs), -1 when unserved. A user
/// picks the nearest femto BS within reach, otherwise the nearest macro BS.
/// Each BS takes at most noma_cap users, lower user index first; a user
/// turned away by a full femto BS falls back to the nearest macro BS.
inline std::vector<int> heuristic_home(const NetworkScenario& s) {
    const Dims& d = s.dims;
    std::vector<int> load(s.p_max_bs.size(), 0), home(d.users, -1);
    for (int k = 0; k < d.users; ++k) {
        const Point u = s.layout.users[k];
        int femto = -1, macro = -1;
        double df = std::numeric_limits<double>::infinity(), dm = df;
        for (int i = 0; i < d.inps; ++i)
            for (int b = 0; b < d.bs; ++b) {
                const int j = s.bs_index(i, b);
                const double dist = distance(u, s.layout.bs[j]);
                if (b == 0 && dist < dm) {
                    dm = dist;
                    macro = j;
                } else if (b != 0 && dist < df) {
                    df = dist;
                    femto = j;
                }
            }
        for (int j : {df < kFemtoReach ? femto : -1, macro}) {
            if (j < 0 || load[j] >= s.noma_cap) continue;
            ++load[j];
            home[k] = j;
            break;
        }
    }
    return home;
}

/// Assignment skeleton of the baseline: every user on every subcarrier of its
/// home BS, viewpoint there; beams left empty.
inline AllocationState heuristic_nos(const NetworkScenario& s, const ChannelState& /*channels*/) {
    const Dims& d = s.dims;
    AllocationState a = AllocationState::zeros(d);
    const auto home = heuristic_home(s);
    for (int k = 0; k < d.users; ++k) {
        if (home[k] < 0) continue;
        const int i = home[k] / d.bs, b = home[k] % d.bs;
        for (int n = 0; n < d.subs; ++n) {
            const std::size_t f = d.at(i, b, n, k);
            a.rho[f] = a.x[f] = 1.0;
        }
    }
    return a;
}

inline constexpr std::string_view kSolverTags[] = {"crm", "scrm", "heuristic-nos", "no-comp"};

inline bool known_solver(std::string_view tag) {
    return std::find(std::begin(kSolverTags), std::end(kSolverTags), tag) != std::end(kSolverTags);
}

struct SolveOptions {
    double eps = 1e-3;
    int max_iter = 50;
    const AllocationState* warm = nullptr;  // feasible start from a neighbouring sweep point
};

namespace solve_detail {

inline ScrmOptions scrm_options(const SolveOptions& o, NosMode mode) {
    ScrmOptions so;
    so.eps = o.eps;
    so.outer_max = o.max_iter;
    so.nos = mode;
    return so;
}

inline void absorb(SolverResult& into, const SolverResult& stage) {
    into.iterations += stage.iterations;
    into.wall_seconds += stage.wall_seconds;
    into.inner_iterations.insert(into.inner_iterations.end(), stage.inner_iterations.begin(),
                                 stage.inner_iterations.end());
    into.messages.insert(into.messages.end(), stage.messages.begin(), stage.messages.end());
}

inline bool better(const NetworkScenario& s, const SolverResult& a, const SolverResult& b) {
    return Merit::of(s, a.user_rates).better_than(Merit::of(s, b.user_rates), 0.0);
}

inline SolverResult no_comp(const NetworkScenario& s, const ChannelState& ch, const SolveOptions& o) {
    auto r = semi_centralized_solve(s, ch, scrm_options(o, NosMode::single_bs), o.warm);
    r.solver = "no-comp";
    return r;
}

inline SolverResult heuristic(const NetworkScenario& s, const ChannelState& ch, const SolveOptions& o) {
    auto so = scrm_options(o, NosMode::fixed_home);
    so.home = heuristic_home(s);
    AllocationState start = heuristic_nos(s, ch);
    equal_power_beams(s, ch, start);
    auto r = semi_centralized_solve(s, ch, so, &start);
    if (o.warm) {
        auto w = semi_centralized_solve(s, ch, so, o.warm);
        if (better(s, w, r)) std::swap(r, w);
    }
    r.solver = "heuristic-nos";
    return r;
}

/// Both baselines, then the unrestricted method from the better of them.
inline std::vector<SolverResult> scrm_stages(const NetworkScenario& s, const ChannelState& ch, const SolveOptions& o) {
    SolveOptions cold = o;
    cold.warm = nullptr;
    std::vector<SolverResult> out{no_comp(s, ch, cold), heuristic(s, ch, cold)};
    const SolverResult* start = better(s, out[1], out[0]) ? &out[1] : &out[0];
    const AllocationState* init = &start->alloc;
    if (o.warm) {
        SolverResult w;
        w.alloc = *o.warm;
        finalize(w, s, ch);
        if (Merit::of(s, w.user_rates).better_than(Merit::of(s, start->user_rates), 0.0)) init = o.warm;
    }
    auto r = semi_centralized_solve(s, ch, scrm_options(o, NosMode::optimized), init);
    for (const auto& stage : out) absorb(r, stage);
    r.solver = "scrm";
    out.push_back(std::move(r));
    return out;
}

}  // namespace solve_detail

/// Runs several solvers by tag ("crm", "scrm", "heuristic-nos", "no-comp")
/// on one instance, sharing the staged runs between them. Results follow `tags`.
inline std::vector<SolverResult> run_solvers(const NetworkScenario& s, const ChannelState& ch,
                                             std::span<const std::string> tags, const SolveOptions& o = {}) {
    using namespace solve_detail;
    for (const auto& t : tags)
        if (!known_solver(t)) throw std::invalid_argument("unknown solver tag: " + t);
    const bool staged = std::any_of(tags.begin(), tags.end(), [](const std::string& t) { return t == "scrm" || t == "crm"; });
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SolverResult> stages;
    if (staged) stages = scrm_stages(s, ch, o);
    const double staged_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<SolverResult> out;
    for (const auto& t : tags) {
        if (t == "scrm") {
            out.push_back(stages.back());
        } else if (t == "no-comp") {
            out.push_back(o.warm || !staged ? no_comp(s, ch, o) : stages[0]);
        } else if (t == "heuristic-nos") {
            out.push_back(o.warm || !staged ? heuristic(s, ch, o) : stages[1]);
        } else {
            const auto t1 = std::chrono::steady_clock::now();
            std::vector<AllocationState> seeds;
            for (const auto& st : stages) seeds.push_back(st.alloc);
            if (o.warm) seeds.push_back(*o.warm);
            CrmOptions co;
            co.eps = o.eps;
            auto r = centralized_solve(s, ch, co, seeds);
            r.wall_seconds =
                staged_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline SolverResult run_solver(const NetworkScenario& s, const ChannelState& ch, std::string_view tag,
                               const SolveOptions& o = {}) {
    const std::string t(tag);
    return std::move(run_solvers(s, ch, std::span(&t, 1), o).front());
}

}  // namespace softran
