// Solves one small instance with every solver and prints what each achieved.

#include <cstdio>

#include "softran/rrm.hpp"
#include "softran/solve.hpp"

int main() {
    using namespace softran;
    ScenarioConfig cfg;
    cfg.inps = 1;
    cfg.bs_per_inp = 2;
    cfg.subcarriers = 4;
    cfg.users = 6;
    cfg.antennas = 1;
    const auto s = generate_scenario(cfg, 7);
    const auto ch = generate_channels(s, 7);

    const std::vector<std::string> tags{"heuristic-nos", "no-comp", "scrm", "crm"};
    const auto results = run_solvers(s, ch, tags);
    std::printf("%-14s %10s %6s %6s %6s %10s %8s\n", "solver", "sum_rate", "feas", "outage", "iters", "kB", "seconds");
    for (std::size_t q = 0; q < tags.size(); ++q) {
        const auto& r = results[q];
        int inner = 0;
        for (int v : r.inner_iterations) inner += v;
        std::printf("%-14s %10.4f %6d %6d %6d %10.3f %8.3f\n", tags[q].c_str(), r.sum_rate, r.feasible, r.outage,
                    r.iterations, signaling_overhead(s, tags[q], {r.iterations, inner}), r.wall_seconds);
    }
    const auto& crm = results.back();
    if (crm.certified) std::printf("crm upper bound %.4f\n", crm.upper_bound);
}
