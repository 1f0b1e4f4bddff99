// Exhaustive reference for single-InP, single-antenna instances without
// minimum rates: every schedule and every beam power on a uniform grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracle.hpp"

namespace oracle {

/// Best sum rate with beam powers restricted to {0, 1/(L-1), ..., 1} x the BS budget.
/// Subcarriers couple only through the BS budgets, so each is tabulated by the
/// grid power it spends per BS and the tables are merged at the end.
inline double grid_optimum(const NetworkScenario& s, const ChannelState& ch, int levels = 17) {
    const Dims& d = s.dims;
    const int unit_max = levels - 1;
    const int B = d.bs, K = d.users;
    const int E = B * K;
    std::vector<std::vector<double>> table;  // per subcarrier, indexed by per-BS spend (mixed radix)
    int spend_radix = 1;
    for (int b = 0; b < B; ++b) spend_radix *= unit_max * s.noma_cap + 1;

    for (int n = 0; n < d.subs; ++n) {
        std::vector<double> best(static_cast<std::size_t>(spend_radix), -1.0);
        for (int mask = 0; mask < (1 << E); ++mask) {
            std::vector<int> on;
            std::vector<int> load(B, 0);
            for (int e = 0; e < E; ++e)
                if (mask >> e & 1) {
                    on.push_back(e);
                    ++load[e / K];
                }
            if (std::any_of(load.begin(), load.end(), [&](int l) { return l > s.noma_cap; })) continue;
            AllocationState a = AllocationState::zeros(d);
            for (int e : on) a.rho[d.at(0, e / K, n, e % K)] = 1.0;
            std::vector<int> lvl(on.size(), 0);
            while (true) {
                std::vector<int> spend(B, 0);
                for (std::size_t q = 0; q < on.size(); ++q) {
                    const int b = on[q] / K, k = on[q] % K;
                    a.w[d.at(0, b, n, k)][0] = std::sqrt(s.bs_budget(0, b) * lvl[q] / unit_max);
                    spend[b] += lvl[q];
                }
                bool ok = true;
                for (int b = 0; b < B && ok; ++b)
                    ok = spend[b] <= unit_max;
                for (int b = 0; b < B && ok; ++b)
                    for (int k = 0; k < K && ok; ++k)
                        for (int kp = 0; kp < K && ok; ++kp) {
                            if (kp == k || rho(a, 0, b, n, k) == 0.0 || rho(a, 0, b, n, kp) == 0.0) continue;
                            if (above(ch, 0, n, kp, k)) {
                                ok = gain(ch, a, 0, b, n, k, kp) <= gain(ch, a, 0, b, n, k, k) + 1e-9 * s.noise_w;
                            } else {
                                const double den_k = i_noma(ch, a, 0, b, n, k) + i_inter(ch, a, 0, b, n, k) + s.noise_w;
                                const double den_kp = i_noma(ch, a, 0, b, n, kp) + i_inter(ch, a, 0, b, n, kp) + s.noise_w;
                                const double own = received(ch, a, 0, n, kp, kp) / den_kp;
                                const double dec = received(ch, a, 0, n, k, kp) / den_k;
                                ok = own <= dec * (1.0 + 1e-9) + 1e-12;
                            }
                        }
                if (ok) {
                    double rate = 0.0;
                    for (int k = 0; k < K; ++k) {
                        double r = 0.0;
                        for (int b = 0; b < B; ++b)
                            if (rho(a, 0, b, n, k) != 0.0) r = std::max(r, std::log2(1.0 + sinr(s, ch, a, 0, b, n, k)));
                        rate += r;
                    }
                    int key = 0;
                    for (int b = B - 1; b >= 0; --b) key = key * (unit_max * s.noma_cap + 1) + spend[b];
                    best[static_cast<std::size_t>(key)] = std::max(best[static_cast<std::size_t>(key)], rate);
                }
                std::size_t q = 0;
                while (q < lvl.size() && ++lvl[q] > unit_max) lvl[q++] = 0;
                if (q == lvl.size()) break;
            }
        }
        table.push_back(std::move(best));
    }

    // merge subcarriers, tracking cumulative spend per BS capped at the budget
    const int radix = unit_max * s.noma_cap + 1;
    auto decode = [&](int key) {
        std::vector<int> v(B);
        for (int b = 0; b < B; ++b) {
            v[b] = key % radix;
            key /= radix;
        }
        return v;
    };
    int acc_radix = 1;
    for (int b = 0; b < B; ++b) acc_radix *= unit_max + 1;
    std::vector<double> acc(static_cast<std::size_t>(acc_radix), -1.0);
    acc[0] = 0.0;
    for (const auto& t : table) {
        std::vector<double> next(acc.size(), -1.0);
        for (int ka = 0; ka < acc_radix; ++ka) {
            if (acc[static_cast<std::size_t>(ka)] < 0.0) continue;
            std::vector<int> used(B);
            int tmp = ka;
            for (int b = 0; b < B; ++b) {
                used[b] = tmp % (unit_max + 1);
                tmp /= unit_max + 1;
            }
            for (int kt = 0; kt < static_cast<int>(t.size()); ++kt) {
                if (t[static_cast<std::size_t>(kt)] < 0.0) continue;
                const auto sp = decode(kt);
                int key = 0;
                bool fits = true;
                for (int b = B - 1; b >= 0; --b) {
                    const int u = used[b] + sp[b];
                    fits &= u <= unit_max;
                    key = key * (unit_max + 1) + std::min(u, unit_max);
                }
                if (!fits) continue;
                auto& slot = next[static_cast<std::size_t>(key)];
                slot = std::max(slot, acc[static_cast<std::size_t>(ka)] + t[static_cast<std::size_t>(kt)]);
            }
        }
        acc = std::move(next);
    }
    return *std::max_element(acc.begin(), acc.end());
}

}  // namespace oracle
