// Per-(InP, subcarrier) evaluation. Rates and ordering constraints of one cell
// depend only on that cell's beams and indicators, which keeps local moves cheap.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "softran/allocation.hpp"
#include "softran/scenario.hpp"

namespace softran::cell {

/// Noise-normalized gains |h_{b,rx}^H w_{b,beam}|^2 / N0 of one cell.
class Gains {
public:
    Gains(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a, int inp, int sub)
        : s_(s), ch_(ch), a_(a), i_(inp), n_(sub), B_(s.dims.bs), K_(s.dims.users) {
        g_.assign(static_cast<std::size_t>(B_) * K_ * K_, 0.0);
        for (int b = 0; b < B_; ++b)
            for (int beam = 0; beam < K_; ++beam) refresh(b, beam);
    }

    void refresh(int b, int beam) {
        const cvec& w = a_.w[s_.dims.at(i_, b, n_, beam)];
        const bool zero = w.isZero(0.0);
        for (int rx = 0; rx < K_; ++rx)
            g_[idx(b, rx, beam)] = zero ? 0.0 : std::norm(ch_.h(i_, b, n_, rx).dot(w)) / s_.noise_w;
    }

    double operator()(int b, int rx, int beam) const { return g_[idx(b, rx, beam)]; }

    double rho(int b, int k) const { return a_.rho[s_.dims.at(i_, b, n_, k)]; }
    double x(int b, int k) const { return a_.x[s_.dims.at(i_, b, n_, k)]; }

    /// Copies of `beam` over every BS that schedules it, received by `rx`.
    double copies(int rx, int beam) const {
        double acc = 0.0;
        for (int b = 0; b < B_; ++b) {
            const double r = rho(b, beam);
            if (r != 0.0) acc += r * (*this)(b, rx, beam);
        }
        return acc;
    }

    /// Interference of `rx` at the viewpoint of BS b, noise units.
    double interference(int b, int rx) const {
        const double rk = rho(b, rx);
        if (rk == 0.0) return 0.0;
        double acc = 0.0;
        for (int kp = 0; kp < K_; ++kp) {
            if (kp == rx) continue;
            const double r = rho(b, kp);
            const double c = (1.0 - r) + (ch_.stronger(i_, n_, kp, rx) ? r : 0.0);
            if (c != 0.0) acc += c * copies(rx, kp);
        }
        return rk * acc;
    }

    double sinr(int b, int rx) const {
        const double num = copies(rx, rx);
        return num == 0.0 ? 0.0 : num / (interference(b, rx) + 1.0);
    }

    /// Rate counted for each user on this cell.
    std::vector<double> rates() const {
        std::vector<double> r(K_, 0.0);
        for (int b = 0; b < B_; ++b)
            for (int k = 0; k < K_; ++k) {
                const double xv = x(b, k);
                if (xv != 0.0) r[k] += xv * std::log2(1.0 + sinr(b, k));
            }
        return r;
    }

    int inp() const { return i_; }
    int sub() const { return n_; }

private:
    std::size_t idx(int b, int rx, int beam) const {
        return (static_cast<std::size_t>(b) * K_ + rx) * K_ + beam;
    }
    const NetworkScenario& s_;
    const ChannelState& ch_;
    const AllocationState& a_;
    int i_, n_, B_, K_;
    std::vector<double> g_;
};

/// Worst NOMA power-order and SIC-order residuals of one cell (report units).
struct OrderResidual {
    double power_order = -1e300;
    double sic_order = -1e300;
};

inline OrderResidual order_residual(const NetworkScenario& s, const ChannelState& ch, const Gains& g) {
    OrderResidual out;
    const int B = s.dims.bs, K = s.dims.users;
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < K; ++k) {
            const double rk = g.rho(b, k);
            for (int kp = 0; kp < K; ++kp) {
                if (kp == k) continue;
                const double rkp = g.rho(b, kp);
                if (ch.stronger(g.inp(), g.sub(), kp, k)) {
                    out.power_order = std::max(out.power_order, rk * rkp * g(b, k, kp) - rk * g(b, k, k));
                } else if (rk != 0.0 && rkp != 0.0) {
                    const double own = g.copies(kp, kp);
                    const double own_sinr = own == 0.0 ? 0.0 : own / (g.interference(b, kp) + 1.0);
                    const double dec = g.copies(k, kp);
                    const double dec_sinr = dec == 0.0 ? 0.0 : dec / (g.interference(b, k) + 1.0);
                    out.sic_order = std::max(out.sic_order, rk * rkp * own_sinr - rk * dec_sinr);
                } else {
                    out.sic_order = std::max(out.sic_order, 0.0);
                }
            }
        }
    return out;
}

/// Restores both ordering constraints on one cell. Power order: walking from the
/// weakest user up, any stronger co-scheduled beam that leaks more than the weak
/// user's own beam is scaled down to the leak limit. SIC order: a weak user that
/// a stronger co-scheduled user cannot decode as well as it decodes itself is
/// dropped from that BS; its viewpoint moves to another serving BS if it has one.
/// Only powers and indicators decrease, so budgets stay satisfied.
/// `g` must be built over `a` for cell (i, n); it is kept current.
inline void repair(const NetworkScenario& s, const ChannelState& ch, AllocationState& a, int i, int n, Gains& g) {
    const Dims& d = s.dims;
    const int B = d.bs, K = d.users;
    const auto& order = ch.order(i, n);
    constexpr double shrink = 1.0 - 1e-9;
    for (int round = 0; round <= B * K; ++round) {
        for (int r = K - 1; r >= 0; --r) {
            const int w = order[r];
            for (int b = 0; b < B; ++b) {
                if (g.rho(b, w) == 0.0) continue;
                for (int q = 0; q < r; ++q) {
                    const int st = order[q];
                    if (g.rho(b, st) == 0.0) continue;
                    const double leak = g(b, w, st), own = g(b, w, w);
                    if (leak <= own) continue;
                    cvec& beam = a.w[d.at(i, b, n, st)];
                    beam *= own > 0.0 ? std::sqrt(own / leak) * shrink : 0.0;
                    g.refresh(b, st);
                }
            }
        }
        bool dropped = false;
        for (int b = 0; b < B && !dropped; ++b)
            for (int q = 0; q < K && !dropped; ++q) {
                const int st = order[q];
                if (g.rho(b, st) == 0.0) continue;
                for (int r = q + 1; r < K && !dropped; ++r) {
                    const int w = order[r];
                    if (g.rho(b, w) == 0.0) continue;
                    const double own = g.copies(w, w);
                    if (own == 0.0) continue;
                    const double own_sinr = own / (g.interference(b, w) + 1.0);
                    const double dec_sinr = g.copies(st, w) / (g.interference(b, st) + 1.0);
                    if (own_sinr - dec_sinr <= 1e-9) continue;
                    const std::size_t f = d.at(i, b, n, w);
                    const bool viewed = a.x[f] != 0.0;
                    a.rho[f] = a.x[f] = 0.0;
                    a.w[f].setZero();
                    g.refresh(b, w);
                    if (viewed)
                        for (int bp = 0; bp < B; ++bp)
                            if (a.rho[d.at(i, bp, n, w)] != 0.0) {
                                a.x[d.at(i, bp, n, w)] = 1.0;
                                break;
                            }
                    dropped = true;
                }
            }
        if (!dropped) return;
    }
}

inline void repair(const NetworkScenario& s, const ChannelState& ch, AllocationState& a, int i, int n) {
    Gains g(s, ch, a, i, n);
    repair(s, ch, a, i, n, g);
}

/// Scales beams down so every BS and MVNO budget holds.
inline void fit_budgets(const NetworkScenario& s, AllocationState& a) {
    const Dims& d = s.dims;
    constexpr double shrink = 1.0 - 1e-12;
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b) {
            double used = 0.0;
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) used += a.power(d.at(i, b, n, k));
            if (used <= s.bs_budget(i, b)) continue;
            const double c = std::sqrt(s.bs_budget(i, b) / used) * shrink;
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) a.w[d.at(i, b, n, k)] *= c;
        }
    std::vector<double> used(s.num_mvnos, 0.0);
    for (std::size_t f = 0; f < d.entries(); ++f) used[s.mvno_of_user[d.entry(f).user]] += a.power(f);
    for (std::size_t f = 0; f < d.entries(); ++f) {
        const int v = s.mvno_of_user[d.entry(f).user];
        if (used[v] > s.p_max_mvno[v]) a.w[f] *= std::sqrt(s.p_max_mvno[v] / used[v]) * shrink;
    }
}

/// Budgets first, then both ordering constraints cell by cell; unscheduled beams are cleared.
inline void make_feasible(const NetworkScenario& s, const ChannelState& ch, AllocationState& a) {
    const Dims& d = s.dims;
    for (std::size_t f = 0; f < d.entries(); ++f)
        if (a.rho[f] == 0.0) {
            a.w[f].setZero();
            a.x[f] = 0.0;
        }
    fit_budgets(s, a);
    for (int i = 0; i < d.inps; ++i)
        for (int n = 0; n < d.subs; ++n) repair(s, ch, a, i, n);
}

/// Per-user rates summed over every cell.
inline std::vector<double> user_totals(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a) {
    std::vector<double> r(s.dims.users, 0.0);
    for (int i = 0; i < s.dims.inps; ++i)
        for (int n = 0; n < s.dims.subs; ++n) {
            const auto c = Gains(s, ch, a, i, n).rates();
            for (int k = 0; k < s.dims.users; ++k) r[k] += c[k];
        }
    return r;
}

}  // namespace softran::cell
