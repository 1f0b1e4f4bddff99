// Straight-from-definition reference evaluators used as test oracles.
// Deliberately loop-heavy and cache-free; they share no code with the library
// beyond the data containers.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "softran/allocation.hpp"
#include "softran/scenario.hpp"

namespace oracle {

using namespace softran;

inline double gain(const ChannelState& ch, const AllocationState& a, int i, int b, int n, int rx, int beam) {
    const cvec& h = ch.h(i, b, n, rx);
    const cvec& w = a.w[a.dims.at(i, b, n, beam)];
    std::complex<double> acc = 0.0;
    for (int m = 0; m < h.size(); ++m) acc += std::conj(h[m]) * w[m];
    return std::norm(acc);
}

/// True when user `hi` is above `lo` in the SIC order of (i, n).
inline bool above(const ChannelState& ch, int i, int n, int hi, int lo) {
    const Dims& d = ch.dims();
    auto avg = [&](int k) {
        double s = 0.0;
        for (int b = 0; b < d.bs; ++b)
            for (int m = 0; m < d.antennas; ++m) s += std::norm(ch.h(i, b, n, k)[m]);
        return s / d.bs;
    };
    const double gh = avg(hi), gl = avg(lo);
    return gh > gl || (gh == gl && hi < lo);
}

inline double rho(const AllocationState& a, int i, int b, int n, int k) { return a.rho[a.dims.at(i, b, n, k)]; }

inline double i_noma(const ChannelState& ch, const AllocationState& a, int i, int b, int n, int k) {
    double s = 0.0;
    for (int kp = 0; kp < a.dims.users; ++kp) {
        if (kp == k || !above(ch, i, n, kp, k)) continue;
        for (int bp = 0; bp < a.dims.bs; ++bp)
            s += rho(a, i, b, n, k) * rho(a, i, b, n, kp) * rho(a, i, bp, n, kp) * gain(ch, a, i, bp, n, k, kp);
    }
    return s;
}

inline double i_inter(const ChannelState& ch, const AllocationState& a, int i, int b, int n, int k) {
    double s = 0.0;
    for (int kp = 0; kp < a.dims.users; ++kp) {
        if (kp == k) continue;
        for (int bp = 0; bp < a.dims.bs; ++bp)
            s += rho(a, i, b, n, k) * (1.0 - rho(a, i, b, n, kp)) * rho(a, i, bp, n, kp) * gain(ch, a, i, bp, n, k, kp);
    }
    return s;
}

/// Signal of `src` received by `rx` summed over all BSs that schedule `src`.
inline double received(const ChannelState& ch, const AllocationState& a, int i, int n, int rx, int src) {
    double s = 0.0;
    for (int bp = 0; bp < a.dims.bs; ++bp) s += rho(a, i, bp, n, src) * gain(ch, a, i, bp, n, rx, src);
    return s;
}

inline double sinr(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a, int i, int b, int n,
                   int k) {
    return received(ch, a, i, n, k, k) / (i_noma(ch, a, i, b, n, k) + i_inter(ch, a, i, b, n, k) + s.noise_w);
}

inline std::vector<double> rates(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a) {
    const Dims& d = a.dims;
    std::vector<double> r(d.users, 0.0);
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b)
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k)
                    r[k] += a.x[d.at(i, b, n, k)] * std::log2(1.0 + sinr(s, ch, a, i, b, n, k));
    return r;
}

inline double sum_rate(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a) {
    double t = 0.0;
    for (double v : rates(s, ch, a)) t += v;
    return t;
}

/// Worst residual per constraint family, in the same units as the library report.
inline std::map<std::string, double> worst_residuals(const NetworkScenario& s, const ChannelState& ch,
                                                     const AllocationState& a) {
    const Dims& d = a.dims;
    std::map<std::string, double> w;
    auto upd = [&](const std::string& f, double v) {
        auto it = w.find(f);
        if (it == w.end() || v > it->second) w[f] = v;
    };
    std::vector<double> mv(s.num_mvnos, 0.0);
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b) {
            double p = 0.0;
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) {
                    const double q = rho(a, i, b, n, k) * a.w[d.at(i, b, n, k)].squaredNorm();
                    p += q;
                    mv[s.mvno_of_user[k]] += q;
                }
            upd("bs_power", p - s.p_max_bs[i * d.bs + b]);
        }
    for (int v = 0; v < s.num_mvnos; ++v) upd("mvno_power", mv[v] - s.p_max_mvno[v]);
    const auto r = rates(s, ch, a);
    for (int k = 0; k < d.users; ++k) upd("min_rate", s.r_min_mvno[s.mvno_of_user[k]] - r[k]);
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b)
            for (int n = 0; n < d.subs; ++n) {
                double load = 0.0;
                for (int k = 0; k < d.users; ++k) {
                    load += rho(a, i, b, n, k);
                    for (int kp = 0; kp < d.users; ++kp) {
                        if (kp == k) continue;
                        if (above(ch, i, n, kp, k)) {
                            const double leak = rho(a, i, b, n, k) * rho(a, i, b, n, kp) * gain(ch, a, i, b, n, k, kp);
                            const double own = rho(a, i, b, n, k) * gain(ch, a, i, b, n, k, k);
                            upd("noma_power_order", (leak - own) / s.noise_w);
                        } else {
                            const double den_k = i_noma(ch, a, i, b, n, k) + i_inter(ch, a, i, b, n, k) + s.noise_w;
                            const double den_kp =
                                i_noma(ch, a, i, b, n, kp) + i_inter(ch, a, i, b, n, kp) + s.noise_w;
                            const double g_k = received(ch, a, i, n, k, kp) / den_k;
                            const double g_kp = received(ch, a, i, n, kp, kp) / den_kp;
                            upd("sic_sinr_order",
                                rho(a, i, b, n, k) * rho(a, i, b, n, kp) * g_kp - rho(a, i, b, n, k) * g_k);
                        }
                    }
                }
                upd("noma_cap", load - s.noma_cap);
            }
    for (int k = 0; k < d.users && d.inps > 1; ++k)
        for (int i = 0; i < d.inps; ++i)
            for (int j = 0; j < d.inps; ++j) {
                if (i == j) continue;
                for (int b = 0; b < d.bs; ++b)
                    for (int n = 0; n < d.subs; ++n)
                        for (int bj = 0; bj < d.bs; ++bj)
                            for (int nj = 0; nj < d.subs; ++nj)
                                upd("one_inp", rho(a, i, b, n, k) + rho(a, j, bj, nj, k) - 1.0);
            }
    for (int i = 0; i < d.inps; ++i)
        for (int n = 0; n < d.subs; ++n)
            for (int k = 0; k < d.users; ++k) {
                double sel = 0.0;
                for (int b = 0; b < d.bs; ++b) {
                    sel += a.x[d.at(i, b, n, k)];
                    upd("x_rho_link", a.x[d.at(i, b, n, k)] - rho(a, i, b, n, k));
                }
                upd("nos_unique", sel - 1.0);
            }
    return w;
}

}  // namespace oracle
