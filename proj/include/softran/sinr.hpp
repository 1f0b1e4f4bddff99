// Viewpoint SINR model, rates, and the full constraint report.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "softran/allocation.hpp"
#include "softran/scenario.hpp"

namespace softran {

/// |h^H w|^2 between the channel of user `rx` and the beam of user `beam`, same BS and subcarrier.
inline double cross_gain(const ChannelState& ch, const AllocationState& a, int i, int b, int n, int rx, int beam) {
    return std::norm(ch.h(i, b, n, rx).dot(a.w[a.dims.at(i, b, n, beam)]));
}

/// Cached cross gains for every (InP, BS, subcarrier, receiver, beam owner).
class LinkGains {
public:
    LinkGains(const ChannelState& ch, const AllocationState& a) : d_(ch.dims()) {
        g_.assign(d_.entries() * d_.users, 0.0);
        for (int i = 0; i < d_.inps; ++i)
            for (int b = 0; b < d_.bs; ++b)
                for (int n = 0; n < d_.subs; ++n)
                    for (int beam = 0; beam < d_.users; ++beam) refresh(ch, a, {i, b, n, beam});
    }

    double operator()(int i, int b, int n, int rx, int beam) const { return g_[d_.at(i, b, n, rx) * d_.users + beam]; }

    /// Recomputes the column for one beam after it changed.
    void refresh(const ChannelState& ch, const AllocationState& a, const Entry& e) {
        const cvec& w = a.w[d_.at(e)];
        if (w.isZero(0.0)) {
            for (int rx = 0; rx < d_.users; ++rx) g_[d_.at(e.inp, e.bs, e.sub, rx) * d_.users + e.user] = 0.0;
            return;
        }
        for (int rx = 0; rx < d_.users; ++rx)
            g_[d_.at(e.inp, e.bs, e.sub, rx) * d_.users + e.user] = std::norm(ch.h(e.inp, e.bs, e.sub, rx).dot(w));
    }

private:
    Dims d_;
    std::vector<double> g_;
};

namespace detail {

template <class Gain>
double noma_sum(const ChannelState& ch, const AllocationState& a, const Gain& g, const Entry& e) {
    const Dims& d = a.dims;
    const double rk = a.rho[d.at(e)];
    if (rk == 0.0) return 0.0;
    double acc = 0.0;
    for (int kp = 0; kp < d.users; ++kp) {
        if (kp == e.user || !ch.stronger(e.inp, e.sub, kp, e.user)) continue;
        const double rkp = a.rho[d.at(e.inp, e.bs, e.sub, kp)];
        if (rkp == 0.0) continue;
        for (int bp = 0; bp < d.bs; ++bp) {
            const double r = a.rho[d.at(e.inp, bp, e.sub, kp)];
            if (r != 0.0) acc += rk * rkp * r * g(e.inp, bp, e.sub, e.user, kp);
        }
    }
    return acc;
}

template <class Gain>
double inter_sum(const AllocationState& a, const Gain& g, const Entry& e) {
    const Dims& d = a.dims;
    const double rk = a.rho[d.at(e)];
    if (rk == 0.0) return 0.0;
    double acc = 0.0;
    for (int kp = 0; kp < d.users; ++kp) {
        if (kp == e.user) continue;
        const double off = 1.0 - a.rho[d.at(e.inp, e.bs, e.sub, kp)];
        if (off == 0.0) continue;
        for (int bp = 0; bp < d.bs; ++bp) {
            const double r = a.rho[d.at(e.inp, bp, e.sub, kp)];
            if (r != 0.0) acc += rk * off * r * g(e.inp, bp, e.sub, e.user, kp);
        }
    }
    return acc;
}

/// Power of `beam`'s CoMP copies measured on the channels of `rx`.
template <class Gain>
double copies(const AllocationState& a, const Gain& g, int i, int n, int rx, int beam) {
    double acc = 0.0;
    for (int bp = 0; bp < a.dims.bs; ++bp) {
        const double r = a.rho[a.dims.at(i, bp, n, beam)];
        if (r != 0.0) acc += r * g(i, bp, n, rx, beam);
    }
    return acc;
}

}  // namespace detail

inline double noma_interference(const NetworkScenario&, const ChannelState& ch, const AllocationState& a,
                                const Entry& e) {
    auto g = [&](int i, int b, int n, int rx, int beam) { return cross_gain(ch, a, i, b, n, rx, beam); };
    return detail::noma_sum(ch, a, g, e);
}

inline double inter_interference(const NetworkScenario&, const ChannelState& ch, const AllocationState& a,
                                 const Entry& e) {
    auto g = [&](int i, int b, int n, int rx, int beam) { return cross_gain(ch, a, i, b, n, rx, beam); };
    return detail::inter_sum(a, g, e);
}

inline double sinr(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a, const Entry& e) {
    auto g = [&](int i, int b, int n, int rx, int beam) { return cross_gain(ch, a, i, b, n, rx, beam); };
    const double num = detail::copies(a, g, e.inp, e.sub, e.user, e.user);
    if (num == 0.0) return 0.0;
    return num / (detail::noma_sum(ch, a, g, e) + detail::inter_sum(a, g, e) + s.noise_w);
}

/// Batched evaluation over a cached gain table.
class RateEvaluator {
public:
    RateEvaluator(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a)
        : s_(s), ch_(ch), a_(a), g_(ch, a) {}

    const LinkGains& gains() const noexcept { return g_; }

    double signal(const Entry& e) const { return detail::copies(a_, g_, e.inp, e.sub, e.user, e.user); }
    double noma(const Entry& e) const { return detail::noma_sum(ch_, a_, g_, e); }
    double inter(const Entry& e) const { return detail::inter_sum(a_, g_, e); }
    double interference(const Entry& e) const { return noma(e) + inter(e); }
    double sinr(const Entry& e) const {
        const double num = signal(e);
        return num == 0.0 ? 0.0 : num / (interference(e) + s_.noise_w);
    }
    double rate(const Entry& e) const { return std::log2(1.0 + sinr(e)); }

    /// SINR at which `e.user` decodes the signal of `other` from the viewpoint of `e.bs`.
    double decode_sinr(const Entry& e, int other) const {
        const double num = detail::copies(a_, g_, e.inp, e.sub, e.user, other);
        return num == 0.0 ? 0.0 : num / (interference(e) + s_.noise_w);
    }

    std::vector<double> user_rates() const {
        const Dims& d = a_.dims;
        std::vector<double> r(d.users, 0.0);
        for (std::size_t f = 0; f < d.entries(); ++f)
            if (a_.x[f] != 0.0) {
                const Entry e = d.entry(f);
                r[e.user] += a_.x[f] * rate(e);
            }
        return r;
    }

    double sum_rate() const {
        double acc = 0.0;
        for (double r : user_rates()) acc += r;
        return acc;
    }

private:
    const NetworkScenario& s_;
    const ChannelState& ch_;
    const AllocationState& a_;
    LinkGains g_;
};

inline double sum_rate(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a) {
    return RateEvaluator(s, ch, a).sum_rate();
}

inline std::vector<double> user_rates(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a) {
    return RateEvaluator(s, ch, a).user_rates();
}

struct Residual {
    std::string key;
    double value = 0.0;
};

/// Residuals are lhs - rhs of each constraint in "<= 0" form. NOMA power order is in
/// units of the noise power, SIC order in SINR units, rates in bit/s/Hz, powers in W.
struct ConstraintReport {
    std::vector<Residual> bs_power;
    std::vector<Residual> mvno_power;
    std::vector<Residual> min_rate;
    std::vector<Residual> noma_power_order;
    std::vector<Residual> sic_sinr_order;
    std::vector<Residual> one_inp;
    std::vector<Residual> noma_cap;
    std::vector<Residual> x_rho_link;
    std::vector<Residual> nos_unique;
    double tol = 1e-6;
    bool feasible = true;

    template <class F>
    void for_each_family(F&& f) const {
        f("bs_power", bs_power);
        f("mvno_power", mvno_power);
        f("min_rate", min_rate);
        f("noma_power_order", noma_power_order);
        f("sic_sinr_order", sic_sinr_order);
        f("one_inp", one_inp);
        f("noma_cap", noma_cap);
        f("x_rho_link", x_rho_link);
        f("nos_unique", nos_unique);
    }

    static double worst(const std::vector<Residual>& fam) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& r : fam) m = std::max(m, r.value);
        return m;
    }
    double combinatorial_worst() const {
        return std::max({worst(one_inp), worst(noma_cap), worst(x_rho_link), worst(nos_unique)});
    }
    double power_worst() const { return std::max(worst(bs_power), worst(mvno_power)); }
    bool rates_met() const { return worst(min_rate) <= tol; }
    bool combinatorial_ok() const { return combinatorial_worst() <= 0.0; }

    std::map<std::string, double> flat() const {
        std::map<std::string, double> out;
        for_each_family([&](const char*, const std::vector<Residual>& fam) {
            for (const auto& r : fam) out[r.key] = r.value;
        });
        out["feasible"] = feasible ? 1.0 : 0.0;
        return out;
    }

    std::string to_text() const {
        std::ostringstream os;
        os.precision(12);
        for (const auto& [k, v] : flat()) os << k << '=' << v << '\n';
        return os.str();
    }
};

inline ConstraintReport check_feasibility(const NetworkScenario& s, const ChannelState& ch, const AllocationState& a,
                                          double tol = 1e-6) {
    const Dims& d = a.dims;
    RateEvaluator ev(s, ch, a);
    const LinkGains& g = ev.gains();
    ConstraintReport rep;
    rep.tol = tol;
    auto tag = [](const char* fam, std::initializer_list<int> idx) {
        std::string k = fam;
        char sep = '[';
        for (int v : idx) {
            k += sep;
            k += std::to_string(v);
            sep = ',';
        }
        return k + ']';
    };

    std::vector<double> mvno_used(s.num_mvnos, 0.0);
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b) {
            double used = 0.0;
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) {
                    const double p = a.power(d.at(i, b, n, k));
                    used += p;
                    mvno_used[s.mvno_of_user[k]] += p;
                }
            rep.bs_power.push_back({tag("bs_power", {i, b}), used - s.bs_budget(i, b)});
        }
    for (int v = 0; v < s.num_mvnos; ++v)
        rep.mvno_power.push_back({tag("mvno_power", {v}), mvno_used[v] - s.p_max_mvno[v]});

    const auto rates = ev.user_rates();
    for (int k = 0; k < d.users; ++k) rep.min_rate.push_back({tag("min_rate", {k}), s.r_min_of(k) - rates[k]});

    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b)
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) {
                    const double rk = a.rho[d.at(i, b, n, k)];
                    for (int kp = 0; kp < d.users; ++kp) {
                        if (kp == k) continue;
                        const double rkp = a.rho[d.at(i, b, n, kp)];
                        if (ch.stronger(i, n, kp, k)) {
                            // weak user k must receive its own beam at least as strongly as the leak of kp
                            const double lhs = rk * rkp * g(i, b, n, k, kp);
                            const double rhs = rk * g(i, b, n, k, k);
                            rep.noma_power_order.push_back(
                                {tag("noma_power_order", {i, b, n, k, kp}), (lhs - rhs) / s.noise_w});
                        } else {
                            // strong user k must decode kp at least as well as kp itself
                            const Entry ek{i, b, n, k}, ekp{i, b, n, kp};
                            const double lhs = rk * rkp * ev.decode_sinr(ekp, kp);
                            const double rhs = rk * ev.decode_sinr(ek, kp);
                            rep.sic_sinr_order.push_back({tag("sic_sinr_order", {i, b, n, k, kp}), lhs - rhs});
                        }
                    }
                }

    if (d.inps > 1)
        for (int k = 0; k < d.users; ++k) {
            std::vector<double> peak(d.inps, 0.0);
            for (int i = 0; i < d.inps; ++i)
                for (int b = 0; b < d.bs; ++b)
                    for (int n = 0; n < d.subs; ++n) peak[i] = std::max(peak[i], a.rho[d.at(i, b, n, k)]);
            std::sort(peak.rbegin(), peak.rend());
            rep.one_inp.push_back({tag("one_inp", {k}), peak[0] + peak[1] - 1.0});
        }

    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b)
            for (int n = 0; n < d.subs; ++n) {
                double load = 0.0;
                for (int k = 0; k < d.users; ++k) load += a.rho[d.at(i, b, n, k)];
                rep.noma_cap.push_back({tag("noma_cap", {i, b, n}), load - s.noma_cap});
            }

    for (std::size_t f = 0; f < d.entries(); ++f) {
        const Entry e = d.entry(f);
        rep.x_rho_link.push_back({tag("x_rho_link", {e.inp, e.bs, e.sub, e.user}), a.x[f] - a.rho[f]});
    }

    for (int i = 0; i < d.inps; ++i)
        for (int n = 0; n < d.subs; ++n)
            for (int k = 0; k < d.users; ++k) {
                double sel = 0.0;
                for (int b = 0; b < d.bs; ++b) sel += a.x[d.at(i, b, n, k)];
                rep.nos_unique.push_back({tag("nos_unique", {i, n, k}), sel - 1.0});
            }

    rep.feasible = true;
    rep.for_each_family([&](const char*, const std::vector<Residual>& fam) {
        for (const auto& r : fam)
            if (!(r.value <= tol)) rep.feasible = false;
    });
    return rep;
}

/// Total min-rate shortfall; zero when every user meets its MVNO threshold.
inline double rate_shortfall(const NetworkScenario& s, const std::vector<double>& rates) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) acc += std::max(0.0, s.r_min_of(static_cast<int>(k)) - rates[k]);
    return acc;
}

}  // namespace softran
