// Canonical monotone form of the relaxed allocation problem.
//
// A point z stacks, per entry (inp, bs, sub, user): the beam power along the
// matched-filter direction, the scheduling share rho, its complement rho_c, and
// the viewpoint share x; then the auxiliary slacks s0 (objective), s1 (one per
// user, minimum rate), s2 (one per NOMA power-order pair) and s3 (one per SIC
// order pair). Every function below is nondecreasing in every coordinate of z,
// and every constraint reads "increasing <= const" (normal set) or
// "increasing >= const" (conormal set). All powers are in units of the noise.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "softran/allocation.hpp"
#include "softran/polyblock.hpp"
#include "softran/scenario.hpp"
#include "softran/sinr.hpp"

namespace softran {

/// Two users sharing one (inp, bs, sub); `strong` is above `weak` in the SIC order.
struct OrderPair {
    int inp, bs, sub, weak, strong;
};

class MonotoneProblem {
public:
    struct Offsets {
        std::size_t power, rho, rho_c, x, s0, s1, s2, s3, size;
    };

    MonotoneProblem(const NetworkScenario& s, const ChannelState& ch)
        : s_(s), ch_(ch), d_(s.dims), g_(ch, s.noise_w) {
        const std::size_t E = d_.entries();
        const std::size_t K = static_cast<std::size_t>(d_.users);
        for (int i = 0; i < d_.inps; ++i)
            for (int b = 0; b < d_.bs; ++b)
                for (int n = 0; n < d_.subs; ++n)
                    for (int k = 0; k < d_.users; ++k)
                        for (int kp = k + 1; kp < d_.users; ++kp) {
                            const bool kp_up = ch.stronger(i, n, kp, k);
                            pairs_.push_back({i, b, n, kp_up ? k : kp, kp_up ? kp : k});
                        }

        off_.power = 0;
        off_.rho = E;
        off_.rho_c = 2 * E;
        off_.x = 3 * E;
        off_.s0 = 4 * E;
        off_.s1 = off_.s0 + 1;
        off_.s2 = off_.s1 + K;
        off_.s3 = off_.s2 + pairs_.size();
        off_.size = off_.s3 + pairs_.size();

        mask_ = vecd::Zero(static_cast<Eigen::Index>(off_.size));
        for (std::size_t f = 0; f < E; ++f) {
            const Entry e = d_.entry(f);
            mask_[idx(off_.power + f)] = s.beam_cap(e.inp, e.bs, e.user);
            mask_[idx(off_.rho + f)] = 1.0;
            mask_[idx(off_.rho_c + f)] = 1.0;
            mask_[idx(off_.x + f)] = 1.0;
        }
        // slack ranges from the increasing parts at the two box corners
        const vecd lo = vecd::Zero(mask_.size());
        vecd top = mask_;
        q_minus_top_ = q_minus(top);
        mask_[idx(off_.s0)] = std::max(q_minus_top_ - q_minus(lo), tiny);
        user_cap_.resize(K);
        for (int k = 0; k < d_.users; ++k) {
            user_cap_[k] = q_minus_user(top, k);
            mask_[idx(off_.s1 + k)] = std::max(user_cap_[k] - q_minus_user(lo, k), tiny);
        }
        leak_top_.resize(pairs_.size());
        sic_top_.resize(pairs_.size());
        for (std::size_t c = 0; c < pairs_.size(); ++c) {
            leak_top_[c] = noma_leak(top, c);
            sic_top_[c] = sic_plus(top, c);
            mask_[idx(off_.s2 + c)] = std::max(leak_top_[c] - noma_leak(lo, c), tiny);
            mask_[idx(off_.s3 + c)] = std::max(sic_top_[c] - sic_plus(lo, c), tiny);
        }
    }

    const Offsets& offsets() const noexcept { return off_; }
    const std::vector<OrderPair>& pairs() const noexcept { return pairs_; }
    std::size_t dim() const noexcept { return off_.size; }
    vecd upper() const { return mask_; }
    const vecd& mask() const noexcept { return mask_; }

    // ---- increasing building blocks -------------------------------------------------

    /// Copies of `beam`'s signal received on `rx`'s channels, noise units.
    double copies(const vecd& z, int i, int n, int rx, int beam) const {
        double acc = 0.0;
        for (int bp = 0; bp < d_.bs; ++bp) {
            const std::size_t f = d_.at(i, bp, n, beam);
            acc += rho(z, f) * power(z, f) * g(i, bp, n, rx, beam);
        }
        return acc;
    }

    /// NOMA plus inter-cell interference at a viewpoint, with (1 - rho) carried by rho_c.
    double interference(const vecd& z, const Entry& e) const {
        const double rk = rho(z, d_.at(e));
        if (rk == 0.0) return 0.0;
        double acc = 0.0;
        for (int kp = 0; kp < d_.users; ++kp) {
            if (kp == e.user) continue;
            const std::size_t f = d_.at(e.inp, e.bs, e.sub, kp);
            double coef = z[idx(off_.rho_c + f)];
            if (ch_.stronger(e.inp, e.sub, kp, e.user)) coef += rho(z, f);
            if (coef != 0.0) acc += coef * copies(z, e.inp, e.sub, e.user, kp);
        }
        return rk * acc;
    }

    double q_plus_user(const vecd& z, int k) const { return user_sum(z, k, true); }
    double q_minus_user(const vecd& z, int k) const { return user_sum(z, k, false); }
    double q_plus(const vecd& z) const {
        double acc = 0.0;
        for (int k = 0; k < d_.users; ++k) acc += q_plus_user(z, k);
        return acc;
    }
    double q_minus(const vecd& z) const {
        double acc = 0.0;
        for (int k = 0; k < d_.users; ++k) acc += q_minus_user(z, k);
        return acc;
    }
    double q_tilde_plus(const vecd& z) const { return q_plus(z) + z[idx(off_.s0)]; }
    double q_tilde_minus(const vecd& z) const { return q_minus(z) + z[idx(off_.s0)]; }

    /// Leak of the strong user's beam onto the weak user's channel, both scheduled.
    double noma_leak(const vecd& z, std::size_t c) const {
        const auto& p = pairs_[c];
        const std::size_t fw = d_.at(p.inp, p.bs, p.sub, p.weak), fs = d_.at(p.inp, p.bs, p.sub, p.strong);
        return rho(z, fw) * rho(z, fs) * power(z, fs) * g(p.inp, p.bs, p.sub, p.weak, p.strong);
    }
    /// The weak user's own beam on its own channel.
    double own_signal(const vecd& z, std::size_t c) const {
        const auto& p = pairs_[c];
        const std::size_t fw = d_.at(p.inp, p.bs, p.sub, p.weak);
        return rho(z, fw) * power(z, fw) * g(p.inp, p.bs, p.sub, p.weak, p.weak);
    }
    /// Cross-multiplied SIC order: the weak user's own decoding side.
    double sic_plus(const vecd& z, std::size_t c) const {
        const auto& p = pairs_[c];
        const Entry es{p.inp, p.bs, p.sub, p.strong};
        const double rs = rho(z, d_.at(es)), rw = rho(z, d_.at(p.inp, p.bs, p.sub, p.weak));
        return rs * rw * copies(z, p.inp, p.sub, p.weak, p.weak) * (interference(z, es) + 1.0);
    }
    /// Cross-multiplied SIC order: the strong user's decoding of the weak user.
    double sic_minus(const vecd& z, std::size_t c) const {
        const auto& p = pairs_[c];
        const Entry ew{p.inp, p.bs, p.sub, p.weak};
        const double rs = rho(z, d_.at(p.inp, p.bs, p.sub, p.strong));
        return rs * copies(z, p.inp, p.sub, p.strong, p.weak) * (interference(z, ew) + 1.0);
    }

    // ---- set membership ---------------------------------------------------------------

    bool in_box(const vecd& z) const {
        for (Eigen::Index j = 0; j < z.size(); ++j)
            if (z[j] < 0.0 || z[j] > mask_[j]) return false;
        return true;
    }

    bool in_normal(const vecd& z) const {
        if (!in_box(z)) return false;
        const std::size_t E = d_.entries();
        for (std::size_t f = 0; f < E; ++f) {
            if (!le(rho(z, f) + z[idx(off_.rho_c + f)], 1.0)) return false;
            if (!le(z[idx(off_.x + f)] + z[idx(off_.rho_c + f)], 1.0)) return false;
        }
        std::vector<double> mvno(s_.num_mvnos, 0.0);
        for (int i = 0; i < d_.inps; ++i)
            for (int b = 0; b < d_.bs; ++b) {
                double used = 0.0;
                for (int n = 0; n < d_.subs; ++n) {
                    double load = 0.0;
                    for (int k = 0; k < d_.users; ++k) {
                        const std::size_t f = d_.at(i, b, n, k);
                        const double p = rho(z, f) * power(z, f);
                        used += p;
                        mvno[s_.mvno_of_user[k]] += p;
                        load += rho(z, f);
                    }
                    if (!le(load, s_.noma_cap)) return false;
                }
                if (!le(used, s_.bs_budget(i, b))) return false;
            }
        for (int v = 0; v < s_.num_mvnos; ++v)
            if (!le(mvno[v], s_.p_max_mvno[v])) return false;
        for (int i = 0; i < d_.inps; ++i)
            for (int n = 0; n < d_.subs; ++n)
                for (int k = 0; k < d_.users; ++k) {
                    double sel = 0.0;
                    for (int b = 0; b < d_.bs; ++b) sel += z[idx(off_.x + d_.at(i, b, n, k))];
                    if (!le(sel, 1.0)) return false;
                }
        // different InPs never share a user
        for (int k = 0; k < d_.users; ++k)
            for (int i = 0; i < d_.inps; ++i)
                for (int j = i + 1; j < d_.inps; ++j)
                    for (int b = 0; b < d_.bs; ++b)
                        for (int n = 0; n < d_.subs; ++n)
                            for (int bj = 0; bj < d_.bs; ++bj)
                                for (int nj = 0; nj < d_.subs; ++nj)
                                    if (!le(rho(z, d_.at(i, b, n, k)) + rho(z, d_.at(j, bj, nj, k)), 1.0)) return false;
        if (!le(q_tilde_minus(z), q_minus_top_)) return false;
        for (int k = 0; k < d_.users; ++k)
            if (!le(q_minus_user(z, k) + z[idx(off_.s1 + k)], user_cap_[k])) return false;
        for (std::size_t c = 0; c < pairs_.size(); ++c) {
            if (!le(noma_leak(z, c) + z[idx(off_.s2 + c)], leak_top_[c])) return false;
            if (!le(sic_plus(z, c) + z[idx(off_.s3 + c)], sic_top_[c])) return false;
        }
        return true;
    }

    bool in_conormal(const vecd& z) const {
        if (!in_box(z)) return false;
        for (std::size_t f = 0; f < d_.entries(); ++f)
            if (!ge(rho(z, f) + z[idx(off_.rho_c + f)], 1.0)) return false;
        for (int k = 0; k < d_.users; ++k)
            if (!ge(q_plus_user(z, k) + z[idx(off_.s1 + k)], s_.r_min_of(k) + user_cap_[k])) return false;
        for (std::size_t c = 0; c < pairs_.size(); ++c) {
            if (!ge(own_signal(z, c) + z[idx(off_.s2 + c)], leak_top_[c])) return false;
            if (!ge(sic_minus(z, c) + z[idx(off_.s3 + c)], sic_top_[c])) return false;
        }
        return true;
    }

    /// Sum rate in bit/s/Hz once the slack s0 is tight; the constant shift is removed.
    double objective(const vecd& z) const { return q_tilde_plus(z) - q_minus_top_; }

    std::optional<double> certify(const vecd& z) const {
        if (!in_normal(z) || !in_conormal(z)) return std::nullopt;
        return objective(z);
    }

    // ---- conversions ------------------------------------------------------------------

    /// Lifts an allocation whose beams point along the matched filters; slacks are set tight.
    vecd embed(const AllocationState& a) const {
        vecd z = vecd::Zero(mask_.size());
        for (std::size_t f = 0; f < d_.entries(); ++f) {
            z[idx(off_.power + f)] = a.w[f].squaredNorm();
            z[idx(off_.rho + f)] = a.rho[f];
            z[idx(off_.rho_c + f)] = 1.0 - a.rho[f];
            z[idx(off_.x + f)] = a.x[f];
        }
        z[idx(off_.s0)] = clamp_slack(q_minus_top_ - q_minus(z), off_.s0);
        for (int k = 0; k < d_.users; ++k)
            z[idx(off_.s1 + k)] = clamp_slack(user_cap_[k] - q_minus_user(z, k), off_.s1 + k);
        for (std::size_t c = 0; c < pairs_.size(); ++c) {
            z[idx(off_.s2 + c)] = clamp_slack(leak_top_[c] - noma_leak(z, c), off_.s2 + c);
            z[idx(off_.s3 + c)] = clamp_slack(sic_top_[c] - sic_plus(z, c), off_.s3 + c);
        }
        return z;
    }

    AllocationState extract(const vecd& z) const {
        AllocationState a = AllocationState::zeros(d_, Mode::relaxed);
        for (std::size_t f = 0; f < d_.entries(); ++f) {
            a.w[f] = std::sqrt(power(z, f)) * g_.direction(f);
            a.rho[f] = rho(z, f);
            a.x[f] = z[idx(off_.x + f)];
        }
        if (a.is_binary()) a.mode = Mode::binary;
        return a;
    }

    const cvec& direction(std::size_t flat) const { return g_.direction(flat); }

private:
    static constexpr double tiny = 1e-300;
    static constexpr double rel_tol = 1e-12;

    static Eigen::Index idx(std::size_t j) { return static_cast<Eigen::Index>(j); }
    static bool le(double a, double b) { return a <= b + rel_tol * std::max(1.0, std::abs(b)); }
    static bool ge(double a, double b) { return a >= b - rel_tol * std::max(1.0, std::abs(b)); }

    double rho(const vecd& z, std::size_t f) const { return z[idx(off_.rho + f)]; }
    double power(const vecd& z, std::size_t f) const { return z[idx(off_.power + f)]; }
    double g(int i, int b, int n, int rx, int beam) const { return g_(i, b, n, rx, beam); }
    double clamp_slack(double v, std::size_t j) const { return std::clamp(v, 0.0, mask_[idx(j)]); }

    double user_sum(const vecd& z, int k, bool plus) const {
        double acc = 0.0;
        for (int i = 0; i < d_.inps; ++i)
            for (int b = 0; b < d_.bs; ++b)
                for (int n = 0; n < d_.subs; ++n) {
                    const std::size_t f = d_.at(i, b, n, k);
                    const double xv = z[idx(off_.x + f)];
                    if (xv == 0.0) continue;
                    const Entry e{i, b, n, k};
                    const double inter = interference(z, e);
                    const double arg = plus ? inter + copies(z, i, n, k, k) : inter;
                    acc += xv * std::log2(1.0 + arg);
                }
        return acc;
    }

    const NetworkScenario& s_;
    const ChannelState& ch_;
    Dims d_;
    MatchedGains g_;
    std::vector<OrderPair> pairs_;
    Offsets off_{};
    vecd mask_;
    double q_minus_top_ = 0.0;
    std::vector<double> user_cap_, leak_top_, sic_top_;
};

static_assert(MonotoneModel<MonotoneProblem>);

inline MonotoneProblem build_monotone_form(const NetworkScenario& s, const ChannelState& ch) { return {s, ch}; }

inline bool ns_member(const MonotoneProblem& p, const vecd& z) { return p.in_normal(z); }
inline bool cns_member(const MonotoneProblem& p, const vecd& z) { return p.in_conormal(z); }

}  // namespace softran
