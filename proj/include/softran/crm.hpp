// Centralized solver. The search runs in the space of per-slot rate targets
// r(inp, sub, user): a target vector is reachable when some binary schedule
// admits matched-filter beam powers meeting every target, which is a linear
// program once the schedule is fixed. Reachable targets form a normal set, the
// minimum-rate sums a conormal set, and the polyblock method maximizes sum(r).
#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "softran/allocation.hpp"
#include "softran/lp.hpp"
#include "softran/polyblock.hpp"
#include "softran/result.hpp"
#include "softran/scenario.hpp"
#include "softran/sinr.hpp"

namespace softran {

/// Binary schedule and viewpoint choice, flat over entries; beams left open.
struct Pattern {
    std::vector<std::uint8_t> rho, x;
    friend bool operator==(const Pattern&, const Pattern&) = default;
};

inline Pattern pattern_of(const AllocationState& a) {
    Pattern p;
    p.rho.resize(a.rho.size());
    p.x.resize(a.x.size());
    for (std::size_t f = 0; f < a.rho.size(); ++f) {
        p.rho[f] = a.rho[f] > 0.5;
        p.x[f] = p.rho[f] && a.x[f] > 0.5;
    }
    return p;
}

/// Flat index of a rate slot (inp, sub, user).
inline std::size_t slot_of(const Dims& d, int i, int n, int k) {
    return (static_cast<std::size_t>(i) * d.subs + n) * d.users + k;
}
inline std::size_t slot_count(const Dims& d) { return static_cast<std::size_t>(d.inps) * d.subs * d.users; }

/// Minimum-power matched-filter beams for a fixed schedule and per-slot rate targets.
class PowerProgram {
public:
    PowerProgram(const NetworkScenario& s, const ChannelState& ch) : s_(s), ch_(ch), g_(ch, s.noise_w) {}

    const MatchedGains& gains() const noexcept { return g_; }

    /// Beam powers in W per entry, or nothing when the targets are out of reach.
    /// `pin` turns each viewpoint SINR target into an equality.
    std::optional<std::vector<double>> solve(const Pattern& p, std::span<const double> target, bool pin = false) const {
        const Dims& d = s_.dims;
        std::vector<int> var(d.entries(), -1);
        std::vector<std::size_t> flat;
        for (std::size_t f = 0; f < d.entries(); ++f)
            if (p.rho[f]) {
                var[f] = static_cast<int>(flat.size());
                flat.push_back(f);
            }
        const auto nv = static_cast<Eigen::Index>(flat.size());
        std::vector<Eigen::VectorXd> rows;
        std::vector<double> rhs;
        auto cap = [&](std::size_t f) {
            const Entry e = d.entry(f);
            return s_.beam_cap(e.inp, e.bs, e.user);
        };
        // interference seen by `rx` at the viewpoint of BS b
        auto add_interference = [&](Eigen::VectorXd& row, int i, int b, int n, int rx) {
            for (int kp = 0; kp < d.users; ++kp) {
                if (kp == rx) continue;
                const bool on = p.rho[d.at(i, b, n, kp)];
                const double c = (on ? 0.0 : 1.0) + (on && ch_.stronger(i, n, kp, rx) ? 1.0 : 0.0);
                if (c == 0.0) continue;
                for (int bp = 0; bp < d.bs; ++bp) {
                    const std::size_t f = d.at(i, bp, n, kp);
                    if (var[f] >= 0) row[var[f]] += c * g_(i, bp, n, rx, kp) * cap(f);
                }
            }
        };
        auto viewpoint = [&](int i, int n, int k) {
            for (int b = 0; b < d.bs; ++b)
                if (p.x[d.at(i, b, n, k)]) return b;
            return -1;
        };

        for (int i = 0; i < d.inps; ++i)
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) {
                    const double t = target[slot_of(d, i, n, k)];
                    if (!(t > 0.0)) continue;
                    const int b = viewpoint(i, n, k);
                    if (b < 0) return std::nullopt;
                    const double gamma = std::exp2(t) - 1.0;
                    Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
                    for (int bp = 0; bp < d.bs; ++bp) {
                        const std::size_t f = d.at(i, bp, n, k);
                        if (var[f] >= 0) row[var[f]] -= g_(i, bp, n, k, k) * cap(f) / gamma;
                    }
                    add_interference(row, i, b, n, k);
                    if (pin) {
                        rows.push_back(-row);
                        rhs.push_back(1.0);
                    }
                    rows.push_back(std::move(row));
                    rhs.push_back(-1.0);
                }

        for (int i = 0; i < d.inps; ++i)
            for (int b = 0; b < d.bs; ++b)
                for (int n = 0; n < d.subs; ++n)
                    for (int k = 0; k < d.users; ++k)
                        for (int kp = 0; kp < d.users; ++kp) {
                            const std::size_t fk = d.at(i, b, n, k), fkp = d.at(i, b, n, kp);
                            if (kp == k || var[fk] < 0 || var[fkp] < 0 || !ch_.stronger(i, n, kp, k)) continue;
                            // k is the weaker user of the pair at this BS
                            Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
                            row[var[fkp]] += g_(i, b, n, k, kp) * cap(fkp);
                            row[var[fk]] -= g_(i, b, n, k, k) * cap(fk);
                            const double m = row.cwiseAbs().maxCoeff();
                            if (m > 0.0) {
                                rows.push_back(row / m);
                                rhs.push_back(0.0);
                            }
                            const double t = target[slot_of(d, i, n, k)];
                            if (!(t > 0.0) || !p.x[fk]) continue;
                            // the stronger user decodes k at least at k's own target
                            const double gamma = std::exp2(t) - 1.0;
                            Eigen::VectorXd sic = Eigen::VectorXd::Zero(nv);
                            for (int bp = 0; bp < d.bs; ++bp) {
                                const std::size_t f = d.at(i, bp, n, k);
                                if (var[f] >= 0) sic[var[f]] -= g_(i, bp, n, kp, k) * cap(f) / gamma;
                            }
                            add_interference(sic, i, b, n, kp);
                            rows.push_back(std::move(sic));
                            rhs.push_back(-1.0);
                        }

        std::vector<Eigen::VectorXd> mvno(s_.num_mvnos, Eigen::VectorXd::Zero(nv));
        for (int i = 0; i < d.inps; ++i)
            for (int b = 0; b < d.bs; ++b) {
                Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
                for (int n = 0; n < d.subs; ++n)
                    for (int k = 0; k < d.users; ++k) {
                        const std::size_t f = d.at(i, b, n, k);
                        if (var[f] < 0) continue;
                        row[var[f]] = cap(f) / s_.bs_budget(i, b);
                        mvno[s_.mvno_of_user[k]][var[f]] = cap(f) / s_.p_max_mvno[s_.mvno_of_user[k]];
                    }
                if (row.any()) {
                    rows.push_back(std::move(row));
                    rhs.push_back(1.0);
                }
            }
        for (auto& row : mvno)
            if (row.any()) {
                rows.push_back(std::move(row));
                rhs.push_back(1.0);
            }

        std::vector<double> power(d.entries(), 0.0);
        if (nv == 0) return power;
        Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), nv);
        for (std::size_t r = 0; r < rows.size(); ++r) A.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
        const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
        const auto res = lp::minimize(A, b, Eigen::VectorXd::Ones(nv));
        if (res.status != lp::Status::optimal) return std::nullopt;
        for (std::size_t v = 0; v < flat.size(); ++v)
            power[flat[v]] = std::min(res.x[static_cast<Eigen::Index>(v)], 1.0) * cap(flat[v]);
        return power;
    }

    AllocationState build(const Pattern& p, const std::vector<double>& power) const {
        AllocationState a = AllocationState::zeros(s_.dims);
        for (std::size_t f = 0; f < power.size(); ++f) {
            if (!p.rho[f]) continue;
            a.rho[f] = 1.0;
            a.x[f] = p.x[f];
            a.w[f] = std::sqrt(power[f]) * g_.direction(f);
        }
        return a;
    }

private:
    const NetworkScenario& s_;
    const ChannelState& ch_;
    MatchedGains g_;
};

struct CrmOptions {
    double eps = 1e-3;
    int max_iter = 5000;
    double bisection_rel = 1e-4;
    std::size_t enumerate_limit = 4096;  // joint schedules per target support before falling back to a pool
    int pool_iter = 40;                  // polyblock iterations per pooled schedule
    int certify_tries = 8;
    double tol = 1e-6;
};

/// Reachable rate-target region. Without a pool, every schedule that serves
/// exactly the positive slots is enumerated; with a pool, candidates are the
/// pool schedules trimmed to the positive slots.
class RateRegion {
public:
    RateRegion(const NetworkScenario& s, const ChannelState& ch, const PowerProgram& prog,
               std::vector<Pattern> pool = {}, CrmOptions opt = {})
        : s_(s), ch_(ch), prog_(prog), pool_(std::move(pool)), opt_(opt) {
        const Dims& d = s.dims;
        top_ = vecd::Zero(static_cast<Eigen::Index>(slot_count(d)));
        std::vector<bool> servable(slot_count(d), pool_.empty());
        for (const auto& p : pool_)
            for (std::size_t f = 0; f < d.entries(); ++f)
                if (p.x[f]) {
                    const Entry e = d.entry(f);
                    servable[slot_of(d, e.inp, e.sub, e.user)] = true;
                }
        const auto& g = prog_.gains();
        for (int i = 0; i < d.inps; ++i)
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) {
                    const std::size_t sl = slot_of(d, i, n, k);
                    if (!servable[sl]) continue;
                    double snr = 0.0;
                    for (int b = 0; b < d.bs; ++b) snr += g(i, b, n, k, k) * s.beam_cap(i, b, k);
                    top_[static_cast<Eigen::Index>(sl)] = std::log2(1.0 + snr);
                }
    }

    /// Joint schedules for the all-positive support; the enumeration is usable when small enough.
    static double support_size(const NetworkScenario& s) {
        const int per_user = [&] {
            int acc = 0;
            for (int m = 1; m < (1 << s.dims.bs); ++m) acc += std::popcount(static_cast<unsigned>(m));
            return acc;
        }();
        double size = 1.0;
        for (int i = 0; i < s.dims.inps * s.dims.subs; ++i) size *= std::pow(per_user, s.dims.users);
        return size;
    }

    vecd upper() const { return top_; }
    double objective(const vecd& r) const { return r.sum(); }

    bool in_conormal(const vecd& r) const {
        const Dims& d = s_.dims;
        for (int k = 0; k < d.users; ++k) {
            double acc = 0.0;
            for (int i = 0; i < d.inps; ++i)
                for (int n = 0; n < d.subs; ++n) acc += r[static_cast<Eigen::Index>(slot_of(d, i, n, k))];
            if (acc < s_.r_min_of(k) - opt_.tol) return false;
        }
        return true;
    }

    bool in_normal(const vecd& r) const {
        if ((r.array() < 0.0).any() || (r.array() > top_.array()).any()) return false;
        const auto& cands = candidates(r);
        if (r.isZero(0.0)) return true;
        for (std::size_t c : order(r))
            if (reachable(cands[c], r)) return remember(r, c);
        return false;
    }

    /// Bisection per candidate schedule, skipping any that cannot beat the running best.
    double boundary_scale(const vecd& v, double rel) const {
        if (v.isZero(0.0)) return 1.0;
        const auto& cands = candidates(v);
        double best = 0.0;
        for (std::size_t c : order(v)) {
            const double probe = std::min(1.0, best + rel);
            if (best > 0.0 && !reachable(cands[c], probe * v)) continue;
            if (reachable(cands[c], v)) {
                remember(v, c);
                return 1.0;
            }
            double lo = best, hi = 1.0;
            if (best > 0.0) lo = probe;
            else if (!reachable(cands[c], rel * v)) continue;
            else lo = rel;
            while (hi - lo > rel) {
                const double mid = 0.5 * (lo + hi);
                (reachable(cands[c], mid * v) ? lo : hi) = mid;
            }
            if (lo > best) {
                best = lo;
                remember(v, c);
            }
        }
        return best;
    }

    /// A binary allocation meeting the targets and passing the full constraint check.
    std::optional<AllocationState> realize(const vecd& r) const {
        const auto& cands = candidates(r);
        if (r.isZero(0.0) && cands.empty()) return AllocationState::zeros(s_.dims);
        int tries = 0;
        for (std::size_t c : order(r)) {
            if (auto a = realize_with(cands[c], r)) return a;
            if (++tries >= opt_.certify_tries) break;
        }
        return std::nullopt;
    }

    /// Raises each positive target in turn as far as the schedule reaching `r` allows.
    vecd improve(const vecd& r) const {
        if (r.isZero(0.0)) return r;
        const auto& cands = candidates(r);
        for (std::size_t c : order(r))
            if (reachable(cands[c], r)) return ascend(cands[c], r);
        return r;
    }

    /// Warm start: every candidate schedule (all supports when enumerating, the
    /// pool otherwise) is pushed along the ray to its own served-slot corner and
    /// then ascended; the best realized allocation is kept. Returns its value.
    std::optional<double> sweep() const {
        const Dims& d = s_.dims;
        if (pool_.empty()) {
            const std::size_t S = slot_count(d);
            if (S < 63)
                for (std::uint64_t m = 1; m < (std::uint64_t{1} << S); ++m) {
                    vecd v = vecd::Zero(top_.size());
                    for (std::size_t j = 0; j < S; ++j)
                        if (m >> j & 1) v[static_cast<Eigen::Index>(j)] = top_[static_cast<Eigen::Index>(j)];
                    for (const auto& p : candidates(v)) try_schedule(p, v);
                }
        } else {
            for (const auto& p : pool_) {
                vecd v = vecd::Zero(top_.size());
                for (std::size_t f = 0; f < d.entries(); ++f)
                    if (p.x[f]) {
                        const Entry e = d.entry(f);
                        const auto j = static_cast<Eigen::Index>(slot_of(d, e.inp, e.sub, e.user));
                        v[j] = top_[j];
                    }
                if (!v.isZero(0.0)) try_schedule(p, v);
            }
        }
        if (best_) return best_value_;
        return std::nullopt;
    }

    /// Certifies the improved point; the best allocation seen is kept.
    std::optional<double> certify(const vecd& r) const {
        const vecd z = improve(r);
        auto a = realize(z);
        if (!a && z != r) a = realize(r);
        if (!a) return std::nullopt;
        const double v = sum_rate(s_, ch_, *a);
        keep(std::move(*a));
        return v;
    }

    const std::optional<AllocationState>& best_allocation() const noexcept { return best_; }

    std::size_t lp_calls() const noexcept { return lp_calls_; }

private:
    using Key = std::vector<bool>;

    Key support(const vecd& r) const {
        Key k(static_cast<std::size_t>(r.size()));
        for (Eigen::Index j = 0; j < r.size(); ++j) k[static_cast<std::size_t>(j)] = r[j] > 0.0;
        return k;
    }

    std::optional<AllocationState> realize_with(const Pattern& p, const vecd& r) const {
        const std::span<const double> t(r.data(), static_cast<std::size_t>(r.size()));
        for (bool pin : {false, true}) {
            const auto pw = prog_.solve(p, t, pin);
            if (!pw) {
                if (pin) continue;
                return std::nullopt;
            }
            AllocationState a = prog_.build(p, *pw);
            if (check_feasibility(s_, ch_, a, opt_.tol).feasible) return a;
        }
        return std::nullopt;
    }

    vecd ascend(const Pattern& p, const vecd& r) const {
        vecd z = r;
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            if (!(z[j] > 0.0)) continue;
            double lo = z[j], hi = top_[j];
            vecd t = z;
            t[j] = hi;
            if (reachable(p, t)) {
                z[j] = hi;
                continue;
            }
            while (hi - lo > opt_.bisection_rel * top_[j]) {
                t[j] = 0.5 * (lo + hi);
                (reachable(p, t) ? lo : hi) = t[j];
            }
            z[j] = lo;
        }
        return z;
    }

    void keep(AllocationState a) const {
        const double v = sum_rate(s_, ch_, a);
        if (!best_ || v > best_value_) {
            best_value_ = v;
            best_ = std::move(a);
        }
    }

    void try_schedule(const Pattern& p, const vecd& v) const {
        const double rel = opt_.bisection_rel;
        if (!reachable(p, rel * v)) return;
        double lo = rel, hi = 1.0;
        if (reachable(p, v)) lo = 1.0;
        while (hi - lo > rel) {
            const double mid = 0.5 * (lo + hi);
            (reachable(p, mid * v) ? lo : hi) = mid;
        }
        const vecd ray = lo * v;
        const vecd z = ascend(p, ray);
        if (auto a = realize_with(p, z)) keep(std::move(*a));
        else if (auto b = realize_with(p, ray)) keep(std::move(*b));
    }

    bool reachable(const Pattern& p, const vecd& r) const {
        ++lp_calls_;
        return prog_.solve(p, std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))).has_value();
    }

    bool remember(const vecd& r, std::size_t c) const {
        hint_[support(r)] = c;
        return true;
    }

    /// Candidate indices with the last successful one first.
    std::vector<std::size_t> order(const vecd& r) const {
        const auto& cands = candidates(r);
        std::vector<std::size_t> idx(cands.size());
        for (std::size_t c = 0; c < idx.size(); ++c) idx[c] = c;
        if (auto it = hint_.find(support(r)); it != hint_.end() && it->second < idx.size())
            std::swap(idx[0], idx[it->second]);
        return idx;
    }

    const std::vector<Pattern>& candidates(const vecd& r) const {
        Key key = support(r);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        auto& out = cache_[key];
        out = pool_.empty() ? enumerate(key) : trim_pool(key);
        return out;
    }

    std::vector<Pattern> trim_pool(const Key& key) const {
        const Dims& d = s_.dims;
        std::vector<Pattern> out;
        for (const auto& p : pool_) {
            Pattern q = p;
            bool ok = true;
            for (int i = 0; i < d.inps && ok; ++i)
                for (int n = 0; n < d.subs && ok; ++n)
                    for (int k = 0; k < d.users && ok; ++k) {
                        bool viewed = false;
                        for (int b = 0; b < d.bs; ++b) viewed |= p.x[d.at(i, b, n, k)] != 0;
                        if (key[slot_of(d, i, n, k)]) {
                            ok = viewed;
                            continue;
                        }
                        for (int b = 0; b < d.bs; ++b) q.rho[d.at(i, b, n, k)] = q.x[d.at(i, b, n, k)] = 0;
                    }
            if (ok && std::find(out.begin(), out.end(), q) == out.end()) out.push_back(std::move(q));
        }
        return out;
    }

    /// Every schedule serving exactly the positive slots: per user a nonempty
    /// serving set with one viewpoint in it, at most noma_cap users per BS.
    std::vector<Pattern> enumerate(const Key& key) const {
        const Dims& d = s_.dims;
        // a user's positive slots must stay within one InP
        for (int k = 0; k < d.users; ++k) {
            int inp = -1;
            for (int i = 0; i < d.inps; ++i)
                for (int n = 0; n < d.subs; ++n)
                    if (key[slot_of(d, i, n, k)]) {
                        if (inp >= 0 && inp != i) return {};
                        inp = i;
                    }
        }
        struct Choice {
            int user, mask, view;
        };
        std::vector<std::vector<std::vector<Choice>>> local;  // per (inp, sub): list of options
        for (int i = 0; i < d.inps; ++i)
            for (int n = 0; n < d.subs; ++n) {
                std::vector<int> users;
                for (int k = 0; k < d.users; ++k)
                    if (key[slot_of(d, i, n, k)]) users.push_back(k);
                std::vector<std::vector<Choice>> opts;
                std::vector<Choice> cur;
                std::vector<int> load(d.bs, 0);
                auto rec = [&](auto&& self, std::size_t u) -> void {
                    if (u == users.size()) {
                        opts.push_back(cur);
                        return;
                    }
                    for (int m = 1; m < (1 << d.bs); ++m) {
                        bool fits = true;
                        for (int b = 0; b < d.bs; ++b)
                            if ((m >> b & 1) && load[b] + 1 > s_.noma_cap) fits = false;
                        if (!fits) continue;
                        for (int b = 0; b < d.bs; ++b) load[b] += m >> b & 1;
                        for (int v = 0; v < d.bs; ++v) {
                            if (!(m >> v & 1)) continue;
                            cur.push_back({users[u], m, v});
                            self(self, u + 1);
                            cur.pop_back();
                        }
                        for (int b = 0; b < d.bs; ++b) load[b] -= m >> b & 1;
                    }
                };
                rec(rec, 0);
                local.push_back(std::move(opts));
            }
        double total = 1.0;
        for (const auto& o : local) total *= static_cast<double>(o.size());
        if (total > static_cast<double>(opt_.enumerate_limit) || total == 0.0) return {};

        std::vector<Pattern> out;
        std::vector<std::size_t> digit(local.size(), 0);
        while (true) {
            Pattern p{std::vector<std::uint8_t>(d.entries(), 0), std::vector<std::uint8_t>(d.entries(), 0)};
            for (std::size_t l = 0; l < local.size(); ++l) {
                const int i = static_cast<int>(l) / d.subs, n = static_cast<int>(l) % d.subs;
                for (const auto& c : local[l][digit[l]]) {
                    for (int b = 0; b < d.bs; ++b)
                        if (c.mask >> b & 1) p.rho[d.at(i, b, n, c.user)] = 1;
                    p.x[d.at(i, c.view, n, c.user)] = 1;
                }
            }
            out.push_back(std::move(p));
            std::size_t l = 0;
            while (l < local.size() && ++digit[l] == local[l].size()) digit[l++] = 0;
            if (l == local.size()) break;
        }
        return out;
    }

    const NetworkScenario& s_;
    const ChannelState& ch_;
    const PowerProgram& prog_;
    std::vector<Pattern> pool_;
    CrmOptions opt_;
    vecd top_;
    mutable std::map<Key, std::vector<Pattern>> cache_;
    mutable std::map<Key, std::size_t> hint_;
    mutable std::size_t lp_calls_ = 0;
    mutable std::optional<AllocationState> best_;
    mutable double best_value_ = 0.0;
};

static_assert(MonotoneModel<RateRegion>);

/// Greedy rounding of a relaxed allocation: entries in decreasing rho are kept
/// while the NOMA cap and the one-InP rule allow; each scheduled (inp, sub, user)
/// then views through its kept BS with the largest x. Beams of dropped entries are zeroed.
inline AllocationState round_and_repair(const NetworkScenario& s, const AllocationState& relaxed,
                                        double keep_at = 0.5) {
    const Dims& d = relaxed.dims;
    AllocationState a = AllocationState::zeros(d);
    a.w = relaxed.w;
    std::vector<std::size_t> idx(d.entries());
    for (std::size_t f = 0; f < idx.size(); ++f) idx[f] = f;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return relaxed.rho[l] > relaxed.rho[r]; });
    std::vector<int> load(static_cast<std::size_t>(d.inps) * d.bs * d.subs, 0);
    std::vector<int> home(d.users, -1);
    for (std::size_t f : idx) {
        if (relaxed.rho[f] < keep_at || relaxed.rho[f] <= 0.0) break;
        const Entry e = d.entry(f);
        const std::size_t cell = (static_cast<std::size_t>(e.inp) * d.bs + e.bs) * d.subs + e.sub;
        if (load[cell] >= s.noma_cap) continue;
        if (home[e.user] >= 0 && home[e.user] != e.inp) continue;
        home[e.user] = e.inp;
        ++load[cell];
        a.rho[f] = 1.0;
    }
    for (int i = 0; i < d.inps; ++i)
        for (int n = 0; n < d.subs; ++n)
            for (int k = 0; k < d.users; ++k) {
                int pick = -1;
                for (int b = 0; b < d.bs; ++b) {
                    const std::size_t f = d.at(i, b, n, k);
                    if (a.rho[f] == 0.0 || relaxed.x[f] <= 0.0) continue;
                    if (pick < 0) {
                        pick = b;
                        continue;
                    }
                    const std::size_t g = d.at(i, pick, n, k);
                    if (relaxed.x[f] > relaxed.x[g] || (relaxed.x[f] == relaxed.x[g] && relaxed.rho[f] > relaxed.rho[g]))
                        pick = b;
                }
                if (pick >= 0) a.x[d.at(i, pick, n, k)] = 1.0;
            }
    for (std::size_t f = 0; f < d.entries(); ++f)
        if (a.rho[f] == 0.0) a.w[f].setZero();
    return a;
}

/// Global search over rate targets. Seeds are feasible allocations from other
/// methods; they set the starting incumbent and, when the schedule space is too
/// large to enumerate, form the schedule pool.
inline SolverResult centralized_solve(const NetworkScenario& s, const ChannelState& ch, const CrmOptions& opt = {},
                                      std::span<const AllocationState> seeds = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    SolverResult res;
    res.solver = "crm";
    res.alloc = AllocationState::zeros(s.dims);
    std::optional<double> incumbent;
    auto consider = [&](const AllocationState& a) {
        const auto rep = check_feasibility(s, ch, a, opt.tol);
        if (!rep.feasible) return;
        const double v = sum_rate(s, ch, a);
        if (!incumbent || v > *incumbent) {
            incumbent = v;
            res.alloc = a;
        }
    };
    for (const auto& a : seeds) consider(a);

    const PowerProgram prog(s, ch);
    PolyblockOptions po;
    po.eps = opt.eps;
    po.max_iter = opt.max_iter;
    po.bisection_rel = opt.bisection_rel;

    auto run = [&](const RateRegion& region, int max_iter) {
        region.sweep();
        if (region.best_allocation()) consider(*region.best_allocation());
        po.max_iter = max_iter;
        po.incumbent = incumbent;
        const auto pb = polyblock_solve(region, po);
        res.iterations += pb.iterations;
        res.trace.insert(res.trace.end(), pb.best_trace.begin(), pb.best_trace.end());
        if (region.best_allocation()) consider(*region.best_allocation());
        return pb;
    };

    if (RateRegion::support_size(s) <= static_cast<double>(opt.enumerate_limit)) {
        const RateRegion region(s, ch, prog, {}, opt);
        const auto pb = run(region, opt.max_iter);
        res.upper_bound = pb.upper_bound;
        res.certified = pb.certified;
    } else {
        std::vector<Pattern> pool;
        for (const auto& a : seeds) {
            Pattern p = pattern_of(a);
            if (std::find(pool.begin(), pool.end(), p) == pool.end()) pool.push_back(std::move(p));
        }
        double bound = -std::numeric_limits<double>::infinity();
        for (const auto& p : pool) {
            const RateRegion region(s, ch, prog, {p}, opt);
            bound = std::max(bound, run(region, opt.pool_iter).upper_bound);
        }
        // the bound covers the pooled schedules only, so it certifies nothing
        res.upper_bound = std::max(bound, incumbent.value_or(0.0));
    }
    if (!incumbent && !seeds.empty()) {
        // nothing feasible: report the seed closest to feasibility
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : seeds) {
            const double miss = rate_shortfall(s, user_rates(s, ch, a));
            const auto rep = check_feasibility(s, ch, a, opt.tol);
            if (rep.combinatorial_ok() && rep.power_worst() <= opt.tol && miss < best) {
                best = miss;
                res.alloc = a;
            }
        }
    }
    finalize(res, s, ch, opt.tol);
    if (res.upper_bound < res.sum_rate) res.upper_bound = res.sum_rate;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace softran
