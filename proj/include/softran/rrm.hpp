// Fronthaul signaling, per-node operation counts, and the switch between the
// central and the semi-centralized method.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "softran/result.hpp"
#include "softran/scenario.hpp"

namespace softran {

/// Bits per quantized quantity.
struct QuantizationTable {
    int multiplier = 3;           // beta, delta
    int channel_per_antenna = 6;  // one complex channel coefficient
    int aggregate = 3;            // broadcast interference term
    int beam_per_antenna = 3;     // one complex beam coefficient
    int assignment = 3;           // rho or x

    std::int64_t channel(int antennas) const { return static_cast<std::int64_t>(channel_per_antenna) * antennas; }
    std::int64_t beam(int antennas) const { return static_cast<std::int64_t>(beam_per_antenna) * antennas; }

    std::int64_t bits(Payload p, int antennas) const {
        switch (p) {
            case Payload::multiplier_beta:
            case Payload::multiplier_delta: return multiplier;
            case Payload::aggregate_interference: return aggregate;
            case Payload::channel: return channel(antennas);
            case Payload::beam: return beam(antennas);
            case Payload::assignment: return assignment;
        }
        return 0;
    }
};

inline constexpr double kBitsPerKilobyte = 8.0 * 1000.0;

struct IterationCounts {
    int outer = 0;
    int inner = 0;  // inner iterations summed over the run
};

namespace rrm_detail {

inline std::int64_t tenants(const NetworkScenario& s) {
    std::vector<bool> seen(s.num_mvnos, false);
    for (int v : s.mvno_of_user) seen[v] = true;
    return std::count(seen.begin(), seen.end(), true);
}

}  // namespace rrm_detail

/// Fronthaul load of one scheduling epoch in kilobytes (1 kB = 1000 bytes).
///
/// "crm": every BS uploads the channel of every (subcarrier, user) and gets
/// back the beam, rho and x of each. The semi-centralized tags ("scrm",
/// "no-comp", "heuristic-nos"): per inner iteration, one aggregate term and one
/// delta per user, plus one beta per MVNO with users, each delivered to all
/// BSs. Iteration counts only matter for the latter.
inline double signaling_overhead(const NetworkScenario& s, std::string_view tag, IterationCounts it,
                                 const QuantizationTable& q = {}) {
    const Dims& d = s.dims;
    const std::int64_t nodes = static_cast<std::int64_t>(d.inps) * d.bs;
    std::int64_t bits = 0;
    if (tag == "crm") {
        const std::int64_t slots = nodes * d.subs * d.users;
        bits = slots * (q.channel(d.antennas) + q.beam(d.antennas) + 2 * q.assignment);
    } else if (tag == "scrm" || tag == "no-comp" || tag == "heuristic-nos") {
        const std::int64_t per_round = static_cast<std::int64_t>(d.users) * (q.aggregate + q.multiplier) +
                                       rrm_detail::tenants(s) * q.multiplier;
        bits = static_cast<std::int64_t>(it.inner) * nodes * per_round;
    } else {
        throw std::invalid_argument("unknown algorithm tag: " + std::string(tag));
    }
    return static_cast<double>(bits) / kBitsPerKilobyte;
}

/// Fronthaul load of a logged run, each record delivered to all its receivers.
inline double ledger_overhead(std::span<const MessageRecord> log, int antennas, const QuantizationTable& q = {}) {
    std::int64_t bits = 0;
    for (const auto& m : log) bits += m.count * q.bits(m.payload, antennas) * m.receivers;
    return static_cast<double>(bits) / kBitsPerKilobyte;
}

/// Operation counts of both methods. The per-BS count follows the beam update
/// of the semi-centralized method: each entry a BS schedules pays a rank-one
/// update per co-channel viewpoint, a Hermitian solve, and one pass over the
/// users. Entries per BS assume every cell filled up to the NOMA cap when
/// users allow. `per_bs_scale` is fitted to the instrumented counter at the
/// default scenario. The central count charges each polyblock vertex a power
/// program over all entries and slots.
struct ComplexityModel {
    double per_bs_scale = 0.2552;
    double central_scale = 1.0;
    int noma_cap = 2;
    int inps = 1;

    double per_bs_ops(int users, int bs, int subs, int antennas, int iterations) const {
        if (users <= 0 || iterations <= 0) return 0.0;
        const double per_cell = std::min<double>(noma_cap, static_cast<double>(users) / (inps * bs));
        const double entries = subs * per_cell;
        const double views = bs * per_cell;
        const double m = antennas;
        return per_bs_scale * iterations * entries * (views * m * m + m * m * m + users * m);
    }

    double central_ops(int users, int bs, int subs, int antennas, int iterations) const {
        if (users <= 0 || iterations <= 0) return 0.0;
        const double entries = static_cast<double>(inps) * bs * subs * users;
        const double slots = static_cast<double>(inps) * subs * users;
        return central_scale * iterations * entries * slots * antennas;
    }

    static ComplexityModel of(const NetworkScenario& s) {
        ComplexityModel m;
        m.noma_cap = s.noma_cap;
        m.inps = s.dims.inps;
        return m;
    }
    static ComplexityModel of(const ScenarioConfig& c) {
        ComplexityModel m;
        m.noma_cap = c.noma_cap;
        m.inps = c.inps;
        return m;
    }
};

inline double per_bs_complexity(const NetworkScenario& s, int iterations) {
    const Dims& d = s.dims;
    return ComplexityModel::of(s).per_bs_ops(d.users, d.bs, d.subs, d.antennas, iterations);
}

inline double central_complexity(const NetworkScenario& s, int iterations) {
    const Dims& d = s.dims;
    return ComplexityModel::of(s).central_ops(d.users, d.bs, d.subs, d.antennas, iterations);
}

enum class RrmMode { crm, scrm };

inline const char* mode_tag(RrmMode m) { return m == RrmMode::crm ? "crm" : "scrm"; }

/// Central method only when the per-BS load strictly exceeds the threshold.
inline RrmMode select_rrm(double complexity_scrm, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    return complexity_scrm > threshold ? RrmMode::crm : RrmMode::scrm;
}

/// Active users per hour of a day. The bundled curve is synthetic.
struct TrafficProfile {
    struct Sample {
        double hour = 0.0;
        int users = 0;
    };
    std::vector<Sample> samples;

    static TrafficProfile synthetic_diurnal(int peak = 450, int trough = 40) {
        TrafficProfile p;
        for (int h = 0; h < 24; ++h) {
            // low before dawn, peak in the evening
            const double phase = std::cos(2.0 * std::numbers::pi * (h - 19) / 24.0);
            const double level = trough + (peak - trough) * 0.5 * (1.0 + phase);
            p.samples.push_back({static_cast<double>(h), static_cast<int>(std::lround(level))});
        }
        return p;
    }
};

struct Thresholds {
    double per_bs = std::numeric_limits<double>::infinity();
    double central = std::numeric_limits<double>::infinity();
};

struct RegionRow {
    int users = 0;
    double ops_bs = 0.0;
    double ops_central = 0.0;
    bool scrm_ok = false;
    bool crm_ok = false;
    bool hybrid_ok = false;
    RrmMode mode = RrmMode::scrm;
};

struct RegionReport {
    int bs = 0;
    std::vector<RegionRow> rows;
    int scrm_max = 0;    // largest supported user count, SCRM alone
    int crm_max = 0;
    int hybrid_max = 0;

    /// Relative increase of the supported user count from switching methods.
    double gain() const { return scrm_max > 0 ? static_cast<double>(hybrid_max - scrm_max) / scrm_max : 0.0; }
};

/// Marks each user count achievable per method by its threshold; the hybrid
/// takes SCRM unless its per-BS load is over threshold, then CRM.
inline RegionReport region_analysis(const ScenarioConfig& tmpl, int users_lo, int users_hi, const Thresholds& th,
                                    int iterations = 10) {
    const ComplexityModel model = ComplexityModel::of(tmpl);
    RegionReport rep;
    rep.bs = tmpl.bs_per_inp;
    for (int k = std::max(users_lo, 0); k <= users_hi; ++k) {
        RegionRow r;
        r.users = k;
        r.ops_bs = model.per_bs_ops(k, tmpl.bs_per_inp, tmpl.subcarriers, tmpl.antennas, iterations);
        r.ops_central = model.central_ops(k, tmpl.bs_per_inp, tmpl.subcarriers, tmpl.antennas, iterations);
        r.scrm_ok = r.ops_bs <= th.per_bs;
        r.crm_ok = r.ops_central <= th.central;
        r.mode = r.ops_bs > th.per_bs ? RrmMode::crm : RrmMode::scrm;
        r.hybrid_ok = r.mode == RrmMode::scrm ? r.scrm_ok : r.crm_ok;
        if (r.scrm_ok) rep.scrm_max = std::max(rep.scrm_max, k);
        if (r.crm_ok) rep.crm_max = std::max(rep.crm_max, k);
        if (r.hybrid_ok) rep.hybrid_max = std::max(rep.hybrid_max, k);
        rep.rows.push_back(r);
    }
    return rep;
}

/// Thresholds at which SCRM alone tops out at `scrm_cap` users and the
/// central method at `crm_cap`.
inline Thresholds calibrate_thresholds(const ScenarioConfig& tmpl, int scrm_cap, int crm_cap, int iterations = 10) {
    const ComplexityModel model = ComplexityModel::of(tmpl);
    return {model.per_bs_ops(scrm_cap, tmpl.bs_per_inp, tmpl.subcarriers, tmpl.antennas, iterations),
            model.central_ops(crm_cap, tmpl.bs_per_inp, tmpl.subcarriers, tmpl.antennas, iterations)};
}

/// Share of runs that miss some minimum rate.
inline double outage_probability(std::span<const SolverResult> results) {
    if (results.empty()) throw std::invalid_argument("outage_probability needs at least one result");
    const auto missed = std::count_if(results.begin(), results.end(), [](const SolverResult& r) { return r.outage; });
    return static_cast<double>(missed) / static_cast<double>(results.size());
}

/// users,bs_count,mode,overhead_kb,ops,feasible; overhead and ops of the mode in use.
inline void write_region_csv(std::ostream& os, const ScenarioConfig& tmpl, const RegionReport& rep, IterationCounts it,
                             const QuantizationTable& q = {}) {
    os.precision(12);
    os << "users,bs_count,mode,overhead_kb,ops,feasible\n";
    for (const auto& r : rep.rows) {
        ScenarioConfig c = tmpl;
        c.users = r.users;
        c.users_per_mvno.clear();
        const NetworkScenario s = generate_scenario(c, c.seed);
        const double kb = signaling_overhead(s, mode_tag(r.mode), it, q);
        os << r.users << ',' << rep.bs << ',' << mode_tag(r.mode) << ',' << kb << ','
           << (r.mode == RrmMode::scrm ? r.ops_bs : r.ops_central) << ',' << (r.hybrid_ok ? 1 : 0) << '\n';
    }
}

}  // namespace softran
