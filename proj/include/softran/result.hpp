// Common solver output and its CSV serialization.
#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "softran/allocation.hpp"
#include "softran/sinr.hpp"

namespace softran {

/// What one simulated node sends during a coordination round.
enum class Payload { multiplier_beta, multiplier_delta, aggregate_interference, channel, beam, assignment };

inline const char* payload_tag(Payload p) {
    switch (p) {
        case Payload::multiplier_beta: return "beta";
        case Payload::multiplier_delta: return "delta";
        case Payload::aggregate_interference: return "aggregate";
        case Payload::channel: return "channel";
        case Payload::beam: return "beam";
        case Payload::assignment: return "assignment";
    }
    return "?";
}

/// One logged message: `count` scalars or vectors of kind `payload`, from `sender`
/// (-1 = coordinator) to `receivers` nodes.
struct MessageRecord {
    int outer = 0;
    int inner = 0;
    int sender = -1;
    int receivers = 0;
    Payload payload = Payload::channel;
    std::int64_t count = 0;
};

struct SolverResult {
    std::string solver;
    AllocationState alloc;
    double sum_rate = 0.0;
    std::vector<double> user_rates;
    ConstraintReport report;
    bool feasible = false;
    bool outage = false;
    bool failed = false;
    std::string diagnostics;
    int iterations = 0;
    std::vector<int> inner_iterations;  // per outer iteration, both subproblems summed
    std::vector<double> trace;          // objective per iteration
    std::vector<double> trace_shortfall;  // summed minimum-rate shortfall per trace entry, when tracked
    double upper_bound = std::numeric_limits<double>::infinity();
    bool certified = false;
    double wall_seconds = 0.0;
    std::vector<MessageRecord> messages;

    double gap() const { return upper_bound - sum_rate; }
};

/// Fills rate, report, and status fields from the allocation.
inline void finalize(SolverResult& r, const NetworkScenario& s, const ChannelState& ch, double tol = 1e-6) {
    r.user_rates = user_rates(s, ch, r.alloc);
    r.sum_rate = 0.0;
    for (double v : r.user_rates) r.sum_rate += v;
    r.report = check_feasibility(s, ch, r.alloc, tol);
    r.feasible = r.report.feasible;
    r.outage = !r.report.rates_met();
}

/// Summary line, residual block, and allocation block.
inline void write_result_csv(std::ostream& os, const SolverResult& r) {
    os.precision(12);
    os << "solver,objective,gap,iterations,wall_time,feasible,outage\n";
    os << r.solver << ',' << r.sum_rate << ',' << r.gap() << ',' << r.iterations << ',' << r.wall_seconds << ','
       << r.feasible << ',' << r.outage << "\n\n";
    os << "constraint,residual\n";
    for (const auto& [k, v] : r.report.flat())
        if (k != "feasible") os << '"' << k << "\"," << v << '\n';
    os << "\ninp,bs,sub,user,antenna,rho,x,w_re,w_im\n";
    const Dims& d = r.alloc.dims;
    for (std::size_t f = 0; f < d.entries(); ++f) {
        const Entry e = d.entry(f);
        for (int m = 0; m < d.antennas; ++m) {
            const auto w = r.alloc.w[f][m];
            os << e.inp << ',' << e.bs << ',' << e.sub << ',' << e.user << ',' << m << ',' << r.alloc.rho[f] << ','
               << r.alloc.x[f] << ',' << w.real() << ',' << w.imag() << '\n';
        }
    }
}

}  // namespace softran
