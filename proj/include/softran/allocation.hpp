// Beams, scheduling indicators, and viewpoint indicators.
#pragma once

#include <cmath>
#include <vector>

#include "softran/scenario.hpp"

namespace softran {

enum class Mode { binary, relaxed };

struct AllocationState {
    Dims dims;
    Mode mode = Mode::binary;
    std::vector<cvec> w;
    std::vector<double> rho;
    std::vector<double> x;

    static AllocationState zeros(const Dims& d, Mode m = Mode::binary) {
        AllocationState a;
        a.dims = d;
        a.mode = m;
        a.w.assign(d.entries(), cvec::Zero(d.antennas));
        a.rho.assign(d.entries(), 0.0);
        a.x.assign(d.entries(), 0.0);
        return a;
    }

    cvec& beam(const Entry& e) { return w[dims.at(e)]; }
    const cvec& beam(const Entry& e) const { return w[dims.at(e)]; }
    double& sched(const Entry& e) { return rho[dims.at(e)]; }
    double sched(const Entry& e) const { return rho[dims.at(e)]; }
    double& view(const Entry& e) { return x[dims.at(e)]; }
    double view(const Entry& e) const { return x[dims.at(e)]; }

    /// Radiated power rho * ||w||^2 of one slot.
    double power(std::size_t flat) const { return rho[flat] * w[flat].squaredNorm(); }

    bool is_binary() const {
        auto bin = [](double v) { return v == 0.0 || v == 1.0; };
        for (std::size_t f = 0; f < rho.size(); ++f)
            if (!bin(rho[f]) || !bin(x[f])) return false;
        return true;
    }
};

/// Unit matched-filter direction toward a channel; zero channel maps to the first antenna.
inline cvec matched_direction(const cvec& h) {
    const double n = h.norm();
    if (n > 0.0) return h / n;
    cvec u = cvec::Zero(h.size());
    u[0] = 1.0;
    return u;
}

/// |h_rx^H u_beam|^2 / scale for matched-filter unit beams u, per (inp, bs, sub, rx, beam).
class MatchedGains {
public:
    MatchedGains(const ChannelState& ch, double scale = 1.0) : d_(ch.dims()) {
        const std::size_t E = d_.entries();
        dir_.reserve(E);
        for (std::size_t f = 0; f < E; ++f) dir_.push_back(matched_direction(ch.tensor()[f]));
        g_.assign(E * static_cast<std::size_t>(d_.users), 0.0);
        for (std::size_t f = 0; f < E; ++f) {
            const Entry e = d_.entry(f);
            for (int rx = 0; rx < d_.users; ++rx)
                g_[d_.at(e.inp, e.bs, e.sub, rx) * d_.users + e.user] =
                    std::norm(ch.h(e.inp, e.bs, e.sub, rx).dot(dir_[f])) / scale;
        }
    }

    double operator()(int i, int b, int n, int rx, int beam) const {
        return g_[d_.at(i, b, n, rx) * static_cast<std::size_t>(d_.users) + beam];
    }
    const cvec& direction(std::size_t flat) const { return dir_[flat]; }

private:
    Dims d_;
    std::vector<cvec> dir_;
    std::vector<double> g_;
};

}  // namespace softran
