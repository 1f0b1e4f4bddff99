#pragma once

#include <functional>
#include <random>

#include "softran/allocation.hpp"
#include "softran/scenario.hpp"

namespace fixture {

using namespace softran;

/// Scenario with hand-set budgets and no random placement.
inline NetworkScenario manual(Dims d, double noise_w, double p_bs, double p_mvno = 1e9, double r_min = 0.0,
                              int noma_cap = 2) {
    NetworkScenario s;
    s.dims = d;
    s.num_mvnos = 1;
    s.noma_cap = noma_cap;
    s.subcarrier_bw_hz = 1.0;
    s.mvno_of_user.assign(d.users, 0);
    s.p_max_bs.assign(static_cast<std::size_t>(d.inps) * d.bs, p_bs);
    s.p_max_mvno = {p_mvno};
    s.r_min_mvno = {r_min};
    s.noise_w = noise_w;
    s.layout.bs.assign(static_cast<std::size_t>(d.inps) * d.bs, Point{});
    s.layout.users.assign(d.users, Point{});
    return s;
}

/// Single-antenna channels from a real-valued generator.
inline ChannelState scalar(Dims d, const std::function<double(int, int, int, int)>& f) {
    d.antennas = 1;
    std::vector<cvec> h(d.entries(), cvec::Zero(1));
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b)
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) h[d.at(i, b, n, k)][0] = f(i, b, n, k);
    return ChannelState(d, std::move(h));
}

/// Desk-scale configuration with the default geometry.
inline ScenarioConfig desk(int inps = 1, int bs = 2, int subs = 4, int users = 6, int antennas = 1) {
    ScenarioConfig c;
    c.inps = inps;
    c.bs_per_inp = bs;
    c.subcarriers = subs;
    c.users = users;
    c.antennas = antennas;
    return c;
}

/// Binary allocation drawn uniformly; respects nothing in particular.
inline AllocationState random_binary(const Dims& d, std::mt19937_64& rng, double p_scale) {
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    AllocationState a = AllocationState::zeros(d);
    for (std::size_t f = 0; f < d.entries(); ++f) {
        a.rho[f] = coin(rng) ? 1.0 : 0.0;
        a.x[f] = (a.rho[f] == 1.0 && coin(rng)) ? 1.0 : 0.0;
        for (int m = 0; m < d.antennas; ++m) a.w[f][m] = std::complex<double>(g(rng), g(rng));
        a.w[f] *= std::sqrt(p_scale * u(rng)) / a.w[f].norm();
    }
    return a;
}

/// Binary schedule with matched-filter beams at random powers below each entry's cap.
/// Viewpoints pick one scheduled BS per (inp, sub, user).
inline AllocationState random_mf(const NetworkScenario& s, const ChannelState& ch, std::mt19937_64& rng,
                                 double on = 0.5) {
    const Dims& d = s.dims;
    std::bernoulli_distribution coin(on);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AllocationState a = AllocationState::zeros(d);
    for (int i = 0; i < d.inps; ++i)
        for (int n = 0; n < d.subs; ++n)
            for (int k = 0; k < d.users; ++k) {
                std::vector<int> on_bs;
                for (int b = 0; b < d.bs; ++b) {
                    const std::size_t f = d.at(i, b, n, k);
                    a.w[f] = std::sqrt(u(rng) * s.beam_cap(i, b, k)) * matched_direction(ch.tensor()[f]);
                    if (coin(rng)) {
                        a.rho[f] = 1.0;
                        on_bs.push_back(b);
                    }
                }
                if (!on_bs.empty() && coin(rng))
                    a.x[d.at(i, on_bs[std::uniform_int_distribution<std::size_t>(0, on_bs.size() - 1)(rng)], n, k)] = 1.0;
            }
    return a;
}

struct Instance {
    NetworkScenario s;
    ChannelState ch;
};

/// One InP, two BSs, one antenna, two subcarriers, three users; no minimum
/// rates and MVNO budgets that never bind.
inline Instance tiny(std::uint64_t seed) {
    auto s = generate_scenario(desk(1, 2, 2, 3, 1), seed);
    for (auto& p : s.p_max_mvno) p = 1e3;
    for (auto& r : s.r_min_mvno) r = 0.0;
    auto ch = generate_channels(s, seed);
    return {std::move(s), std::move(ch)};
}

}  // namespace fixture
