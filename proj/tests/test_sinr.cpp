#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "softran/sinr.hpp"

using namespace softran;

namespace {

// One BS, user 0 strong (h = 2), user 1 weak (h = 1), unit beams, unit noise.
struct TwoUser {
    NetworkScenario s = fixture::manual({1, 1, 1, 2, 1}, 1.0, 10.0);
    ChannelState ch = fixture::scalar({1, 1, 1, 2, 1}, [](int, int, int, int k) { return k == 0 ? 2.0 : 1.0; });
    AllocationState a = [] {
        auto a = AllocationState::zeros({1, 1, 1, 2, 1});
        a.rho = {1.0, 1.0};
        a.w[0][0] = 1.0;
        a.w[1][0] = 1.0;
        return a;
    }();
};

}  // namespace

TEST(Interference, NomaTopUserAndUnscheduled) {
    TwoUser t;
    EXPECT_EQ(noma_interference(t.s, t.ch, t.a, {0, 0, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(noma_interference(t.s, t.ch, t.a, {0, 0, 0, 1}), 1.0);
    t.a.rho[1] = 0.0;
    EXPECT_EQ(noma_interference(t.s, t.ch, t.a, {0, 0, 0, 1}), 0.0);
}

TEST(Interference, InterVanishesWhenAllShareTheBs) {
    TwoUser t;
    EXPECT_EQ(inter_interference(t.s, t.ch, t.a, {0, 0, 0, 0}), 0.0);
    EXPECT_EQ(inter_interference(t.s, t.ch, t.a, {0, 0, 0, 1}), 0.0);
    const auto s1 = fixture::manual({1, 1, 1, 1, 1}, 1.0, 1.0);
    const auto ch1 = fixture::scalar({1, 1, 1, 1, 1}, [](int, int, int, int) { return 1.0; });
    auto a1 = AllocationState::zeros({1, 1, 1, 1, 1});
    a1.rho[0] = 1.0;
    a1.w[0][0] = 3.0;
    EXPECT_EQ(inter_interference(s1, ch1, a1, {0, 0, 0, 0}), 0.0);
}

TEST(Interference, ThreeBsViewpointExpansion) {
    // user 0 on BSs 0,1; users 1 and 2 on BSs 1,2; user 0 decodes from the viewpoint of BS 0
    const Dims d{1, 3, 1, 3, 2};
    const auto s = fixture::manual(d, 1e-3, 10.0, 1e9, 0.0, 3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<cvec> h(d.entries(), cvec::Zero(2));
    for (auto& v : h) v << std::complex<double>(g(rng), g(rng)), std::complex<double>(g(rng), g(rng));
    const ChannelState ch(d, h);
    auto a = AllocationState::zeros(d);
    for (auto& w : a.w) w << std::complex<double>(g(rng), g(rng)), std::complex<double>(g(rng), g(rng));
    auto on = [&](int b, int k) { a.rho[d.at(0, b, 0, k)] = 1.0; };
    on(0, 0);
    on(1, 0);
    on(1, 1);
    on(2, 1);
    on(1, 2);
    on(2, 2);
    auto hw = [&](int b, int rx, int beam) { return std::norm(ch.h(0, b, 0, rx).dot(a.w[d.at(0, b, 0, beam)])); };
    const double expect = hw(1, 0, 1) + hw(2, 0, 1) + hw(1, 0, 2) + hw(2, 0, 2);
    const Entry e{0, 0, 0, 0};
    EXPECT_NEAR(inter_interference(s, ch, a, e), expect, 1e-12 * expect);
    EXPECT_EQ(noma_interference(s, ch, a, e), 0.0);
    const double num = hw(0, 0, 0) + hw(1, 0, 0);
    EXPECT_NEAR(sinr(s, ch, a, e), num / (expect + 1e-3), 1e-12);
}

TEST(Sinr, InterferenceFree) {
    const auto s = fixture::manual({1, 1, 1, 1, 1}, 1.0, 10.0);
    const auto ch = fixture::scalar({1, 1, 1, 1, 1}, [](int, int, int, int) { return 1.0; });
    auto a = AllocationState::zeros({1, 1, 1, 1, 1});
    a.rho[0] = 1.0;
    a.w[0][0] = std::sqrt(3.7);
    EXPECT_NEAR(sinr(s, ch, a, {0, 0, 0, 0}), 3.7, 1e-12);
}

TEST(Sinr, TwoUserNoma) {
    TwoUser t;
    EXPECT_DOUBLE_EQ(sinr(t.s, t.ch, t.a, {0, 0, 0, 0}), 4.0);
    EXPECT_DOUBLE_EQ(sinr(t.s, t.ch, t.a, {0, 0, 0, 1}), 0.5);
}

TEST(Sinr, ZeroBeamsZeroSinr) {
    const auto s = generate_scenario(fixture::desk(1, 2, 2, 3, 2), 1);
    const auto ch = generate_channels(s, 1);
    auto a = AllocationState::zeros(s.dims);
    std::fill(a.rho.begin(), a.rho.end(), 1.0);
    for (std::size_t f = 0; f < s.dims.entries(); ++f) EXPECT_EQ(sinr(s, ch, a, s.dims.entry(f)), 0.0);
}

TEST(SumRate, Examples) {
    TwoUser t;
    EXPECT_EQ(sum_rate(t.s, t.ch, t.a), 0.0);
    t.a.x[0] = 1.0;
    EXPECT_NEAR(sum_rate(t.s, t.ch, t.a), std::log2(5.0), 1e-12);
    const double before = sum_rate(t.s, t.ch, t.a);
    t.s.noise_w *= 2.0;
    EXPECT_LT(sum_rate(t.s, t.ch, t.a), before);
}

TEST(SumRate, MatchesOracleAndSelectedViewpoints) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = generate_scenario(fixture::desk(2, 3, 3, 5, 2), 100 + trial);
        const auto ch = generate_channels(s, 100 + trial);
        auto a = fixture::random_binary(s.dims, rng, 0.3);
        // keep at most one viewpoint per (inp, sub, user)
        const Dims& d = s.dims;
        for (int i = 0; i < d.inps; ++i)
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k) {
                    bool taken = false;
                    for (int b = 0; b < d.bs; ++b) {
                        double& x = a.x[d.at(i, b, n, k)];
                        if (x == 1.0 && taken) x = 0.0;
                        taken = taken || x == 1.0;
                    }
                }
        const double ref = oracle::sum_rate(s, ch, a);
        EXPECT_NEAR(sum_rate(s, ch, a), ref, 1e-9 * std::max(1.0, ref));
        double by_user = 0.0;
        for (std::size_t f = 0; f < d.entries(); ++f)
            if (a.x[f] == 1.0) {
                const Entry e = d.entry(f);
                by_user += std::log2(1.0 + oracle::sinr(s, ch, a, e.inp, e.bs, e.sub, e.user));
            }
        EXPECT_NEAR(sum_rate(s, ch, a), by_user, 1e-9 * std::max(1.0, by_user));
    }
}

TEST(SinrProperties, AddingInterfererNeverHelps) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = generate_scenario(fixture::desk(1, 3, 2, 5, 2), trial);
        const auto ch = generate_channels(s, trial);
        auto a = fixture::random_binary(s.dims, rng, 0.4);
        const Dims& d = s.dims;
        std::uniform_int_distribution<std::size_t> pick(0, d.entries() - 1);
        std::size_t f = pick(rng);
        while (a.rho[f] == 1.0) f = pick(rng);
        const Entry add = d.entry(f);
        std::vector<double> before;
        for (std::size_t g = 0; g < d.entries(); ++g) before.push_back(sinr(s, ch, a, d.entry(g)));
        // another BS on the same subcarrier starts transmitting to `add.user`
        for (int b = 0; b < d.bs; ++b)
            if (b != add.bs && a.rho[d.at(add.inp, b, add.sub, add.user)] == 0.0) {
                a.rho[d.at(add.inp, b, add.sub, add.user)] = 1.0;
                for (std::size_t g = 0; g < d.entries(); ++g) {
                    const Entry e = d.entry(g);
                    if (e.user == add.user || e.sub != add.sub || e.bs == b) continue;
                    EXPECT_LE(sinr(s, ch, a, e), before[g] * (1 + 1e-12) + 1e-300);
                }
                break;
            }
    }
}

TEST(SinrProperties, InterferenceClassesPartition) {
    std::mt19937_64 rng(8);
    const auto s = generate_scenario(fixture::desk(1, 3, 3, 6, 2), 8);
    const auto ch = generate_channels(s, 8);
    const Dims& d = s.dims;
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = fixture::random_binary(d, rng, 0.2);
        for (std::size_t f = 0; f < d.entries(); ++f) {
            const Entry e = d.entry(f);
            if (a.rho[f] == 0.0) continue;
            double all_others = 0.0;
            for (int kp = 0; kp < d.users; ++kp)
                if (kp != e.user) all_others += oracle::received(ch, a, e.inp, e.sub, e.user, kp);
            const double total = noma_interference(s, ch, a, e) + inter_interference(s, ch, a, e);
            EXPECT_LE(total, all_others * (1 + 1e-12));
        }
    }
}

TEST(Feasibility, ZeroAllocation) {
    auto c = fixture::desk(1, 2, 2, 3, 1);
    const auto s = generate_scenario(c, 4);
    const auto ch = generate_channels(s, 4);
    const auto rep = check_feasibility(s, ch, AllocationState::zeros(s.dims));
    EXPECT_FALSE(rep.feasible);
    for (const auto& r : rep.min_rate) EXPECT_GT(r.value, 0.0);
    EXPECT_LE(rep.power_worst(), 0.0);
    EXPECT_LE(rep.combinatorial_worst(), 0.0);
}

TEST(Feasibility, PowerAtBudgetBoundary) {
    const auto s = fixture::manual({1, 1, 1, 1, 1}, 1.0, 2.0);
    const auto ch = fixture::scalar({1, 1, 1, 1, 1}, [](int, int, int, int) { return 1.0; });
    auto a = AllocationState::zeros({1, 1, 1, 1, 1});
    a.rho[0] = a.x[0] = 1.0;
    a.w[0][0] = std::sqrt(2.0);
    const auto rep = check_feasibility(s, ch, a, 0.0);
    ASSERT_EQ(rep.bs_power.size(), 1u);
    EXPECT_NEAR(rep.bs_power[0].value, 0.0, 1e-15);
    // sqrt(2)^2 may round a hair above 2
    const auto rep2 = check_feasibility(s, ch, a, 1e-15);
    EXPECT_TRUE(rep2.feasible);
}

TEST(Feasibility, MatchesIndependentEvaluator) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        auto c = fixture::desk(1, 2, 2, 3, 1);
        if (trial % 2) {
            c.inps = 2;
            c.antennas = 2;
        }
        const auto s = generate_scenario(c, 50 + trial);
        const auto ch = generate_channels(s, 50 + trial);
        const auto a = fixture::random_binary(s.dims, rng, 0.8);
        const auto rep = check_feasibility(s, ch, a);
        const auto ref = oracle::worst_residuals(s, ch, a);
        bool feasible = true;
        rep.for_each_family([&](const char* name, const std::vector<Residual>& fam) {
            const auto it = ref.find(name);
            if (fam.empty()) {
                EXPECT_TRUE(it == ref.end()) << name;
                return;
            }
            ASSERT_TRUE(it != ref.end()) << name;
            const double mine = ConstraintReport::worst(fam);
            EXPECT_NEAR(mine, it->second, 1e-9 * std::max(1.0, std::abs(it->second))) << name;
            feasible = feasible && it->second <= rep.tol;
        });
        EXPECT_EQ(rep.feasible, feasible);
        EXPECT_FALSE(rep.to_text().empty());
    }
}
