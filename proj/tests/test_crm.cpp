#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "grid_oracle.hpp"
#include "oracle.hpp"
#include "softran/cell.hpp"
#include "softran/crm.hpp"

using namespace softran;

TEST(RoundAndRepair, LargestRhoKeepsTheSlot) {
    auto s = fixture::manual({1, 1, 1, 2, 1}, 1e-3, 1.0, 1e9, 0.0, 1);
    AllocationState r = AllocationState::zeros(s.dims, Mode::relaxed);
    r.rho = {0.9, 0.8};
    r.x = {0.9, 0.8};
    r.w = {cvec::Constant(1, 1.0), cvec::Constant(1, 1.0)};
    const auto a = round_and_repair(s, r);
    EXPECT_EQ(a.rho, (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(a.x, (std::vector<double>{1.0, 0.0}));
    EXPECT_TRUE(a.w[1].isZero(0.0));
}

TEST(RoundAndRepair, BinaryFeasibleInputIsAFixedPoint) {
    const auto s = generate_scenario(fixture::desk(2, 2, 3, 5, 2), 4);
    const auto ch = generate_channels(s, 4);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        auto a = round_and_repair(s, fixture::random_mf(s, ch, rng));
        const auto b = round_and_repair(s, a);
        EXPECT_EQ(a.rho, b.rho);
        EXPECT_EQ(a.x, b.x);
    }
}

TEST(RoundAndRepair, RelaxedInputsBecomeCombinatoriallyValid) {
    const auto s = generate_scenario(fixture::desk(2, 3, 3, 6, 1), 12);
    const auto ch = generate_channels(s, 12);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        AllocationState r = AllocationState::zeros(s.dims, Mode::relaxed);
        for (std::size_t f = 0; f < r.rho.size(); ++f) {
            r.rho[f] = u(rng);
            r.x[f] = u(rng);
        }
        const auto a = round_and_repair(s, r);
        EXPECT_TRUE(a.is_binary());
        EXPECT_LE(check_feasibility(s, ch, a).combinatorial_worst(), 0.0);
    }
}

TEST(PowerProgram, SingleLinkNeedsExactlyTheTargetPower) {
    const Dims d{1, 1, 1, 1, 1};
    const auto s = fixture::manual(d, 1.0, 10.0);
    const auto ch = fixture::scalar(d, [](int, int, int, int) { return 2.0; });
    const PowerProgram prog(s, ch);
    Pattern p;
    p.rho = {1};
    p.x = {1};
    const double target = 3.0;  // SINR 2^3 - 1 = 7 needs 7 / |h|^2 = 1.75 W
    const std::vector<double> t{target};
    const auto power = prog.solve(p, t);
    ASSERT_TRUE(power);
    EXPECT_NEAR((*power)[0], 1.75, 1e-9);
    const std::vector<double> far{std::log2(1.0 + 4.0 * 10.0) + 0.01};
    EXPECT_FALSE(prog.solve(p, far));
}

TEST(Centralized, TinyInstanceReachesGridOptimum) {
    const auto inst = fixture::tiny(3);
    const double grid = oracle::grid_optimum(inst.s, inst.ch);
    const auto r = centralized_solve(inst.s, inst.ch);
    EXPECT_TRUE(r.feasible);
    EXPECT_GE(r.sum_rate, 0.98 * grid);
    EXPECT_GE(r.upper_bound, r.sum_rate);
    EXPECT_NEAR(r.sum_rate, oracle::sum_rate(inst.s, inst.ch, r.alloc), 1e-9 * r.sum_rate);
}

TEST(Centralized, SeedsAreNeverLost) {
    auto s = generate_scenario(fixture::desk(1, 2, 4, 6, 1), 31);
    for (auto& r : s.r_min_mvno) r = 0.0;
    const auto ch = generate_channels(s, 31);
    std::mt19937_64 rng(1);
    std::vector<AllocationState> seeds;
    double best = 0.0;
    for (int t = 0; t < 200 && seeds.size() < 3; ++t) {
        auto a = round_and_repair(s, fixture::random_mf(s, ch, rng, 0.4));
        cell::make_feasible(s, ch, a);
        if (!check_feasibility(s, ch, a).feasible) continue;
        best = std::max(best, sum_rate(s, ch, a));
        seeds.push_back(std::move(a));
    }
    ASSERT_FALSE(seeds.empty());
    CrmOptions o;
    o.pool_iter = 5;
    const auto r = centralized_solve(s, ch, o, seeds);
    EXPECT_TRUE(r.feasible);
    EXPECT_GE(r.sum_rate, best - 1e-9);
}
