#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "softran/sca.hpp"

using namespace softran;

namespace {

fixture::Instance desk_instance(std::uint64_t seed, bool rates = true) {
    auto s = generate_scenario(fixture::desk(1 + seed % 2, 2 + seed % 2, 4 + seed % 3, 6 + seed % 5, 1 + seed % 2), seed);
    if (!rates)
        for (auto& r : s.r_min_mvno) r = 0.0;
    auto ch = generate_channels(s, seed);
    return {std::move(s), std::move(ch)};
}

}  // namespace

TEST(Surrogates, KnownValues) {
    EXPECT_DOUBLE_EQ(decompose_bilinear(2, 2, 1, 1), 4.0);
    EXPECT_DOUBLE_EQ(decompose_bilinear(2, 3, 2, 3), 6.0);
    EXPECT_DOUBLE_EQ(linearize_own_signal({1, 0}, {1, 0}), 1.0);
    EXPECT_DOUBLE_EQ(linearize_own_signal({1, 0}, {2, 0}), 3.0);
}

TEST(Surrogates, TightAtTheExpansionPointAndBoundingElsewhere) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1e3), v(-50.0, 50.0);
    for (int probe = 0; probe < 1000; ++probe) {
        const double a = u(rng), b = u(rng);
        EXPECT_NEAR(decompose_bilinear(a, b, a, b), a * b, 1e-12 * std::max(1.0, a * b));
        const double c = u(rng), e = u(rng);
        EXPECT_GE(decompose_bilinear(c, e, a, b), c * e * (1.0 - 1e-12) - 1e-9);
        const Eigen::Vector2d p(v(rng), v(rng)), q(v(rng), v(rng));
        EXPECT_NEAR(linearize_own_signal(p, p), p.squaredNorm(), 1e-12 * std::max(1.0, p.squaredNorm()));
        EXPECT_LE(linearize_own_signal(p, q), q.squaredNorm() + 1e-9);
    }
}

TEST(Surrogates, IterateMatchesRates) {
    const auto inst = desk_instance(4);
    std::mt19937_64 rng(3);
    const auto a = round_and_repair(inst.s, fixture::random_mf(inst.s, inst.ch, rng));
    const auto it = ScaIterate::at(inst.s, inst.ch, a);
    double total = 0.0;
    for (std::size_t f = 0; f < a.x.size(); ++f)
        if (a.x[f] != 0.0) total += std::log2(it.now.t[f]);
    EXPECT_NEAR(total, oracle::sum_rate(inst.s, inst.ch, a), 1e-9 * std::max(1.0, total));
}

TEST(Beamforming, LoneLinkUsesTheTighterBudget) {
    const Dims d{1, 1, 1, 1, 1};
    const auto ch = fixture::scalar(d, [](int, int, int, int) { return 1.0; });
    for (auto [pb, pv] : {std::pair{2.0, 1.0}, std::pair{2.0, 5.0}}) {
        const auto s = fixture::manual(d, 1e-3, pb, pv);
        AllocationState a = AllocationState::zeros(d);
        a.rho = {1.0};
        a.x = {1.0};
        a.w = {cvec::Constant(1, 0.1)};
        const auto r = solve_beamforming_subproblem(s, ch, a, ScrmOptions{});
        EXPECT_NEAR(r.alloc.power(0), std::min(pb, pv), 1e-6 * std::min(pb, pv));
    }
}

TEST(Beamforming, FirstUpdateFromZeroMultipliersIsFinite) {
    const auto inst = desk_instance(7);
    auto a = round_robin_assignment(inst.s);
    equal_power_beams(inst.s, inst.ch, a);
    ScrmOptions o;
    o.inner_max = 1;
    const auto r = solve_beamforming_subproblem(inst.s, inst.ch, a, o);
    EXPECT_TRUE(r.mult.nonnegative());
    const auto rep = check_feasibility(inst.s, inst.ch, r.alloc);
    EXPECT_LE(rep.power_worst(), 1e-9);
    for (const auto& w : r.alloc.w) EXPECT_TRUE(w.allFinite());
}

TEST(Beamforming, StepSizeBarelyMatters) {
    const auto inst = desk_instance(5, false);
    auto a = round_robin_assignment(inst.s);
    equal_power_beams(inst.s, inst.ch, a);
    ScrmOptions o1, o2;
    o2.step.a = 0.05;
    const double r1 = sum_rate(inst.s, inst.ch, solve_beamforming_subproblem(inst.s, inst.ch, a, o1).alloc);
    const double r2 = sum_rate(inst.s, inst.ch, solve_beamforming_subproblem(inst.s, inst.ch, a, o2).alloc);
    EXPECT_NEAR(r1, r2, 0.01 * std::max(r1, r2));
}

TEST(Assignment, ZeroBeamsStillGiveAValidAssignment) {
    const auto inst = desk_instance(3);
    const auto a = AllocationState::zeros(inst.s.dims);
    const std::vector<cvec> none(a.w.size(), cvec::Zero(inst.s.dims.antennas));
    const auto r = solve_assignment_subproblem(inst.s, inst.ch, a, none, ScrmOptions{}, 1000);
    EXPECT_TRUE(r.alloc.is_binary());
    EXPECT_LE(check_feasibility(inst.s, inst.ch, r.alloc).combinatorial_worst(), 0.0);
}

TEST(Assignment, LoneUserIsScheduled) {
    const Dims d{1, 1, 1, 1, 1};
    const auto s = fixture::manual(d, 1e-3, 1.0);
    const auto ch = fixture::scalar(d, [](int, int, int, int) { return 1.0; });
    const auto a = AllocationState::zeros(d);
    const std::vector<cvec> memory{cvec::Constant(1, 0.5)};
    const auto r = solve_assignment_subproblem(s, ch, a, memory, ScrmOptions{}, 10);
    EXPECT_EQ(r.alloc.rho[0], 1.0);
    EXPECT_EQ(r.alloc.x[0], 1.0);
}

TEST(Assignment, CloseToExhaustiveOnTwoByTwo) {
    // two BSs, two users, two subcarriers, one antenna; beams fixed per entry
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto s = generate_scenario(fixture::desk(1, 2, 2, 2, 1), seed);
        for (auto& r : s.r_min_mvno) r = 0.0;
        const auto ch = generate_channels(s, seed);
        const Dims& d = s.dims;
        std::vector<cvec> beams(d.entries());
        for (std::size_t f = 0; f < d.entries(); ++f) {
            const Entry e = d.entry(f);
            beams[f] = matched_direction(ch.tensor()[f]) * std::sqrt(s.bs_budget(e.inp, e.bs) / 4.0);
        }
        // every (rho, x) per (sub, user): off, or one serving BS with its viewpoint, or both with either viewpoint
        const int opts = 5, cells = d.subs * d.users;
        double best = 0.0;
        int total = 1;
        for (int c = 0; c < cells; ++c) total *= opts;
        for (int code = 0; code < total; ++code) {
            AllocationState a = AllocationState::zeros(d);
            a.w = beams;
            int rem = code;
            for (int n = 0; n < d.subs; ++n)
                for (int k = 0; k < d.users; ++k, rem /= opts) {
                    const int o = rem % opts;
                    const std::size_t f0 = d.at(0, 0, n, k), f1 = d.at(0, 1, n, k);
                    if (o == 1 || o == 3 || o == 4) a.rho[f0] = 1.0;
                    if (o == 2 || o == 3 || o == 4) a.rho[f1] = 1.0;
                    if (o == 1 || o == 3) a.x[f0] = 1.0;
                    if (o == 2 || o == 4) a.x[f1] = 1.0;
                }
            for (std::size_t f = 0; f < d.entries(); ++f)
                if (a.rho[f] == 0.0) a.w[f].setZero();
            const auto rep = check_feasibility(s, ch, a, 1e-6);
            if (!rep.feasible) continue;
            best = std::max(best, sum_rate(s, ch, a));
        }
        ScrmOptions o;
        o.conserve_power = false;
        const auto r = solve_assignment_subproblem(s, ch, AllocationState::zeros(d), beams, o, 1000);
        EXPECT_LE(check_feasibility(s, ch, r.alloc).combinatorial_worst(), 0.0);
        EXPECT_GE(sum_rate(s, ch, r.alloc), 0.95 * best) << "seed " << seed;
    }
}

TEST(SemiCentralized, FeasibleBudgetsAndConvergence) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto inst = desk_instance(seed);
        ScrmOptions o;
        const auto r = semi_centralized_solve(inst.s, inst.ch, o);
        EXPECT_LE(r.report.combinatorial_worst(), 0.0);
        EXPECT_LE(r.report.power_worst(), 1e-6);
        EXPECT_LE(ConstraintReport::worst(r.report.noma_power_order), 1e-6);
        EXPECT_LE(ConstraintReport::worst(r.report.sic_sinr_order), 1e-6);
        EXPECT_LE(r.iterations, o.outer_max);
        ASSERT_GE(r.trace.size(), 2u);
        EXPECT_LE(std::abs(r.trace.back() - r.trace[r.trace.size() - 2]), o.eps);
        EXPECT_FALSE(r.messages.empty());
    }
}

TEST(SemiCentralized, TraceNeverDropsOnceRatesAreMet) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto inst = desk_instance(seed, false);
        ScrmOptions o;
        const auto r = semi_centralized_solve(inst.s, inst.ch, o);
        for (std::size_t q = 1; q < r.trace.size(); ++q) EXPECT_GE(r.trace[q], r.trace[q - 1] - o.eps) << "seed " << seed;
        EXPECT_NEAR(r.sum_rate, r.trace.back(), o.eps);
    }
}

TEST(SemiCentralized, RestartFromConvergedStateStopsAtOnce) {
    for (std::uint64_t seed : {2u, 6u, 11u}) {
        const auto inst = desk_instance(seed, false);
        auto prev = semi_centralized_solve(inst.s, inst.ch);
        // settle on a fixed point first; a fresh run ends within eps, not at one
        for (int rerun = 0; rerun < 5; ++rerun) {
            auto next = semi_centralized_solve(inst.s, inst.ch, ScrmOptions{}, &prev.alloc);
            const bool settled = next.iterations == 1;
            prev = std::move(next);
            if (settled) break;
        }
        const auto again = semi_centralized_solve(inst.s, inst.ch, ScrmOptions{}, &prev.alloc);
        EXPECT_EQ(again.iterations, 1) << "seed " << seed;
        EXPECT_GE(again.sum_rate, prev.sum_rate - ScrmOptions{}.eps) << "seed " << seed;
    }
}

TEST(SemiCentralized, RestrictedModesKeepTheirShape) {
    const auto inst = desk_instance(8);
    ScrmOptions o;
    o.nos = NosMode::single_bs;
    const auto r = semi_centralized_solve(inst.s, inst.ch, o);
    const Dims& d = inst.s.dims;
    for (int k = 0; k < d.users; ++k) {
        int bs = -1;
        for (std::size_t f = static_cast<std::size_t>(k); f < d.entries(); f += d.users) {
            if (r.alloc.rho[f] == 0.0) continue;
            const int flat = inst.s.bs_index(d.entry(f).inp, d.entry(f).bs);
            if (bs >= 0) EXPECT_EQ(bs, flat);
            bs = flat;
        }
    }
}

TEST(SemiCentralized, RoundRobinIsCombinatoriallyValid) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto inst = desk_instance(seed);
        auto a = round_robin_assignment(inst.s);
        equal_power_beams(inst.s, inst.ch, a);
        const auto rep = check_feasibility(inst.s, inst.ch, a);
        EXPECT_LE(rep.combinatorial_worst(), 0.0);
        EXPECT_LE(rep.power_worst(), 1e-9);
    }
}
