#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "crop/env.hpp"
#include "crop/instances.hpp"
#include "crop/policies.hpp"

namespace {

using namespace crop;

TEST(Thresholds, ClosedForms) {
    EXPECT_NEAR(confidence_threshold(1.0, 2.0, 3.0, 1), 4.0 * std::log(3.0), 1e-12);
    EXPECT_NEAR(confidence_threshold(0.5, 2.0, 3.0, 10), std::log(3.0) + 2.0 * std::log(10.0), 1e-12);
    EXPECT_TRUE(std::isinf(refined_threshold(1.0, 3.0, 3.0, 1)));
    // log2(2) = 1, so only ln z remains.
    EXPECT_NEAR(refined_threshold(1.0, 3.0, 3.0, 2), 4.0 * std::log(3.0), 1e-12);
    EXPECT_NEAR(refined_threshold(1.0, 3.0, 3.0, 16), 4.0 * (std::log(3.0) + 3.0 * std::log(4.0)), 1e-12);
}

TEST(ConfidenceSet, KeepsHypothesesWithinBeta) {
    LossTable L(4);
    L[0] = 5.0;
    L[1] = 2.0;
    L[2] = 2.5;
    L[3] = 9.0;
    EXPECT_EQ(confidence_set(L, 1.0), IdSet({1, 2}));
    EXPECT_EQ(confidence_set(L, 0.0), IdSet({1}));
    EXPECT_EQ(L.argmin(), 1U);
}

TEST(Tracking, WorkedExamples) {
    const Allocation pi(std::vector<double>{1.0, 2.0, 0.0});
    // Ratios 2/1, 2/2, x/0 = inf: arm 1.
    EXPECT_EQ(track(std::vector<std::uint64_t>{2, 2, 0}, pi), 1U);
    // Ratios 1, 1.5: arm 0. Arm 2 is outside the support even with 0 pulls.
    EXPECT_EQ(track(std::vector<std::uint64_t>{1, 3, 0}, pi), 0U);
    // Tie 1 = 1: lowest arm.
    EXPECT_EQ(track(std::vector<std::uint64_t>{1, 2, 5}, pi), 0U);
}

TEST(Tracking, ScaleInvariant) {
    const std::vector<std::uint64_t> counts{3, 7, 1, 4};
    const Allocation pi(std::vector<double>{0.5, 2.0, 0.25, 1.0});
    for (double s : {1e-3, 0.7, 3.0, 1e4}) EXPECT_EQ(track(counts, pi.scaled(s)), track(counts, pi));
}

TEST(Tracking, ZeroAllocationThrows) {
    EXPECT_THROW(track(std::vector<std::uint64_t>{0, 0}, Allocation(2)), EmptyAllocation);
}

TEST(Crop, StaircaseFirstRound) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    CropPolicy p(H, b);
    const PolicyDecision d = p.decide();
    EXPECT_EQ(d.confidence_set, IdSet({0, 1, 2}));
    EXPECT_EQ(d.optimistic_set, IdSet({0}));
    ASSERT_TRUE(d.pessimism.has_value());
    EXPECT_EQ(*d.pessimism, 2U);
    EXPECT_EQ(d.branch, Branch::Feasible);
    ASSERT_TRUE(d.pi.has_value());
    EXPECT_TRUE(proportional(*d.pi, b.gamma(2)));
    EXPECT_EQ(d.arm, 4U);
}

TEST(Crop, ExploitsWhenConfidenceSetAgrees) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    CropPolicy p(H, b);
    p.losses()[1] = 1e6;
    p.losses()[2] = 1e6;
    const PolicyDecision d = p.decide();
    EXPECT_EQ(d.branch, Branch::Exploit);
    EXPECT_EQ(d.arm, 0U);
    EXPECT_FALSE(d.pi.has_value());
}

TEST(Crop, ExactlyOneBranchPerRoundAndPiPresentOffExploit) {
    const HypothesisClass F = gen_cheating_code(4, 1.0 / 32.0, 0.5, 1.0);
    const AllocationBundle b(F);
    CropPolicy p(F, b);
    Environment env(F, 5, 99);
    for (int t = 0; t < 2000; ++t) {
        const PolicyDecision d = p.decide();
        ASSERT_NE(d.branch, Branch::None);
        EXPECT_EQ(d.pi.has_value(), d.branch != Branch::Exploit);
        if (d.pi) {
            EXPECT_TRUE(d.pi->in_support(d.arm));
        }
        ASSERT_LT(d.arm, F.arms());
        p.observe(d.arm, env.sample_reward(d.arm));
    }
    EXPECT_EQ(p.rounds(), 2000U);
}

TEST(Crop, BadParams) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    CropParams bad;
    bad.alpha = 1.0;
    EXPECT_THROW(CropPolicy(H, b, bad), BadParams);
    CropParams badz;
    badz.z = 0.0;
    EXPECT_THROW(CropPolicy(H, b, badz), BadParams);
}

TEST(Optimism, NeverPullsACodeArmOnTheCheatingCode) {
    const HypothesisClass F = gen_cheating_code(4, 1.0 / 32.0, 0.5, 1.0);
    OptimismPolicy p(F);
    Environment env(F, 6, 3);
    for (int t = 0; t < 3000; ++t) {
        const PolicyDecision d = p.decide();
        ASSERT_LT(d.arm, 4U);
        p.observe(d.arm, env.sample_reward(d.arm));
    }
}

TEST(OptimisticArm, HighestMeanThenLowestArm) {
    const HypothesisClass H = gen_staircase(false);
    EXPECT_EQ(optimistic_arm(H, {0, 1, 2}), 0U);
    EXPECT_EQ(optimistic_arm(H, {1, 2}), 1U);
}

TEST(Ucb1, RoundRobinWarmStartThenIndex) {
    Ucb1Policy p(3, 1.0);
    for (ArmIndex a = 0; a < 3; ++a) {
        EXPECT_EQ(p.decide().arm, a);
        p.observe(a, a == 2 ? 1.0 : 0.0);
    }
    // Equal counts: the highest mean has the highest index.
    EXPECT_EQ(p.decide().arm, 2U);
    const std::vector<std::uint64_t> counts{10, 1};
    const std::vector<double> means{0.5, 0.0};
    // Index: 0.5 + sqrt(2 ln 11 / 10) = 1.19 versus 0 + sqrt(2 ln 11) = 2.19.
    EXPECT_EQ(ucb1_arm(counts, means, 11, 1.0), 1U);
}

TEST(Oracle, ExploresSupportThenExploits) {
    const Allocation g(std::vector<double>{0.0, 2.0, 0.0});
    // t = 1: ln 1 = 0, T_1 = 0 <= 0, so arm 1 is explored.
    EXPECT_EQ(oracle_arm(0, g, std::vector<std::uint64_t>{0, 0, 0}, 1), 1U);
    // t = 3: 2 ln 3 = 2.197; T_1 = 3 exceeds it.
    EXPECT_EQ(oracle_arm(0, g, std::vector<std::uint64_t>{0, 3, 0}, 3), 0U);
    EXPECT_EQ(oracle_arm(0, g, std::vector<std::uint64_t>{0, 2, 0}, 3), 1U);
}

TEST(Oracle, RegretIsLogarithmicOnTheStaircase) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    PolicyConfig cfg;
    cfg.name = "oracle";
    const RunTrace tr = run(H, b, 2, cfg, 20000, 1);
    // Only the gamma support (arm 4) is explored, about gamma_4 ln n times.
    for (ArmIndex a : {0U, 1U, 3U}) EXPECT_EQ(tr.pulls[a], 0U);
    EXPECT_LE(static_cast<double>(tr.pulls[4]), b.gamma(2)[4] * std::log(20000.0) + 1.0);
}

TEST(ErmForced, TopsUpArmsBelowTheSchedule) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    ForcedSchedule s;
    s.kind = ForcedSchedule::Kind::Log;
    s.c = 1.0;
    ErmForcedPolicy p(H, b, s);
    // Round 1: ln 1 = 0, nobody is below, so the ERM (f1) exploits arm 0.
    // Round 2: arms 1..4 are below ln 2; the lowest of them is forced.
    const ArmIndex first = p.decide().arm;
    EXPECT_EQ(first, 0U);
    p.observe(first, 0.0);
    EXPECT_EQ(p.decide().arm, 1U);
    EXPECT_NEAR(s(100), std::log(100.0), 1e-12);
    ForcedSchedule ll;
    EXPECT_NEAR(ll(100), std::log(std::log(100.0)), 1e-12);
    EXPECT_NEAR(ll(1), std::log(std::log(3.0)), 1e-12);
}

TEST(Switch, CrossingTime) {
    const double t0 = switch_time(1.0, 4, 0.5, 0.01);
    const double slope = std::log(4.0) / 0.25;
    EXPECT_NEAR(0.01 * t0, slope * std::log(t0), 1e-6 * t0);
    EXPECT_GT(t0, slope / 0.01);
    // eps t dominates everywhere: no crossing.
    EXPECT_EQ(switch_time(1e-3, 2, 1.0, 10.0), 0.0);
    EXPECT_THROW(switch_time(0.0, 4, 0.5, 0.01), BadParams);
    EXPECT_THROW(switch_time(1.0, 1, 0.5, 0.01), BadParams);
}

TEST(Switch, UsesUcbThenOracle) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    SwitchPolicy p(H, b, 2, 5.0);
    for (ArmIndex a = 0; a < 5; ++a) {
        EXPECT_EQ(p.decide().arm, a);
        p.observe(a, 0.0);
    }
    // Fresh oracle at round 6: arm 4 is in gamma's support with zero oracle pulls.
    EXPECT_EQ(p.decide().arm, 4U);
}

TEST(MakePolicy, NamesAndErrors) {
    const HypothesisClass H = gen_staircase(false);
    const AllocationBundle b(H);
    for (std::string_view name : kPolicyNames) {
        PolicyConfig cfg;
        cfg.name = std::string(name);
        cfg.switch_t0 = 10.0;
        EXPECT_EQ(make_policy(cfg, H, b, 0)->name(), name);
    }
    PolicyConfig unknown;
    unknown.name = "thompson";
    EXPECT_THROW(make_policy(unknown, H, b, 0), BadParams);
    PolicyConfig sw;
    sw.name = "switch";
    EXPECT_THROW(make_policy(sw, H, b, 0), BadParams);
}

}  // namespace
