#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "crop/allocation.hpp"
#include "crop/instances.hpp"

namespace {

using namespace crop;

TEST(CheatingCode, ShapeAndGoldenRows) {
    const double eps = 1.0 / 32.0;
    const HypothesisClass F = gen_cheating_code(4, eps, 0.5, 1.0);
    EXPECT_EQ(F.size(), 16U);
    EXPECT_EQ(F.arms(), 6U);
    // Hypothesis 0 is h(1, 0): base arm 1 best at 1, code of arm index 0.
    const std::vector<double> h10{1.0, 1 - eps, 1 - eps, 1 - eps, 0.0, 0.0};
    for (ArmIndex a = 0; a < 6; ++a) EXPECT_DOUBLE_EQ(F[0][a], h10[a]);
    // Every hypothesis encodes a*(g) in binary on the last two arms, LSB last.
    for (HypothesisId g = 0; g < F.size(); ++g) {
        const ArmIndex best = F.best(g).arm;
        EXPECT_DOUBLE_EQ(F[g][5], (best & 1U) ? 0.5 : 0.0);
        EXPECT_DOUBLE_EQ(F[g][4], (best & 2U) ? 0.5 : 0.0);
    }
}

TEST(CheatingCode, SizeIsK0SquaredForSeveralK0) {
    for (std::size_t k0 : {2, 3, 5, 8}) {
        const HypothesisClass F = gen_cheating_code(k0, 0.01, 0.5, 1.0);
        EXPECT_EQ(F.size(), k0 * k0);
        EXPECT_EQ(F.arms(), k0 + code_bits(k0));
    }
}

TEST(CheatingCode, BadParams) {
    EXPECT_THROW(gen_cheating_code(1, 0.1, 0.5, 1.0), BadParams);
    EXPECT_THROW(gen_cheating_code(4, 0.0, 0.5, 1.0), BadParams);
    EXPECT_THROW(gen_cheating_code(4, 0.1, 0.0, 1.0), BadParams);
    EXPECT_THROW(gen_cheating_code(4, 0.1, 0.6, 1.0), BadParams);
    EXPECT_THROW(gen_cheating_code(4, 0.1, 0.5, 0.0), BadParams);
}

TEST(CheatingCode, PreconditionWarning) {
    EXPECT_TRUE(cheating_code_precondition(1.0 / 32.0, 0.5));   // 16 > 8
    EXPECT_FALSE(cheating_code_precondition(1.0 / 8.0, 0.5));   // 4 <= 8
    InstanceSpec spec;
    spec.family = Family::CheatingCode;
    spec.eps = 0.3;
    const Instance inst = make_instance(spec);
    EXPECT_EQ(inst.warnings.size(), 1U);
    EXPECT_EQ(inst.truth, std::optional<HypothesisId>(0));
}

TEST(Staircase, ExactTable) {
    const HypothesisClass H = gen_staircase(false);
    ASSERT_EQ(H.size(), 3U);
    const std::vector<std::vector<double>> want{
        {1.00, 0.99, 0.98, 0.00, 0.00}, {0.98, 0.99, 0.98, 0.25, 0.00}, {0.97, 0.97, 0.98, 0.25, 0.25}};
    for (HypothesisId f = 0; f < 3; ++f) {
        for (ArmIndex a = 0; a < 5; ++a) EXPECT_DOUBLE_EQ(H[f][a], want[f][a]);
    }
    const HypothesisClass Hp = gen_staircase(true);
    ASSERT_EQ(Hp.size(), 4U);
    EXPECT_DOUBLE_EQ(Hp[3][4], 0.5);
    EXPECT_DOUBLE_EQ(Hp[3][1], 0.99);
}

TEST(Conflict, SmallRatioInstanceHasExpectedSupports) {
    const HypothesisClass F = gen_conflict(0.05, 0.5, 1.5, 1.0);
    const AllocationBundle b(F);
    EXPECT_EQ(b.gamma(1).support_size(), 1U);
    EXPECT_TRUE(b.gamma(1).in_support(2));
    EXPECT_EQ(b.gamma(2).support_size(), 1U);
    EXPECT_TRUE(b.gamma(2).in_support(3));
}

// With r = 2 and Lambda = 1/2 the third hypothesis is (1, 1-eps, 1/2, 1):
// its best arm is tied, so the generator rejects the parameters.
TEST(Conflict, TiedBestArmIsRejected) {
    EXPECT_THROW(gen_conflict(0.05, 0.5, 2.0, 1.0), BadParams);
}

TEST(Conflict, BadParams) {
    EXPECT_THROW(gen_conflict(0.0, 0.5, 1.5, 1.0), BadParams);
    EXPECT_THROW(gen_conflict(0.05, 0.0, 1.5, 1.0), BadParams);
    EXPECT_THROW(gen_conflict(0.05, 0.5, 1.0, 1.0), BadParams);
    // Large eps makes arm 1 informative for f2 and fails the support check.
    EXPECT_THROW(gen_conflict(0.9, 0.1, 1.5, 1.0), BadParams);
}

TEST(Json, RoundTrip) {
    InstanceSpec spec;
    spec.family = Family::CheatingCode;
    spec.k0 = 3;
    spec.truth = 4;
    const Instance a = make_instance(spec);
    const Instance b = from_json(to_json(a));
    ASSERT_EQ(b.hypotheses.size(), a.hypotheses.size());
    for (HypothesisId f = 0; f < a.hypotheses.size(); ++f) {
        EXPECT_EQ(a.hypotheses[f], b.hypotheses[f]);
    }
    EXPECT_EQ(b.truth, a.truth);
    EXPECT_EQ(b.spec.family, Family::CheatingCode);
    EXPECT_EQ(b.spec.k0, 3U);
    EXPECT_EQ(b.hypotheses.sigma(), a.hypotheses.sigma());
}

TEST(Json, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "crop_instance_roundtrip.json";
    InstanceSpec spec;
    spec.family = Family::Staircase;
    spec.truth = 2;
    save(make_instance(spec), path.string());
    const Instance back = load(path.string());
    EXPECT_EQ(back.truth, std::optional<HypothesisId>(2));
    EXPECT_EQ(back.hypotheses.size(), 3U);
    std::filesystem::remove(path);
}

TEST(Json, Errors) {
    EXPECT_THROW(from_json(nlohmann::json::array()), ParseError);
    EXPECT_THROW(from_json(nlohmann::json{{"hypotheses", {{1, 0}, {0, 1}}}}), ParseError);
    EXPECT_THROW(from_json(nlohmann::json{{"sigma", 1}, {"hypotheses", {{1, "x"}, {0, 1}}}}), ParseError);
    EXPECT_THROW(from_json(nlohmann::json{{"sigma", 1}, {"hypotheses", {{1, 1}, {0, 1}}}}), ValidationError);
    EXPECT_THROW(from_json(nlohmann::json{{"sigma", 1}, {"hypotheses", {{1, 0}, {0, 1}}}, {"truth", 5}}),
                 ValidationError);
    EXPECT_THROW(load("/nonexistent/instance.json"), ParseError);
}

TEST(Families, ParseAndPrint) {
    for (Family f : {Family::CheatingCode, Family::Staircase, Family::StaircasePlus, Family::Conflict,
                     Family::Custom}) {
        EXPECT_EQ(parse_family(to_string(f)), f);
    }
    EXPECT_THROW(parse_family("nope"), BadParams);
    InstanceSpec spec;
    EXPECT_THROW(make_instance(spec), BadParams);
}

}  // namespace
