#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "crop/lp.hpp"
#include "crop/lp_oracle.hpp"

namespace {

using namespace crop;

LinearProgram make(std::vector<double> c, std::vector<std::vector<double>> A, std::vector<double> b) {
    LinearProgram lp;
    lp.objective = std::move(c);
    lp.constraints = std::move(A);
    lp.rhs = std::move(b);
    return lp;
}

// Random LPs in the oracle's size range: at most 4 variables, 6 constraints.
LinearProgram random_lp(std::mt19937_64& gen, bool nonnegative_costs) {
    std::uniform_int_distribution<int> nvars(1, 4);
    std::uniform_int_distribution<int> ncons(0, 6);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LinearProgram lp;
    const int m = nvars(gen);
    const int p = ncons(gen);
    for (int j = 0; j < m; ++j) lp.objective.push_back(nonnegative_costs ? std::abs(coef(gen)) : coef(gen));
    for (int i = 0; i < p; ++i) {
        std::vector<double> row;
        for (int j = 0; j < m; ++j) row.push_back(unit(gen) < 0.25 ? 0.0 : coef(gen));
        lp.constraints.push_back(row);
        lp.rhs.push_back(coef(gen));
    }
    if (unit(gen) < 0.3) {
        for (int j = 0; j < m; ++j) lp.lower_bounds.push_back(unit(gen) < 0.5 ? 0.0 : unit(gen));
    }
    if (unit(gen) < 0.2) {
        const auto j = static_cast<std::size_t>(gen() % static_cast<unsigned>(m));
        if (lp.lower(j) == 0.0) lp.fixed_zero.push_back(j);
    }
    return lp;
}

void expect_feasible(const LinearProgram& lp, const std::vector<double>& x) {
    for (std::size_t j = 0; j < x.size(); ++j) EXPECT_GE(x[j], lp.lower(j) - 1e-9);
    for (std::size_t j : lp.fixed_zero) EXPECT_EQ(x[j], 0.0);
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lhs += lp.constraints[i][j] * x[j];
        EXPECT_GE(lhs, lp.rhs[i] - 1e-9 * (1.0 + std::abs(lp.rhs[i])));
    }
}

TEST(Lp, SingleCoveringConstraint) {
    const LpSolution s = solve(make({1, 1}, {{1, 1}}, {1}));
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective_value, 1.0, 1e-12);
}

TEST(Lp, CheapestCoordinateWins) {
    // min 3x + y  s.t. x + y >= 2  ->  x = 0, y = 2.
    const LpSolution s = solve(make({3, 1}, {{1, 1}}, {2}));
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.x[0], 0.0, 1e-12);
    EXPECT_NEAR(s.x[1], 2.0, 1e-12);
    EXPECT_NEAR(s.objective_value, 2.0, 1e-12);
}

TEST(Lp, Infeasible) {
    // x >= 1 and -x >= 0 (x <= 0).
    EXPECT_EQ(solve(make({1}, {{1}, {-1}}, {1, 0})).status, LpStatus::Infeasible);
}

TEST(Lp, Unbounded) {
    // min -x  s.t. x >= 1.
    EXPECT_EQ(solve(make({-1}, {{1}}, {1})).status, LpStatus::Unbounded);
}

TEST(Lp, NoConstraints) {
    const LpSolution s = solve(make({1, 2}, {}, {}));
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_EQ(s.objective_value, 0.0);
}

TEST(Lp, LowerBoundsAndFixedZero) {
    // min x0 + x1 + x2 s.t. x0 + x1 + x2 >= 3, x1 >= 0.5, x0 fixed at 0.
    LinearProgram lp = make({1, 1, 1}, {{1, 1, 1}}, {3});
    lp.lower_bounds = {0, 0.5, 0};
    lp.fixed_zero = {0};
    const LpSolution s = solve(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_EQ(s.x[0], 0.0);
    EXPECT_GE(s.x[1], 0.5);
    EXPECT_NEAR(s.objective_value, 3.0, 1e-12);
}

TEST(Lp, FixedZeroCanMakeInfeasible) {
    LinearProgram lp = make({1, 1}, {{1, 0}}, {1});
    lp.fixed_zero = {0};
    EXPECT_EQ(solve(lp).status, LpStatus::Infeasible);
}

TEST(Lp, ValidationErrors) {
    EXPECT_THROW(solve(make({1}, {{1, 2}}, {1})), ValidationError);
    EXPECT_THROW(solve(make({1}, {{1}}, {1, 2})), ValidationError);
    EXPECT_THROW(solve(make({NAN}, {{1}}, {1})), ValidationError);
    LinearProgram lp = make({1}, {{1}}, {1});
    lp.lower_bounds = {-1};
    EXPECT_THROW(solve(lp), ValidationError);
    lp.lower_bounds = {0.5};
    lp.fixed_zero = {0};
    EXPECT_THROW(solve(lp), ValidationError);
}

TEST(LpOracle, AgreesOnSmallExamples) {
    const LpSolution a = vertex_enumeration_oracle(make({1, 1}, {{1, 1}}, {1}));
    ASSERT_EQ(a.status, LpStatus::Optimal);
    EXPECT_NEAR(a.objective_value, 1.0, 1e-12);
    EXPECT_EQ(vertex_enumeration_oracle(make({1}, {{1}, {-1}}, {1, 0})).status, LpStatus::Infeasible);
    EXPECT_EQ(vertex_enumeration_oracle(make({-1}, {{1}}, {1})).status, LpStatus::Unbounded);
}

TEST(LpOracle, RejectsLargeDimensions) {
    LinearProgram lp;
    lp.objective.assign(7, 1.0);
    EXPECT_THROW(vertex_enumeration_oracle(lp), DimensionTooLarge);
}

class LpVsOracle : public ::testing::TestWithParam<bool> {};

TEST_P(LpVsOracle, RandomLpsMatchVertexEnumeration) {
    std::mt19937_64 gen(GetParam() ? 11 : 12);
    for (int k = 0; k < 300; ++k) {
        const LinearProgram lp = random_lp(gen, GetParam());
        const LpSolution got = solve(lp);
        const LpSolution want = vertex_enumeration_oracle(lp);
        ASSERT_EQ(got.status, want.status) << "LP #" << k;
        if (got.status != LpStatus::Optimal) continue;
        EXPECT_NEAR(got.objective_value, want.objective_value, 1e-6 * std::max(1.0, std::abs(want.objective_value)))
            << "LP #" << k;
        expect_feasible(lp, got.x);
    }
}

// Nonnegative costs take the dual path; mixed signs take the primal path.
INSTANTIATE_TEST_SUITE_P(BothPaths, LpVsOracle, ::testing::Values(true, false));

TEST(Lp, WeakDualityOnCoveringLps) {
    // For min c'x, Ax >= b, x >= 0 with A, b, c >= 0 any dual-feasible y
    // (A'y <= c, y >= 0) gives b'y <= optimum. y = t * 1 scaled to feasibility.
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const std::size_t m = 4;
        const std::size_t p = 5;
        LinearProgram lp;
        for (std::size_t j = 0; j < m; ++j) lp.objective.push_back(0.1 + u(gen));
        for (std::size_t i = 0; i < p; ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < m; ++j) row.push_back(u(gen));
            lp.constraints.push_back(row);
            lp.rhs.push_back(u(gen));
        }
        const LpSolution s = solve(lp);
        ASSERT_EQ(s.status, LpStatus::Optimal);
        double scale = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < p; ++i) col += lp.constraints[i][j];
            if (col > 0.0) scale = std::min(scale, lp.objective[j] / col);
        }
        double dual = 0.0;
        for (double b : lp.rhs) dual += scale * b;
        EXPECT_LE(dual, s.objective_value + 1e-9);
    }
}

TEST(Lp, Deterministic) {
    std::mt19937_64 gen(5);
    for (int k = 0; k < 50; ++k) {
        const LinearProgram lp = random_lp(gen, k % 2 == 0);
        const LpSolution a = solve(lp);
        const LpSolution b = solve(lp);
        EXPECT_EQ(a.status, b.status);
        EXPECT_EQ(a.x, b.x);
    }
}

TEST(Lp, DegenerateCoveringLpTerminates) {
    // Many identical and nested covering rows: a classic cycling trap.
    LinearProgram lp;
    lp.objective = {1, 1, 1, 1, 1, 1};
    for (int rep = 0; rep < 40; ++rep) {
        for (std::size_t j = 0; j + 1 < 6; ++j) {
            std::vector<double> row(6, 0.0);
            row[j] = 0.5;
            row[j + 1] = 0.5;
            lp.constraints.push_back(row);
            lp.rhs.push_back(1.0);
        }
    }
    const LpSolution s = solve(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective_value, 6.0, 1e-9);
}

}  // namespace
