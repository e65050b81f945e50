// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0

#include "repsim/metrics.hpp"
#include "repsim/transport.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace repsim;

namespace {

void expect_marginals(const TransportPlan& p) {
    const Index m = p.plan.rows();
    const Index n = p.plan.cols();
    EXPECT_GE(p.plan.minCoeff(), 0.0);
    for (Index r = 0; r < m; ++r) {
        EXPECT_NEAR(p.plan.row(r).sum(), 1.0 / static_cast<double>(m), 1e-8);
    }
    for (Index c = 0; c < n; ++c) {
        EXPECT_NEAR(p.plan.col(c).sum(), 1.0 / static_cast<double>(n), 1e-8);
    }
}

}  // namespace

TEST(Transport, PermutationRecoveredForSquareProblem) {
    std::mt19937_64 rng(5);
    const Matrix x = oracle::centered_random(rng, 60, 5);
    const std::vector<int> perm = {3, 0, 4, 1, 2};
    Matrix y(60, 5);
    for (int k = 0; k < 5; ++k) {
        y.col(perm[static_cast<std::size_t>(k)]) = x.col(k);
    }
    const auto plan = soft_match_plan(x, y);
    expect_marginals(plan);
    for (int k = 0; k < 5; ++k) {
        for (int l = 0; l < 5; ++l) {
            EXPECT_NEAR(plan.plan(k, l), l == perm[static_cast<std::size_t>(k)] ? 0.2 : 0.0, 1e-12);
        }
    }
    EXPECT_NEAR(plan.cost, 0.0, 1e-10);
    EXPECT_NEAR(soft_match(x, y), 1.0, 1e-12);
}

TEST(Transport, TwoByOnePolytopeIsAPoint) {
    Matrix cost(2, 1);
    cost << 3.0, 7.0;
    const auto p = solve_uniform_transport(cost);
    EXPECT_DOUBLE_EQ(p.plan(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(p.plan(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(p.cost, 5.0);
}

TEST(Transport, MatchesBruteForcePermutationCost) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 4;
        const Matrix x = oracle::centered_random(rng, 30, n);
        const Matrix y = oracle::centered_random(rng, 30, n);
        const auto plan = soft_match_plan(x, y);
        expect_marginals(plan);
        const auto best = oracle::brute_force_permutation(x, y);
        EXPECT_NEAR(plan.cost, best.cost, 1e-6) << "trial " << trial;
    }
}

TEST(Transport, RectangularPlanSatisfiesInvariants) {
    std::mt19937_64 rng(23);
    for (auto [m, n] : std::vector<std::pair<int, int>>{{3, 7}, {8, 5}, {1, 4}, {12, 12}, {40, 25}}) {
        const Matrix x = oracle::centered_random(rng, 50, m);
        const Matrix y = oracle::centered_random(rng, 50, n);
        const Matrix c = unit_cost_matrix(x, y);
        const auto plan = solve_uniform_transport(c);
        expect_marginals(plan);
        double direct = 0.0;
        for (int k = 0; k < m; ++k) {
            for (int l = 0; l < n; ++l) {
                direct += plan.plan(k, l) * (x.col(k) - y.col(l)).squaredNorm();
            }
        }
        EXPECT_NEAR(plan.cost, direct, 1e-8);
    }
}

TEST(Transport, PlanBeatsRandomFeasiblePlans) {
    // Any convex combination of permutation-like feasible plans costs at least
    // the optimum; sample a few feasible plans of T(3, 6).
    std::mt19937_64 rng(29);
    const Matrix c = oracle::random_matrix(rng, 3, 6).cwiseAbs();
    const auto opt = solve_uniform_transport(c);
    std::vector<int> cols = {0, 1, 2, 3, 4, 5};
    for (int trial = 0; trial < 200; ++trial) {
        std::shuffle(cols.begin(), cols.end(), rng);
        Matrix p = Matrix::Zero(3, 6);
        for (int k = 0; k < 6; ++k) {
            p(k / 2, cols[static_cast<std::size_t>(k)]) = 1.0 / 6.0;
        }
        EXPECT_LE(opt.cost, (p.array() * c.array()).sum() + 1e-12);
    }
}

TEST(Transport, DegenerateCostsTerminate) {
    // All-equal costs: every feasible plan is optimal; the solver must still stop.
    const auto p = solve_uniform_transport(Matrix::Ones(9, 9));
    expect_marginals(p);
    EXPECT_NEAR(p.cost, 1.0, 1e-12);
}

TEST(Transport, RejectsBadInput) {
    EXPECT_THROW(solve_uniform_transport(Matrix(0, 3)), ValidationError);
    Matrix c = Matrix::Ones(2, 2);
    c(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(solve_uniform_transport(c), ValidationError);
}
