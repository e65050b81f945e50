// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0

#include "repsim/fusion.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace repsim;

namespace {

SimilarityMatrix make(const std::string& id, const Matrix& v) {
    SimilarityMatrix s;
    s.metric_id = id;
    for (Index i = 0; i < v.rows(); ++i) {
        s.model_ids.push_back("m" + std::to_string(i));
    }
    s.values = v;
    s.symmetric = v.isApprox(v.transpose(), 0.0);
    return s;
}

Matrix random_similarity(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> u(0.0, 0.9);
    Matrix s = Matrix::Ones(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) {
                s(i, j) = u(rng);
            }
        }
    }
    return s;
}

// Two planted blocks of sizes a and n - a with within ~ 0.8 and between ~ 0.2.
Matrix planted(std::mt19937_64& rng, Index n, Index a, double noise) {
    std::normal_distribution<double> g(0.0, noise);
    Matrix s = Matrix::Ones(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const bool same = (i < a) == (j < a);
            s(i, j) = std::clamp((same ? 0.8 : 0.2) + g(rng), 0.0, 0.99);
            s(j, i) = s(i, j);
        }
    }
    return s;
}

Matrix hand_a() {
    Matrix s(4, 4);
    s << 1.0, 0.9, 0.3, 0.2,  //
        0.8, 1.0, 0.4, 0.1,   //
        0.3, 0.5, 1.0, 0.7,   //
        0.1, 0.2, 0.6, 1.0;
    return s;
}

Matrix hand_b() {
    Matrix s(4, 4);
    s << 1.0, 0.6, 0.5, 0.1,  //
        0.6, 1.0, 0.2, 0.3,   //
        0.5, 0.2, 1.0, 0.8,   //
        0.1, 0.3, 0.8, 1.0;
    return s;
}

Matrix permuted(const Matrix& m, const std::vector<Index>& p) {
    Matrix out(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            out(i, j) = m(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

}  // namespace

TEST(Dissimilarity, ArithmeticAndClamping) {
    Matrix s = Matrix::Ones(3, 3);
    EXPECT_EQ(to_dissimilarity(s), Matrix::Zero(3, 3));
    s(0, 1) = 0.6;
    s(1, 0) = 0.8;
    s(1, 2) = 1.3;
    const Matrix q0 = to_dissimilarity(s);
    EXPECT_NEAR(q0(0, 1), 0.3, 1e-15);
    EXPECT_EQ(q0(0, 1), q0(1, 0));
    Diagnostics diag;
    const Matrix q = to_dissimilarity(s, &diag);
    EXPECT_EQ(q(1, 2), 0.0);
    EXPECT_EQ(q(2, 1), 0.0);
    ASSERT_EQ(diag.warnings.size(), 1u);
    EXPECT_NE(diag.warnings[0].find("clamped 2"), std::string::npos);
}

TEST(AffinityKernel, ZeroDissimilarityAndScaling) {
    SnfConfig cfg;
    cfg.K = 2;
    Matrix q(4, 4);
    q << 0, 1, 2, 3,  //
        1, 0, 1, 2,   //
        2, 1, 0, 1,   //
        3, 2, 1, 0;
    const Matrix w = affinity_kernel(q, cfg);
    // Row 0: neighbours 1 and 2 -> Qbar 1.5; row 1: neighbours 0 and 2 -> Qbar 1.
    const double sigma00 = 0.5 * (1.5 + 1.5 + 0.0) / 3.0;
    EXPECT_NEAR(w(0, 0), 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma00 * sigma00), 1e-12);
    const double sigma01 = 0.5 * (1.5 + 1.0 + 1.0) / 3.0;
    EXPECT_NEAR(w(0, 1), std::exp(-1.0 / (2.0 * sigma01 * sigma01)) / std::sqrt(2.0 * std::numbers::pi * sigma01 * sigma01),
                1e-12);
    EXPECT_LT((w - w.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GT(w.minCoeff(), 0.0);

    const Matrix w3 = affinity_kernel(3.0 * q, cfg);
    EXPECT_LT((3.0 * w3 - w).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(affinity_kernel(Matrix::Zero(4, 4), cfg), DegenerateError);
}

TEST(NormalizeNetwork, RowSumsAndNeighborSets) {
    SnfConfig cfg;
    cfg.K = 2;
    const auto net = build_network(make("a", hand_a()), cfg);
    const auto ref = oracle::scalar_snf_network(hand_a(), 2, 0.5);
    EXPECT_LT((net.normalized_full - ref.w_hat).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((net.knn_sparse - ref.sparse).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix tilde = net.kernel.rowwise().sum().cwiseInverse().asDiagonal() * net.kernel;
    for (Index i = 0; i < 4; ++i) {
        EXPECT_NEAR(tilde.row(i).sum(), 1.0, 1e-10);
        EXPECT_NEAR(net.knn_sparse.row(i).sum(), 1.0, 1e-9);
        EXPECT_EQ((net.knn_sparse.row(i).array() > 0.0).count(), 2);
        EXPECT_EQ(net.knn_sparse(i, i), 0.0);
    }
    // Hand matrix A pairs {0,1} and {2,3}: each model keeps its partner.
    EXPECT_GT(net.knn_sparse(0, 1), 0.0);
    EXPECT_GT(net.knn_sparse(1, 0), 0.0);
    EXPECT_GT(net.knn_sparse(2, 3), 0.0);
    EXPECT_GT(net.knn_sparse(3, 2), 0.0);
}

TEST(Snf, OneDiffusionStepMatchesScalarTrace) {
    SnfConfig cfg;
    cfg.K = 2;
    cfg.mu = 0.5;
    cfg.alpha = 1.0;
    cfg.T = 1;
    const auto fused = fuse_pipeline({make("a", hand_a()), make("b", hand_b())}, cfg);
    const auto ra = oracle::scalar_snf_network(hand_a(), 2, 0.5);
    const auto rb = oracle::scalar_snf_network(hand_b(), 2, 0.5);
    const auto step = oracle::scalar_snf_step({ra.w_hat, rb.w_hat}, {ra.sparse, rb.sparse}, 1.0);
    const auto expected = oracle::scalar_snf_finish(step);
    EXPECT_LT((fused.values - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Snf, ThreeNetworksScalarTrace) {
    std::mt19937_64 rng(51);
    SnfConfig cfg;
    cfg.K = 3;
    cfg.T = 1;
    cfg.alpha = 0.5;
    std::vector<SimilarityMatrix> mats;
    std::vector<oracle::Mat> w_hat;
    std::vector<oracle::Mat> sparse;
    for (int v = 0; v < 3; ++v) {
        const Matrix s = random_similarity(rng, 7);
        mats.push_back(make("m" + std::to_string(v), s));
        const auto r = oracle::scalar_snf_network(s, 3, 0.5);
        w_hat.push_back(r.w_hat);
        sparse.push_back(r.sparse);
    }
    const auto expected = oracle::scalar_snf_finish(oracle::scalar_snf_step(w_hat, sparse, 0.5));
    EXPECT_LT((fuse_pipeline(mats, cfg).values - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Snf, SymmetricDiagonalDominantAndEquivariant) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 8 + trial;
        std::vector<SimilarityMatrix> mats;
        for (int v = 0; v < 3; ++v) {
            mats.push_back(make("m" + std::to_string(v), random_similarity(rng, n)));
        }
        const auto fused = fuse_pipeline(mats, SnfConfig{});
        EXPECT_EQ(fused.metric_id, "snf");
        EXPECT_TRUE(fused.symmetric);
        EXPECT_EQ(fused.values, fused.values.transpose());
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                EXPECT_GE(fused.values(i, i), fused.values(i, j));
            }
        }

        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<SimilarityMatrix> pm;
        for (const auto& m : mats) {
            pm.push_back(make(m.metric_id, permuted(m.values, perm)));
        }
        const auto pf = fuse_pipeline(pm, SnfConfig{});
        EXPECT_LT((pf.values - permuted(fused.values, perm)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Snf, PreservesPlantedBlocks) {
    std::mt19937_64 rng(57);
    const Matrix base = planted(rng, 10, 5, 0.03);
    const auto fused = fuse_pipeline({make("a", base), make("b", base)}, SnfConfig{});
    double min_within = 1e9;
    double max_between = -1e9;
    for (Index i = 0; i < 10; ++i) {
        for (Index j = 0; j < 10; ++j) {
            if (i == j) {
                continue;
            }
            if ((i < 5) == (j < 5)) {
                min_within = std::min(min_within, fused.values(i, j));
            } else {
                max_between = std::max(max_between, fused.values(i, j));
            }
        }
    }
    EXPECT_GT(min_within, max_between);
}

TEST(Snf, TwoFamilyPlantedMeansSeparate) {
    std::mt19937_64 rng(59);
    const auto fused =
        fuse_pipeline({make("a", planted(rng, 6, 3, 0.1)), make("b", planted(rng, 6, 3, 0.1))}, SnfConfig{.K = 2});
    double within = 0.0;
    double between = 0.0;
    for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 6; ++j) {
            if (i != j) {
                ((i < 3) == (j < 3) ? within : between) += fused.values(i, j);
            }
        }
    }
    EXPECT_GT(within / 12.0, between / 18.0);
}

TEST(Snf, StableOverManyIterations) {
    std::mt19937_64 rng(61);
    SnfConfig cfg;
    cfg.T = 100;
    for (int trial = 0; trial < 5; ++trial) {
        const auto fused =
            fuse_pipeline({make("a", random_similarity(rng, 12)), make("b", random_similarity(rng, 12))}, cfg);
        EXPECT_TRUE(fused.values.allFinite());
        EXPECT_GE(fused.values.minCoeff(), 0.0);
        EXPECT_LE(fused.values.maxCoeff(), 1.0);
    }
}

TEST(Snf, IdenticalInputsKeepTopNeighbourSets) {
    // Blocks of K + 1 models: each model's K strongest input neighbours are its
    // block mates, and the fused matrix keeps exactly that set on top.
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(0.1, 0.4);
    std::uniform_real_distribution<double> close(0.8, 0.95);
    const Index n = 12;
    Matrix s = Matrix::Ones(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            s(i, j) = i / 4 == j / 4 ? close(rng) : u(rng);
            s(j, i) = s(i, j);
        }
    }
    SnfConfig cfg;
    cfg.K = 3;
    const auto net = build_network(make("a", s), cfg);
    const auto fused = fuse_pipeline({make("a", s), make("b", s)}, cfg);
    for (Index i = 0; i < n; ++i) {
        auto input_top = nearest_neighbors(-net.normalized_full, i, cfg.K);
        auto fused_top = nearest_neighbors(-fused.values, i, cfg.K);
        std::sort(input_top.begin(), input_top.end());
        std::sort(fused_top.begin(), fused_top.end());
        EXPECT_EQ(fused_top, input_top) << "row " << i;
        for (Index j : input_top) {
            EXPECT_EQ(j / 4, i / 4);
        }
    }
}

TEST(Snf, InputValidation) {
    std::mt19937_64 rng(71);
    const auto a = make("a", random_similarity(rng, 6));
    try {
        fuse_pipeline({a}, SnfConfig{});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("SNF requires >= 2 metrics"), std::string::npos);
    }
    auto b = make("b", random_similarity(rng, 6));
    std::swap(b.model_ids[0], b.model_ids[1]);
    EXPECT_THROW(fuse_pipeline({a, b}, SnfConfig{}), ValidationError);
    SnfConfig bad;
    bad.K = 6;
    EXPECT_THROW(fuse_pipeline({a, make("c", random_similarity(rng, 6))}, bad), ValidationError);
    bad = SnfConfig{};
    bad.mu = 1.0;
    EXPECT_THROW(bad.validate(10), ValidationError);
}

TEST(Snf, ErrorsNameTheMetric) {
    const auto flat = make("flat", Matrix::Ones(6, 6));
    std::mt19937_64 rng(73);
    try {
        fuse_pipeline({make("ok", random_similarity(rng, 6)), flat}, SnfConfig{.K = 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("'flat'"), std::string::npos) << e.what();
    }
}
