// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0

#include "repsim/clustering.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace repsim;

namespace {

Matrix random_distance(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            d(i, j) = u(rng);
            d(j, i) = d(i, j);
        }
    }
    return d;
}

Matrix planted_distance(std::mt19937_64& rng, Index n, Index a, double noise) {
    std::normal_distribution<double> g(0.0, noise);
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            d(i, j) = std::max(0.0, ((i < a) == (j < a) ? 0.3 : 0.7) + g(rng));
            d(j, i) = d(i, j);
        }
    }
    return d;
}

std::vector<std::pair<long, long>> merge_pairs(const LinkageTree& t) {
    std::vector<std::pair<long, long>> out;
    for (const auto& m : t.merges) {
        out.emplace_back(static_cast<long>(m.left), static_cast<long>(m.right));
    }
    return out;
}

// Cophenetic distances by walking each pair up the merge list.
oracle::Mat scalar_cophenetic(const LinkageTree& t) {
    const auto n = t.leaf_count();
    std::vector<long> parent(static_cast<std::size_t>(2 * n - 1), -1);
    for (std::size_t k = 0; k < t.merges.size(); ++k) {
        parent[static_cast<std::size_t>(t.merges[k].left)] = static_cast<long>(n + static_cast<Index>(k));
        parent[static_cast<std::size_t>(t.merges[k].right)] = static_cast<long>(n + static_cast<Index>(k));
    }
    oracle::Mat c = oracle::Mat::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        std::set<long> up;
        for (long v = i; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
            up.insert(v);
        }
        for (long j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            long v = j;
            while (!up.contains(v)) {
                v = parent[static_cast<std::size_t>(v)];
            }
            c(i, j) = t.merges[static_cast<std::size_t>(v - n)].height;
        }
    }
    return c;
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

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST(ToDistance, ConversionAndClamp) {
    Matrix s = Matrix::Constant(3, 3, 0.7);
    s(0, 1) = 0.6;
    s(1, 0) = 0.8;
    s(0, 2) = 1.2;
    s(2, 0) = 1.2;
    Diagnostics diag;
    const Matrix d = to_distance(s, &diag);
    EXPECT_NEAR(d(0, 1), 0.3, 1e-15);
    EXPECT_EQ(d(0, 1), d(1, 0));
    EXPECT_NEAR(d(1, 2), 0.3, 1e-15);
    EXPECT_EQ(d(0, 2), 0.0);
    EXPECT_EQ(d.diagonal(), Vector::Zero(3));
    EXPECT_EQ(diag.warnings.size(), 1u);
}

TEST(Upgma, ThreePointHandExample) {
    Matrix d(3, 3);
    d << 0, 0.1, 0.9,  //
        0.1, 0, 0.9,   //
        0.9, 0.9, 0;
    const auto t = hierarchical_cluster(d);
    ASSERT_EQ(t.merges.size(), 2u);
    EXPECT_EQ(t.merges[0].left, 0);
    EXPECT_EQ(t.merges[0].right, 1);
    EXPECT_NEAR(t.merges[0].height, 0.1, 1e-12);
    EXPECT_EQ(t.merges[1].left, 2);
    EXPECT_EQ(t.merges[1].right, 3);
    EXPECT_NEAR(t.merges[1].height, 0.9, 1e-12);
    EXPECT_EQ(t.merges[1].size, 3);
    EXPECT_EQ(to_string(t.linkage), "average");
}

TEST(Upgma, FourPointUnequalClusterSizes) {
    Matrix d(4, 4);
    d << 0, 0.1, 0.4, 0.9,  //
        0.1, 0, 0.6, 0.7,   //
        0.4, 0.6, 0, 0.6,   //
        0.9, 0.7, 0.6, 0;
    // {0,1} at 0.1; {0,1} vs 2 = (0.4 + 0.6)/2 = 0.5 < d(2,3) = 0.6;
    // {0,1,2} vs 3 = (2 * (0.9 + 0.7)/2 + 0.6)/3 = 2.2/3.
    const auto t = hierarchical_cluster(d);
    ASSERT_EQ(t.merges.size(), 3u);
    EXPECT_EQ(t.merges[1].left, 2);
    EXPECT_EQ(t.merges[1].right, 4);
    EXPECT_NEAR(t.merges[1].height, 0.5, 1e-12);
    EXPECT_EQ(t.merges[2].left, 3);
    EXPECT_EQ(t.merges[2].right, 5);
    EXPECT_NEAR(t.merges[2].height, 2.2 / 3.0, 1e-12);
    EXPECT_EQ(t.merges[2].size, 4);
}

TEST(Upgma, TiesGoToSmallestPair) {
    const Matrix d = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
    const auto t = hierarchical_cluster(d);
    EXPECT_EQ(t.merges[0].left, 0);
    EXPECT_EQ(t.merges[0].right, 1);
    EXPECT_EQ(t.merges[1].left, 2);
    EXPECT_EQ(t.merges[1].right, 3);
    EXPECT_EQ(t.merges[2].left, 4);
    EXPECT_EQ(t.merges[2].right, 5);
}

TEST(Upgma, OtherLinkages) {
    Matrix d(3, 3);
    d << 0, 0.2, 0.5,  //
        0.2, 0, 0.9,   //
        0.5, 0.9, 0;
    EXPECT_NEAR(hierarchical_cluster(d, Linkage::Single).merges[1].height, 0.5, 1e-15);
    EXPECT_NEAR(hierarchical_cluster(d, Linkage::Complete).merges[1].height, 0.9, 1e-15);
    EXPECT_NEAR(hierarchical_cluster(d).merges[1].height, 0.7, 1e-15);
}

TEST(Upgma, TreeInvariants) {
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 2 + trial;
        const auto t = hierarchical_cluster(random_distance(rng, n));
        ASSERT_EQ(static_cast<Index>(t.merges.size()), n - 1);
        std::vector<int> used(static_cast<std::size_t>(2 * n - 1), 0);
        for (std::size_t k = 0; k < t.merges.size(); ++k) {
            if (k > 0) {
                EXPECT_GE(t.merges[k].height, t.merges[k - 1].height);
            }
            EXPECT_LT(t.merges[k].left, t.merges[k].right);
            ++used[static_cast<std::size_t>(t.merges[k].left)];
            ++used[static_cast<std::size_t>(t.merges[k].right)];
        }
        EXPECT_EQ(t.merges.back().size, n);
        for (Index v = 0; v < 2 * n - 2; ++v) {
            EXPECT_EQ(used[static_cast<std::size_t>(v)], 1);
        }
        auto order = t.leaf_order;
        std::sort(order.begin(), order.end());
        for (Index i = 0; i < n; ++i) {
            EXPECT_EQ(order[static_cast<std::size_t>(i)], i);
        }
    }
}

TEST(Upgma, RejectsInvalidInput) {
    EXPECT_THROW(hierarchical_cluster(Matrix::Zero(1, 1)), ValidationError);
    Matrix d = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
    d(0, 1) = 0.5;
    EXPECT_THROW(hierarchical_cluster(d), ValidationError);
    d(1, 0) = 0.5;
    d(2, 2) = 0.1;
    EXPECT_THROW(hierarchical_cluster(d), ValidationError);
}

TEST(Cophenetic, UltrametricReproducedExactly) {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3 + trial % 10;
        const Matrix d = oracle::random_ultrametric(rng, n);
        const auto t = hierarchical_cluster(d);
        EXPECT_LT((cophenetic_distances(t) - d).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(cophenetic_correlation(t, d), 1.0, 1e-10);
    }
}

TEST(Cophenetic, MatchesScalarTraversal) {
    std::mt19937_64 rng(89);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix d = random_distance(rng, 6);
        const auto t = hierarchical_cluster(d);
        const auto c = scalar_cophenetic(t);
        EXPECT_LT((cophenetic_distances(t) - c).cwiseAbs().maxCoeff(), 1e-15);
        std::vector<double> a;
        std::vector<double> b;
        for (Index i = 0; i < 6; ++i) {
            for (Index j = i + 1; j < 6; ++j) {
                a.push_back(c(i, j));
                b.push_back(d(i, j));
            }
        }
        const double ccc = cophenetic_correlation(t, d);
        EXPECT_NEAR(ccc, oracle::scalar_pearson(a, b), 1e-12);
        EXPECT_NEAR(cophenetic_correlation(t, 3.0 * d + Matrix::Constant(6, 6, 0.5)), ccc, 1e-12);
    }
    EXPECT_THROW(cophenetic_correlation(hierarchical_cluster(Matrix::Ones(4, 4) - Matrix::Identity(4, 4)),
                                        Matrix::Ones(4, 4) - Matrix::Identity(4, 4)),
                 DegenerateError);
}

TEST(Upgma, PermutationEquivariance) {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 9;
        const Matrix d = random_distance(rng, n);
        std::vector<Index> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), rng);
        const Matrix pd = permuted(d, p);
        const auto t = hierarchical_cluster(d);
        const auto pt = hierarchical_cluster(pd);
        for (std::size_t k = 0; k < t.merges.size(); ++k) {
            EXPECT_NEAR(t.merges[k].height, pt.merges[k].height, 1e-12);
            EXPECT_EQ(t.merges[k].size, pt.merges[k].size);
        }
        EXPECT_NEAR(cophenetic_correlation(t, d), cophenetic_correlation(pt, pd), 1e-12);
        EXPECT_LT((permuted(cophenetic_distances(t), p) - cophenetic_distances(pt)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(LeafOrder, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const Index n = 2 + trial % 7;
        const Matrix d = random_distance(rng, n);
        const auto t = hierarchical_cluster(d);
        const double best = oracle::exhaustive_leaf_order_cost(merge_pairs(t), d);
        EXPECT_NEAR(leaf_order_cost(t.leaf_order, d), best, 1e-12) << "n=" << n;
        auto reversed = t.leaf_order;
        std::reverse(reversed.begin(), reversed.end());
        EXPECT_NEAR(leaf_order_cost(reversed, d), leaf_order_cost(t.leaf_order, d), 1e-15);
    }
}

TEST(LeafOrder, NeverWorseThanConstructionOrder) {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 20;
        const Matrix d = random_distance(rng, n);
        auto t = hierarchical_cluster(d);
        // Construction order: left child before right child.
        std::vector<Index> order;
        std::function<void(Index)> emit = [&](Index v) {
            if (v < n) {
                order.push_back(v);
                return;
            }
            emit(t.merges[static_cast<std::size_t>(v - n)].left);
            emit(t.merges[static_cast<std::size_t>(v - n)].right);
        };
        emit(2 * n - 2);
        EXPECT_LE(leaf_order_cost(t.leaf_order, d), leaf_order_cost(order, d) + 1e-12);
    }
}

TEST(LeafOrder, TwoLeavesAndDeterministicTies) {
    Matrix d(2, 2);
    d << 0, 0.4, 0.4, 0;
    EXPECT_EQ(hierarchical_cluster(d).leaf_order, (std::vector<Index>{0, 1}));
    Matrix e(3, 3);
    e << 0, 0.1, 0.9,  //
        0.1, 0, 0.9,   //
        0.9, 0.9, 0;
    // All four consistent orders cost 1.0; the lexicographically smallest wins.
    EXPECT_EQ(hierarchical_cluster(e).leaf_order, (std::vector<Index>{0, 1, 2}));
}

TEST(FlatClusters, ExtremesAndNesting) {
    std::mt19937_64 rng(107);
    const Matrix d = random_distance(rng, 10);
    const auto t = hierarchical_cluster(d);
    const auto one = flat_clusters(t, 1);
    EXPECT_EQ(one.k, 1);
    EXPECT_TRUE(std::all_of(one.labels.begin(), one.labels.end(), [](int l) { return l == 0; }));
    const auto all = flat_clusters(t, 10);
    EXPECT_EQ(std::set<int>(all.labels.begin(), all.labels.end()).size(), 10u);
    for (Index k = 2; k <= 10; ++k) {
        const auto fine = flat_clusters(t, k);
        const auto coarse = flat_clusters(t, k - 1);
        EXPECT_EQ(fine.k, k);
        EXPECT_TRUE(fine.warning.empty());
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t j = 0; j < 10; ++j) {
                if (fine.labels[i] == fine.labels[j]) {
                    EXPECT_EQ(coarse.labels[i], coarse.labels[j]);
                }
            }
        }
    }
    EXPECT_EQ(flat_clusters(t, 3).labels, flat_clusters(t, 3).labels);
    EXPECT_THROW(flat_clusters(t, 0), ValidationError);
    EXPECT_THROW(flat_clusters(t, 11), ValidationError);
}

TEST(FlatClusters, TiedHeightsFallBackWithWarning) {
    const Matrix d = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
    const auto f = flat_clusters(hierarchical_cluster(d), 2);
    EXPECT_EQ(f.k, 1);
    EXPECT_FALSE(f.warning.empty());
}

TEST(FlatClusters, PlantedPartitionRecovered) {
    int hits = 0;
    for (int seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(700 + seed);
        const Matrix d = planted_distance(rng, 12, 5, 0.08);
        const auto f = flat_clusters(hierarchical_cluster(d), 2);
        std::vector<int> truth(12, 0);
        std::fill(truth.begin() + 5, truth.end(), 1);
        hits += same_partition(f.labels, truth) ? 1 : 0;
    }
    EXPECT_GE(hits, 19);
}

TEST(Newick, ThreeLeafString) {
    Matrix d(3, 3);
    d << 0, 0.1, 0.9,  //
        0.1, 0, 0.9,   //
        0.9, 0.9, 0;
    const auto t = hierarchical_cluster(d);
    EXPECT_EQ(to_newick(t, {"a", "b", "c"}), "((a:0.1,b:0.1):0.8,c:0.9);");
    EXPECT_EQ(to_newick(t, {"x y", "b", "it's"}), "(('x y':0.1,b:0.1):0.8,'it''s':0.9);");
    EXPECT_THROW(to_newick(t, {"a", "b"}), ValidationError);
}

TEST(Newick, FollowsLeafOrder) {
    std::mt19937_64 rng(109);
    const Matrix d = random_distance(rng, 7);
    const auto t = hierarchical_cluster(d);
    std::vector<std::string> names;
    for (int i = 0; i < 7; ++i) {
        names.push_back("n" + std::to_string(i));
    }
    const auto s = to_newick(t, names);
    std::vector<Index> seen;
    for (std::size_t p = 0; p < s.size(); ++p) {
        if (s[p] == 'n') {
            seen.push_back(s[p + 1] - '0');
        }
    }
    EXPECT_EQ(seen, t.leaf_order);
    EXPECT_EQ(std::count(s.begin(), s.end(), '('), 6);
}
