// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Similarity Network Fusion over per-metric similarity matrices.
//
// Pipeline per metric: similarity -> dissimilarity Q -> scaled exponential
// kernel W -> row-normalized symmetric W_hat and KNN-sparse S. The networks
// are then fused by cross-diffusion with diagonal regularization.

#pragma once

#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"

#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace repsim {

struct SnfConfig {
    int K = 5;          // neighborhood size
    double mu = 0.5;    // kernel bandwidth multiplier
    int T = 20;         // diffusion iterations
    double alpha = 1.0;  // diagonal regularization

    void validate(Index n) const {
        if (K < 1 || K >= n) {
            throw ValidationError("snf: K must satisfy 1 <= K < n (K=" + std::to_string(K) +
                                  ", n=" + std::to_string(n) + ")");
        }
        if (!(mu > 0.0 && mu < 1.0)) {
            throw ValidationError("snf: mu must lie in (0,1)");
        }
        if (T < 1) {
            throw ValidationError("snf: T must be positive");
        }
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
            throw ValidationError("snf: alpha must be nonnegative");
        }
    }
};

struct AffinityNetwork {
    Matrix dissimilarity;    // Q
    Matrix kernel;           // W
    Matrix normalized_full;  // W_hat
    Matrix knn_sparse;       // S
};

/// Q_ij = [i != j] (1 - (S_ij + S_ji) / 2). Negative entries (similarities
/// above 1) are clamped to 0 and reported.
inline Matrix to_dissimilarity(const Matrix& s, Diagnostics* diag = nullptr) {
    const Index n = s.rows();
    Matrix q = Matrix::Ones(n, n) - 0.5 * (s + s.transpose());
    q.diagonal().setZero();
    Index clamped = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (q(i, j) < 0.0) {
                q(i, j) = 0.0;
                ++clamped;
            }
        }
    }
    if (clamped > 0) {
        warn(diag, "to_dissimilarity: clamped " + std::to_string(clamped) + " negative entries to 0");
    }
    return q;
}

/// The K nearest neighbours of `i` (excluding i) by ascending `key`, ties to
/// the lower index. Pass a negated affinity to rank by largest affinity.
inline std::vector<Index> nearest_neighbors(const Matrix& key, Index i, int k) {
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(key.cols() - 1));
    for (Index j = 0; j < key.cols(); ++j) {
        if (j != i) {
            idx.push_back(j);
        }
    }
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return key(i, a) < key(i, b); });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

/// Scaled exponential kernel
///   W_ij = exp(-Q_ij^2 / (2 sigma_ij^2)) / sqrt(2 pi sigma_ij^2),
///   sigma_ij = mu (Qbar_i + Qbar_j + Q_ij) / 3,
/// with Qbar_i the mean dissimilarity from i to its K nearest neighbours.
inline Matrix affinity_kernel(const Matrix& q, const SnfConfig& cfg) {
    const Index n = q.rows();
    cfg.validate(n);
    Vector qbar(n);
    for (Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (Index j : nearest_neighbors(q, i, cfg.K)) {
            sum += q(i, j);
        }
        qbar(i) = sum / cfg.K;
    }
    Matrix w(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double sigma = cfg.mu * (qbar(i) + qbar(j) + q(i, j)) / 3.0;
            if (!(sigma > 0.0)) {
                throw DegenerateError("affinity_kernel: zero bandwidth at (" + std::to_string(i) + "," +
                                      std::to_string(j) + "); dissimilarities vanish");
            }
            const double var = sigma * sigma;
            w(i, j) = std::exp(-q(i, j) * q(i, j) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
        }
    }
    return w;
}

/// Row normalization W_tilde = C^{-1} W, symmetrization W_hat, and the
/// KNN-sparse kernel keeping the K largest W_hat entries per row (excluding
/// the diagonal), renormalized to sum to one.
inline AffinityNetwork normalize_network(const Matrix& w, const SnfConfig& cfg) {
    const Index n = w.rows();
    cfg.validate(n);
    AffinityNetwork net;
    net.kernel = w;
    const Vector rows = w.rowwise().sum();
    const Matrix tilde = rows.cwiseInverse().asDiagonal() * w;
    net.normalized_full = 0.5 * (tilde + tilde.transpose());
    net.knn_sparse = Matrix::Zero(n, n);
    const Matrix neg = -net.normalized_full;
    for (Index i = 0; i < n; ++i) {
        const auto nbrs = nearest_neighbors(neg, i, cfg.K);
        double sum = 0.0;
        for (Index j : nbrs) {
            sum += net.normalized_full(i, j);
        }
        for (Index j : nbrs) {
            net.knn_sparse(i, j) = net.normalized_full(i, j) / sum;
        }
    }
    return net;
}

inline AffinityNetwork build_network(const SimilarityMatrix& s, const SnfConfig& cfg, Diagnostics* diag = nullptr) {
    const Matrix q = to_dissimilarity(s.values, diag);
    auto net = normalize_network(affinity_kernel(q, cfg), cfg);
    net.dissimilarity = q;
    return net;
}

/// Cross-network diffusion:
///   P_v <- B(S_v * mean_{u != v} P_u * S_v^T),  B(X) = (X + X^T)/2 + alpha I,
/// for T steps from P_v = W_hat_v, then P = mean_v P_v, P_tilde = D^{-1} P,
/// and the result (P_tilde + P_tilde^T + I) / 2.
inline Matrix snf_fuse(const std::vector<AffinityNetwork>& nets, const SnfConfig& cfg) {
    if (nets.size() < 2) {
        throw ValidationError("SNF requires >= 2 metrics");
    }
    const Index n = nets.front().normalized_full.rows();
    cfg.validate(n);
    for (const auto& net : nets) {
        if (net.normalized_full.rows() != n || net.knn_sparse.rows() != n) {
            throw ValidationError("snf_fuse: networks differ in size");
        }
    }
    const std::size_t v_count = nets.size();
    std::vector<Matrix> cur;
    cur.reserve(v_count);
    for (const auto& net : nets) {
        cur.push_back(net.normalized_full);
    }
    std::vector<Matrix> next(v_count);
    const Matrix eye = Matrix::Identity(n, n);
    for (int t = 0; t < cfg.T; ++t) {
        Matrix total = Matrix::Zero(n, n);
        for (const auto& p : cur) {
            total += p;
        }
        for (std::size_t v = 0; v < v_count; ++v) {
            const Matrix others = (total - cur[v]) / static_cast<double>(v_count - 1);
            const Matrix x = nets[v].knn_sparse * others * nets[v].knn_sparse.transpose();
            next[v] = 0.5 * (x + x.transpose()) + cfg.alpha * eye;
        }
        std::swap(cur, next);
    }
    Matrix p = Matrix::Zero(n, n);
    for (const auto& m : cur) {
        p += m;
    }
    p /= static_cast<double>(v_count);
    const Vector rows = p.rowwise().sum();
    const Matrix tilde = rows.cwiseInverse().asDiagonal() * p;
    Matrix fused = 0.5 * (tilde + tilde.transpose() + eye);
    // Exact symmetry regardless of rounding in the sum above.
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            fused(j, i) = fused(i, j);
        }
    }
    return fused;
}

/// to_dissimilarity -> affinity_kernel -> normalize_network for every input,
/// then snf_fuse. The result is a symmetric SimilarityMatrix with id "snf".
inline SimilarityMatrix fuse_pipeline(const std::vector<SimilarityMatrix>& mats, const SnfConfig& cfg,
                                      Diagnostics* diag = nullptr) {
    if (mats.size() < 2) {
        throw ValidationError("SNF requires >= 2 metrics");
    }
    const auto& ids = mats.front().model_ids;
    std::vector<AffinityNetwork> nets;
    nets.reserve(mats.size());
    for (const auto& m : mats) {
        if (m.model_ids != ids) {
            throw ValidationError("snf: matrix '" + m.metric_id + "' has a different model ordering");
        }
        const std::string where = "snf: metric '" + m.metric_id + "': ";
        try {
            nets.push_back(build_network(m, cfg, diag));
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        } catch (const DegenerateError& e) {
            throw DegenerateError(where + e.what());
        } catch (const Error& e) {
            throw Error(where + e.what());
        }
    }
    SimilarityMatrix out;
    out.metric_id = "snf";
    out.model_ids = ids;
    out.symmetric = true;
    out.values = snf_fuse(nets, cfg);
    return out;
}

}  // namespace repsim
