// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Pairwise representational-similarity metrics and similarity-matrix assembly.
//
// Every pairwise function takes two stimulus-by-unit matrices with the same
// number of rows (same stimuli, same order). Inputs are expected to be
// column-centered; pairwise_matrix centers them itself.

#pragma once

#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"
#include "repsim/transport.hpp"

#include <Eigen/SVD>

#include <array>
#include <atomic>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace repsim {

struct MetricConfig {
    double svcca_variance_threshold = 0.99;
    double ridge_lambda = 0.0;  // added to X^T X in the CCA and least-squares paths
    std::optional<Index> rsa_stimulus_subsample;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(svcca_variance_threshold > 0.0 && svcca_variance_threshold <= 1.0)) {
            throw ValidationError("svcca_variance_threshold must lie in (0,1]");
        }
        if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) {
            throw ValidationError("ridge_lambda must be a nonnegative finite number");
        }
        if (rsa_stimulus_subsample && *rsa_stimulus_subsample < 3) {
            throw ValidationError("rsa_stimulus_subsample must be at least 3");
        }
    }
};

struct CcaResult {
    Vector correlations;      // nonincreasing, in [0, 1]
    Matrix left_directions;   // N_i x k
    Matrix right_directions;  // N_j x k
};

inline constexpr std::array<std::string_view, 7> kPairwiseMetrics = {"svcca",      "pwcca",      "cka",    "rsa",
                                                                     "softmatch", "procrustes", "linpred"};
inline constexpr std::array<std::string_view, 8> kMetricIds = {"svcca",      "pwcca",      "cka",     "rsa",
                                                               "softmatch", "procrustes", "linpred", "average"};

inline bool is_symmetric_metric(std::string_view id) { return id == "cka" || id == "rsa"; }

namespace metrics_detail {

inline void require_same_stimuli(const Matrix& xi, const Matrix& xj, std::string_view what) {
    if (xi.rows() != xj.rows()) {
        throw ValidationError(std::string(what) + ": stimulus counts differ (" + std::to_string(xi.rows()) + " vs " +
                              std::to_string(xj.rows()) + ")");
    }
    if (xi.rows() < 2 || xi.cols() < 1 || xj.cols() < 1) {
        throw ValidationError(std::string(what) + ": need M >= 2 and at least one unit per input");
    }
}

inline Eigen::BDCSVD<Matrix> thin_svd(const Matrix& x) {
    return Eigen::BDCSVD<Matrix>(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

constexpr double kRankTolerance = 1e-10;

inline void require_full_rank(const Vector& s, Index cols, std::string_view what) {
    const double smax = s.size() > 0 ? s(0) : 0.0;
    if (s.size() < cols || smax <= 0.0 || s(s.size() - 1) <= kRankTolerance * smax) {
        throw SingularityError(std::string(what) +
                               ": input is rank-deficient; set ridge_lambda > 0 to regularize");
    }
}

// X = U S V^T; with ridge lambda, (X^T X + lambda I)^{-1/2} maps X onto
// basis = U S / sqrt(S^2 + lambda). `directions` satisfies X * directions = basis.
struct Whitened {
    Matrix basis;
    Matrix directions;
};

inline Whitened whiten(const Matrix& x, double ridge, std::string_view what) {
    const auto svd = thin_svd(x);
    const Vector& s = svd.singularValues();
    if (ridge == 0.0) {
        require_full_rank(s, x.cols(), what);
    }
    const Vector denom = (s.array().square() + ridge).sqrt();
    Whitened w;
    w.basis = svd.matrixU() * (s.array() / denom.array()).matrix().asDiagonal();
    w.directions = svd.matrixV() * denom.cwiseInverse().asDiagonal();
    return w;
}

// Leading left singular vectors scaled by their singular values, keeping the
// smallest prefix whose squared singular values reach `threshold` of the total.
inline Matrix svd_reduce(const Matrix& x, double threshold) {
    const auto svd = thin_svd(x);
    const Vector& s = svd.singularValues();
    const double total = s.squaredNorm();
    if (total <= 0.0) {
        throw SingularityError("svcca: input has no variance");
    }
    double acc = 0.0;
    Index keep = 0;
    while (keep < s.size()) {
        acc += s(keep) * s(keep);
        ++keep;
        if (acc >= threshold * total * (1.0 - 1e-12)) {
            break;
        }
    }
    return svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal();
}

// Uniform sample of `count` distinct stimulus indices, sorted.
inline std::vector<Index> sample_stimuli(Index total, Index count, std::uint64_t seed) {
    std::vector<Index> idx(static_cast<std::size_t>(total));
    for (Index k = 0; k < total; ++k) {
        idx[static_cast<std::size_t>(k)] = k;
    }
    std::mt19937_64 rng(seed);
    for (Index k = 0; k < count; ++k) {
        const auto span = static_cast<std::uint64_t>(total - k);
        const auto pick = k + static_cast<Index>(rng() % span);
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
    }
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Strict upper triangle of the RDM (1 - Pearson correlation between rows).
inline std::vector<double> rdm_upper(const Matrix& x, std::string_view side) {
    const Index m = x.rows();
    Matrix z = x;
    z.colwise() -= x.rowwise().mean();
    for (Index r = 0; r < m; ++r) {
        const double norm = z.row(r).norm();
        const double scale = x.row(r).cwiseAbs().maxCoeff();
        if (norm <= 1e-13 * scale * std::sqrt(static_cast<double>(x.cols())) || norm == 0.0) {
            throw DegenerateError("rsa: stimulus row " + std::to_string(r) + " of " + std::string(side) +
                                  " has zero variance");
        }
        z.row(r) /= norm;
    }
    const Matrix corr = z * z.transpose();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Index a = 0; a < m; ++a) {
        for (Index b = a + 1; b < m; ++b) {
            out.push_back(1.0 - corr(a, b));
        }
    }
    return out;
}

}  // namespace metrics_detail

/// Canonical correlation analysis by whitening both inputs with a thin SVD and
/// taking the SVD of the cross-product of the whitened factors. Canonical
/// variates X*A and Y*B have unit sample variance.
inline CcaResult cca(const Matrix& xi, const Matrix& xj, double ridge_lambda = 0.0) {
    metrics_detail::require_same_stimuli(xi, xj, "cca");
    const auto wi = metrics_detail::whiten(xi, ridge_lambda, "cca (left input)");
    const auto wj = metrics_detail::whiten(xj, ridge_lambda, "cca (right input)");
    const Matrix cross = wi.basis.transpose() * wj.basis;
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Index k = std::min(cross.rows(), cross.cols());
    const double unit = std::sqrt(static_cast<double>(xi.rows() - 1));
    CcaResult res;
    res.correlations = svd.singularValues().head(k).cwiseMax(0.0).cwiseMin(1.0);
    res.left_directions = unit * wi.directions * svd.matrixU().leftCols(k);
    res.right_directions = unit * wj.directions * svd.matrixV().leftCols(k);
    return res;
}

/// SVCCA: SVD-truncate each input to `svcca_variance_threshold` of its
/// variance, then average the canonical correlations of the reduced pair.
inline double svcca(const Matrix& xi, const Matrix& xj, const MetricConfig& cfg = {}) {
    metrics_detail::require_same_stimuli(xi, xj, "svcca");
    const Matrix ri = metrics_detail::svd_reduce(xi, cfg.svcca_variance_threshold);
    const Matrix rj = metrics_detail::svd_reduce(xj, cfg.svcca_variance_threshold);
    return cca(ri, rj, cfg.ridge_lambda).correlations.mean();
}

/// Projection weights of PWCCA: L1 norm of X*a_i, normalized to sum to one.
inline Vector pwcca_weights(const Matrix& xi, const CcaResult& res) {
    const Matrix proj = xi * res.left_directions;
    Vector w = proj.cwiseAbs().colwise().sum().transpose();
    const double total = w.sum();
    if (!(total > 0.0)) {
        throw DegenerateError("pwcca: projections of the left input vanish");
    }
    return w / total;
}

/// PWCCA on unreduced inputs; weights come from `xi`, so the score is asymmetric.
inline double pwcca(const Matrix& xi, const Matrix& xj, const MetricConfig& cfg = {}) {
    const auto res = cca(xi, xj, cfg.ridge_lambda);
    return pwcca_weights(xi, res).dot(res.correlations);
}

/// Linear CKA: ||Xi^T Xj||_F^2 / (||Xi^T Xi||_F ||Xj^T Xj||_F).
inline double linear_cka(const Matrix& xi, const Matrix& xj) {
    metrics_detail::require_same_stimuli(xi, xj, "cka");
    const double cross = (xi.transpose() * xj).squaredNorm();
    const double ni = (xi.transpose() * xi).norm();
    const double nj = (xj.transpose() * xj).norm();
    if (!(ni > 0.0) || !(nj > 0.0)) {
        throw DegenerateError("cka: score undefined for an all-zero representation");
    }
    return std::clamp(cross / (ni * nj), 0.0, 1.0);
}

/// RSA: Pearson correlation between the strict upper triangles of the two
/// RDMs (dissimilarity = 1 - Pearson correlation between stimulus rows).
/// With rsa_stimulus_subsample set, both RDMs use the same seeded subset.
inline double rsa(const Matrix& xi, const Matrix& xj, const MetricConfig& cfg = {}) {
    metrics_detail::require_same_stimuli(xi, xj, "rsa");
    if (xi.rows() < 3) {
        throw ValidationError("rsa: need at least 3 stimuli");
    }
    std::vector<double> ui;
    std::vector<double> uj;
    if (cfg.rsa_stimulus_subsample && *cfg.rsa_stimulus_subsample < xi.rows()) {
        const auto idx = metrics_detail::sample_stimuli(xi.rows(), *cfg.rsa_stimulus_subsample, cfg.rng_seed);
        ui = metrics_detail::rdm_upper(xi(idx, Eigen::all), "left input");
        uj = metrics_detail::rdm_upper(xj(idx, Eigen::all), "right input");
    } else {
        if (cfg.rsa_stimulus_subsample && *cfg.rsa_stimulus_subsample > xi.rows()) {
            throw ValidationError("rsa: rsa_stimulus_subsample exceeds the stimulus count");
        }
        ui = metrics_detail::rdm_upper(xi, "left input");
        uj = metrics_detail::rdm_upper(xj, "right input");
    }
    const double r = detail::pearson_or_nan(ui, uj);
    if (std::isnan(r)) {
        throw DegenerateError("rsa: an RDM is constant, correlation undefined");
    }
    return r;
}

/// Optimal transport plan between the units of xi and xj under squared
/// Euclidean cost, with uniform marginals 1/N_i and 1/N_j.
inline TransportPlan soft_match_plan(const Matrix& xi, const Matrix& xj) {
    metrics_detail::require_same_stimuli(xi, xj, "softmatch");
    return solve_uniform_transport(unit_cost_matrix(xi, xj));
}

/// Mean unit-wise correlation between xj and xi * P (P scaled by N_i so each
/// predicted unit is a convex combination of xi's units).
inline double soft_match_score(const Matrix& xi, const Matrix& xj, const Matrix& plan, Diagnostics* diag = nullptr) {
    const Matrix pred = xi * (plan * static_cast<double>(xi.cols()));
    return detail::mean_unitwise_correlation(xj, pred, xj.cols(), diag, "softmatch");
}

inline double soft_match(const Matrix& xi, const Matrix& xj, Diagnostics* diag = nullptr) {
    return soft_match_score(xi, xj, soft_match_plan(xi, xj).plan, diag);
}

/// Orthogonal map R minimizing ||Xj - Xi R|| after zero-padding both inputs to
/// the common width.
inline Matrix procrustes_rotation(const Matrix& xi_padded, const Matrix& xj_padded) {
    Eigen::JacobiSVD<Matrix> svd(xi_padded.transpose() * xj_padded, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

/// Procrustes score: mean correlation between the real units of xj and the
/// aligned xi. Padded columns of xj are not scored.
inline double procrustes(const Matrix& xi, const Matrix& xj, Diagnostics* diag = nullptr) {
    metrics_detail::require_same_stimuli(xi, xj, "procrustes");
    if (xi.squaredNorm() == 0.0 || xj.squaredNorm() == 0.0) {
        throw DegenerateError("procrustes: score undefined for an all-zero representation");
    }
    const Index width = std::max(xi.cols(), xj.cols());
    Matrix pi = Matrix::Zero(xi.rows(), width);
    Matrix pj = Matrix::Zero(xj.rows(), width);
    pi.leftCols(xi.cols()) = xi;
    pj.leftCols(xj.cols()) = xj;
    const Matrix pred = pi * procrustes_rotation(pi, pj);
    return detail::mean_unitwise_correlation(pj, pred, xj.cols(), diag, "procrustes");
}

/// Least-squares (optionally ridge) map L predicting xj from xi.
inline Matrix linear_map(const Matrix& xi, const Matrix& xj, double ridge_lambda = 0.0) {
    metrics_detail::require_same_stimuli(xi, xj, "linpred");
    const auto svd = metrics_detail::thin_svd(xi);
    const Vector& s = svd.singularValues();
    if (ridge_lambda == 0.0) {
        metrics_detail::require_full_rank(s, xi.cols(), "linpred");
    }
    const Vector gain = (s.array() / (s.array().square() + ridge_lambda)).matrix();
    return svd.matrixV() * gain.asDiagonal() * (svd.matrixU().transpose() * xj);
}

/// Mean unit-wise correlation between xj and its in-sample least-squares
/// prediction from xi. Asymmetric.
inline double linear_predictivity(const Matrix& xi, const Matrix& xj, const MetricConfig& cfg = {},
                                  Diagnostics* diag = nullptr) {
    const Matrix pred = xi * linear_map(xi, xj, cfg.ridge_lambda);
    return detail::mean_unitwise_correlation(xj, pred, xj.cols(), diag, "linpred");
}

inline void check_pairwise_metric(std::string_view metric_id) {
    if (std::find(kPairwiseMetrics.begin(), kPairwiseMetrics.end(), metric_id) != kPairwiseMetrics.end()) {
        return;
    }
    std::string valid;
    for (auto id : kPairwiseMetrics) {
        valid += (valid.empty() ? "" : ", ") + std::string(id);
    }
    if (metric_id == "average") {
        throw ValidationError("metric 'average' is built from other matrices with average_baseline; pairwise ids: " +
                              valid);
    }
    throw ValidationError("unknown metric id '" + std::string(metric_id) + "'; valid ids: " + valid);
}

/// Dispatches one directional score by metric id.
inline double pairwise_score(std::string_view metric_id, const Matrix& xi, const Matrix& xj, const MetricConfig& cfg,
                             Diagnostics* diag = nullptr) {
    if (metric_id == "svcca") {
        return svcca(xi, xj, cfg);
    }
    if (metric_id == "pwcca") {
        return pwcca(xi, xj, cfg);
    }
    if (metric_id == "cka") {
        return linear_cka(xi, xj);
    }
    if (metric_id == "rsa") {
        return rsa(xi, xj, cfg);
    }
    if (metric_id == "softmatch") {
        return soft_match(xi, xj, diag);
    }
    if (metric_id == "procrustes") {
        return procrustes(xi, xj, diag);
    }
    if (metric_id == "linpred") {
        return linear_predictivity(xi, xj, cfg, diag);
    }
    check_pairwise_metric(metric_id);
    return 0.0;
}

/// Full n x n similarity matrix for one metric. CKA and RSA are computed once
/// per unordered pair and mirrored; the other metrics are computed in both
/// directions and stored unsymmetrized. Pairs run on up to `jobs` threads;
/// results do not depend on the schedule.
inline SimilarityMatrix pairwise_matrix(std::string_view metric_id, const std::vector<ActivationMatrix>& acts,
                                        const MetricConfig& cfg, unsigned jobs = 1, Diagnostics* diag = nullptr) {
    cfg.validate();
    check_pairwise_metric(metric_id);
    const Index n = static_cast<Index>(acts.size());
    if (n < 1) {
        throw ValidationError("pairwise_matrix: no activations");
    }
    for (const auto& a : acts) {
        a.validate();
        if (a.stimulus_count() != acts.front().stimulus_count()) {
            throw ValidationError("pairwise_matrix: stimulus count of '" + a.model_id + "' (" +
                                  std::to_string(a.stimulus_count()) + ") differs from '" + acts.front().model_id +
                                  "' (" + std::to_string(acts.front().stimulus_count()) + ")");
        }
    }
    std::vector<Matrix> centered;
    centered.reserve(acts.size());
    for (const auto& a : acts) {
        centered.push_back(a.centered ? a.data : center(a).data);
    }

    const bool sym = is_symmetric_metric(metric_id);
    struct Job {
        Index i;
        Index j;
    };
    std::vector<Job> work;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j && (!sym || i < j)) {
                work.push_back({i, j});
            }
        }
    }
    std::vector<double> out(work.size(), 0.0);
    std::vector<Diagnostics> job_diag(work.size());
    std::vector<std::string> job_error(work.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
            const auto [i, j] = work[k];
            MetricConfig local = cfg;
            const auto lo = static_cast<std::uint64_t>(std::min(i, j));
            const auto hi = static_cast<std::uint64_t>(std::max(i, j));
            local.rng_seed = derive_seed(cfg.rng_seed, metric_id, lo, hi);
            try {
                out[k] = pairwise_score(metric_id, centered[static_cast<std::size_t>(i)],
                                        centered[static_cast<std::size_t>(j)], local, &job_diag[k]);
            } catch (const std::exception& e) {
                job_error[k] = e.what();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    SimilarityMatrix sm;
    sm.metric_id = std::string(metric_id);
    sm.symmetric = sym;
    sm.values = Matrix::Identity(n, n);
    for (const auto& a : acts) {
        sm.model_ids.push_back(a.model_id);
    }
    for (std::size_t k = 0; k < work.size(); ++k) {
        const auto [i, j] = work[k];
        if (!job_error[k].empty()) {
            throw Error("metric '" + sm.metric_id + "' pair (" + std::to_string(i) + "," + std::to_string(j) + ") [" +
                        sm.model_ids[static_cast<std::size_t>(i)] + " vs " +
                        sm.model_ids[static_cast<std::size_t>(j)] + "]: " + job_error[k]);
        }
        for (auto& w : job_diag[k].warnings) {
            warn(diag, sm.metric_id + " (" + std::to_string(i) + "," + std::to_string(j) + "): " + w);
        }
        sm.values(i, j) = out[k];
        if (sym) {
            sm.values(j, i) = out[k];
        }
    }
    return sm;
}

/// Average baseline: symmetrize each matrix, min-max rescale its off-diagonal
/// entries to [0, 1], average entrywise, set the diagonal to 1.
inline SimilarityMatrix average_baseline(const std::vector<SimilarityMatrix>& mats) {
    if (mats.size() < 2) {
        throw ValidationError("average_baseline: need at least 2 matrices");
    }
    const auto& ids = mats.front().model_ids;
    const Index n = static_cast<Index>(ids.size());
    Matrix acc = Matrix::Zero(n, n);
    for (const auto& m : mats) {
        if (m.model_ids != ids || m.values.rows() != n || m.values.cols() != n) {
            throw ValidationError("average_baseline: matrix '" + m.metric_id + "' has a different model ordering");
        }
        const Matrix sym = 0.5 * (m.values + m.values.transpose());
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (i != j) {
                    lo = std::min(lo, sym(i, j));
                    hi = std::max(hi, sym(i, j));
                }
            }
        }
        if (!(hi > lo)) {
            throw DegenerateError("average_baseline: off-diagonal entries of '" + m.metric_id +
                                  "' are constant, cannot min-max rescale");
        }
        acc += ((sym.array() - lo) / (hi - lo)).matrix();
    }
    SimilarityMatrix out;
    out.metric_id = "average";
    out.model_ids = ids;
    out.symmetric = true;
    out.values = acc / static_cast<double>(mats.size());
    out.values.diagonal().setOnes();
    return out;
}

}  // namespace repsim
