// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Cross-metric agreement and cross-layer consistency of similarity matrices.

#pragma once

#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace repsim {

struct AgreementMatrix {
    std::vector<std::string> metric_ids;
    Matrix values;  // Pearson correlations, symmetric, unit diagonal
};

/// Symmetrize via (S + S^T)/2 and return the strict upper triangle, row-major.
inline std::vector<double> vectorize_upper(const Matrix& s) {
    const Index n = s.rows();
    if (n < 3 || s.cols() != n) {
        throw ValidationError("vectorize_upper: need a square matrix with n >= 3");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            out.push_back(0.5 * (s(i, j) + s(j, i)));
        }
    }
    return out;
}

inline std::vector<double> vectorize_upper(const SimilarityMatrix& s) { return vectorize_upper(s.values); }

/// Pairwise Pearson correlations between the vectorized upper triangles.
inline AgreementMatrix metric_agreement(const std::vector<SimilarityMatrix>& mats) {
    if (mats.size() < 2) {
        throw ValidationError("metric_agreement: need at least 2 matrices");
    }
    const auto& ids = mats.front().model_ids;
    std::vector<std::vector<double>> vecs;
    AgreementMatrix out;
    for (const auto& m : mats) {
        if (m.model_ids != ids) {
            throw ValidationError("metric_agreement: matrix '" + m.metric_id + "' has a different model set");
        }
        vecs.push_back(vectorize_upper(m));
        if (detail::variance(vecs.back()) == 0.0) {
            throw DegenerateError("metric_agreement: off-diagonal entries of '" + m.metric_id + "' are constant");
        }
        out.metric_ids.push_back(m.metric_id);
    }
    const auto m = static_cast<Index>(mats.size());
    out.values = Matrix::Identity(m, m);
    for (Index a = 0; a < m; ++a) {
        for (Index b = a + 1; b < m; ++b) {
            const double r =
                detail::pearson_or_nan(vecs[static_cast<std::size_t>(a)], vecs[static_cast<std::size_t>(b)]);
            out.values(a, b) = r;
            out.values(b, a) = r;
        }
    }
    return out;
}

struct LayerConsistency {
    double mean_r = 0.0;
    struct Pair {
        double depth_a;
        double depth_b;
        double r;
    };
    std::vector<Pair> pair_rs;  // ascending (depth_a, depth_b)
};

inline const std::vector<double>& default_depths() {
    static const std::vector<double> depths = {0.6, 0.8, 1.0};
    return depths;
}

/// Pearson correlation of the vectorized matrices for every pair of the
/// requested depths, and their mean.
inline LayerConsistency cross_layer_consistency(const std::map<double, SimilarityMatrix>& per_depth,
                                                const std::vector<double>& depths = default_depths()) {
    if (depths.size() < 2) {
        throw ValidationError("cross_layer_consistency: need at least 2 depths");
    }
    std::vector<double> sorted = depths;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<double>> vecs;
    const std::vector<std::string>* ids = nullptr;
    for (double d : sorted) {
        const auto it = per_depth.find(d);
        if (it == per_depth.end()) {
            throw ValidationError("cross_layer_consistency: missing depth " + io_detail::format_double(d));
        }
        if (ids != nullptr && it->second.model_ids != *ids) {
            throw ValidationError("cross_layer_consistency: depth matrices cover different model sets");
        }
        ids = &it->second.model_ids;
        vecs.push_back(vectorize_upper(it->second));
    }
    LayerConsistency out;
    for (std::size_t a = 0; a < sorted.size(); ++a) {
        for (std::size_t b = a + 1; b < sorted.size(); ++b) {
            const double r = detail::pearson_or_nan(vecs[a], vecs[b]);
            if (std::isnan(r)) {
                throw DegenerateError("cross_layer_consistency: constant matrix at depth " +
                                      io_detail::format_double(detail::variance(vecs[a]) == 0.0 ? sorted[a] : sorted[b]));
            }
            out.pair_rs.push_back({sorted[a], sorted[b], r});
            out.mean_r += r;
        }
    }
    out.mean_r /= static_cast<double>(out.pair_rs.size());
    return out;
}

/// Layer index floor(d * L), clamped to [1, L]. Products within 1e-9 of an
/// integer round to it, so decimal depths such as 0.29 * 100 land on 29.
inline int select_layer_index(double depth, int layers) {
    if (!(depth > 0.0 && depth <= 1.0) || layers < 1) {
        throw ValidationError("select_layer_index: need 0 < d <= 1 and L >= 1");
    }
    const auto idx = static_cast<int>(std::floor(depth * static_cast<double>(layers) + 1e-9));
    return std::clamp(idx, 1, layers);
}

}  // namespace repsim
