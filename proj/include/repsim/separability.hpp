// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Family separability of a similarity matrix: contrastive ratio, d' and a
// two-family silhouette, each averaged over the two directions of a pair.
//
// Value sets use ordered pairs (i, j), i != j, so asymmetric matrices
// contribute both S_ij and S_ji. For a symmetric matrix every value simply
// appears twice, which leaves means and population variances unchanged.

#pragma once

#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace repsim {

/// Per-model family label, parallel to SimilarityMatrix::model_ids.
using FamilyLabels = std::vector<std::string>;

struct DirectionalStats {
    double mu_within = 0.0;
    double mu_between = 0.0;
    double var_within = 0.0;
    double var_between = 0.0;
};

struct PairSeparability {
    std::string family_a;
    std::string family_b;
    double contrastive_ratio = 0.0;
    double d_prime = 0.0;
    bool d_prime_infinite = false;
    double silhouette = 0.0;
    DirectionalStats stats_a;  // family_a supplies the within-family set
    DirectionalStats stats_b;
    std::size_t zero_silhouette_models = 0;  // models with max(a, b) = 0
};

struct SeparabilitySummary {
    double contrastive_ratio = 0.0;
    double d_prime = 0.0;
    bool d_prime_infinite = false;
    double silhouette = 0.0;
};

struct SeparabilityReport {
    std::string metric_id;
    std::vector<PairSeparability> family_pairs;  // lexicographic by family name
    SeparabilitySummary overall;                 // mean over family pairs
    SeparabilitySummary pooled;                  // statistics over all within/between values at once
    std::vector<std::string> warnings;
};

namespace separability_detail {

inline std::vector<double> within_values(const Matrix& s, const FamilyLabels& labels, const std::string& fam) {
    std::vector<double> out;
    const Index n = s.rows();
    for (Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] != fam) {
            continue;
        }
        for (Index j = 0; j < n; ++j) {
            if (j != i && labels[static_cast<std::size_t>(j)] == fam) {
                out.push_back(s(i, j));
            }
        }
    }
    return out;
}

inline std::vector<double> between_values(const Matrix& s, const FamilyLabels& labels, const std::string& fa,
                                          const std::string& fb) {
    std::vector<double> out;
    const Index n = s.rows();
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const auto& li = labels[static_cast<std::size_t>(i)];
            const auto& lj = labels[static_cast<std::size_t>(j)];
            if ((li == fa && lj == fb) || (li == fb && lj == fa)) {
                out.push_back(s(i, j));
            }
        }
    }
    return out;
}

inline void check_inputs(const SimilarityMatrix& s, const FamilyLabels& labels, const std::string& fa,
                         const std::string& fb) {
    if (static_cast<Index>(labels.size()) != s.size()) {
        throw ValidationError("separability: label count does not match matrix size");
    }
    if (fa == fb) {
        throw ValidationError("separability: the two families must differ");
    }
    for (const auto* fam : {&fa, &fb}) {
        const auto members = std::count(labels.begin(), labels.end(), *fam);
        if (members < 2) {
            throw ValidationError("separability: family '" + *fam + "' needs at least 2 models, has " +
                                  std::to_string(members));
        }
    }
}

inline DirectionalStats stats(const std::vector<double>& within, const std::vector<double>& between) {
    return {detail::mean(within), detail::mean(between), detail::variance(within), detail::variance(between)};
}

inline double ratio(const DirectionalStats& st) {
    const double denom = st.mu_within + st.mu_between;
    if (denom == 0.0) {
        throw DegenerateError("contrastive ratio undefined: mu_within + mu_between = 0");
    }
    return (st.mu_within - st.mu_between) / denom;
}

struct DPrime {
    double value;
    bool infinite;
};

inline DPrime dprime(const DirectionalStats& st) {
    const double pooled = 0.5 * (st.var_within + st.var_between);
    const double diff = st.mu_within - st.mu_between;
    if (pooled == 0.0) {
        if (diff == 0.0) {
            return {0.0, false};
        }
        return {std::copysign(std::numeric_limits<double>::infinity(), diff), true};
    }
    return {diff / std::sqrt(pooled), false};
}

}  // namespace separability_detail

/// Directional statistics with `fam_within` supplying the within-family set
/// and all famA x famB cross pairs (both orders) as the between set.
inline DirectionalStats directional_stats(const SimilarityMatrix& s, const FamilyLabels& labels,
                                          const std::string& fam_within, const std::string& fam_other) {
    return separability_detail::stats(separability_detail::within_values(s.values, labels, fam_within),
                                      separability_detail::between_values(s.values, labels, fam_within, fam_other));
}

inline double contrastive_ratio(const SimilarityMatrix& s, const FamilyLabels& labels, const std::string& fa,
                                const std::string& fb) {
    separability_detail::check_inputs(s, labels, fa, fb);
    const double ra = separability_detail::ratio(directional_stats(s, labels, fa, fb));
    const double rb = separability_detail::ratio(directional_stats(s, labels, fb, fa));
    return 0.5 * (ra + rb);
}

/// d' averaged over both directions. When both variances vanish the result is
/// +/-infinity (`infinite` set) unless the means coincide, then 0.
inline double d_prime(const SimilarityMatrix& s, const FamilyLabels& labels, const std::string& fa,
                      const std::string& fb, bool* infinite = nullptr) {
    separability_detail::check_inputs(s, labels, fa, fb);
    const auto da = separability_detail::dprime(directional_stats(s, labels, fa, fb));
    const auto db = separability_detail::dprime(directional_stats(s, labels, fb, fa));
    if (infinite != nullptr) {
        *infinite = da.infinite || db.infinite;
    }
    return 0.5 * (da.value + db.value);
}

/// Distance view used for silhouettes: 1 - (S + S^T) / 2 with zero diagonal.
inline Matrix similarity_to_distance(const Matrix& s) {
    Matrix d = Matrix::Ones(s.rows(), s.cols()) - 0.5 * (s + s.transpose());
    d.diagonal().setZero();
    return d;
}

/// Mean silhouette over the models of famA and famB, restricted to those two
/// families. Models with max(a, b) = 0 score 0 and are counted in `zero_count`.
inline double silhouette_pair(const Matrix& distance, const FamilyLabels& labels, const std::string& fa,
                              const std::string& fb, std::size_t* zero_count = nullptr) {
    const Index n = distance.rows();
    double total = 0.0;
    std::size_t members = 0;
    std::size_t zeros = 0;
    for (Index i = 0; i < n; ++i) {
        const auto& own = labels[static_cast<std::size_t>(i)];
        if (own != fa && own != fb) {
            continue;
        }
        const auto& other = (own == fa) ? fb : fa;
        double a_sum = 0.0;
        double b_sum = 0.0;
        std::size_t a_n = 0;
        std::size_t b_n = 0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const auto& lj = labels[static_cast<std::size_t>(j)];
            if (lj == own) {
                a_sum += distance(i, j);
                ++a_n;
            } else if (lj == other) {
                b_sum += distance(i, j);
                ++b_n;
            }
        }
        if (a_n == 0 || b_n == 0) {
            throw ValidationError("silhouette: each family needs at least 2 models");
        }
        const double a = a_sum / static_cast<double>(a_n);
        const double b = b_sum / static_cast<double>(b_n);
        const double denom = std::max(a, b);
        if (denom == 0.0) {
            ++zeros;
        } else {
            total += (b - a) / denom;
        }
        ++members;
    }
    if (zero_count != nullptr) {
        *zero_count = zeros;
    }
    return total / static_cast<double>(members);
}

inline double silhouette_pair(const SimilarityMatrix& s, const FamilyLabels& labels, const std::string& fa,
                              const std::string& fb) {
    separability_detail::check_inputs(s, labels, fa, fb);
    return silhouette_pair(similarity_to_distance(s.values), labels, fa, fb);
}

inline FamilyLabels family_labels(const SimilarityMatrix& s, const std::vector<ModelRecord>& records) {
    FamilyLabels labels;
    labels.reserve(s.model_ids.size());
    for (const auto& id : s.model_ids) {
        const auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.model_id == id; });
        if (it == records.end()) {
            throw ValidationError("separability: model '" + id + "' has no record");
        }
        labels.emplace_back(to_string(it->family));
    }
    return labels;
}

/// All three measures for every unordered pair of families with at least two
/// members, plus pair means (`overall`) and global pooling (`pooled`).
inline SeparabilityReport full_report(const SimilarityMatrix& s, const FamilyLabels& labels) {
    if (static_cast<Index>(labels.size()) != s.size()) {
        throw ValidationError("separability: label count does not match matrix size");
    }
    SeparabilityReport rep;
    rep.metric_id = s.metric_id;
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) {
        ++counts[l];
    }
    std::vector<std::string> eligible;
    for (const auto& [fam, c] : counts) {
        if (c >= 2) {
            eligible.push_back(fam);
        } else {
            rep.warnings.push_back("family '" + fam + "' has " + std::to_string(c) +
                                   " model(s); its pairs are skipped");
        }
    }
    if (eligible.size() < 2) {
        rep.warnings.push_back("fewer than two families with at least 2 models; no pairs reported");
        return rep;
    }
    const Matrix dist = similarity_to_distance(s.values);
    for (std::size_t a = 0; a < eligible.size(); ++a) {
        for (std::size_t b = a + 1; b < eligible.size(); ++b) {
            PairSeparability p;
            p.family_a = eligible[a];
            p.family_b = eligible[b];
            p.stats_a = directional_stats(s, labels, p.family_a, p.family_b);
            p.stats_b = directional_stats(s, labels, p.family_b, p.family_a);
            p.contrastive_ratio =
                0.5 * (separability_detail::ratio(p.stats_a) + separability_detail::ratio(p.stats_b));
            const auto da = separability_detail::dprime(p.stats_a);
            const auto db = separability_detail::dprime(p.stats_b);
            p.d_prime = 0.5 * (da.value + db.value);
            p.d_prime_infinite = da.infinite || db.infinite;
            p.silhouette = silhouette_pair(dist, labels, p.family_a, p.family_b, &p.zero_silhouette_models);
            if (p.zero_silhouette_models > 0) {
                rep.warnings.push_back(p.family_a + "/" + p.family_b + ": " +
                                       std::to_string(p.zero_silhouette_models) +
                                       " model(s) with zero distances scored silhouette 0");
            }
            rep.family_pairs.push_back(std::move(p));
        }
    }
    const double npairs = static_cast<double>(rep.family_pairs.size());
    for (const auto& p : rep.family_pairs) {
        rep.overall.contrastive_ratio += p.contrastive_ratio / npairs;
        rep.overall.d_prime += p.d_prime / npairs;
        rep.overall.silhouette += p.silhouette / npairs;
        rep.overall.d_prime_infinite = rep.overall.d_prime_infinite || p.d_prime_infinite;
    }

    // Pooled: every ordered within-family pair vs every ordered cross-family
    // pair among eligible families; silhouette uses b(i) over all other
    // eligible families.
    const std::set<std::string> keep(eligible.begin(), eligible.end());
    std::vector<double> within;
    std::vector<double> between;
    const Index n = s.size();
    for (Index i = 0; i < n; ++i) {
        const auto& li = labels[static_cast<std::size_t>(i)];
        if (!keep.contains(li)) {
            continue;
        }
        for (Index j = 0; j < n; ++j) {
            const auto& lj = labels[static_cast<std::size_t>(j)];
            if (j == i || !keep.contains(lj)) {
                continue;
            }
            (li == lj ? within : between).push_back(s.values(i, j));
        }
    }
    const auto pooled = separability_detail::stats(within, between);
    rep.pooled.contrastive_ratio = separability_detail::ratio(pooled);
    const auto dp = separability_detail::dprime(pooled);
    rep.pooled.d_prime = dp.value;
    rep.pooled.d_prime_infinite = dp.infinite;
    double sil = 0.0;
    std::size_t members = 0;
    for (Index i = 0; i < n; ++i) {
        const auto& li = labels[static_cast<std::size_t>(i)];
        if (!keep.contains(li)) {
            continue;
        }
        double a_sum = 0.0;
        double b_sum = 0.0;
        std::size_t a_n = 0;
        std::size_t b_n = 0;
        for (Index j = 0; j < n; ++j) {
            const auto& lj = labels[static_cast<std::size_t>(j)];
            if (j == i || !keep.contains(lj)) {
                continue;
            }
            if (lj == li) {
                a_sum += dist(i, j);
                ++a_n;
            } else {
                b_sum += dist(i, j);
                ++b_n;
            }
        }
        const double a = a_sum / static_cast<double>(a_n);
        const double b = b_sum / static_cast<double>(b_n);
        const double denom = std::max(a, b);
        sil += denom == 0.0 ? 0.0 : (b - a) / denom;
        ++members;
    }
    rep.pooled.silhouette = sil / static_cast<double>(members);
    return rep;
}

inline SeparabilityReport full_report(const SimilarityMatrix& s, const std::vector<ModelRecord>& records) {
    return full_report(s, family_labels(s, records));
}

}  // namespace repsim
