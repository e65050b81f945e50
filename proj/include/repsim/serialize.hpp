// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// JSON and CSV encodings of similarity matrices, separability reports and
// linkage trees. Every document carries the toolkit version and a config
// hash supplied by the caller.

#pragma once

#include "repsim/analysis.hpp"
#include "repsim/clustering.hpp"
#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"
#include "repsim/separability.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace repsim {

using json = nlohmann::json;

struct Stamp {
    std::string config_hash;
    std::string version = std::string(kVersion);
};

/// 16 hex digits of FNV-1a over the compact dump of `doc` (object keys sorted).
inline std::string hash_json(const json& doc) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(doc.dump())));
    return buf;
}

inline json stamp_json(const Stamp& s) { return {{"toolkit_version", s.version}, {"config_hash", s.config_hash}}; }

/// Finite values as numbers, non-finite as null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            r.push_back(number_or_null(m(i, j)));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& rows, const std::string& what) {
    if (!rows.is_array()) {
        throw FormatError(what + ": values must be an array of rows");
    }
    const auto n = static_cast<Index>(rows.size());
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Index>(r.size()) != n) {
            throw FormatError(what + ": row " + std::to_string(i) + " has the wrong length");
        }
        for (Index j = 0; j < n; ++j) {
            const auto& v = r[static_cast<std::size_t>(j)];
            if (!v.is_number()) {
                throw FormatError(what + ": non-numeric value at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
            m(i, j) = v.get<double>();
        }
    }
    return m;
}

inline json to_json(const SimilarityMatrix& s, const Stamp& stamp, const json& provenance = json::object()) {
    json doc = stamp_json(stamp);
    doc["metric_id"] = s.metric_id;
    doc["model_ids"] = s.model_ids;
    doc["symmetric"] = s.symmetric;
    doc["values"] = matrix_json(s.values);
    doc["provenance"] = provenance;
    return doc;
}

inline SimilarityMatrix similarity_from_json(const json& doc, const std::string& what = "similarity matrix") {
    try {
        SimilarityMatrix s;
        s.metric_id = doc.at("metric_id").get<std::string>();
        s.model_ids = doc.at("model_ids").get<std::vector<std::string>>();
        s.symmetric = doc.at("symmetric").get<bool>();
        s.values = matrix_from_json(doc.at("values"), what);
        if (s.values.rows() != static_cast<Index>(s.model_ids.size())) {
            throw FormatError(what + ": matrix size does not match model_ids");
        }
        return s;
    } catch (const json::exception& e) {
        throw FormatError(what + ": " + e.what());
    }
}

inline json stats_json(const DirectionalStats& st) {
    return {{"mu_within", st.mu_within},
            {"mu_between", st.mu_between},
            {"var_within", st.var_within},
            {"var_between", st.var_between}};
}

inline json summary_json(const SeparabilitySummary& s) {
    return {{"contrastive_ratio", s.contrastive_ratio},
            {"d_prime", number_or_null(s.d_prime)},
            {"d_prime_infinite", s.d_prime_infinite},
            {"silhouette", s.silhouette}};
}

inline json to_json(const SeparabilityReport& r, const Stamp& stamp) {
    json doc = stamp_json(stamp);
    doc["metric_id"] = r.metric_id;
    json pairs = json::array();
    for (const auto& p : r.family_pairs) {
        pairs.push_back({{"family_a", p.family_a},
                         {"family_b", p.family_b},
                         {"contrastive_ratio", p.contrastive_ratio},
                         {"d_prime", number_or_null(p.d_prime)},
                         {"d_prime_infinite", p.d_prime_infinite},
                         {"silhouette", p.silhouette},
                         {"stats_a", stats_json(p.stats_a)},
                         {"stats_b", stats_json(p.stats_b)},
                         {"zero_silhouette_models", p.zero_silhouette_models}});
    }
    doc["family_pairs"] = std::move(pairs);
    if (!r.family_pairs.empty()) {
        doc["overall"] = summary_json(r.overall);
        doc["pooled"] = summary_json(r.pooled);
    }
    doc["warnings"] = r.warnings;
    doc["similarity_scale"] = "raw";
    return doc;
}

inline std::string csv_header(const Stamp& stamp) {
    return "# repsim " + stamp.version + " config_hash=" + stamp.config_hash + "\n";
}

inline std::string csv_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return io_detail::format_double(v);
}

/// Long table: metric, family_a, family_b, measure, value. Pair rows first,
/// then the `overall` and `pooled` summaries with family columns set to "*".
inline std::string separability_csv(const std::vector<SeparabilityReport>& reports, const Stamp& stamp) {
    std::string out = csv_header(stamp) + "metric,family_a,family_b,measure,value\n";
    auto row = [&](const std::string& m, const std::string& a, const std::string& b, const char* measure, double v) {
        out += m + "," + a + "," + b + "," + measure + "," + csv_number(v) + "\n";
    };
    for (const auto& r : reports) {
        for (const auto& p : r.family_pairs) {
            row(r.metric_id, p.family_a, p.family_b, "contrastive_ratio", p.contrastive_ratio);
            row(r.metric_id, p.family_a, p.family_b, "d_prime", p.d_prime);
            row(r.metric_id, p.family_a, p.family_b, "silhouette", p.silhouette);
        }
        if (r.family_pairs.empty()) {
            continue;
        }
        for (const auto& [label, s] : {std::pair{"overall", r.overall}, std::pair{"pooled", r.pooled}}) {
            row(r.metric_id, label, "*", "contrastive_ratio", s.contrastive_ratio);
            row(r.metric_id, label, "*", "d_prime", s.d_prime);
            row(r.metric_id, label, "*", "silhouette", s.silhouette);
        }
    }
    return out;
}

inline json to_json(const LinkageTree& t, const std::vector<std::string>& names, const Stamp& stamp) {
    json doc = stamp_json(stamp);
    doc["linkage"] = std::string(to_string(t.linkage));
    doc["model_ids"] = names;
    json merges = json::array();
    for (const auto& m : t.merges) {
        merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
    }
    doc["merges"] = std::move(merges);
    doc["leaf_order"] = t.leaf_order;
    json ordered = json::array();
    for (Index i : t.leaf_order) {
        ordered.push_back(names[static_cast<std::size_t>(i)]);
    }
    doc["leaf_order_ids"] = std::move(ordered);
    return doc;
}

/// Square matrix as CSV with a leading `model_id` column and header row.
inline std::string matrix_csv(const Matrix& m, const std::vector<std::string>& names, const Stamp& stamp) {
    std::string out = csv_header(stamp) + "model_id";
    for (const auto& n : names) {
        out += "," + n;
    }
    out += "\n";
    for (Index i = 0; i < m.rows(); ++i) {
        out += names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m.cols(); ++j) {
            out += "," + csv_number(m(i, j));
        }
        out += "\n";
    }
    return out;
}

/// Writes via a sibling temporary file and rename, so readers never see a
/// partially written file.
inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + path.string());
        }
        out << text;
        if (!out) {
            throw Error("write failed: " + path.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

inline void write_json_file(const std::filesystem::path& path, const json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace repsim
