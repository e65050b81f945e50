// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Core data types and on-disk interchange formats.
//
// Activation files come in two flavours:
//   CSV    header line `model_id,layer_depth,M,N`, then M rows of N decimals.
//   binary magic `RSF1`, u32 M, u32 N (little-endian), then M*N little-endian
//          IEEE-754 doubles in row-major order.
// The manifest is a JSON array of
//   {model_id, family, architecture, supervision, activations: {depth: path}}.

#pragma once

#include "repsim/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace repsim {

struct ActivationMatrix {
    std::string model_id;
    double layer_depth = 1.0;  // normalized depth in (0, 1]
    Matrix data;               // rows = stimuli, columns = units
    bool centered = false;

    Index stimulus_count() const { return data.rows(); }
    Index unit_count() const { return data.cols(); }

    /// Throws ValidationError on shape, depth or finiteness violations.
    void validate() const {
        if (data.rows() < 2 || data.cols() < 1) {
            throw ValidationError("activation '" + model_id + "': need M >= 2 and N >= 1, got " +
                                  std::to_string(data.rows()) + "x" + std::to_string(data.cols()));
        }
        if (!(layer_depth > 0.0 && layer_depth <= 1.0)) {
            throw ValidationError("activation '" + model_id + "': layer_depth must lie in (0,1]");
        }
        for (Index r = 0; r < data.rows(); ++r) {
            for (Index c = 0; c < data.cols(); ++c) {
                if (!std::isfinite(data(r, c))) {
                    throw ValidationError("activation '" + model_id + "': non-finite value at (" +
                                          std::to_string(r) + "," + std::to_string(c) + ")");
                }
            }
        }
    }
};

/// Subtracts each column's mean. The result is flagged centered.
inline ActivationMatrix center(const ActivationMatrix& m) {
    if (m.data.rows() < 2) {
        throw ValidationError("center: need at least 2 stimuli");
    }
    ActivationMatrix out = m;
    out.data.rowwise() -= m.data.colwise().mean();
    out.centered = true;
    return out;
}

enum class Family { CnnSup, CnnUnsup, TransSup, TransUnsup, ConvNeXt, Swin };
enum class Supervision { Supervised, SelfSupervised };

inline constexpr std::array<std::string_view, 6> kFamilyNames = {"CNN-sup",   "CNN-unsup", "Trans-sup",
                                                                  "Trans-unsup", "ConvNeXt", "Swin"};

inline std::string_view to_string(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

inline std::string_view to_string(Supervision s) {
    return s == Supervision::Supervised ? "supervised" : "self-supervised";
}

inline std::optional<Family> parse_family(std::string_view s) {
    for (std::size_t k = 0; k < kFamilyNames.size(); ++k) {
        if (kFamilyNames[k] == s) {
            return static_cast<Family>(k);
        }
    }
    return std::nullopt;
}

inline std::optional<Supervision> parse_supervision(std::string_view s) {
    if (s == "supervised") {
        return Supervision::Supervised;
    }
    if (s == "self-supervised") {
        return Supervision::SelfSupervised;
    }
    return std::nullopt;
}

/// Supervision implied by a family label; hybrid families carry none.
inline std::optional<Supervision> implied_supervision(Family f) {
    switch (f) {
        case Family::CnnSup:
        case Family::TransSup:
            return Supervision::Supervised;
        case Family::CnnUnsup:
        case Family::TransUnsup:
            return Supervision::SelfSupervised;
        default:
            return std::nullopt;
    }
}

struct ModelRecord {
    std::string model_id;
    Family family = Family::CnnSup;
    std::string architecture;
    Supervision supervision = Supervision::Supervised;
};

struct SimilarityMatrix {
    std::string metric_id;
    std::vector<std::string> model_ids;
    Matrix values;
    bool symmetric = false;

    Index size() const { return values.rows(); }

    /// Checks shape, finiteness and the symmetry flag. `unit_diagonal` also
    /// checks diag = 1 (true for every pairwise metric, not for fused affinities).
    void validate(bool unit_diagonal, double tol = 1e-9) const {
        const Index n = values.rows();
        if (values.cols() != n || static_cast<Index>(model_ids.size()) != n) {
            throw ValidationError("similarity matrix '" + metric_id + "': shape does not match model list");
        }
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (!std::isfinite(values(i, j))) {
                    throw ValidationError("similarity matrix '" + metric_id + "': non-finite value at (" +
                                          std::to_string(i) + "," + std::to_string(j) + ")");
                }
                if (symmetric && std::abs(values(i, j) - values(j, i)) > tol) {
                    throw ValidationError("similarity matrix '" + metric_id + "': flagged symmetric but (" +
                                          std::to_string(i) + "," + std::to_string(j) + ") differs");
                }
            }
            if (unit_diagonal && std::abs(values(i, i) - 1.0) > tol) {
                throw ValidationError("similarity matrix '" + metric_id + "': diagonal entry " +
                                      std::to_string(i) + " is not 1");
            }
        }
    }
};

enum class ActivationFormat { Csv, Binary };

namespace io_detail {

inline constexpr std::array<char, 4> kMagic = {'R', 'S', 'F', '1'};

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view tok, const std::string& what) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) {
        tok.remove_prefix(1);
    }
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) {
        tok.remove_suffix(1);
    }
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
    }
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw FormatError("malformed number in " + what + ": '" + std::string(tok) + "'");
    }
    return v;
}

inline long long parse_count(std::string_view tok, const std::string& what) {
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) {
        tok.remove_suffix(1);
    }
    long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v <= 0) {
        throw FormatError("malformed header field " + what + ": '" + std::string(tok) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline void check_finite(const ActivationMatrix& m, const std::string& path) {
    for (Index r = 0; r < m.data.rows(); ++r) {
        for (Index c = 0; c < m.data.cols(); ++c) {
            if (!std::isfinite(m.data(r, c))) {
                throw FormatError(path + ": non-finite value at (" + std::to_string(r) + "," + std::to_string(c) +
                                  ")");
            }
        }
    }
}

inline std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                   static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b.data(), 4);
}

inline ActivationMatrix load_csv(const std::string& text, const std::string& path) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(path + ": empty file");
    }
    const auto header = split(line, ',');
    if (header.size() != 4) {
        throw FormatError(path + ": malformed header, expected 'model_id,layer_depth,M,N'");
    }
    ActivationMatrix m;
    m.model_id = std::string(header[0]);
    m.layer_depth = parse_double(header[1], path + " header field layer_depth");
    const auto rows = parse_count(header[2], "M");
    const auto cols = parse_count(header[3], "N");
    m.data.resize(rows, cols);
    for (long long r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) {
            throw FormatError(path + ": shape mismatch, header declares M=" + std::to_string(rows) + " but found " +
                              std::to_string(r) + " rows");
        }
        const auto fields = split(line, ',');
        if (static_cast<long long>(fields.size()) != cols) {
            throw FormatError(path + ": shape mismatch, row " + std::to_string(r) + " has " +
                              std::to_string(fields.size()) + " values, header declares N=" + std::to_string(cols));
        }
        for (long long c = 0; c < cols; ++c) {
            m.data(r, c) = parse_double(fields[static_cast<std::size_t>(c)], path);
        }
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line != "\r") {
            throw FormatError(path + ": shape mismatch, more than M=" + std::to_string(rows) + " data rows");
        }
    }
    check_finite(m, path);
    return m;
}

inline ActivationMatrix load_binary(const std::string& bytes, const std::string& path) {
    if (bytes.size() < 12) {
        throw FormatError(path + ": truncated header");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t rows = read_u32_le(p + 4);
    const std::uint32_t cols = read_u32_le(p + 8);
    if (rows == 0 || cols == 0) {
        throw FormatError(path + ": malformed header, M and N must be positive");
    }
    const std::uint64_t expected = 12 + static_cast<std::uint64_t>(rows) * cols * 8;
    if (bytes.size() != expected) {
        throw FormatError(path + ": shape mismatch, header declares " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " but payload has " + std::to_string(bytes.size() - 12) + " bytes");
    }
    ActivationMatrix m;
    m.model_id = std::filesystem::path(path).stem().string();
    m.data.resize(rows, cols);
    const unsigned char* q = p + 12;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            std::uint64_t bits = 0;
            for (int b = 7; b >= 0; --b) {
                bits = (bits << 8) | q[b];
            }
            m.data(r, c) = std::bit_cast<double>(bits);
            q += 8;
        }
    }
    check_finite(m, path);
    return m;
}

}  // namespace io_detail

/// Reads an activation file, detecting the format from its leading bytes.
inline ActivationMatrix load_activation(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open activation file: " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 4 && std::equal(io_detail::kMagic.begin(), io_detail::kMagic.end(), bytes.begin())) {
        return io_detail::load_binary(bytes, path.string());
    }
    return io_detail::load_csv(bytes, path.string());
}

inline ActivationFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? ActivationFormat::Csv : ActivationFormat::Binary;
}

/// Writes `m` so that load_activation reproduces it bit-exactly. The binary
/// format stores only the matrix; id and depth travel through the manifest.
inline void save_activation(const ActivationMatrix& m, const std::filesystem::path& path, ActivationFormat format) {
    m.validate();
    if (format == ActivationFormat::Csv && m.model_id.find_first_of(",\n\r") != std::string::npos) {
        throw ValidationError("model_id '" + m.model_id + "' cannot be stored in CSV (contains separator)");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open for writing: " + path.string());
    }
    if (format == ActivationFormat::Csv) {
        std::string buf = m.model_id + "," + io_detail::format_double(m.layer_depth) + "," +
                          std::to_string(m.data.rows()) + "," + std::to_string(m.data.cols()) + "\n";
        for (Index r = 0; r < m.data.rows(); ++r) {
            for (Index c = 0; c < m.data.cols(); ++c) {
                if (c > 0) {
                    buf += ',';
                }
                buf += io_detail::format_double(m.data(r, c));
            }
            buf += '\n';
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    } else {
        if (m.data.rows() > 0xffffffffLL || m.data.cols() > 0xffffffffLL) {
            throw ValidationError("matrix too large for binary format");
        }
        out.write(io_detail::kMagic.data(), 4);
        io_detail::write_u32_le(out, static_cast<std::uint32_t>(m.data.rows()));
        io_detail::write_u32_le(out, static_cast<std::uint32_t>(m.data.cols()));
        std::string payload(static_cast<std::size_t>(m.data.size()) * 8, '\0');
        std::size_t k = 0;
        for (Index r = 0; r < m.data.rows(); ++r) {
            for (Index c = 0; c < m.data.cols(); ++c) {
                auto bits = std::bit_cast<std::uint64_t>(m.data(r, c));
                for (int b = 0; b < 8; ++b) {
                    payload[k++] = static_cast<char>(bits & 0xff);
                    bits >>= 8;
                }
            }
        }
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

inline void save_activation(const ActivationMatrix& m, const std::filesystem::path& path) {
    save_activation(m, path, format_for_path(path));
}

struct Manifest {
    std::vector<ModelRecord> records;
    /// model_id -> (depth -> resolved activation path)
    std::map<std::string, std::map<double, std::filesystem::path>> activations;

    const ModelRecord* find(std::string_view id) const {
        for (const auto& r : records) {
            if (r.model_id == id) {
                return &r;
            }
        }
        return nullptr;
    }
};

/// Parses and validates a manifest. All violations are collected and reported
/// together in one ValidationError.
inline Manifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    std::vector<std::string> problems;
    Manifest man;
    if (!doc.is_array()) {
        throw ValidationError("manifest: top level must be a JSON array");
    }
    std::set<std::string> seen;
    std::size_t idx = 0;
    for (const auto& entry : doc) {
        const std::string where = "entry " + std::to_string(idx++);
        if (!entry.is_object()) {
            problems.push_back(where + ": not an object");
            continue;
        }
        auto get_str = [&](const char* key) -> std::string {
            if (!entry.contains(key) || !entry[key].is_string()) {
                problems.push_back(where + ": missing string field '" + key + "'");
                return {};
            }
            return entry[key].get<std::string>();
        };
        ModelRecord rec;
        rec.model_id = get_str("model_id");
        const auto fam = get_str("family");
        rec.architecture = get_str("architecture");
        const auto sup = get_str("supervision");
        bool ok = !rec.model_id.empty();
        if (!rec.model_id.empty() && !seen.insert(rec.model_id).second) {
            problems.push_back(where + ": duplicate model_id '" + rec.model_id + "'");
            ok = false;
        }
        if (const auto f = parse_family(fam)) {
            rec.family = *f;
        } else if (!fam.empty()) {
            problems.push_back(where + ": unknown family '" + fam + "'");
            ok = false;
        }
        if (const auto s = parse_supervision(sup)) {
            rec.supervision = *s;
        } else if (!sup.empty()) {
            problems.push_back(where + ": unknown supervision '" + sup + "'");
            ok = false;
        }
        if (ok) {
            if (const auto implied = implied_supervision(rec.family); implied && *implied != rec.supervision) {
                problems.push_back(where + ": family '" + fam + "' is inconsistent with supervision '" + sup + "'");
                ok = false;
            }
        }
        std::map<double, std::filesystem::path> paths;
        if (!entry.contains("activations") || !entry["activations"].is_object() || entry["activations"].empty()) {
            problems.push_back(where + ": missing or empty 'activations' object");
            ok = false;
        } else {
            for (const auto& [key, value] : entry["activations"].items()) {
                double depth = 0.0;
                try {
                    depth = io_detail::parse_double(key, "depth key");
                } catch (const FormatError&) {
                    problems.push_back(where + ": depth key '" + key + "' is not a number");
                    ok = false;
                    continue;
                }
                if (!(depth > 0.0 && depth <= 1.0)) {
                    problems.push_back(where + ": depth " + key + " outside (0,1]");
                    ok = false;
                    continue;
                }
                if (!value.is_string()) {
                    problems.push_back(where + ": activation path for depth " + key + " is not a string");
                    ok = false;
                    continue;
                }
                std::filesystem::path p = value.get<std::string>();
                if (p.is_relative()) {
                    p = base_dir / p;
                }
                if (!std::filesystem::exists(p)) {
                    problems.push_back(where + ": missing file " + p.string());
                    ok = false;
                    continue;
                }
                paths[depth] = p;
            }
        }
        if (ok) {
            man.activations[rec.model_id] = std::move(paths);
            man.records.push_back(std::move(rec));
        }
    }
    if (!problems.empty()) {
        std::string msg = "manifest validation failed:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        throw ValidationError(msg);
    }
    return man;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open manifest: " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_manifest(doc, path.parent_path());
}

/// Loads the activation of `record` at `depth` and stamps id and depth on it.
inline ActivationMatrix load_model_activation(const Manifest& man, const std::string& model_id, double depth) {
    const auto it = man.activations.find(model_id);
    if (it == man.activations.end()) {
        throw ValidationError("model '" + model_id + "' not in manifest");
    }
    const auto jt = it->second.find(depth);
    if (jt == it->second.end()) {
        throw ValidationError("model '" + model_id + "' has no activation at depth " + io_detail::format_double(depth));
    }
    ActivationMatrix m = load_activation(jt->second);
    m.model_id = model_id;
    m.layer_depth = depth;
    return m;
}

}  // namespace repsim
