// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// repsim command-line driver. Each subcommand reads a JSON run config and
// hands results to the next stage through files under output_dir:
//
//   matrices/<metric>.json            similarity matrices (primary depth)
//   matrices/depth_<d>/<metric>.json  per-depth matrices when `depths` is set
//   matrices/snf.json                 fused matrix
//   separability/<id>.json            per-matrix separability reports
//   separability/combined.csv         metric x family pair x measure table
//   clusters/<id>.*                   dendrogram, flat clusters, reordered matrix
//   runs/<stage>.json                 per-stage status, warnings and failures
//   summary.json                      aggregate written by `report`
//
// Exit codes: 0 success, 1 partial failure, 2 validation error.

#include "repsim/repsim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace repsim;

namespace {

struct RunConfig {
    fs::path manifest_path;
    std::string manifest_text;  // as written in the config, used for hashing
    std::vector<std::string> metrics;
    MetricConfig metric_cfg;
    SnfConfig snf;
    fs::path output_dir;
    std::optional<Index> cluster_k;
    std::string cluster_matrix;  // empty: snf when present, else the first metric
    double depth = 1.0;
    std::vector<double> depths;
    json effective;  // canonical config echo; hashed into every output
    Stamp stamp;
};

RunConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
    const json doc = read_json_file(path);
    if (!doc.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    const fs::path base = path.parent_path();
    RunConfig cfg;
    std::vector<std::string> problems;
    auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };

    static const std::set<std::string> known = {"manifest", "metrics",        "output_dir", "seed",  "metric_config",
                                                "snf",      "cluster_k",      "depth",      "depths", "cluster_matrix"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) {
            fail("unknown config key '" + key + "'");
        }
    }
    try {
        cfg.manifest_text = doc.at("manifest").get<std::string>();
        cfg.manifest_path = base / cfg.manifest_text;
        cfg.output_dir = base / doc.at("output_dir").get<std::string>();
        cfg.metrics = doc.at("metrics").get<std::vector<std::string>>();
        const std::uint64_t seed = seed_override.value_or(doc.value("seed", std::uint64_t{0}));
        cfg.metric_cfg.rng_seed = seed;
        if (doc.contains("metric_config")) {
            const auto& mc = doc["metric_config"];
            cfg.metric_cfg.svcca_variance_threshold =
                mc.value("svcca_variance_threshold", cfg.metric_cfg.svcca_variance_threshold);
            cfg.metric_cfg.ridge_lambda = mc.value("ridge_lambda", cfg.metric_cfg.ridge_lambda);
            if (mc.contains("rsa_stimulus_subsample") && !mc["rsa_stimulus_subsample"].is_null()) {
                cfg.metric_cfg.rsa_stimulus_subsample = mc["rsa_stimulus_subsample"].get<Index>();
            }
        }
        if (doc.contains("snf")) {
            const auto& s = doc["snf"];
            cfg.snf.K = s.value("K", cfg.snf.K);
            cfg.snf.mu = s.value("mu", cfg.snf.mu);
            cfg.snf.T = s.value("T", cfg.snf.T);
            cfg.snf.alpha = s.value("alpha", cfg.snf.alpha);
        }
        if (doc.contains("cluster_k") && !doc["cluster_k"].is_null()) {
            cfg.cluster_k = doc["cluster_k"].get<Index>();
        }
        cfg.cluster_matrix = doc.value("cluster_matrix", std::string());
        cfg.depth = doc.value("depth", 1.0);
        if (doc.contains("depths") && !doc["depths"].is_null()) {
            cfg.depths = doc["depths"].get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }

    if (cfg.metrics.empty()) {
        fail("metrics must be nonempty");
    }
    std::set<std::string> seen;
    for (const auto& m : cfg.metrics) {
        if (std::find(kMetricIds.begin(), kMetricIds.end(), m) == kMetricIds.end()) {
            std::string valid;
            for (auto id : kMetricIds) {
                valid += (valid.empty() ? "" : ", ") + std::string(id);
            }
            fail("unknown metric '" + m + "' (valid: " + valid + ")");
        }
        if (!seen.insert(m).second) {
            fail("metric '" + m + "' listed twice");
        }
    }
    try {
        cfg.metric_cfg.validate();
    } catch (const ValidationError& e) {
        fail(e.what());
    }
    if (cfg.cluster_k && *cfg.cluster_k < 1) {
        fail("cluster_k must be positive");
    }
    if (!cfg.cluster_matrix.empty() && cfg.cluster_matrix != "snf" && !seen.contains(cfg.cluster_matrix)) {
        fail("cluster_matrix '" + cfg.cluster_matrix + "' is neither 'snf' nor a configured metric");
    }
    if (!(cfg.depth > 0.0 && cfg.depth <= 1.0)) {
        fail("depth must lie in (0, 1]");
    }
    if (!cfg.depths.empty() && cfg.depths.size() < 2) {
        fail("depths needs at least 2 entries");
    }
    for (double d : cfg.depths) {
        if (!(d > 0.0 && d <= 1.0)) {
            fail("depths entries must lie in (0, 1]");
        }
    }
    if (!problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        throw ValidationError(msg);
    }

    cfg.effective = {{"manifest", cfg.manifest_text},
                     {"metrics", cfg.metrics},
                     {"seed", cfg.metric_cfg.rng_seed},
                     {"metric_config",
                      {{"svcca_variance_threshold", cfg.metric_cfg.svcca_variance_threshold},
                       {"ridge_lambda", cfg.metric_cfg.ridge_lambda},
                       {"rsa_stimulus_subsample", cfg.metric_cfg.rsa_stimulus_subsample
                                                      ? json(*cfg.metric_cfg.rsa_stimulus_subsample)
                                                      : json(nullptr)}}},
                     {"snf", {{"K", cfg.snf.K}, {"mu", cfg.snf.mu}, {"T", cfg.snf.T}, {"alpha", cfg.snf.alpha}}},
                     {"cluster_k", cfg.cluster_k ? json(*cfg.cluster_k) : json(nullptr)},
                     {"cluster_matrix", cfg.cluster_matrix},
                     {"depth", cfg.depth},
                     {"depths", cfg.depths}};
    cfg.stamp.config_hash = hash_json(cfg.effective);
    return cfg;
}

std::string depth_dir(double d) { return "depth_" + io_detail::format_double(d); }

fs::path matrix_path(const RunConfig& cfg, const std::string& id, std::optional<double> depth = std::nullopt) {
    if (depth) {
        return cfg.output_dir / "matrices" / depth_dir(*depth) / (id + ".json");
    }
    return cfg.output_dir / "matrices" / (id + ".json");
}

/// Loads a matrix written by an earlier stage of the same configuration.
SimilarityMatrix load_stage_matrix(const RunConfig& cfg, const fs::path& path) {
    const json doc = read_json_file(path);
    if (doc.value("config_hash", std::string()) != cfg.stamp.config_hash) {
        throw ValidationError(path.string() + " was produced by a different configuration (config_hash mismatch)");
    }
    return similarity_from_json(doc, path.string());
}

struct StageOutcome {
    json failures = json::array();
    json warnings = json::array();

    void fail(const std::string& item, const std::exception& e) {
        const char* kind = dynamic_cast<const DegenerateError*>(&e)     ? "degenerate"
                           : dynamic_cast<const SingularityError*>(&e)  ? "singular"
                           : dynamic_cast<const ValidationError*>(&e)   ? "validation"
                                                                        : "error";
        spdlog::error("{}: {}", item, e.what());
        failures.push_back({{"item", item}, {"kind", kind}, {"message", e.what()}});
    }
    void note(const std::string& item, const std::vector<std::string>& msgs) {
        for (const auto& m : msgs) {
            spdlog::warn("{}: {}", item, m);
            warnings.push_back({{"item", item}, {"message", m}});
        }
    }
};

int finish_stage(const RunConfig& cfg, const std::string& stage, const StageOutcome& out, json extra = json::object()) {
    json doc = stamp_json(cfg.stamp);
    doc["stage"] = stage;
    doc["status"] = out.failures.empty() ? "ok" : "partial";
    doc["failures"] = out.failures;
    doc["warnings"] = out.warnings;
    for (auto& [k, v] : extra.items()) {
        doc[k] = v;
    }
    write_json_file(cfg.output_dir / "runs" / (stage + ".json"), doc);
    std::cout << json{{"command", stage}, {"status", doc["status"]}, {"failures", out.failures.size()}}.dump()
              << "\n";
    return out.failures.empty() ? 0 : 1;
}

std::vector<ActivationMatrix> load_depth(const Manifest& man, double depth) {
    std::vector<ActivationMatrix> acts;
    for (const auto& r : man.records) {
        acts.push_back(load_model_activation(man, r.model_id, depth));
        acts.back().model_id = r.model_id;
    }
    for (const auto& a : acts) {
        if (a.stimulus_count() != acts.front().stimulus_count()) {
            throw ValidationError("stimulus count mismatch at depth " + io_detail::format_double(depth) + ": '" +
                                  acts.front().model_id + "' has " + std::to_string(acts.front().stimulus_count()) +
                                  ", '" + a.model_id + "' has " + std::to_string(a.stimulus_count()));
        }
    }
    return acts;
}

int cmd_metrics(const RunConfig& cfg, unsigned jobs) {
    const auto man = load_manifest(cfg.manifest_path);
    std::vector<double> depths = {cfg.depth};
    for (double d : cfg.depths) {
        if (std::find(depths.begin(), depths.end(), d) == depths.end()) {
            depths.push_back(d);
        }
    }
    // Load and check every depth before any computation, so input problems
    // surface as validation errors rather than per-metric failures.
    std::vector<std::vector<ActivationMatrix>> per_depth;
    for (double d : depths) {
        per_depth.push_back(load_depth(man, d));
    }

    StageOutcome out;
    json written = json::array();
    for (std::size_t k = 0; k < depths.size(); ++k) {
        const double d = depths[k];
        const bool primary = k == 0;
        std::vector<SimilarityMatrix> done;
        for (const auto& id : cfg.metrics) {
            if (id == "average") {
                continue;
            }
            const std::string item = id + "@" + io_detail::format_double(d);
            spdlog::info("computing {} at depth {} over {} models", id, d, per_depth[k].size());
            try {
                Diagnostics diag;
                auto s = pairwise_matrix(id, per_depth[k], cfg.metric_cfg, jobs, &diag);
                out.note(item, diag.warnings);
                done.push_back(s);
            } catch (const Error& e) {
                out.fail(item, e);
            }
        }
        if (std::find(cfg.metrics.begin(), cfg.metrics.end(), "average") != cfg.metrics.end()) {
            try {
                if (done.size() < 2) {
                    throw DegenerateError("average needs at least 2 successfully computed metrics");
                }
                done.push_back(average_baseline(done));
            } catch (const Error& e) {
                out.fail("average@" + io_detail::format_double(d), e);
            }
        }
        for (const auto& s : done) {
            json prov = {{"depth", d}, {"stimulus_count", per_depth[k].front().stimulus_count()}};
            if (s.metric_id == "average") {
                json inputs = json::array();
                for (const auto& m : done) {
                    if (m.metric_id != "average") {
                        inputs.push_back(m.metric_id);
                    }
                }
                prov["inputs"] = inputs;
            }
            const auto path = matrix_path(cfg, s.metric_id, primary ? std::nullopt : std::optional<double>(d));
            write_json_file(path, to_json(s, cfg.stamp, prov));
            written.push_back(fs::relative(path, cfg.output_dir).generic_string());
        }
    }
    return finish_stage(cfg, "metrics", out, {{"written", written}});
}

/// Matrices of the configured metrics (excluding `average`) present on disk.
std::vector<SimilarityMatrix> available_metric_matrices(const RunConfig& cfg, bool include_average) {
    std::vector<SimilarityMatrix> mats;
    for (const auto& id : cfg.metrics) {
        if (id == "average" && !include_average) {
            continue;
        }
        const auto p = matrix_path(cfg, id);
        if (fs::exists(p)) {
            mats.push_back(load_stage_matrix(cfg, p));
        } else {
            spdlog::warn("no matrix for metric '{}' ({} missing)", id, p.string());
        }
    }
    return mats;
}

int cmd_fuse(const RunConfig& cfg) {
    const auto mats = available_metric_matrices(cfg, false);
    if (mats.size() < 2) {
        throw ValidationError("SNF requires >= 2 metrics; found " + std::to_string(mats.size()) +
                              " matrix file(s) under " + (cfg.output_dir / "matrices").string());
    }
    StageOutcome out;
    Diagnostics diag;
    const auto fused = fuse_pipeline(mats, cfg.snf, &diag);
    out.note("snf", diag.warnings);
    json inputs = json::array();
    for (const auto& m : mats) {
        inputs.push_back(m.metric_id);
    }
    const json prov = {{"inputs", inputs},
                       {"snf", {{"K", cfg.snf.K}, {"mu", cfg.snf.mu}, {"T", cfg.snf.T}, {"alpha", cfg.snf.alpha}}},
                       {"scale", "raw fused affinities"}};
    write_json_file(matrix_path(cfg, "snf"), to_json(fused, cfg.stamp, prov));
    return finish_stage(cfg, "fuse", out, {{"inputs", inputs}});
}

std::vector<SimilarityMatrix> all_matrices(const RunConfig& cfg) {
    auto mats = available_metric_matrices(cfg, true);
    if (fs::exists(matrix_path(cfg, "snf"))) {
        mats.push_back(load_stage_matrix(cfg, matrix_path(cfg, "snf")));
    }
    return mats;
}

int cmd_separability(const RunConfig& cfg) {
    const auto man = load_manifest(cfg.manifest_path);
    const auto mats = all_matrices(cfg);
    if (mats.empty()) {
        throw ValidationError("no similarity matrices found; run `repsim metrics` first");
    }
    StageOutcome out;
    std::vector<SeparabilityReport> reports;
    for (const auto& s : mats) {
        try {
            auto rep = full_report(s, man.records);
            out.note(s.metric_id, rep.warnings);
            write_json_file(cfg.output_dir / "separability" / (s.metric_id + ".json"), to_json(rep, cfg.stamp));
            reports.push_back(std::move(rep));
        } catch (const Error& e) {
            out.fail(s.metric_id, e);
        }
    }
    write_text_file(cfg.output_dir / "separability" / "combined.csv", separability_csv(reports, cfg.stamp));
    return finish_stage(cfg, "separability", out);
}

std::string cluster_target(const RunConfig& cfg) {
    if (!cfg.cluster_matrix.empty()) {
        return cfg.cluster_matrix;
    }
    return fs::exists(matrix_path(cfg, "snf")) ? "snf" : cfg.metrics.front();
}

int cmd_cluster(const RunConfig& cfg) {
    const std::string id = cluster_target(cfg);
    const auto path = matrix_path(cfg, id);
    if (!fs::exists(path)) {
        throw ValidationError("cluster matrix '" + id + "' not found at " + path.string());
    }
    const auto s = load_stage_matrix(cfg, path);
    StageOutcome out;
    Diagnostics diag;
    const Matrix d = to_distance(s.values, &diag);
    out.note(id, diag.warnings);
    const auto tree = hierarchical_cluster(d);
    json doc = to_json(tree, s.model_ids, cfg.stamp);
    doc["matrix"] = id;
    try {
        doc["cophenetic_correlation"] = cophenetic_correlation(tree, d);
    } catch (const Error& e) {
        doc["cophenetic_correlation"] = nullptr;
        out.fail(id + " cophenetic correlation", e);
    }
    const auto dir = cfg.output_dir / "clusters";
    if (cfg.cluster_k) {
        const Index k = std::min<Index>(*cfg.cluster_k, tree.leaf_count());
        if (k != *cfg.cluster_k) {
            out.note(id, {"cluster_k=" + std::to_string(*cfg.cluster_k) + " exceeds model count; using " +
                          std::to_string(k)});
        }
        const auto flat = flat_clusters(tree, k);
        if (!flat.warning.empty()) {
            out.note(id, {flat.warning});
        }
        doc["flat_clusters"] = {{"requested_k", *cfg.cluster_k}, {"k", flat.k}, {"labels", flat.labels}};
        std::string csv = csv_header(cfg.stamp) + "model_id,cluster\n";
        for (std::size_t i = 0; i < flat.labels.size(); ++i) {
            csv += s.model_ids[i] + "," + std::to_string(flat.labels[i]) + "\n";
        }
        write_text_file(dir / (id + "_flat.csv"), csv);
    }
    write_json_file(dir / (id + ".json"), doc);
    write_text_file(dir / (id + ".nwk"), to_newick(tree, s.model_ids) + "\n");

    const auto& order = tree.leaf_order;
    Matrix reordered(s.size(), s.size());
    std::vector<std::string> names;
    for (std::size_t a = 0; a < order.size(); ++a) {
        names.push_back(s.model_ids[static_cast<std::size_t>(order[a])]);
        for (std::size_t b = 0; b < order.size(); ++b) {
            reordered(static_cast<Index>(a), static_cast<Index>(b)) = s.values(order[a], order[b]);
        }
    }
    write_text_file(dir / (id + "_reordered.csv"), matrix_csv(reordered, names, cfg.stamp));
    return finish_stage(cfg, "cluster", out, {{"matrix", id}});
}

int cmd_report(const RunConfig& cfg) {
    StageOutcome out;
    json summary = stamp_json(cfg.stamp);
    summary["config"] = cfg.effective;

    json stages = json::object();
    for (const char* stage : {"metrics", "fuse", "separability", "cluster"}) {
        const auto p = cfg.output_dir / "runs" / (std::string(stage) + ".json");
        if (!fs::exists(p)) {
            stages[stage] = {{"status", "not run"}};
            continue;
        }
        const json doc = read_json_file(p);
        if (doc.value("config_hash", std::string()) != cfg.stamp.config_hash) {
            throw ValidationError(p.string() + " was produced by a different configuration (config_hash mismatch)");
        }
        stages[stage] = {{"status", doc["status"]}, {"failures", doc["failures"]}, {"warnings", doc["warnings"]}};
        for (const auto& f : doc["failures"]) {
            out.failures.push_back({{"stage", stage}, {"item", f["item"]}, {"kind", f["kind"]}, {"message", f["message"]}});
        }
    }
    summary["stages"] = stages;

    const auto mats = all_matrices(cfg);
    json ids = json::array();
    for (const auto& m : mats) {
        ids.push_back(m.metric_id);
    }
    summary["matrices"] = ids;

    if (mats.size() >= 2 && mats.front().size() >= 3) {
        try {
            const auto agr = metric_agreement(mats);
            summary["metric_agreement"] = {{"metric_ids", agr.metric_ids}, {"values", matrix_json(agr.values)}};
            write_text_file(cfg.output_dir / "agreement.csv", matrix_csv(agr.values, agr.metric_ids, cfg.stamp));
        } catch (const Error& e) {
            out.fail("metric_agreement", e);
        }
    }

    if (!cfg.depths.empty()) {
        json layers = json::object();
        for (const auto& id : cfg.metrics) {
            try {
                std::map<double, SimilarityMatrix> per_depth;
                for (double d : cfg.depths) {
                    const auto p = d == cfg.depth ? matrix_path(cfg, id) : matrix_path(cfg, id, d);
                    if (fs::exists(p)) {
                        per_depth.emplace(d, load_stage_matrix(cfg, p));
                    }
                }
                const auto lc = cross_layer_consistency(per_depth, cfg.depths);
                json pairs = json::array();
                for (const auto& pr : lc.pair_rs) {
                    pairs.push_back({{"depth_a", pr.depth_a}, {"depth_b", pr.depth_b}, {"r", pr.r}});
                }
                layers[id] = {{"mean_r", lc.mean_r}, {"pairs", pairs}};
            } catch (const Error& e) {
                out.fail("cross_layer_consistency " + id, e);
            }
        }
        summary["cross_layer_consistency"] = layers;
    }

    json sep = json::object();
    for (const auto& m : mats) {
        const auto p = cfg.output_dir / "separability" / (m.metric_id + ".json");
        if (fs::exists(p)) {
            const json doc = read_json_file(p);
            sep[m.metric_id] = {{"overall", doc.value("overall", json(nullptr))},
                                {"pooled", doc.value("pooled", json(nullptr))}};
        }
    }
    summary["separability"] = sep;

    const std::string target = cluster_target(cfg);
    const auto cp = cfg.output_dir / "clusters" / (target + ".json");
    if (fs::exists(cp)) {
        const json doc = read_json_file(cp);
        summary["clustering"] = {{"matrix", target},
                                 {"cophenetic_correlation", doc["cophenetic_correlation"]},
                                 {"leaf_order_ids", doc["leaf_order_ids"]},
                                 {"flat_clusters", doc.value("flat_clusters", json(nullptr))}};
    }
    summary["failures"] = out.failures;
    write_json_file(cfg.output_dir / "summary.json", summary);
    std::cout << json{{"command", "report"},
                      {"status", out.failures.empty() ? "ok" : "partial"},
                      {"failures", out.failures.size()}}
                     .dump()
              << "\n";
    return out.failures.empty() ? 0 : 1;
}

void print_error(const char* kind, const std::string& message, int code) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("repsim");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("REPSIM_LOG")) {
        const auto lvl = spdlog::level::from_str(env);
        if (lvl == spdlog::level::off && std::string(env) != "off") {
            spdlog::warn("REPSIM_LOG='{}' not recognized; using 'warn'", env);
        } else {
            spdlog::set_level(lvl);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"repsim: representational similarity, network fusion and model typology"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path;
    unsigned jobs = 1;
    std::optional<std::uint64_t> seed;
    struct Command {
        const char* name;
        const char* help;
    };
    const Command commands[] = {
        {"metrics", "Compute pairwise similarity matrices for every configured metric"},
        {"fuse", "Fuse metric matrices with Similarity Network Fusion"},
        {"separability", "Score model-family separability for every matrix"},
        {"cluster", "Hierarchical clustering, leaf ordering and flat clusters"},
        {"report", "Aggregate all stage outputs into summary.json"},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
        sub->add_option("--jobs", jobs, "Worker threads for pairwise metric jobs (0 = all cores)");
        sub->add_option("--seed", seed, "Override the config seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what(), 2);
        return 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    try {
        const auto cfg = load_config(config_path, seed);
        spdlog::info("{}: config_hash {}", cmd, cfg.stamp.config_hash);
        if (cmd == "metrics") {
            return cmd_metrics(cfg, jobs);
        }
        if (cmd == "fuse") {
            return cmd_fuse(cfg);
        }
        if (cmd == "separability") {
            return cmd_separability(cfg);
        }
        if (cmd == "cluster") {
            return cmd_cluster(cfg);
        }
        return cmd_report(cfg);
    } catch (const ValidationError& e) {
        print_error("validation", e.what(), 2);
        return 2;
    } catch (const FormatError& e) {
        print_error("format", e.what(), 2);
        return 2;
    } catch (const Error& e) {
        print_error("error", e.what(), 1);
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what(), 1);
        return 1;
    }
}
