#pragma once

// Dataset persistence and subset construction. Records are line-delimited
// JSON behind an explicit schema-version header; subsets follow the
// equal-size valid/invalid/random protocol, and the valid subset is split
// into disjoint train/validation/test partitions of requested sizes.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proofgen/common.hpp"
#include "proofgen/orchestrator.hpp"

namespace proofgen {

inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr const char* kDatasetKind = "proofgen-dataset";

// ---------------------------------------------------------------------------
// JSON codecs. nlohmann::json orders object keys, so serialization is
// deterministic byte-for-byte given equal content.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Concept& c) {
    return {{"name", c.name}, {"domain", c.domain}, {"level", level_id(c.level)}};
}

inline Concept concept_from_json(const nlohmann::json& j) {
    return {j.at("name").get<std::string>(), j.at("domain").get<std::string>(),
            parse_level(j.at("level").get<std::string>())};
}

inline nlohmann::json to_json(const GenerationTask& t) {
    nlohmann::json concepts = nlohmann::json::array();
    for (const Concept& c : t.seed.concepts) concepts.push_back(to_json(c));
    return {{"task_id", t.task_id},
            {"level", level_id(t.seed.level)},
            {"concepts", concepts},
            {"qtype", qtype_id(t.qtype)},
            {"mode", mode_id(t.mode)},
            {"max_corrections", t.max_corrections},
            {"rng_seed", t.rng_seed}};
}

inline GenerationTask task_from_json(const nlohmann::json& j) {
    GenerationTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.seed.level = parse_level(j.at("level").get<std::string>());
    for (const auto& c : j.at("concepts")) t.seed.concepts.push_back(concept_from_json(c));
    t.qtype = parse_qtype(j.at("qtype").get<std::string>());
    t.mode = parse_mode(j.at("mode").get<std::string>());
    t.max_corrections = j.at("max_corrections").get<int>();
    t.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return t;
}

inline nlohmann::json to_json(const Diagnostic& d) {
    return {{"line", d.line},
            {"col", d.col},
            {"severity", severity_id(d.severity)},
            {"message", d.message}};
}

inline Diagnostic diagnostic_from_json(const nlohmann::json& j) {
    return {j.at("line").get<int>(), j.at("col").get<int>(),
            parse_severity(j.at("severity").get<std::string>()),
            j.at("message").get<std::string>()};
}

inline nlohmann::json to_json(const ProverReport& r) {
    nlohmann::json diags = nlohmann::json::array();
    for (const Diagnostic& d : r.diagnostics) diags.push_back(to_json(d));
    return {{"verdict", verdict_id(r.verdict)},
            {"diagnostics", diags},
            {"wall_time_ms", r.wall_time.count()},
            {"contains_sorry", r.contains_sorry},
            {"mathlib_revision", r.mathlib_revision}};
}

inline ProverReport report_from_json(const nlohmann::json& j) {
    ProverReport r;
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    for (const auto& d : j.at("diagnostics")) r.diagnostics.push_back(diagnostic_from_json(d));
    r.wall_time = std::chrono::milliseconds(j.at("wall_time_ms").get<long long>());
    r.contains_sorry = j.at("contains_sorry").get<bool>();
    r.mathlib_revision = j.at("mathlib_revision").get<std::string>();
    return r;
}

inline nlohmann::json to_json(const DataPoint& p) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const Attempt& a : p.attempts) {
        attempts.push_back({{"formal_source", a.formal_source}, {"report", to_json(a.report)}});
    }
    return {{"task", to_json(p.task)},
            {"informal_statement", p.informal_statement},
            {"informal_proof", p.informal_proof},
            {"formal_source", p.formal_source},
            {"attempts", attempts},
            {"correction_rounds", p.correction_rounds},
            {"valid", p.valid},
            {"status", p.status},
            {"gen_params", p.gen_params},
            {"annotations", p.annotations}};
}

inline DataPoint point_from_json(const nlohmann::json& j) {
    DataPoint p;
    p.task = task_from_json(j.at("task"));
    p.informal_statement = j.at("informal_statement").get<std::string>();
    p.informal_proof = j.at("informal_proof").get<std::string>();
    p.formal_source = j.at("formal_source").get<std::string>();
    for (const auto& a : j.at("attempts")) {
        p.attempts.push_back({a.at("formal_source").get<std::string>(),
                              report_from_json(a.at("report"))});
    }
    p.correction_rounds = j.at("correction_rounds").get<int>();
    p.valid = j.at("valid").get<bool>();
    p.status = j.at("status").get<std::string>();
    p.gen_params = j.at("gen_params");
    p.annotations = j.at("annotations");
    return p;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string serialize_dataset(const std::vector<DataPoint>& points) {
    std::string out;
    nlohmann::json header = {{"kind", kDatasetKind}, {"schema_version", kDatasetSchemaVersion}};
    out += header.dump();
    out += '\n';
    for (const DataPoint& p : points) {
        out += to_json(p).dump();
        out += '\n';
    }
    return out;
}

inline void write_dataset(const std::vector<DataPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset file: " + path);
    out << serialize_dataset(points);
    if (!out) throw Error("write failed: " + path);
}

inline std::vector<DataPoint> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("dataset file not found: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing dataset header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        throw ParseError(path + ": bad dataset header: " + e.what());
    }
    if (!header.is_object() || header.value("kind", "") != kDatasetKind) {
        throw ParseError(path + ": not a " + std::string(kDatasetKind) + " file");
    }
    const int version = header.value("schema_version", -1);
    if (version != kDatasetSchemaVersion) {
        throw ParseError(path + ": unsupported schema version " + std::to_string(version) +
                         " (expected " + std::to_string(kDatasetSchemaVersion) + ")");
    }
    std::vector<DataPoint> points;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_view(line).empty()) continue;
        try {
            points.push_back(point_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
        }
    }
    return points;
}

// ---------------------------------------------------------------------------
// Subsets and splits
// ---------------------------------------------------------------------------

struct Subsets {
    std::vector<DataPoint> valid;
    std::vector<DataPoint> invalid;
    std::vector<DataPoint> random;
};

/// valid = all points that passed; invalid = a uniform same-size sample of
/// the failures; random = a uniform same-size sample of everything.
inline Subsets make_subsets(const std::vector<DataPoint>& total, Rng& rng) {
    Subsets subsets;
    std::vector<const DataPoint*> invalid_pool;
    for (const DataPoint& p : total) {
        if (p.valid) subsets.valid.push_back(p);
        else invalid_pool.push_back(&p);
    }
    const std::size_t v = subsets.valid.size();
    if (v == 0) throw Error("make_subsets: no valid points in the input");
    if (invalid_pool.size() < v) {
        throw Error("make_subsets: need " + std::to_string(v) + " invalid points, have " +
                    std::to_string(invalid_pool.size()));
    }
    for (std::size_t i : rng.sample_indices(invalid_pool.size(), v)) {
        subsets.invalid.push_back(*invalid_pool[i]);
    }
    for (std::size_t i : rng.sample_indices(total.size(), v)) {
        subsets.random.push_back(total[i]);
    }
    return subsets;
}

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

struct Splits {
    std::vector<DataPoint> train;
    std::vector<DataPoint> validation;
    std::vector<DataPoint> test;
};

inline Splits make_splits(const std::vector<DataPoint>& valid_subset, SplitSizes sizes, Rng& rng) {
    if (sizes.train + sizes.validation + sizes.test != valid_subset.size()) {
        throw Error("make_splits: sizes sum to " +
                    std::to_string(sizes.train + sizes.validation + sizes.test) + " but " +
                    std::to_string(valid_subset.size()) + " points were given");
    }
    std::vector<std::size_t> order(valid_subset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    Splits splits;
    std::size_t at = 0;
    for (std::size_t i = 0; i < sizes.train; ++i) splits.train.push_back(valid_subset[order[at++]]);
    for (std::size_t i = 0; i < sizes.validation; ++i) {
        splits.validation.push_back(valid_subset[order[at++]]);
    }
    for (std::size_t i = 0; i < sizes.test; ++i) splits.test.push_back(valid_subset[order[at++]]);
    return splits;
}

/// Drops points whose normalized informal statement repeats an earlier one.
/// Statements define problem identity; proofs are ignored.
inline std::vector<DataPoint> dedup(const std::vector<DataPoint>& points) {
    std::vector<DataPoint> out;
    std::set<std::string> seen;
    for (const DataPoint& p : points) {
        if (seen.insert(normalize_text(p.informal_statement)).second) out.push_back(p);
    }
    return out;
}

}  // namespace proofgen
