#pragma once

// Resolved run configuration: backend, prover, pool and output settings with
// explicit defaults, loadable from a JSON file with flag overrides applied on
// top. Secrets stay in the environment. Also hosts the batch-manifest loader
// that expands task groups into concrete GenerationTasks.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proofgen/backend.hpp"
#include "proofgen/common.hpp"
#include "proofgen/concept_pool.hpp"
#include "proofgen/orchestrator.hpp"
#include "proofgen/prover.hpp"

namespace proofgen {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    // backend
    std::string backend_kind = "mock";  // "mock" | "http"
    std::string mock_script;
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4";
    std::string embedding_model = "text-embedding-ada-002";
    std::string api_key_env = "PROOFGEN_API_KEY";
    int backend_max_retries = 3;
    int backend_backoff_ms = 500;
    int backend_max_in_flight = 4;
    double temperature = 0.7;
    int max_tokens = 2048;

    // prover
    std::string prover_kind = "lean";  // "lean" | "lexical"
    std::string lean_bin = "lean";
    std::string mathlib_path;
    std::string mathlib_revision;
    int prover_timeout_sec = 60;
    int prover_max_concurrent = 4;

    // pipeline
    std::string pool_path = "data/concept_pool.tsv";
    std::string templates_dir;  // empty: builtin templates
    int parallelism = 4;
    int max_corrections = 2;
    std::uint64_t rng_seed = 0;

    nlohmann::json to_json() const {
        return {{"backend",
                 {{"kind", backend_kind},
                  {"mock_script", mock_script},
                  {"base_url", base_url},
                  {"model", model},
                  {"embedding_model", embedding_model},
                  {"api_key_env", api_key_env},
                  {"max_retries", backend_max_retries},
                  {"backoff_ms", backend_backoff_ms},
                  {"max_in_flight", backend_max_in_flight},
                  {"temperature", temperature},
                  {"max_tokens", max_tokens}}},
                {"prover",
                 {{"kind", prover_kind},
                  {"lean_bin", lean_bin},
                  {"mathlib_path", mathlib_path},
                  {"mathlib_revision", mathlib_revision},
                  {"timeout_sec", prover_timeout_sec},
                  {"max_concurrent", prover_max_concurrent}}},
                {"pool_path", pool_path},
                {"templates_dir", templates_dir},
                {"parallelism", parallelism},
                {"max_corrections", max_corrections},
                {"rng_seed", rng_seed}};
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            c.backend_kind = b.value("kind", c.backend_kind);
            c.mock_script = b.value("mock_script", c.mock_script);
            c.base_url = b.value("base_url", c.base_url);
            c.model = b.value("model", c.model);
            c.embedding_model = b.value("embedding_model", c.embedding_model);
            c.api_key_env = b.value("api_key_env", c.api_key_env);
            c.backend_max_retries = b.value("max_retries", c.backend_max_retries);
            c.backend_backoff_ms = b.value("backoff_ms", c.backend_backoff_ms);
            c.backend_max_in_flight = b.value("max_in_flight", c.backend_max_in_flight);
            c.temperature = b.value("temperature", c.temperature);
            c.max_tokens = b.value("max_tokens", c.max_tokens);
        }
        if (j.contains("prover")) {
            const auto& p = j.at("prover");
            c.prover_kind = p.value("kind", c.prover_kind);
            c.lean_bin = p.value("lean_bin", c.lean_bin);
            c.mathlib_path = p.value("mathlib_path", c.mathlib_path);
            c.mathlib_revision = p.value("mathlib_revision", c.mathlib_revision);
            c.prover_timeout_sec = p.value("timeout_sec", c.prover_timeout_sec);
            c.prover_max_concurrent = p.value("max_concurrent", c.prover_max_concurrent);
        }
        c.pool_path = j.value("pool_path", c.pool_path);
        c.templates_dir = j.value("templates_dir", c.templates_dir);
        c.parallelism = j.value("parallelism", c.parallelism);
        c.max_corrections = j.value("max_corrections", c.max_corrections);
        c.rng_seed = j.value("rng_seed", c.rng_seed);
        return c;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config file not found: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ParseError("config " + path + ": " + e.what());
        }
        return from_json(j);
    }

    void validate() const {
        if (backend_kind != "mock" && backend_kind != "http") {
            throw ConfigError("backend.kind must be 'mock' or 'http', got '" + backend_kind + "'");
        }
        if (prover_kind != "lean" && prover_kind != "lexical") {
            throw ConfigError("prover.kind must be 'lean' or 'lexical', got '" + prover_kind +
                              "'");
        }
        if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
        if (max_corrections < 0) throw ConfigError("max_corrections must be >= 0");
        if (backend_max_retries < 0) throw ConfigError("backend.max_retries must be >= 0");
        if (prover_timeout_sec < 1) throw ConfigError("prover.timeout_sec must be >= 1");
        if (temperature < 0.0) throw ConfigError("backend.temperature must be >= 0");
        if (max_tokens < 1) throw ConfigError("backend.max_tokens must be >= 1");
    }

    GenerationParams generation_params() const {
        GenerationParams p;
        p.temperature = temperature;
        p.max_tokens = max_tokens;
        return p;
    }

    ProverConfig prover_config() const {
        ProverConfig p;
        // PROOFGEN_LEAN_BIN overrides the configured prover path.
        if (const char* env = std::getenv("PROOFGEN_LEAN_BIN"); env && *env) p.lean_bin = env;
        else p.lean_bin = lean_bin;
        p.mathlib_path = mathlib_path;
        p.mathlib_revision = mathlib_revision;
        p.timeout = std::chrono::seconds(prover_timeout_sec);
        p.max_concurrent = static_cast<std::size_t>(prover_max_concurrent);
        return p;
    }
};

// ---------------------------------------------------------------------------
// Batch manifests:
//   { "tasks": [ {"level": "elementary", "qtype": "theorem_proving",
//                 "mode": "all_at_once", "k": 1, "count": 10}, ... ] }
// Groups expand into tasks t0000, t0001, ... in listed order; seeds are
// drawn from the pool with the run's rng.
// ---------------------------------------------------------------------------

struct ManifestGroup {
    EducationalLevel level = EducationalLevel::elementary;
    QuestionType qtype = QuestionType::theorem_proving;
    GenerationMode mode = GenerationMode::all_at_once;
    int k = 1;
    int count = 1;
};

inline std::vector<ManifestGroup> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("manifest not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("manifest " + path + ": " + e.what());
    }
    std::vector<ManifestGroup> groups;
    for (const auto& g : j.at("tasks")) {
        ManifestGroup group;
        group.level = parse_level(g.at("level").get<std::string>());
        group.qtype = parse_qtype(g.at("qtype").get<std::string>());
        group.mode = parse_mode(g.value("mode", "all_at_once"));
        group.k = g.value("k", 1);
        group.count = g.value("count", 1);
        if (group.k != 1 && group.k != 2) throw ConfigError("manifest: k must be 1 or 2");
        if (group.count < 0) throw ConfigError("manifest: count must be >= 0");
        groups.push_back(group);
    }
    return groups;
}

inline std::vector<GenerationTask> expand_manifest(const std::vector<ManifestGroup>& groups,
                                                   const ConceptPool& pool, int max_corrections,
                                                   Rng& rng) {
    std::vector<GenerationTask> tasks;
    std::size_t index = 0;
    for (const ManifestGroup& g : groups) {
        for (int i = 0; i < g.count; ++i) {
            GenerationTask task;
            char id[16];
            std::snprintf(id, sizeof(id), "t%04zu", index++);
            task.task_id = id;
            task.seed = sample_seed(pool, g.level, g.k, rng);
            task.qtype = g.qtype;
            task.mode = g.mode;
            task.max_corrections = max_corrections;
            task.rng_seed = rng.next();
            tasks.push_back(std::move(task));
        }
    }
    return tasks;
}

}  // namespace proofgen
