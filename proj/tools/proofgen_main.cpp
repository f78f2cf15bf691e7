// proofgen: command-line front door for the synthesis pipeline.
//
//   sample       draw seed concepts from the pool
//   generate     run a batch manifest through backend + prover
//   validate     re-check an existing dataset's formal proofs
//   analyze      emit the analytics report for a dataset
//   split        materialize valid/invalid/random subsets and train/val/test
//   contaminate  nearest-pair similarity report between two text sets

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "proofgen/analytics.hpp"
#include "proofgen/backend.hpp"
#include "proofgen/contamination.hpp"
#include "proofgen/dataset.hpp"
#include "proofgen/http_backends.hpp"
#include "proofgen/orchestrator.hpp"
#include "proofgen/run_config.hpp"

namespace {

using namespace proofgen;

struct CliOptions {
    std::string config_path;
    std::string manifest_path;
    std::string mock_script;
    std::string pool_path;
    std::string out;
    std::string checkpoint;
    int parallelism = -1;
    int max_corrections = -1;
    long long seed = -1;
    bool allow_partial = false;
    bool dedup_output = false;
};

RunConfig resolve_config(const CliOptions& opt) {
    RunConfig config = opt.config_path.empty() ? RunConfig{} : RunConfig::from_file(opt.config_path);
    if (!opt.mock_script.empty()) {
        config.backend_kind = "mock";
        config.mock_script = opt.mock_script;
    }
    if (!opt.pool_path.empty()) config.pool_path = opt.pool_path;
    if (opt.parallelism >= 1) config.parallelism = opt.parallelism;
    if (opt.max_corrections >= 0) config.max_corrections = opt.max_corrections;
    if (opt.seed >= 0) config.rng_seed = static_cast<std::uint64_t>(opt.seed);
    config.validate();
    return config;
}

std::unique_ptr<TextBackend> make_backend(const RunConfig& config) {
    std::unique_ptr<TextBackend> backend;
    if (config.backend_kind == "mock") {
        if (config.mock_script.empty()) {
            throw ConfigError("mock backend needs a script (--mock-script or backend.mock_script)");
        }
        backend = std::make_unique<MockTextBackend>(
            MockTextBackend::read_script_file(config.mock_script));
    } else {
        HttpBackendConfig http;
        http.base_url = config.base_url;
        http.model = config.model;
        http.embedding_model = config.embedding_model;
        http.api_key_env = config.api_key_env;
        backend = std::make_unique<HttpTextBackend>(http);
    }
    RetryPolicy retry;
    retry.max_retries = config.backend_max_retries;
    retry.backoff = std::chrono::milliseconds(
        config.backend_kind == "mock" ? 0 : config.backend_backoff_ms);
    backend->set_retry_policy(retry);
    backend->set_in_flight_cap(static_cast<std::size_t>(config.backend_max_in_flight));
    return backend;
}

std::unique_ptr<Prover> make_prover(const RunConfig& config) {
    if (config.prover_kind == "lexical") {
        return std::make_unique<LexicalProver>(config.mathlib_revision.empty()
                                                   ? "lexical-stub"
                                                   : config.mathlib_revision);
    }
    return std::make_unique<LeanProver>(config.prover_config());
}

void write_run_manifest(const std::string& out_path, const RunConfig& config,
                        const nlohmann::json& extra) {
    nlohmann::json manifest = {{"tool", "proofgen"},
                               {"version", kVersion},
                               {"dataset_schema_version", kDatasetSchemaVersion},
                               {"config", config.to_json()}};
    for (const auto& [key, value] : extra.items()) manifest[key] = value;
    std::ofstream out(out_path + ".run.json", std::ios::binary);
    if (out) out << manifest.dump(2) << '\n';
}

int cmd_sample(const CliOptions& opt, const std::string& level_str, int k, int count) {
    RunConfig config = resolve_config(opt);
    const ConceptPool pool = load_pool(config.pool_path);
    const EducationalLevel level = parse_level(level_str);
    Rng rng(config.rng_seed);
    for (int i = 0; i < count; ++i) {
        const ConceptSeed seed = sample_seed(pool, level, k, rng);
        std::cout << level_id(seed.level) << "\tk=" << seed.concepts.size() << "\t"
                  << knowledge_points_clause(seed) << "\n";
    }
    return 0;
}

int cmd_generate(const CliOptions& opt) {
    RunConfig config = resolve_config(opt);
    if (opt.manifest_path.empty()) throw ConfigError("generate requires --manifest");
    if (opt.out.empty()) throw ConfigError("generate requires --out");

    const ConceptPool pool = load_pool(config.pool_path);
    const auto groups = load_manifest(opt.manifest_path);
    Rng rng(config.rng_seed);
    std::vector<GenerationTask> tasks =
        expand_manifest(groups, pool, config.max_corrections, rng);

    // Resume: task ids already present in the checkpoint are not re-run.
    std::map<std::string, DataPoint> done;
    if (!opt.checkpoint.empty() && std::filesystem::exists(opt.checkpoint)) {
        for (DataPoint& p : read_dataset(opt.checkpoint)) done[p.task.task_id] = std::move(p);
    }
    std::vector<GenerationTask> pending;
    for (const GenerationTask& t : tasks) {
        if (!done.count(t.task_id)) pending.push_back(t);
    }

    auto backend = make_backend(config);
    auto prover = make_prover(config);
    const PromptTemplates templates = config.templates_dir.empty()
                                          ? PromptTemplates::builtin()
                                          : PromptTemplates::from_directory(config.templates_dir);
    Orchestrator orchestrator(*backend, *prover, templates, config.generation_params(),
                              std::chrono::seconds(config.prover_timeout_sec));

    std::mutex checkpoint_mu;
    std::ofstream checkpoint_out;
    if (!opt.checkpoint.empty()) {
        const bool fresh = done.empty();
        checkpoint_out.open(opt.checkpoint, fresh ? std::ios::trunc : std::ios::app);
        if (fresh && checkpoint_out) {
            checkpoint_out << nlohmann::json{{"kind", kDatasetKind},
                                             {"schema_version", kDatasetSchemaVersion}}
                                  .dump()
                           << '\n';
        }
    }
    RunHooks hooks;
    hooks.progress = [](const std::string& id, const std::string& msg) {
        std::cerr << "[" << id << "] " << msg << "\n";
    };
    if (checkpoint_out.is_open()) {
        hooks.on_point = [&](const DataPoint& p) {
            std::lock_guard lk(checkpoint_mu);
            checkpoint_out << to_json(p).dump() << '\n';
            checkpoint_out.flush();
        };
    }

    const std::vector<DataPoint> fresh_points =
        orchestrator.run_batch(pending, config.parallelism, hooks);
    for (const DataPoint& p : fresh_points) done[p.task.task_id] = p;

    std::vector<DataPoint> points;
    points.reserve(tasks.size());
    for (const GenerationTask& t : tasks) points.push_back(done.at(t.task_id));
    if (opt.dedup_output) points = dedup(points);
    write_dataset(points, opt.out);

    std::size_t valid = 0, failed = 0;
    for (const DataPoint& p : points) {
        if (p.valid) ++valid;
        if (p.status != "ok") ++failed;
    }
    write_run_manifest(opt.out, config,
                       {{"manifest", opt.manifest_path},
                        {"tasks", points.size()},
                        {"valid", valid},
                        {"task_failures", failed}});
    const nlohmann::json summary = {{"tasks", points.size()},
                                    {"valid", valid},
                                    {"task_failures", failed},
                                    {"out", opt.out}};
    std::cout << summary.dump() << "\n";
    if (failed > 0 && !opt.allow_partial) {
        std::cerr << "error: " << failed << " task(s) failed; rerun or pass --allow-partial\n";
        return 1;
    }
    return 0;
}

int cmd_validate(const CliOptions& opt, const std::string& in_path) {
    RunConfig config = resolve_config(opt);
    auto prover = make_prover(config);
    std::vector<DataPoint> points = read_dataset(in_path);
    std::size_t still_valid = 0, now_invalid = 0, now_valid = 0, unchanged_invalid = 0;
    for (DataPoint& p : points) {
        if (p.formal_source.empty()) {
            ++unchanged_invalid;
            continue;
        }
        const ProverReport report =
            prover->check(p.formal_source, std::chrono::seconds(config.prover_timeout_sec));
        const bool fresh_valid = report.verdict == Verdict::valid;
        if (fresh_valid && p.valid) ++still_valid;
        else if (fresh_valid && !p.valid) ++now_valid;
        else if (!fresh_valid && p.valid) ++now_invalid;
        else ++unchanged_invalid;
        if (!p.attempts.empty()) p.attempts.back().report = report;
        p.valid = fresh_valid;
    }
    if (!opt.out.empty()) write_dataset(points, opt.out);
    const nlohmann::json summary = {{"points", points.size()},
                                    {"still_valid", still_valid},
                                    {"now_valid", now_valid},
                                    {"now_invalid", now_invalid},
                                    {"invalid", unchanged_invalid}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_analyze(const CliOptions& opt, const std::string& in_path, const std::string& table_path,
                const std::string& tactics_path, int rounds, int sample_size) {
    RunConfig config = resolve_config(opt);
    const std::vector<DataPoint> points = read_dataset(in_path);
    Rng rng(config.rng_seed);
    const TacticSet tactics =
        tactics_path.empty() ? TacticSet::builtin() : TacticSet::load(tactics_path);
    DiversityParams diversity;
    diversity.rounds = rounds;
    diversity.sample_size = sample_size;
    const AnalyticsReport report = analyze(points, rng, diversity, tactics);

    const std::string text_table = render_pass_rate_table(report.pass_rates);
    if (!opt.out.empty()) {
        std::ofstream out(opt.out, std::ios::binary);
        if (!out) throw Error("cannot write report: " + opt.out);
        out << to_json(report).dump(2) << '\n';
    } else {
        std::cout << to_json(report).dump(2) << "\n";
    }
    if (!table_path.empty()) {
        std::ofstream out(table_path, std::ios::binary);
        if (!out) throw Error("cannot write table: " + table_path);
        out << text_table;
    } else {
        std::cerr << text_table;
    }
    return 0;
}

int cmd_split(const CliOptions& opt, const std::string& in_path, const std::string& sizes_str,
              const std::string& out_dir) {
    RunConfig config = resolve_config(opt);
    const std::vector<DataPoint> points = read_dataset(in_path);
    Rng rng(config.rng_seed);
    const Subsets subsets = make_subsets(points, rng);

    SplitSizes sizes;
    if (!sizes_str.empty()) {
        unsigned long long a = 0, b = 0, c = 0;
        if (std::sscanf(sizes_str.c_str(), "%llu,%llu,%llu", &a, &b, &c) != 3) {
            throw ConfigError("--sizes must look like 4866,500,500");
        }
        sizes = {static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                 static_cast<std::size_t>(c)};
    } else {
        // Default: hold out 500/500 like the reference protocol when the
        // valid subset is large enough, otherwise roughly 80/10/10.
        const std::size_t v = subsets.valid.size();
        if (v > 2000) sizes = {v - 1000, 500, 500};
        else sizes = {v - 2 * (v / 10), v / 10, v - (v - 2 * (v / 10)) - v / 10};
    }
    const Splits splits = make_splits(subsets.valid, sizes, rng);

    std::filesystem::create_directories(out_dir);
    const auto emit = [&](const char* name, const std::vector<DataPoint>& pts) {
        write_dataset(pts, (std::filesystem::path(out_dir) / (std::string(name) + ".jsonl"))
                               .string());
    };
    emit("valid", subsets.valid);
    emit("invalid", subsets.invalid);
    emit("random", subsets.random);
    emit("train", splits.train);
    emit("validation", splits.validation);
    emit("test", splits.test);
    const nlohmann::json summary = {{"valid", subsets.valid.size()},
                                    {"invalid", subsets.invalid.size()},
                                    {"random", subsets.random.size()},
                                    {"train", splits.train.size()},
                                    {"validation", splits.validation.size()},
                                    {"test", splits.test.size()},
                                    {"out_dir", out_dir}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_contaminate(const CliOptions& opt, const std::string& a_path, const std::string& b_path,
                    int top_k, const std::string& mock_embeddings) {
    RunConfig config = resolve_config(opt);
    const std::vector<TextRecord> set_a = read_text_records(a_path);
    const std::vector<TextRecord> set_b = read_text_records(b_path);

    std::unique_ptr<EmbeddingBackend> backend;
    if (!mock_embeddings.empty()) {
        backend = std::make_unique<MockEmbeddingBackend>(
            MockEmbeddingBackend::from_file(mock_embeddings));
    } else {
        HttpBackendConfig http;
        http.base_url = config.base_url;
        http.embedding_model = config.embedding_model;
        http.api_key_env = config.api_key_env;
        backend = std::make_unique<HttpEmbeddingBackend>(http);
    }

    const auto embed_set = [&](const std::vector<TextRecord>& records) {
        std::vector<std::string> ids, texts;
        for (const TextRecord& r : records) {
            ids.push_back(r.id);
            texts.push_back(r.text);
        }
        return embed(ids, texts, *backend);
    };
    const auto embedded_a = embed_set(set_a);
    const auto embedded_b = embed_set(set_b);
    const auto pairs =
        nearest_pairs(embedded_a, embedded_b, static_cast<std::size_t>(top_k));

    const nlohmann::json report = {{"a", a_path},
                                   {"b", b_path},
                                   {"top_k", top_k},
                                   {"pairs", to_json(pairs)}};
    if (!opt.out.empty()) {
        std::ofstream out(opt.out, std::ios::binary);
        if (!out) throw Error("cannot write report: " + opt.out);
        out << report.dump(2) << '\n';
    } else {
        std::cout << report.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proofgen: prover-validated synthesis of theorem and proof data"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON config file");
    app.add_option("--pool", opt.pool_path, "concept pool file (overrides config)");
    app.add_option("--seed", opt.seed, "rng seed (overrides config)");

    auto* sample = app.add_subcommand("sample", "draw seed concepts");
    std::string level_str = "elementary";
    int k = 1, count = 1;
    sample->add_option("--level", level_str, "elementary|middle|high|higher")->required();
    sample->add_option("--k", k, "concepts per seed (1 or 2)");
    sample->add_option("--count", count, "number of seeds");

    auto* generate = app.add_subcommand("generate", "run a batch manifest");
    generate->add_option("--manifest", opt.manifest_path, "batch manifest JSON")->required();
    generate->add_option("--mock-script", opt.mock_script, "scripted mock backend responses");
    generate->add_option("--out", opt.out, "output dataset path")->required();
    generate->add_option("--parallelism", opt.parallelism, "worker threads");
    generate->add_option("--max-corrections", opt.max_corrections, "correction round budget");
    generate->add_option("--checkpoint", opt.checkpoint, "task-keyed resume file");
    generate->add_flag("--allow-partial", opt.allow_partial,
                       "exit 0 even when some tasks failed");
    generate->add_flag("--dedup", opt.dedup_output,
                       "drop points whose informal statement repeats an earlier one");

    auto* validate = app.add_subcommand("validate", "re-check a dataset's formal proofs");
    std::string in_path;
    validate->add_option("--in", in_path, "dataset file")->required();
    validate->add_option("--out", opt.out, "write re-checked dataset here");

    auto* analyze_cmd = app.add_subcommand("analyze", "emit the analytics report");
    std::string table_path, tactics_path;
    int rounds = 10, sample_size = 10;
    analyze_cmd->add_option("--in", in_path, "dataset file")->required();
    analyze_cmd->add_option("--out", opt.out, "JSON report path (default: stdout)");
    analyze_cmd->add_option("--table", table_path, "pass-rate text table path (default: stderr)");
    analyze_cmd->add_option("--tactics", tactics_path, "known-tactic list file");
    analyze_cmd->add_option("--rounds", rounds, "diversity bootstrap rounds");
    analyze_cmd->add_option("--sample-size", sample_size, "diversity bootstrap sample size");

    auto* split = app.add_subcommand("split", "materialize subsets and splits");
    std::string sizes_str, out_dir = "splits";
    split->add_option("--in", in_path, "dataset file")->required();
    split->add_option("--sizes", sizes_str, "train,validation,test sizes (e.g. 4866,500,500)");
    split->add_option("--out-dir", out_dir, "output directory");

    auto* contaminate = app.add_subcommand("contaminate", "nearest-pair similarity report");
    std::string a_path, b_path, mock_embeddings;
    int top_k = 10;
    contaminate->add_option("--a", a_path, "generated set (JSONL id/text)")->required();
    contaminate->add_option("--b", b_path, "evaluation set (JSONL id/text)")->required();
    contaminate->add_option("--top-k", top_k, "pairs to report");
    contaminate->add_option("--mock-embeddings", mock_embeddings,
                            "scripted embedding vectors (JSON)");
    contaminate->add_option("--out", opt.out, "JSON report path (default: stdout)");

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed()) return cmd_sample(opt, level_str, k, count);
        if (generate->parsed()) return cmd_generate(opt);
        if (validate->parsed()) return cmd_validate(opt, in_path);
        if (analyze_cmd->parsed()) {
            return cmd_analyze(opt, in_path, table_path, tactics_path, rounds, sample_size);
        }
        if (split->parsed()) return cmd_split(opt, in_path, sizes_str, out_dir);
        if (contaminate->parsed()) {
            return cmd_contaminate(opt, a_path, b_path, top_k, mock_embeddings);
        }
    } catch (const proofgen::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
