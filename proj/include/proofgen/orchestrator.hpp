#pragma once

// Drives one synthesis task end to end: generation (all-at-once or staged),
// prover validation, and error-feedback correction rounds up to a budget.
// Emits immutable DataPoints carrying the full attempt history; the number
// of correction rounds a point consumed is its difficulty signal.

#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "proofgen/backend.hpp"
#include "proofgen/common.hpp"
#include "proofgen/concept_pool.hpp"
#include "proofgen/prompting.hpp"
#include "proofgen/prover.hpp"

namespace proofgen {

struct GenerationTask {
    std::string task_id;
    ConceptSeed seed;
    QuestionType qtype = QuestionType::theorem_proving;
    GenerationMode mode = GenerationMode::all_at_once;
    int max_corrections = 2;
    std::uint64_t rng_seed = 0;

    friend bool operator==(const GenerationTask&, const GenerationTask&) = default;
};

struct Attempt {
    std::string formal_source;
    ProverReport report;

    friend bool operator==(const Attempt&, const Attempt&) = default;
};

/// Reserved human-evaluation dimensions (statement/proof factuality and
/// alignment checks). Never populated by the pipeline.
inline const std::vector<std::string>& annotation_dimensions() {
    static const std::vector<std::string> dims = {"D1", "D2", "D3", "D4", "D5", "D6"};
    return dims;
}

struct DataPoint {
    GenerationTask task;
    std::string informal_statement;
    std::string informal_proof;
    std::string formal_source;  // final attempt
    std::vector<Attempt> attempts;
    int correction_rounds = 0;
    bool valid = false;
    std::string status = "ok";  // "ok" | "backend_failed"
    nlohmann::json gen_params;
    nlohmann::json annotations;  // reserved; D1..D6 keys, null values

    friend bool operator==(const DataPoint&, const DataPoint&) = default;
};

namespace detail {

inline Diagnostic synthetic_diagnostic(const std::string& message) {
    return {1, 0, Severity::error, message};
}

/// Attempts rendered into a correction prompt must each carry at least one
/// diagnostic; timeouts and crashes get a synthetic one.
inline std::vector<FailedAttempt> to_failed_attempts(const std::vector<Attempt>& attempts) {
    std::vector<FailedAttempt> failed;
    failed.reserve(attempts.size());
    for (const Attempt& a : attempts) {
        std::vector<Diagnostic> diags = a.report.diagnostics;
        if (diags.empty()) {
            diags.push_back(synthetic_diagnostic("prover returned verdict '" +
                                                 verdict_id(a.report.verdict) +
                                                 "' without diagnostics"));
        }
        failed.push_back({a.formal_source, std::move(diags)});
    }
    return failed;
}

inline ProverReport unparseable_report(const std::string& why, const std::string& revision) {
    ProverReport report;
    report.verdict = Verdict::invalid;
    report.diagnostics = {synthetic_diagnostic("unparseable completion: " + why)};
    report.mathlib_revision = revision;
    return report;
}

}  // namespace detail

struct RunHooks {
    /// Progress sink (task_id, message); called from worker threads.
    std::function<void(const std::string&, const std::string&)> progress;
    /// Called once per completed DataPoint, from worker threads, in
    /// completion order. Used for checkpointing; must be thread-safe.
    std::function<void(const DataPoint&)> on_point;
};

class Orchestrator {
public:
    Orchestrator(TextBackend& backend, Prover& prover,
                 const PromptTemplates& templates = PromptTemplates::builtin(),
                 GenerationParams params = {}, std::chrono::milliseconds prover_timeout = {})
        : backend_(backend),
          prover_(prover),
          templates_(templates),
          params_(std::move(params)),
          prover_timeout_(prover_timeout) {}

    DataPoint run_task(const GenerationTask& task, const RunHooks& hooks = {}) {
        if (task.max_corrections < 0) throw Error("max_corrections must be >= 0");
        DataPoint point;
        point.task = task;
        point.gen_params = params_.to_json();
        point.annotations = nlohmann::json::object();
        for (const std::string& dim : annotation_dimensions()) point.annotations[dim] = nullptr;

        try {
            run_rounds(task, point, hooks);
        } catch (const ConfigError&) {
            throw;  // misconfigured prover aborts the whole batch
        } catch (const BackendError& e) {
            point.status = "backend_failed";
            point.valid = false;
            note(hooks, task.task_id, std::string("backend failed: ") + e.what());
        }
        point.correction_rounds = static_cast<int>(point.attempts.size()) - 1;
        if (point.attempts.empty()) point.correction_rounds = 0;
        if (!point.attempts.empty()) {
            point.formal_source = point.attempts.back().formal_source;
        }
        return point;
    }

    std::vector<DataPoint> run_batch(const std::vector<GenerationTask>& tasks, int parallelism,
                                     const RunHooks& hooks = {}) {
        if (parallelism < 1) throw Error("parallelism must be >= 1");
        std::vector<DataPoint> points(tasks.size());
        if (tasks.empty()) return points;

        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> done{0};
        std::mutex fatal_mu;
        std::exception_ptr fatal;

        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(parallelism), tasks.size());
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    {
                        std::lock_guard lk(fatal_mu);
                        if (fatal) return;
                    }
                    try {
                        points[i] = run_task(tasks[i], hooks);
                    } catch (...) {
                        std::lock_guard lk(fatal_mu);
                        if (!fatal) fatal = std::current_exception();
                        return;
                    }
                    if (hooks.on_point) hooks.on_point(points[i]);
                    const std::size_t finished = done.fetch_add(1) + 1;
                    note(hooks, tasks[i].task_id,
                         "done (" + std::to_string(finished) + "/" +
                             std::to_string(tasks.size()) + "), " +
                             (points[i].valid ? "valid" : "invalid") + ", rounds=" +
                             std::to_string(points[i].correction_rounds));
                }
            });
        }
        for (std::thread& t : threads) t.join();
        if (fatal) std::rethrow_exception(fatal);
        return points;
    }

private:
    static void note(const RunHooks& hooks, const std::string& id, const std::string& msg) {
        if (hooks.progress) hooks.progress(id, msg);
    }

    GenerationParams params_for(const GenerationTask& task) const {
        GenerationParams p = params_;
        p.task_key = task.task_id;
        return p;
    }

    /// Staged generation: T1 and T2 retry their own prompt on unparseable
    /// output (there is no error feedback to give), each retry consuming one
    /// round of the shared budget. Returns false if the budget ran out.
    bool run_stage(const GenerationTask& task, DataPoint& point, Stage stage,
                   PriorSections& prior, const RunHooks& hooks) {
        const std::string prompt = render_generation_prompt(templates_, task.seed, task.qtype,
                                                            GenerationMode::step_by_step, stage,
                                                            prior);
        while (true) {
            const Completion completion = backend_.complete(prompt, params_for(task));
            try {
                const ParsedTriple triple = parse_sections(completion.raw_text);
                if (stage == Stage::t1_problem) {
                    prior.problem = triple.problem;
                } else {
                    if (!triple.informal_proof || triple.informal_proof->empty()) {
                        throw ParseError("empty informal proof section");
                    }
                    prior.informal_proof = triple.informal_proof;
                }
                return true;
            } catch (const ParseError& e) {
                point.attempts.push_back(
                    {completion.raw_text, detail::unparseable_report(e.what(), "")});
                note(hooks, task.task_id,
                     "unparseable " + stage_id(stage) + " completion: " + e.what());
                if (static_cast<int>(point.attempts.size()) > task.max_corrections) return false;
            }
        }
    }

    void run_rounds(const GenerationTask& task, DataPoint& point, const RunHooks& hooks) {
        PriorSections prior;

        if (task.mode == GenerationMode::step_by_step) {
            if (!run_stage(task, point, Stage::t1_problem, prior, hooks)) return;
            if (!run_stage(task, point, Stage::t2_informal, prior, hooks)) return;
            point.informal_statement = *prior.problem;
            point.informal_proof = *prior.informal_proof;
        }

        const std::string initial_prompt =
            task.mode == GenerationMode::all_at_once
                ? render_generation_prompt(templates_, task.seed, task.qtype,
                                           GenerationMode::all_at_once)
                : render_generation_prompt(templates_, task.seed, task.qtype,
                                           GenerationMode::step_by_step, Stage::t3_formal, prior);

        std::string prompt = initial_prompt;
        bool correcting = false;
        while (true) {
            const Completion completion = backend_.complete(prompt, params_for(task));
            std::optional<std::string> source;
            std::string parse_failure;
            if (!correcting) {
                try {
                    const ParsedTriple triple = parse_sections(completion.raw_text);
                    if (task.mode == GenerationMode::all_at_once) {
                        point.informal_statement = triple.problem;
                        point.informal_proof = triple.informal_proof.value_or("");
                    }
                    if (triple.formal_source && !triple.formal_source->empty()) {
                        source = triple.formal_source;
                    } else {
                        parse_failure = "missing formal proof section";
                    }
                } catch (const ParseError& e) {
                    parse_failure = e.what();
                }
            } else {
                source = extract_formal_source(completion.raw_text);
                if (!source) parse_failure = "no formal proof in correction response";
            }

            if (source) {
                const ProverReport report = prover_.check(*source, prover_timeout_);
                point.attempts.push_back({*source, report});
                if (report.verdict == Verdict::valid) {
                    point.valid = true;
                    return;
                }
            } else {
                point.attempts.push_back(
                    {completion.raw_text, detail::unparseable_report(parse_failure, "")});
                note(hooks, task.task_id, "unparseable completion: " + parse_failure);
            }

            if (static_cast<int>(point.attempts.size()) > task.max_corrections) return;

            // A correction prompt needs statement and informal proof to frame
            // the failed attempts; until a completion parsed far enough to
            // provide them, re-issue the generation prompt instead.
            if (!point.informal_statement.empty()) {
                prompt = render_correction_prompt(templates_, point.informal_statement,
                                                  point.informal_proof,
                                                  detail::to_failed_attempts(point.attempts));
                correcting = true;
            } else {
                prompt = initial_prompt;
                correcting = false;
            }
        }
    }

    TextBackend& backend_;
    Prover& prover_;
    const PromptTemplates& templates_;
    GenerationParams params_;
    std::chrono::milliseconds prover_timeout_;
};

}  // namespace proofgen
