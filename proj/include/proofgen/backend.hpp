#pragma once

// Text-generation backends behind one interface: a deterministic scripted
// mock for tests and offline runs, and an HTTP chat-completions client for
// live runs. Also hosts the parser that splits a completion into the
// (problem, informal proof, formal proof) triple.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "proofgen/common.hpp"
#include "proofgen/lean_text.hpp"

namespace proofgen {

struct GenerationParams {
    double temperature = 0.7;
    int max_tokens = 2048;
    /// Routing key (usually the task id); scripted mocks use it to keep
    /// per-task response queues so batches replay identically at any
    /// parallelism.
    std::string task_key;

    nlohmann::json to_json() const {
        return {{"temperature", temperature}, {"max_tokens", max_tokens}};
    }
};

struct Completion {
    std::string raw_text;
    std::string backend_id;
    std::chrono::milliseconds latency{0};
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff{500};
};

class TextBackend {
public:
    virtual ~TextBackend() = default;

    /// Single completion with retries on transient failures and an in-flight
    /// cap shared across threads.
    Completion complete(const std::string& prompt, const GenerationParams& params) {
        int attempt = 0;
        for (;;) {
            try {
                Limiter::Guard guard(limiter());
                Completion c = complete_once(prompt, params);
                if (c.raw_text.empty()) {
                    throw BackendError("empty_completion", "backend returned an empty completion",
                                       false);
                }
                return c;
            } catch (const BackendError& e) {
                ++attempt;
                if (!e.retryable() || attempt > retry_.max_retries) {
                    throw BackendError(e.kind(),
                                       std::string(e.what()) + " (after " +
                                           std::to_string(attempt) + " attempt" +
                                           (attempt == 1 ? "" : "s") + ")",
                                       false);
                }
                if (retry_.backoff.count() > 0) {
                    std::this_thread::sleep_for(retry_.backoff * attempt);
                }
            }
        }
    }

    void set_retry_policy(RetryPolicy p) { retry_ = p; }
    void set_in_flight_cap(std::size_t cap) { limiter_ = std::make_unique<Limiter>(cap); }

protected:
    virtual Completion complete_once(const std::string& prompt, const GenerationParams& params) = 0;

    Limiter& limiter() {
        if (!limiter_) limiter_ = std::make_unique<Limiter>(8);
        return *limiter_;
    }

private:
    RetryPolicy retry_;
    std::unique_ptr<Limiter> limiter_;
};

// ---------------------------------------------------------------------------
// Scripted mock. Script JSON:
//   {
//     "responses": [ {"text": "..."}, {"error": "timeout"} ],
//     "tasks": { "t0001": [ {"text": "..."} ] }
//   }
// Calls carrying a task_key that appears under "tasks" consume that queue;
// everything else consumes "responses" in global call order. Error kinds
// "timeout" and "rate_limit" are retryable, "auth" is not.
// ---------------------------------------------------------------------------

class MockTextBackend : public TextBackend {
public:
    struct Entry {
        std::optional<std::string> text;
        std::string error_kind;  // empty means success
    };

    MockTextBackend() = default;

    explicit MockTextBackend(std::vector<Entry> responses) : responses_(std::move(responses)) {}

    explicit MockTextBackend(const nlohmann::json& script) {
        if (script.contains("responses")) {
            for (const auto& e : script.at("responses")) responses_.push_back(parse_entry(e));
        }
        if (script.contains("tasks")) {
            for (const auto& [key, list] : script.at("tasks").items()) {
                std::vector<Entry> entries;
                for (const auto& e : list) entries.push_back(parse_entry(e));
                per_task_[key] = {std::move(entries), 0};
            }
        }
    }

    static nlohmann::json read_script_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("mock script not found: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ParseError("mock script " + path + ": " + e.what());
        }
        return j;
    }

    void push_text(const std::string& text) { responses_.push_back({text, ""}); }
    void push_error(const std::string& kind) { responses_.push_back({std::nullopt, kind}); }

    std::size_t calls() const {
        std::lock_guard lk(mu_);
        return calls_;
    }

    /// Prompts seen so far, in call order. Test hook.
    std::vector<std::string> prompts() const {
        std::lock_guard lk(mu_);
        return prompts_;
    }

protected:
    Completion complete_once(const std::string& prompt, const GenerationParams& params) override {
        Entry entry;
        {
            std::lock_guard lk(mu_);
            ++calls_;
            prompts_.push_back(prompt);
            if (!params.task_key.empty()) {
                if (auto it = per_task_.find(params.task_key); it != per_task_.end()) {
                    auto& [entries, next] = it->second;
                    if (next >= entries.size()) {
                        throw BackendError("script_exhausted",
                                           "mock script exhausted for task '" + params.task_key +
                                               "'",
                                           false);
                    }
                    entry = entries[next++];
                    return materialize(entry);
                }
            }
            if (global_next_ >= responses_.size()) {
                throw BackendError("script_exhausted", "mock script exhausted", false);
            }
            entry = responses_[global_next_++];
        }
        return materialize(entry);
    }

private:
    static Entry parse_entry(const nlohmann::json& e) {
        if (e.contains("error")) return {std::nullopt, e.at("error").get<std::string>()};
        return {e.at("text").get<std::string>(), ""};
    }

    static Completion materialize(const Entry& entry) {
        if (!entry.error_kind.empty()) {
            const bool retryable =
                entry.error_kind == "timeout" || entry.error_kind == "rate_limit" ||
                entry.error_kind == "transport";
            throw BackendError(entry.error_kind, "scripted " + entry.error_kind + " failure",
                               retryable);
        }
        return {*entry.text, "mock", std::chrono::milliseconds(0)};
    }

    mutable std::mutex mu_;
    std::vector<Entry> responses_;
    std::size_t global_next_ = 0;
    std::map<std::string, std::pair<std::vector<Entry>, std::size_t>> per_task_;
    std::size_t calls_ = 0;
    std::vector<std::string> prompts_;
};

// ---------------------------------------------------------------------------
// Completion parsing
// ---------------------------------------------------------------------------

struct ParsedTriple {
    std::string problem;
    std::optional<std::string> informal_proof;
    std::optional<std::string> formal_source;
};

namespace detail {

inline constexpr const char* kProblemMarker = "# Problem:";
inline constexpr const char* kInformalMarker = "# Informal proof:";
inline constexpr const char* kFormalMarker = "# Formal proof in Lean 3:";

inline std::optional<std::string> marker_at(const std::string& line) {
    const std::string_view t = trim_view(line);
    for (const char* m : {kProblemMarker, kInformalMarker, kFormalMarker}) {
        if (starts_with(t, m)) return std::string(m);
    }
    return std::nullopt;
}

/// Interior of the section's first fenced code block, verbatim; an unclosed
/// fence is salvaged by taking everything to the end. nullopt when the
/// section has no fence at all.
inline std::optional<std::string> extract_fenced_code(const std::string& section) {
    const auto lines = split_lines(section);
    std::size_t open = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (starts_with(trim_view(lines[i]), "```")) {
            open = i;
            break;
        }
    }
    if (open == lines.size()) return std::nullopt;
    std::string code;
    bool first = true;
    for (std::size_t i = open + 1; i < lines.size(); ++i) {
        if (starts_with(trim_view(lines[i]), "```")) break;
        if (!first) code += '\n';
        code += lines[i];
        first = false;
    }
    return code;
}

}  // namespace detail

/// Splits a completion at the three section markers. Leading noise before
/// "# Problem:" is dropped; a missing problem section is unparseable. The
/// formal section is reduced to its code fence with "line N" prefixes
/// stripped.
inline ParsedTriple parse_sections(const std::string& raw) {
    struct Section {
        std::string marker;
        std::string text;
        bool present = false;
    };
    Section problem{detail::kProblemMarker, "", false};
    Section informal{detail::kInformalMarker, "", false};
    Section formal{detail::kFormalMarker, "", false};

    Section* current = nullptr;
    for (const std::string& line : split_lines(raw)) {
        if (auto marker = detail::marker_at(line)) {
            Section* next = *marker == detail::kProblemMarker    ? &problem
                            : *marker == detail::kInformalMarker ? &informal
                                                                 : &formal;
            if (!next->present) {
                next->present = true;
                current = next;
                const std::string_view t = trim_view(line);
                std::string_view rest = t.substr(marker->size());
                if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
                current->text = std::string(rest);
                continue;
            }
        }
        if (current) {
            if (!current->text.empty()) current->text += '\n';
            current->text += line;
        }
    }

    if (!problem.present) {
        throw ParseError("unparseable completion: missing '# Problem:' marker");
    }
    ParsedTriple triple;
    triple.problem = trim(problem.text);
    if (triple.problem.empty() || triple.problem == "...") {
        throw ParseError("unparseable completion: empty problem section");
    }
    const auto section_text = [](const std::string& raw_text) {
        std::string t = trim(raw_text);
        return t == "..." ? std::string() : t;  // an untouched placeholder is an empty section
    };
    if (informal.present) triple.informal_proof = section_text(informal.text);
    if (formal.present) {
        if (auto code = detail::extract_fenced_code(formal.text)) {
            // Fence interior stays verbatim apart from the numbering strip.
            std::string source = lean::strip_line_numbers(*code);
            if (trim_view(source) == "...") source.clear();
            triple.formal_source = std::move(source);
        } else {
            triple.formal_source = section_text(lean::strip_line_numbers(formal.text));
        }
    }
    return triple;
}

/// Lenient extraction for correction responses, which often repeat only the
/// fixed proof: try the full triple first, then a bare code fence.
inline std::optional<std::string> extract_formal_source(const std::string& raw) {
    try {
        ParsedTriple t = parse_sections(raw);
        if (t.formal_source && !t.formal_source->empty()) return t.formal_source;
    } catch (const ParseError&) {
    }
    const auto lines = split_lines(raw);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!starts_with(trim_view(lines[i]), "```")) continue;
        std::string code;
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            if (starts_with(trim_view(lines[j]), "```")) break;
            if (!code.empty()) code += '\n';
            code += lines[j];
        }
        code = trim(lean::strip_line_numbers(code));
        if (!code.empty()) return code;
        break;
    }
    return std::nullopt;
}

}  // namespace proofgen
