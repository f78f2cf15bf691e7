#pragma once

// Prover harness: submits formal sources to a Lean 3 checker, enforces
// timeouts, parses diagnostics and decides validity. Proof-hole keywords
// (sorry/admit) force an invalid verdict even when the checker only warns.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "proofgen/common.hpp"
#include "proofgen/diagnostics.hpp"
#include "proofgen/lean_text.hpp"
#include "proofgen/subprocess.hpp"

namespace proofgen {

enum class Verdict { valid, invalid, timeout, crash };

inline std::string verdict_id(Verdict v) {
    switch (v) {
        case Verdict::valid: return "valid";
        case Verdict::invalid: return "invalid";
        case Verdict::timeout: return "timeout";
        case Verdict::crash: return "crash";
    }
    throw Error("verdict_id: bad verdict");
}

inline Verdict parse_verdict(std::string_view id) {
    if (id == "valid") return Verdict::valid;
    if (id == "invalid") return Verdict::invalid;
    if (id == "timeout") return Verdict::timeout;
    if (id == "crash") return Verdict::crash;
    throw Error("unknown verdict: '" + std::string(id) + "'");
}

struct ProverReport {
    Verdict verdict = Verdict::crash;
    std::vector<Diagnostic> diagnostics;
    std::chrono::milliseconds wall_time{0};
    bool contains_sorry = false;
    std::string mathlib_revision;

    friend bool operator==(const ProverReport&, const ProverReport&) = default;
};

class Prover {
public:
    virtual ~Prover() = default;
    virtual ProverReport check(const std::string& formal_source,
                               std::chrono::milliseconds timeout) = 0;
};

namespace detail {

inline Verdict decide_verdict(bool process_ok, const std::vector<Diagnostic>& diags,
                              bool contains_sorry) {
    if (!process_ok) return Verdict::crash;
    if (has_error(diags) || contains_sorry) return Verdict::invalid;
    return Verdict::valid;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// In-process checker. Runs the same lexical well-formedness checks as the
// `leanstub` binary, with zero wall time, so scripted end-to-end runs are
// bit-reproducible. Not a proof checker; see LeanProver for the real thing.
// ---------------------------------------------------------------------------

class LexicalProver : public Prover {
public:
    explicit LexicalProver(std::string revision = "lexical-stub")
        : revision_(std::move(revision)) {}

    ProverReport check(const std::string& formal_source, std::chrono::milliseconds) override {
        ProverReport report;
        report.mathlib_revision = revision_;
        for (const lean::LexIssue& issue : lean::lexical_check(formal_source)) {
            report.diagnostics.push_back(
                {issue.line, issue.col, issue.warning ? Severity::warning : Severity::error,
                 issue.message});
        }
        report.contains_sorry = lean::contains_proof_hole(formal_source);
        report.verdict = detail::decide_verdict(true, report.diagnostics, report.contains_sorry);
        return report;
    }

private:
    std::string revision_;
};

// ---------------------------------------------------------------------------
// External Lean 3 checker. Each check writes the source into its own temp
// workspace and invokes the configured binary on it; combined output is
// parsed into diagnostics. The pinned mathlib revision is stamped into every
// report for reproducibility.
// ---------------------------------------------------------------------------

struct ProverConfig {
    std::string lean_bin = "lean";
    std::string mathlib_path;      // exported as LEAN_PATH when set
    std::string mathlib_revision;  // informational; recorded into reports
    std::chrono::milliseconds timeout{60'000};
    std::size_t max_concurrent = 4;
};

class LeanProver : public Prover {
public:
    explicit LeanProver(ProverConfig config)
        : config_(std::move(config)), limiter_(config_.max_concurrent) {
        if (config_.lean_bin.empty()) throw ConfigError("prover binary not configured");
        if (config_.lean_bin.find('/') != std::string::npos &&
            !std::filesystem::exists(config_.lean_bin)) {
            throw ConfigError("prover binary not found: " + config_.lean_bin);
        }
    }

    ProverReport check(const std::string& formal_source,
                       std::chrono::milliseconds timeout) override {
        Limiter::Guard guard(limiter_);

        namespace fs = std::filesystem;
        const fs::path dir = make_workspace();
        const fs::path file = dir / "main.lean";
        {
            std::ofstream out(file, std::ios::binary);
            if (!out) throw Error("cannot write prover workspace file: " + file.string());
            out << formal_source;
            if (formal_source.empty() || formal_source.back() != '\n') out << '\n';
        }

        std::vector<std::pair<std::string, std::string>> env;
        if (!config_.mathlib_path.empty()) env.emplace_back("LEAN_PATH", config_.mathlib_path);

        const auto effective = timeout.count() > 0 ? timeout : config_.timeout;
        RunResult run = run_process({config_.lean_bin, file.string()}, effective, env);
        std::error_code ec;
        fs::remove_all(dir, ec);

        if (run.exec_failed) {
            throw ConfigError("prover binary could not be executed: " + config_.lean_bin);
        }

        ProverReport report;
        report.mathlib_revision = config_.mathlib_revision;
        report.wall_time = run.wall;
        report.diagnostics = parse_diagnostics(run.output);
        report.contains_sorry = lean::contains_proof_hole(formal_source);
        if (run.timed_out) {
            report.verdict = Verdict::timeout;
            return report;
        }
        if (run.exit_code != 0 && !has_error(report.diagnostics)) {
            // Nonzero exit without a parseable error: the checker itself fell over.
            report.verdict = Verdict::crash;
            return report;
        }
        report.verdict =
            detail::decide_verdict(true, report.diagnostics, report.contains_sorry);
        return report;
    }

    const ProverConfig& config() const { return config_; }

private:
    static std::filesystem::path make_workspace() {
        namespace fs = std::filesystem;
        static std::atomic<unsigned long> counter{0};
        const fs::path base = fs::temp_directory_path();
        for (int i = 0; i < 64; ++i) {
            fs::path dir = base / ("proofgen-" + std::to_string(::getpid()) + "-" +
                                   std::to_string(counter.fetch_add(1)));
            std::error_code ec;
            if (fs::create_directory(dir, ec)) return dir;
        }
        throw Error("cannot create prover workspace directory");
    }

    ProverConfig config_;
    Limiter limiter_;
};

}  // namespace proofgen
