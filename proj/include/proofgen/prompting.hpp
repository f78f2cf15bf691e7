#pragma once

// Prompt rendering: all-at-once generation, the three-stage split (question,
// informal proof, formalization), and multi-round correction prompts that
// replay every failed attempt with numbered sources and prover diagnostics.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "proofgen/common.hpp"
#include "proofgen/concept_pool.hpp"
#include "proofgen/diagnostics.hpp"
#include "proofgen/lean_text.hpp"

namespace proofgen {

enum class QuestionType { theorem_proving, word_problem };

inline std::string qtype_id(QuestionType q) {
    return q == QuestionType::theorem_proving ? "theorem_proving" : "word_problem";
}

inline QuestionType parse_qtype(std::string_view id) {
    if (id == "theorem_proving") return QuestionType::theorem_proving;
    if (id == "word_problem") return QuestionType::word_problem;
    throw Error("unknown question type: '" + std::string(id) + "'");
}

/// Phrase substituted for the [QUESTION TYPE] placeholder.
inline std::string qtype_prompt_text(QuestionType q) {
    return q == QuestionType::theorem_proving ? "theorem proving problem" : "word problem";
}

inline std::string qtype_display(QuestionType q) {
    return q == QuestionType::theorem_proving ? "Theorem Proving" : "Word Problem";
}

enum class GenerationMode { all_at_once, step_by_step };

inline std::string mode_id(GenerationMode m) {
    return m == GenerationMode::all_at_once ? "all_at_once" : "step_by_step";
}

inline GenerationMode parse_mode(std::string_view id) {
    if (id == "all_at_once") return GenerationMode::all_at_once;
    if (id == "step_by_step") return GenerationMode::step_by_step;
    throw Error("unknown generation mode: '" + std::string(id) + "'");
}

enum class Stage { t1_problem, t2_informal, t3_formal };

inline std::string stage_id(Stage s) {
    switch (s) {
        case Stage::t1_problem: return "T1";
        case Stage::t2_informal: return "T2";
        case Stage::t3_formal: return "T3";
    }
    throw Error("stage_id: bad stage");
}

/// Sections already generated by earlier stages, fed into T2/T3 prompts.
struct PriorSections {
    std::optional<std::string> problem;
    std::optional<std::string> informal_proof;
};

/// One failed attempt as shown to the model: the formal source (renumbered
/// at render time) plus the diagnostics that rejected it, oldest first.
struct FailedAttempt {
    std::string formal_source;
    std::vector<Diagnostic> diagnostics;
};

// ---------------------------------------------------------------------------
// Templates. Stored as plain text with [PLACEHOLDER] markers so variants can
// be swapped from a directory without touching code; the builtin set is the
// canonical wording.
// ---------------------------------------------------------------------------

struct PromptTemplates {
    std::string generation;
    std::string step_t1;
    std::string step_t2;
    std::string step_t3;
    std::string correction;

    static const PromptTemplates& builtin();

    /// Loads any of generation.txt, step_t1.txt, step_t2.txt, step_t3.txt,
    /// correction.txt from `dir`; files that are absent keep the builtin text.
    static PromptTemplates from_directory(const std::string& dir) {
        PromptTemplates t = builtin();
        const auto load = [&](const char* name, std::string& slot) {
            const std::filesystem::path p = std::filesystem::path(dir) / name;
            std::ifstream in(p, std::ios::binary);
            if (!in) return;
            std::ostringstream buf;
            buf << in.rdbuf();
            slot = buf.str();
        };
        load("generation.txt", t.generation);
        load("step_t1.txt", t.step_t1);
        load("step_t2.txt", t.step_t2);
        load("step_t3.txt", t.step_t3);
        load("correction.txt", t.correction);
        return t;
    }

    void save_to_directory(const std::string& dir) const {
        std::filesystem::create_directories(dir);
        const auto save = [&](const char* name, const std::string& text) {
            std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
            if (!out) throw Error("cannot write template file in " + dir);
            out << text;
        };
        save("generation.txt", generation);
        save("step_t1.txt", step_t1);
        save("step_t2.txt", step_t2);
        save("step_t3.txt", step_t3);
        save("correction.txt", correction);
    }
};

namespace detail {

inline constexpr const char* kExpertPreamble =
    "You are a math expert. Now please come up with a math problem according to the following "
    "requirements. The math problem should contain a question part (indicated by \"Problem: \"), "
    "a corresponding solution in natural language (indicated by \"Informal proof:\"), and a "
    "translated formal solution in Lean 3 (indicated by \"Formal proof in Lean 3:\"). Please "
    "note that the informal proof and the formal proof need to be identical.";

inline constexpr const char* kLeanPreamble =
    "You are a master in Lean. Now please come up with a math problem according to the following "
    "requirements. The math problem should contain a question part (indicated by \"Problem: \"), "
    "a corresponding solution in natural language (indicated by \"Informal proof:\"), and a "
    "translated formal solution in Lean 3 (indicated by \"Formal proof in Lean 3:\"). Please "
    "note that the informal proof and the formal proof need to be identical.";

inline constexpr const char* kConceptLine =
    "Please create a [QUESTION TYPE] in the level of [EDUCATIONAL LEVEL] based on the following "
    "knowledge point(s): [KNOWLEDGE POINTS].";

inline std::string builtin_generation() {
    std::string t;
    t += kExpertPreamble;
    t += "\n\n";
    t += kConceptLine;
    t += "\n\n";
    t += "You must respond in the following format: \n\n";
    t += "# Problem: ...\n\n# Informal proof: ...\n\n# Formal proof in Lean 3: ...\n";
    return t;
}

inline std::string builtin_t1() {
    std::string t;
    t += kExpertPreamble;
    t += "\n\n";
    t += kConceptLine;
    t += "\n\n";
    t += "Please first write the question part regardless of the other parts. You must write "
         "the following format, filling in the \"# Problem: \" section, and leaving the other "
         "two sections empty.\n\n";
    t += "# Problem: ...\n\n# Informal proof: ...\n\n# Formal proof in Lean 3: ...\n";
    return t;
}

inline std::string builtin_t2() {
    std::string t;
    t += kExpertPreamble;
    t += "\n\n";
    t += kConceptLine;
    t += "\n\n";
    t += "Please then write the corresponding solution in natural language (indicated by "
         "\"Informal proof:\") given the \"# Problem: \", filling in the \"# Informal proof: \" "
         "section, and leaving the other section empty.\n\n";
    t += "# Problem: [PROBLEM]\n\n# Informal proof: ...\n\n# Formal proof in Lean 3: ...\n";
    return t;
}

inline std::string builtin_t3() {
    std::string t;
    t += kLeanPreamble;
    t += "\n\n";
    t += kConceptLine;
    t += "\n\n";
    t += "Please translate the \"# Informal proof:\" section into Lean 3 and fill in the "
         "\"# Formal proof in Lean 3: \" section.\n\n";
    t += "# Problem: [PROBLEM]\n\n# Informal proof: [INFORMAL PROOF]\n\n"
         "# Formal proof in Lean 3: ...\n";
    return t;
}

inline std::string builtin_correction() {
    std::string t;
    t += "In the following, you are given a \"Problem\", a pair of corresponding \"Informal "
         "proof\" and \"Formal proof in Lean 3\", along with error messages from a Lean Prover "
         "corresponding to the \"Formal proof in Lean 3\". Now please carefully modify the "
         "\"Formal proof in Lean 3\" section so that it passes the Lean Prover without error. "
         "You should write the modified complete proof in your response.\n\n";
    t += "# Problem: [PROBLEM]\n\n# Informal proof: [INFORMAL PROOF]\n\n[ATTEMPT BLOCKS]\n";
    return t;
}

}  // namespace detail

inline const PromptTemplates& PromptTemplates::builtin() {
    static const PromptTemplates t = {
        detail::builtin_generation(), detail::builtin_t1(),         detail::builtin_t2(),
        detail::builtin_t3(),         detail::builtin_correction(),
    };
    return t;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// "*Geometry* in 8th grade; *Algebraic expressions* in Algebra basics"
inline std::string knowledge_points_clause(const ConceptSeed& seed) {
    std::string out;
    for (std::size_t i = 0; i < seed.concepts.size(); ++i) {
        if (i > 0) out += "; ";
        out += "*" + seed.concepts[i].name + "* in " + seed.concepts[i].domain;
    }
    return out;
}

inline std::string render_generation_prompt(const PromptTemplates& templates,
                                            const ConceptSeed& seed, QuestionType qtype,
                                            GenerationMode mode,
                                            std::optional<Stage> stage = std::nullopt,
                                            const PriorSections& prior = {}) {
    if (seed.concepts.empty() || seed.concepts.size() > 2) {
        throw Error("seed must hold 1 or 2 concepts");
    }
    if (mode == GenerationMode::all_at_once && stage.has_value()) {
        throw Error("all_at_once generation takes no stage");
    }
    if (mode == GenerationMode::step_by_step && !stage.has_value()) {
        throw Error("step_by_step generation requires a stage");
    }

    std::string text;
    if (mode == GenerationMode::all_at_once) {
        text = templates.generation;
    } else {
        switch (*stage) {
            case Stage::t1_problem:
                text = templates.step_t1;
                break;
            case Stage::t2_informal:
                if (!prior.problem || trim_view(*prior.problem).empty()) {
                    throw Error("stage T2 requires the generated problem");
                }
                text = templates.step_t2;
                break;
            case Stage::t3_formal:
                if (!prior.problem || trim_view(*prior.problem).empty()) {
                    throw Error("stage T3 requires the generated problem");
                }
                if (!prior.informal_proof || trim_view(*prior.informal_proof).empty()) {
                    throw Error("stage T3 requires the generated informal proof");
                }
                text = templates.step_t3;
                break;
        }
    }
    text = replace_all(std::move(text), "[QUESTION TYPE]", qtype_prompt_text(qtype));
    text = replace_all(std::move(text), "[EDUCATIONAL LEVEL]", level_prompt_text(seed.level));
    text = replace_all(std::move(text), "[KNOWLEDGE POINTS]", knowledge_points_clause(seed));
    if (prior.problem) text = replace_all(std::move(text), "[PROBLEM]", *prior.problem);
    if (prior.informal_proof) {
        text = replace_all(std::move(text), "[INFORMAL PROOF]", *prior.informal_proof);
    }
    return text;
}

/// One "# Formal proof (i) in Lean 3:" block with the numbered source fence
/// and its prover messages. Attempts are renumbered from scratch each round.
inline std::string render_attempt_block(std::size_t index, const FailedAttempt& attempt) {
    std::string block;
    block += "# Formal proof (" + std::to_string(index) + ") in Lean 3: \n";
    block += "```lean\n";
    block += lean::number_lines(lean::strip_line_numbers(attempt.formal_source));
    block += "\n```\n\n";
    block += "# Error messages for Formal proof (" + std::to_string(index) +
             ") from Lean Prover: \n";
    for (std::size_t i = 0; i < attempt.diagnostics.size(); ++i) {
        if (i > 0) block += '\n';
        block += render_diagnostic(attempt.diagnostics[i]);
    }
    return block;
}

inline std::string render_correction_prompt(const PromptTemplates& templates,
                                            const std::string& problem,
                                            const std::string& informal_proof,
                                            const std::vector<FailedAttempt>& history) {
    if (history.empty()) throw Error("correction prompt requires at least one failed attempt");
    for (const FailedAttempt& a : history) {
        if (a.diagnostics.empty()) {
            throw Error("correction prompt: attempt without diagnostics has nothing to correct");
        }
    }
    std::string blocks;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (i > 0) blocks += "\n\n";
        blocks += render_attempt_block(i + 1, history[i]);
    }
    std::string text = templates.correction;
    text = replace_all(std::move(text), "[PROBLEM]", problem);
    text = replace_all(std::move(text), "[INFORMAL PROOF]", informal_proof);
    text = replace_all(std::move(text), "[ATTEMPT BLOCKS]", blocks);
    return text;
}

}  // namespace proofgen
