#pragma once

// Lexical utilities over Lean 3 source text: line numbering for correction
// prompts, comment-aware token scanning, proof-hole detection, step counting
// and the lightweight well-formedness checks backing the offline checker.
// This is deliberately not a Lean parser; it only needs to be as precise as
// frequency analytics and prompt plumbing require.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofgen/common.hpp"

namespace proofgen::lean {

// ---------------------------------------------------------------------------
// Line numbering ("line N " prefixes shown to the model in correction prompts)
// ---------------------------------------------------------------------------

inline std::string number_lines(std::string_view source) {
    if (source.empty()) return {};
    std::string out;
    out.reserve(source.size() + 8 * source.size() / 40 + 16);
    std::size_t pos = 0;
    int n = 1;
    while (pos < source.size()) {
        std::size_t nl = source.find('\n', pos);
        const bool last = nl == std::string_view::npos;
        const std::string_view line = source.substr(pos, last ? std::string_view::npos : nl - pos);
        out += "line " + std::to_string(n++) + " ";
        out += line;
        if (!last) out += '\n';
        pos = last ? source.size() : nl + 1;
    }
    return out;
}

inline std::string strip_line_numbers(std::string_view source) {
    std::string out;
    out.reserve(source.size());
    std::size_t pos = 0;
    bool first = true;
    while (pos <= source.size()) {
        std::size_t nl = source.find('\n', pos);
        const bool last = nl == std::string_view::npos;
        std::string_view line = source.substr(pos, last ? std::string_view::npos : nl - pos);
        if (starts_with(line, "line ")) {
            std::size_t i = 5;
            std::size_t digits = 0;
            while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
                ++i;
                ++digits;
            }
            if (digits > 0 && i < line.size() && line[i] == ' ') line.remove_prefix(i + 1);
            else if (digits > 0 && i == line.size()) line.remove_prefix(i);  // "line 3" alone
        }
        if (!first) out += '\n';
        out += line;
        first = false;
        if (last) break;
        pos = nl + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Comment stripping. Replaces comment bodies with spaces so that line/column
// positions of the remaining code are preserved. Handles `--` line comments,
// nested `/- -/` block comments and double-quoted strings.
// ---------------------------------------------------------------------------

inline std::string strip_comments(std::string_view src) {
    std::string out(src);
    std::size_t i = 0;
    int block_depth = 0;
    bool in_string = false;
    while (i < out.size()) {
        const char c = out[i];
        const char d = i + 1 < out.size() ? out[i + 1] : '\0';
        if (block_depth > 0) {
            if (c == '/' && d == '-') {
                ++block_depth;
                out[i] = out[i + 1] = ' ';
                i += 2;
            } else if (c == '-' && d == '/') {
                --block_depth;
                out[i] = out[i + 1] = ' ';
                i += 2;
            } else {
                if (c != '\n') out[i] = ' ';
                ++i;
            }
            continue;
        }
        if (in_string) {
            if (c == '\\' && d != '\0') {
                i += 2;
            } else {
                if (c == '"') in_string = false;
                ++i;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            ++i;
        } else if (c == '/' && d == '-') {
            ++block_depth;
            out[i] = out[i + 1] = ' ';
            i += 2;
        } else if (c == '-' && d == '-') {
            while (i < out.size() && out[i] != '\n') out[i++] = ' ';
        } else {
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Word tokens. Identifiers follow Lean's permissive lexing: ASCII letters,
// digits, `_`, `'`, `.` between parts, and any non-ASCII byte (subscripts,
// blackboard letters and friends).
// ---------------------------------------------------------------------------

struct Token {
    std::string text;
    int line = 1;  // 1-based
    int col = 0;   // 0-based byte offset within the line
};

inline bool is_ident_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '\'' || c >= 0x80;
}

inline bool is_ident_start(unsigned char c) {
    return std::isalpha(c) != 0 || c == '_' || c >= 0x80;
}

/// Tokenizes comment-stripped source into identifier words and single-char
/// symbols. `.` joins identifier parts (`nat.mul_comm` is one token).
inline std::vector<Token> tokenize(std::string_view stripped) {
    std::vector<Token> tokens;
    int line = 1, col = 0;
    std::size_t i = 0;
    while (i < stripped.size()) {
        const unsigned char c = stripped[i];
        if (c == '\n') {
            ++line;
            col = 0;
            ++i;
            continue;
        }
        if (std::isspace(c)) {
            ++i;
            ++col;
            continue;
        }
        if (is_ident_start(c)) {
            const int tline = line, tcol = col;
            std::string word;
            while (i < stripped.size()) {
                const unsigned char w = stripped[i];
                if (is_ident_char(w)) {
                    word.push_back(static_cast<char>(w));
                } else if (w == '.' && i + 1 < stripped.size() &&
                           is_ident_char(static_cast<unsigned char>(stripped[i + 1])) && !word.empty()) {
                    word.push_back('.');
                } else {
                    break;
                }
                ++i;
                ++col;
            }
            tokens.push_back({std::move(word), tline, tcol});
            continue;
        }
        tokens.push_back({std::string(1, static_cast<char>(c)), line, col});
        ++i;
        ++col;
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Proof holes
// ---------------------------------------------------------------------------

inline bool contains_proof_hole(std::string_view source) {
    for (const Token& t : tokenize(strip_comments(source))) {
        if (t.text == "sorry" || t.text == "admit") return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Step counting. A step is an effective source line: non-empty once comments
// are removed, not an import, and not a bare begin/end delimiter. Proof steps
// are the effective lines strictly inside begin...end blocks.
// ---------------------------------------------------------------------------

struct StepCounts {
    int pair_steps = 0;
    int proof_steps = 0;
};

inline StepCounts count_steps(std::string_view source) {
    StepCounts counts;
    const std::string stripped = strip_comments(source);
    int depth = 0;
    for (const std::string& raw : split_lines(stripped)) {
        const std::string_view line = trim_view(raw);
        int opens = 0, closes = 0;
        for (const Token& t : tokenize(raw)) {
            if (t.text == "begin") ++opens;
            else if (t.text == "end") ++closes;
        }
        const int depth_before = depth;
        depth += opens - closes;
        if (depth < 0) depth = 0;
        if (line.empty()) continue;
        if (line == "begin" || line == "end" || line == "end," || line == "end.") continue;
        if (starts_with(line, "import ") || line == "import") continue;
        ++counts.pair_steps;
        if (depth_before > 0) ++counts.proof_steps;
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Offline well-formedness check: balanced brackets, matched begin/end, and
// proof-hole warnings, reported in the prover's path:line:col format. This
// backs both the in-process checker and the `leanstub` binary; it accepts
// lexically sane sources and rejects structurally broken ones, nothing more.
// ---------------------------------------------------------------------------

struct LexIssue {
    int line = 1;
    int col = 0;
    bool warning = false;
    std::string message;
};

inline std::vector<LexIssue> lexical_check(std::string_view source) {
    std::vector<LexIssue> issues;
    const std::string stripped = strip_comments(source);
    const std::vector<Token> tokens = tokenize(stripped);

    struct Open {
        char ch;
        int line, col;
    };
    std::vector<Open> brackets;
    std::vector<Open> begins;
    const auto closer_of = [](char c) { return c == '(' ? ')' : c == '[' ? ']' : '}'; };

    for (const Token& t : tokens) {
        if (t.text.size() == 1) {
            const char c = t.text[0];
            if (c == '(' || c == '[' || c == '{') {
                brackets.push_back({c, t.line, t.col});
                continue;
            }
            if (c == ')' || c == ']' || c == '}') {
                if (brackets.empty() || closer_of(brackets.back().ch) != c) {
                    issues.push_back({t.line, t.col, false,
                                      std::string("unexpected '") + c + "'"});
                } else {
                    brackets.pop_back();
                }
                continue;
            }
        }
        if (t.text == "begin") {
            begins.push_back({'b', t.line, t.col});
        } else if (t.text == "end") {
            if (begins.empty()) {
                issues.push_back({t.line, t.col, false, "unexpected 'end', no open 'begin' block"});
            } else {
                begins.pop_back();
            }
        } else if (t.text == "sorry" || t.text == "admit") {
            issues.push_back({t.line, t.col, true, "declaration uses '" + t.text + "'"});
        }
    }
    for (const Open& o : brackets) {
        issues.push_back({o.line, o.col, false, std::string("unclosed '") + o.ch + "'"});
    }
    for (const Open& o : begins) {
        issues.push_back({o.line, o.col, false, "'begin' block is never closed"});
    }
    return issues;
}

}  // namespace proofgen::lean
