#pragma once

// Structured prover diagnostics and the lenient parser for the prover's
// "path:line:col: severity: message" output stream.

#include <string>
#include <string_view>
#include <vector>

#include "proofgen/common.hpp"

namespace proofgen {

enum class Severity { error, warning, info };

inline std::string severity_id(Severity s) {
    switch (s) {
        case Severity::error: return "error";
        case Severity::warning: return "warning";
        case Severity::info: return "info";
    }
    throw Error("severity_id: bad severity");
}

inline Severity parse_severity(std::string_view s) {
    if (s == "error") return Severity::error;
    if (s == "warning") return Severity::warning;
    if (s == "info" || s == "information") return Severity::info;
    throw Error("unknown severity: '" + std::string(s) + "'");
}

struct Diagnostic {
    int line = 1;   // 1-based
    int col = 0;    // 0-based
    Severity severity = Severity::error;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// "12:4: error: unknown identifier 'foo'" — the shape shown to the model
/// in correction prompts.
inline std::string render_diagnostic(const Diagnostic& d) {
    return std::to_string(d.line) + ":" + std::to_string(d.col) + ": " + severity_id(d.severity) +
           ": " + d.message;
}

namespace detail {

struct DiagHeader {
    int line, col;
    Severity severity;
    std::string message;
};

// Matches "<path>:<line>:<col>: <severity>: <message>" without regex;
// the path itself may contain ':' only on exotic systems we ignore.
inline bool match_diag_header(std::string_view text, DiagHeader& out) {
    const std::size_t first = text.find(':');
    if (first == std::string_view::npos || first == 0) return false;
    std::size_t pos = first + 1;
    const auto read_int = [&](int& value) {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start || pos >= text.size() || text[pos] != ':') return false;
        value = std::stoi(std::string(text.substr(start, pos - start)));
        ++pos;
        return true;
    };
    int line = 0, col = 0;
    if (!read_int(line) || !read_int(col)) return false;
    if (pos >= text.size() || text[pos] != ' ') return false;
    ++pos;
    const std::size_t sev_end = text.find(':', pos);
    if (sev_end == std::string_view::npos) return false;
    const std::string_view sev = text.substr(pos, sev_end - pos);
    if (sev != "error" && sev != "warning" && sev != "info" && sev != "information") return false;
    std::string_view msg = text.substr(sev_end + 1);
    if (!msg.empty() && msg.front() == ' ') msg.remove_prefix(1);
    out = {line, col, parse_severity(sev), std::string(msg)};
    return true;
}

}  // namespace detail

/// Lenient parse of prover output. Lines matching the header pattern open a
/// diagnostic; following non-matching lines attach to the open diagnostic's
/// message; anything before the first header is ignored.
inline std::vector<Diagnostic> parse_diagnostics(std::string_view output) {
    std::vector<Diagnostic> diags;
    for (const std::string& raw : split_lines(output)) {
        detail::DiagHeader header;
        if (detail::match_diag_header(raw, header)) {
            diags.push_back({header.line, header.col, header.severity, header.message});
        } else if (!diags.empty()) {
            if (trim_view(raw).empty()) continue;
            diags.back().message += "\n" + raw;
        }
    }
    return diags;
}

inline bool has_error(const std::vector<Diagnostic>& diags) {
    for (const Diagnostic& d : diags) {
        if (d.severity == Severity::error) return true;
    }
    return false;
}

}  // namespace proofgen
