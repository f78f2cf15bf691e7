#pragma once

// Dataset characterization: pass@1 tables over correction budgets,
// correction-step proportions, proof-length distributions, ROUGE-L corpus
// diversity with bootstrapping, and lexical tactic/lemma frequencies.

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proofgen/common.hpp"
#include "proofgen/lean_text.hpp"
#include "proofgen/orchestrator.hpp"

namespace proofgen {

// ---------------------------------------------------------------------------
// Pass rates
// ---------------------------------------------------------------------------

inline constexpr std::array<int, 3> kCorrectionBudgets = {0, 1, 2};

struct GroupKey {
    QuestionType qtype = QuestionType::theorem_proving;
    EducationalLevel level = EducationalLevel::elementary;
    int k = 1;

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct GroupRates {
    std::size_t group_size = 0;
    std::array<double, 3> value{};  // percentage of points valid within budget c
    std::array<double, 3> delta{};  // value(c) - value(0)
};

struct PassRateTable {
    std::map<GroupKey, GroupRates> groups;
};

/// value(c) = 100 * |{valid, correction_rounds <= c}| / |group|.
inline PassRateTable pass_rates(const std::vector<DataPoint>& points) {
    if (points.empty()) throw Error("pass_rates: empty input");
    struct Tally {
        std::size_t total = 0;
        std::array<std::size_t, 3> valid_within{};
    };
    std::map<GroupKey, Tally> tallies;
    for (const DataPoint& p : points) {
        const GroupKey key{p.task.qtype, p.task.seed.level,
                           static_cast<int>(p.task.seed.concepts.size())};
        Tally& t = tallies[key];
        ++t.total;
        if (!p.valid) continue;
        for (std::size_t c = 0; c < kCorrectionBudgets.size(); ++c) {
            if (p.correction_rounds <= kCorrectionBudgets[c]) ++t.valid_within[c];
        }
    }
    PassRateTable table;
    for (const auto& [key, t] : tallies) {
        GroupRates rates;
        rates.group_size = t.total;
        for (std::size_t c = 0; c < kCorrectionBudgets.size(); ++c) {
            rates.value[c] = 100.0 * static_cast<double>(t.valid_within[c]) /
                             static_cast<double>(t.total);
            rates.delta[c] = rates.value[c] - rates.value[0];
        }
        table.groups[key] = rates;
    }
    return table;
}

/// Fractions of points by correction rounds consumed; points that never
/// validated fall into the "failed" bucket. Values sum to 1.
inline std::map<std::string, double> correction_proportions(const std::vector<DataPoint>& points) {
    if (points.empty()) throw Error("correction_proportions: empty input");
    std::map<std::string, std::size_t> counts;
    for (const DataPoint& p : points) {
        if (p.valid) ++counts[std::to_string(p.correction_rounds)];
        else ++counts["failed"];
    }
    std::map<std::string, double> fractions;
    for (const auto& [bucket, n] : counts) {
        fractions[bucket] = static_cast<double>(n) / static_cast<double>(points.size());
    }
    return fractions;
}

// ---------------------------------------------------------------------------
// Proof lengths
// ---------------------------------------------------------------------------

/// (pair_steps, proof_steps) for one formal source; see lean::count_steps for
/// the line-counting rule. Missing source counts as (0, 0).
inline std::pair<int, int> proof_lengths(const std::string& formal_source) {
    const lean::StepCounts c = lean::count_steps(formal_source);
    return {c.pair_steps, c.proof_steps};
}

struct LengthDistribution {
    // (level, qtype) -> lengths, one entry per point
    std::map<std::pair<EducationalLevel, QuestionType>, std::vector<int>> pair_steps;
    std::map<std::pair<EducationalLevel, QuestionType>, std::vector<int>> proof_steps;
};

inline LengthDistribution length_distribution(const std::vector<DataPoint>& points) {
    LengthDistribution dist;
    for (const DataPoint& p : points) {
        const auto key = std::make_pair(p.task.seed.level, p.task.qtype);
        const auto [pair_n, proof_n] = proof_lengths(p.formal_source);
        dist.pair_steps[key].push_back(pair_n);
        dist.proof_steps[key].push_back(proof_n);
    }
    return dist;
}

inline std::map<int, int> histogram(const std::vector<int>& values) {
    std::map<int, int> buckets;
    for (int v : values) ++buckets[v];
    return buckets;
}

// ---------------------------------------------------------------------------
// ROUGE-L
// ---------------------------------------------------------------------------

/// Case-folded whitespace tokens with punctuation stripped.
inline std::vector<std::string> rouge_tokens(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) cleaned.push_back(static_cast<char>(std::tolower(c)));
        else cleaned.push_back(' ');
    }
    std::vector<std::string> tokens;
    std::istringstream in(cleaned);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// LCS F1 over token sequences: P = LCS/|cand|, R = LCS/|ref|, F = 2PR/(P+R);
/// degenerate cases (no overlap, empty side) score 0.
inline double rouge_l_tokens(const std::vector<std::string>& candidate,
                             const std::vector<std::string>& reference) {
    const std::size_t lcs = lcs_length(candidate, reference);
    if (lcs == 0) return 0.0;
    const double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
    const double r = static_cast<double>(lcs) / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

inline double rouge_l(std::string_view candidate, std::string_view reference) {
    return rouge_l_tokens(rouge_tokens(candidate), rouge_tokens(reference));
}

/// Bootstrapped corpus diversity: per round, sample `sample_size` texts and
/// pair each with every other text in the corpus; the score is the mean of
/// the per-round mean pairwise ROUGE-L. Lower means more diverse.
inline double diversity_bootstrap(const std::vector<std::string>& texts, int rounds,
                                  int sample_size, Rng& rng) {
    if (rounds < 1 || sample_size < 1) throw Error("diversity_bootstrap: bad parameters");
    if (texts.size() < static_cast<std::size_t>(sample_size)) {
        throw Error("diversity_bootstrap: need at least " + std::to_string(sample_size) +
                    " texts, have " + std::to_string(texts.size()));
    }
    if (texts.size() < 2) throw Error("diversity_bootstrap: need at least 2 texts");
    std::vector<std::vector<std::string>> tokens;
    tokens.reserve(texts.size());
    for (const std::string& t : texts) tokens.push_back(rouge_tokens(t));

    double total = 0.0;
    for (int round = 0; round < rounds; ++round) {
        const auto picked =
            rng.sample_indices(texts.size(), static_cast<std::size_t>(sample_size));
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t s : picked) {
            for (std::size_t t = 0; t < texts.size(); ++t) {
                if (t == s) continue;
                sum += rouge_l_tokens(tokens[s], tokens[t]);
                ++pairs;
            }
        }
        total += sum / static_cast<double>(pairs);
    }
    return total / rounds;
}

// ---------------------------------------------------------------------------
// Tactic and lemma frequencies
// ---------------------------------------------------------------------------

class TacticSet {
public:
    static const TacticSet& builtin();

    static TacticSet load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("tactic list not found: " + path);
        TacticSet set;
        std::string line;
        while (std::getline(in, line)) {
            const std::string name = trim(line);
            if (name.empty() || name[0] == '#') continue;
            set.names_.insert(name);
        }
        if (set.names_.empty()) throw Error("tactic list is empty: " + path);
        return set;
    }

    bool contains(const std::string& name) const { return names_.count(name) > 0; }
    const std::set<std::string>& names() const { return names_; }
    void insert(std::string name) { names_.insert(std::move(name)); }

private:
    std::set<std::string> names_;
};

inline const TacticSet& TacticSet::builtin() {
    static const TacticSet set = [] {
        TacticSet s;
        for (const char* name :
             {"abel",          "apply",        "assume",       "assumption",   "by_cases",
              "by_contra",     "by_contradiction", "calc",     "cases",        "change",
              "clear",         "congr",        "constructor",  "conv",         "delta",
              "dsimp",         "exact",        "exacts",       "existsi",      "ext",
              "field_simp",    "finish",       "fsplit",       "generalize",   "have",
              "induction",     "injection",    "interval_cases", "intro",      "intros",
              "itauto",        "left",         "library_search", "linarith",   "nlinarith",
              "norm_cast",     "norm_fin",     "norm_num",     "obtain",       "omega",
              "push_cast",     "push_neg",     "rcases",       "refine",       "refl",
              "rename",        "repeat",       "revert",       "right",        "ring",
              "ring_exp",      "ring_nf",      "rintro",       "rintros",      "rw",
              "rwa",           "show",         "simp",         "simp_rw",      "simpa",
              "specialize",    "split",        "split_ifs",    "squeeze_simp", "subst",
              "suffices",      "tauto",        "tidy",         "trivial",      "trunc_cases",
              "unfold",        "unfold_coes",  "use"}) {
            s.insert(name);
        }
        return s;
    }();
    return set;
}

struct FrequencyMaps {
    std::map<std::string, int> tactics;
    std::map<std::string, int> lemmas;
};

namespace detail {

/// Words that may trail a tactic without naming a fact.
inline bool is_structural_word(const std::string& w) {
    static const std::set<std::string> words = {"with", "at",  "by",    "in",   "to",
                                                "using", "from", "only", "fun", "λ",
                                                "generalizing", "then", "else", "if"};
    return words.count(w) > 0;
}

inline bool is_numeral(const std::string& w) {
    for (unsigned char c : w) {
        if (!std::isdigit(c)) return false;
    }
    return !w.empty();
}

}  // namespace detail

/// Lexical frequency extraction. Tactic occurrences are the heads of tactic
/// segments inside begin...end blocks (segments split at top-level ',', ';'
/// and at '{' '}' sub-block boundaries; a leading `by` is transparent).
/// Heads of exact/apply/rw/rwa/calc segments additionally contribute their
/// identifier arguments as lemma occurrences.
inline FrequencyMaps extract_tactics_lemmas(const std::string& formal_source,
                                            const TacticSet& tactics = TacticSet::builtin()) {
    FrequencyMaps maps;
    const std::string stripped = lean::strip_comments(formal_source);
    const std::vector<lean::Token> tokens = lean::tokenize(stripped);

    int begin_depth = 0;
    int bracket_depth = 0;  // ( ) and [ ] only; { } delimit tactic sub-blocks
    std::vector<lean::Token> segment;

    const auto lemma_scan_head = [](const std::string& head) {
        return head == "exact" || head == "apply" || head == "rw" || head == "rwa" ||
               head == "calc";
    };

    const auto flush = [&] {
        if (segment.empty()) return;
        std::size_t head_at = 0;
        while (head_at < segment.size() &&
               (segment[head_at].text == "by" ||
                (segment[head_at].text.size() == 1 &&
                 !lean::is_ident_start(static_cast<unsigned char>(segment[head_at].text[0]))))) {
            ++head_at;  // `by` is transparent; skip stray symbols
        }
        if (head_at >= segment.size()) {
            segment.clear();
            return;
        }
        const std::string head = segment[head_at].text;
        if (tactics.contains(head)) {
            ++maps.tactics[head];
            if (lemma_scan_head(head)) {
                // For calc steps only the justification after the last ':'
                // names facts; other heads take their whole argument list.
                std::size_t args_from = head_at + 1;
                if (head == "calc") {
                    for (std::size_t i = segment.size(); i-- > args_from;) {
                        if (segment[i].text == ":") {
                            args_from = i + 1;
                            break;
                        }
                    }
                }
                for (std::size_t i = args_from; i < segment.size(); ++i) {
                    const std::string& w = segment[i].text;
                    if (w == "at") break;  // what follows names locations, not facts
                    if (w.size() == 1 && !lean::is_ident_start(static_cast<unsigned char>(w[0]))) {
                        continue;
                    }
                    if (tactics.contains(w) || detail::is_structural_word(w) ||
                        detail::is_numeral(w)) {
                        continue;
                    }
                    if (w == "_" || w == "sorry" || w == "admit") continue;
                    ++maps.lemmas[w];
                }
            }
        }
        segment.clear();
    };

    for (const lean::Token& t : tokens) {
        if (t.text == "begin") {
            flush();
            ++begin_depth;
            bracket_depth = 0;
            continue;
        }
        if (t.text == "end") {
            if (begin_depth > 0) {
                flush();
                --begin_depth;
            }
            continue;
        }
        if (begin_depth == 0) continue;
        if (t.text.size() == 1) {
            const char c = t.text[0];
            if (c == '(' || c == '[') {
                ++bracket_depth;
                segment.push_back(t);
                continue;
            }
            if (c == ')' || c == ']') {
                if (bracket_depth > 0) --bracket_depth;
                segment.push_back(t);
                continue;
            }
            if (bracket_depth == 0 && (c == ',' || c == ';' || c == '{' || c == '}')) {
                flush();
                continue;
            }
        }
        segment.push_back(t);
    }
    flush();
    return maps;
}

inline FrequencyMaps extract_tactics_lemmas(const std::vector<DataPoint>& points,
                                            const TacticSet& tactics = TacticSet::builtin()) {
    FrequencyMaps all;
    for (const DataPoint& p : points) {
        const FrequencyMaps one = extract_tactics_lemmas(p.formal_source, tactics);
        for (const auto& [name, n] : one.tactics) all.tactics[name] += n;
        for (const auto& [name, n] : one.lemmas) all.lemmas[name] += n;
    }
    return all;
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

struct AnalyticsReport {
    PassRateTable pass_rates;
    std::map<std::string, double> correction_proportions;
    LengthDistribution lengths;
    std::map<std::string, double> diversity;  // measure name -> score
    FrequencyMaps frequencies;
};

struct DiversityParams {
    int rounds = 10;
    int sample_size = 10;
};

inline AnalyticsReport analyze(const std::vector<DataPoint>& points, Rng& rng,
                               DiversityParams diversity = {},
                               const TacticSet& tactics = TacticSet::builtin()) {
    if (points.empty()) throw Error("analyze: empty dataset");
    AnalyticsReport report;
    report.pass_rates = pass_rates(points);
    report.correction_proportions = correction_proportions(points);
    report.lengths = length_distribution(points);
    report.frequencies = extract_tactics_lemmas(points, tactics);

    std::vector<std::string> statements, proofs;
    for (const DataPoint& p : points) {
        if (!p.informal_statement.empty()) statements.push_back(p.informal_statement);
        if (!p.informal_proof.empty()) proofs.push_back(p.informal_proof);
    }
    const auto maybe_diversity = [&](const char* name, const std::vector<std::string>& texts) {
        if (texts.size() >= static_cast<std::size_t>(diversity.sample_size) && texts.size() >= 2) {
            report.diversity[name] =
                diversity_bootstrap(texts, diversity.rounds, diversity.sample_size, rng);
        }
    };
    maybe_diversity("informal_statement", statements);
    maybe_diversity("informal_proof", proofs);
    return report;
}

inline nlohmann::json to_json(const AnalyticsReport& report) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& [key, rates] : report.pass_rates.groups) {
        nlohmann::json row = {{"qtype", qtype_id(key.qtype)},
                              {"level", level_id(key.level)},
                              {"k", key.k},
                              {"group_size", rates.group_size}};
        for (std::size_t c = 0; c < kCorrectionBudgets.size(); ++c) {
            const std::string budget = std::to_string(kCorrectionBudgets[c]);
            row["pass_at_1"][budget] = rates.value[c];
            row["delta"][budget] = rates.delta[c];
        }
        groups.push_back(row);
    }

    nlohmann::json lengths = nlohmann::json::array();
    for (const auto& [key, values] : report.lengths.pair_steps) {
        nlohmann::json buckets_pair = nlohmann::json::array();
        for (const auto& [bucket, n] : histogram(values)) {
            buckets_pair.push_back({{"steps", bucket}, {"count", n}});
        }
        nlohmann::json buckets_proof = nlohmann::json::array();
        for (const auto& [bucket, n] : histogram(report.lengths.proof_steps.at(key))) {
            buckets_proof.push_back({{"steps", bucket}, {"count", n}});
        }
        lengths.push_back({{"level", level_id(key.first)},
                           {"qtype", qtype_id(key.second)},
                           {"pair_steps", buckets_pair},
                           {"proof_steps", buckets_proof}});
    }

    return {{"pass_rates", groups},
            {"correction_proportions", report.correction_proportions},
            {"proof_lengths", lengths},
            {"diversity_rouge_l", report.diversity},
            {"tactic_frequencies", report.frequencies.tactics},
            {"lemma_frequencies", report.frequencies.lemmas}};
}

/// Aligned-column pass@1 table, rows (k, level), column groups per question
/// type with the 0/1/2 correction budgets and deltas.
inline std::string render_pass_rate_table(const PassRateTable& table) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    const std::string sep = "  ";
    out << std::setw(4) << "k" << sep << std::setw(10) << "level";
    for (QuestionType q : {QuestionType::theorem_proving, QuestionType::word_problem}) {
        out << sep << std::setw(34) << (qtype_display(q) + " #correct=0 / 1 (d) / 2 (d)");
    }
    out << '\n';
    for (int k : {1, 2}) {
        for (EducationalLevel level : all_levels) {
            bool any = false;
            for (QuestionType q : {QuestionType::theorem_proving, QuestionType::word_problem}) {
                if (table.groups.count({q, level, k})) any = true;
            }
            if (!any) continue;
            out << std::setw(4) << ("k=" + std::to_string(k)) << sep << std::setw(10)
                << level_id(level);
            for (QuestionType q : {QuestionType::theorem_proving, QuestionType::word_problem}) {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(1);
                const auto it = table.groups.find({q, level, k});
                if (it == table.groups.end()) {
                    cell << "-";
                } else {
                    const GroupRates& r = it->second;
                    cell << r.value[0] << " / " << r.value[1] << " (+" << r.delta[1] << ") / "
                         << r.value[2] << " (+" << r.delta[2] << ")";
                }
                out << sep << std::setw(34) << cell.str();
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace proofgen
