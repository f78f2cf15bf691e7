#pragma once

// Cross-dataset contamination inspection: embed two text sets, find each
// generated item's nearest evaluation item by cosine similarity, and surface
// the globally best pairs for human review. Search is exhaustive by design:
// paper-scale sets fit comfortably and results stay exact and auditable.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "proofgen/common.hpp"

namespace proofgen {

struct EmbeddedText {
    std::string source_id;
    std::string text;
    std::vector<double> vector;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) = 0;
};

/// Scripted embeddings keyed by exact text. Unknown texts are an error so
/// fixture drift is caught instead of silently zero-padded.
class MockEmbeddingBackend : public EmbeddingBackend {
public:
    MockEmbeddingBackend() = default;
    explicit MockEmbeddingBackend(std::map<std::string, std::vector<double>> vectors)
        : vectors_(std::move(vectors)) {}

    static MockEmbeddingBackend from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("mock embedding file not found: " + path);
        nlohmann::json j;
        in >> j;
        std::map<std::string, std::vector<double>> vectors;
        for (const auto& [text, vec] : j.at("vectors").items()) {
            vectors[text] = vec.get<std::vector<double>>();
        }
        return MockEmbeddingBackend(std::move(vectors));
    }

    void set(const std::string& text, std::vector<double> v) { vectors_[text] = std::move(v); }

    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const std::string& t : texts) {
            const auto it = vectors_.find(t);
            if (it == vectors_.end()) {
                throw Error("mock embedding backend has no vector for: '" + t + "'");
            }
            out.push_back(it->second);
        }
        return out;
    }

private:
    std::map<std::string, std::vector<double>> vectors_;
};

/// Embeds texts in order, batching requests and retrying transient backend
/// failures. All vectors must share one dimension; a backend that changes
/// dimension mid-run is broken.
inline std::vector<EmbeddedText> embed(const std::vector<std::string>& ids,
                                       const std::vector<std::string>& texts,
                                       EmbeddingBackend& backend, std::size_t batch_size = 64,
                                       int max_retries = 3) {
    if (ids.size() != texts.size()) throw Error("embed: ids and texts differ in length");
    if (batch_size == 0) batch_size = 1;
    std::vector<EmbeddedText> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, texts.size() - start);
        const std::vector<std::string> chunk(texts.begin() + start, texts.begin() + start + n);
        std::vector<std::vector<double>> vectors;
        for (int attempt = 0;; ++attempt) {
            try {
                vectors = backend.embed_batch(chunk);
                break;
            } catch (const BackendError& e) {
                if (!e.retryable() || attempt >= max_retries) throw;
            }
        }
        if (vectors.size() != n) throw Error("embedding backend returned a short batch");
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back({ids[start + i], texts[start + i], std::move(vectors[i])});
        }
    }
    for (const EmbeddedText& e : out) {
        for (double v : e.vector) {
            if (!std::isfinite(v)) throw Error("non-finite embedding component for " + e.source_id);
        }
        if (e.vector.size() != out.front().vector.size()) {
            throw Error("embedding dimension mismatch: " + e.source_id + " has " +
                        std::to_string(e.vector.size()) + ", expected " +
                        std::to_string(out.front().vector.size()));
        }
    }
    return out;
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) {
        throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
    }
    if (u.empty()) throw Error("cosine: empty vectors");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

struct NearestPair {
    std::string a_id;
    std::string b_id;
    std::string a_text;
    std::string b_text;
    double similarity = 0.0;
};

/// For each item of setA, its maximum-similarity partner in setB; pairs are
/// returned globally sorted by similarity (descending), ties broken by
/// (a_id, b_id), truncated to top_k.
inline std::vector<NearestPair> nearest_pairs(const std::vector<EmbeddedText>& set_a,
                                              const std::vector<EmbeddedText>& set_b,
                                              std::size_t top_k, std::size_t threads = 0) {
    if (set_a.empty() || set_b.empty()) throw Error("nearest_pairs: empty input set");
    if (top_k == 0) throw Error("nearest_pairs: top_k must be >= 1");

    std::vector<NearestPair> best(set_a.size());
    const auto score_row = [&](std::size_t i) {
        const EmbeddedText& a = set_a[i];
        const EmbeddedText* chosen = nullptr;
        double best_sim = 0.0;
        for (const EmbeddedText& b : set_b) {
            const double sim = cosine(a.vector, b.vector);
            if (!chosen || sim > best_sim ||
                (sim == best_sim && b.source_id < chosen->source_id)) {
                chosen = &b;
                best_sim = sim;
            }
        }
        best[i] = {a.source_id, chosen->source_id, a.text, chosen->text, best_sim};
    };

    if (threads == 0) {
        threads = std::min<std::size_t>(set_a.size(),
                                        std::max(1u, std::thread::hardware_concurrency()));
    }
    if (threads <= 1 || set_a.size() < 32) {
        for (std::size_t i = 0; i < set_a.size(); ++i) score_row(i);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < threads; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= set_a.size()) return;
                    score_row(i);
                }
            });
        }
        for (std::thread& t : workers) t.join();
    }

    std::sort(best.begin(), best.end(), [](const NearestPair& x, const NearestPair& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        if (x.a_id != y.a_id) return x.a_id < y.a_id;
        return x.b_id < y.b_id;
    });
    if (best.size() > top_k) best.resize(top_k);
    return best;
}

// ---------------------------------------------------------------------------
// Evaluation-set ingestion: JSONL of {"id": ..., "text": ...} records.
// ---------------------------------------------------------------------------

struct TextRecord {
    std::string id;
    std::string text;
};

inline std::vector<TextRecord> read_text_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("text set not found: " + path);
    std::vector<TextRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_view(line).empty()) continue;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            records.push_back(
                {j.at("id").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
        }
    }
    return records;
}

inline nlohmann::json to_json(const std::vector<NearestPair>& pairs) {
    nlohmann::json out = nlohmann::json::array();
    for (const NearestPair& p : pairs) {
        out.push_back({{"a_id", p.a_id},
                       {"b_id", p.b_id},
                       {"similarity", p.similarity},
                       {"a_text", p.a_text},
                       {"b_text", p.b_text}});
    }
    return out;
}

}  // namespace proofgen
