#pragma once

// Mathematical concept taxonomy: four educational levels, each split into
// domains that group concrete concepts. Seeds for problem generation are
// drawn uniformly from a level (one concept, or two from distinct domains).

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "proofgen/common.hpp"

namespace proofgen {

enum class EducationalLevel { elementary, middle, high, higher };

inline constexpr std::array<EducationalLevel, 4> all_levels = {
    EducationalLevel::elementary,
    EducationalLevel::middle,
    EducationalLevel::high,
    EducationalLevel::higher,
};

/// Stable identifier used in data files and manifests.
inline std::string level_id(EducationalLevel level) {
    switch (level) {
        case EducationalLevel::elementary: return "elementary";
        case EducationalLevel::middle: return "middle";
        case EducationalLevel::high: return "high";
        case EducationalLevel::higher: return "higher";
    }
    throw Error("level_id: bad level");
}

/// Phrase substituted for the [EDUCATIONAL LEVEL] placeholder.
inline std::string level_prompt_text(EducationalLevel level) {
    switch (level) {
        case EducationalLevel::elementary: return "elementary school";
        case EducationalLevel::middle: return "middle school";
        case EducationalLevel::high: return "high school";
        case EducationalLevel::higher: return "higher education";
    }
    throw Error("level_prompt_text: bad level");
}

inline EducationalLevel parse_level(std::string_view id) {
    for (EducationalLevel level : all_levels) {
        if (level_id(level) == id) return level;
    }
    throw Error("unknown educational level: '" + std::string(id) + "'");
}

struct Concept {
    std::string name;
    std::string domain;
    EducationalLevel level = EducationalLevel::elementary;

    friend bool operator==(const Concept&, const Concept&) = default;
    friend auto operator<=>(const Concept& a, const Concept& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        if (auto c = a.domain <=> b.domain; c != 0) return c;
        return a.level <=> b.level;
    }
};

struct ConceptSeed {
    EducationalLevel level = EducationalLevel::elementary;
    std::vector<Concept> concepts;  // 1 or 2, draw order

    friend bool operator==(const ConceptSeed&, const ConceptSeed&) = default;
};

struct LevelCounts {
    int domains = 0;
    int concepts = 0;
};

class ConceptPool {
public:
    void add(Concept entry) {
        if (entry.name.empty()) throw Error("concept name must be non-empty");
        auto& domains = by_level_[entry.level];
        auto it = std::find_if(domains.begin(), domains.end(),
                               [&](const auto& d) { return d.first == entry.domain; });
        if (it == domains.end()) {
            domains.emplace_back(entry.domain, std::vector<std::string>{});
            it = std::prev(domains.end());
        }
        for (const std::string& existing : it->second) {
            if (existing == entry.name) {
                throw Error("duplicate concept '" + entry.name + "' in domain '" +
                            entry.domain + "' (" + level_id(entry.level) + ")");
            }
        }
        it->second.push_back(entry.name);
        ++size_;
    }

    std::size_t size() const { return size_; }

    std::vector<std::string> domains(EducationalLevel level) const {
        std::vector<std::string> out;
        if (auto it = by_level_.find(level); it != by_level_.end()) {
            for (const auto& [domain, _] : it->second) out.push_back(domain);
        }
        return out;
    }

    std::size_t domain_count(EducationalLevel level) const {
        auto it = by_level_.find(level);
        return it == by_level_.end() ? 0 : it->second.size();
    }

    std::size_t concept_count(EducationalLevel level) const {
        std::size_t n = 0;
        if (auto it = by_level_.find(level); it != by_level_.end()) {
            for (const auto& [_, names] : it->second) n += names.size();
        }
        return n;
    }

    /// Concepts at a level in file order (domain order, then in-domain order).
    std::vector<Concept> concepts(EducationalLevel level) const {
        std::vector<Concept> out;
        if (auto it = by_level_.find(level); it != by_level_.end()) {
            for (const auto& [domain, names] : it->second) {
                for (const std::string& name : names) out.push_back({name, domain, level});
            }
        }
        return out;
    }

    std::vector<Concept> concepts(EducationalLevel level, std::string_view domain) const {
        std::vector<Concept> out;
        if (auto it = by_level_.find(level); it != by_level_.end()) {
            for (const auto& [d, names] : it->second) {
                if (d != domain) continue;
                for (const std::string& name : names) out.push_back({name, d, level});
            }
        }
        return out;
    }

    std::vector<Concept> all_concepts() const {
        std::vector<Concept> out;
        for (EducationalLevel level : all_levels) {
            auto per = concepts(level);
            out.insert(out.end(), per.begin(), per.end());
        }
        return out;
    }

    friend bool operator==(const ConceptPool& a, const ConceptPool& b) {
        return a.all_concepts() == b.all_concepts();
    }

private:
    // level -> ordered (domain, ordered concept names)
    std::map<EducationalLevel, std::vector<std::pair<std::string, std::vector<std::string>>>>
        by_level_;
    std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// Pool file format (tab-separated):
//   pool-version <TAB> 1
//   counts <TAB> <level> <TAB> <domains> <TAB> <concepts>   (one per level)
//   concept <TAB> <level> <TAB> <domain> <TAB> <name>
// '#'-prefixed lines are comments. The counts header pins the expected
// taxonomy shape so transcription drift fails loudly at load time.
// ---------------------------------------------------------------------------

inline ConceptPool load_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("concept pool file not found: " + path);

    ConceptPool pool;
    std::map<EducationalLevel, LevelCounts> declared;
    bool version_seen = false;
    bool any_entry = false;
    std::string line;
    int lineno = 0;

    const auto fail = [&](const std::string& msg) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        any_entry = true;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        try {
            if (fields[0] == "pool-version") {
                if (fields.size() != 2 || fields[1] != "1") fail("unsupported pool version");
                version_seen = true;
            } else if (fields[0] == "counts") {
                if (fields.size() != 4) fail("counts line needs level, domains, concepts");
                declared[parse_level(fields[1])] = {std::stoi(fields[2]), std::stoi(fields[3])};
            } else if (fields[0] == "concept") {
                if (fields.size() != 4) fail("concept line needs level, domain, name");
                if (trim_view(fields[3]).empty()) fail("empty concept name");
                pool.add({fields[3], fields[2], parse_level(fields[1])});
            } else {
                fail("unknown record type '" + fields[0] + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }
    if (!any_entry) throw ParseError(path + ": empty pool file");
    if (!version_seen) throw ParseError(path + ": missing pool-version header");
    if (declared.empty()) throw ParseError(path + ": missing counts header");

    for (const auto& [level, counts] : declared) {
        const auto domains = pool.domain_count(level);
        const auto concepts = pool.concept_count(level);
        if (static_cast<int>(domains) != counts.domains ||
            static_cast<int>(concepts) != counts.concepts) {
            throw Error(path + ": count mismatch for " + level_id(level) + ": declared " +
                        std::to_string(counts.domains) + " domains / " +
                        std::to_string(counts.concepts) + " concepts, found " +
                        std::to_string(domains) + " / " + std::to_string(concepts));
        }
    }
    for (EducationalLevel level : all_levels) {
        if (pool.concept_count(level) > 0 && !declared.count(level)) {
            throw Error(path + ": level " + level_id(level) + " has concepts but no counts header");
        }
    }
    return pool;
}

inline std::string serialize_pool(const ConceptPool& pool) {
    std::ostringstream out;
    out << "pool-version\t1\n";
    for (EducationalLevel level : all_levels) {
        if (pool.concept_count(level) == 0) continue;
        out << "counts\t" << level_id(level) << '\t' << pool.domain_count(level) << '\t'
            << pool.concept_count(level) << '\n';
    }
    for (EducationalLevel level : all_levels) {
        for (const Concept& c : pool.concepts(level)) {
            out << "concept\t" << level_id(level) << '\t' << c.domain << '\t' << c.name << '\n';
        }
    }
    return out.str();
}

inline void save_pool(const ConceptPool& pool, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write pool file: " + path);
    out << serialize_pool(pool);
}

/// Uniform seed draw. k=1: uniform over the level's concepts. k=2: two
/// distinct domains drawn uniformly, then one concept uniformly within each;
/// concept order is draw order.
inline ConceptSeed sample_seed(const ConceptPool& pool, EducationalLevel level, int k, Rng& rng) {
    if (k != 1 && k != 2) throw Error("seed size k must be 1 or 2, got " + std::to_string(k));
    const auto domains = pool.domains(level);
    if (domains.empty()) throw Error("no concepts at level " + level_id(level));

    ConceptSeed seed;
    seed.level = level;
    if (k == 1) {
        const auto concepts = pool.concepts(level);
        seed.concepts.push_back(concepts[rng.index(concepts.size())]);
        return seed;
    }
    if (domains.size() < 2) {
        throw Error("level " + level_id(level) + " has fewer than 2 domains; cannot sample k=2");
    }
    const std::size_t d1 = rng.index(domains.size());
    std::size_t d2 = rng.index(domains.size() - 1);
    if (d2 >= d1) ++d2;
    for (std::size_t d : {d1, d2}) {
        const auto in_domain = pool.concepts(level, domains[d]);
        seed.concepts.push_back(in_domain[rng.index(in_domain.size())]);
    }
    return seed;
}

}  // namespace proofgen
