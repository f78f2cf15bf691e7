#pragma once

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace proofgen {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a required tool or path is missing from the configuration
/// (e.g. the prover binary). Fatal for a whole batch, unlike per-task errors.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Failure talking to a remote service (generation or embedding backend).
/// Retryable kinds: timeout, rate_limit, transport.
class BackendError : public Error {
public:
    BackendError(std::string kind, const std::string& what, bool retryable)
        : Error(what), kind_(std::move(kind)), retryable_(retryable) {}

    const std::string& kind() const { return kind_; }
    bool retryable() const { return retryable_; }

private:
    std::string kind_;
    bool retryable_;
};

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so reproducible pipelines roll their own bounded draws on top of
// mt19937_64 (which the standard pins bit-exactly).
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform draw in [0, n) via rejection sampling; n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw Error("Rng::bounded: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(bounded(n)); }

    double unit() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    /// k distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) throw Error("Rng::sample_indices: k > n");
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Small string utilities shared across modules.
// ---------------------------------------------------------------------------

inline std::string_view trim_view(std::string_view s) {
    const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0, e = s.size();
    while (b < e && issp(s[b])) ++b;
    while (e > b && issp(s[e - 1])) --e;
    return s.substr(b, e - b);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Case-folds and collapses runs of whitespace into single spaces.
/// Used as the dedup key for informal statements.
inline std::string normalize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

inline std::string replace_all(std::string text, std::string_view needle, std::string_view repl) {
    if (needle.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), repl);
        pos += repl.size();
    }
    return text;
}

/// Counting semaphore with a runtime-configured cap; caps in-flight backend
/// requests and concurrent prover processes.
class Limiter {
public:
    explicit Limiter(std::size_t cap) : cap_(cap == 0 ? 1 : cap) {}

    void acquire() {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return in_flight_ < cap_; });
        ++in_flight_;
    }

    void release() {
        {
            std::lock_guard lk(mu_);
            --in_flight_;
        }
        cv_.notify_one();
    }

    class Guard {
    public:
        explicit Guard(Limiter& l) : l_(l) { l_.acquire(); }
        ~Guard() { l_.release(); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        Limiter& l_;
    };

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t cap_;
    std::size_t in_flight_ = 0;
};

}  // namespace proofgen
