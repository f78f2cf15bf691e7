#pragma once

// HTTP clients for chat-completions-style text generation and embeddings.
// Kept out of backend.hpp so that offline builds of the pipeline do not pay
// for the httplib include. Credentials come from the environment, never from
// config files or flags.

#include <chrono>
#include <cstdlib>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "proofgen/backend.hpp"
#include "proofgen/contamination.hpp"

namespace proofgen {

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com";
    std::string completions_path = "/v1/chat/completions";
    std::string embeddings_path = "/v1/embeddings";
    std::string model = "gpt-4";
    std::string embedding_model = "text-embedding-ada-002";
    std::string api_key_env = "PROOFGEN_API_KEY";
    std::chrono::seconds request_timeout{120};
};

namespace detail {

inline std::string require_api_key(const std::string& env_name) {
    const char* key = std::getenv(env_name.c_str());
    if (!key || !*key) {
        throw ConfigError("backend API key missing: set the " + env_name +
                          " environment variable");
    }
    return key;
}

inline httplib::Client make_client(const HttpBackendConfig& config) {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.request_timeout.count(), 0);
    client.set_read_timeout(config.request_timeout.count(), 0);
    client.set_write_timeout(config.request_timeout.count(), 0);
    return client;
}

inline void throw_http_error(const httplib::Result& res) {
    if (!res) {
        throw BackendError("transport",
                           "transport failure: " + httplib::to_string(res.error()), true);
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
        throw BackendError("auth", "authentication rejected (HTTP " + std::to_string(status) + ")",
                           false);
    }
    if (status == 429) {
        throw BackendError("rate_limit", "rate limited (HTTP 429)", true);
    }
    if (status >= 500) {
        throw BackendError("transport", "server error (HTTP " + std::to_string(status) + ")",
                           true);
    }
    throw BackendError("transport",
                       "unexpected HTTP status " + std::to_string(status) + ": " + res->body,
                       false);
}

}  // namespace detail

class HttpTextBackend : public TextBackend {
public:
    explicit HttpTextBackend(HttpBackendConfig config)
        : config_(std::move(config)), api_key_(detail::require_api_key(config_.api_key_env)) {}

protected:
    Completion complete_once(const std::string& prompt, const GenerationParams& params) override {
        const nlohmann::json body = {
            {"model", config_.model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", params.temperature},
            {"max_tokens", params.max_tokens},
        };
        httplib::Client client = detail::make_client(config_);
        const auto started = std::chrono::steady_clock::now();
        httplib::Result res = client.Post(config_.completions_path,
                                          {{"Authorization", "Bearer " + api_key_}}, body.dump(),
                                          "application/json");
        const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        if (!res || res->status != 200) detail::throw_http_error(res);
        try {
            const nlohmann::json j = nlohmann::json::parse(res->body);
            Completion c;
            c.raw_text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            c.backend_id = config_.model;
            c.latency = latency;
            return c;
        } catch (const nlohmann::json::exception& e) {
            throw BackendError("transport", std::string("malformed completion response: ") +
                                                e.what(),
                               false);
        }
    }

private:
    HttpBackendConfig config_;
    std::string api_key_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(HttpBackendConfig config)
        : config_(std::move(config)), api_key_(detail::require_api_key(config_.api_key_env)) {}

    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override {
        const nlohmann::json body = {{"model", config_.embedding_model}, {"input", texts}};
        httplib::Client client = detail::make_client(config_);
        httplib::Result res = client.Post(config_.embeddings_path,
                                          {{"Authorization", "Bearer " + api_key_}}, body.dump(),
                                          "application/json");
        if (!res || res->status != 200) detail::throw_http_error(res);
        try {
            const nlohmann::json j = nlohmann::json::parse(res->body);
            std::vector<std::vector<double>> out(texts.size());
            for (const auto& item : j.at("data")) {
                const std::size_t index = item.at("index").get<std::size_t>();
                if (index >= out.size()) throw Error("embedding index out of range");
                out[index] = item.at("embedding").get<std::vector<double>>();
            }
            return out;
        } catch (const nlohmann::json::exception& e) {
            throw BackendError("transport",
                               std::string("malformed embedding response: ") + e.what(), false);
        }
    }

private:
    HttpBackendConfig config_;
    std::string api_key_;
};

}  // namespace proofgen
