#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "proofgen/backend.hpp"
#include "proofgen/common.hpp"
#include "proofgen/http_backends.hpp"

using namespace proofgen;

TEST_CASE("mock backend replays its script") {
    MockTextBackend mock;
    mock.push_text("first");
    mock.push_text("second");
    GenerationParams params;
    CHECK(mock.complete("p", params).raw_text == "first");
    CHECK(mock.complete("p", params).raw_text == "second");
    CHECK_THROWS_AS(mock.complete("p", params), BackendError);
}

TEST_CASE("mock backend is deterministic per call sequence") {
    const auto run = [] {
        MockTextBackend mock;
        mock.push_text("a");
        mock.push_text("b");
        GenerationParams params;
        return mock.complete("x", params).raw_text + mock.complete("y", params).raw_text;
    };
    CHECK(run() == run());
}

TEST_CASE("retries recover from transient failures") {
    MockTextBackend mock;
    mock.push_error("timeout");
    mock.push_error("timeout");
    mock.push_text("eventually");
    RetryPolicy retry;
    retry.max_retries = 3;
    retry.backoff = std::chrono::milliseconds(0);
    mock.set_retry_policy(retry);
    GenerationParams params;
    CHECK(mock.complete("p", params).raw_text == "eventually");
    CHECK(mock.calls() == 3);
}

TEST_CASE("exhausted retries surface the attempt count") {
    MockTextBackend mock;
    for (int i = 0; i < 4; ++i) mock.push_error("timeout");
    RetryPolicy retry;
    retry.max_retries = 2;
    retry.backoff = std::chrono::milliseconds(0);
    mock.set_retry_policy(retry);
    GenerationParams params;
    CHECK_THROWS_WITH(mock.complete("p", params),
                      Catch::Matchers::ContainsSubstring("3 attempts"));
}

TEST_CASE("auth failures do not retry") {
    MockTextBackend mock;
    mock.push_error("auth");
    mock.push_text("never reached");
    GenerationParams params;
    CHECK_THROWS_AS(mock.complete("p", params), BackendError);
    CHECK(mock.calls() == 1);
}

TEST_CASE("per-task scripts make parallel batches order-independent") {
    const nlohmann::json script = {
        {"tasks",
         {{"t1", {{{"text", "for t1"}}}},
          {"t2", {{{"text", "for t2 first"}}, {{"text", "for t2 second"}}}}}}};
    MockTextBackend mock{script};
    GenerationParams p1, p2;
    p1.task_key = "t1";
    p2.task_key = "t2";
    CHECK(mock.complete("x", p2).raw_text == "for t2 first");
    CHECK(mock.complete("x", p1).raw_text == "for t1");
    CHECK(mock.complete("x", p2).raw_text == "for t2 second");
}

TEST_CASE("parse_sections handles the full triple") {
    const std::string raw =
        "Some chatter before the sections.\n"
        "# Problem: Prove that 1 + 1 = 2.\n"
        "\n"
        "# Informal proof: Count to two.\n"
        "It works.\n"
        "\n"
        "# Formal proof in Lean 3:\n"
        "```lean\n"
        "theorem one_plus_one : 1 + 1 = 2 := rfl\n"
        "```\n";
    const ParsedTriple triple = parse_sections(raw);
    CHECK(triple.problem == "Prove that 1 + 1 = 2.");
    REQUIRE(triple.informal_proof.has_value());
    CHECK(*triple.informal_proof == "Count to two.\nIt works.");
    REQUIRE(triple.formal_source.has_value());
    CHECK(*triple.formal_source == "theorem one_plus_one : 1 + 1 = 2 := rfl");
}

TEST_CASE("parse_sections tolerates T1-style empty sections") {
    const std::string raw =
        "# Problem: State something interesting.\n"
        "\n"
        "# Informal proof: \n"
        "\n"
        "# Formal proof in Lean 3: \n";
    const ParsedTriple triple = parse_sections(raw);
    CHECK(triple.problem == "State something interesting.");
    REQUIRE(triple.informal_proof.has_value());
    CHECK(triple.informal_proof->empty());
    REQUIRE(triple.formal_source.has_value());
    CHECK(triple.formal_source->empty());
}

TEST_CASE("parse_sections failure modes") {
    CHECK_THROWS_AS(parse_sections("no markers at all"), ParseError);
    CHECK_THROWS_AS(parse_sections("# Problem:\n\n# Informal proof: x\n"), ParseError);
}

TEST_CASE("parse_sections strips line numbers and salvages unclosed fences") {
    const std::string raw =
        "# Problem: P\n"
        "# Informal proof: Q\n"
        "# Formal proof in Lean 3:\n"
        "```lean\n"
        "line 1 def a : nat := 1\n"
        "line 2 #eval a\n";  // fence never closed
    const ParsedTriple triple = parse_sections(raw);
    REQUIRE(triple.formal_source.has_value());
    CHECK(*triple.formal_source == "def a : nat := 1\n#eval a");
}

TEST_CASE("parse_sections leading whitespace before markers") {
    const std::string raw = "   # Problem: indented\n  # Informal proof: also\n";
    const ParsedTriple triple = parse_sections(raw);
    CHECK(triple.problem == "indented");
    CHECK(triple.informal_proof.value() == "also");
}

TEST_CASE("render/parse round-trip recovers the triple texts") {
    Rng rng(5150);
    const auto word = [&] {
        static const char* words[] = {"lemma", "group", "prime", "field", "sum", "angle"};
        return std::string(words[rng.index(6)]);
    };
    const auto sentence = [&](int n) {
        std::string s;
        for (int i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += word();
        }
        return s;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const std::string problem = sentence(1 + static_cast<int>(rng.index(8)));
        const std::string informal = sentence(1 + static_cast<int>(rng.index(12)));
        std::string formal;
        const int lines = 1 + static_cast<int>(rng.index(5));
        for (int i = 0; i < lines; ++i) {
            if (i) formal += '\n';
            formal += "  " + sentence(1 + static_cast<int>(rng.index(4)));
        }
        const std::string rendered = "# Problem: " + problem +
                                     "\n\n# Informal proof: " + informal +
                                     "\n\n# Formal proof in Lean 3:\n```lean\n" + formal +
                                     "\n```\n";
        const ParsedTriple triple = parse_sections(rendered);
        REQUIRE(triple.problem == problem);
        REQUIRE(triple.informal_proof.value() == informal);
        REQUIRE(triple.formal_source.value() == formal);
    }
}

TEST_CASE("number/strip idempotence") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const int lines = static_cast<int>(rng.index(6));
        for (int i = 0; i < lines; ++i) {
            if (i) text += '\n';
            for (std::size_t j = rng.index(10); j > 0; --j) {
                text += static_cast<char>('a' + rng.index(26));
            }
        }
        const std::string once = lean::number_lines(lean::strip_line_numbers(text));
        const std::string twice =
            lean::number_lines(lean::strip_line_numbers(once));
        CHECK(once == twice);
    }
}

TEST_CASE("http backend against a local server") {
    httplib::Server server;
    int hits = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto body = nlohmann::json::parse(req.body);
        REQUIRE(req.get_header_value("Authorization") == "Bearer test-key-123");
        CHECK(body.at("model") == "test-model");
        if (hits == 1) {
            res.status = 500;  // transient; client must retry
            res.set_content("boom", "text/plain");
            return;
        }
        const std::string prompt = body.at("messages").at(0).at("content");
        const nlohmann::json reply = {
            {"choices",
             nlohmann::json::array(
                 {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("PROOFGEN_TEST_KEY", "test-key-123", 1);
    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.model = "test-model";
    config.api_key_env = "PROOFGEN_TEST_KEY";
    HttpTextBackend backend(config);
    RetryPolicy retry;
    retry.max_retries = 2;
    retry.backoff = std::chrono::milliseconds(1);
    backend.set_retry_policy(retry);

    GenerationParams params;
    const Completion c = backend.complete("hello", params);
    CHECK(c.raw_text == "echo: hello");
    CHECK(c.backend_id == "test-model");
    CHECK(hits == 2);

    server.stop();
    server_thread.join();
}

TEST_CASE("http backend surfaces auth failures without retry") {
    httplib::Server server;
    int hits = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("PROOFGEN_TEST_KEY", "k", 1);
    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.api_key_env = "PROOFGEN_TEST_KEY";
    HttpTextBackend backend(config);
    GenerationParams params;
    CHECK_THROWS_AS(backend.complete("p", params), BackendError);
    CHECK(hits == 1);

    server.stop();
    server_thread.join();
}

TEST_CASE("missing api key is a config error") {
    unsetenv("PROOFGEN_UNSET_KEY");
    HttpBackendConfig config;
    config.api_key_env = "PROOFGEN_UNSET_KEY";
    CHECK_THROWS_AS(HttpTextBackend{config}, ConfigError);
}

TEST_CASE("limiter caps concurrent holders") {
    Limiter limiter(3);
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i) {
        threads.emplace_back([&] {
            for (int j = 0; j < 20; ++j) {
                Limiter::Guard guard(limiter);
                const int now = ++in_flight;
                int expected = peak.load();
                while (now > expected && !peak.compare_exchange_weak(expected, now)) {
                }
                std::this_thread::sleep_for(std::chrono::microseconds(50));
                --in_flight;
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(peak.load() <= 3);
    CHECK(peak.load() >= 1);
}
