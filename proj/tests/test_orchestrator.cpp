#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "proofgen/orchestrator.hpp"

using namespace proofgen;

namespace {

std::string completion_with(const std::string& formal, const std::string& problem = "Prove it.",
                            const std::string& informal = "Because reasons.") {
    return "# Problem: " + problem + "\n\n# Informal proof: " + informal +
           "\n\n# Formal proof in Lean 3:\n```lean\n" + formal + "\n```\n";
}

const std::string kValidFormal = "def f (x : nat) : nat := x + 1\n#eval f 1";
const std::string kInvalidFormal = "begin\n  refl\nend\nend";  // stray end
const std::string kSorryFormal = "begin\n  sorry\nend";

GenerationTask make_task(const std::string& id, int max_corrections = 2,
                         GenerationMode mode = GenerationMode::all_at_once) {
    GenerationTask task;
    task.task_id = id;
    task.seed.level = EducationalLevel::elementary;
    task.seed.concepts = {{"Division", "4th grade", EducationalLevel::elementary}};
    task.qtype = QuestionType::word_problem;
    task.mode = mode;
    task.max_corrections = max_corrections;
    return task;
}

}  // namespace

TEST_CASE("valid at first attempt") {
    MockTextBackend backend;
    backend.push_text(completion_with(kValidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);

    const DataPoint point = orchestrator.run_task(make_task("t0"));
    CHECK(point.valid);
    CHECK(point.correction_rounds == 0);
    REQUIRE(point.attempts.size() == 1);
    CHECK(point.attempts[0].report.verdict == Verdict::valid);
    CHECK(point.formal_source == kValidFormal);
    CHECK(point.informal_statement == "Prove it.");
    CHECK(point.informal_proof == "Because reasons.");
    CHECK(point.status == "ok");
}

TEST_CASE("invalid then valid consumes one correction round") {
    MockTextBackend backend;
    backend.push_text(completion_with(kInvalidFormal));
    backend.push_text(completion_with(kValidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);

    const DataPoint point = orchestrator.run_task(make_task("t0"));
    CHECK(point.valid);
    CHECK(point.correction_rounds == 1);
    REQUIRE(point.attempts.size() == 2);
    CHECK(point.attempts[0].report.verdict == Verdict::invalid);
    CHECK(point.attempts[1].report.verdict == Verdict::valid);

    // The second call must be a correction prompt replaying attempt 1.
    const auto prompts = backend.prompts();
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].find("# Formal proof (1) in Lean 3:") != std::string::npos);
    CHECK(prompts[1].find("line 1 begin") != std::string::npos);
    CHECK(prompts[1].find("error") != std::string::npos);
}

TEST_CASE("budget exhaustion keeps the point invalid") {
    MockTextBackend backend;
    for (int i = 0; i < 3; ++i) backend.push_text(completion_with(kInvalidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);

    const DataPoint point = orchestrator.run_task(make_task("t0", 2));
    CHECK_FALSE(point.valid);
    CHECK(point.correction_rounds == 2);
    CHECK(point.attempts.size() == 3);
}

TEST_CASE("zero budget stops after the first attempt") {
    MockTextBackend backend;
    backend.push_text(completion_with(kInvalidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const DataPoint point = orchestrator.run_task(make_task("t0", 0));
    CHECK_FALSE(point.valid);
    CHECK(point.correction_rounds == 0);
    CHECK(point.attempts.size() == 1);
    CHECK(backend.calls() == 1);
}

TEST_CASE("sorry counts as invalid and is corrected") {
    MockTextBackend backend;
    backend.push_text(completion_with(kSorryFormal));
    backend.push_text(completion_with(kValidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const DataPoint point = orchestrator.run_task(make_task("t0"));
    CHECK(point.valid);
    REQUIRE(point.attempts.size() == 2);
    CHECK(point.attempts[0].report.contains_sorry);
}

TEST_CASE("unparseable completion consumes a round with a synthetic diagnostic") {
    MockTextBackend backend;
    backend.push_text("no markers whatsoever");
    backend.push_text(completion_with(kValidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);

    const DataPoint point = orchestrator.run_task(make_task("t0"));
    CHECK(point.valid);
    CHECK(point.correction_rounds == 1);
    REQUIRE(point.attempts.size() == 2);
    REQUIRE(point.attempts[0].report.diagnostics.size() == 1);
    CHECK(point.attempts[0].report.diagnostics[0].message.find("unparseable") !=
          std::string::npos);
}

TEST_CASE("correction responses may be bare fenced proofs") {
    MockTextBackend backend;
    backend.push_text(completion_with(kInvalidFormal));
    backend.push_text("Here is the corrected proof.\n```lean\n" + kValidFormal + "\n```\n");
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const DataPoint point = orchestrator.run_task(make_task("t0"));
    CHECK(point.valid);
    CHECK(point.formal_source == kValidFormal);
}

TEST_CASE("backend that keeps failing yields a crash-status point") {
    MockTextBackend backend;
    backend.push_error("auth");
    RetryPolicy retry;
    retry.max_retries = 1;
    retry.backoff = std::chrono::milliseconds(0);
    backend.set_retry_policy(retry);
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const DataPoint point = orchestrator.run_task(make_task("t0"));
    CHECK_FALSE(point.valid);
    CHECK(point.status == "backend_failed");
    CHECK(point.attempts.empty());
    CHECK(point.correction_rounds == 0);
}

TEST_CASE("step mode runs T1, T2, T3 and corrects only the formal proof") {
    nlohmann::json script = {{"tasks", nlohmann::json::object()}};
    script["tasks"]["step1"] = nlohmann::json::array(
        {{{"text", "# Problem: Step problem.\n\n# Informal proof: \n\n"
                   "# Formal proof in Lean 3: \n"}},
         {{"text", "# Problem: Step problem.\n\n# Informal proof: Step proof.\n\n"
                   "# Formal proof in Lean 3: \n"}},
         {{"text", completion_with(kInvalidFormal, "ignored", "ignored")}},
         {{"text", completion_with(kValidFormal, "ignored", "ignored")}}});
    MockTextBackend backend{script};
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);

    const DataPoint point =
        orchestrator.run_task(make_task("step1", 2, GenerationMode::step_by_step));
    CHECK(point.valid);
    CHECK(point.informal_statement == "Step problem.");
    CHECK(point.informal_proof == "Step proof.");
    CHECK(point.correction_rounds == 1);

    const auto prompts = backend.prompts();
    REQUIRE(prompts.size() == 4);
    CHECK(prompts[0].find("Please first write the question part") != std::string::npos);
    CHECK(prompts[1].find("# Problem: Step problem.") != std::string::npos);
    CHECK(prompts[2].find("You are a master in Lean.") != std::string::npos);
    CHECK(prompts[2].find("# Informal proof: Step proof.") != std::string::npos);
    // Correction keeps the T1/T2 sections as given.
    CHECK(prompts[3].find("# Problem: Step problem.") != std::string::npos);
    CHECK(prompts[3].find("# Informal proof: Step proof.") != std::string::npos);
    CHECK(prompts[3].find("# Formal proof (1) in Lean 3:") != std::string::npos);
}

TEST_CASE("step mode retries an unparseable T1 within the budget") {
    nlohmann::json script = {{"tasks", nlohmann::json::object()}};
    script["tasks"]["steppy"] = nlohmann::json::array(
        {{{"text", "garbage"}},
         {{"text", "# Problem: Fine now.\n\n# Informal proof: \n\n# Formal proof in Lean 3: \n"}},
         {{"text", "# Problem: Fine now.\n\n# Informal proof: Good.\n\n"
                   "# Formal proof in Lean 3: \n"}},
         {{"text", completion_with(kValidFormal)}}});
    MockTextBackend backend{script};
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const DataPoint point =
        orchestrator.run_task(make_task("steppy", 2, GenerationMode::step_by_step));
    CHECK(point.valid);
    CHECK(point.correction_rounds == 1);  // the garbage T1 consumed one round
    CHECK(point.attempts.size() == 2);
}

TEST_CASE("attempt sequence invariant") {
    MockTextBackend backend;
    backend.push_text(completion_with(kInvalidFormal));
    backend.push_text(completion_with(kSorryFormal));
    backend.push_text(completion_with(kValidFormal));
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const DataPoint point = orchestrator.run_task(make_task("t0"));
    REQUIRE(point.attempts.size() == 3);
    for (std::size_t i = 0; i + 1 < point.attempts.size(); ++i) {
        CHECK(point.attempts[i].report.verdict != Verdict::valid);
    }
    CHECK((point.attempts.back().report.verdict == Verdict::valid) == point.valid);
}

TEST_CASE("run_batch preserves input order and isolates failures") {
    nlohmann::json script = {{"tasks", nlohmann::json::object()}};
    script["tasks"]["a"] = nlohmann::json::array({{{"text", completion_with(kValidFormal)}}});
    script["tasks"]["b"] = nlohmann::json::array({{{"error", "auth"}}});
    script["tasks"]["c"] = nlohmann::json::array(
        {{{"text", completion_with(kInvalidFormal)}}, {{"text", completion_with(kValidFormal)}}});
    MockTextBackend backend{script};
    RetryPolicy retry;
    retry.max_retries = 0;
    backend.set_retry_policy(retry);
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);

    const auto points =
        orchestrator.run_batch({make_task("a"), make_task("b"), make_task("c")}, 3);
    REQUIRE(points.size() == 3);
    CHECK(points[0].task.task_id == "a");
    CHECK(points[1].task.task_id == "b");
    CHECK(points[2].task.task_id == "c");
    CHECK(points[0].valid);
    CHECK(points[1].status == "backend_failed");
    CHECK(points[2].valid);
}

TEST_CASE("run_batch is parallelism-independent with per-task scripts") {
    const auto run = [&](int parallelism) {
        nlohmann::json script = {{"tasks", nlohmann::json::object()}};
        std::vector<GenerationTask> tasks;
        for (int i = 0; i < 12; ++i) {
            const std::string id = "t" + std::to_string(i);
            tasks.push_back(make_task(id));
            nlohmann::json entries = nlohmann::json::array();
            if (i % 3 == 0) {
                entries.push_back({{"text", completion_with(kValidFormal)}});
            } else if (i % 3 == 1) {
                entries.push_back({{"text", completion_with(kInvalidFormal)}});
                entries.push_back({{"text", completion_with(kValidFormal)}});
            } else {
                for (int r = 0; r < 3; ++r) {
                    entries.push_back({{"text", completion_with(kInvalidFormal)}});
                }
            }
            script["tasks"][id] = entries;
        }
        MockTextBackend backend{script};
        LexicalProver prover;
        Orchestrator orchestrator(backend, prover);
        return orchestrator.run_batch(tasks, parallelism);
    };
    const auto serial = run(1);
    const auto parallel = run(8);
    CHECK(serial == parallel);
    int valid = 0;
    for (const DataPoint& p : serial) valid += p.valid ? 1 : 0;
    CHECK(valid == 8);  // 4 valid at round 0 + 4 valid at round 1
}

TEST_CASE("empty batch") {
    MockTextBackend backend;
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    CHECK(orchestrator.run_batch({}, 4).empty());
    CHECK_THROWS_AS(orchestrator.run_batch({}, 0), Error);
}

TEST_CASE("prover misconfiguration aborts the batch") {
    MockTextBackend backend;
    backend.push_text(completion_with(kValidFormal));
    ProverConfig config;
    config.lean_bin = "proofgen-no-such-prover";
    LeanProver prover(config);
    Orchestrator orchestrator(backend, prover);
    CHECK_THROWS_AS(orchestrator.run_batch({make_task("t0")}, 1), ConfigError);
}

TEST_CASE("scripted outcome counts are exact") {
    nlohmann::json script = {{"tasks", nlohmann::json::object()}};
    std::vector<GenerationTask> tasks;
    for (int i = 0; i < 100; ++i) {
        const std::string id = "t" + std::to_string(i);
        tasks.push_back(make_task(id, 0));
        script["tasks"][id] = nlohmann::json::array(
            {{{"text", completion_with(i < 30 ? kValidFormal : kInvalidFormal)}}});
    }
    MockTextBackend backend{script};
    LexicalProver prover;
    Orchestrator orchestrator(backend, prover);
    const auto points = orchestrator.run_batch(tasks, 8);
    int valid = 0;
    for (const DataPoint& p : points) valid += p.valid ? 1 : 0;
    CHECK(valid == 30);
}
