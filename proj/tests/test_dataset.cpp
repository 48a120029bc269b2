#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "agent_loop.hpp"
#include "dataset.hpp"
#include "prompts.hpp"
#include "test_util.hpp"

using namespace situ3d;
using test::answer_response;
using test::program_response;

namespace {

GlobalConfig train_config() {
    GlobalConfig cfg;
    cfg.loop.mode = LoopMode::train;
    return cfg;
}

QuestionRecord question(const std::string& id, const std::string& text,
                        const std::string& answer) {
    QuestionRecord q;
    q.question_id = id;
    q.scene_id = "scene_basic";
    q.question = text;
    if (!answer.empty()) q.answer = answer;
    return q;
}

EpisodeResult run_scripted(const Scene& scene, const std::vector<std::string>& script,
                           const std::string& gt) {
    ScriptedClient client(script);
    return run_episode(question("q", "How many tables?", gt), scene, client,
                       train_config());
}

const std::string kGoodProgram =
    "object_set = scene()\nprint(len(filter(object_set=object_set, category=\"table\")))";

}  // namespace

TEST_CASE("extract_sft: one-round success yields one sample with empty history") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(scene, {answer_response("a", "two")}, "two");
    REQUIRE(result.correct.has_value());
    REQUIRE(*result.correct);
    std::vector<SftSample> samples = extract_sft(result.transcript, true);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].history.empty());
    CHECK(samples[0].output == answer_response("a", "two"));
    CHECK(samples[0].instruction.find("Question: How many tables?") != std::string::npos);
}

TEST_CASE("extract_sft: three-round success enumerates error, fix, answer") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(
        scene,
        {program_response("oops", "print(zzz)"), program_response("fix", kGoodProgram),
         answer_response("two", "2")},
        "two");
    std::vector<SftSample> samples = extract_sft(result.transcript, true);
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].history.empty());
    CHECK(samples[1].history.size() == 1);
    CHECK(samples[2].history.size() == 2);
    // the second sample's instruction is the error feedback
    CHECK(samples[1].instruction ==
          "Observation: NameError-style: name 'zzz' is not defined (line 1)");
    CHECK(samples[2].instruction == "Observation: 2");
}

TEST_CASE("extract_sft: incorrect episodes contribute nothing") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(scene, {answer_response("a", "seven")}, "two");
    CHECK_FALSE(*result.correct);
    CHECK(extract_sft(result.transcript, *result.correct).empty());
}

TEST_CASE("sft reconstruction: samples rebuild the transcript byte-for-byte") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(
        scene,
        {program_response("oops", "print(zzz)"), "totally malformed",
         program_response("fix", kGoodProgram), answer_response("five", "five"),
         answer_response("two", "2")},
        "two");
    REQUIRE(*result.correct);
    std::vector<SftSample> samples = extract_sft(result.transcript, true);
    REQUIRE_FALSE(samples.empty());

    // rebuild: system, q1, r1, q2, r2, ... from the last sample plus its own q/r
    const SftSample& last = samples.back();
    std::vector<std::string> rebuilt;
    rebuilt.push_back(result.transcript.turns[0].content);  // system
    for (const auto& [prompt, response] : last.history) {
        rebuilt.push_back(prompt);
        rebuilt.push_back(response);
    }
    rebuilt.push_back(last.instruction);
    rebuilt.push_back(last.output);

    REQUIRE(rebuilt.size() == result.transcript.turns.size());
    for (size_t i = 0; i < rebuilt.size(); ++i) {
        CHECK(rebuilt[i] == result.transcript.turns[i].content);
    }
    // every sample's history is a strict prefix of the next sample's
    for (size_t k = 0; k + 1 < samples.size(); ++k) {
        REQUIRE(samples[k].history.size() < samples[k + 1].history.size());
        for (size_t i = 0; i < samples[k].history.size(); ++i) {
            CHECK(samples[k].history[i] == samples[k + 1].history[i]);
        }
    }
}

TEST_CASE("extract_dpo: error-then-success yields one exec_error pair") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(
        scene,
        {program_response("oops", "print(zzz)"), program_response("fix", kGoodProgram),
         answer_response("two", "2")},
        "two");
    std::vector<DpoSample> pairs = extract_dpo(result.transcript, true);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].rejected_kind == DpoSample::RejectedKind::exec_error);
    CHECK(pairs[0].rejected == program_response("oops", "print(zzz)"));
    CHECK(pairs[0].chosen == answer_response("two", "2"));
    CHECK(pairs[0].instruction.find("Question: How many tables?") != std::string::npos);
}

TEST_CASE("extract_dpo: wrong answer then success yields one wrong_answer pair") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(
        scene, {answer_response("guess", "five"), answer_response("sure", "two")}, "two");
    std::vector<DpoSample> pairs = extract_dpo(result.transcript, true);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].rejected_kind == DpoSample::RejectedKind::wrong_answer);
    CHECK(pairs[0].rejected == answer_response("guess", "five"));
}

TEST_CASE("extract_dpo: two failures share the chosen response") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(
        scene,
        {program_response("oops", "print(zzz)"), program_response("fix", kGoodProgram),
         answer_response("five", "five"), answer_response("two", "2")},
        "two");
    std::vector<DpoSample> pairs = extract_dpo(result.transcript, true);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].rejected_kind == DpoSample::RejectedKind::exec_error);
    CHECK(pairs[1].rejected_kind == DpoSample::RejectedKind::wrong_answer);
    CHECK(pairs[0].chosen == pairs[1].chosen);
    CHECK(pairs[0].instruction == pairs[1].instruction);
    for (const DpoSample& pair : pairs) CHECK(pair.chosen != pair.rejected);
}

TEST_CASE("extract_dpo: clean one-shot episodes have no pairs") {
    Scene scene = test::load_fixture_scene("scene_basic");
    EpisodeResult result = run_scripted(
        scene, {program_response("p", kGoodProgram), answer_response("a", "two")}, "two");
    CHECK(extract_dpo(result.transcript, true).empty());
    CHECK(extract_dpo(result.transcript, false).empty());
}

TEST_CASE("verify_sample accepts fresh samples and catches config drift") {
    Scene scene = test::load_fixture_scene("scene_basic");
    GlobalConfig cfg = train_config();
    EpisodeResult result = run_scripted(
        scene,
        {program_response("oops", "print(zzz)"), program_response("fix", kGoodProgram),
         answer_response("five", "five"), answer_response("two", "2")},
        "two");

    for (const SftSample& sample : extract_sft(result.transcript, true)) {
        CHECK(verify_sft_sample(sample, scene, cfg));
    }
    std::vector<DpoSample> pairs = extract_dpo(result.transcript, true);
    for (const DpoSample& pair : pairs) {
        CHECK(verify_dpo_sample(pair, scene, cfg, std::optional<std::string>("two")));
    }

    // exec_error rejection whose program now runs: flagged
    DpoSample drifted = pairs[0];
    drifted.rejected = program_response("fine", kGoodProgram);
    CHECK_FALSE(verify_dpo_sample(drifted, scene, cfg, std::nullopt));

    // wrong_answer rejection that actually matches the ground truth: flagged
    DpoSample lying = pairs[1];
    lying.rejected = answer_response("right", "two");
    CHECK_FALSE(
        verify_dpo_sample(lying, scene, cfg, std::optional<std::string>("two")));

    // sft sample whose recorded feedback no longer matches execution: flagged
    std::vector<SftSample> samples = extract_sft(result.transcript, true);
    SftSample tampered = samples[1];
    tampered.instruction = "Observation: 42";
    // the mismatch sits between history's last response and this instruction;
    // rebuild that pairing by checking the sample whose history contains it
    SftSample holder = samples[2];
    holder.history[1].first = "Observation: 42";
    CHECK_FALSE(verify_sft_sample(holder, scene, cfg));
}

TEST_CASE("sft_loss_reference is the mean negative log-probability") {
    CHECK(sft_loss_reference({-0.5}) == doctest::Approx(0.5));
    CHECK(sft_loss_reference({0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(sft_loss_reference({}), Error);

    std::mt19937 rng(101);
    std::uniform_real_distribution<double> logp(-5.0, 0.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> values;
        long double acc = 0.0;
        for (int i = 0; i < 10; ++i) {
            values.push_back(logp(rng));
            acc += values.back();
        }
        long double expected = -acc / 10.0;
        CHECK(std::abs(sft_loss_reference(values) - static_cast<double>(expected)) <=
              1e-12);
    }
}

TEST_CASE("dpo_loss_reference: ln2 at zero margin, near zero at large margin") {
    LossInputs inputs;
    inputs.chosen_logps_policy = {-1.0, -1.0};
    inputs.chosen_logps_ref = {-1.0, -1.0};
    inputs.rejected_logps_policy = {-2.0};
    inputs.rejected_logps_ref = {-2.0};
    inputs.beta = 0.1;
    CHECK(std::abs(dpo_loss_reference(inputs) - std::log(2.0)) <= 1e-9);

    CHECK(dpo_loss_margin(0.1, 100.0) == doctest::Approx(4.5398899216870535e-05));
    CHECK(dpo_loss_margin(1.0, 1e9) == 0.0);

    LossInputs mismatched = inputs;
    mismatched.chosen_logps_ref.pop_back();
    CHECK_THROWS_AS(dpo_loss_reference(mismatched), Error);
    LossInputs bad_beta = inputs;
    bad_beta.beta = 0.0;
    CHECK_THROWS_AS(dpo_loss_reference(bad_beta), Error);
}

TEST_CASE("dpo loss: parameter folding and monotonicity") {
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> margin(-50.0, 50.0), beta(0.01, 2.0);
    for (int i = 0; i < 200; ++i) {
        double b = beta(rng);
        double m = margin(rng);
        CHECK(std::abs(dpo_loss_margin(b, m) - dpo_loss_margin(1.0, b * m)) <= 1e-12);
    }

    std::uniform_real_distribution<double> logp(-3.0, 0.0);
    for (int i = 0; i < 100; ++i) {
        LossInputs inputs;
        for (int k = 0; k < 5; ++k) {
            inputs.chosen_logps_policy.push_back(logp(rng));
            inputs.chosen_logps_ref.push_back(logp(rng));
            inputs.rejected_logps_policy.push_back(logp(rng));
            inputs.rejected_logps_ref.push_back(logp(rng));
        }
        inputs.beta = beta(rng);
        double before = dpo_loss_reference(inputs);
        for (double& v : inputs.chosen_logps_policy) v += 0.25;
        double after = dpo_loss_reference(inputs);
        CHECK(after < before);
    }
}

TEST_CASE("dpo loss matches a high-precision independent evaluation") {
    std::mt19937 rng(107);
    std::uniform_real_distribution<double> logp(-4.0, 0.0), beta(0.05, 1.5);
    for (int i = 0; i < 100; ++i) {
        LossInputs inputs;
        int n = 3 + i % 5;
        for (int k = 0; k < n; ++k) {
            inputs.chosen_logps_policy.push_back(logp(rng));
            inputs.chosen_logps_ref.push_back(logp(rng));
        }
        for (int k = 0; k < 2 + i % 3; ++k) {
            inputs.rejected_logps_policy.push_back(logp(rng));
            inputs.rejected_logps_ref.push_back(logp(rng));
        }
        inputs.beta = beta(rng);

        long double chosen = 0.0, rejected = 0.0;
        for (double v : inputs.chosen_logps_policy) chosen += v;
        for (double v : inputs.chosen_logps_ref) chosen -= v;
        for (double v : inputs.rejected_logps_policy) rejected += v;
        for (double v : inputs.rejected_logps_ref) rejected -= v;
        long double x = static_cast<long double>(inputs.beta) * (chosen - rejected);
        long double sigma = 1.0L / (1.0L + std::exp(-x));
        long double expected = -std::log(sigma);
        CHECK(std::abs(dpo_loss_reference(inputs) - static_cast<double>(expected)) <=
              1e-9);
    }
}

TEST_CASE("round_distribution and accuracy") {
    auto row = [](const char* id, bool correct, int rounds) {
        ResultRow r;
        r.question_id = id;
        r.correct = correct;
        r.rounds_used = rounds;
        return r;
    };
    std::vector<ResultRow> rows{row("a", true, 1), row("b", true, 1), row("c", true, 2)};
    std::map<int, double> dist = round_distribution(rows);
    REQUIRE(dist.size() == 2);
    CHECK(dist[1] == doctest::Approx(2.0 / 3.0));
    CHECK(dist[2] == doctest::Approx(1.0 / 3.0));
    double total = 0.0;
    for (const auto& [rounds, fraction] : dist) total += fraction;
    CHECK(std::abs(total - 1.0) <= 1e-12);

    std::vector<ResultRow> single{row("a", true, 4)};
    CHECK(round_distribution(single)[4] == 1.0);

    std::vector<ResultRow> mixed{row("a", true, 1), row("b", false, 3)};
    CHECK(round_distribution(mixed).size() == 1);

    std::vector<ResultRow> acc{row("a", true, 1), row("b", true, 1), row("c", false, 1),
                               row("d", false, 1)};
    CHECK(accuracy(acc) == 0.5);
    CHECK(accuracy({row("a", true, 1)}) == 1.0);
    std::vector<ResultRow> none;
    for (int i = 0; i < 7; ++i) none.push_back(row("x", false, 1));
    CHECK(accuracy(none) == 0.0);

    ResultRow missing;
    missing.question_id = "m";
    CHECK_THROWS_AS(accuracy({missing}), Error);
    CHECK_THROWS_AS(round_distribution({}), Error);

    nlohmann::json report = metrics_report(acc);
    CHECK(report["accuracy"] == 0.5);
    CHECK(report["round_distribution"]["1"] == 1.0);
}

TEST_CASE("sample JSONL shapes are stable") {
    SftSample s;
    s.instruction = "q";
    s.history = {{"p1", "r1"}};
    s.output = "out";
    nlohmann::json sj = s.to_json();
    CHECK(sj.dump() == R"({"history":[["p1","r1"]],"instruction":"q","output":"out"})");
    SftSample back = SftSample::from_json(sj);
    CHECK(back.history == s.history);

    DpoSample d;
    d.instruction = "q";
    d.chosen = "good";
    d.rejected = "bad";
    d.rejected_kind = DpoSample::RejectedKind::wrong_answer;
    CHECK(d.to_json()["rejected_kind"] == "wrong_answer");
    CHECK(DpoSample::from_json(d.to_json()).rejected == "bad");
}
