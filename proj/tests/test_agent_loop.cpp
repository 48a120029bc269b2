#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
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

GlobalConfig eval_config() {
    GlobalConfig cfg;
    cfg.loop.mode = LoopMode::eval;
    return cfg;
}

QuestionRecord question(const std::string& id, const std::string& text,
                        const std::string& answer) {
    QuestionRecord q;
    q.question_id = id;
    q.scene_id = "scene_basic";
    q.situation = "I am standing in the middle of the room facing the door.";
    q.question = text;
    if (!answer.empty()) q.answer = answer;
    return q;
}

bool golden_matches(const std::string& name, const std::string& actual) {
    std::string path = test::fixture_path("golden/" + name);
    if (std::getenv("SITU3D_REGEN_GOLDEN")) {
        write_file(path, actual);
        return true;
    }
    return read_file(path) == actual;
}

// Legal user-turn vocabulary for the transcript grammar check.
bool legal_user_turn(const std::string& content, const GlobalConfig& cfg) {
    if (content.rfind("Observation: ", 0) == 0) return true;
    if (content == cfg.retry_message_text()) return true;
    if (content == prompts::format_reminder()) return true;
    if (content == prompts::answer_length_reminder()) return true;
    return false;
}

}  // namespace

TEST_CASE("parse_response splits the three markers") {
    auto parsed = parse_response("Thought: t\nAction: Final Answer\nAction Input: brown");
    auto* ok = std::get_if<ParsedResponse>(&parsed);
    REQUIRE(ok);
    CHECK(ok->thought == "t");
    CHECK(ok->action == ParsedResponse::Action::final_answer);
    CHECK(ok->action_input == "brown");
}

TEST_CASE("parse_response strips fences and the Python tag line") {
    std::string text =
        "Thought: plan\nAction: Program\nAction Input:\n\nPython\n```python\nx = 1\n"
        "print(x)\n```\n";
    auto parsed = parse_response(text);
    auto* ok = std::get_if<ParsedResponse>(&parsed);
    REQUIRE(ok);
    CHECK(ok->action == ParsedResponse::Action::program);
    CHECK(ok->action_input == "x = 1\nprint(x)");
}

TEST_CASE("parse_response uses the last marker set") {
    std::string text =
        "Thought: draft\nAction: Program\nAction Input: old\n"
        "Thought: final\nAction: Final Answer\nAction Input: blue";
    auto parsed = parse_response(text);
    auto* ok = std::get_if<ParsedResponse>(&parsed);
    REQUIRE(ok);
    CHECK(ok->thought == "final");
    CHECK(ok->action_input == "blue");
}

TEST_CASE("parse_response rejects unknown actions and missing markers") {
    CHECK(std::holds_alternative<FormatError>(
        parse_response("Thought: t\nAction: Plan\nAction Input: x")));
    CHECK(std::holds_alternative<FormatError>(parse_response("Action Input: x")));
    CHECK(std::holds_alternative<FormatError>(parse_response("free text")));
    CHECK(std::holds_alternative<FormatError>(
        parse_response("Thought: t\nAction: Program\nno input marker")));
}

TEST_CASE("soft_match normalization rules") {
    CHECK(soft_match("Three", "three"));
    CHECK(soft_match("the table", "table"));
    CHECK(soft_match("3", "three"));
    CHECK(soft_match("brown table", "brown"));
    CHECK(soft_match("A big red chair", "big red chair"));
    CHECK(soft_match("two.", "two"));
    CHECK_FALSE(soft_match("four", "three"));
    CHECK_FALSE(soft_match("", "three"));
    CHECK_FALSE(soft_match("red chair", "blue chair"));
    CHECK(normalize_answer("The Three  Books!") == "3 books");
}

TEST_CASE("initial prompt: category summary, situation, question") {
    Scene scene = test::load_fixture_scene("scene_prompt");
    auto [system_text, user_text] =
        build_initial_prompt(scene, "I am facing the door.", "Where is the table?");
    CHECK(user_text.find("categories: chair(2), door(1), table(1)") != std::string::npos);
    CHECK(user_text.find("Situation: I am facing the door.") != std::string::npos);
    CHECK(user_text.find("Question: Where is the table?") != std::string::npos);
    CHECK(system_text.find("Thought, Action, Observation") != std::string::npos);

    auto [sys2, user2] = build_initial_prompt(scene, "", "Where is the table?");
    CHECK(user2.find("Situation:") == std::string::npos);
}

TEST_CASE("prompt golden files") {
    Scene scene = test::load_fixture_scene("scene_prompt");
    auto [system_text, user_text] =
        build_initial_prompt(scene, "I am facing the door.", "Where is the table?");
    CHECK(golden_matches("system_prompt.txt", system_text));
    CHECK(golden_matches("user_prompt_basic.txt", user_text));
}

TEST_CASE("episode: program then correct answer") {
    Scene scene = test::load_fixture_scene("scene_basic");
    ScriptedClient client({
        program_response("count tables",
                         "object_set = scene()\n"
                         "print(len(filter(object_set=object_set, category=\"table\")))"),
        answer_response("two tables", "2"),
    });
    EpisodeResult result =
        run_episode(question("q", "How many tables?", "two"), scene, client, train_config());
    CHECK(result.rounds_used == 2);
    CHECK(result.terminated_by == Terminated::answer);
    REQUIRE(result.correct.has_value());
    CHECK(*result.correct);
    CHECK(result.final_answer == "2");
    // feedback turn carries the program observation
    REQUIRE(result.transcript.turns.size() == 6);
    CHECK(result.transcript.turns[3].content == "Observation: 2");
}

TEST_CASE("episode: error feedback flows back and the model recovers") {
    Scene scene = test::load_fixture_scene("scene_basic");
    ScriptedClient client({
        program_response("oops", "print(tables)"),
        program_response("fixed",
                         "object_set = scene()\n"
                         "print(len(filter(object_set=object_set, category=\"table\")))"),
        answer_response("two tables", "2"),
    });
    EpisodeResult result =
        run_episode(question("q", "How many tables?", "two"), scene, client, train_config());
    CHECK(result.rounds_used == 3);
    CHECK(*result.correct);
    REQUIRE(result.transcript.turns.size() == 8);
    CHECK(result.transcript.turns[3].content ==
          "Observation: NameError-style: name 'tables' is not defined (line 1)");
}

TEST_CASE("episode: train-mode retry on wrong answer; eval answers once") {
    Scene scene = test::load_fixture_scene("scene_basic");
    std::vector<std::string> script{
        answer_response("guess", "five"),
        answer_response("reconsidered", "two"),
    };

    ScriptedClient train_client(script);
    EpisodeResult train_result = run_episode(question("q", "How many tables?", "two"),
                                             scene, train_client, train_config());
    CHECK(train_result.rounds_used == 2);
    CHECK(*train_result.correct);
    CHECK(train_result.final_answer == "two");

    ScriptedClient eval_client(script);
    EpisodeResult eval_result = run_episode(question("q", "How many tables?", "two"),
                                            scene, eval_client, eval_config());
    CHECK(eval_result.rounds_used == 1);
    REQUIRE(eval_result.correct.has_value());
    CHECK_FALSE(*eval_result.correct);
    CHECK(eval_result.final_answer == "five");
    CHECK(eval_client.remaining() == 1);  // no retry happened
}

TEST_CASE("episode: inner round cap terminates without an answer") {
    Scene scene = test::load_fixture_scene("scene_basic");
    std::vector<std::string> endless;
    for (int i = 0; i < 10; ++i) {
        endless.push_back(program_response("again", "print(1)"));
    }
    GlobalConfig cfg = train_config();
    cfg.loop.max_program_rounds = 2;
    ScriptedClient client(endless);
    EpisodeResult result =
        run_episode(question("q", "How many tables?", "two"), scene, client, cfg);
    CHECK(result.terminated_by == Terminated::round_cap);
    CHECK(result.final_answer.empty());
    CHECK(result.rounds_used == 3);  // two budgeted programs + the capped attempt
    REQUIRE(result.correct.has_value());
    CHECK_FALSE(*result.correct);
}

TEST_CASE("episode: malformed responses consume rounds and get the reminder") {
    Scene scene = test::load_fixture_scene("scene_basic");
    ScriptedClient client({
        "I will just chat instead of following the format.",
        answer_response("ok", "two"),
    });
    EpisodeResult result =
        run_episode(question("q", "How many tables?", "two"), scene, client, train_config());
    CHECK(result.rounds_used == 2);
    CHECK(*result.correct);
    CHECK(result.transcript.turns[3].content == prompts::format_reminder());
}

TEST_CASE("episode: over-long answers get one reminder then truncation") {
    Scene scene = test::load_fixture_scene("scene_basic");
    ScriptedClient client({
        answer_response("verbose", "there are exactly two wooden tables"),
        answer_response("still verbose", "it is surely two wooden tables"),
    });
    EpisodeResult result =
        run_episode(question("q", "How many tables?", "two"), scene, client, eval_config());
    CHECK(result.rounds_used == 2);
    CHECK(result.transcript.turns[3].content == prompts::answer_length_reminder());
    CHECK(result.final_answer == "it is surely");  // first 3 words of the retry
    // ≤ 3 words after normalization
    std::istringstream ss(normalize_answer(result.final_answer));
    int words = 0;
    std::string w;
    while (ss >> w) ++words;
    CHECK(words <= 3);
}

TEST_CASE("episode: infra error surfaces as terminated_by") {
    Scene scene = test::load_fixture_scene("scene_basic");
    ScriptedClient client({program_response("p", "print(1)")});  // exhausted on round 2
    EpisodeResult result =
        run_episode(question("q", "How many tables?", "two"), scene, client, train_config());
    CHECK(result.terminated_by == Terminated::infra_error);
    CHECK(result.final_answer.empty());
    CHECK_FALSE(result.correct.has_value());
}

TEST_CASE("eval mode performs zero in-loop ground-truth reads") {
    Scene scene = test::load_fixture_scene("scene_basic");
    int gt_reads = 0;
    EpisodeHooks hooks;
    hooks.on_gt_read = [&]() { ++gt_reads; };

    ScriptedClient eval_client({answer_response("a", "two")});
    GlobalConfig eval_cfg = eval_config();
    eval_cfg.loop.max_outer_rounds = 5;  // eval still runs a single outer loop
    run_episode(question("q", "How many tables?", "two"), scene, eval_client, eval_cfg,
                &hooks);
    CHECK(gt_reads == 0);

    ScriptedClient train_client({answer_response("a", "two")});
    run_episode(question("q", "How many tables?", "two"), scene, train_client,
                train_config(), &hooks);
    CHECK(gt_reads == 1);
}

TEST_CASE("question pose overrides the scene agent") {
    Scene scene = test::load_fixture_scene("scene_basic");
    QuestionRecord q = question("q", "ignored", "");
    // turn the agent around: the left table lands on the agent's right
    q.position = AgentPose{{0, 0, 0}, Quaternion::from_yaw(M_PI)};
    ScriptedClient client({
        program_response("look",
                         "tables = filter(object_set=scene(), category=\"table\")\n"
                         "print(len(relate_agent(object_set=tables, relation=\"right\")))"),
        answer_response("done", "1"),
    });
    EpisodeResult result = run_episode(q, scene, client, eval_config());
    CHECK(result.transcript.turns[3].content == "Observation: 1");
}

TEST_CASE("transcript grammar and call budget hold on scripted fuzz runs") {
    Scene scene = test::load_fixture_scene("scene_basic");
    std::mt19937 rng(97);
    std::uniform_int_distribution<int> length(1, 12);
    std::uniform_int_distribution<int> kind(0, 4);
    GlobalConfig cfg = train_config();
    cfg.loop.max_program_rounds = 3;
    cfg.loop.max_outer_rounds = 2;

    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> script;
        int n = length(rng);
        for (int i = 0; i < n; ++i) {
            switch (kind(rng)) {
                case 0: script.push_back(program_response("p", "print(1)")); break;
                case 1: script.push_back(program_response("bad", "print(zzz)")); break;
                case 2: script.push_back("malformed blob"); break;
                case 3: script.push_back(answer_response("a", "two")); break;
                case 4:
                    script.push_back(answer_response("a", "definitely not it at all"));
                    break;
            }
        }
        ScriptedClient client(script);
        EpisodeResult result =
            run_episode(question("q", "How many tables?", "two"), scene, client, cfg);

        int assistant_turns = 0;
        bool first_user_seen = false;
        for (const Turn& turn : result.transcript.turns) {
            if (turn.role == Role::assistant) ++assistant_turns;
            if (turn.role == Role::user) {
                if (!first_user_seen) {
                    first_user_seen = true;
                    continue;
                }
                CHECK(legal_user_turn(turn.content, cfg));
            }
        }
        CHECK(assistant_turns == result.rounds_used);
        int max_calls =
            cfg.loop.max_program_rounds * cfg.loop.max_outer_rounds + cfg.loop.max_outer_rounds;
        CHECK(static_cast<int>(client.prompts_seen().size()) <= max_calls);
    }
}

TEST_CASE("replaying a transcript's assistant turns reproduces the episode") {
    Scene scene = test::load_fixture_scene("scene_basic");
    std::vector<std::string> script{
        program_response("oops", "print(zzz)"),
        program_response("fixed",
                         "object_set = scene()\n"
                         "print(len(filter(object_set=object_set, category=\"table\")))"),
        answer_response("two", "2"),
    };
    ScriptedClient first(script);
    QuestionRecord q = question("q", "How many tables?", "two");
    EpisodeResult original = run_episode(q, scene, first, train_config());

    std::vector<std::string> replay;
    for (const Turn& turn : original.transcript.turns) {
        if (turn.role == Role::assistant) replay.push_back(turn.content);
    }
    ScriptedClient second(replay);
    EpisodeResult replayed = run_episode(q, scene, second, train_config());

    CHECK(replayed.rounds_used == original.rounds_used);
    CHECK(replayed.final_answer == original.final_answer);
    CHECK(replayed.terminated_by == original.terminated_by);
    CHECK(replayed.transcript.to_jsonl() == original.transcript.to_jsonl());
}

TEST_CASE("transcript jsonl round-trips") {
    Transcript t;
    t.episode_id = "e1";
    t.turns = {{Role::system, "sys", 0}, {Role::user, "u", 0}, {Role::assistant, "a", 1}};
    std::string jsonl = t.to_jsonl();
    std::vector<Transcript> parsed = Transcript::parse_jsonl(jsonl);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].episode_id == "e1");
    REQUIRE(parsed[0].turns.size() == 3);
    CHECK(parsed[0].turns[2].role == Role::assistant);
    CHECK(parsed[0].turns[2].round == 1);
}

TEST_CASE("loop config validation and eval single-loop rule") {
    LoopConfig bad;
    bad.max_program_rounds = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    nlohmann::json block{{"mode", "train"}, {"max_outer_rounds", 4}};
    LoopConfig cfg = LoopConfig::from_json(block);
    CHECK(cfg.mode == LoopMode::train);
    CHECK(cfg.max_outer_rounds == 4);
    CHECK_THROWS_AS(LoopConfig::from_json(nlohmann::json{{"mode", "zen"}}), ConfigError);
}
