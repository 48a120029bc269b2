#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "llm_client.hpp"
#include "scene.hpp"

namespace situ3d {

enum class Role { system, user, assistant };
const char* role_name(Role role);
std::optional<Role> role_from_name(const std::string& name);

struct Turn {
    Role role = Role::user;
    std::string content;
    int round = 0;  // assistant round the turn belongs to; 0 for the opening pair
};

struct Transcript {
    std::string episode_id;
    std::vector<Turn> turns;

    std::string to_jsonl() const;
    /// Groups one transcripts file into per-episode transcripts, preserving
    /// first-encounter order.
    static std::vector<Transcript> parse_jsonl(const std::string& text);
};

struct ParsedResponse {
    enum class Action { final_answer, program };
    std::string thought;
    Action action = Action::final_answer;
    std::string action_input;
};
struct FormatError {
    std::string reason;
};

/// Finds the last Thought/Action/Action Input markers and splits the
/// response. Code fences and a leading "Python" tag line are stripped from
/// program bodies.
std::variant<ParsedResponse, FormatError> parse_response(const std::string& text);

struct QuestionRecord {
    std::string question_id;
    std::string scene_id;
    std::string situation;
    std::string question;
    std::optional<std::string> answer;
    std::optional<AgentPose> position;

    static QuestionRecord from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

enum class Terminated { answer, round_cap, infra_error };
const char* terminated_name(Terminated t);

struct EpisodeResult {
    std::string question_id;
    std::string final_answer;
    std::optional<bool> correct;
    int rounds_used = 0;  // assistant turns
    Terminated terminated_by = Terminated::answer;
    Transcript transcript;
};

/// Flat result record written to results JSONL and consumed by metrics.
struct ResultRow {
    std::string question_id;
    std::string scene_id;
    std::string final_answer;
    std::optional<bool> correct;
    int rounds_used = 0;
    std::string terminated_by = "answer";
    bool errored = false;  // harness-level failure (e.g. missing scene)
    std::string error;

    nlohmann::json to_json() const;
    static ResultRow from_json(const nlohmann::json& doc);
};

/// Test instrumentation: called whenever the loop consults the ground truth.
struct EpisodeHooks {
    std::function<void()> on_gt_read;
};

std::pair<std::string, std::string> build_initial_prompt(const Scene& scene,
                                                         const std::string& situation,
                                                         const std::string& question);

/// Runs one two-layer episode. The inner loop executes programs and feeds
/// observations back until a final answer or the round cap; the outer loop
/// (train mode only) compares against ground truth and asks the model to
/// reconsider. The question's pose, when present, replaces the scene agent.
EpisodeResult run_episode(const QuestionRecord& question, const Scene& scene,
                          LlmClient& client, const GlobalConfig& config,
                          const EpisodeHooks* hooks = nullptr);

/// Lenient normalized comparison between a short answer and the ground truth.
bool soft_match(const std::string& answer, const std::string& ground_truth);
std::string normalize_answer(const std::string& text);

}  // namespace situ3d
