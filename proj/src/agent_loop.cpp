#include "agent_loop.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "errors.hpp"
#include "interp/interpreter.hpp"
#include "prompts.hpp"

namespace situ3d {

namespace {

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

const std::map<std::string, const char*>& digit_words() {
    static const std::map<std::string, const char*> words = {
        {"zero", "0"}, {"one", "1"}, {"two", "2"},   {"three", "3"}, {"four", "4"},
        {"five", "5"}, {"six", "6"}, {"seven", "7"}, {"eight", "8"}, {"nine", "9"},
        {"ten", "10"},
    };
    return words;
}

std::vector<std::string> tokens_of(const std::string& normalized) {
    std::vector<std::string> out;
    std::istringstream ss(normalized);
    std::string word;
    while (ss >> word) out.push_back(word);
    return out;
}

bool token_subsequence(const std::vector<std::string>& needle,
                       const std::vector<std::string>& haystack) {
    size_t i = 0;
    for (const std::string& token : haystack) {
        if (i < needle.size() && token == needle[i]) ++i;
    }
    return i == needle.size();
}

std::string first_words(const std::string& raw, int max_words) {
    std::istringstream ss(raw);
    std::string word, out;
    int count = 0;
    while (count < max_words && ss >> word) {
        if (count) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

// Strips surrounding triple-backtick fences and a leading "Python" tag line.
std::string clean_program_body(const std::string& input) {
    std::vector<std::string> lines;
    std::istringstream ss(input);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);

    auto is_blank = [](const std::string& l) { return trim(l).empty(); };
    size_t begin = 0;
    size_t end = lines.size();
    while (begin < end && is_blank(lines[begin])) ++begin;
    while (end > begin && is_blank(lines[end - 1])) --end;

    if (begin < end && trim(lines[begin]).rfind("```", 0) == 0) ++begin;
    if (end > begin && trim(lines[end - 1]) == "```") --end;
    while (begin < end && is_blank(lines[begin])) ++begin;
    if (begin < end) {
        std::string head = trim(lines[begin]);
        if (head == "Python" || head == "python") ++begin;
    }
    while (begin < end && is_blank(lines[begin])) ++begin;
    while (end > begin && is_blank(lines[end - 1])) --end;

    std::string out;
    for (size_t i = begin; i < end; ++i) {
        if (i > begin) out += '\n';
        out += lines[i];
    }
    return out;
}

}  // namespace

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "?";
}

std::optional<Role> role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    return std::nullopt;
}

std::string Transcript::to_jsonl() const {
    std::string out;
    for (const Turn& turn : turns) {
        nlohmann::json line{{"episode", episode_id},
                            {"round", turn.round},
                            {"role", role_name(turn.role)},
                            {"content", turn.content}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<Transcript> Transcript::parse_jsonl(const std::string& text) {
    std::vector<Transcript> out;
    std::map<std::string, size_t> index;
    std::istringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw LoadError("transcript line " + std::to_string(line_no) +
                            ": invalid JSON");
        }
        std::string episode = doc.at("episode").get<std::string>();
        std::optional<Role> role = role_from_name(doc.at("role").get<std::string>());
        if (!role) {
            throw LoadError("transcript line " + std::to_string(line_no) +
                            ": unknown role");
        }
        auto it = index.find(episode);
        if (it == index.end()) {
            index[episode] = out.size();
            out.push_back(Transcript{episode, {}});
            it = index.find(episode);
        }
        out[it->second].turns.push_back(
            Turn{*role, doc.at("content").get<std::string>(), doc.at("round").get<int>()});
    }
    return out;
}

std::variant<ParsedResponse, FormatError> parse_response(const std::string& text) {
    size_t input_pos = text.rfind("Action Input:");
    if (input_pos == std::string::npos) {
        return FormatError{"missing 'Action Input:' marker"};
    }
    size_t action_pos = text.rfind("Action:", input_pos);
    if (action_pos == std::string::npos) {
        return FormatError{"missing 'Action:' marker"};
    }
    size_t thought_pos = text.rfind("Thought:", action_pos);
    if (thought_pos == std::string::npos || thought_pos >= action_pos) {
        return FormatError{"missing 'Thought:' marker"};
    }

    ParsedResponse parsed;
    parsed.thought = trim(text.substr(thought_pos + 8, action_pos - thought_pos - 8));
    std::string action = trim(text.substr(action_pos + 7, input_pos - action_pos - 7));
    std::string input = text.substr(input_pos + 13);

    if (action == "Final Answer") {
        parsed.action = ParsedResponse::Action::final_answer;
        parsed.action_input = trim(input);
    } else if (action == "Program") {
        parsed.action = ParsedResponse::Action::program;
        parsed.action_input = clean_program_body(input);
    } else {
        return FormatError{"unknown action '" + action +
                           "'; must be one of [Final Answer, Program]"};
    }
    return parsed;
}

QuestionRecord QuestionRecord::from_json(const nlohmann::json& doc) {
    QuestionRecord q;
    q.question_id = doc.at("question_id").get<std::string>();
    q.scene_id = doc.at("scene_id").get<std::string>();
    if (doc.contains("situation")) q.situation = doc["situation"].get<std::string>();
    q.question = doc.at("question").get<std::string>();
    if (doc.contains("answer") && !doc["answer"].is_null()) {
        q.answer = doc["answer"].get<std::string>();
    }
    if (doc.contains("position") && !doc["position"].is_null()) {
        const nlohmann::json& pos = doc["position"];
        const nlohmann::json& xyz = pos.at("xyz");
        const nlohmann::json& quat = pos.at("quat");
        AgentPose pose;
        pose.position = {xyz.at(0).get<double>(), xyz.at(1).get<double>(),
                         xyz.at(2).get<double>()};
        pose.rotation = Quaternion{quat.at(0).get<double>(), quat.at(1).get<double>(),
                                   quat.at(2).get<double>(), quat.at(3).get<double>()}
                            .normalized()
                            .canonical();
        q.position = pose;
    }
    return q;
}

nlohmann::json QuestionRecord::to_json() const {
    nlohmann::json doc{{"question_id", question_id},
                       {"scene_id", scene_id},
                       {"situation", situation},
                       {"question", question}};
    if (answer) doc["answer"] = *answer;
    if (position) {
        doc["position"] = {
            {"xyz", {position->position.x, position->position.y, position->position.z}},
            {"quat",
             {position->rotation.x, position->rotation.y, position->rotation.z,
              position->rotation.w}}};
    }
    return doc;
}

const char* terminated_name(Terminated t) {
    switch (t) {
        case Terminated::answer: return "answer";
        case Terminated::round_cap: return "round_cap";
        case Terminated::infra_error: return "infra_error";
    }
    return "?";
}

nlohmann::json ResultRow::to_json() const {
    nlohmann::json doc{{"question_id", question_id},
                       {"scene_id", scene_id},
                       {"final_answer", final_answer},
                       {"rounds_used", rounds_used},
                       {"terminated_by", terminated_by}};
    if (correct) doc["correct"] = *correct;
    if (errored) {
        doc["errored"] = true;
        doc["error"] = error;
    }
    return doc;
}

ResultRow ResultRow::from_json(const nlohmann::json& doc) {
    ResultRow row;
    row.question_id = doc.at("question_id").get<std::string>();
    if (doc.contains("scene_id")) row.scene_id = doc["scene_id"].get<std::string>();
    if (doc.contains("final_answer")) {
        row.final_answer = doc["final_answer"].get<std::string>();
    }
    if (doc.contains("correct") && !doc["correct"].is_null()) {
        row.correct = doc["correct"].get<bool>();
    }
    if (doc.contains("rounds_used")) row.rounds_used = doc["rounds_used"].get<int>();
    if (doc.contains("terminated_by")) {
        row.terminated_by = doc["terminated_by"].get<std::string>();
    }
    if (doc.contains("errored")) row.errored = doc["errored"].get<bool>();
    if (doc.contains("error")) row.error = doc["error"].get<std::string>();
    return row;
}

std::pair<std::string, std::string> build_initial_prompt(const Scene& scene,
                                                         const std::string& situation,
                                                         const std::string& question) {
    return {prompts::system_prompt(), prompts::user_prompt(scene, situation, question)};
}

std::string normalize_answer(const std::string& text) {
    std::string spaced;
    spaced.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            spaced += static_cast<char>(std::tolower(c));
        } else {
            spaced += ' ';
        }
    }
    std::vector<std::string> tokens = tokens_of(spaced);

    size_t begin = 0;
    while (begin < tokens.size() &&
           (tokens[begin] == "a" || tokens[begin] == "an" || tokens[begin] == "the")) {
        ++begin;
    }
    std::string out;
    for (size_t i = begin; i < tokens.size(); ++i) {
        std::string token = tokens[i];
        auto it = digit_words().find(token);
        if (it != digit_words().end()) token = it->second;
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

bool soft_match(const std::string& answer, const std::string& ground_truth) {
    std::string a = normalize_answer(answer);
    std::string g = normalize_answer(ground_truth);
    if (a.empty() || g.empty()) return a == g;
    if (a == g) return true;
    std::vector<std::string> at = tokens_of(a);
    std::vector<std::string> gt = tokens_of(g);
    return token_subsequence(at, gt) || token_subsequence(gt, at);
}

EpisodeResult run_episode(const QuestionRecord& question, const Scene& base_scene,
                          LlmClient& client, const GlobalConfig& config,
                          const EpisodeHooks* hooks) {
    Scene scene = question.position ? base_scene.with_agent(*question.position)
                                    : base_scene;
    ToolApi api(scene, config.relations, config.api);

    EpisodeResult result;
    result.question_id = question.question_id;
    result.transcript.episode_id = question.question_id;

    auto [system_text, user_text] =
        build_initial_prompt(scene, question.situation, question.question);
    std::vector<ChatMessage> messages{{"system", system_text}, {"user", user_text}};
    result.transcript.turns.push_back(Turn{Role::system, system_text, 0});
    result.transcript.turns.push_back(Turn{Role::user, user_text, 0});

    const bool train = config.loop.mode == LoopMode::train;
    const int outer_cap = train ? config.loop.max_outer_rounds : 1;
    const std::string retry_message = config.retry_message_text();

    // The ground truth is read through this accessor only, so eval isolation
    // is checkable: the loop never calls it in eval mode.
    auto ground_truth = [&]() -> const std::optional<std::string>& {
        if (hooks && hooks->on_gt_read) hooks->on_gt_read();
        return question.answer;
    };

    int rounds_used = 0;
    bool length_reminder_sent = false;

    auto push_assistant = [&](const std::string& content) {
        ++rounds_used;
        result.transcript.turns.push_back(Turn{Role::assistant, content, rounds_used});
        messages.push_back({"assistant", content});
    };
    auto push_user = [&](const std::string& content) {
        result.transcript.turns.push_back(Turn{Role::user, content, rounds_used});
        messages.push_back({"user", content});
    };

    // Scoring reads the ground truth only after the loop has terminated, so it
    // cannot influence any decision; the instrumented accessor above covers
    // every in-loop read.
    auto finish = [&](Terminated why, const std::string& answer) -> EpisodeResult {
        result.final_answer = answer;
        result.terminated_by = why;
        result.rounds_used = rounds_used;
        if (why != Terminated::infra_error && question.answer) {
            result.correct = soft_match(answer, *question.answer);
        }
        return result;
    };

    try {
        for (int outer = 0; outer < outer_cap; ++outer) {
            // Each outer round budgets max_program_rounds program (or
            // malformed) turns plus one final-answer turn.
            int inner_used = 0;
            std::optional<std::string> final_answer;

            while (!final_answer) {
                std::string response = client.complete(messages);
                push_assistant(response);

                auto parsed = parse_response(response);
                if (std::holds_alternative<FormatError>(parsed)) {
                    if (inner_used >= config.loop.max_program_rounds) {
                        return finish(Terminated::round_cap, "");
                    }
                    ++inner_used;
                    push_user(prompts::format_reminder());
                    continue;
                }
                const ParsedResponse& ok = std::get<ParsedResponse>(parsed);
                if (ok.action == ParsedResponse::Action::program) {
                    if (inner_used >= config.loop.max_program_rounds) {
                        return finish(Terminated::round_cap, "");
                    }
                    ++inner_used;
                    interp::ExecResult exec =
                        interp::run_program(ok.action_input, api, config.limits);
                    push_user(interp::format_feedback(exec));
                    continue;
                }

                std::string answer = ok.action_input;
                int words = static_cast<int>(tokens_of(normalize_answer(answer)).size());
                if (words > 3) {
                    if (!length_reminder_sent &&
                        inner_used < config.loop.max_program_rounds) {
                        length_reminder_sent = true;
                        ++inner_used;
                        push_user(prompts::answer_length_reminder());
                        continue;
                    }
                    answer = first_words(answer, 3);
                }
                final_answer = answer;
            }

            if (!train) {
                return finish(Terminated::answer, *final_answer);
            }
            const std::optional<std::string>& gt = ground_truth();
            if (!gt || soft_match(*final_answer, *gt) || outer + 1 >= outer_cap) {
                return finish(Terminated::answer, *final_answer);
            }
            push_user(retry_message);
        }
    } catch (const Error&) {
        result.final_answer.clear();
        result.terminated_by = Terminated::infra_error;
        result.rounds_used = rounds_used;
        result.correct.reset();
        return result;
    }
    return finish(Terminated::round_cap, "");
}

}  // namespace situ3d
