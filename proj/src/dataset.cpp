#include "dataset.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "interp/interpreter.hpp"
#include "prompts.hpp"

namespace situ3d {

namespace {

const char* kErrorLabels[] = {"SyntaxError-style", "NameError-style",
                              "TypeError-style",   "ValueError-style",
                              "AttributeError-style", "LimitError-style",
                              "ApiError-style"};

// assistant turns paired with the user turn that followed them (if any)
struct Exchange {
    const Turn* assistant;
    const Turn* following_user;
};

std::vector<Exchange> exchanges_of(const Transcript& transcript) {
    std::vector<Exchange> out;
    for (size_t i = 0; i < transcript.turns.size(); ++i) {
        if (transcript.turns[i].role != Role::assistant) continue;
        const Turn* next = nullptr;
        if (i + 1 < transcript.turns.size() &&
            transcript.turns[i + 1].role == Role::user) {
            next = &transcript.turns[i + 1];
        }
        out.push_back(Exchange{&transcript.turns[i], next});
    }
    return out;
}

double softplus(double x) {
    // log(1 + e^x) without overflow
    if (x > 40.0) return x;
    if (x < -40.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double sum_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

}  // namespace

nlohmann::json SftSample::to_json() const {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [prompt, response] : history) {
        hist.push_back(nlohmann::json::array({prompt, response}));
    }
    return {{"instruction", instruction}, {"history", hist}, {"output", output}};
}

SftSample SftSample::from_json(const nlohmann::json& doc) {
    SftSample s;
    s.instruction = doc.at("instruction").get<std::string>();
    for (const nlohmann::json& pair : doc.at("history")) {
        s.history.emplace_back(pair.at(0).get<std::string>(),
                               pair.at(1).get<std::string>());
    }
    s.output = doc.at("output").get<std::string>();
    return s;
}

const char* rejected_kind_name(DpoSample::RejectedKind kind) {
    return kind == DpoSample::RejectedKind::exec_error ? "exec_error" : "wrong_answer";
}

nlohmann::json DpoSample::to_json() const {
    return {{"instruction", instruction},
            {"chosen", chosen},
            {"rejected", rejected},
            {"rejected_kind", rejected_kind_name(rejected_kind)}};
}

DpoSample DpoSample::from_json(const nlohmann::json& doc) {
    DpoSample s;
    s.instruction = doc.at("instruction").get<std::string>();
    s.chosen = doc.at("chosen").get<std::string>();
    s.rejected = doc.at("rejected").get<std::string>();
    std::string kind = doc.at("rejected_kind").get<std::string>();
    if (kind == "exec_error") {
        s.rejected_kind = DpoSample::RejectedKind::exec_error;
    } else if (kind == "wrong_answer") {
        s.rejected_kind = DpoSample::RejectedKind::wrong_answer;
    } else {
        throw LoadError("unknown rejected_kind '" + kind + "'");
    }
    return s;
}

bool is_error_feedback(const std::string& user_turn) {
    for (const char* label : kErrorLabels) {
        std::string prefix = std::string("Observation: ") + label + ": ";
        if (user_turn.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

std::vector<SftSample> extract_sft(const Transcript& transcript, bool correct) {
    std::vector<SftSample> out;
    if (!correct) return out;

    // transcript shape: system, u1, a1, u2, a2, ..., un, an
    std::vector<std::pair<std::string, std::string>> exchanges;
    std::string pending_prompt;
    bool have_prompt = false;
    for (const Turn& turn : transcript.turns) {
        if (turn.role == Role::system) continue;
        if (turn.role == Role::user) {
            pending_prompt = turn.content;
            have_prompt = true;
            continue;
        }
        if (!have_prompt) continue;  // malformed transcript; skip dangling turn
        SftSample sample;
        sample.instruction = pending_prompt;
        sample.history = exchanges;
        sample.output = turn.content;
        out.push_back(sample);
        exchanges.emplace_back(pending_prompt, turn.content);
        have_prompt = false;
    }
    return out;
}

std::vector<DpoSample> extract_dpo(const Transcript& transcript, bool correct) {
    std::vector<DpoSample> out;
    if (!correct) return out;

    std::vector<Exchange> exchanges = exchanges_of(transcript);
    if (exchanges.size() < 2) return out;

    std::string instruction;
    for (const Turn& turn : transcript.turns) {
        if (turn.role == Role::user) {
            instruction = turn.content;
            break;
        }
    }
    const std::string chosen = exchanges.back().assistant->content;

    for (size_t i = 0; i + 1 < exchanges.size(); ++i) {
        const Exchange& ex = exchanges[i];
        if (!ex.following_user) continue;
        const std::string& feedback = ex.following_user->content;

        auto parsed = parse_response(ex.assistant->content);
        if (std::holds_alternative<FormatError>(parsed)) continue;  // format retries
        const ParsedResponse& ok = std::get<ParsedResponse>(parsed);

        if (ok.action == ParsedResponse::Action::program) {
            if (!is_error_feedback(feedback)) continue;  // program ran fine
            out.push_back(DpoSample{instruction, chosen, ex.assistant->content,
                                    DpoSample::RejectedKind::exec_error});
        } else {
            if (feedback == prompts::answer_length_reminder()) continue;
            // a final answer followed by another user turn was judged wrong
            out.push_back(DpoSample{instruction, chosen, ex.assistant->content,
                                    DpoSample::RejectedKind::wrong_answer});
        }
    }
    return out;
}

bool verify_sft_sample(const SftSample& sample, const Scene& scene,
                       const GlobalConfig& config) {
    ToolApi api(scene, config.relations, config.api);

    std::vector<std::pair<std::string, std::string>> sequence = sample.history;
    sequence.emplace_back(sample.instruction, sample.output);

    for (size_t i = 0; i < sequence.size(); ++i) {
        const std::string& response = sequence[i].second;
        bool has_next = i + 1 < sequence.size();
        const std::string* next_prompt = has_next ? &sequence[i + 1].first : nullptr;

        auto parsed = parse_response(response);
        if (std::holds_alternative<FormatError>(parsed)) {
            // legal only when the loop answered with the format reminder
            if (!has_next || *next_prompt != prompts::format_reminder()) return false;
            continue;
        }
        const ParsedResponse& ok = std::get<ParsedResponse>(parsed);
        if (ok.action == ParsedResponse::Action::program) {
            if (!has_next) continue;  // last turn of the sample
            interp::ExecResult exec =
                interp::run_program(ok.action_input, api, config.limits);
            if (*next_prompt != interp::format_feedback(exec)) return false;
        } else {
            if (!has_next) continue;
            if (*next_prompt != config.retry_message_text() &&
                *next_prompt != prompts::answer_length_reminder()) {
                return false;
            }
        }
    }
    return true;
}

bool verify_dpo_sample(const DpoSample& sample, const Scene& scene,
                       const GlobalConfig& config,
                       const std::optional<std::string>& ground_truth) {
    if (sample.chosen == sample.rejected) return false;
    ToolApi api(scene, config.relations, config.api);

    auto chosen = parse_response(sample.chosen);
    if (std::holds_alternative<FormatError>(chosen)) return false;
    const ParsedResponse& chosen_ok = std::get<ParsedResponse>(chosen);
    if (chosen_ok.action == ParsedResponse::Action::program) {
        interp::ExecResult exec =
            interp::run_program(chosen_ok.action_input, api, config.limits);
        if (interp::is_error(exec)) return false;
    }

    auto rejected = parse_response(sample.rejected);
    if (sample.rejected_kind == DpoSample::RejectedKind::exec_error) {
        if (std::holds_alternative<FormatError>(rejected)) return true;
        const ParsedResponse& rejected_ok = std::get<ParsedResponse>(rejected);
        if (rejected_ok.action != ParsedResponse::Action::program) return false;
        interp::ExecResult exec =
            interp::run_program(rejected_ok.action_input, api, config.limits);
        return interp::is_error(exec);
    }

    // wrong_answer: must be a well-formed final answer that fails soft_match
    if (std::holds_alternative<FormatError>(rejected)) return false;
    const ParsedResponse& rejected_ok = std::get<ParsedResponse>(rejected);
    if (rejected_ok.action != ParsedResponse::Action::final_answer) return false;
    if (ground_truth && soft_match(rejected_ok.action_input, *ground_truth)) return false;
    return true;
}

double sft_loss_reference(const std::vector<double>& logps) {
    if (logps.empty()) throw Error("sft_loss_reference: empty log-probability sequence");
    return -sum_of(logps) / static_cast<double>(logps.size());
}

double dpo_loss_reference(const LossInputs& inputs) {
    if (inputs.beta <= 0.0) throw Error("dpo_loss_reference: beta must be > 0");
    if (inputs.chosen_logps_policy.size() != inputs.chosen_logps_ref.size()) {
        throw Error("dpo_loss_reference: chosen policy/ref lengths differ");
    }
    if (inputs.rejected_logps_policy.size() != inputs.rejected_logps_ref.size()) {
        throw Error("dpo_loss_reference: rejected policy/ref lengths differ");
    }
    if (inputs.chosen_logps_policy.empty() || inputs.rejected_logps_policy.empty()) {
        throw Error("dpo_loss_reference: empty log-probability sequence");
    }
    double chosen_ratio =
        sum_of(inputs.chosen_logps_policy) - sum_of(inputs.chosen_logps_ref);
    double rejected_ratio =
        sum_of(inputs.rejected_logps_policy) - sum_of(inputs.rejected_logps_ref);
    return dpo_loss_margin(inputs.beta, chosen_ratio - rejected_ratio);
}

double dpo_loss_margin(double beta, double margin) {
    if (beta <= 0.0) throw Error("dpo_loss_margin: beta must be > 0");
    return softplus(-beta * margin);
}

double accuracy(const std::vector<ResultRow>& results) {
    if (results.empty()) throw Error("accuracy: no results");
    int correct = 0;
    for (const ResultRow& row : results) {
        if (!row.correct) {
            throw Error("accuracy: result for question '" + row.question_id +
                        "' has no ground-truth verdict");
        }
        if (*row.correct) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(results.size());
}

std::map<int, double> round_distribution(const std::vector<ResultRow>& results) {
    if (results.empty()) throw Error("round_distribution: no results");
    std::map<int, int> counts;
    int total = 0;
    for (const ResultRow& row : results) {
        if (row.correct && *row.correct) {
            ++counts[row.rounds_used];
            ++total;
        }
    }
    std::map<int, double> out;
    if (total == 0) return out;
    for (const auto& [rounds, count] : counts) {
        out[rounds] = static_cast<double>(count) / static_cast<double>(total);
    }
    return out;
}

nlohmann::json metrics_report(const std::vector<ResultRow>& results) {
    nlohmann::json dist = nlohmann::json::object();
    for (const auto& [rounds, fraction] : round_distribution(results)) {
        dist[std::to_string(rounds)] = fraction;
    }
    return {{"accuracy", accuracy(results)}, {"round_distribution", dist}};
}

namespace {

std::vector<const Transcript*> correct_episodes_sorted(
    const std::vector<Transcript>& transcripts,
    const std::map<std::string, ResultRow>& results) {
    std::vector<const Transcript*> out;
    for (const Transcript& t : transcripts) {
        auto it = results.find(t.episode_id);
        if (it == results.end() || it->second.errored) continue;
        if (it->second.correct && *it->second.correct) out.push_back(&t);
    }
    std::sort(out.begin(), out.end(), [](const Transcript* a, const Transcript* b) {
        return a->episode_id < b->episode_id;
    });
    return out;
}

}  // namespace

std::vector<SftSample> build_sft(const std::vector<Transcript>& transcripts,
                                 const std::map<std::string, ResultRow>& results) {
    std::vector<SftSample> out;
    for (const Transcript* t : correct_episodes_sorted(transcripts, results)) {
        std::vector<SftSample> samples = extract_sft(*t, true);
        out.insert(out.end(), samples.begin(), samples.end());
    }
    return out;
}

std::vector<DpoSample> build_dpo(const std::vector<Transcript>& transcripts,
                                 const std::map<std::string, ResultRow>& results) {
    std::vector<DpoSample> out;
    for (const Transcript* t : correct_episodes_sorted(transcripts, results)) {
        std::vector<DpoSample> samples = extract_dpo(*t, true);
        out.insert(out.end(), samples.begin(), samples.end());
    }
    return out;
}

}  // namespace situ3d
