#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agent_loop.hpp"
#include "config.hpp"

namespace situ3d {

/// One supervised triplet: instruction, prior exchanges, target response.
struct SftSample {
    std::string instruction;
    std::vector<std::pair<std::string, std::string>> history;
    std::string output;

    nlohmann::json to_json() const;
    static SftSample from_json(const nlohmann::json& doc);
};

struct DpoSample {
    enum class RejectedKind { exec_error, wrong_answer };

    std::string instruction;
    std::string chosen;
    std::string rejected;
    RejectedKind rejected_kind = RejectedKind::exec_error;

    nlohmann::json to_json() const;
    static DpoSample from_json(const nlohmann::json& doc);
};

const char* rejected_kind_name(DpoSample::RejectedKind kind);

/// True for feedback lines produced from a RuntimeErrorReport.
bool is_error_feedback(const std::string& user_turn);

/// One sample per assistant turn of a correct episode; incorrect episodes
/// contribute nothing.
std::vector<SftSample> extract_sft(const Transcript& transcript, bool correct);

/// Preference pairs: the final (correct) turn against every failed turn.
/// Failed turns are programs whose execution errored (exec_error) and final
/// answers the outer loop rejected (wrong_answer).
std::vector<DpoSample> extract_dpo(const Transcript& transcript, bool correct);

/// Re-parses and re-executes a sample against the scene: every response must
/// parse, and each recorded feedback must match what execution produces now.
bool verify_sft_sample(const SftSample& sample, const Scene& scene,
                       const GlobalConfig& config);

/// chosen must parse (and execute cleanly when it is a program); an
/// exec_error rejection must still error; a wrong_answer rejection must still
/// fail soft_match against the ground truth when one is supplied.
bool verify_dpo_sample(const DpoSample& sample, const Scene& scene,
                       const GlobalConfig& config,
                       const std::optional<std::string>& ground_truth);

/// Mean negative log-likelihood of one output sequence.
double sft_loss_reference(const std::vector<double>& logps);

struct LossInputs {
    std::vector<double> chosen_logps_policy;
    std::vector<double> chosen_logps_ref;
    std::vector<double> rejected_logps_policy;
    std::vector<double> rejected_logps_ref;
    double beta = 0.1;
};

/// -log sigmoid(beta * [(sum chosen policy - sum chosen ref) -
///                      (sum rejected policy - sum rejected ref)])
double dpo_loss_reference(const LossInputs& inputs);
/// Scalar-margin form of the same loss.
double dpo_loss_margin(double beta, double margin);

double accuracy(const std::vector<ResultRow>& results);
/// Fraction of correct episodes by rounds_used; incorrect episodes excluded.
std::map<int, double> round_distribution(const std::vector<ResultRow>& results);
nlohmann::json metrics_report(const std::vector<ResultRow>& results);

/// Joins transcripts with their result rows (episode id = question id) and
/// extracts datasets from the correct episodes, ordered by question id.
std::vector<SftSample> build_sft(const std::vector<Transcript>& transcripts,
                                 const std::map<std::string, ResultRow>& results);
std::vector<DpoSample> build_dpo(const std::vector<Transcript>& transcripts,
                                 const std::map<std::string, ResultRow>& results);

}  // namespace situ3d
