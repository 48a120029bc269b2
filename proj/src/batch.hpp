#pragma once

#include <string>
#include <vector>

#include "agent_loop.hpp"
#include "augment.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "llm_client.hpp"

namespace situ3d {

std::vector<QuestionRecord> load_questions(const std::string& path);

/// Runs every question as an episode (train or eval mode), in question-file
/// order regardless of scheduling. Questions whose scene cannot be loaded
/// come back as errored rows. Eval requires every question to carry an
/// answer.
struct BatchOutcome {
    std::vector<ResultRow> rows;
    std::string transcripts_jsonl;
    nlohmann::json summary;
};
BatchOutcome run_batch(const std::vector<QuestionRecord>& questions,
                       const std::string& scene_dir, const GlobalConfig& config,
                       ClientSource& clients, LoopMode mode, int jobs);

/// run_batch in train mode + writes transcripts.jsonl and results.jsonl.
nlohmann::json collect_run(const std::string& questions_path,
                           const std::string& scene_dir, const GlobalConfig& config,
                           ClientSource& clients, int jobs, const std::string& out_dir);

/// run_batch in eval mode + writes transcripts/results/metrics.json.
/// strict counts errored questions as incorrect instead of dropping them.
nlohmann::json eval_run(const std::string& questions_path, const std::string& scene_dir,
                        const GlobalConfig& config, ClientSource& clients, int jobs,
                        bool strict, const std::string& out_dir);

/// Rebuilds datasets from collected transcripts + results and writes JSONL.
/// With verify=true every sample is re-checked against its scene (and ground
/// truth for DPO wrong answers); failures are listed in the summary.
nlohmann::json build_sft_run(const std::string& transcripts_path,
                             const std::string& results_path,
                             const std::string& out_path, bool verify,
                             const GlobalConfig& config, const std::string& scene_dir,
                             const std::string& questions_path);
nlohmann::json build_dpo_run(const std::string& transcripts_path,
                             const std::string& results_path,
                             const std::string& out_path, bool verify,
                             const GlobalConfig& config, const std::string& scene_dir,
                             const std::string& questions_path);

/// Full augmentation pipeline over a question file. With verify=true each
/// generated question must pass a train-mode episode before being kept.
nlohmann::json augment_run(const std::string& questions_path, const GlobalConfig& config,
                           ClientSource& clients, int jobs, bool verify,
                           const std::string& scene_dir, const std::string& out_path,
                           const std::string& provenance_path);

/// Computes the metrics report for a results JSONL text.
nlohmann::json metrics_from_results_text(const std::string& results_jsonl, bool strict);

}  // namespace situ3d
