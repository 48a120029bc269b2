#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "agent_loop.hpp"
#include "config.hpp"
#include "llm_client.hpp"

namespace situ3d {

/// Grouping identity for a viewpoint: scene id plus the pose rounded to
/// 1e-4 (quaternion sign-canonicalized first, so q and -q coincide).
struct PositionKey {
    std::string scene_id;
    std::array<std::int64_t, 3> xyz{};   // units of 1e-4 m
    std::array<std::int64_t, 4> quat{};  // units of 1e-4

    auto operator<=>(const PositionKey&) const = default;

    std::string to_string() const;
    static PositionKey from(const std::string& scene_id, const Vec3& position,
                            const Quaternion& rotation);
};

struct AugmentRequest {
    std::string situation;
    std::vector<std::pair<std::string, std::string>> pairs;  // (question, answer)
    int num_questions = 1;
};

/// ceil(n / 2), never less than 1.
int augment_question_count(std::size_t pair_count);

/// Partitions records by viewpoint. Records without a pose are skipped and
/// reported through `skipped` when given.
std::map<PositionKey, std::vector<QuestionRecord>> group_by_position(
    const std::vector<QuestionRecord>& records,
    std::vector<std::string>* skipped = nullptr);

std::string build_augment_prompt(const AugmentRequest& request);

struct GeneratedParse {
    std::vector<std::pair<std::string, std::string>> accepted;  // (question, answer)
    std::vector<std::string> rejections;  // per-entry reasons
    bool whole_response_rejected = false;
    std::string rejection_reason;
};

/// Parses the model's JSON question list; malformed entries are dropped one
/// by one without aborting the batch.
GeneratedParse parse_generated(const std::string& text);

struct AugmentOutput {
    std::vector<QuestionRecord> records;
    nlohmann::json provenance;  // aug id -> {source_group, source_questions}
    nlohmann::json report;
};

/// Runs the full augmentation pipeline over grouped records. Groups run
/// concurrently up to `jobs` (forced sequential for non-thread-safe clients);
/// output order is deterministic regardless of completion order.
AugmentOutput augment_dataset(const std::vector<QuestionRecord>& records,
                              LlmClient& client, const GlobalConfig& config,
                              int jobs = 1);

}  // namespace situ3d
