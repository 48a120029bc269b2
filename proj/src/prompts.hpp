#pragma once

#include <string>

#include "scene.hpp"

namespace situ3d::prompts {

/// Task preamble + response format blocks + scene API documentation + tips.
/// Identical for every episode; pinned by a golden test.
const std::string& system_prompt();

/// Category summary (ascending name, with counts), situation and question.
std::string user_prompt(const Scene& scene, const std::string& situation,
                        const std::string& question);

/// Feedback sent when a response does not parse into Thought/Action/Action Input.
const char* format_reminder();

/// Feedback sent once when a final answer exceeds three words.
const char* answer_length_reminder();

/// Default outer-loop message for a wrong answer (train mode). Kept in the
/// config so collected datasets stay reproducible.
const char* default_retry_message();

/// Question-augmentation prompt with the placeholders filled in.
std::string augment_prompt(const std::string& situation,
                           const std::string& previous_questions, int num_questions);

}  // namespace situ3d::prompts
