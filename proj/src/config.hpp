#pragma once

#include <string>

#include <json.hpp>

#include "interp/interpreter.hpp"
#include "llm_client.hpp"
#include "relations.hpp"
#include "tool_api.hpp"

namespace situ3d {

enum class LoopMode { train, eval };

/// Inner/outer refinement caps. Eval mode always runs a single outer loop;
/// the ground truth is never consulted during an eval episode.
struct LoopConfig {
    int max_program_rounds = 6;
    int max_outer_rounds = 3;
    LoopMode mode = LoopMode::eval;
    std::string retry_message;  // empty = built-in default

    void validate() const;
    static LoopConfig from_json(const nlohmann::json& block);
    nlohmann::json to_json() const;
};

struct Paths {
    std::string scene_dir = "scenes";
    std::string output_dir = "out";
};

struct GlobalConfig {
    RelationConfig relations;
    LoopConfig loop;
    ClientConfig llm;
    interp::EvalLimits limits;
    ApiOptions api;
    Paths paths;

    static GlobalConfig from_json(const nlohmann::json& doc);
    /// Parses the file and applies SITU3D_ENDPOINT / SITU3D_API_KEY /
    /// SITU3D_MODEL overrides from the environment.
    static GlobalConfig load_file(const std::string& path);
    static GlobalConfig defaults();
    nlohmann::json to_json() const;

    /// The outer-loop retry text actually used (config override or default).
    std::string retry_message_text() const;
};

}  // namespace situ3d
