#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../tool_api.hpp"
#include "ast.hpp"
#include "value.hpp"

namespace situ3d::interp {

struct EvalLimits {
    std::int64_t max_steps = 100000;
    std::int64_t max_output_chars = 4096;
    std::int64_t max_collection_len = 10000;

    void validate() const;  // throws ConfigError
    static EvalLimits from_json(const nlohmann::json& block);
    nlohmann::json to_json() const;
};

/// Captured print output of one program run.
struct Observation {
    std::vector<std::string> lines;
    bool truncated = false;
};

enum class ErrorKind { syntax, name, type, value, attribute, limit, api };

struct RuntimeErrorReport {
    ErrorKind kind = ErrorKind::syntax;
    std::string message;
    int line = 1;
};

using ExecResult = std::variant<Observation, RuntimeErrorReport>;
using ParseResult = std::variant<std::shared_ptr<Program>, RuntimeErrorReport>;

/// Feedback label for an error kind ("NameError-style", ...).
std::string error_kind_label(ErrorKind kind);

ParseResult parse(const std::string& source);

/// Runs a parsed program against the bound scene API. Never throws for
/// program-level failures; those come back as RuntimeErrorReport.
ExecResult execute(const Program& program, const ToolApi& api, const EvalLimits& limits);

/// parse + execute in one call.
ExecResult run_program(const std::string& source, const ToolApi& api,
                       const EvalLimits& limits);

/// Renders the "Observation: ..." text fed back to the model.
std::string format_feedback(const ExecResult& result);

bool is_error(const ExecResult& result);

}  // namespace situ3d::interp
