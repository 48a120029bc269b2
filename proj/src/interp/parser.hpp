#pragma once

#include <string>

#include "ast.hpp"

namespace situ3d::interp {

struct SyntaxException {
    std::string message;
    int line = 1;
};

/// Parses one sandboxed program. Throws SyntaxException for malformed input
/// and for disallowed constructs (import, def, while, ...).
Program parse_program(const std::string& source);

/// Parses a single expression (used for f-string interpolations).
ExprPtr parse_expression_text(const std::string& text, int line);

}  // namespace situ3d::interp
