#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace situ3d::interp {

enum class Tok {
    end_of_file,
    newline,
    indent,
    dedent,
    name,
    keyword,     // reserved words, including disallowed ones
    int_lit,
    float_lit,
    str_lit,
    fstr_lit,    // raw inner text of an f-string, unescaped literally
    lparen,
    rparen,
    lbracket,
    rbracket,
    lbrace,
    rbrace,
    comma,
    colon,
    dot,
    assign,
    aug_add,
    aug_sub,
    aug_mul,
    aug_div,
    aug_floordiv,
    aug_mod,
    op_eq,
    op_ne,
    op_lt,
    op_le,
    op_gt,
    op_ge,
    op_plus,
    op_minus,
    op_star,
    op_dstar,
    op_slash,
    op_dslash,
    op_percent,
};

struct Token {
    Tok kind = Tok::end_of_file;
    std::string text;
    std::int64_t int_value = 0;
    double float_value = 0.0;
    int line = 1;
};

/// Thrown (as part of a report) via SyntaxException in parser.hpp.
struct LexError {
    std::string message;
    int line = 1;
};

/// Python-style tokenizer: indentation becomes INDENT/DEDENT, newlines
/// inside brackets are ignored, comments are skipped. Throws LexError.
std::vector<Token> tokenize(const std::string& source);

bool is_reserved_word(const std::string& word);

}  // namespace situ3d::interp
