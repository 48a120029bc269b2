#include "lexer.hpp"

#include <cctype>
#include <cstdlib>
#include <set>

namespace situ3d::interp {

namespace {

const std::set<std::string> kReserved = {
    // allowed
    "for", "in", "if", "elif", "else", "break", "continue", "pass", "and", "or",
    "not", "True", "False", "None", "lambda", "is",
    // recognized so the parser can name them in errors
    "import", "from", "def", "class", "while", "with", "try", "except", "finally",
    "raise", "return", "yield", "global", "nonlocal", "del", "assert", "async",
    "await", "as",
};

struct Cursor {
    const std::string& src;
    size_t pos = 0;
    int line = 1;

    bool done() const { return pos >= src.size(); }
    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    char take() {
        char c = src[pos++];
        if (c == '\n') ++line;
        return c;
    }
};

int indent_width(const std::string& prefix) {
    int width = 0;
    for (char c : prefix) {
        if (c == '\t') {
            width += 8 - (width % 8);
        } else {
            ++width;
        }
    }
    return width;
}

std::string scan_string_body(Cursor& cur, char quote, bool raw_fstring) {
    std::string out;
    int start_line = cur.line;
    while (true) {
        if (cur.done() || cur.peek() == '\n') {
            throw LexError{"unterminated string literal", start_line};
        }
        char c = cur.take();
        if (c == quote) break;
        if (c == '\\' && !raw_fstring) {
            if (cur.done()) throw LexError{"unterminated string literal", start_line};
            char e = cur.take();
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '\\': out += '\\'; break;
                case '\'': out += '\''; break;
                case '"': out += '"'; break;
                case '0': out += '\0'; break;
                default:
                    out += '\\';
                    out += e;
                    break;
            }
        } else if (c == '\\' && raw_fstring) {
            // keep the escape intact; the parser unescapes literal segments
            out += c;
            if (cur.done()) throw LexError{"unterminated string literal", start_line};
            out += cur.take();
        } else {
            out += c;
        }
    }
    return out;
}

}  // namespace

bool is_reserved_word(const std::string& word) {
    return kReserved.count(word) > 0;
}

std::vector<Token> tokenize(const std::string& source) {
    std::vector<Token> out;
    Cursor cur{source};
    std::vector<int> indents{0};
    int bracket_depth = 0;
    bool at_line_start = true;
    bool line_has_content = false;

    auto push = [&](Tok kind, std::string text = "") {
        out.push_back(Token{kind, std::move(text), 0, 0.0, cur.line});
    };

    while (!cur.done()) {
        if (at_line_start && bracket_depth == 0) {
            // measure indentation; skip blank / comment-only lines entirely
            size_t start = cur.pos;
            std::string prefix;
            while (!cur.done() && (cur.peek() == ' ' || cur.peek() == '\t')) {
                prefix += cur.take();
            }
            if (cur.done()) break;
            if (cur.peek() == '\n') {
                cur.take();
                continue;
            }
            if (cur.peek() == '#') {
                while (!cur.done() && cur.peek() != '\n') cur.take();
                continue;
            }
            (void)start;
            int width = indent_width(prefix);
            if (width > indents.back()) {
                indents.push_back(width);
                push(Tok::indent);
            } else {
                while (width < indents.back()) {
                    indents.pop_back();
                    push(Tok::dedent);
                }
                if (width != indents.back()) {
                    throw LexError{"unindent does not match any outer indentation level",
                                   cur.line};
                }
            }
            at_line_start = false;
            line_has_content = false;
            continue;
        }

        char c = cur.peek();

        if (c == '\n') {
            cur.take();
            if (bracket_depth > 0) continue;
            if (line_has_content) push(Tok::newline);
            at_line_start = true;
            continue;
        }
        if (c == ' ' || c == '\t') {
            cur.take();
            continue;
        }
        if (c == '#') {
            while (!cur.done() && cur.peek() != '\n') cur.take();
            continue;
        }
        if (c == '\\' && cur.peek(1) == '\n') {
            cur.take();
            cur.take();
            continue;
        }

        line_has_content = true;

        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1))))) {
            int line = cur.line;
            std::string num;
            bool is_float = false;
            while (std::isdigit(static_cast<unsigned char>(cur.peek()))) num += cur.take();
            if (cur.peek() == '.' && cur.peek(1) != '.') {
                is_float = true;
                num += cur.take();
                while (std::isdigit(static_cast<unsigned char>(cur.peek()))) num += cur.take();
            }
            if (cur.peek() == 'e' || cur.peek() == 'E') {
                char next = cur.peek(1);
                char next2 = cur.peek(2);
                if (std::isdigit(static_cast<unsigned char>(next)) ||
                    ((next == '+' || next == '-') &&
                     std::isdigit(static_cast<unsigned char>(next2)))) {
                    is_float = true;
                    num += cur.take();
                    if (cur.peek() == '+' || cur.peek() == '-') num += cur.take();
                    while (std::isdigit(static_cast<unsigned char>(cur.peek())))
                        num += cur.take();
                }
            }
            Token tok;
            tok.line = line;
            tok.text = num;
            if (is_float) {
                tok.kind = Tok::float_lit;
                tok.float_value = std::strtod(num.c_str(), nullptr);
            } else {
                tok.kind = Tok::int_lit;
                tok.int_value = std::strtoll(num.c_str(), nullptr, 10);
            }
            out.push_back(std::move(tok));
            continue;
        }

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            int line = cur.line;
            std::string word;
            while (std::isalnum(static_cast<unsigned char>(cur.peek())) ||
                   cur.peek() == '_') {
                word += cur.take();
            }
            // f-string prefix
            if ((word == "f" || word == "F") && (cur.peek() == '"' || cur.peek() == '\'')) {
                char quote = cur.take();
                std::string body = scan_string_body(cur, quote, true);
                out.push_back(Token{Tok::fstr_lit, std::move(body), 0, 0.0, line});
                continue;
            }
            Token tok;
            tok.line = line;
            tok.text = std::move(word);
            tok.kind = is_reserved_word(tok.text) ? Tok::keyword : Tok::name;
            out.push_back(std::move(tok));
            continue;
        }

        if (c == '"' || c == '\'') {
            int line = cur.line;
            char quote = cur.take();
            std::string body = scan_string_body(cur, quote, false);
            out.push_back(Token{Tok::str_lit, std::move(body), 0, 0.0, line});
            continue;
        }

        int line = cur.line;
        cur.take();
        char n = cur.peek();
        switch (c) {
            case '(': ++bracket_depth; push(Tok::lparen); break;
            case ')': --bracket_depth; push(Tok::rparen); break;
            case '[': ++bracket_depth; push(Tok::lbracket); break;
            case ']': --bracket_depth; push(Tok::rbracket); break;
            case '{': ++bracket_depth; push(Tok::lbrace); break;
            case '}': --bracket_depth; push(Tok::rbrace); break;
            case ',': push(Tok::comma); break;
            case ':': push(Tok::colon); break;
            case '.': push(Tok::dot); break;
            case '=':
                if (n == '=') {
                    cur.take();
                    push(Tok::op_eq);
                } else {
                    push(Tok::assign);
                }
                break;
            case '!':
                if (n == '=') {
                    cur.take();
                    push(Tok::op_ne);
                } else {
                    throw LexError{"unexpected character '!'", line};
                }
                break;
            case '<':
                if (n == '=') {
                    cur.take();
                    push(Tok::op_le);
                } else {
                    push(Tok::op_lt);
                }
                break;
            case '>':
                if (n == '=') {
                    cur.take();
                    push(Tok::op_ge);
                } else {
                    push(Tok::op_gt);
                }
                break;
            case '+':
                if (n == '=') {
                    cur.take();
                    push(Tok::aug_add);
                } else {
                    push(Tok::op_plus);
                }
                break;
            case '-':
                if (n == '=') {
                    cur.take();
                    push(Tok::aug_sub);
                } else {
                    push(Tok::op_minus);
                }
                break;
            case '*':
                if (n == '*') {
                    cur.take();
                    push(Tok::op_dstar);
                } else if (n == '=') {
                    cur.take();
                    push(Tok::aug_mul);
                } else {
                    push(Tok::op_star);
                }
                break;
            case '/':
                if (n == '/') {
                    cur.take();
                    if (cur.peek() == '=') {
                        cur.take();
                        push(Tok::aug_floordiv);
                    } else {
                        push(Tok::op_dslash);
                    }
                } else if (n == '=') {
                    cur.take();
                    push(Tok::aug_div);
                } else {
                    push(Tok::op_slash);
                }
                break;
            case '%':
                if (n == '=') {
                    cur.take();
                    push(Tok::aug_mod);
                } else {
                    push(Tok::op_percent);
                }
                break;
            default: {
                std::string msg = "unexpected character '";
                msg += c;
                msg += "'";
                throw LexError{msg, line};
            }
        }
    }

    if (line_has_content) push(Tok::newline);
    while (indents.size() > 1) {
        indents.pop_back();
        push(Tok::dedent);
    }
    push(Tok::end_of_file);
    return out;
}

}  // namespace situ3d::interp
