#include "ast.hpp"

#include <sstream>

#include "../geometry.hpp"

namespace situ3d::interp {

namespace {

std::string quote_string(const std::string& s) {
    bool has_single = s.find('\'') != std::string::npos;
    bool has_double = s.find('"') != std::string::npos;
    char quote = (has_single && !has_double) ? '"' : '\'';
    std::string out(1, quote);
    for (char c : s) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            default:
                if (c == quote) {
                    out += '\\';
                    out += c;
                } else {
                    out += c;
                }
        }
    }
    out += quote;
    return out;
}

std::string emit(const Expr& e);

std::string emit_list(const std::vector<ExprPtr>& items, const char* sep = ", ") {
    std::ostringstream ss;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) ss << sep;
        ss << emit(*items[i]);
    }
    return ss.str();
}

const char* bin_op_text(BinKind op) {
    switch (op) {
        case BinKind::add: return "+";
        case BinKind::sub: return "-";
        case BinKind::mul: return "*";
        case BinKind::div: return "/";
        case BinKind::floordiv: return "//";
        case BinKind::mod: return "%";
        case BinKind::pow: return "**";
    }
    return "?";
}

const char* cmp_op_text(CmpKind op) {
    switch (op) {
        case CmpKind::eq: return "==";
        case CmpKind::ne: return "!=";
        case CmpKind::lt: return "<";
        case CmpKind::le: return "<=";
        case CmpKind::gt: return ">";
        case CmpKind::ge: return ">=";
        case CmpKind::in: return "in";
        case CmpKind::not_in: return "not in";
        case CmpKind::is: return "is";
        case CmpKind::is_not: return "is not";
    }
    return "?";
}

std::string emit(const Expr& e) {
    struct Visitor {
        std::string operator()(const NoneLit&) { return "None"; }
        std::string operator()(const BoolLit& n) { return n.value ? "True" : "False"; }
        std::string operator()(const IntLit& n) { return std::to_string(n.value); }
        std::string operator()(const FloatLit& n) { return format_double(n.value); }
        std::string operator()(const StrLit& n) { return quote_string(n.value); }
        std::string operator()(const NameRef& n) { return n.name; }
        std::string operator()(const ListLit& n) { return "[" + emit_list(n.items) + "]"; }
        std::string operator()(const SetLit& n) { return "{" + emit_list(n.items) + "}"; }
        std::string operator()(const TupleLit& n) {
            if (n.items.empty()) return "()";
            if (n.items.size() == 1) return "(" + emit(*n.items[0]) + ",)";
            return "(" + emit_list(n.items) + ")";
        }
        std::string operator()(const FStringLit& n) {
            std::string out = "f\"";
            for (const FStringPart& part : n.parts) {
                if (!part.expr) {
                    for (char c : part.literal) {
                        switch (c) {
                            case '\n': out += "\\n"; break;
                            case '\t': out += "\\t"; break;
                            case '"': out += "\\\""; break;
                            case '\\': out += "\\\\"; break;
                            case '{': out += "{{"; break;
                            case '}': out += "}}"; break;
                            default: out += c;
                        }
                    }
                } else {
                    out += "{" + emit(*part.expr);
                    if (part.conversion) {
                        out += '!';
                        out += part.conversion;
                    }
                    if (!part.format_spec.empty()) out += ":" + part.format_spec;
                    out += "}";
                }
            }
            out += '"';
            return out;
        }
        std::string operator()(const AttributeRef& n) {
            return emit(*n.object) + "." + n.name;
        }
        std::string operator()(const SubscriptRef& n) {
            return emit(*n.object) + "[" + emit(*n.index) + "]";
        }
        std::string operator()(const Call& n) {
            std::string out = emit(*n.callee) + "(";
            for (size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                if (!n.args[i].keyword.empty()) out += n.args[i].keyword + "=";
                out += emit(*n.args[i].value);
            }
            return out + ")";
        }
        std::string operator()(const Unary& n) {
            const char* op = n.op == UnaryKind::neg   ? "-"
                             : n.op == UnaryKind::pos ? "+"
                                                      : "not ";
            return std::string("(") + op + emit(*n.operand) + ")";
        }
        std::string operator()(const Binary& n) {
            return "(" + emit(*n.lhs) + " " + bin_op_text(n.op) + " " + emit(*n.rhs) + ")";
        }
        std::string operator()(const BoolOp& n) {
            const char* op = n.op == BoolKind::logical_and ? " and " : " or ";
            std::string out = "(";
            for (size_t i = 0; i < n.operands.size(); ++i) {
                if (i) out += op;
                out += emit(*n.operands[i]);
            }
            return out + ")";
        }
        std::string operator()(const Compare& n) {
            std::string out = "(" + emit(*n.first);
            for (const auto& [op, rhs] : n.rest) {
                out += std::string(" ") + cmp_op_text(op) + " " + emit(*rhs);
            }
            return out + ")";
        }
        std::string operator()(const Conditional& n) {
            return "(" + emit(*n.then_value) + " if " + emit(*n.condition) + " else " +
                   emit(*n.else_value) + ")";
        }
        std::string operator()(const Comprehension& n) {
            std::string out = n.kind == CompKind::list ? "[" : "{";
            out += emit(*n.element);
            for (const CompClause& clause : n.clauses) {
                out += " for ";
                for (size_t i = 0; i < clause.targets.size(); ++i) {
                    if (i) out += ", ";
                    out += clause.targets[i];
                }
                out += " in " + emit(*clause.iterable);
                for (const ExprPtr& cond : clause.conditions) {
                    out += " if " + emit(*cond);
                }
            }
            out += n.kind == CompKind::list ? "]" : "}";
            return out;
        }
        std::string operator()(const Lambda& n) {
            std::string out = "lambda ";
            for (size_t i = 0; i < n.params.size(); ++i) {
                if (i) out += ", ";
                out += n.params[i];
            }
            return out + ": " + emit(*n.body);
        }
    };
    return std::visit(Visitor{}, e.node);
}

std::string emit_target(const AssignTarget& t) {
    switch (t.kind) {
        case AssignTarget::Kind::name: return t.name;
        case AssignTarget::Kind::subscript:
            return emit(*t.object) + "[" + emit(*t.index) + "]";
        case AssignTarget::Kind::tuple: {
            std::string out;
            for (size_t i = 0; i < t.names.size(); ++i) {
                if (i) out += ", ";
                out += t.names[i];
            }
            return out;
        }
    }
    return "";
}

void emit_block(const std::vector<StmtPtr>& body, int indent, std::ostringstream& out);

void emit_stmt(const Stmt& stmt, int indent, std::ostringstream& out) {
    std::string pad(static_cast<size_t>(indent) * 4, ' ');
    struct Visitor {
        const std::string& pad;
        int indent;
        std::ostringstream& out;
        void operator()(const ExprStmt& n) { out << pad << emit(*n.expr) << "\n"; }
        void operator()(const Assign& n) {
            out << pad;
            for (const AssignTarget& t : n.targets) out << emit_target(t) << " = ";
            out << emit(*n.value) << "\n";
        }
        void operator()(const AugAssign& n) {
            out << pad << emit_target(n.target) << " " << bin_op_text(n.op) << "= "
                << emit(*n.value) << "\n";
        }
        void operator()(const Break&) { out << pad << "break\n"; }
        void operator()(const Continue&) { out << pad << "continue\n"; }
        void operator()(const Pass&) { out << pad << "pass\n"; }
        void operator()(const For& n) {
            out << pad << "for " << emit_target(n.target) << " in " << emit(*n.iterable)
                << ":\n";
            emit_block(n.body, indent + 1, out);
        }
        void operator()(const If& n) {
            for (size_t i = 0; i < n.branches.size(); ++i) {
                out << pad << (i == 0 ? "if " : "elif ") << emit(*n.branches[i].condition)
                    << ":\n";
                emit_block(n.branches[i].body, indent + 1, out);
            }
            if (!n.else_body.empty()) {
                out << pad << "else:\n";
                emit_block(n.else_body, indent + 1, out);
            }
        }
    };
    std::visit(Visitor{pad, indent, out}, stmt.node);
}

void emit_block(const std::vector<StmtPtr>& body, int indent, std::ostringstream& out) {
    if (body.empty()) {
        out << std::string(static_cast<size_t>(indent) * 4, ' ') << "pass\n";
        return;
    }
    for (const StmtPtr& stmt : body) emit_stmt(*stmt, indent, out);
}

}  // namespace

std::string to_source(const Program& program) {
    std::ostringstream out;
    for (const StmtPtr& stmt : program.statements) emit_stmt(*stmt, 0, out);
    return out.str();
}

std::string to_source(const Expr& expr) {
    return emit(expr);
}

}  // namespace situ3d::interp
