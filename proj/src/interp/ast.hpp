#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace situ3d::interp {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

// ---- expressions ----------------------------------------------------------

struct NoneLit {};
struct BoolLit {
    bool value = false;
};
struct IntLit {
    std::int64_t value = 0;
};
struct FloatLit {
    double value = 0.0;
};
struct StrLit {
    std::string value;
};
struct NameRef {
    std::string name;
};
struct ListLit {
    std::vector<ExprPtr> items;
};
struct SetLit {
    std::vector<ExprPtr> items;  // never empty; {} is rejected at parse
};
struct TupleLit {
    std::vector<ExprPtr> items;
};

struct FStringPart {
    std::string literal;        // used when expr is null
    ExprPtr expr;
    std::string format_spec;    // text after ':' inside the braces
    char conversion = 0;        // 'r' or 's' from a !r / !s suffix
};
struct FStringLit {
    std::vector<FStringPart> parts;
};

struct AttributeRef {
    ExprPtr object;
    std::string name;
};
struct SubscriptRef {
    ExprPtr object;
    ExprPtr index;
};

struct CallArg {
    std::string keyword;  // empty = positional
    ExprPtr value;
};
struct Call {
    ExprPtr callee;
    std::vector<CallArg> args;
};

enum class UnaryKind { neg, pos, logical_not };
struct Unary {
    UnaryKind op;
    ExprPtr operand;
};

enum class BinKind { add, sub, mul, div, floordiv, mod, pow };
struct Binary {
    BinKind op;
    ExprPtr lhs;
    ExprPtr rhs;
};

enum class BoolKind { logical_and, logical_or };
struct BoolOp {
    BoolKind op;
    std::vector<ExprPtr> operands;
};

enum class CmpKind { eq, ne, lt, le, gt, ge, in, not_in, is, is_not };
struct Compare {
    ExprPtr first;
    std::vector<std::pair<CmpKind, ExprPtr>> rest;  // chained comparisons
};

struct Conditional {
    ExprPtr condition;
    ExprPtr then_value;
    ExprPtr else_value;
};

struct CompClause {
    std::vector<std::string> targets;
    ExprPtr iterable;
    std::vector<ExprPtr> conditions;
};
enum class CompKind { list, set };
struct Comprehension {
    CompKind kind;
    ExprPtr element;
    std::vector<CompClause> clauses;
};

struct Lambda {
    std::vector<std::string> params;
    ExprPtr body;
};

using ExprNode =
    std::variant<NoneLit, BoolLit, IntLit, FloatLit, StrLit, NameRef, ListLit, SetLit,
                 TupleLit, FStringLit, AttributeRef, SubscriptRef, Call, Unary, Binary,
                 BoolOp, Compare, Conditional, Comprehension, Lambda>;

struct Expr {
    int line = 1;
    ExprNode node;
};

// ---- statements -----------------------------------------------------------

struct AssignTarget {
    enum class Kind { name, subscript, tuple };
    Kind kind = Kind::name;
    int line = 1;
    std::string name;                 // Kind::name
    ExprPtr object;                   // Kind::subscript
    ExprPtr index;                    // Kind::subscript
    std::vector<std::string> names;   // Kind::tuple
};

struct ExprStmt {
    ExprPtr expr;
};
struct Assign {
    std::vector<AssignTarget> targets;  // chained a = b = expr
    ExprPtr value;
};
struct AugAssign {
    AssignTarget target;
    BinKind op;
    ExprPtr value;
};
struct Break {};
struct Continue {};
struct Pass {};
struct For {
    AssignTarget target;
    ExprPtr iterable;
    std::vector<StmtPtr> body;
};
struct IfBranch {
    ExprPtr condition;
    std::vector<StmtPtr> body;
};
struct If {
    std::vector<IfBranch> branches;
    std::vector<StmtPtr> else_body;
};

using StmtNode = std::variant<ExprStmt, Assign, AugAssign, Break, Continue, Pass, For, If>;

struct Stmt {
    int line = 1;
    StmtNode node;
};

struct Program {
    std::vector<StmtPtr> statements;
};

/// Canonical pretty-printer; parsing its output yields an equivalent program.
std::string to_source(const Program& program);
std::string to_source(const Expr& expr);

}  // namespace situ3d::interp
