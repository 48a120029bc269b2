#include "interpreter.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "../errors.hpp"
#include "../geometry.hpp"
#include "lexer.hpp"
#include "parser.hpp"

namespace situ3d::interp {

namespace {

// Unwinds evaluation with a finished error report.
struct Interrupt {
    RuntimeErrorReport report;
};

enum BuiltinId {
    b_print,
    b_len,
    b_sorted,
    b_min,
    b_max,
    b_abs,
    b_sum,
    b_round,
    b_set,
    b_list,
    b_str,
    b_int,
    b_float,
    b_enumerate,
    b_range,
    b_any,
    b_all,
    b_scene,
    b_filter,
    b_relate,
    b_relate_agent,
    b_query_relation,
    b_query_relation_agent,
    b_query_attribute,
    b_query_state,
    builtin_count,
};

const std::map<std::string, int>& builtin_names() {
    static const std::map<std::string, int> names = {
        {"print", b_print},
        {"len", b_len},
        {"sorted", b_sorted},
        {"min", b_min},
        {"max", b_max},
        {"abs", b_abs},
        {"sum", b_sum},
        {"round", b_round},
        {"set", b_set},
        {"list", b_list},
        {"str", b_str},
        {"int", b_int},
        {"float", b_float},
        {"enumerate", b_enumerate},
        {"range", b_range},
        {"any", b_any},
        {"all", b_all},
        {"scene", b_scene},
        {"filter", b_filter},
        {"relate", b_relate},
        {"relate_agent", b_relate_agent},
        {"query_relation", b_query_relation},
        {"query_relation_agent", b_query_relation_agent},
        {"query_attribute", b_query_attribute},
        {"query_state", b_query_state},
    };
    return names;
}

const char* builtin_name(int id) {
    for (const auto& [name, bid] : builtin_names()) {
        if (bid == id) return name.c_str();
    }
    return "?";
}

enum MethodId {
    m_list_append,
    m_list_extend,
    m_set_add,
    m_set_update,
    m_str_join,
    m_str_lower,
    m_str_upper,
    m_str_strip,
    m_str_split,
    m_str_replace,
    m_str_startswith,
    m_str_endswith,
};

struct MethodSpec {
    int id;
    const char* name;
};

const std::vector<MethodSpec> kListMethods = {{m_list_append, "append"},
                                              {m_list_extend, "extend"}};
const std::vector<MethodSpec> kSetMethods = {{m_set_add, "add"}, {m_set_update, "update"}};
const std::vector<MethodSpec> kStrMethods = {
    {m_str_join, "join"},       {m_str_lower, "lower"},
    {m_str_upper, "upper"},     {m_str_strip, "strip"},
    {m_str_split, "split"},     {m_str_replace, "replace"},
    {m_str_startswith, "startswith"}, {m_str_endswith, "endswith"}};

const char* method_name(int id) {
    for (const auto& methods : {kListMethods, kSetMethods, kStrMethods}) {
        for (const MethodSpec& m : methods) {
            if (m.id == id) return m.name;
        }
    }
    return "?";
}

struct CallArgs {
    std::vector<Value> pos;
    std::vector<std::pair<std::string, Value>> kw;
    int line = 1;
};

class Evaluator {
  public:
    Evaluator(const ToolApi& api, const EvalLimits& limits) : api_(api), limits_(limits) {}

    ExecResult run(const Program& prog) {
        try {
            Flow flow = exec_block(prog.statements);
            (void)flow;
        } catch (const Interrupt& stop) {
            return stop.report;
        } catch (const ValueTypeError& e) {
            return RuntimeErrorReport{ErrorKind::type, e.message, line_};
        }
        return std::move(out_);
    }

  private:
    enum class Flow { normal, loop_break, loop_continue };

    const ToolApi& api_;
    EvalLimits limits_;
    std::map<std::string, Value> env_;
    std::int64_t steps_ = 0;
    Observation out_;
    std::int64_t out_len_ = 0;
    bool out_closed_ = false;
    int line_ = 1;

    [[noreturn]] void raise(ErrorKind kind, std::string message, int line) {
        throw Interrupt{RuntimeErrorReport{kind, std::move(message), line}};
    }
    [[noreturn]] void raise(ErrorKind kind, std::string message) {
        raise(kind, std::move(message), line_);
    }

    void step(int line) {
        line_ = line;
        if (++steps_ > limits_.max_steps) {
            raise(ErrorKind::limit,
                  "step limit of " + std::to_string(limits_.max_steps) + " exceeded",
                  line);
        }
    }

    void check_collection(std::size_t n) {
        if (static_cast<std::int64_t>(n) > limits_.max_collection_len) {
            raise(ErrorKind::limit,
                  "collection length limit of " +
                      std::to_string(limits_.max_collection_len) + " exceeded");
        }
    }

    void check_string(std::size_t n) {
        if (static_cast<std::int64_t>(n) > limits_.max_collection_len * 100) {
            raise(ErrorKind::limit, "string length limit exceeded");
        }
    }

    // ---- output capture ----------------------------------------------------

    void append_output(const std::string& text) {
        if (out_closed_) {
            out_.truncated = true;
            return;
        }
        size_t start = 0;
        while (true) {
            size_t nl = text.find('\n', start);
            std::string segment = text.substr(
                start, nl == std::string::npos ? std::string::npos : nl - start);
            std::int64_t separator = out_.lines.empty() ? 0 : 1;
            std::int64_t room = limits_.max_output_chars - out_len_ - separator;
            if (room < static_cast<std::int64_t>(segment.size())) {
                if (room > 0) {
                    out_.lines.push_back(segment.substr(0, static_cast<size_t>(room)));
                    out_len_ += separator + room;
                }
                out_.truncated = true;
                out_closed_ = true;
                return;
            }
            out_.lines.push_back(segment);
            out_len_ += separator + static_cast<std::int64_t>(segment.size());
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
    }

    // ---- statements --------------------------------------------------------

    Flow exec_block(const std::vector<StmtPtr>& body) {
        for (const StmtPtr& stmt : body) {
            Flow flow = exec_stmt(*stmt);
            if (flow != Flow::normal) return flow;
        }
        return Flow::normal;
    }

    Flow exec_stmt(const Stmt& stmt) {
        step(stmt.line);
        struct Visitor {
            Evaluator& ev;
            int line;
            Flow operator()(const ExprStmt& n) {
                ev.eval(*n.expr);
                return Flow::normal;
            }
            Flow operator()(const Assign& n) {
                Value value = ev.eval(*n.value);
                for (const AssignTarget& target : n.targets) {
                    ev.assign(target, value);
                }
                return Flow::normal;
            }
            Flow operator()(const AugAssign& n) {
                Value current = ev.read_target(n.target);
                Value rhs = ev.eval(*n.value);
                Value result = ev.binary_op(n.op, current, rhs, line);
                ev.assign(n.target, result);
                return Flow::normal;
            }
            Flow operator()(const Break&) { return Flow::loop_break; }
            Flow operator()(const Continue&) { return Flow::loop_continue; }
            Flow operator()(const Pass&) { return Flow::normal; }
            Flow operator()(const For& n) {
                Value iterable = ev.eval(*n.iterable);
                ValueVec items = ev.iterate(iterable, line);
                for (Value& item : items) {
                    ev.step(line);
                    ev.assign(n.target, item);
                    Flow flow = ev.exec_block(n.body);
                    if (flow == Flow::loop_break) break;
                }
                return Flow::normal;
            }
            Flow operator()(const If& n) {
                for (const IfBranch& branch : n.branches) {
                    if (truthy(ev.eval(*branch.condition))) {
                        return ev.exec_block(branch.body);
                    }
                }
                return ev.exec_block(n.else_body);
            }
        };
        return std::visit(Visitor{*this, stmt.line}, stmt.node);
    }

    void assign(const AssignTarget& target, const Value& value) {
        switch (target.kind) {
            case AssignTarget::Kind::name:
                env_[target.name] = value;
                return;
            case AssignTarget::Kind::subscript: {
                Value object = eval(*target.object);
                Value index = eval(*target.index);
                auto* list = std::get_if<ListVal>(&object);
                if (!list) {
                    raise(ErrorKind::type, "'" + type_name(object) +
                                               "' object does not support item assignment",
                          target.line);
                }
                std::int64_t i = subscript_index(index, list->items->size(), "list",
                                                 target.line);
                (*list->items)[static_cast<size_t>(i)] = value;
                return;
            }
            case AssignTarget::Kind::tuple: {
                ValueVec items = iterate(value, target.line);
                if (items.size() < target.names.size()) {
                    raise(ErrorKind::value,
                          "not enough values to unpack (expected " +
                              std::to_string(target.names.size()) + ", got " +
                              std::to_string(items.size()) + ")",
                          target.line);
                }
                if (items.size() > target.names.size()) {
                    raise(ErrorKind::value,
                          "too many values to unpack (expected " +
                              std::to_string(target.names.size()) + ")",
                          target.line);
                }
                for (size_t i = 0; i < target.names.size(); ++i) {
                    env_[target.names[i]] = items[i];
                }
                return;
            }
        }
    }

    Value read_target(const AssignTarget& target) {
        switch (target.kind) {
            case AssignTarget::Kind::name: {
                auto it = env_.find(target.name);
                if (it == env_.end()) {
                    raise(ErrorKind::name, "name '" + target.name + "' is not defined",
                          target.line);
                }
                return it->second;
            }
            case AssignTarget::Kind::subscript: {
                Value object = eval(*target.object);
                Value index = eval(*target.index);
                return subscript(object, index, target.line);
            }
            case AssignTarget::Kind::tuple:
                raise(ErrorKind::type, "augmented assignment needs a single target",
                      target.line);
        }
        raise(ErrorKind::type, "bad assignment target", target.line);
    }

    // ---- expressions -------------------------------------------------------

    Value eval(const Expr& e) {
        step(e.line);
        struct Visitor {
            Evaluator& ev;
            int line;
            Value operator()(const NoneLit&) { return Value{}; }
            Value operator()(const BoolLit& n) { return Value{n.value}; }
            Value operator()(const IntLit& n) { return Value{n.value}; }
            Value operator()(const FloatLit& n) { return Value{n.value}; }
            Value operator()(const StrLit& n) { return Value{n.value}; }
            Value operator()(const NameRef& n) { return ev.lookup(n.name, line); }
            Value operator()(const ListLit& n) {
                ValueVec items;
                items.reserve(n.items.size());
                for (const ExprPtr& item : n.items) items.push_back(ev.eval(*item));
                ev.check_collection(items.size());
                return make_list(std::move(items));
            }
            Value operator()(const SetLit& n) {
                ValueVec items;
                items.reserve(n.items.size());
                for (const ExprPtr& item : n.items) items.push_back(ev.eval(*item));
                ev.check_collection(items.size());
                return make_set(std::move(items));
            }
            Value operator()(const TupleLit& n) {
                ValueVec items;
                items.reserve(n.items.size());
                for (const ExprPtr& item : n.items) items.push_back(ev.eval(*item));
                ev.check_collection(items.size());
                return make_tuple(std::move(items));
            }
            Value operator()(const FStringLit& n) { return ev.eval_fstring(n, line); }
            Value operator()(const AttributeRef& n) {
                Value object = ev.eval(*n.object);
                return ev.attribute(object, n.name, line);
            }
            Value operator()(const SubscriptRef& n) {
                Value object = ev.eval(*n.object);
                Value index = ev.eval(*n.index);
                return ev.subscript(object, index, line);
            }
            Value operator()(const Call& n) {
                Value callee = ev.eval(*n.callee);
                CallArgs args;
                args.line = line;
                for (const CallArg& arg : n.args) {
                    if (arg.keyword.empty()) {
                        args.pos.push_back(ev.eval(*arg.value));
                    } else {
                        args.kw.emplace_back(arg.keyword, ev.eval(*arg.value));
                    }
                }
                return ev.call_value(callee, std::move(args));
            }
            Value operator()(const Unary& n) {
                Value operand = ev.eval(*n.operand);
                switch (n.op) {
                    case UnaryKind::logical_not: return Value{!truthy(operand)};
                    case UnaryKind::neg:
                        if (const auto* i = std::get_if<std::int64_t>(&operand)) {
                            return Value{-*i};
                        }
                        if (const auto* b = std::get_if<bool>(&operand)) {
                            return Value{static_cast<std::int64_t>(*b ? -1 : 0)};
                        }
                        if (const auto* d = std::get_if<double>(&operand)) {
                            return Value{-*d};
                        }
                        ev.raise(ErrorKind::type,
                                 "bad operand type for unary -: '" + type_name(operand) +
                                     "'",
                                 line);
                    case UnaryKind::pos:
                        if (is_numeric(operand)) return operand;
                        ev.raise(ErrorKind::type,
                                 "bad operand type for unary +: '" + type_name(operand) +
                                     "'",
                                 line);
                }
                return Value{};
            }
            Value operator()(const Binary& n) {
                Value lhs = ev.eval(*n.lhs);
                Value rhs = ev.eval(*n.rhs);
                return ev.binary_op(n.op, lhs, rhs, line);
            }
            Value operator()(const BoolOp& n) {
                bool is_and = n.op == BoolKind::logical_and;
                Value last;
                for (const ExprPtr& operand : n.operands) {
                    last = ev.eval(*operand);
                    if (is_and ? !truthy(last) : truthy(last)) return last;
                }
                return last;
            }
            Value operator()(const Compare& n) {
                Value lhs = ev.eval(*n.first);
                for (const auto& [op, rhs_expr] : n.rest) {
                    Value rhs = ev.eval(*rhs_expr);
                    if (!ev.compare(op, lhs, rhs, line)) return Value{false};
                    lhs = std::move(rhs);
                }
                return Value{true};
            }
            Value operator()(const Conditional& n) {
                return truthy(ev.eval(*n.condition)) ? ev.eval(*n.then_value)
                                                     : ev.eval(*n.else_value);
            }
            Value operator()(const Comprehension& n) {
                return ev.eval_comprehension(n, line);
            }
            Value operator()(const Lambda& n) { return Value{LambdaVal{&n, line}}; }
        };
        return std::visit(Visitor{*this, e.line}, e.node);
    }

    Value lookup(const std::string& name, int line) {
        auto it = env_.find(name);
        if (it != env_.end()) return it->second;
        auto bit = builtin_names().find(name);
        if (bit != builtin_names().end()) return Value{BuiltinVal{bit->second}};
        raise(ErrorKind::name, "name '" + name + "' is not defined", line);
    }

    Value eval_fstring(const FStringLit& n, int line) {
        std::string out;
        for (const FStringPart& part : n.parts) {
            if (!part.expr) {
                out += part.literal;
                continue;
            }
            Value v = eval(*part.expr);
            std::string text =
                part.conversion == 'r' ? to_repr(v) : to_str(v);
            if (!part.format_spec.empty()) {
                text = apply_format_spec(v, part.format_spec, line);
            }
            out += text;
            check_string(out.size());
        }
        return Value{out};
    }

    std::string apply_format_spec(const Value& v, const std::string& spec, int line) {
        // supported: ".<digits>f", "f", "d"
        if (spec == "d") {
            if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
            if (const auto* b = std::get_if<bool>(&v)) return *b ? "1" : "0";
            raise(ErrorKind::value,
                  "unknown format code 'd' for object of type '" + type_name(v) + "'",
                  line);
        }
        bool fixed = !spec.empty() && spec.back() == 'f';
        if (fixed) {
            int precision = 6;
            if (spec.size() > 1) {
                if (spec.front() != '.') {
                    raise(ErrorKind::value, "unsupported format spec '" + spec + "'", line);
                }
                precision = 0;
                for (size_t i = 1; i + 1 < spec.size(); ++i) {
                    if (!std::isdigit(static_cast<unsigned char>(spec[i]))) {
                        raise(ErrorKind::value, "unsupported format spec '" + spec + "'",
                              line);
                    }
                    precision = precision * 10 + (spec[i] - '0');
                }
            }
            if (!is_numeric(v)) {
                raise(ErrorKind::value,
                      "unknown format code 'f' for object of type '" + type_name(v) + "'",
                      line);
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", precision, numeric_value(v));
            return buf;
        }
        raise(ErrorKind::value, "unsupported format spec '" + spec + "'", line);
    }

    Value eval_comprehension(const Comprehension& n, int line) {
        // shadowed loop targets are restored afterwards
        std::map<std::string, std::optional<Value>> saved;
        for (const CompClause& clause : n.clauses) {
            for (const std::string& name : clause.targets) {
                if (!saved.count(name)) {
                    auto it = env_.find(name);
                    saved[name] = it == env_.end() ? std::optional<Value>{}
                                                   : std::optional<Value>{it->second};
                }
            }
        }
        ValueVec list_acc;
        ValueVec set_acc;
        comp_clause(n, 0, list_acc, set_acc, line);
        for (auto& [name, value] : saved) {
            if (value) {
                env_[name] = *value;
            } else {
                env_.erase(name);
            }
        }
        if (n.kind == CompKind::list) return ListVal{std::make_shared<ValueVec>(std::move(list_acc))};
        return SetVal{std::make_shared<ValueVec>(std::move(set_acc))};
    }

    void comp_clause(const Comprehension& n, size_t idx, ValueVec& list_acc,
                     ValueVec& set_acc, int line) {
        if (idx == n.clauses.size()) {
            Value element = eval(*n.element);
            if (n.kind == CompKind::list) {
                check_collection(list_acc.size() + 1);
                list_acc.push_back(std::move(element));
            } else {
                check_collection(set_acc.size() + 1);
                set_insert(set_acc, std::move(element));
            }
            return;
        }
        const CompClause& clause = n.clauses[idx];
        Value iterable = eval(*clause.iterable);
        ValueVec items = iterate(iterable, line);
        for (Value& item : items) {
            step(line);
            bind_names(clause.targets, item, line);
            bool keep = true;
            for (const ExprPtr& cond : clause.conditions) {
                if (!truthy(eval(*cond))) {
                    keep = false;
                    break;
                }
            }
            if (keep) comp_clause(n, idx + 1, list_acc, set_acc, line);
        }
    }

    void bind_names(const std::vector<std::string>& names, const Value& value, int line) {
        if (names.size() == 1) {
            env_[names[0]] = value;
            return;
        }
        AssignTarget target;
        target.kind = AssignTarget::Kind::tuple;
        target.names = names;
        target.line = line;
        assign(target, value);
    }

    // ---- operators ---------------------------------------------------------

    [[noreturn]] void bad_operands(const char* op, const Value& a, const Value& b,
                                   int line) {
        raise(ErrorKind::type,
              std::string("unsupported operand type(s) for ") + op + ": '" + type_name(a) +
                  "' and '" + type_name(b) + "'",
              line);
    }

    Value numeric_binary(BinKind op, const Value& a, const Value& b, int line) {
        bool both_int = !std::holds_alternative<double>(a) &&
                        !std::holds_alternative<double>(b);
        double x = numeric_value(a);
        double y = numeric_value(b);
        switch (op) {
            case BinKind::add:
                return both_int ? Value{static_cast<std::int64_t>(x) +
                                        static_cast<std::int64_t>(y)}
                                : Value{x + y};
            case BinKind::sub:
                return both_int ? Value{static_cast<std::int64_t>(x) -
                                        static_cast<std::int64_t>(y)}
                                : Value{x - y};
            case BinKind::mul:
                return both_int ? Value{static_cast<std::int64_t>(x) *
                                        static_cast<std::int64_t>(y)}
                                : Value{x * y};
            case BinKind::div:
                if (y == 0.0) raise(ErrorKind::value, "division by zero", line);
                return Value{x / y};
            case BinKind::floordiv: {
                if (y == 0.0) raise(ErrorKind::value, "division by zero", line);
                double q = std::floor(x / y);
                return both_int ? Value{static_cast<std::int64_t>(q)} : Value{q};
            }
            case BinKind::mod: {
                if (y == 0.0) raise(ErrorKind::value, "division by zero", line);
                double r = std::fmod(x, y);
                if (r != 0.0 && ((r < 0.0) != (y < 0.0))) r += y;
                return both_int ? Value{static_cast<std::int64_t>(r)} : Value{r};
            }
            case BinKind::pow: {
                double p = std::pow(x, y);
                if (both_int && y >= 0.0 && std::abs(p) < 9.007199254740992e15) {
                    return Value{static_cast<std::int64_t>(p)};
                }
                return Value{p};
            }
        }
        return Value{};
    }

    Value repeat_value(const Value& seq, std::int64_t count, int line) {
        if (count < 0) count = 0;
        if (const auto* s = std::get_if<std::string>(&seq)) {
            check_string(s->size() * static_cast<size_t>(count));
            std::string out;
            for (std::int64_t i = 0; i < count; ++i) out += *s;
            return Value{out};
        }
        const auto& list = std::get<ListVal>(seq);
        check_collection(list.items->size() * static_cast<size_t>(count));
        ValueVec out;
        for (std::int64_t i = 0; i < count; ++i) {
            out.insert(out.end(), list.items->begin(), list.items->end());
        }
        (void)line;
        return make_list(std::move(out));
    }

    Value binary_op(BinKind op, const Value& a, const Value& b, int line) {
        if (is_numeric(a) && is_numeric(b)) return numeric_binary(op, a, b, line);

        if (op == BinKind::add) {
            if (std::holds_alternative<std::string>(a) &&
                std::holds_alternative<std::string>(b)) {
                std::string out = std::get<std::string>(a) + std::get<std::string>(b);
                check_string(out.size());
                return Value{out};
            }
            if (std::holds_alternative<ListVal>(a) && std::holds_alternative<ListVal>(b)) {
                ValueVec out = *std::get<ListVal>(a).items;
                const ValueVec& rhs = *std::get<ListVal>(b).items;
                out.insert(out.end(), rhs.begin(), rhs.end());
                check_collection(out.size());
                return make_list(std::move(out));
            }
            if (std::holds_alternative<TupleVal>(a) &&
                std::holds_alternative<TupleVal>(b)) {
                ValueVec out = *std::get<TupleVal>(a).items;
                const ValueVec& rhs = *std::get<TupleVal>(b).items;
                out.insert(out.end(), rhs.begin(), rhs.end());
                check_collection(out.size());
                return make_tuple(std::move(out));
            }
            bad_operands("+", a, b, line);
        }
        if (op == BinKind::sub) {
            if (std::holds_alternative<SetVal>(a) && std::holds_alternative<SetVal>(b)) {
                const ValueVec& rhs = *std::get<SetVal>(b).items;
                ValueVec out;
                for (const Value& v : *std::get<SetVal>(a).items) {
                    if (!set_contains(rhs, v)) out.push_back(v);
                }
                return SetVal{std::make_shared<ValueVec>(std::move(out))};
            }
            bad_operands("-", a, b, line);
        }
        if (op == BinKind::mul) {
            bool a_seq = std::holds_alternative<std::string>(a) ||
                         std::holds_alternative<ListVal>(a);
            bool b_seq = std::holds_alternative<std::string>(b) ||
                         std::holds_alternative<ListVal>(b);
            if (a_seq && std::holds_alternative<std::int64_t>(b)) {
                return repeat_value(a, std::get<std::int64_t>(b), line);
            }
            if (b_seq && std::holds_alternative<std::int64_t>(a)) {
                return repeat_value(b, std::get<std::int64_t>(a), line);
            }
            bad_operands("*", a, b, line);
        }
        const char* names[] = {"+", "-", "*", "/", "//", "%", "**"};
        bad_operands(names[static_cast<int>(op)], a, b, line);
    }

    bool order_compare(CmpKind op, const Value& a, const Value& b, int line) {
        const char* op_text = op == CmpKind::lt   ? "<"
                              : op == CmpKind::le ? "<="
                              : op == CmpKind::gt ? ">"
                                                  : ">=";
        bool swap = op == CmpKind::gt || op == CmpKind::ge;
        bool with_equal = op == CmpKind::le || op == CmpKind::ge;
        const Value& lhs = swap ? b : a;
        const Value& rhs = swap ? a : b;

        if (is_numeric(lhs) && is_numeric(rhs)) {
            double x = numeric_value(lhs);
            double y = numeric_value(rhs);
            return with_equal ? x <= y : x < y;
        }
        if (std::holds_alternative<std::string>(lhs) &&
            std::holds_alternative<std::string>(rhs)) {
            const auto& x = std::get<std::string>(lhs);
            const auto& y = std::get<std::string>(rhs);
            return with_equal ? x <= y : x < y;
        }
        bool both_lists = std::holds_alternative<ListVal>(lhs) &&
                          std::holds_alternative<ListVal>(rhs);
        bool both_tuples = std::holds_alternative<TupleVal>(lhs) &&
                           std::holds_alternative<TupleVal>(rhs);
        if (both_lists || both_tuples) {
            bool lt = value_less(lhs, rhs);
            bool eq = value_equal(lhs, rhs);
            return with_equal ? (lt || eq) : lt;
        }
        raise(ErrorKind::type,
              std::string("'") + op_text + "' not supported between instances of '" +
                  type_name(a) + "' and '" + type_name(b) + "'",
              line);
    }

    bool contains(const Value& item, const Value& container, int line) {
        if (const auto* s = std::get_if<std::string>(&container)) {
            const auto* needle = std::get_if<std::string>(&item);
            if (!needle) {
                raise(ErrorKind::type,
                      "'in <string>' requires string as left operand, not " +
                          type_name(item),
                      line);
            }
            return s->find(*needle) != std::string::npos;
        }
        if (const auto* l = std::get_if<ListVal>(&container)) {
            for (const Value& v : *l->items) {
                if (value_equal(v, item)) return true;
            }
            return false;
        }
        if (const auto* t = std::get_if<TupleVal>(&container)) {
            for (const Value& v : *t->items) {
                if (value_equal(v, item)) return true;
            }
            return false;
        }
        if (const auto* s = std::get_if<SetVal>(&container)) {
            return set_contains(*s->items, item);
        }
        raise(ErrorKind::type,
              "argument of type '" + type_name(container) + "' is not iterable", line);
    }

    bool identical(const Value& a, const Value& b) {
        if (is_none(a) && is_none(b)) return true;
        if (std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b)) {
            return std::get<bool>(a) == std::get<bool>(b);
        }
        if (std::holds_alternative<ObjectVal>(a) && std::holds_alternative<ObjectVal>(b)) {
            return std::get<ObjectVal>(a).object == std::get<ObjectVal>(b).object;
        }
        if (std::holds_alternative<ListVal>(a) && std::holds_alternative<ListVal>(b)) {
            return std::get<ListVal>(a).items == std::get<ListVal>(b).items;
        }
        if (std::holds_alternative<SetVal>(a) && std::holds_alternative<SetVal>(b)) {
            return std::get<SetVal>(a).items == std::get<SetVal>(b).items;
        }
        return false;
    }

    bool compare(CmpKind op, const Value& a, const Value& b, int line) {
        switch (op) {
            case CmpKind::eq: return value_equal(a, b);
            case CmpKind::ne: return !value_equal(a, b);
            case CmpKind::lt:
            case CmpKind::le:
            case CmpKind::gt:
            case CmpKind::ge: return order_compare(op, a, b, line);
            case CmpKind::in: return contains(a, b, line);
            case CmpKind::not_in: return !contains(a, b, line);
            case CmpKind::is: return identical(a, b);
            case CmpKind::is_not: return !identical(a, b);
        }
        return false;
    }

    // ---- attribute / subscript ----------------------------------------------

    Value attribute(const Value& object, const std::string& name, int line) {
        if (const auto* obj = std::get_if<ObjectVal>(&object)) {
            if (name == "category") return Value{obj->object->category};
            if (name == "xyz") {
                const Vec3& c = obj->object->box.center;
                return make_list({Value{c.x}, Value{c.y}, Value{c.z}});
            }
            if (name == "id") return Value{static_cast<std::int64_t>(obj->object->id)};
            raise(ErrorKind::attribute,
                  "'ObjectAttribute' object has no attribute '" + name + "'", line);
        }
        const std::vector<MethodSpec>* methods = nullptr;
        if (std::holds_alternative<ListVal>(object)) methods = &kListMethods;
        if (std::holds_alternative<SetVal>(object)) methods = &kSetMethods;
        if (std::holds_alternative<std::string>(object)) methods = &kStrMethods;
        if (methods) {
            for (const MethodSpec& m : *methods) {
                if (name == m.name) {
                    return Value{MethodVal{std::make_shared<Value>(object), m.id}};
                }
            }
        }
        raise(ErrorKind::attribute,
              "'" + type_name(object) + "' object has no attribute '" + name + "'", line);
    }

    std::int64_t subscript_index(const Value& index, size_t size, const char* what,
                                 int line) {
        std::int64_t i;
        if (const auto* b = std::get_if<bool>(&index)) {
            i = *b ? 1 : 0;
        } else if (const auto* n = std::get_if<std::int64_t>(&index)) {
            i = *n;
        } else {
            raise(ErrorKind::type,
                  std::string(what) + " indices must be integers, not " + type_name(index),
                  line);
        }
        if (i < 0) i += static_cast<std::int64_t>(size);
        if (i < 0 || i >= static_cast<std::int64_t>(size)) {
            raise(ErrorKind::value, std::string(what) + " index out of range", line);
        }
        return i;
    }

    Value subscript(const Value& object, const Value& index, int line) {
        if (const auto* l = std::get_if<ListVal>(&object)) {
            return (*l->items)[static_cast<size_t>(
                subscript_index(index, l->items->size(), "list", line))];
        }
        if (const auto* t = std::get_if<TupleVal>(&object)) {
            return (*t->items)[static_cast<size_t>(
                subscript_index(index, t->items->size(), "tuple", line))];
        }
        if (const auto* s = std::get_if<std::string>(&object)) {
            std::int64_t i = subscript_index(index, s->size(), "string", line);
            return Value{std::string(1, (*s)[static_cast<size_t>(i)])};
        }
        raise(ErrorKind::type, "'" + type_name(object) + "' object is not subscriptable",
              line);
    }

    ValueVec iterate(const Value& v, int line) {
        if (const auto* l = std::get_if<ListVal>(&v)) return *l->items;
        if (const auto* s = std::get_if<SetVal>(&v)) return *s->items;
        if (const auto* t = std::get_if<TupleVal>(&v)) return *t->items;
        if (const auto* s = std::get_if<std::string>(&v)) {
            ValueVec out;
            out.reserve(s->size());
            for (char c : *s) out.push_back(Value{std::string(1, c)});
            return out;
        }
        raise(ErrorKind::type, "'" + type_name(v) + "' object is not iterable", line);
    }

    // ---- calls ---------------------------------------------------------------

    Value call_value(const Value& callee, CallArgs args) {
        if (const auto* builtin = std::get_if<BuiltinVal>(&callee)) {
            return call_builtin(builtin->id, std::move(args));
        }
        if (const auto* method = std::get_if<MethodVal>(&callee)) {
            return call_method(*method, std::move(args));
        }
        if (const auto* lambda = std::get_if<LambdaVal>(&callee)) {
            return call_lambda(*lambda, std::move(args));
        }
        raise(ErrorKind::type, "'" + type_name(callee) + "' object is not callable",
              args.line);
    }

    Value call_callable(const Value& callee, Value arg, int line) {
        CallArgs args;
        args.line = line;
        args.pos.push_back(std::move(arg));
        return call_value(callee, std::move(args));
    }

    Value call_lambda(const LambdaVal& lambda, CallArgs args) {
        const Lambda& node = *lambda.node;
        if (!args.kw.empty()) {
            raise(ErrorKind::type, "<lambda>() got an unexpected keyword argument '" +
                                       args.kw.front().first + "'",
                  args.line);
        }
        if (args.pos.size() != node.params.size()) {
            raise(ErrorKind::type,
                  "<lambda>() takes " + std::to_string(node.params.size()) +
                      " positional argument" + (node.params.size() == 1 ? "" : "s") +
                      " but " + std::to_string(args.pos.size()) + " were given",
                  args.line);
        }
        std::vector<std::pair<std::string, std::optional<Value>>> saved;
        for (size_t i = 0; i < node.params.size(); ++i) {
            auto it = env_.find(node.params[i]);
            saved.emplace_back(node.params[i],
                               it == env_.end() ? std::optional<Value>{}
                                                : std::optional<Value>{it->second});
            env_[node.params[i]] = args.pos[i];
        }
        Value result;
        try {
            result = eval(*node.body);
        } catch (...) {
            for (auto& [name, value] : saved) {
                if (value) {
                    env_[name] = *value;
                } else {
                    env_.erase(name);
                }
            }
            throw;
        }
        for (auto& [name, value] : saved) {
            if (value) {
                env_[name] = *value;
            } else {
                env_.erase(name);
            }
        }
        return result;
    }

    // Binds call arguments to named parameters, reporting mismatches with
    // `kind` (type errors for builtins, api errors for the scene API).
    std::vector<std::optional<Value>> bind_args(const char* fn, CallArgs& args,
                                                const std::vector<const char*>& names,
                                                size_t required, ErrorKind kind) {
        std::vector<std::optional<Value>> bound(names.size());
        if (args.pos.size() > names.size()) {
            raise(kind,
                  std::string(fn) + "() takes at most " + std::to_string(names.size()) +
                      " arguments but " + std::to_string(args.pos.size()) + " were given",
                  args.line);
        }
        for (size_t i = 0; i < args.pos.size(); ++i) bound[i] = std::move(args.pos[i]);
        for (auto& [key, value] : args.kw) {
            bool found = false;
            for (size_t i = 0; i < names.size(); ++i) {
                if (key == names[i]) {
                    if (bound[i]) {
                        raise(kind,
                              std::string(fn) + "() got multiple values for argument '" +
                                  key + "'",
                              args.line);
                    }
                    bound[i] = std::move(value);
                    found = true;
                    break;
                }
            }
            if (!found) {
                raise(kind,
                      std::string(fn) + "() got an unexpected keyword argument '" + key +
                          "'",
                      args.line);
            }
        }
        for (size_t i = 0; i < required; ++i) {
            if (!bound[i]) {
                raise(kind,
                      std::string(fn) + "() missing required argument: '" +
                          std::string(names[i]) + "'",
                      args.line);
            }
        }
        return bound;
    }

    // ---- scene API bridge -----------------------------------------------------

    ObjectSet value_to_object_set(const Value& v, const char* fn, const char* param,
                                  int line) {
        ValueVec items;
        if (const auto* s = std::get_if<SetVal>(&v)) {
            items = *s->items;
        } else if (const auto* l = std::get_if<ListVal>(&v)) {
            items = *l->items;
        } else if (const auto* t = std::get_if<TupleVal>(&v)) {
            items = *t->items;
        } else {
            raise(ErrorKind::api,
                  std::string(fn) + "(): " + param + " must be a set of objects, not " +
                      type_name(v),
                  line);
        }
        ObjectSet out;
        for (const Value& item : items) {
            const auto* obj = std::get_if<ObjectVal>(&item);
            if (!obj) {
                raise(ErrorKind::api,
                      std::string(fn) + "(): " + param +
                          " must contain only ObjectAttribute instances, found " +
                          type_name(item),
                      line);
            }
            out.push_back(obj->object);
        }
        return out;
    }

    const ObjectInstance& value_to_object(const Value& v, const char* fn,
                                          const char* param, int line) {
        const auto* obj = std::get_if<ObjectVal>(&v);
        if (!obj) {
            raise(ErrorKind::api,
                  std::string(fn) + "(): " + param + " must be an ObjectAttribute, not " +
                      type_name(v),
                  line);
        }
        return *obj->object;
    }

    std::string value_to_string(const Value& v, const char* fn, const char* param,
                                int line) {
        const auto* s = std::get_if<std::string>(&v);
        if (!s) {
            raise(ErrorKind::api,
                  std::string(fn) + "(): " + param + " must be a string, not " +
                      type_name(v),
                  line);
        }
        return *s;
    }

    std::vector<std::string> value_to_string_list(const Value& v, const char* fn,
                                                  const char* param, int line) {
        ValueVec items;
        if (const auto* l = std::get_if<ListVal>(&v)) {
            items = *l->items;
        } else if (const auto* t = std::get_if<TupleVal>(&v)) {
            items = *t->items;
        } else if (const auto* s = std::get_if<SetVal>(&v)) {
            items = *s->items;
        } else {
            raise(ErrorKind::api,
                  std::string(fn) + "(): " + param + " must be a list of strings, not " +
                      type_name(v),
                  line);
        }
        std::vector<std::string> out;
        for (const Value& item : items) {
            const auto* s = std::get_if<std::string>(&item);
            if (!s) {
                raise(ErrorKind::api,
                      std::string(fn) + "(): " + param +
                          " must contain only strings, found " + type_name(item),
                      line);
            }
            out.push_back(*s);
        }
        return out;
    }

    Value object_set_to_value(const ObjectSet& set) {
        ValueVec items;
        items.reserve(set.size());
        for (const ObjectInstance* obj : set) items.push_back(Value{ObjectVal{obj}});
        return make_set(std::move(items));
    }

    Value string_list_to_value(const std::vector<std::string>& strings) {
        ValueVec items;
        items.reserve(strings.size());
        for (const std::string& s : strings) items.push_back(Value{s});
        return make_list(std::move(items));
    }

    Value call_api(int id, CallArgs& args) {
        const char* fn = builtin_name(id);
        try {
            switch (id) {
                case b_scene: {
                    bind_args(fn, args, {}, 0, ErrorKind::api);
                    return object_set_to_value(api_.scene_all());
                }
                case b_filter: {
                    auto bound = bind_args(fn, args, {"object_set", "category"}, 2,
                                           ErrorKind::api);
                    ObjectSet objects =
                        value_to_object_set(*bound[0], fn, "object_set", args.line);
                    std::string category =
                        value_to_string(*bound[1], fn, "category", args.line);
                    return object_set_to_value(api_.filter(objects, category));
                }
                case b_relate: {
                    auto bound = bind_args(
                        fn, args, {"object_set", "reference_object", "relation"}, 3,
                        ErrorKind::api);
                    ObjectSet objects =
                        value_to_object_set(*bound[0], fn, "object_set", args.line);
                    const ObjectInstance& reference =
                        value_to_object(*bound[1], fn, "reference_object", args.line);
                    std::string relation =
                        value_to_string(*bound[2], fn, "relation", args.line);
                    return object_set_to_value(api_.relate(objects, reference, relation));
                }
                case b_relate_agent: {
                    auto bound = bind_args(fn, args, {"object_set", "relation"}, 2,
                                           ErrorKind::api);
                    ObjectSet objects =
                        value_to_object_set(*bound[0], fn, "object_set", args.line);
                    std::string relation =
                        value_to_string(*bound[1], fn, "relation", args.line);
                    return object_set_to_value(api_.relate_agent(objects, relation));
                }
                case b_query_relation: {
                    auto bound = bind_args(
                        fn, args, {"object", "reference_object", "candidate_relations"}, 2,
                        ErrorKind::api);
                    const ObjectInstance& object =
                        value_to_object(*bound[0], fn, "object", args.line);
                    const ObjectInstance& reference =
                        value_to_object(*bound[1], fn, "reference_object", args.line);
                    std::optional<std::vector<std::string>> candidates;
                    if (bound[2] && !is_none(*bound[2])) {
                        candidates = value_to_string_list(*bound[2], fn,
                                                          "candidate_relations", args.line);
                    }
                    return string_list_to_value(
                        api_.query_relation(object, reference, candidates));
                }
                case b_query_relation_agent: {
                    auto bound = bind_args(fn, args, {"object", "candidate_relations"}, 1,
                                           ErrorKind::api);
                    const ObjectInstance& object =
                        value_to_object(*bound[0], fn, "object", args.line);
                    std::optional<std::vector<std::string>> candidates;
                    if (bound[1] && !is_none(*bound[1])) {
                        candidates = value_to_string_list(*bound[1], fn,
                                                          "candidate_relations", args.line);
                    }
                    return string_list_to_value(
                        api_.query_relation_agent(object, candidates));
                }
                case b_query_attribute: {
                    auto bound = bind_args(
                        fn, args,
                        {"object", "attribute_type", "candidate_attribute_values"}, 2,
                        ErrorKind::api);
                    const ObjectInstance& object =
                        value_to_object(*bound[0], fn, "object", args.line);
                    std::string kind =
                        value_to_string(*bound[1], fn, "attribute_type", args.line);
                    std::optional<std::vector<std::string>> candidates;
                    if (bound[2] && !is_none(*bound[2])) {
                        candidates = value_to_string_list(
                            *bound[2], fn, "candidate_attribute_values", args.line);
                    }
                    AttributeValue result =
                        api_.query_attribute(object, kind, candidates);
                    if (const auto* lwh = std::get_if<std::vector<double>>(&result)) {
                        ValueVec items;
                        for (double d : *lwh) items.push_back(Value{d});
                        return make_list(std::move(items));
                    }
                    if (const auto* d = std::get_if<double>(&result)) return Value{*d};
                    return Value{std::get<std::string>(result)};
                }
                case b_query_state: {
                    auto bound = bind_args(fn, args, {"object", "candidate_states"}, 2,
                                           ErrorKind::api);
                    const ObjectInstance& object =
                        value_to_object(*bound[0], fn, "object", args.line);
                    std::vector<std::string> candidates = value_to_string_list(
                        *bound[1], fn, "candidate_states", args.line);
                    return Value{api_.query_state(object, candidates)};
                }
                default: break;
            }
        } catch (const Error& e) {
            raise(ErrorKind::api, e.what(), args.line);
        }
        raise(ErrorKind::api, std::string("unknown api function id"), args.line);
    }

    // ---- builtins --------------------------------------------------------------

    Value call_builtin(int id, CallArgs args) {
        if (id >= b_scene) return call_api(id, args);
        switch (id) {
            case b_print: {
                if (!args.kw.empty()) {
                    raise(ErrorKind::type,
                          "print() got an unexpected keyword argument '" +
                              args.kw.front().first + "'",
                          args.line);
                }
                std::string text;
                for (size_t i = 0; i < args.pos.size(); ++i) {
                    if (i) text += ' ';
                    text += to_str(args.pos[i]);
                }
                append_output(text);
                return Value{};
            }
            case b_len: {
                auto bound = bind_args("len", args, {"obj"}, 1, ErrorKind::type);
                const Value& v = *bound[0];
                if (const auto* s = std::get_if<std::string>(&v)) {
                    return Value{static_cast<std::int64_t>(s->size())};
                }
                if (const auto* l = std::get_if<ListVal>(&v)) {
                    return Value{static_cast<std::int64_t>(l->items->size())};
                }
                if (const auto* st = std::get_if<SetVal>(&v)) {
                    return Value{static_cast<std::int64_t>(st->items->size())};
                }
                if (const auto* t = std::get_if<TupleVal>(&v)) {
                    return Value{static_cast<std::int64_t>(t->items->size())};
                }
                raise(ErrorKind::type,
                      "object of type '" + type_name(v) + "' has no len()", args.line);
            }
            case b_sorted: {
                auto bound = bind_args("sorted", args, {"iterable", "key", "reverse"}, 1,
                                       ErrorKind::type);
                ValueVec items = iterate(*bound[0], args.line);
                Value key = bound[1] ? *bound[1] : Value{};
                bool reverse = bound[2] ? truthy(*bound[2]) : false;
                std::vector<std::pair<Value, Value>> keyed;
                keyed.reserve(items.size());
                for (Value& item : items) {
                    step(args.line);
                    Value k = is_none(key) ? item : call_callable(key, item, args.line);
                    keyed.emplace_back(std::move(k), std::move(item));
                }
                std::stable_sort(keyed.begin(), keyed.end(),
                                 [](const auto& a, const auto& b) {
                                     return value_less(a.first, b.first);
                                 });
                ValueVec out;
                out.reserve(keyed.size());
                for (auto& [k, v] : keyed) out.push_back(std::move(v));
                if (reverse) std::reverse(out.begin(), out.end());
                return make_list(std::move(out));
            }
            case b_min:
            case b_max: {
                const char* fn = id == b_min ? "min" : "max";
                Value key;
                std::vector<std::pair<std::string, Value>> kws = std::move(args.kw);
                for (auto& [k, v] : kws) {
                    if (k == "key") {
                        key = std::move(v);
                    } else {
                        raise(ErrorKind::type,
                              std::string(fn) + "() got an unexpected keyword argument '" +
                                  k + "'",
                              args.line);
                    }
                }
                ValueVec items;
                if (args.pos.size() == 1) {
                    items = iterate(args.pos[0], args.line);
                    if (items.empty()) {
                        raise(ErrorKind::value,
                              std::string(fn) + "() arg is an empty sequence", args.line);
                    }
                } else if (args.pos.size() >= 2) {
                    items = std::move(args.pos);
                } else {
                    raise(ErrorKind::type,
                          std::string(fn) + "() expected at least 1 argument, got 0",
                          args.line);
                }
                size_t best = 0;
                Value best_key =
                    is_none(key) ? items[0] : call_callable(key, items[0], args.line);
                for (size_t i = 1; i < items.size(); ++i) {
                    step(args.line);
                    Value k =
                        is_none(key) ? items[i] : call_callable(key, items[i], args.line);
                    bool better = id == b_min ? order_compare(CmpKind::lt, k, best_key,
                                                              args.line)
                                              : order_compare(CmpKind::gt, k, best_key,
                                                              args.line);
                    if (better) {
                        best = i;
                        best_key = std::move(k);
                    }
                }
                return items[best];
            }
            case b_abs: {
                auto bound = bind_args("abs", args, {"x"}, 1, ErrorKind::type);
                const Value& v = *bound[0];
                if (const auto* i = std::get_if<std::int64_t>(&v)) {
                    return Value{*i < 0 ? -*i : *i};
                }
                if (const auto* b = std::get_if<bool>(&v)) {
                    return Value{static_cast<std::int64_t>(*b ? 1 : 0)};
                }
                if (const auto* d = std::get_if<double>(&v)) return Value{std::abs(*d)};
                raise(ErrorKind::type,
                      "bad operand type for abs(): '" + type_name(v) + "'", args.line);
            }
            case b_sum: {
                auto bound = bind_args("sum", args, {"iterable", "start"}, 1,
                                       ErrorKind::type);
                ValueVec items = iterate(*bound[0], args.line);
                Value acc = bound[1] ? *bound[1] : Value{std::int64_t{0}};
                for (const Value& item : items) {
                    step(args.line);
                    acc = binary_op(BinKind::add, acc, item, args.line);
                }
                return acc;
            }
            case b_round: {
                auto bound = bind_args("round", args, {"number", "ndigits"}, 1,
                                       ErrorKind::type);
                const Value& v = *bound[0];
                if (!is_numeric(v)) {
                    raise(ErrorKind::type,
                          "type " + type_name(v) + " doesn't define __round__ method",
                          args.line);
                }
                double x = numeric_value(v);
                if (!bound[1] || is_none(*bound[1])) {
                    // ties to even, matching mainstream semantics
                    return Value{
                        static_cast<std::int64_t>(std::nearbyint(x))};
                }
                const auto* nd = std::get_if<std::int64_t>(&*bound[1]);
                if (!nd) {
                    raise(ErrorKind::type,
                          "'" + type_name(*bound[1]) +
                              "' object cannot be interpreted as an integer",
                          args.line);
                }
                double scale = std::pow(10.0, static_cast<double>(*nd));
                if (std::holds_alternative<std::int64_t>(v) && *nd >= 0) return v;
                return Value{std::nearbyint(x * scale) / scale};
            }
            case b_set: {
                auto bound = bind_args("set", args, {"iterable"}, 0, ErrorKind::type);
                if (!bound[0]) return make_set({});
                ValueVec items = iterate(*bound[0], args.line);
                check_collection(items.size());
                return make_set(std::move(items));
            }
            case b_list: {
                auto bound = bind_args("list", args, {"iterable"}, 0, ErrorKind::type);
                if (!bound[0]) return make_list({});
                ValueVec items = iterate(*bound[0], args.line);
                check_collection(items.size());
                return make_list(std::move(items));
            }
            case b_str: {
                auto bound = bind_args("str", args, {"object"}, 0, ErrorKind::type);
                if (!bound[0]) return Value{std::string()};
                return Value{to_str(*bound[0])};
            }
            case b_int: {
                auto bound = bind_args("int", args, {"x"}, 0, ErrorKind::type);
                if (!bound[0]) return Value{std::int64_t{0}};
                const Value& v = *bound[0];
                if (const auto* b = std::get_if<bool>(&v)) {
                    return Value{static_cast<std::int64_t>(*b ? 1 : 0)};
                }
                if (const auto* i = std::get_if<std::int64_t>(&v)) return Value{*i};
                if (const auto* d = std::get_if<double>(&v)) {
                    return Value{static_cast<std::int64_t>(std::trunc(*d))};
                }
                if (const auto* s = std::get_if<std::string>(&v)) {
                    std::string t = *s;
                    t.erase(0, t.find_first_not_of(" \t\n"));
                    t.erase(t.find_last_not_of(" \t\n") + 1);
                    try {
                        size_t used = 0;
                        std::int64_t parsed = std::stoll(t, &used, 10);
                        if (used == t.size() && !t.empty()) return Value{parsed};
                    } catch (...) {
                    }
                    raise(ErrorKind::value,
                          "invalid literal for int() with base 10: " +
                              to_repr(Value{*s}),
                          args.line);
                }
                raise(ErrorKind::type,
                      "int() argument must be a string or a number, not '" +
                          type_name(v) + "'",
                      args.line);
            }
            case b_float: {
                auto bound = bind_args("float", args, {"x"}, 0, ErrorKind::type);
                if (!bound[0]) return Value{0.0};
                const Value& v = *bound[0];
                if (is_numeric(v)) return Value{numeric_value(v)};
                if (const auto* s = std::get_if<std::string>(&v)) {
                    std::string t = *s;
                    t.erase(0, t.find_first_not_of(" \t\n"));
                    t.erase(t.find_last_not_of(" \t\n") + 1);
                    try {
                        size_t used = 0;
                        double parsed = std::stod(t, &used);
                        if (used == t.size() && !t.empty()) return Value{parsed};
                    } catch (...) {
                    }
                    raise(ErrorKind::value,
                          "could not convert string to float: " + to_repr(Value{*s}),
                          args.line);
                }
                raise(ErrorKind::type,
                      "float() argument must be a string or a number, not '" +
                          type_name(v) + "'",
                      args.line);
            }
            case b_enumerate: {
                auto bound = bind_args("enumerate", args, {"iterable", "start"}, 1,
                                       ErrorKind::type);
                ValueVec items = iterate(*bound[0], args.line);
                std::int64_t start = 0;
                if (bound[1]) {
                    const auto* s = std::get_if<std::int64_t>(&*bound[1]);
                    if (!s) {
                        raise(ErrorKind::type,
                              "'" + type_name(*bound[1]) +
                                  "' object cannot be interpreted as an integer",
                              args.line);
                    }
                    start = *s;
                }
                ValueVec out;
                out.reserve(items.size());
                for (size_t i = 0; i < items.size(); ++i) {
                    out.push_back(make_tuple(
                        {Value{start + static_cast<std::int64_t>(i)}, items[i]}));
                }
                return make_list(std::move(out));
            }
            case b_range: {
                if (!args.kw.empty()) {
                    raise(ErrorKind::type, "range() takes no keyword arguments",
                          args.line);
                }
                if (args.pos.empty() || args.pos.size() > 3) {
                    raise(ErrorKind::type,
                          "range expected 1 to 3 arguments, got " +
                              std::to_string(args.pos.size()),
                          args.line);
                }
                std::int64_t nums[3] = {0, 0, 1};
                for (size_t i = 0; i < args.pos.size(); ++i) {
                    const auto* n = std::get_if<std::int64_t>(&args.pos[i]);
                    const auto* b = std::get_if<bool>(&args.pos[i]);
                    if (!n && !b) {
                        raise(ErrorKind::type,
                              "'" + type_name(args.pos[i]) +
                                  "' object cannot be interpreted as an integer",
                              args.line);
                    }
                    nums[i] = n ? *n : (*b ? 1 : 0);
                }
                std::int64_t start = 0, stop = 0, stride = 1;
                if (args.pos.size() == 1) {
                    stop = nums[0];
                } else {
                    start = nums[0];
                    stop = nums[1];
                    if (args.pos.size() == 3) stride = nums[2];
                }
                if (stride == 0) {
                    raise(ErrorKind::value, "range() arg 3 must not be zero", args.line);
                }
                ValueVec out;
                if (stride > 0) {
                    for (std::int64_t v = start; v < stop; v += stride) {
                        check_collection(out.size() + 1);
                        out.push_back(Value{v});
                    }
                } else {
                    for (std::int64_t v = start; v > stop; v += stride) {
                        check_collection(out.size() + 1);
                        out.push_back(Value{v});
                    }
                }
                return make_list(std::move(out));
            }
            case b_any:
            case b_all: {
                const char* fn = id == b_any ? "any" : "all";
                auto bound = bind_args(fn, args, {"iterable"}, 1, ErrorKind::type);
                ValueVec items = iterate(*bound[0], args.line);
                if (id == b_any) {
                    for (const Value& v : items) {
                        if (truthy(v)) return Value{true};
                    }
                    return Value{false};
                }
                for (const Value& v : items) {
                    if (!truthy(v)) return Value{false};
                }
                return Value{true};
            }
            default: break;
        }
        raise(ErrorKind::type, "unknown builtin", args.line);
    }

    Value call_method(const MethodVal& method, CallArgs args) {
        const char* name = method_name(method.id);
        Value& receiver = *method.receiver;
        switch (method.id) {
            case m_list_append: {
                auto bound = bind_args("list.append", args, {"object"}, 1,
                                       ErrorKind::type);
                auto& list = std::get<ListVal>(receiver);
                check_collection(list.items->size() + 1);
                list.items->push_back(*bound[0]);
                return Value{};
            }
            case m_list_extend: {
                auto bound = bind_args("list.extend", args, {"iterable"}, 1,
                                       ErrorKind::type);
                ValueVec items = iterate(*bound[0], args.line);
                auto& list = std::get<ListVal>(receiver);
                check_collection(list.items->size() + items.size());
                for (Value& v : items) list.items->push_back(std::move(v));
                return Value{};
            }
            case m_set_add: {
                auto bound = bind_args("set.add", args, {"element"}, 1, ErrorKind::type);
                auto& set = std::get<SetVal>(receiver);
                check_collection(set.items->size() + 1);
                set_insert(*set.items, *bound[0]);
                return Value{};
            }
            case m_set_update: {
                auto bound = bind_args("set.update", args, {"iterable"}, 1,
                                       ErrorKind::type);
                ValueVec items = iterate(*bound[0], args.line);
                auto& set = std::get<SetVal>(receiver);
                check_collection(set.items->size() + items.size());
                for (Value& v : items) set_insert(*set.items, std::move(v));
                return Value{};
            }
            case m_str_join: {
                auto bound = bind_args("str.join", args, {"iterable"}, 1,
                                       ErrorKind::type);
                const std::string& sep = std::get<std::string>(receiver);
                ValueVec items = iterate(*bound[0], args.line);
                std::string out;
                for (size_t i = 0; i < items.size(); ++i) {
                    const auto* s = std::get_if<std::string>(&items[i]);
                    if (!s) {
                        raise(ErrorKind::type,
                              "sequence item " + std::to_string(i) +
                                  ": expected str instance, " + type_name(items[i]) +
                                  " found",
                              args.line);
                    }
                    if (i) out += sep;
                    out += *s;
                    check_string(out.size());
                }
                return Value{out};
            }
            case m_str_lower:
            case m_str_upper: {
                bind_args(name, args, {}, 0, ErrorKind::type);
                std::string s = std::get<std::string>(receiver);
                std::transform(s.begin(), s.end(), s.begin(), [&](unsigned char c) {
                    return method.id == m_str_lower ? std::tolower(c) : std::toupper(c);
                });
                return Value{s};
            }
            case m_str_strip: {
                bind_args("str.strip", args, {}, 0, ErrorKind::type);
                std::string s = std::get<std::string>(receiver);
                size_t begin = s.find_first_not_of(" \t\r\n");
                size_t end = s.find_last_not_of(" \t\r\n");
                if (begin == std::string::npos) return Value{std::string()};
                return Value{s.substr(begin, end - begin + 1)};
            }
            case m_str_split: {
                auto bound = bind_args("str.split", args, {"sep"}, 0, ErrorKind::type);
                const std::string& s = std::get<std::string>(receiver);
                ValueVec parts;
                if (!bound[0] || is_none(*bound[0])) {
                    std::istringstream ss(s);
                    std::string word;
                    while (ss >> word) parts.push_back(Value{word});
                } else {
                    const auto* sep = std::get_if<std::string>(&*bound[0]);
                    if (!sep || sep->empty()) {
                        raise(ErrorKind::value, "empty separator", args.line);
                    }
                    size_t start = 0;
                    while (true) {
                        size_t pos = s.find(*sep, start);
                        if (pos == std::string::npos) {
                            parts.push_back(Value{s.substr(start)});
                            break;
                        }
                        parts.push_back(Value{s.substr(start, pos - start)});
                        start = pos + sep->size();
                    }
                }
                return make_list(std::move(parts));
            }
            case m_str_replace: {
                auto bound = bind_args("str.replace", args, {"old", "new"}, 2,
                                       ErrorKind::type);
                const auto* old_s = std::get_if<std::string>(&*bound[0]);
                const auto* new_s = std::get_if<std::string>(&*bound[1]);
                if (!old_s || !new_s) {
                    raise(ErrorKind::type, "replace() arguments must be str", args.line);
                }
                std::string s = std::get<std::string>(receiver);
                if (old_s->empty()) return Value{s};
                std::string out;
                size_t start = 0;
                while (true) {
                    size_t pos = s.find(*old_s, start);
                    if (pos == std::string::npos) {
                        out += s.substr(start);
                        break;
                    }
                    out += s.substr(start, pos - start);
                    out += *new_s;
                    start = pos + old_s->size();
                    check_string(out.size());
                }
                return Value{out};
            }
            case m_str_startswith:
            case m_str_endswith: {
                auto bound = bind_args(name, args, {"prefix"}, 1, ErrorKind::type);
                const auto* p = std::get_if<std::string>(&*bound[0]);
                if (!p) {
                    raise(ErrorKind::type,
                          std::string(name) + " first arg must be str, not " +
                              type_name(*bound[0]),
                          args.line);
                }
                const std::string& s = std::get<std::string>(receiver);
                if (method.id == m_str_startswith) {
                    return Value{s.rfind(*p, 0) == 0};
                }
                return Value{s.size() >= p->size() &&
                             s.compare(s.size() - p->size(), p->size(), *p) == 0};
            }
            default: break;
        }
        raise(ErrorKind::type, "unknown method", args.line);
    }
};

}  // namespace

void EvalLimits::validate() const {
    if (max_steps <= 0) throw ConfigError("limits.max_steps must be > 0");
    if (max_output_chars <= 0) throw ConfigError("limits.max_output_chars must be > 0");
    if (max_collection_len <= 0) {
        throw ConfigError("limits.max_collection_len must be > 0");
    }
}

EvalLimits EvalLimits::from_json(const nlohmann::json& block) {
    EvalLimits limits;
    if (!block.is_object()) throw ConfigError("limits block must be an object");
    auto get = [&](const char* key, std::int64_t& into) {
        if (block.contains(key)) {
            if (!block[key].is_number_integer()) {
                throw ConfigError(std::string("limits.") + key + " must be an integer");
            }
            into = block[key].get<std::int64_t>();
        }
    };
    get("max_steps", limits.max_steps);
    get("max_output_chars", limits.max_output_chars);
    get("max_collection_len", limits.max_collection_len);
    limits.validate();
    return limits;
}

nlohmann::json EvalLimits::to_json() const {
    return {{"max_steps", max_steps},
            {"max_output_chars", max_output_chars},
            {"max_collection_len", max_collection_len}};
}

std::string error_kind_label(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::syntax: return "SyntaxError-style";
        case ErrorKind::name: return "NameError-style";
        case ErrorKind::type: return "TypeError-style";
        case ErrorKind::value: return "ValueError-style";
        case ErrorKind::attribute: return "AttributeError-style";
        case ErrorKind::limit: return "LimitError-style";
        case ErrorKind::api: return "ApiError-style";
    }
    return "Error";
}

ParseResult parse(const std::string& source) {
    try {
        return std::make_shared<Program>(parse_program(source));
    } catch (const SyntaxException& e) {
        return RuntimeErrorReport{ErrorKind::syntax, e.message, e.line};
    }
}

ExecResult execute(const Program& program, const ToolApi& api, const EvalLimits& limits) {
    Evaluator ev(api, limits);
    return ev.run(program);
}

ExecResult run_program(const std::string& source, const ToolApi& api,
                       const EvalLimits& limits) {
    ParseResult parsed = parse(source);
    if (const auto* err = std::get_if<RuntimeErrorReport>(&parsed)) return *err;
    return execute(*std::get<std::shared_ptr<Program>>(parsed), api, limits);
}

std::string format_feedback(const ExecResult& result) {
    if (const auto* err = std::get_if<RuntimeErrorReport>(&result)) {
        return "Observation: " + error_kind_label(err->kind) + ": " + err->message +
               " (line " + std::to_string(err->line) + ")";
    }
    const Observation& obs = std::get<Observation>(result);
    if (obs.lines.empty()) {
        return "Observation: (no output — use print(...) to display values)";
    }
    std::string out = "Observation: ";
    for (size_t i = 0; i < obs.lines.size(); ++i) {
        if (i) out += '\n';
        out += obs.lines[i];
    }
    return out;
}

bool is_error(const ExecResult& result) {
    return std::holds_alternative<RuntimeErrorReport>(result);
}

}  // namespace situ3d::interp
