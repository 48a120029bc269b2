#include "value.hpp"

#include <algorithm>

#include "../geometry.hpp"

namespace situ3d::interp {

namespace {

enum Rank {
    rank_none = 0,
    rank_number = 1,
    rank_str = 2,
    rank_tuple = 3,
    rank_list = 4,
    rank_set = 5,
    rank_object = 6,
    rank_callable = 7,
};

int rank_of(const Value& v) {
    struct Visitor {
        int operator()(const std::monostate&) { return rank_none; }
        int operator()(bool) { return rank_number; }
        int operator()(std::int64_t) { return rank_number; }
        int operator()(double) { return rank_number; }
        int operator()(const std::string&) { return rank_str; }
        int operator()(const ListVal&) { return rank_list; }
        int operator()(const SetVal&) { return rank_set; }
        int operator()(const TupleVal&) { return rank_tuple; }
        int operator()(const ObjectVal&) { return rank_object; }
        int operator()(const LambdaVal&) { return rank_callable; }
        int operator()(const BuiltinVal&) { return rank_callable; }
        int operator()(const MethodVal&) { return rank_callable; }
    };
    return std::visit(Visitor{}, static_cast<const ValueVariant&>(v));
}

bool vec_equal(const ValueVec& a, const ValueVec& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!value_equal(a[i], b[i])) return false;
    }
    return true;
}

bool vec_less(const ValueVec& a, const ValueVec& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        if (value_less(a[i], b[i])) return true;
        if (value_less(b[i], a[i])) return false;
    }
    return a.size() < b.size();
}

bool is_hashable(const Value& v) {
    if (std::holds_alternative<ListVal>(v) || std::holds_alternative<SetVal>(v)) {
        return false;
    }
    if (const auto* t = std::get_if<TupleVal>(&v)) {
        for (const Value& item : *t->items) {
            if (!is_hashable(item)) return false;
        }
    }
    return true;
}

std::string join_items(const ValueVec& items, const char* open, const char* close) {
    std::string out = open;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += to_repr(items[i]);
    }
    out += close;
    return out;
}

}  // namespace

Value make_list(ValueVec items) {
    return ListVal{std::make_shared<ValueVec>(std::move(items))};
}

Value make_tuple(ValueVec items) {
    return TupleVal{std::make_shared<ValueVec>(std::move(items))};
}

Value make_set(ValueVec items) {
    auto storage = std::make_shared<ValueVec>();
    for (Value& v : items) set_insert(*storage, std::move(v));
    return SetVal{std::move(storage)};
}

bool is_none(const Value& v) {
    return std::holds_alternative<std::monostate>(v);
}

bool is_numeric(const Value& v) {
    return std::holds_alternative<bool>(v) || std::holds_alternative<std::int64_t>(v) ||
           std::holds_alternative<double>(v);
}

double numeric_value(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

bool truthy(const Value& v) {
    struct Visitor {
        bool operator()(const std::monostate&) { return false; }
        bool operator()(bool b) { return b; }
        bool operator()(std::int64_t i) { return i != 0; }
        bool operator()(double d) { return d != 0.0; }
        bool operator()(const std::string& s) { return !s.empty(); }
        bool operator()(const ListVal& l) { return !l.items->empty(); }
        bool operator()(const SetVal& s) { return !s.items->empty(); }
        bool operator()(const TupleVal& t) { return !t.items->empty(); }
        bool operator()(const ObjectVal&) { return true; }
        bool operator()(const LambdaVal&) { return true; }
        bool operator()(const BuiltinVal&) { return true; }
        bool operator()(const MethodVal&) { return true; }
    };
    return std::visit(Visitor{}, static_cast<const ValueVariant&>(v));
}

bool value_equal(const Value& a, const Value& b) {
    if (is_numeric(a) && is_numeric(b)) return numeric_value(a) == numeric_value(b);
    if (a.index() != b.index()) {
        // list vs tuple etc. compare unequal, matching mainstream semantics
        return false;
    }
    struct Visitor {
        const Value& b;
        bool operator()(const std::monostate&) { return true; }
        bool operator()(bool) { return false; }          // handled numerically above
        bool operator()(std::int64_t) { return false; }  // handled numerically above
        bool operator()(double) { return false; }        // handled numerically above
        bool operator()(const std::string& s) { return s == std::get<std::string>(b); }
        bool operator()(const ListVal& l) {
            return vec_equal(*l.items, *std::get<ListVal>(b).items);
        }
        bool operator()(const SetVal& s) {
            return vec_equal(*s.items, *std::get<SetVal>(b).items);
        }
        bool operator()(const TupleVal& t) {
            return vec_equal(*t.items, *std::get<TupleVal>(b).items);
        }
        bool operator()(const ObjectVal& o) { return o.object == std::get<ObjectVal>(b).object; }
        bool operator()(const LambdaVal& l) { return l.node == std::get<LambdaVal>(b).node; }
        bool operator()(const BuiltinVal& f) { return f.id == std::get<BuiltinVal>(b).id; }
        bool operator()(const MethodVal& m) {
            const MethodVal& other = std::get<MethodVal>(b);
            return m.id == other.id && m.receiver == other.receiver;
        }
    };
    return std::visit(Visitor{b}, static_cast<const ValueVariant&>(a));
}

bool value_less(const Value& a, const Value& b) {
    int ra = rank_of(a);
    int rb = rank_of(b);
    if (ra != rb) return ra < rb;
    switch (ra) {
        case rank_none: return false;
        case rank_number: return numeric_value(a) < numeric_value(b);
        case rank_str: return std::get<std::string>(a) < std::get<std::string>(b);
        case rank_tuple:
            return vec_less(*std::get<TupleVal>(a).items, *std::get<TupleVal>(b).items);
        case rank_list:
            return vec_less(*std::get<ListVal>(a).items, *std::get<ListVal>(b).items);
        case rank_set:
            return vec_less(*std::get<SetVal>(a).items, *std::get<SetVal>(b).items);
        case rank_object:
            return std::get<ObjectVal>(a).object->id < std::get<ObjectVal>(b).object->id;
        default: {
            auto id_of = [](const Value& v) -> std::int64_t {
                if (const auto* f = std::get_if<BuiltinVal>(&v)) return f->id;
                if (const auto* m = std::get_if<MethodVal>(&v)) return 1000 + m->id;
                return reinterpret_cast<std::intptr_t>(std::get<LambdaVal>(v).node);
            };
            return id_of(a) < id_of(b);
        }
    }
}

bool set_insert(ValueVec& items, Value v) {
    if (!is_hashable(v)) {
        throw ValueTypeError{"unhashable type: '" + type_name(v) + "'"};
    }
    auto it = std::lower_bound(items.begin(), items.end(), v, value_less);
    if (it != items.end() && value_equal(*it, v)) return false;
    items.insert(it, std::move(v));
    return true;
}

bool set_contains(const ValueVec& items, const Value& v) {
    auto it = std::lower_bound(items.begin(), items.end(), v, value_less);
    return it != items.end() && value_equal(*it, v);
}

std::string to_str(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    return to_repr(v);
}

std::string to_repr(const Value& v) {
    struct Visitor {
        std::string operator()(const std::monostate&) { return "None"; }
        std::string operator()(bool b) { return b ? "True" : "False"; }
        std::string operator()(std::int64_t i) { return std::to_string(i); }
        std::string operator()(double d) { return format_double(d); }
        std::string operator()(const std::string& s) {
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
        std::string operator()(const ListVal& l) { return join_items(*l.items, "[", "]"); }
        std::string operator()(const SetVal& s) {
            if (s.items->empty()) return "set()";
            return join_items(*s.items, "{", "}");
        }
        std::string operator()(const TupleVal& t) {
            if (t.items->size() == 1) return "(" + to_repr((*t.items)[0]) + ",)";
            return join_items(*t.items, "(", ")");
        }
        std::string operator()(const ObjectVal& o) {
            return "ObjectAttribute(id=" + std::to_string(o.object->id) + ", category='" +
                   o.object->category + "')";
        }
        std::string operator()(const LambdaVal&) { return "<lambda>"; }
        std::string operator()(const BuiltinVal&) { return "<built-in function>"; }
        std::string operator()(const MethodVal&) { return "<built-in method>"; }
    };
    return std::visit(Visitor{}, static_cast<const ValueVariant&>(v));
}

std::string type_name(const Value& v) {
    struct Visitor {
        std::string operator()(const std::monostate&) { return "NoneType"; }
        std::string operator()(bool) { return "bool"; }
        std::string operator()(std::int64_t) { return "int"; }
        std::string operator()(double) { return "float"; }
        std::string operator()(const std::string&) { return "str"; }
        std::string operator()(const ListVal&) { return "list"; }
        std::string operator()(const SetVal&) { return "set"; }
        std::string operator()(const TupleVal&) { return "tuple"; }
        std::string operator()(const ObjectVal&) { return "ObjectAttribute"; }
        std::string operator()(const LambdaVal&) { return "function"; }
        std::string operator()(const BuiltinVal&) { return "builtin_function_or_method"; }
        std::string operator()(const MethodVal&) { return "builtin_function_or_method"; }
    };
    return std::visit(Visitor{}, static_cast<const ValueVariant&>(v));
}

}  // namespace situ3d::interp
