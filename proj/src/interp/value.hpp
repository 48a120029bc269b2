#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "../scene.hpp"
#include "ast.hpp"

namespace situ3d::interp {

struct Value;
using ValueVec = std::vector<Value>;

/// Lists and sets are reference types (mutation is visible through every
/// binding); tuples are immutable snapshots.
struct ListVal {
    std::shared_ptr<ValueVec> items;
};
struct SetVal {
    std::shared_ptr<ValueVec> items;  // kept sorted unique by value_less
};
struct TupleVal {
    std::shared_ptr<ValueVec> items;
};
struct ObjectVal {
    const ObjectInstance* object = nullptr;
};
struct LambdaVal {
    const Lambda* node = nullptr;
    int line = 1;
};
struct BuiltinVal {
    int id = -1;
};
struct MethodVal {
    std::shared_ptr<Value> receiver;
    int id = -1;
};

using ValueVariant = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                                  ListVal, SetVal, TupleVal, ObjectVal, LambdaVal,
                                  BuiltinVal, MethodVal>;

struct Value : ValueVariant {
    using ValueVariant::ValueVariant;
    Value() : ValueVariant(std::monostate{}) {}
};

Value make_list(ValueVec items = {});
Value make_tuple(ValueVec items);
/// Builds a set, sorting and de-duplicating the given items.
Value make_set(ValueVec items = {});

bool is_none(const Value& v);
bool is_numeric(const Value& v);       // bool, int or float
double numeric_value(const Value& v);  // bool -> 0/1

/// True/False per mainstream scripting semantics (empty containers false).
bool truthy(const Value& v);

/// Cross-type numeric equality (1 == 1.0 == True); deep for containers.
bool value_equal(const Value& a, const Value& b);

/// Deterministic total order used for set storage and sorted() defaults:
/// none < numbers < str < tuple < list < set < objects < callables.
/// Objects order by id, strings lexicographically.
bool value_less(const Value& a, const Value& b);

/// Inserts into a sorted-unique set vector; returns false when the value was
/// already present. Throws TypeError (via InterpSignal) for unhashable values.
bool set_insert(ValueVec& items, Value v);
bool set_contains(const ValueVec& items, const Value& v);

/// str(v): strings render raw; containers use repr for their elements.
std::string to_str(const Value& v);
/// repr(v): strings quoted, floats shortest round-trip, sets "{...}"/"set()".
std::string to_repr(const Value& v);

std::string type_name(const Value& v);

/// Raised inside evaluation for value-level type errors (unhashable, ...).
/// The evaluator converts it into a RuntimeErrorReport with a line number.
struct ValueTypeError {
    std::string message;
};

}  // namespace situ3d::interp
