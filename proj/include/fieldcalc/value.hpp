#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace fieldcalc {

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class GroundType { Real, Bool };

// Monomorphic types: a ground type or an arbitrarily nested pair.
class TypeExpr {
 public:
  static TypeExpr real() { return TypeExpr(GroundType::Real); }
  static TypeExpr boolean() { return TypeExpr(GroundType::Bool); }
  static TypeExpr pair(TypeExpr first, TypeExpr second);

  bool is_ground() const { return std::holds_alternative<GroundType>(repr_); }
  bool is_pair() const { return !is_ground(); }
  GroundType ground() const;
  const TypeExpr& first() const;
  const TypeExpr& second() const;

  bool operator==(const TypeExpr& other) const;
  bool operator!=(const TypeExpr& other) const { return !(*this == other); }

  std::string to_string() const;

 private:
  struct PairRep;
  explicit TypeExpr(GroundType g) : repr_(g) {}
  std::variant<GroundType, std::shared_ptr<const PairRep>> repr_;
};

struct TypeExpr::PairRep {
  TypeExpr first, second;
};

enum class Ordering { Less, Equal, Greater };

// Runtime values: booleans, doubles (with POSINF/NEGINF as +/-infinity,
// NaN forbidden, -0.0 normalised to 0), and nested pairs. Immutable;
// pairs share structure so copies are cheap.
class Value {
 public:
  static Value boolean(bool b) { return Value(b); }
  static Value number(double x);
  static Value pair(Value first, Value second);

  bool is_bool() const { return std::holds_alternative<bool>(repr_); }
  bool is_number() const { return std::holds_alternative<double>(repr_); }
  bool is_ground() const { return is_bool() || is_number(); }
  bool is_pair() const { return !is_ground(); }

  bool as_bool() const;
  double as_number() const;
  const Value& first() const;
  const Value& second() const;

  TypeExpr type() const;

  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }

  std::string to_string() const;

 private:
  struct PairRep;
  explicit Value(bool b) : repr_(b) {}
  explicit Value(double x) : repr_(x) {}
  std::variant<bool, double, std::shared_ptr<const PairRep>> repr_;
};

struct Value::PairRep {
  Value first, second;
};

// Total order per type: FALSE < TRUE, numerics by value, pairs
// lexicographically. Both values must share one shape.
Ordering value_compare(const Value& a, const Value& b);

inline bool value_le(const Value& a, const Value& b) {
  return value_compare(a, b) != Ordering::Greater;
}
inline bool value_lt(const Value& a, const Value& b) {
  return value_compare(a, b) == Ordering::Less;
}

// Least element of a nonempty list under value_compare.
Value value_min(const std::vector<Value>& vs);

// Maximum element of a type: POSINF / TRUE, componentwise for pairs.
Value type_top(const TypeExpr& t);

// Leftmost ground component of a (possibly nested pair) value.
Value value_key(const Value& v);

// Compares by leftmost keys only; a weak ordering on each type.
Ordering key_compare(const Value& a, const Value& b);

inline bool key_le(const Value& a, const Value& b) {
  return key_compare(a, b) != Ordering::Greater;
}
inline bool key_lt(const Value& a, const Value& b) {
  return key_compare(a, b) == Ordering::Less;
}
inline bool key_eq(const Value& a, const Value& b) {
  return key_compare(a, b) == Ordering::Equal;
}

// Checks that v is shaped exactly like t.
bool value_has_type(const Value& v, const TypeExpr& t);

// Ordered tree of all sub-results of one device evaluation. Roots of
// subtrees are what neighbours consume.
struct ValueTree {
  Value root;
  std::vector<ValueTree> children;

  bool operator==(const ValueTree& other) const;
  bool operator!=(const ValueTree& other) const { return !(*this == other); }

  std::string to_string() const;
};

inline ValueTree leaf(Value v) { return ValueTree{std::move(v), {}}; }

using SensorState = std::map<std::string, Value>;

}  // namespace fieldcalc
