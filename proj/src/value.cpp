#include "fieldcalc/value.hpp"

#include <cmath>
#include <sstream>

namespace fieldcalc {

TypeExpr TypeExpr::pair(TypeExpr first, TypeExpr second) {
  auto rep = std::make_shared<const PairRep>(PairRep{std::move(first), std::move(second)});
  TypeExpr t(GroundType::Real);
  t.repr_ = std::move(rep);
  return t;
}

GroundType TypeExpr::ground() const {
  if (!is_ground()) throw InternalError("TypeExpr::ground on pair type");
  return std::get<GroundType>(repr_);
}

const TypeExpr& TypeExpr::first() const {
  if (is_ground()) throw InternalError("TypeExpr::first on ground type");
  return std::get<std::shared_ptr<const PairRep>>(repr_)->first;
}

const TypeExpr& TypeExpr::second() const {
  if (is_ground()) throw InternalError("TypeExpr::second on ground type");
  return std::get<std::shared_ptr<const PairRep>>(repr_)->second;
}

bool TypeExpr::operator==(const TypeExpr& other) const {
  if (is_ground() != other.is_ground()) return false;
  if (is_ground()) return ground() == other.ground();
  return first() == other.first() && second() == other.second();
}

std::string TypeExpr::to_string() const {
  if (is_ground()) return ground() == GroundType::Real ? "real" : "bool";
  return "<" + first().to_string() + "," + second().to_string() + ">";
}

Value Value::number(double x) {
  if (std::isnan(x)) throw InternalError("NaN is not a value");
  if (x == 0.0) x = 0.0;  // normalise -0.0
  return Value(x);
}

Value Value::pair(Value first, Value second) {
  auto rep = std::make_shared<const PairRep>(PairRep{std::move(first), std::move(second)});
  Value v(false);
  v.repr_ = std::move(rep);
  return v;
}

bool Value::as_bool() const {
  if (!is_bool()) throw InternalError("Value::as_bool on non-boolean");
  return std::get<bool>(repr_);
}

double Value::as_number() const {
  if (!is_number()) throw InternalError("Value::as_number on non-number");
  return std::get<double>(repr_);
}

const Value& Value::first() const {
  if (!is_pair()) throw InternalError("Value::first on ground value");
  return std::get<std::shared_ptr<const PairRep>>(repr_)->first;
}

const Value& Value::second() const {
  if (!is_pair()) throw InternalError("Value::second on ground value");
  return std::get<std::shared_ptr<const PairRep>>(repr_)->second;
}

TypeExpr Value::type() const {
  if (is_bool()) return TypeExpr::boolean();
  if (is_number()) return TypeExpr::real();
  return TypeExpr::pair(first().type(), second().type());
}

bool Value::operator==(const Value& other) const {
  if (repr_.index() != other.repr_.index()) return false;
  if (is_bool()) return as_bool() == other.as_bool();
  if (is_number()) return as_number() == other.as_number();
  return first() == other.first() && second() == other.second();
}

std::string Value::to_string() const {
  if (is_bool()) return as_bool() ? "TRUE" : "FALSE";
  if (is_number()) {
    double x = as_number();
    if (x == kPosInf) return "POSINF";
    if (x == kNegInf) return "NEGINF";
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
  }
  return "<" + first().to_string() + ", " + second().to_string() + ">";
}

Ordering value_compare(const Value& a, const Value& b) {
  if (a.is_bool() && b.is_bool()) {
    int x = a.as_bool() ? 1 : 0, y = b.as_bool() ? 1 : 0;
    if (x < y) return Ordering::Less;
    if (x > y) return Ordering::Greater;
    return Ordering::Equal;
  }
  if (a.is_number() && b.is_number()) {
    if (a.as_number() < b.as_number()) return Ordering::Less;
    if (a.as_number() > b.as_number()) return Ordering::Greater;
    return Ordering::Equal;
  }
  if (a.is_pair() && b.is_pair()) {
    Ordering left = value_compare(a.first(), b.first());
    if (left != Ordering::Equal) return left;
    return value_compare(a.second(), b.second());
  }
  throw InternalError("value_compare: shape mismatch between " + a.to_string() + " and " +
                      b.to_string());
}

Value value_min(const std::vector<Value>& vs) {
  if (vs.empty()) throw InternalError("value_min of empty list");
  Value best = vs.front();
  for (size_t i = 1; i < vs.size(); ++i) {
    if (value_lt(vs[i], best)) best = vs[i];
  }
  return best;
}

Value type_top(const TypeExpr& t) {
  if (t.is_ground()) {
    return t.ground() == GroundType::Real ? Value::number(kPosInf) : Value::boolean(true);
  }
  return Value::pair(type_top(t.first()), type_top(t.second()));
}

Value value_key(const Value& v) {
  if (v.is_ground()) return v;
  return value_key(v.first());
}

Ordering key_compare(const Value& a, const Value& b) {
  return value_compare(value_key(a), value_key(b));
}

bool value_has_type(const Value& v, const TypeExpr& t) {
  if (t.is_ground()) {
    return t.ground() == GroundType::Real ? v.is_number() : v.is_bool();
  }
  return v.is_pair() && value_has_type(v.first(), t.first()) &&
         value_has_type(v.second(), t.second());
}

bool ValueTree::operator==(const ValueTree& other) const {
  return root == other.root && children == other.children;
}

std::string ValueTree::to_string() const {
  std::string out = root.to_string();
  if (!children.empty()) {
    out += "(";
    for (size_t i = 0; i < children.size(); ++i) {
      if (i) out += ", ";
      out += children[i].to_string();
    }
    out += ")";
  }
  return out;
}

}  // namespace fieldcalc
