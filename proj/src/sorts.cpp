#include "fieldcalc/sorts.hpp"

#include <array>

namespace fieldcalc {

namespace {

// Sign/member classes: bit 0 = negative, bit 1 = zero, bit 2 = positive
// for real sorts; bit 0 = FALSE, bit 1 = TRUE for bool sorts. Subsorting
// is subset inclusion on these masks.
int ground_mask(GroundSort g) {
  switch (g) {
    case GroundSort::Nr: return 0b001;
    case GroundSort::Zr: return 0b010;
    case GroundSort::Pr: return 0b100;
    case GroundSort::Znr: return 0b011;
    case GroundSort::Zpr: return 0b110;
    case GroundSort::Real: return 0b111;
    case GroundSort::False: return 0b01;
    case GroundSort::True: return 0b10;
    case GroundSort::Bool: return 0b11;
  }
  throw InternalError("unreachable ground sort");
}

bool is_real_sort(GroundSort g) {
  switch (g) {
    case GroundSort::False:
    case GroundSort::True:
    case GroundSort::Bool: return false;
    default: return true;
  }
}

GroundSort real_sort_from_mask(int mask) {
  switch (mask) {
    case 0b001: return GroundSort::Nr;
    case 0b010: return GroundSort::Zr;
    case 0b100: return GroundSort::Pr;
    case 0b011: return GroundSort::Znr;
    case 0b110: return GroundSort::Zpr;
    default: return GroundSort::Real;  // 0b101 has no sort of its own
  }
}

GroundSort bool_sort_from_mask(int mask) {
  switch (mask) {
    case 0b01: return GroundSort::False;
    case 0b10: return GroundSort::True;
    default: return GroundSort::Bool;
  }
}

}  // namespace

Sort Sort::pair(Sort first, Sort second) {
  auto rep = std::make_shared<const PairRep>(PairRep{std::move(first), std::move(second)});
  Sort s(GroundSort::Real);
  s.repr_ = std::move(rep);
  return s;
}

GroundSort Sort::ground() const {
  if (!is_ground()) throw InternalError("Sort::ground on pair sort");
  return std::get<GroundSort>(repr_);
}

const Sort& Sort::first() const {
  if (is_ground()) throw InternalError("Sort::first on ground sort");
  return std::get<std::shared_ptr<const PairRep>>(repr_)->first;
}

const Sort& Sort::second() const {
  if (is_ground()) throw InternalError("Sort::second on ground sort");
  return std::get<std::shared_ptr<const PairRep>>(repr_)->second;
}

TypeExpr Sort::underlying_type() const {
  if (is_ground()) {
    return is_real_sort(ground()) ? TypeExpr::real() : TypeExpr::boolean();
  }
  return TypeExpr::pair(first().underlying_type(), second().underlying_type());
}

bool Sort::operator==(const Sort& other) const {
  if (is_ground() != other.is_ground()) return false;
  if (is_ground()) return ground() == other.ground();
  return first() == other.first() && second() == other.second();
}

std::string Sort::to_string() const {
  if (is_ground()) return ground_sort_name(ground());
  return "<" + first().to_string() + "," + second().to_string() + ">";
}

const char* ground_sort_name(GroundSort g) {
  switch (g) {
    case GroundSort::Nr: return "nr";
    case GroundSort::Zr: return "zr";
    case GroundSort::Pr: return "pr";
    case GroundSort::Znr: return "znr";
    case GroundSort::Zpr: return "zpr";
    case GroundSort::Real: return "real";
    case GroundSort::False: return "false";
    case GroundSort::True: return "true";
    case GroundSort::Bool: return "bool";
  }
  throw InternalError("unreachable ground sort");
}

std::optional<GroundSort> ground_sort_from_name(const std::string& name) {
  static const std::array<GroundSort, 9> all = {
      GroundSort::Nr,  GroundSort::Zr,   GroundSort::Pr,
      GroundSort::Znr, GroundSort::Zpr,  GroundSort::Real,
      GroundSort::False, GroundSort::True, GroundSort::Bool};
  for (GroundSort g : all) {
    if (name == ground_sort_name(g)) return g;
  }
  return std::nullopt;
}

bool subsort(const Sort& a, const Sort& b) {
  if (a.is_ground() && b.is_ground()) {
    if (is_real_sort(a.ground()) != is_real_sort(b.ground())) {
      throw InternalError("subsort across ground types: " + a.to_string() + " vs " +
                          b.to_string());
    }
    int x = ground_mask(a.ground()), y = ground_mask(b.ground());
    return (x & ~y) == 0;
  }
  if (a.is_pair() && b.is_pair()) {
    return subsort(a.first(), b.first()) && subsort(a.second(), b.second());
  }
  throw InternalError("subsort: sorts refine different types");
}

Sort sort_lub(const Sort& a, const Sort& b) {
  if (a.is_ground() && b.is_ground()) {
    if (is_real_sort(a.ground()) != is_real_sort(b.ground())) {
      throw InternalError("sort_lub across ground types");
    }
    int mask = ground_mask(a.ground()) | ground_mask(b.ground());
    return Sort::ground(is_real_sort(a.ground()) ? real_sort_from_mask(mask)
                                                 : bool_sort_from_mask(mask));
  }
  if (a.is_pair() && b.is_pair()) {
    return Sort::pair(sort_lub(a.first(), b.first()), sort_lub(a.second(), b.second()));
  }
  throw InternalError("sort_lub: sorts refine different types");
}

bool prog_subsort(const Sort& a, const Sort& b) {
  if (a.is_ground() && b.is_ground()) {
    return subsort(a, b) && sort_top(a) == sort_top(b);
  }
  if (a.is_pair() && b.is_pair()) {
    return prog_subsort(a.first(), b.first()) && prog_subsort(a.second(), b.second());
  }
  throw InternalError("prog_subsort: sorts refine different types");
}

Value sort_top(const Sort& s) {
  if (s.is_ground()) {
    switch (s.ground()) {
      case GroundSort::Nr: return Value::number(-std::numeric_limits<double>::denorm_min());
      case GroundSort::Zr:
      case GroundSort::Znr: return Value::number(0.0);
      case GroundSort::Pr:
      case GroundSort::Zpr:
      case GroundSort::Real: return Value::number(kPosInf);
      case GroundSort::False: return Value::boolean(false);
      case GroundSort::True:
      case GroundSort::Bool: return Value::boolean(true);
    }
    throw InternalError("unreachable ground sort");
  }
  return Value::pair(sort_top(s.first()), sort_top(s.second()));
}

Sort sort_key(const Sort& s) {
  if (s.is_ground()) return s;
  return sort_key(s.first());
}

Value canonical_top_apply(const Sort& s, const Value& v) {
  if (s.is_ground()) return v;
  if (value_key(v) == sort_top(sort_key(s))) return sort_top(s);
  return v;
}

Sort min_sort_of_value(const Value& v) {
  if (v.is_bool()) {
    return Sort::ground(v.as_bool() ? GroundSort::True : GroundSort::False);
  }
  if (v.is_number()) {
    double x = v.as_number();
    if (x < 0) return Sort::ground(GroundSort::Nr);
    if (x > 0) return Sort::ground(GroundSort::Pr);
    return Sort::ground(GroundSort::Zr);
  }
  return Sort::pair(min_sort_of_value(v.first()), min_sort_of_value(v.second()));
}

bool sort_member(const Value& v, const Sort& s) {
  if (s.is_ground()) {
    if (is_real_sort(s.ground())) {
      if (!v.is_number()) return false;
      double x = v.as_number();
      int cls = x < 0 ? 0b001 : (x > 0 ? 0b100 : 0b010);
      return (ground_mask(s.ground()) & cls) != 0;
    }
    if (!v.is_bool()) return false;
    int cls = v.as_bool() ? 0b10 : 0b01;
    return (ground_mask(s.ground()) & cls) != 0;
  }
  return v.is_pair() && sort_member(v.first(), s.first()) &&
         sort_member(v.second(), s.second());
}

std::vector<Sort> sorts_refining(const TypeExpr& t) {
  if (t.is_ground()) {
    if (t.ground() == GroundType::Real) {
      return {Sort::ground(GroundSort::Nr),  Sort::ground(GroundSort::Zr),
              Sort::ground(GroundSort::Pr),  Sort::ground(GroundSort::Znr),
              Sort::ground(GroundSort::Zpr), Sort::ground(GroundSort::Real)};
    }
    return {Sort::ground(GroundSort::False), Sort::ground(GroundSort::True),
            Sort::ground(GroundSort::Bool)};
  }
  std::vector<Sort> out;
  for (const Sort& a : sorts_refining(t.first())) {
    for (const Sort& b : sorts_refining(t.second())) {
      out.push_back(Sort::pair(a, b));
    }
  }
  return out;
}

bool sort_refines(const Sort& s, const TypeExpr& t) {
  if (t.is_ground()) {
    return s.is_ground() && is_real_sort(s.ground()) == (t.ground() == GroundType::Real);
  }
  return s.is_pair() && sort_refines(s.first(), t.first()) &&
         sort_refines(s.second(), t.second());
}

bool annotated_sort_le(const AnnotatedSort& a, const AnnotatedSort& b) {
  return prog_subsort(sort_key(a.support), sort_key(b.support)) &&
         subsort(a.support, b.support) && annotation_le(a.annotation, b.annotation);
}

AnnotatedSort annotated_sort_lub(const AnnotatedSort& a, const AnnotatedSort& b) {
  return AnnotatedSort{sort_lub(a.support, b.support),
                       annotation_lub(a.annotation, b.annotation)};
}

std::optional<AnnotatedSort> annotated_sort_of_ground(const Value& g) {
  if (!g.is_ground()) return std::nullopt;
  Sort s = min_sort_of_value(g);
  if (sort_top(s) != g) return std::nullopt;
  return AnnotatedSort{s, Annotation::Bang};
}

}  // namespace fieldcalc
