#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fieldcalc/value.hpp"

namespace fieldcalc {

// Refinements of the ground types. nr/zr/pr split the reals by sign,
// znr/zpr are the one-sided closures, real and bool are the trivial
// refinements, false/true are the singleton boolean sorts.
enum class GroundSort { Nr, Zr, Pr, Znr, Zpr, Real, False, True, Bool };

// A sort refines exactly one TypeExpr and mirrors its shape.
class Sort {
 public:
  static Sort ground(GroundSort g) { return Sort(g); }
  static Sort real() { return Sort(GroundSort::Real); }
  static Sort boolean() { return Sort(GroundSort::Bool); }
  static Sort pair(Sort first, Sort second);

  bool is_ground() const { return std::holds_alternative<GroundSort>(repr_); }
  bool is_pair() const { return !is_ground(); }
  GroundSort ground() const;
  const Sort& first() const;
  const Sort& second() const;

  TypeExpr underlying_type() const;

  bool operator==(const Sort& other) const;
  bool operator!=(const Sort& other) const { return !(*this == other); }

  std::string to_string() const;

 private:
  struct PairRep;
  explicit Sort(GroundSort g) : repr_(g) {}
  std::variant<GroundSort, std::shared_ptr<const PairRep>> repr_;
};

struct Sort::PairRep {
  Sort first, second;
};

const char* ground_sort_name(GroundSort g);
std::optional<GroundSort> ground_sort_from_name(const std::string& name);

// Subsorting: set inclusion between denotations, pairs pointwise.
bool subsort(const Sort& a, const Sort& b);

// Least sort above both arguments; they must refine the same type.
Sort sort_lub(const Sort& a, const Sort& b);

// Progressive subsorting: subsorting that also preserves the top.
bool prog_subsort(const Sort& a, const Sort& b);

// Maximum element of the sort's denotation. The nr sort has no
// mathematical maximum over the reals; we use the greatest negative
// double, which no bundled stabilising signature ever relies on.
Value sort_top(const Sort& s);

// Leftmost ground sort in a (possibly nested pair) sort.
Sort sort_key(const Sort& s);

// Identity on ground sorts; for pair sorts, lifts a value whose key
// equals the top of the key sort to the whole top value.
Value canonical_top_apply(const Sort& s, const Value& v);

// Least sort containing the value: sign class for numbers,
// false/true for booleans, componentwise for pairs.
Sort min_sort_of_value(const Value& v);

// Membership of a value in a sort's denotation.
bool sort_member(const Value& v, const Sort& s);

// All sorts refining a type (6 per real, 3 per bool, products for pairs).
std::vector<Sort> sorts_refining(const TypeExpr& t);

bool sort_refines(const Sort& s, const TypeExpr& t);

// Progression annotations: ! certainly, ? possibly. ! is below ?.
enum class Annotation { Bang, Quest };

inline bool annotation_le(Annotation a, Annotation b) {
  return a == Annotation::Bang || b == Annotation::Quest;
}
inline Annotation annotation_lub(Annotation a, Annotation b) {
  return (a == Annotation::Quest || b == Annotation::Quest) ? Annotation::Quest
                                                            : Annotation::Bang;
}
// Composition used when an annotated signature is applied to an
// annotated argument: ! wins over ?.
inline Annotation annotation_compose(Annotation sig, Annotation arg) {
  return (sig == Annotation::Bang || arg == Annotation::Bang) ? Annotation::Bang
                                                              : Annotation::Quest;
}

inline const char* annotation_name(Annotation a) {
  return a == Annotation::Bang ? "!" : "?";
}

struct AnnotatedSort {
  Sort support;
  Annotation annotation;

  bool operator==(const AnnotatedSort& other) const {
    return support == other.support && annotation == other.annotation;
  }
  std::string to_string() const {
    return support.to_string() + "[" + annotation_name(annotation) + "]";
  }
};

// Ordering on annotated sorts: progressive on keys, plain on supports,
// ! below ?.
bool annotated_sort_le(const AnnotatedSort& a, const AnnotatedSort& b);

AnnotatedSort annotated_sort_lub(const AnnotatedSort& a, const AnnotatedSort& b);

// min_sort(g)[!] when g is the maximum of its own minimal sort;
// nullopt otherwise.
std::optional<AnnotatedSort> annotated_sort_of_ground(const Value& g);

}  // namespace fieldcalc
