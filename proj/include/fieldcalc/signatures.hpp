#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fieldcalc/sorts.hpp"
#include "fieldcalc/value.hpp"

namespace fieldcalc {

struct TypeSignature {
  TypeExpr result = TypeExpr::real();
  std::vector<TypeExpr> args;

  // Return type equals first argument type, arity >= 1.
  bool is_diffusion_shape() const;

  bool operator==(const TypeSignature& other) const;
  std::string to_string() const;
};

struct SortSignature {
  Sort result = Sort::real();
  std::vector<Sort> args;

  bool operator==(const SortSignature& other) const;
  bool operator!=(const SortSignature& other) const { return !(*this == other); }
  std::string to_string() const;
};

struct AnnotatedSignature {
  SortSignature support;
  Annotation annotation = Annotation::Bang;

  bool operator==(const AnnotatedSignature& other) const {
    return support == other.support && annotation == other.annotation;
  }
  std::string to_string() const {
    return support.to_string() + "[" + annotation_name(annotation) + "]";
  }
};

bool signature_refines(const SortSignature& sig, const TypeSignature& type_sig);

// Subsigning: covariant result, contravariant arguments.
bool subsigning(const SortSignature& a, const SortSignature& b);

// Stabilising subsigning: progressive on result and first argument,
// plain contravariant on the rest.
bool stab_subsigning(const SortSignature& a, const SortSignature& b);

// Annotated subsigning: stabilising subsigning plus annotation order.
bool ann_subsigning(const AnnotatedSignature& a, const AnnotatedSignature& b);

// result <|  first argument.
bool signature_progressive(const SortSignature& sig);

// Signatures applicable to the given argument sorts (pointwise subsort).
std::vector<SortSignature> applicable_signatures(const std::vector<SortSignature>& q,
                                                 const std::vector<Sort>& args);

// Element of q applicable to args whose result sort is below every other
// applicable result; nullopt when nothing applies.
std::optional<SortSignature> most_specific(const std::vector<SortSignature>& q,
                                           const std::vector<Sort>& args);

struct AnnotatedMatch {
  AnnotatedSignature signature;
  Annotation composed;  // signature annotation composed with the argument's
};

// Most specific annotated signature for a first argument of sort
// `first` carrying annotation `incoming` and remaining argument sorts
// `rest`. Applicability additionally requires progressive subsorting
// between the keys of the first argument sorts. The minimised quantity
// is the result sort with the composed annotation.
std::optional<AnnotatedMatch> most_specific_annotated(const std::vector<AnnotatedSignature>& q,
                                                      const Sort& first, Annotation incoming,
                                                      const std::vector<Sort>& rest);

// No element strictly below another under the given subsigning order.
bool is_minimised(const std::vector<SortSignature>& q,
                  bool (*order)(const SortSignature&, const SortSignature&));
bool is_minimised_annotated(const std::vector<AnnotatedSignature>& q);

// Keeps only the minimal elements under plain subsigning.
std::vector<SortSignature> minimals(std::vector<SortSignature> q);

// Exhaustive determinism check over every refining argument tuple: when
// the applicable subset is nonempty, some applicable element's result is
// below the results of all others. Returns a violating tuple if any.
std::optional<std::vector<Sort>> determinism_violation(const std::vector<SortSignature>& q,
                                                       const std::vector<TypeExpr>& arg_types);

struct AnnotatedDeterminismViolation {
  Sort first = Sort::real();
  Annotation incoming = Annotation::Bang;
  std::vector<Sort> rest;
};

std::optional<AnnotatedDeterminismViolation> annotated_determinism_violation(
    const std::vector<AnnotatedSignature>& q, const std::vector<TypeExpr>& arg_types);

}  // namespace fieldcalc
