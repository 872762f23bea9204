#include "fieldcalc/signatures.hpp"

namespace fieldcalc {

bool TypeSignature::is_diffusion_shape() const {
  return !args.empty() && args.front() == result;
}

bool TypeSignature::operator==(const TypeSignature& other) const {
  return result == other.result && args == other.args;
}

std::string TypeSignature::to_string() const {
  std::string out = result.to_string() + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].to_string();
  }
  return out + ")";
}

bool SortSignature::operator==(const SortSignature& other) const {
  return result == other.result && args == other.args;
}

std::string SortSignature::to_string() const {
  std::string out = result.to_string() + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].to_string();
  }
  return out + ")";
}

bool signature_refines(const SortSignature& sig, const TypeSignature& type_sig) {
  if (sig.args.size() != type_sig.args.size()) return false;
  if (!sort_refines(sig.result, type_sig.result)) return false;
  for (size_t i = 0; i < sig.args.size(); ++i) {
    if (!sort_refines(sig.args[i], type_sig.args[i])) return false;
  }
  return true;
}

bool subsigning(const SortSignature& a, const SortSignature& b) {
  if (a.args.size() != b.args.size()) return false;
  if (!subsort(a.result, b.result)) return false;
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (!subsort(b.args[i], a.args[i])) return false;
  }
  return true;
}

bool stab_subsigning(const SortSignature& a, const SortSignature& b) {
  if (a.args.size() != b.args.size() || a.args.empty()) return false;
  if (!prog_subsort(a.result, b.result)) return false;
  if (!prog_subsort(b.args[0], a.args[0])) return false;
  for (size_t i = 1; i < a.args.size(); ++i) {
    if (!subsort(b.args[i], a.args[i])) return false;
  }
  return true;
}

bool ann_subsigning(const AnnotatedSignature& a, const AnnotatedSignature& b) {
  return stab_subsigning(a.support, b.support) && annotation_le(a.annotation, b.annotation);
}

bool signature_progressive(const SortSignature& sig) {
  return !sig.args.empty() && prog_subsort(sig.result, sig.args.front());
}

std::vector<SortSignature> applicable_signatures(const std::vector<SortSignature>& q,
                                                 const std::vector<Sort>& args) {
  std::vector<SortSignature> out;
  for (const auto& sig : q) {
    if (sig.args.size() != args.size()) continue;
    bool ok = true;
    for (size_t i = 0; i < args.size() && ok; ++i) {
      ok = subsort(args[i], sig.args[i]);
    }
    if (ok) out.push_back(sig);
  }
  return out;
}

std::optional<SortSignature> most_specific(const std::vector<SortSignature>& q,
                                           const std::vector<Sort>& args) {
  std::vector<SortSignature> applicable = applicable_signatures(q, args);
  if (applicable.empty()) return std::nullopt;
  for (const auto& candidate : applicable) {
    bool least = true;
    for (const auto& other : applicable) {
      if (!subsort(candidate.result, other.result)) {
        least = false;
        break;
      }
    }
    if (least) return candidate;
  }
  return std::nullopt;  // set is not deterministic at this tuple
}

std::optional<AnnotatedMatch> most_specific_annotated(const std::vector<AnnotatedSignature>& q,
                                                      const Sort& first, Annotation incoming,
                                                      const std::vector<Sort>& rest) {
  std::vector<AnnotatedSignature> applicable;
  for (const auto& sig : q) {
    if (sig.support.args.size() != rest.size() + 1) continue;
    if (!prog_subsort(sort_key(first), sort_key(sig.support.args[0]))) continue;
    if (!subsort(first, sig.support.args[0])) continue;
    bool ok = true;
    for (size_t i = 0; i < rest.size() && ok; ++i) {
      ok = subsort(rest[i], sig.support.args[i + 1]);
    }
    if (ok) applicable.push_back(sig);
  }
  if (applicable.empty()) return std::nullopt;
  for (const auto& candidate : applicable) {
    AnnotatedSort composed{candidate.support.result,
                           annotation_compose(candidate.annotation, incoming)};
    bool least = true;
    for (const auto& other : applicable) {
      AnnotatedSort other_composed{other.support.result,
                                   annotation_compose(other.annotation, incoming)};
      if (!annotated_sort_le(composed, other_composed)) {
        least = false;
        break;
      }
    }
    if (least) return AnnotatedMatch{candidate, composed.annotation};
  }
  return std::nullopt;
}

bool is_minimised(const std::vector<SortSignature>& q,
                  bool (*order)(const SortSignature&, const SortSignature&)) {
  for (size_t i = 0; i < q.size(); ++i) {
    for (size_t j = 0; j < q.size(); ++j) {
      if (i != j && order(q[i], q[j]) && q[i] != q[j]) return false;
    }
  }
  return true;
}

bool is_minimised_annotated(const std::vector<AnnotatedSignature>& q) {
  for (size_t i = 0; i < q.size(); ++i) {
    for (size_t j = 0; j < q.size(); ++j) {
      if (i != j && ann_subsigning(q[i], q[j]) && !(q[i] == q[j])) return false;
    }
  }
  return true;
}

std::vector<SortSignature> minimals(std::vector<SortSignature> q) {
  std::vector<SortSignature> out;
  for (size_t i = 0; i < q.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < q.size() && !dominated; ++j) {
      if (i == j) continue;
      if (subsigning(q[j], q[i]) && q[j] != q[i]) dominated = true;
      // keep the first of exact duplicates
      if (q[j] == q[i] && j < i) dominated = true;
    }
    if (!dominated) out.push_back(q[i]);
  }
  return out;
}

namespace {

// Enumerates every tuple drawn from the per-argument sort spaces.
template <typename Fn>
bool for_each_tuple(const std::vector<std::vector<Sort>>& spaces, Fn&& fn) {
  std::vector<size_t> index(spaces.size(), 0);
  while (true) {
    std::vector<Sort> tuple;
    tuple.reserve(spaces.size());
    for (size_t i = 0; i < spaces.size(); ++i) tuple.push_back(spaces[i][index[i]]);
    if (!fn(tuple)) return false;
    size_t pos = 0;
    while (pos < spaces.size()) {
      if (++index[pos] < spaces[pos].size()) break;
      index[pos] = 0;
      ++pos;
    }
    if (pos == spaces.size()) return true;
    if (spaces.empty()) return true;
  }
}

}  // namespace

std::optional<std::vector<Sort>> determinism_violation(const std::vector<SortSignature>& q,
                                                       const std::vector<TypeExpr>& arg_types) {
  std::vector<std::vector<Sort>> spaces;
  spaces.reserve(arg_types.size());
  for (const auto& t : arg_types) spaces.push_back(sorts_refining(t));
  std::optional<std::vector<Sort>> violation;
  for_each_tuple(spaces, [&](const std::vector<Sort>& tuple) {
    if (!applicable_signatures(q, tuple).empty() && !most_specific(q, tuple)) {
      violation = tuple;
      return false;
    }
    return true;
  });
  return violation;
}

std::optional<AnnotatedDeterminismViolation> annotated_determinism_violation(
    const std::vector<AnnotatedSignature>& q, const std::vector<TypeExpr>& arg_types) {
  if (arg_types.empty()) return std::nullopt;
  std::vector<std::vector<Sort>> rest_spaces;
  for (size_t i = 1; i < arg_types.size(); ++i) rest_spaces.push_back(sorts_refining(arg_types[i]));
  std::optional<AnnotatedDeterminismViolation> violation;
  for (const Sort& first : sorts_refining(arg_types[0])) {
    for (Annotation incoming : {Annotation::Bang, Annotation::Quest}) {
      for_each_tuple(rest_spaces, [&](const std::vector<Sort>& rest) {
        bool any_applicable = false;
        for (const auto& sig : q) {
          if (sig.support.args.size() != rest.size() + 1) continue;
          if (!prog_subsort(sort_key(first), sort_key(sig.support.args[0]))) continue;
          if (!subsort(first, sig.support.args[0])) continue;
          bool ok = true;
          for (size_t i = 0; i < rest.size() && ok; ++i) {
            ok = subsort(rest[i], sig.support.args[i + 1]);
          }
          if (ok) {
            any_applicable = true;
            break;
          }
        }
        if (any_applicable && !most_specific_annotated(q, first, incoming, rest)) {
          violation = AnnotatedDeterminismViolation{first, incoming, rest};
          return false;
        }
        return true;
      });
      if (violation) return violation;
    }
  }
  return violation;
}

}  // namespace fieldcalc
