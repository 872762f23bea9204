#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/registry.hpp"
#include "fieldcalc/sortcheck.hpp"

namespace fieldcalc {

// The tracked variable is the diffusion's first parameter; it is the
// only ?-annotated assumption in scope.
struct AnnotatedEnv {
  std::string tracked_name;
  Sort tracked_sort = Sort::real();
  SortEnv others;

  SortEnv support() const {
    SortEnv out = others;
    out.emplace(tracked_name, tracked_sort);
    return out;
  }
};

// One node of an annotated-sort derivation, recorded for auditing.
struct DerivationNode {
  std::string rule;
  std::string expr;
  std::string result;
  std::vector<DerivationNode> children;

  std::string to_string(int indent = 0) const;
};

std::optional<AnnotatedSort> ann_sort_of_expr(const AnnotatedEnv& env, const Expression& e,
                                              const Registry& registry, Report& report,
                                              DerivationNode* trace = nullptr);

struct AnnCheckResult {
  Report report;
  // One derivation per checked signature, in declaration order.
  std::vector<DerivationNode> traces;
};

// Checks the diffusion's body against every declared annotated
// signature, tracking the first parameter.
AnnCheckResult check_diffusion_annotations(const FunctionDef& def, const Registry& registry);

// Runs over every user diffusion with declared annotated signatures;
// together with the signature-set validation and the sort checker this
// establishes the stabilising-diffusion condition.
Report check_program_annotations(const Program& p, const Registry& registry,
                                 std::vector<DerivationNode>* traces = nullptr);

}  // namespace fieldcalc
