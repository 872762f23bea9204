#pragma once

#include <map>
#include <optional>
#include <string>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/registry.hpp"

namespace fieldcalc {

using SortEnv = std::map<std::string, Sort>;

// Syntax-directed sort of an expression. Spreading expressions are the
// rejection point: the diffusion must have an applicable stabilising
// signature for the inferred argument sorts.
std::optional<Sort> sort_of_expr(const SortEnv& env, const Expression& e,
                                 const Registry& registry, Report& report);

// Checks the body against every sort signature of the definition and,
// for diffusions, against every declared stabilising signature.
Report check_function_sorts(const FunctionDef& def, const Registry& registry);

// Aggregates check_function_sorts over all definitions; the program is
// well sorted when every definition passes.
Report check_program_sorts(const Program& p, const Registry& registry);

}  // namespace fieldcalc
