#pragma once

#include <map>
#include <optional>
#include <string>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/registry.hpp"

namespace fieldcalc {

using TypeEnv = std::map<std::string, TypeExpr>;

// Syntax-directed type of an expression; diagnostics are appended to
// the report and nullopt is returned on failure.
std::optional<TypeExpr> type_of_expr(const TypeEnv& env, const Expression& e,
                                     const Registry& registry, Report& report);

// Each definition's body must type to the declared return type under
// its parameter environment.
Report check_program_types(const Program& p, const Registry& registry);

}  // namespace fieldcalc
