#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fieldcalc/diag.hpp"
#include "fieldcalc/signatures.hpp"
#include "fieldcalc/value.hpp"

namespace fieldcalc {

class Expression;
using ExprPtr = std::shared_ptr<const Expression>;

// Abstract syntax. Literal covers ground and pair values so that pair
// constructors over constants evaluate as plain values.
class Expression {
 public:
  struct Variable {
    std::string name;
  };
  struct Sensor {
    std::string name;
  };
  struct Literal {
    Value value;
  };
  struct PairCtor {
    ExprPtr first, second;
  };
  struct First {
    ExprPtr arg;
  };
  struct Second {
    ExprPtr arg;
  };
  struct Conditional {
    ExprPtr cond, then_branch, else_branch;
  };
  struct Apply {
    std::string function;
    std::vector<ExprPtr> args;
  };
  // { source : f(@, extra...) }
  struct Spread {
    ExprPtr source;
    std::string diffusion;
    std::vector<ExprPtr> extra;
  };

  using Node =
      std::variant<Variable, Sensor, Literal, PairCtor, First, Second, Conditional, Apply, Spread>;

  explicit Expression(Node node, SourceLocation loc = {})
      : node(std::move(node)), location(loc) {}

  Node node;
  SourceLocation location;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

ExprPtr make_expr(Expression::Node node, SourceLocation loc = {});

// A pair of values is itself a value; a pair constructor over two
// literals collapses to a pair literal.
ExprPtr make_pair_expr(ExprPtr first, ExprPtr second, SourceLocation loc = {});

bool expr_equal(const Expression& a, const Expression& b);

std::string expr_to_string(const Expression& e);

struct Param {
  std::string name;
  TypeExpr type;
};

struct FunctionDef {
  std::string name;
  TypeExpr return_type = TypeExpr::real();
  std::vector<Param> params;
  ExprPtr body;
  SourceLocation location;

  // Declared signature sets; empty means "use defaults" (sort
  // signatures) or "none" (stabilising / annotated signatures).
  std::vector<SortSignature> declared_sorts;
  std::vector<SortSignature> declared_stab;
  std::vector<AnnotatedSignature> declared_ann;

  TypeSignature type_signature() const;
};

std::string def_to_string(const FunctionDef& def);

struct Program {
  std::map<std::string, FunctionDef> defs;

  bool has_main() const { return defs.count("main") != 0; }
  const FunctionDef* find(const std::string& name) const;
};

std::string program_to_string(const Program& p);

// Free variables of an expression.
std::set<std::string> free_variables(const Expression& e);

// Names of functions applied anywhere in the expression (including
// spread diffusions).
std::set<std::string> called_functions(const Expression& e);

bool contains_spread(const Expression& e);
bool contains_sensor(const Expression& e);

// Sanity conditions: referenced functions resolve, the call graph is
// acyclic, parameters are distinct and bind all free variables, and a
// program (but not a library) has a zero-parameter main.
Report program_sanity(const Program& p, bool is_library);

}  // namespace fieldcalc
