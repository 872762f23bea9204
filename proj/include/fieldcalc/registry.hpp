#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/diag.hpp"
#include "fieldcalc/signatures.hpp"

namespace fieldcalc {

using BuiltinFn = std::function<Value(const std::vector<Value>&)>;

struct FunctionEntry {
  std::string name;
  TypeSignature type_sig;
  std::vector<SortSignature> sort_sigs;       // Sigma_S
  std::vector<SortSignature> stab_sigs;       // Sigma_stab
  std::vector<AnnotatedSignature> ann_sigs;   // Sigma_A
  BuiltinFn builtin;                          // set for built-ins only
  const FunctionDef* def = nullptr;           // set for user functions only

  bool is_builtin() const { return static_cast<bool>(builtin); }
};

// Declared sorts for sensors; the underlying type of the sort is the
// sensor's type. Unknown sensors default to real with a warning.
class SensorTable {
 public:
  SensorTable();  // seeds #src -> zpr, #dist -> pr

  void declare(const std::string& name, Sort sort);
  std::optional<Sort> find(const std::string& name) const;

  // Sort for checking: declared, or real with a warning diagnostic.
  Sort sort_of(const std::string& name, Report* report, SourceLocation loc) const;
  TypeExpr type_of(const std::string& name) const;

 private:
  std::map<std::string, Sort> sorts_;
};

class Registry {
 public:
  // Built-in tables only.
  Registry();

  // Built-ins plus one entry per user-defined function. Default sort
  // signatures for undeclared functions are the minimal elements of
  // {type signature} united with the declared stabilising set.
  static Registry for_program(const Program& p, SensorTable sensors = SensorTable());

  const FunctionEntry* find(const std::string& name) const;
  const FunctionEntry& at(const std::string& name) const;
  bool is_builtin(const std::string& name) const;

  const SensorTable& sensors() const { return sensors_; }
  SensorTable& sensors() { return sensors_; }

  const std::map<std::string, FunctionEntry>& entries() const { return entries_; }

  // Pure function: a built-in, or a user function whose call graph
  // contains no spreading expression and no sensor.
  bool is_pure(const std::string& name) const;

  // Pure function whose return type equals its first argument type.
  bool is_diffusion(const std::string& name) const;

  // Applies a pure function to argument values (big-step, no neighbours).
  Value apply_pure(const std::string& name, const std::vector<Value>& args) const;

 private:
  std::map<std::string, FunctionEntry> entries_;
  SensorTable sensors_;
};

// True when the definition has the canonical-top shape: the body is
// g(x1,...,xn) wrapped as g(f(x1,...,xn)) where g is a unary user
// function whose body tests the key against the top of the result
// sort's key and yields the whole top value.
bool is_canonical_top(const FunctionDef& def, const Sort& result_sort, const Program& p,
                      std::string* inner_diffusion = nullptr);

// Well-formedness checks over all signature sets: minimality,
// determinism by exhaustive enumeration, progressiveness of stabilising
// signatures, implication from the sort signatures, the least
// progressive result sort and canonical-top requirements for user
// diffusions, and the linkage between stabilising and [!]-annotated
// sets.
Report validate_signature_sets(const Program& p, const Registry& registry);

}  // namespace fieldcalc
