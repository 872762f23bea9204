#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/registry.hpp"

namespace fieldcalc {

// Finite sample of a sort's denotation. The real base grid covers the
// sign boundaries, both infinities and a few finite magnitudes; every
// grid always contains the sort's top. A pass over the grid is
// evidence, a failure is a definitive refutation with a witness.
std::vector<Value> default_grid(const Sort& s);

// Overrides the base real grid (the FIELDCALC_GRID hook); values are
// filtered per sort as usual.
void set_real_base_grid(std::vector<double> values);
std::vector<double> real_base_grid();

struct Witness {
  std::string condition;  // "monotone", "top-fixed", "progressive", ...
  std::vector<Value> values;
  std::string to_string() const;
};

struct OracleVerdict {
  bool pass = true;
  std::vector<Witness> witnesses;
  long checks = 0;
};

// Brute-force check that f is a stabilising diffusion for the
// signature: monotone nondecreasing in the first argument, the top is a
// fixed point, anything below the top strictly inflates, and every
// result lands in the declared result sort.
OracleVerdict verify_stabilising(const std::string& f, const SortSignature& sig,
                                 const Registry& registry);

// Brute-force check of the prestabilising conditions under the
// leftmost-as-key preorder. For ? : key-monotone and key-inflationary.
// For ! additionally: strictly key-monotone unless the result key is
// top, and strict key-inflation below the top.
OracleVerdict verify_prestabilising(const std::string& f, const SortSignature& sig,
                                    Annotation annotation, const Registry& registry);

// Runs both sweeps over every stabilising and annotated signature in
// the registry (built-in and user).
struct SignatureSweep {
  struct Entry {
    std::string function;
    std::string signature;
    OracleVerdict verdict;
  };
  std::vector<Entry> entries;
  bool all_pass() const;
};

SignatureSweep verify_registry_signatures(const Registry& registry);

// The corpus-shaped main: after inlining user calls, exactly one
// spreading expression whose source and extra arguments are spread
// free, inside a spread-free context.
struct SpreadDecomposition {
  ExprPtr source;
  std::string diffusion;
  std::vector<ExprPtr> extra;
  // main with the spread replaced by this placeholder variable
  ExprPtr context;
  std::string placeholder;
};

// Inlines every user-defined application (the call graph is acyclic and
// arguments are duplicated at most syntactically).
ExprPtr inline_user_calls(const Expression& e, const Program& p);

std::optional<SpreadDecomposition> decompose_single_spread(const Expression& main_body,
                                                           const Program& p);

struct RelaxationResult {
  bool applicable = false;  // main has the corpus shape
  bool converged = false;
  long iterations = 0;
  std::map<std::string, Value> roots;  // device id -> root value of main
};

// Independent fixpoint computation: every device starts from its
// isolated evaluation and is re-relaxed whenever an input changes,
// FIFO order (or randomised with a nonzero shuffle seed).
RelaxationResult relaxation_fixpoint(const Program& p, const Registry& registry,
                                     const std::map<std::string, SensorState>& device_sensors,
                                     const std::map<std::string, std::set<std::string>>& topology,
                                     long iteration_cap = 0, std::uint64_t shuffle_seed = 0);

}  // namespace fieldcalc
