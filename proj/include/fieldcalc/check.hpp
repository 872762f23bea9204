#pragma once

#include "fieldcalc/anncheck.hpp"
#include "fieldcalc/ast.hpp"
#include "fieldcalc/registry.hpp"
#include "fieldcalc/sortcheck.hpp"
#include "fieldcalc/typecheck.hpp"

namespace fieldcalc {

// The full pipeline: sanity, types, signature-set validation, sorts,
// annotations. Later stages run only when the earlier ones pass.
struct CheckOutcome {
  Report sanity;
  Report types;
  Report signatures;
  Report sorts;
  Report annotations;
  std::vector<DerivationNode> traces;

  bool well_typed() const { return sanity.ok() && types.ok(); }
  bool well_sorted() const { return well_typed() && signatures.ok() && sorts.ok(); }
  bool well_annotated() const { return well_sorted() && annotations.ok(); }

  Report all() const {
    Report out;
    out.append(sanity);
    out.append(types);
    out.append(signatures);
    out.append(sorts);
    out.append(annotations);
    return out;
  }
};

CheckOutcome run_full_check(const Program& p, const Registry& registry, bool is_library,
                            bool collect_traces = false);

}  // namespace fieldcalc
