#include "fieldcalc/check.hpp"

namespace fieldcalc {

CheckOutcome run_full_check(const Program& p, const Registry& registry, bool is_library,
                            bool collect_traces) {
  CheckOutcome outcome;
  outcome.sanity = program_sanity(p, is_library);
  if (!outcome.sanity.ok()) return outcome;
  outcome.types = check_program_types(p, registry);
  if (!outcome.types.ok()) return outcome;
  outcome.signatures = validate_signature_sets(p, registry);
  if (!outcome.signatures.ok()) return outcome;
  outcome.sorts = check_program_sorts(p, registry);
  if (!outcome.sorts.ok()) return outcome;
  outcome.annotations =
      check_program_annotations(p, registry, collect_traces ? &outcome.traces : nullptr);
  return outcome;
}

}  // namespace fieldcalc
