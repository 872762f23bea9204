#pragma once

#include <map>
#include <string>
#include <vector>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/registry.hpp"

namespace fieldcalc {

// Big-step device semantics. The neighbour trees are the value-trees
// produced by the most recent evaluation of the same expression on the
// device's neighbours; subexpressions are evaluated against the
// position-aligned subtrees.
ValueTree eval(const SensorState& sensors, const std::vector<ValueTree>& neighbour_trees,
               const Expression& e, const Registry& registry);

// Evaluates the main body of a program with an entry point.
ValueTree eval_main(const Program& p, const SensorState& sensors,
                    const std::vector<ValueTree>& neighbour_trees, const Registry& registry);

// Shape skeleton of the value-tree any evaluation of e produces (the
// shape only depends on the expression).
struct TreeShape {
  std::vector<TreeShape> children;
  bool operator==(const TreeShape& other) const { return children == other.children; }
};

TreeShape shape_of_expr(const Expression& e, const Registry& registry);

bool tree_matches_shape(const ValueTree& tree, const TreeShape& shape);

// Validates externally supplied neighbour trees against the shape of
// the expression; corrupted trees are rejected before evaluation.
Report validate_neighbour_trees(const std::vector<ValueTree>& trees, const Expression& e,
                                const Registry& registry);

}  // namespace fieldcalc
