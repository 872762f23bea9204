#include "fieldcalc/eval.hpp"

namespace fieldcalc {

namespace {

// Value environment for parameters; variables evaluate to leaves, so
// binding values here is equivalent to the substitution the rules use.
using ValueEnv = std::map<std::string, Value>;

std::vector<const ValueTree*> align(const std::vector<const ValueTree*>& trees, size_t child) {
  std::vector<const ValueTree*> out;
  out.reserve(trees.size());
  for (const ValueTree* t : trees) {
    if (child >= t->children.size()) {
      throw EvalError("neighbour tree misaligned with expression");
    }
    out.push_back(&t->children[child]);
  }
  return out;
}

ValueTree eval_rec(const SensorState& sensors, const std::vector<const ValueTree*>& trees,
                   const Expression& e, const ValueEnv& env, const Registry& registry) {
  if (auto* v = e.as<Expression::Variable>()) {
    auto it = env.find(v->name);
    if (it == env.end()) throw InternalError("unbound variable '" + v->name + "'");
    return leaf(it->second);
  }
  if (auto* s = e.as<Expression::Sensor>()) {
    auto it = sensors.find(s->name);
    if (it == sensors.end()) throw EvalError("missing sensor '#" + s->name + "'");
    return leaf(it->second);
  }
  if (auto* l = e.as<Expression::Literal>()) {
    return leaf(l->value);
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    ValueTree t1 = eval_rec(sensors, align(trees, 0), *p->first, env, registry);
    ValueTree t2 = eval_rec(sensors, align(trees, 1), *p->second, env, registry);
    Value root = Value::pair(t1.root, t2.root);
    return ValueTree{std::move(root), {std::move(t1), std::move(t2)}};
  }
  if (auto* f = e.as<Expression::First>()) {
    ValueTree t = eval_rec(sensors, align(trees, 0), *f->arg, env, registry);
    Value root = t.root.first();
    return ValueTree{std::move(root), {std::move(t)}};
  }
  if (auto* s = e.as<Expression::Second>()) {
    ValueTree t = eval_rec(sensors, align(trees, 0), *s->arg, env, registry);
    Value root = t.root.second();
    return ValueTree{std::move(root), {std::move(t)}};
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    // both branches are evaluated; the root picks one
    ValueTree t1 = eval_rec(sensors, align(trees, 0), *c->cond, env, registry);
    ValueTree t2 = eval_rec(sensors, align(trees, 1), *c->then_branch, env, registry);
    ValueTree t3 = eval_rec(sensors, align(trees, 2), *c->else_branch, env, registry);
    Value root = t1.root.as_bool() ? t2.root : t3.root;
    return ValueTree{std::move(root), {std::move(t1), std::move(t2), std::move(t3)}};
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    const FunctionEntry& entry = registry.at(ap->function);
    std::vector<ValueTree> children;
    children.reserve(ap->args.size() + 1);
    for (size_t i = 0; i < ap->args.size(); ++i) {
      children.push_back(eval_rec(sensors, align(trees, i), *ap->args[i], env, registry));
    }
    if (entry.is_builtin()) {
      std::vector<Value> args;
      args.reserve(children.size());
      for (const auto& child : children) args.push_back(child.root);
      Value root = entry.builtin(args);
      return ValueTree{std::move(root), std::move(children)};
    }
    ValueEnv call_env;
    for (size_t i = 0; i < children.size(); ++i) {
      call_env.emplace(entry.def->params[i].name, children[i].root);
    }
    ValueTree body =
        eval_rec(sensors, align(trees, ap->args.size()), *entry.def->body, call_env, registry);
    Value root = body.root;
    children.push_back(std::move(body));
    return ValueTree{std::move(root), std::move(children)};
  }
  auto* sp = e.as<Expression::Spread>();
  std::vector<ValueTree> children;
  children.reserve(sp->extra.size() + 1);
  children.push_back(eval_rec(sensors, align(trees, 0), *sp->source, env, registry));
  for (size_t i = 0; i < sp->extra.size(); ++i) {
    children.push_back(eval_rec(sensors, align(trees, i + 1), *sp->extra[i], env, registry));
  }
  std::vector<Value> candidates;
  candidates.reserve(trees.size() + 1);
  candidates.push_back(children[0].root);
  std::vector<Value> diffusion_args;
  diffusion_args.reserve(children.size());
  for (const ValueTree* neighbour : trees) {
    diffusion_args.clear();
    diffusion_args.push_back(neighbour->root);
    for (size_t i = 1; i < children.size(); ++i) diffusion_args.push_back(children[i].root);
    // the diffusion is pure, so only the root of its tree matters
    candidates.push_back(registry.apply_pure(sp->diffusion, diffusion_args));
  }
  return ValueTree{value_min(candidates), std::move(children)};
}

}  // namespace

ValueTree eval(const SensorState& sensors, const std::vector<ValueTree>& neighbour_trees,
               const Expression& e, const Registry& registry) {
  std::vector<const ValueTree*> trees;
  trees.reserve(neighbour_trees.size());
  for (const auto& t : neighbour_trees) trees.push_back(&t);
  return eval_rec(sensors, trees, e, {}, registry);
}

ValueTree eval_main(const Program& p, const SensorState& sensors,
                    const std::vector<ValueTree>& neighbour_trees, const Registry& registry) {
  const FunctionDef* main_def = p.find("main");
  if (!main_def) throw InternalError("program has no main function");
  return eval(sensors, neighbour_trees, *main_def->body, registry);
}

namespace {

TreeShape shape_rec(const Expression& e, const Registry& registry,
                    std::map<std::string, TreeShape>& memo) {
  TreeShape shape;
  if (e.as<Expression::Variable>() || e.as<Expression::Sensor>() ||
      e.as<Expression::Literal>()) {
    return shape;
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    shape.children.push_back(shape_rec(*p->first, registry, memo));
    shape.children.push_back(shape_rec(*p->second, registry, memo));
    return shape;
  }
  if (auto* f = e.as<Expression::First>()) {
    shape.children.push_back(shape_rec(*f->arg, registry, memo));
    return shape;
  }
  if (auto* s = e.as<Expression::Second>()) {
    shape.children.push_back(shape_rec(*s->arg, registry, memo));
    return shape;
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    shape.children.push_back(shape_rec(*c->cond, registry, memo));
    shape.children.push_back(shape_rec(*c->then_branch, registry, memo));
    shape.children.push_back(shape_rec(*c->else_branch, registry, memo));
    return shape;
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    for (const auto& arg : ap->args) shape.children.push_back(shape_rec(*arg, registry, memo));
    const FunctionEntry& entry = registry.at(ap->function);
    if (!entry.is_builtin()) {
      auto it = memo.find(ap->function);
      if (it == memo.end()) {
        it = memo.emplace(ap->function, shape_rec(*entry.def->body, registry, memo)).first;
      }
      shape.children.push_back(it->second);
    }
    return shape;
  }
  auto* sp = e.as<Expression::Spread>();
  shape.children.push_back(shape_rec(*sp->source, registry, memo));
  for (const auto& arg : sp->extra) shape.children.push_back(shape_rec(*arg, registry, memo));
  return shape;
}

}  // namespace

TreeShape shape_of_expr(const Expression& e, const Registry& registry) {
  std::map<std::string, TreeShape> memo;
  return shape_rec(e, registry, memo);
}

bool tree_matches_shape(const ValueTree& tree, const TreeShape& shape) {
  if (tree.children.size() != shape.children.size()) return false;
  for (size_t i = 0; i < tree.children.size(); ++i) {
    if (!tree_matches_shape(tree.children[i], shape.children[i])) return false;
  }
  return true;
}

Report validate_neighbour_trees(const std::vector<ValueTree>& trees, const Expression& e,
                                const Registry& registry) {
  Report report;
  TreeShape expected = shape_of_expr(e, registry);
  for (size_t i = 0; i < trees.size(); ++i) {
    if (!tree_matches_shape(trees[i], expected)) {
      report.error({}, "EVAL",
                   "neighbour tree " + std::to_string(i + 1) +
                       " does not match the shape of the expression");
    }
  }
  return report;
}

}  // namespace fieldcalc
