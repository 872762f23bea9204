#include "fieldcalc/anncheck.hpp"

namespace fieldcalc {

std::string DerivationNode::to_string(int indent) const {
  std::string out(static_cast<size_t>(indent) * 2, ' ');
  out += "[" + rule + "] " + expr + " : " + result + "\n";
  for (const auto& child : children) out += child.to_string(indent + 1);
  return out;
}

namespace {

DerivationNode* add_child(DerivationNode* trace) {
  if (!trace) return nullptr;
  trace->children.emplace_back();
  return &trace->children.back();
}

void record(DerivationNode* trace, const char* rule, const Expression& e,
            const std::string& result) {
  if (!trace) return;
  trace->rule = rule;
  trace->expr = expr_to_string(e);
  trace->result = result;
}

std::optional<Sort> support_sort(const AnnotatedEnv& env, const Expression& e,
                                 const Registry& registry, Report& report,
                                 DerivationNode* trace, const char* rule) {
  SortEnv plain = env.support();
  auto s = sort_of_expr(plain, e, registry, report);
  if (trace && s) {
    trace->rule = rule;
    trace->expr = expr_to_string(e);
    trace->result = s->to_string();
  }
  return s;
}

}  // namespace

std::optional<AnnotatedSort> ann_sort_of_expr(const AnnotatedEnv& env, const Expression& e,
                                              const Registry& registry, Report& report,
                                              DerivationNode* trace) {
  if (auto* v = e.as<Expression::Variable>()) {
    if (v->name != env.tracked_name) {
      report.error(e.location, "A-VAR",
                   "variable '" + v->name + "' is not the tracked first parameter");
      return std::nullopt;
    }
    AnnotatedSort out{env.tracked_sort, Annotation::Quest};
    record(trace, "A-VAR", e, out.to_string());
    return out;
  }
  if (auto* l = e.as<Expression::Literal>()) {
    if (!l->value.is_ground()) {
      report.error(e.location, "A-GVAL",
                   "pair literal " + l->value.to_string() + " has no annotated sort");
      return std::nullopt;
    }
    Value key_top = sort_top(sort_key(env.tracked_sort));
    if (l->value != key_top) {
      report.error(e.location, "A-GVAL",
                   "literal " + l->value.to_string() + " is not the top " +
                       key_top.to_string() + " of the tracked key sort");
      return std::nullopt;
    }
    auto out = annotated_sort_of_ground(l->value);
    if (!out) {
      report.error(e.location, "A-GVAL",
                   "literal " + l->value.to_string() + " has no annotated sort");
      return std::nullopt;
    }
    record(trace, "A-GVAL", e, out->to_string());
    return out;
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    DerivationNode* left = add_child(trace);
    auto s1 = ann_sort_of_expr(env, *p->first, registry, report, left);
    DerivationNode* right = add_child(trace);
    auto s2 = support_sort(env, *p->second, registry, report, right, "S-SORT");
    if (!s1 || !s2) return std::nullopt;
    AnnotatedSort out{Sort::pair(s1->support, *s2), s1->annotation};
    record(trace, "A-PAIR", e, out.to_string());
    return out;
  }
  if (auto* f = e.as<Expression::First>()) {
    DerivationNode* child = add_child(trace);
    auto s = ann_sort_of_expr(env, *f->arg, registry, report, child);
    if (!s) return std::nullopt;
    if (!s->support.is_pair()) {
      report.error(e.location, "A-FST", "fst applied to non-pair annotated sort");
      return std::nullopt;
    }
    AnnotatedSort out{s->support.first(), s->annotation};
    record(trace, "A-FST", e, out.to_string());
    return out;
  }
  if (e.as<Expression::Second>()) {
    report.error(e.location, "A-SND",
                 "snd has no annotated sort checking rule (the key is the leftmost component)");
    return std::nullopt;
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    SortEnv plain = env.support();
    auto s0 = sort_of_expr(plain, *c->cond, registry, report);
    if (!s0) return std::nullopt;
    if (*s0 == Sort::ground(GroundSort::True)) {
      DerivationNode* then_node = add_child(trace);
      auto a = ann_sort_of_expr(env, *c->then_branch, registry, report, then_node);
      auto s2 = sort_of_expr(plain, *c->else_branch, registry, report);
      if (!a || !s2) return std::nullopt;
      record(trace, "A-COND-TRUE", e, a->to_string());
      return a;
    }
    if (*s0 == Sort::ground(GroundSort::False)) {
      auto s1 = sort_of_expr(plain, *c->then_branch, registry, report);
      DerivationNode* else_node = add_child(trace);
      auto a = ann_sort_of_expr(env, *c->else_branch, registry, report, else_node);
      if (!a || !s1) return std::nullopt;
      record(trace, "A-COND-FALSE", e, a->to_string());
      return a;
    }
    DerivationNode* then_node = add_child(trace);
    auto a1 = ann_sort_of_expr(env, *c->then_branch, registry, report, then_node);
    DerivationNode* else_node = add_child(trace);
    auto a2 = ann_sort_of_expr(env, *c->else_branch, registry, report, else_node);
    if (!a1 || !a2) return std::nullopt;
    AnnotatedSort out = annotated_sort_lub(*a1, *a2);
    record(trace, "A-COND", e, out.to_string());
    return out;
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    if (ap->args.empty()) {
      report.error(e.location, "A-FUN", "'" + ap->function + "' takes no tracked argument");
      return std::nullopt;
    }
    DerivationNode* first_node = add_child(trace);
    auto first = ann_sort_of_expr(env, *ap->args[0], registry, report, first_node);
    if (!first) return std::nullopt;
    std::vector<Sort> rest;
    SortEnv plain = env.support();
    for (size_t i = 1; i < ap->args.size(); ++i) {
      auto s = sort_of_expr(plain, *ap->args[i], registry, report);
      if (!s) return std::nullopt;
      rest.push_back(*s);
    }
    const FunctionEntry& entry = registry.at(ap->function);
    auto match = most_specific_annotated(entry.ann_sigs, first->support, first->annotation, rest);
    if (!match) {
      report.error(e.location, "A-FUN",
                   "no annotated signature of '" + ap->function +
                       "' applies to first argument " + first->to_string());
      return std::nullopt;
    }
    AnnotatedSort out{match->signature.support.result, match->composed};
    record(trace, "A-FUN", e, out.to_string());
    return out;
  }
  // sensors and spreading expressions are impossible in pure bodies
  report.error(e.location, "A-PURE", "expression is not pure");
  return std::nullopt;
}

AnnCheckResult check_diffusion_annotations(const FunctionDef& def, const Registry& registry) {
  AnnCheckResult result;
  const FunctionEntry& entry = registry.at(def.name);
  for (const auto& asig : entry.ann_sigs) {
    if (asig.support.args.size() != def.params.size() || def.params.empty()) continue;
    AnnotatedEnv env;
    env.tracked_name = def.params[0].name;
    env.tracked_sort = asig.support.args[0];
    for (size_t i = 1; i < def.params.size(); ++i) {
      env.others.emplace(def.params[i].name, asig.support.args[i]);
    }
    DerivationNode trace;
    auto body = ann_sort_of_expr(env, *def.body, registry, result.report, &trace);
    if (body) {
      AnnotatedSort target{asig.support.result, asig.annotation};
      if (!annotated_sort_le(*body, target)) {
        result.report.error(def.location, "A-DEF",
                            "body of '" + def.name + "' has annotated sort " +
                                body->to_string() + ", not below " + target.to_string() +
                                " from " + asig.to_string());
      }
    }
    DerivationNode root;
    root.rule = "A-DEF";
    root.expr = def.name + " : " + asig.to_string();
    root.result = body ? body->to_string() : "(failed)";
    root.children.push_back(std::move(trace));
    result.traces.push_back(std::move(root));
  }
  return result;
}

Report check_program_annotations(const Program& p, const Registry& registry,
                                 std::vector<DerivationNode>* traces) {
  Report report;
  for (const auto& [name, def] : p.defs) {
    const FunctionEntry& entry = registry.at(name);
    if (entry.ann_sigs.empty()) continue;
    AnnCheckResult result = check_diffusion_annotations(def, registry);
    report.append(result.report);
    if (traces) {
      traces->insert(traces->end(), result.traces.begin(), result.traces.end());
    }
  }
  return report;
}

}  // namespace fieldcalc
