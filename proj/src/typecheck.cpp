#include "fieldcalc/typecheck.hpp"

namespace fieldcalc {

namespace {

std::optional<TypeExpr> check_apply(const TypeEnv& env, const std::string& function,
                                    const std::vector<ExprPtr>& args, const Expression& site,
                                    const Registry& registry, Report& report,
                                    const char* rule) {
  const FunctionEntry* entry = registry.find(function);
  if (!entry) {
    report.error(site.location, rule, "unknown function '" + function + "'");
    return std::nullopt;
  }
  if (entry->type_sig.args.size() != args.size()) {
    report.error(site.location, rule,
                 "'" + function + "' expects " + std::to_string(entry->type_sig.args.size()) +
                     " arguments, got " + std::to_string(args.size()));
    return std::nullopt;
  }
  bool ok = true;
  for (size_t i = 0; i < args.size(); ++i) {
    auto arg_type = type_of_expr(env, *args[i], registry, report);
    if (!arg_type) {
      ok = false;
      continue;
    }
    if (*arg_type != entry->type_sig.args[i]) {
      report.error(args[i]->location, rule,
                   "argument " + std::to_string(i + 1) + " of '" + function + "' has type " +
                       arg_type->to_string() + ", expected " +
                       entry->type_sig.args[i].to_string());
      ok = false;
    }
  }
  if (!ok) return std::nullopt;
  return entry->type_sig.result;
}

}  // namespace

std::optional<TypeExpr> type_of_expr(const TypeEnv& env, const Expression& e,
                                     const Registry& registry, Report& report) {
  if (auto* v = e.as<Expression::Variable>()) {
    auto it = env.find(v->name);
    if (it == env.end()) {
      report.error(e.location, "T-VAR", "unbound variable '" + v->name + "'");
      return std::nullopt;
    }
    return it->second;
  }
  if (auto* s = e.as<Expression::Sensor>()) {
    return registry.sensors().type_of(s->name);
  }
  if (auto* l = e.as<Expression::Literal>()) {
    return l->value.type();
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    auto t1 = type_of_expr(env, *p->first, registry, report);
    auto t2 = type_of_expr(env, *p->second, registry, report);
    if (!t1 || !t2) return std::nullopt;
    return TypeExpr::pair(*t1, *t2);
  }
  if (auto* f = e.as<Expression::First>()) {
    auto t = type_of_expr(env, *f->arg, registry, report);
    if (!t) return std::nullopt;
    if (!t->is_pair()) {
      report.error(e.location, "T-FST", "fst applied to non-pair of type " + t->to_string());
      return std::nullopt;
    }
    return t->first();
  }
  if (auto* s = e.as<Expression::Second>()) {
    auto t = type_of_expr(env, *s->arg, registry, report);
    if (!t) return std::nullopt;
    if (!t->is_pair()) {
      report.error(e.location, "T-SND", "snd applied to non-pair of type " + t->to_string());
      return std::nullopt;
    }
    return t->second();
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    auto t0 = type_of_expr(env, *c->cond, registry, report);
    auto t1 = type_of_expr(env, *c->then_branch, registry, report);
    auto t2 = type_of_expr(env, *c->else_branch, registry, report);
    if (!t0 || !t1 || !t2) return std::nullopt;
    bool ok = true;
    if (*t0 != TypeExpr::boolean()) {
      report.error(c->cond->location, "T-COND",
                   "condition has type " + t0->to_string() + ", expected bool");
      ok = false;
    }
    if (*t1 != *t2) {
      report.error(e.location, "T-COND",
                   "branches have different types " + t1->to_string() + " and " +
                       t2->to_string());
      ok = false;
    }
    if (!ok) return std::nullopt;
    return t1;
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    return check_apply(env, ap->function, ap->args, e, registry, report, "T-FUN");
  }
  auto* sp = e.as<Expression::Spread>();
  if (!registry.find(sp->diffusion)) {
    report.error(e.location, "T-SPR", "unknown function '" + sp->diffusion + "' in spreading");
    return std::nullopt;
  }
  if (!registry.is_diffusion(sp->diffusion)) {
    report.error(e.location, "T-SPR",
                 "'" + sp->diffusion + "' is not a diffusion (pure, result type equal to "
                 "first argument type)");
    return std::nullopt;
  }
  std::vector<ExprPtr> all_args;
  all_args.push_back(sp->source);
  all_args.insert(all_args.end(), sp->extra.begin(), sp->extra.end());
  return check_apply(env, sp->diffusion, all_args, e, registry, report, "T-SPR");
}

Report check_program_types(const Program& p, const Registry& registry) {
  Report report;
  for (const auto& [name, def] : p.defs) {
    TypeEnv env;
    for (const auto& param : def.params) env.emplace(param.name, param.type);
    auto body_type = type_of_expr(env, *def.body, registry, report);
    if (body_type && *body_type != def.return_type) {
      report.error(def.location, "T-DEF",
                   "body of '" + name + "' has type " + body_type->to_string() +
                       ", declared " + def.return_type.to_string());
    }
  }
  return report;
}

}  // namespace fieldcalc
