#include "fieldcalc/sortcheck.hpp"

namespace fieldcalc {

std::optional<Sort> sort_of_expr(const SortEnv& env, const Expression& e,
                                 const Registry& registry, Report& report) {
  if (auto* v = e.as<Expression::Variable>()) {
    auto it = env.find(v->name);
    if (it == env.end()) {
      report.error(e.location, "S-VAR", "unbound variable '" + v->name + "'");
      return std::nullopt;
    }
    return it->second;
  }
  if (auto* s = e.as<Expression::Sensor>()) {
    return registry.sensors().sort_of(s->name, &report, e.location);
  }
  if (auto* l = e.as<Expression::Literal>()) {
    return min_sort_of_value(l->value);
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    auto s1 = sort_of_expr(env, *p->first, registry, report);
    auto s2 = sort_of_expr(env, *p->second, registry, report);
    if (!s1 || !s2) return std::nullopt;
    return Sort::pair(*s1, *s2);
  }
  if (auto* f = e.as<Expression::First>()) {
    auto s = sort_of_expr(env, *f->arg, registry, report);
    if (!s) return std::nullopt;
    return s->first();
  }
  if (auto* s = e.as<Expression::Second>()) {
    auto inner = sort_of_expr(env, *s->arg, registry, report);
    if (!inner) return std::nullopt;
    return inner->second();
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    auto s0 = sort_of_expr(env, *c->cond, registry, report);
    auto s1 = sort_of_expr(env, *c->then_branch, registry, report);
    auto s2 = sort_of_expr(env, *c->else_branch, registry, report);
    if (!s0 || !s1 || !s2) return std::nullopt;
    if (*s0 == Sort::ground(GroundSort::True)) return s1;
    if (*s0 == Sort::ground(GroundSort::False)) return s2;
    return sort_lub(*s1, *s2);
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    std::vector<Sort> arg_sorts;
    for (const auto& arg : ap->args) {
      auto s = sort_of_expr(env, *arg, registry, report);
      if (!s) return std::nullopt;
      arg_sorts.push_back(*s);
    }
    auto sig = most_specific(registry.at(ap->function).sort_sigs, arg_sorts);
    if (!sig) {
      std::string args;
      for (const auto& s : arg_sorts) args += (args.empty() ? "" : ",") + s.to_string();
      report.error(e.location, "S-FUN",
                   "no sort signature of '" + ap->function + "' applies to (" + args + ")");
      return std::nullopt;
    }
    return sig->result;
  }
  auto* sp = e.as<Expression::Spread>();
  std::vector<Sort> arg_sorts;
  auto s0 = sort_of_expr(env, *sp->source, registry, report);
  if (!s0) return std::nullopt;
  arg_sorts.push_back(*s0);
  for (const auto& arg : sp->extra) {
    auto s = sort_of_expr(env, *arg, registry, report);
    if (!s) return std::nullopt;
    arg_sorts.push_back(*s);
  }
  auto sig = most_specific(registry.at(sp->diffusion).stab_sigs, arg_sorts);
  if (!sig) {
    std::string args;
    for (const auto& s : arg_sorts) args += (args.empty() ? "" : ",") + s.to_string();
    report.error(e.location, "S-SPR",
                 "no stabilising signature applicable: '" + sp->diffusion +
                     "' cannot be spread over arguments (" + args + ")");
    return std::nullopt;
  }
  return sort_lub(*s0, sig->result);
}

namespace {

void check_against_signature(const FunctionDef& def, const SortSignature& sig,
                             const char* flavour, const Registry& registry, Report& report) {
  SortEnv env;
  for (size_t i = 0; i < def.params.size(); ++i) env.emplace(def.params[i].name, sig.args[i]);
  auto body_sort = sort_of_expr(env, *def.body, registry, report);
  if (body_sort && !subsort(*body_sort, sig.result)) {
    report.error(def.location, "S-DEF",
                 std::string("body of '") + def.name + "' has sort " + body_sort->to_string() +
                     ", not below " + sig.result.to_string() + " from the " + flavour +
                     " signature " + sig.to_string());
  }
}

}  // namespace

Report check_function_sorts(const FunctionDef& def, const Registry& registry) {
  Report report;
  const FunctionEntry& entry = registry.at(def.name);
  for (const auto& sig : entry.sort_sigs) {
    if (sig.args.size() != def.params.size()) continue;  // reported by validation
    check_against_signature(def, sig, "sort", registry, report);
  }
  for (const auto& sig : entry.stab_sigs) {
    if (sig.args.size() != def.params.size()) continue;
    check_against_signature(def, sig, "stabilising", registry, report);
  }
  return report;
}

Report check_program_sorts(const Program& p, const Registry& registry) {
  Report report;
  for (const auto& [name, def] : p.defs) {
    report.append(check_function_sorts(def, registry));
  }
  return report;
}

}  // namespace fieldcalc
