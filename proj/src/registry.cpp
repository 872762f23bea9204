#include "fieldcalc/registry.hpp"

#include <algorithm>
#include <cfloat>

namespace fieldcalc {

namespace {

Sort gs(GroundSort g) { return Sort::ground(g); }

SortSignature sig1(Sort r, Sort a) { return SortSignature{std::move(r), {std::move(a)}}; }
SortSignature sig2(Sort r, Sort a, Sort b) {
  return SortSignature{std::move(r), {std::move(a), std::move(b)}};
}

AnnotatedSignature ann(SortSignature s, Annotation a) {
  return AnnotatedSignature{std::move(s), a};
}

// Addition over the extended reals. POSINF absorbs; NEGINF behaves as
// the least value, so adding anything finite to it lands just above the
// bottom and the sum still saturates downward on overflow. This keeps
// addition total and monotone, and progressive for a positive second
// argument as the stabilising table requires.
Value builtin_plus(const std::vector<Value>& args) {
  double a = args[0].as_number(), b = args[1].as_number();
  if (a == kPosInf || b == kPosInf) return Value::number(kPosInf);
  if (a == kNegInf) a = -DBL_MAX;
  if (b == kNegInf) b = -DBL_MAX;
  return Value::number(a + b);
}

Sort trivial_refinement(const TypeExpr& t) {
  if (t.is_ground()) {
    return t.ground() == GroundType::Real ? Sort::real() : Sort::boolean();
  }
  return Sort::pair(trivial_refinement(t.first()), trivial_refinement(t.second()));
}

SortSignature trivial_signature(const TypeSignature& type_sig) {
  SortSignature out;
  out.result = trivial_refinement(type_sig.result);
  for (const auto& t : type_sig.args) out.args.push_back(trivial_refinement(t));
  return out;
}

FunctionEntry make_builtin(std::string name, TypeSignature type_sig,
                           std::vector<SortSignature> sort_sigs,
                           std::vector<SortSignature> stab_sigs,
                           std::vector<AnnotatedSignature> ann_sigs, BuiltinFn fn) {
  FunctionEntry entry;
  entry.name = std::move(name);
  entry.type_sig = std::move(type_sig);
  entry.sort_sigs = std::move(sort_sigs);
  entry.stab_sigs = std::move(stab_sigs);
  entry.ann_sigs = std::move(ann_sigs);
  entry.builtin = std::move(fn);
  return entry;
}

std::map<std::string, FunctionEntry> builtin_entries() {
  std::map<std::string, FunctionEntry> out;
  const TypeExpr R = TypeExpr::real();
  const TypeExpr B = TypeExpr::boolean();

  out["not"] = make_builtin(
      "not", TypeSignature{B, {B}},
      {sig1(gs(GroundSort::True), gs(GroundSort::False)),
       sig1(gs(GroundSort::False), gs(GroundSort::True)),
       sig1(gs(GroundSort::Bool), gs(GroundSort::Bool))},
      {}, {},
      [](const std::vector<Value>& args) { return Value::boolean(!args[0].as_bool()); });

  out["or"] = make_builtin(
      "or", TypeSignature{B, {B, B}},
      {sig2(gs(GroundSort::False), gs(GroundSort::False), gs(GroundSort::False)),
       sig2(gs(GroundSort::True), gs(GroundSort::True), gs(GroundSort::Bool)),
       sig2(gs(GroundSort::True), gs(GroundSort::Bool), gs(GroundSort::True)),
       sig2(gs(GroundSort::Bool), gs(GroundSort::Bool), gs(GroundSort::Bool))},
      {sig2(gs(GroundSort::False), gs(GroundSort::False), gs(GroundSort::False)),
       sig2(gs(GroundSort::True), gs(GroundSort::True), gs(GroundSort::Bool)),
       sig2(gs(GroundSort::True), gs(GroundSort::Bool), gs(GroundSort::True))},
      {ann(sig2(gs(GroundSort::False), gs(GroundSort::False), gs(GroundSort::False)),
           Annotation::Bang),
       ann(sig2(gs(GroundSort::True), gs(GroundSort::True), gs(GroundSort::Bool)),
           Annotation::Bang),
       ann(sig2(gs(GroundSort::True), gs(GroundSort::Bool), gs(GroundSort::True)),
           Annotation::Bang)},
      [](const std::vector<Value>& args) {
        return Value::boolean(args[0].as_bool() || args[1].as_bool());
      });

  out["-"] = make_builtin(
      "-", TypeSignature{R, {R}},
      {sig1(gs(GroundSort::Nr), gs(GroundSort::Pr)), sig1(gs(GroundSort::Znr), gs(GroundSort::Zpr)),
       sig1(gs(GroundSort::Zr), gs(GroundSort::Zr)), sig1(gs(GroundSort::Zpr), gs(GroundSort::Znr)),
       sig1(gs(GroundSort::Pr), gs(GroundSort::Nr)), sig1(gs(GroundSort::Real), gs(GroundSort::Real))},
      {}, {},
      [](const std::vector<Value>& args) { return Value::number(-args[0].as_number()); });

  out["+"] = make_builtin(
      "+", TypeSignature{R, {R, R}},
      {sig2(gs(GroundSort::Nr), gs(GroundSort::Nr), gs(GroundSort::Znr)),
       sig2(gs(GroundSort::Nr), gs(GroundSort::Znr), gs(GroundSort::Nr)),
       sig2(gs(GroundSort::Znr), gs(GroundSort::Znr), gs(GroundSort::Znr)),
       sig2(gs(GroundSort::Zr), gs(GroundSort::Zr), gs(GroundSort::Zr)),
       sig2(gs(GroundSort::Zpr), gs(GroundSort::Zpr), gs(GroundSort::Zpr)),
       sig2(gs(GroundSort::Pr), gs(GroundSort::Zpr), gs(GroundSort::Pr)),
       sig2(gs(GroundSort::Pr), gs(GroundSort::Pr), gs(GroundSort::Zpr)),
       sig2(gs(GroundSort::Real), gs(GroundSort::Real), gs(GroundSort::Real))},
      {sig2(gs(GroundSort::Zr), gs(GroundSort::Zr), gs(GroundSort::Zr)),
       sig2(gs(GroundSort::Pr), gs(GroundSort::Zpr), gs(GroundSort::Pr)),
       sig2(gs(GroundSort::Real), gs(GroundSort::Real), gs(GroundSort::Pr))},
      {ann(sig2(gs(GroundSort::Nr), gs(GroundSort::Nr), gs(GroundSort::Zr)), Annotation::Quest),
       ann(sig2(gs(GroundSort::Znr), gs(GroundSort::Znr), gs(GroundSort::Zr)), Annotation::Quest),
       ann(sig2(gs(GroundSort::Zr), gs(GroundSort::Zr), gs(GroundSort::Zr)), Annotation::Bang),
       ann(sig2(gs(GroundSort::Zpr), gs(GroundSort::Zpr), gs(GroundSort::Zpr)), Annotation::Quest),
       ann(sig2(gs(GroundSort::Pr), gs(GroundSort::Zpr), gs(GroundSort::Pr)), Annotation::Bang),
       ann(sig2(gs(GroundSort::Pr), gs(GroundSort::Pr), gs(GroundSort::Zpr)), Annotation::Quest),
       ann(sig2(gs(GroundSort::Real), gs(GroundSort::Real), gs(GroundSort::Zpr)), Annotation::Quest),
       ann(sig2(gs(GroundSort::Real), gs(GroundSort::Real), gs(GroundSort::Pr)), Annotation::Bang)},
      builtin_plus);

  out["="] = make_builtin(
      "=", TypeSignature{B, {R, R}},
      {sig2(gs(GroundSort::False), gs(GroundSort::Znr), gs(GroundSort::Pr)),
       sig2(gs(GroundSort::False), gs(GroundSort::Nr), gs(GroundSort::Zpr)),
       sig2(gs(GroundSort::False), gs(GroundSort::Zpr), gs(GroundSort::Nr)),
       sig2(gs(GroundSort::False), gs(GroundSort::Pr), gs(GroundSort::Znr)),
       sig2(gs(GroundSort::True), gs(GroundSort::Zr), gs(GroundSort::Zr)),
       sig2(gs(GroundSort::Bool), gs(GroundSort::Real), gs(GroundSort::Real))},
      {}, {},
      [](const std::vector<Value>& args) {
        return Value::boolean(args[0].as_number() == args[1].as_number());
      });

  out["<"] = make_builtin(
      "<", TypeSignature{B, {R, R}},
      {sig2(gs(GroundSort::False), gs(GroundSort::Zpr), gs(GroundSort::Nr)),
       sig2(gs(GroundSort::False), gs(GroundSort::Pr), gs(GroundSort::Znr)),
       sig2(gs(GroundSort::False), gs(GroundSort::Zr), gs(GroundSort::Zr)),
       sig2(gs(GroundSort::True), gs(GroundSort::Nr), gs(GroundSort::Zpr)),
       sig2(gs(GroundSort::True), gs(GroundSort::Znr), gs(GroundSort::Pr)),
       sig2(gs(GroundSort::Bool), gs(GroundSort::Real), gs(GroundSort::Real))},
      {}, {},
      [](const std::vector<Value>& args) {
        return Value::boolean(args[0].as_number() < args[1].as_number());
      });

  return out;
}

}  // namespace

SensorTable::SensorTable() {
  sorts_.emplace("src", gs(GroundSort::Zpr));
  sorts_.emplace("dist", gs(GroundSort::Pr));
}

void SensorTable::declare(const std::string& name, Sort sort) {
  sorts_.insert_or_assign(name, std::move(sort));
}

std::optional<Sort> SensorTable::find(const std::string& name) const {
  auto it = sorts_.find(name);
  if (it == sorts_.end()) return std::nullopt;
  return it->second;
}

Sort SensorTable::sort_of(const std::string& name, Report* report, SourceLocation loc) const {
  if (auto s = find(name)) return *s;
  if (report) {
    report->warning(loc, "S-SNS",
                    "sensor '#" + name + "' has no declared sort; assuming real");
  }
  return Sort::real();
}

TypeExpr SensorTable::type_of(const std::string& name) const {
  if (auto s = find(name)) return s->underlying_type();
  return TypeExpr::real();
}

Registry::Registry() : entries_(builtin_entries()) {}

Registry Registry::for_program(const Program& p, SensorTable sensors) {
  Registry registry;
  registry.sensors_ = std::move(sensors);
  for (const auto& [name, def] : p.defs) {
    FunctionEntry entry;
    entry.name = name;
    entry.type_sig = def.type_signature();
    entry.def = &def;
    entry.stab_sigs = def.declared_stab;
    entry.ann_sigs = def.declared_ann;
    if (!def.declared_sorts.empty()) {
      entry.sort_sigs = def.declared_sorts;
    } else {
      std::vector<SortSignature> candidates = {trivial_signature(entry.type_sig)};
      candidates.insert(candidates.end(), def.declared_stab.begin(), def.declared_stab.end());
      entry.sort_sigs = minimals(std::move(candidates));
    }
    registry.entries_[name] = std::move(entry);
  }
  return registry;
}

const FunctionEntry* Registry::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const FunctionEntry& Registry::at(const std::string& name) const {
  const FunctionEntry* entry = find(name);
  if (!entry) throw InternalError("unknown function '" + name + "'");
  return *entry;
}

bool Registry::is_builtin(const std::string& name) const {
  const FunctionEntry* entry = find(name);
  return entry && entry->is_builtin();
}

bool Registry::is_pure(const std::string& name) const {
  const FunctionEntry* entry = find(name);
  if (!entry) return false;
  if (entry->is_builtin()) return true;
  // A user function is pure when nothing in its call graph spreads or
  // reads a sensor.
  std::vector<const FunctionDef*> stack = {entry->def};
  std::set<std::string> seen = {name};
  while (!stack.empty()) {
    const FunctionDef* def = stack.back();
    stack.pop_back();
    if (contains_spread(*def->body) || contains_sensor(*def->body)) return false;
    for (const auto& callee : called_functions(*def->body)) {
      if (!seen.insert(callee).second) continue;
      const FunctionEntry* sub = find(callee);
      if (sub && sub->def) stack.push_back(sub->def);
    }
  }
  return true;
}

bool Registry::is_diffusion(const std::string& name) const {
  const FunctionEntry* entry = find(name);
  return entry && entry->type_sig.is_diffusion_shape() && is_pure(name);
}

namespace {

Value eval_pure(const Registry& registry, const Expression& e,
                const std::map<std::string, Value>& env) {
  if (auto* v = e.as<Expression::Variable>()) {
    auto it = env.find(v->name);
    if (it == env.end()) throw InternalError("unbound variable in pure evaluation");
    return it->second;
  }
  if (auto* l = e.as<Expression::Literal>()) return l->value;
  if (auto* p = e.as<Expression::PairCtor>()) {
    return Value::pair(eval_pure(registry, *p->first, env),
                       eval_pure(registry, *p->second, env));
  }
  if (auto* f = e.as<Expression::First>()) return eval_pure(registry, *f->arg, env).first();
  if (auto* s = e.as<Expression::Second>()) return eval_pure(registry, *s->arg, env).second();
  if (auto* c = e.as<Expression::Conditional>()) {
    return eval_pure(registry, *c->cond, env).as_bool()
               ? eval_pure(registry, *c->then_branch, env)
               : eval_pure(registry, *c->else_branch, env);
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    std::vector<Value> args;
    args.reserve(ap->args.size());
    for (const auto& arg : ap->args) args.push_back(eval_pure(registry, *arg, env));
    return registry.apply_pure(ap->function, args);
  }
  throw InternalError("pure evaluation reached a sensor or spreading expression");
}

}  // namespace

Value Registry::apply_pure(const std::string& name, const std::vector<Value>& args) const {
  const FunctionEntry& entry = at(name);
  if (entry.is_builtin()) return entry.builtin(args);
  if (!entry.def) throw InternalError("function entry without definition");
  if (args.size() != entry.def->params.size()) {
    throw InternalError("arity mismatch applying " + name);
  }
  std::map<std::string, Value> env;
  for (size_t i = 0; i < args.size(); ++i) env.emplace(entry.def->params[i].name, args[i]);
  return eval_pure(*this, *entry.def->body, env);
}

bool is_canonical_top(const FunctionDef& def, const Sort& result_sort, const Program& p,
                      std::string* inner_diffusion) {
  if (!result_sort.is_pair() || !sort_key(result_sort).is_ground()) return false;
  auto* outer = def.body->as<Expression::Apply>();
  if (!outer || outer->args.size() != 1) return false;
  auto* inner = outer->args[0]->as<Expression::Apply>();
  if (!inner || inner->args.size() != def.params.size()) return false;
  for (size_t i = 0; i < inner->args.size(); ++i) {
    auto* var = inner->args[i]->as<Expression::Variable>();
    if (!var || var->name != def.params[i].name) return false;
  }
  const FunctionDef* wrapper = p.find(outer->function);
  if (!wrapper || wrapper->params.size() != 1) return false;

  // Wrapper body must be: (fst y = top-of-key) ? top-value : y
  const std::string& y = wrapper->params[0].name;
  auto* cond = wrapper->body->as<Expression::Conditional>();
  if (!cond) return false;
  auto* test = cond->cond->as<Expression::Apply>();
  if (!test || test->function != "=" || test->args.size() != 2) return false;
  auto* proj = test->args[0]->as<Expression::First>();
  if (!proj) return false;
  auto* proj_var = proj->arg->as<Expression::Variable>();
  if (!proj_var || proj_var->name != y) return false;
  auto* key_lit = test->args[1]->as<Expression::Literal>();
  if (!key_lit || key_lit->value != sort_top(sort_key(result_sort))) return false;
  auto* top_lit = cond->then_branch->as<Expression::Literal>();
  if (!top_lit || top_lit->value != sort_top(result_sort)) return false;
  auto* else_var = cond->else_branch->as<Expression::Variable>();
  if (!else_var || else_var->name != y) return false;

  if (inner_diffusion) *inner_diffusion = inner->function;
  return true;
}

namespace {

std::vector<SortSignature> bang_supports(const std::vector<AnnotatedSignature>& sigs) {
  std::vector<SortSignature> out;
  for (const auto& a : sigs) {
    if (a.annotation == Annotation::Bang) out.push_back(a.support);
  }
  return out;
}

bool same_signature_set(std::vector<SortSignature> a, std::vector<SortSignature> b) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b) {
      if (x == y) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool subset_of(const std::vector<SortSignature>& a, const std::vector<SortSignature>& b) {
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b) {
      if (x == y) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

Report validate_signature_sets(const Program& p, const Registry& registry) {
  Report report;
  for (const auto& [name, entry] : registry.entries()) {
    SourceLocation loc = entry.def ? entry.def->location : SourceLocation{};
    const TypeSignature& type_sig = entry.type_sig;
    SortSignature trivial = trivial_signature(type_sig);

    if (entry.sort_sigs.empty()) {
      report.error(loc, "SIG-NONEMPTY", "function '" + name + "' has no sort signatures");
      continue;
    }
    bool has_trivial_bound = false;
    for (const auto& sig : entry.sort_sigs) {
      if (!signature_refines(sig, type_sig)) {
        report.error(loc, "SIG-REFINES",
                     "sort signature " + sig.to_string() + " of '" + name +
                         "' does not refine " + type_sig.to_string());
      } else if (subsigning(sig, trivial)) {
        has_trivial_bound = true;
      }
    }
    if (!has_trivial_bound) {
      report.error(loc, "SIG-COVER",
                   "no sort signature of '" + name + "' is below its type signature");
    }
    if (!is_minimised(entry.sort_sigs, subsigning)) {
      report.error(loc, "SIG-MIN", "sort signatures of '" + name + "' are not minimised");
    }
    if (auto tuple = determinism_violation(entry.sort_sigs, type_sig.args)) {
      std::string args;
      for (const auto& s : *tuple) args += (args.empty() ? "" : ",") + s.to_string();
      report.error(loc, "SIG-DET",
                   "sort signatures of '" + name +
                       "' have no most specific element for arguments (" + args + ")");
    }

    bool diffusion = registry.is_diffusion(name);
    if (!entry.stab_sigs.empty() && !diffusion) {
      report.error(loc, "STAB-DIFFUSION",
                   "'" + name + "' declares stabilising signatures but is not a diffusion");
    }
    for (const auto& sig : entry.stab_sigs) {
      if (!signature_refines(sig, type_sig)) {
        report.error(loc, "STAB-REFINES",
                     "stabilising signature " + sig.to_string() + " of '" + name +
                         "' does not refine " + type_sig.to_string());
        continue;
      }
      if (!signature_progressive(sig)) {
        report.error(loc, "STAB-PROGRESSIVE",
                     "stabilising signature " + sig.to_string() + " of '" + name +
                         "' is not progressive");
      }
      if (!entry.is_builtin()) {
        bool implied = false;
        for (const auto& base : entry.sort_sigs) {
          if (subsigning(base, sig)) {
            implied = true;
            break;
          }
        }
        if (!implied) {
          report.error(loc, "STAB-IMPLIED",
                       "stabilising signature " + sig.to_string() + " of '" + name +
                           "' is not implied by its sort signatures");
        }
      }
    }
    if (!is_minimised(entry.stab_sigs, stab_subsigning)) {
      report.error(loc, "STAB-MIN",
                   "stabilising signatures of '" + name + "' are not minimised");
    }
    if (auto tuple = determinism_violation(entry.stab_sigs, type_sig.args)) {
      report.error(loc, "STAB-DET",
                   "stabilising signatures of '" + name + "' are not deterministic");
    }

    if (!entry.ann_sigs.empty() && !diffusion) {
      report.error(loc, "ANN-DIFFUSION",
                   "'" + name + "' declares annotated signatures but is not a diffusion");
    }
    for (const auto& asig : entry.ann_sigs) {
      if (!signature_refines(asig.support, type_sig)) {
        report.error(loc, "ANN-REFINES",
                     "annotated signature " + asig.to_string() + " of '" + name +
                         "' does not refine " + type_sig.to_string());
        continue;
      }
      if (!signature_progressive(asig.support)) {
        report.error(loc, "ANN-PROGRESSIVE",
                     "annotated signature " + asig.to_string() + " of '" + name +
                         "' has a non-progressive support");
      }
    }
    if (!is_minimised_annotated(entry.ann_sigs)) {
      report.error(loc, "ANN-MIN", "annotated signatures of '" + name + "' are not minimised");
    }
    if (!entry.ann_sigs.empty() &&
        annotated_determinism_violation(entry.ann_sigs, type_sig.args)) {
      report.error(loc, "ANN-DET",
                   "annotated signatures of '" + name + "' are not deterministic");
    }

    // Requirements for diffusions whose stabilising set is used by the
    // annotated checker.
    if (diffusion && !entry.is_builtin() && !entry.stab_sigs.empty()) {
      const SortSignature* least = nullptr;
      for (const auto& sig : entry.stab_sigs) {
        bool below_all = true;
        for (const auto& other : entry.stab_sigs) {
          if (!prog_subsort(sig.result, other.result)) {
            below_all = false;
            break;
          }
        }
        if (below_all) {
          least = &sig;
          break;
        }
      }
      if (!least) {
        report.error(loc, "STAB-LEAST",
                     "stabilising signatures of '" + name +
                         "' have no progressively least result sort");
      } else if (type_sig.result.is_pair()) {
        std::string inner;
        if (!is_canonical_top(*entry.def, least->result, p, &inner)) {
          report.error(loc, "STAB-CT",
                       "pair-result diffusion '" + name +
                           "' is not in canonical-top form");
        } else if (!registry.is_diffusion(inner)) {
          report.error(loc, "STAB-CT",
                       "inner function '" + inner + "' of '" + name + "' is not a diffusion");
        } else {
          const FunctionEntry& inner_entry = registry.at(inner);
          if (!inner_entry.is_builtin() && !inner_entry.stab_sigs.empty()) {
            report.error(loc, "STAB-CT",
                         "inner diffusion '" + inner +
                             "' must not declare stabilising signatures");
          }
          std::vector<SortSignature> bang = bang_supports(inner_entry.ann_sigs);
          bool linked = inner_entry.is_builtin() ? subset_of(entry.stab_sigs, bang)
                                                 : same_signature_set(entry.stab_sigs, bang);
          if (!linked) {
            report.error(loc, "ANN-LINK",
                         "stabilising signatures of '" + name +
                             "' do not match the [!]-annotated signatures of '" + inner + "'");
          }
        }
      }
    }
    if (diffusion && !entry.is_builtin() && type_sig.result.is_ground()) {
      if (!same_signature_set(entry.stab_sigs, bang_supports(entry.ann_sigs))) {
        report.error(loc, "ANN-LINK",
                     "stabilising signatures of '" + name +
                         "' must equal the supports of its [!]-annotated signatures");
      }
    }
  }
  return report;
}

}  // namespace fieldcalc
