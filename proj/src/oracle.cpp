#include "fieldcalc/oracle.hpp"

#include <deque>
#include <set>

#include "fieldcalc/rng.hpp"

namespace fieldcalc {

namespace {

std::vector<double>& real_base_grid_storage() {
  static std::vector<double> grid = {kNegInf, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, kPosInf};
  return grid;
}

}  // namespace

void set_real_base_grid(std::vector<double> values) {
  real_base_grid_storage() = std::move(values);
}

std::vector<double> real_base_grid() { return real_base_grid_storage(); }

std::vector<Value> default_grid(const Sort& s) {
  if (s.is_ground()) {
    std::vector<Value> out;
    if (s.underlying_type() == TypeExpr::real()) {
      for (double x : real_base_grid_storage()) {
        Value v = Value::number(x);
        if (sort_member(v, s)) out.push_back(v);
      }
    } else {
      for (bool b : {false, true}) {
        Value v = Value::boolean(b);
        if (sort_member(v, s)) out.push_back(v);
      }
    }
    Value top = sort_top(s);
    bool has_top = false;
    for (const auto& v : out) {
      if (v == top) has_top = true;
    }
    if (!has_top) out.push_back(top);
    return out;
  }
  std::vector<Value> out;
  for (const auto& a : default_grid(s.first())) {
    for (const auto& b : default_grid(s.second())) {
      out.push_back(Value::pair(a, b));
    }
  }
  return out;
}

std::string Witness::to_string() const {
  std::string out = condition + " at (";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i].to_string();
  }
  return out + ")";
}

namespace {

constexpr size_t kMaxWitnesses = 16;

void add_witness(OracleVerdict& verdict, std::string condition, std::vector<Value> values) {
  verdict.pass = false;
  if (verdict.witnesses.size() < kMaxWitnesses) {
    verdict.witnesses.push_back({std::move(condition), std::move(values)});
  }
}

// Enumerates tuples over the grids of the non-first argument sorts.
std::vector<std::vector<Value>> rest_tuples(const SortSignature& sig) {
  std::vector<std::vector<Value>> out = {{}};
  for (size_t i = 1; i < sig.args.size(); ++i) {
    std::vector<Value> grid = default_grid(sig.args[i]);
    std::vector<std::vector<Value>> next;
    next.reserve(out.size() * grid.size());
    for (const auto& prefix : out) {
      for (const auto& v : grid) {
        std::vector<Value> tuple = prefix;
        tuple.push_back(v);
        next.push_back(std::move(tuple));
      }
    }
    out = std::move(next);
  }
  return out;
}

Value apply_with_first(const Registry& registry, const std::string& f, const Value& first,
                       const std::vector<Value>& rest) {
  std::vector<Value> args;
  args.reserve(rest.size() + 1);
  args.push_back(first);
  args.insert(args.end(), rest.begin(), rest.end());
  return registry.apply_pure(f, args);
}

}  // namespace

OracleVerdict verify_stabilising(const std::string& f, const SortSignature& sig,
                                 const Registry& registry) {
  OracleVerdict verdict;
  if (sig.args.empty()) {
    add_witness(verdict, "signature has no arguments", {});
    return verdict;
  }
  const Sort& first_sort = sig.args[0];
  const std::vector<Value> first_grid = default_grid(first_sort);
  const Value top = sort_top(first_sort);

  for (const auto& rest : rest_tuples(sig)) {
    Value at_top = apply_with_first(registry, f, top, rest);
    ++verdict.checks;
    if (at_top != top) {
      std::vector<Value> w = {top};
      w.insert(w.end(), rest.begin(), rest.end());
      add_witness(verdict, "top is not a fixed point", std::move(w));
    }
    std::vector<Value> images;
    images.reserve(first_grid.size());
    for (const auto& v : first_grid) {
      Value r = apply_with_first(registry, f, v, rest);
      ++verdict.checks;
      if (!sort_member(r, sig.result)) {
        std::vector<Value> w = {v};
        w.insert(w.end(), rest.begin(), rest.end());
        add_witness(verdict, "result outside the declared sort", std::move(w));
      }
      if (v != top && !value_lt(v, r)) {
        std::vector<Value> w = {v};
        w.insert(w.end(), rest.begin(), rest.end());
        add_witness(verdict, "not progressive", std::move(w));
      }
      images.push_back(std::move(r));
    }
    for (size_t i = 0; i < first_grid.size(); ++i) {
      for (size_t j = 0; j < first_grid.size(); ++j) {
        if (i == j || !value_le(first_grid[i], first_grid[j])) continue;
        ++verdict.checks;
        if (!value_le(images[i], images[j])) {
          std::vector<Value> w = {first_grid[i], first_grid[j]};
          w.insert(w.end(), rest.begin(), rest.end());
          add_witness(verdict, "not monotone", std::move(w));
        }
      }
    }
  }
  return verdict;
}

OracleVerdict verify_prestabilising(const std::string& f, const SortSignature& sig,
                                    Annotation annotation, const Registry& registry) {
  OracleVerdict verdict;
  if (sig.args.empty()) {
    add_witness(verdict, "signature has no arguments", {});
    return verdict;
  }
  const Sort& first_sort = sig.args[0];
  const std::vector<Value> first_grid = default_grid(first_sort);
  const Value key_top = sort_top(sort_key(first_sort));

  for (const auto& rest : rest_tuples(sig)) {
    std::vector<Value> images;
    images.reserve(first_grid.size());
    for (const auto& v : first_grid) {
      Value r = apply_with_first(registry, f, v, rest);
      ++verdict.checks;
      if (!sort_member(r, sig.result)) {
        std::vector<Value> w = {v};
        w.insert(w.end(), rest.begin(), rest.end());
        add_witness(verdict, "result outside the declared sort", std::move(w));
      }
      if (!key_le(v, r)) {
        std::vector<Value> w = {v};
        w.insert(w.end(), rest.begin(), rest.end());
        add_witness(verdict, "not key-inflationary", std::move(w));
      }
      if (annotation == Annotation::Bang && value_key(v) != key_top && !key_lt(v, r)) {
        std::vector<Value> w = {v};
        w.insert(w.end(), rest.begin(), rest.end());
        add_witness(verdict, "not strictly key-inflationary below top", std::move(w));
      }
      images.push_back(std::move(r));
    }
    for (size_t i = 0; i < first_grid.size(); ++i) {
      for (size_t j = 0; j < first_grid.size(); ++j) {
        if (i == j) continue;
        if (!key_le(first_grid[i], first_grid[j])) continue;
        ++verdict.checks;
        if (!key_le(images[i], images[j])) {
          std::vector<Value> w = {first_grid[i], first_grid[j]};
          w.insert(w.end(), rest.begin(), rest.end());
          add_witness(verdict, "not key-monotone", std::move(w));
        }
        if (annotation == Annotation::Bang && key_lt(first_grid[i], first_grid[j]) &&
            value_key(images[i]) != key_top && !key_lt(images[i], images[j])) {
          std::vector<Value> w = {first_grid[i], first_grid[j]};
          w.insert(w.end(), rest.begin(), rest.end());
          add_witness(verdict, "not strictly key-monotone below top", std::move(w));
        }
      }
    }
  }
  return verdict;
}

bool SignatureSweep::all_pass() const {
  for (const auto& entry : entries) {
    if (!entry.verdict.pass) return false;
  }
  return true;
}

SignatureSweep verify_registry_signatures(const Registry& registry) {
  SignatureSweep sweep;
  for (const auto& [name, entry] : registry.entries()) {
    for (const auto& sig : entry.stab_sigs) {
      sweep.entries.push_back(
          {name, sig.to_string(), verify_stabilising(name, sig, registry)});
    }
    for (const auto& asig : entry.ann_sigs) {
      sweep.entries.push_back({name, asig.to_string(),
                               verify_prestabilising(name, asig.support, asig.annotation,
                                                     registry)});
    }
  }
  return sweep;
}

// ---- relaxation oracle ----

namespace {

ExprPtr substitute(const Expression& e, const std::map<std::string, ExprPtr>& bindings) {
  if (auto* v = e.as<Expression::Variable>()) {
    auto it = bindings.find(v->name);
    if (it == bindings.end()) throw InternalError("unbound variable while inlining");
    return it->second;
  }
  if (e.as<Expression::Sensor>() || e.as<Expression::Literal>()) {
    return make_expr(e.node, e.location);
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    return make_expr(
        Expression::PairCtor{substitute(*p->first, bindings), substitute(*p->second, bindings)},
        e.location);
  }
  if (auto* f = e.as<Expression::First>()) {
    return make_expr(Expression::First{substitute(*f->arg, bindings)}, e.location);
  }
  if (auto* s = e.as<Expression::Second>()) {
    return make_expr(Expression::Second{substitute(*s->arg, bindings)}, e.location);
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    return make_expr(Expression::Conditional{substitute(*c->cond, bindings),
                                             substitute(*c->then_branch, bindings),
                                             substitute(*c->else_branch, bindings)},
                     e.location);
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    std::vector<ExprPtr> args;
    for (const auto& arg : ap->args) args.push_back(substitute(*arg, bindings));
    return make_expr(Expression::Apply{ap->function, std::move(args)}, e.location);
  }
  auto* sp = e.as<Expression::Spread>();
  std::vector<ExprPtr> extra;
  for (const auto& arg : sp->extra) extra.push_back(substitute(*arg, bindings));
  return make_expr(Expression::Spread{substitute(*sp->source, bindings), sp->diffusion,
                                      std::move(extra)},
                   e.location);
}

}  // namespace

ExprPtr inline_user_calls(const Expression& e, const Program& p) {
  if (auto* ap = e.as<Expression::Apply>()) {
    std::vector<ExprPtr> args;
    for (const auto& arg : ap->args) args.push_back(inline_user_calls(*arg, p));
    const FunctionDef* def = p.find(ap->function);
    if (!def) {
      return make_expr(Expression::Apply{ap->function, std::move(args)}, e.location);
    }
    std::map<std::string, ExprPtr> bindings;
    for (size_t i = 0; i < def->params.size(); ++i) {
      bindings.emplace(def->params[i].name, args[i]);
    }
    return inline_user_calls(*substitute(*def->body, bindings), p);
  }
  if (auto* pc = e.as<Expression::PairCtor>()) {
    return make_expr(Expression::PairCtor{inline_user_calls(*pc->first, p),
                                          inline_user_calls(*pc->second, p)},
                     e.location);
  }
  if (auto* f = e.as<Expression::First>()) {
    return make_expr(Expression::First{inline_user_calls(*f->arg, p)}, e.location);
  }
  if (auto* s = e.as<Expression::Second>()) {
    return make_expr(Expression::Second{inline_user_calls(*s->arg, p)}, e.location);
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    return make_expr(Expression::Conditional{inline_user_calls(*c->cond, p),
                                             inline_user_calls(*c->then_branch, p),
                                             inline_user_calls(*c->else_branch, p)},
                     e.location);
  }
  if (auto* sp = e.as<Expression::Spread>()) {
    std::vector<ExprPtr> extra;
    for (const auto& arg : sp->extra) extra.push_back(inline_user_calls(*arg, p));
    return make_expr(
        Expression::Spread{inline_user_calls(*sp->source, p), sp->diffusion, std::move(extra)},
        e.location);
  }
  return make_expr(e.node, e.location);
}

namespace {

int count_spreads(const Expression& e) {
  int count = e.as<Expression::Spread>() ? 1 : 0;
  if (auto* p = e.as<Expression::PairCtor>()) {
    count += count_spreads(*p->first) + count_spreads(*p->second);
  } else if (auto* f = e.as<Expression::First>()) {
    count += count_spreads(*f->arg);
  } else if (auto* s = e.as<Expression::Second>()) {
    count += count_spreads(*s->arg);
  } else if (auto* c = e.as<Expression::Conditional>()) {
    count += count_spreads(*c->cond) + count_spreads(*c->then_branch) +
             count_spreads(*c->else_branch);
  } else if (auto* ap = e.as<Expression::Apply>()) {
    for (const auto& arg : ap->args) count += count_spreads(*arg);
  } else if (auto* sp = e.as<Expression::Spread>()) {
    count += count_spreads(*sp->source);
    for (const auto& arg : sp->extra) count += count_spreads(*arg);
  }
  return count;
}

ExprPtr replace_spread(const Expression& e, const std::string& placeholder) {
  if (e.as<Expression::Spread>()) {
    return make_expr(Expression::Variable{placeholder}, e.location);
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    return make_expr(Expression::PairCtor{replace_spread(*p->first, placeholder),
                                          replace_spread(*p->second, placeholder)},
                     e.location);
  }
  if (auto* f = e.as<Expression::First>()) {
    return make_expr(Expression::First{replace_spread(*f->arg, placeholder)}, e.location);
  }
  if (auto* s = e.as<Expression::Second>()) {
    return make_expr(Expression::Second{replace_spread(*s->arg, placeholder)}, e.location);
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    return make_expr(Expression::Conditional{replace_spread(*c->cond, placeholder),
                                             replace_spread(*c->then_branch, placeholder),
                                             replace_spread(*c->else_branch, placeholder)},
                     e.location);
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    std::vector<ExprPtr> args;
    for (const auto& arg : ap->args) args.push_back(replace_spread(*arg, placeholder));
    return make_expr(Expression::Apply{ap->function, std::move(args)}, e.location);
  }
  return make_expr(e.node, e.location);
}

Value eval_spread_free(const Expression& e, const SensorState& sensors,
                       const std::map<std::string, Value>& env, const Registry& registry) {
  if (auto* v = e.as<Expression::Variable>()) {
    auto it = env.find(v->name);
    if (it == env.end()) throw InternalError("unbound variable in oracle evaluation");
    return it->second;
  }
  if (auto* s = e.as<Expression::Sensor>()) {
    auto it = sensors.find(s->name);
    if (it == sensors.end()) throw EvalError("missing sensor '#" + s->name + "'");
    return it->second;
  }
  if (auto* l = e.as<Expression::Literal>()) return l->value;
  if (auto* p = e.as<Expression::PairCtor>()) {
    return Value::pair(eval_spread_free(*p->first, sensors, env, registry),
                       eval_spread_free(*p->second, sensors, env, registry));
  }
  if (auto* f = e.as<Expression::First>()) {
    return eval_spread_free(*f->arg, sensors, env, registry).first();
  }
  if (auto* s = e.as<Expression::Second>()) {
    return eval_spread_free(*s->arg, sensors, env, registry).second();
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    return eval_spread_free(*c->cond, sensors, env, registry).as_bool()
               ? eval_spread_free(*c->then_branch, sensors, env, registry)
               : eval_spread_free(*c->else_branch, sensors, env, registry);
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    std::vector<Value> args;
    for (const auto& arg : ap->args) {
      args.push_back(eval_spread_free(*arg, sensors, env, registry));
    }
    return registry.apply_pure(ap->function, args);
  }
  throw InternalError("spreading expression in spread-free evaluation");
}

}  // namespace

std::optional<SpreadDecomposition> decompose_single_spread(const Expression& main_body,
                                                           const Program& p) {
  ExprPtr inlined = inline_user_calls(main_body, p);
  if (count_spreads(*inlined) != 1) return std::nullopt;

  const Expression* spread_node = nullptr;
  std::function<void(const Expression&)> find = [&](const Expression& e) {
    if (e.as<Expression::Spread>()) {
      spread_node = &e;
      return;
    }
    if (auto* pc = e.as<Expression::PairCtor>()) {
      find(*pc->first);
      find(*pc->second);
    } else if (auto* f = e.as<Expression::First>()) {
      find(*f->arg);
    } else if (auto* s = e.as<Expression::Second>()) {
      find(*s->arg);
    } else if (auto* c = e.as<Expression::Conditional>()) {
      find(*c->cond);
      find(*c->then_branch);
      find(*c->else_branch);
    } else if (auto* ap = e.as<Expression::Apply>()) {
      for (const auto& arg : ap->args) find(*arg);
    }
  };
  find(*inlined);
  if (!spread_node) return std::nullopt;
  auto* sp = spread_node->as<Expression::Spread>();
  if (contains_spread(*sp->source)) return std::nullopt;
  for (const auto& arg : sp->extra) {
    if (contains_spread(*arg)) return std::nullopt;
  }
  SpreadDecomposition out;
  out.source = sp->source;
  out.diffusion = sp->diffusion;
  out.extra = sp->extra;
  out.placeholder = "__spread__";
  out.context = replace_spread(*inlined, out.placeholder);
  return out;
}

RelaxationResult relaxation_fixpoint(const Program& p, const Registry& registry,
                                     const std::map<std::string, SensorState>& device_sensors,
                                     const std::map<std::string, std::set<std::string>>& topology,
                                     long iteration_cap, std::uint64_t shuffle_seed) {
  RelaxationResult result;
  const FunctionDef* main_def = p.find("main");
  if (!main_def) return result;
  auto decomposition = decompose_single_spread(*main_def->body, p);
  if (!decomposition) return result;
  result.applicable = true;

  struct DeviceData {
    Value source = Value::number(0);
    std::vector<Value> extra;
  };
  std::map<std::string, DeviceData> data;
  std::map<std::string, Value> x;
  for (const auto& [id, sensors] : device_sensors) {
    DeviceData d;
    d.source = eval_spread_free(*decomposition->source, sensors, {}, registry);
    for (const auto& arg : decomposition->extra) {
      d.extra.push_back(eval_spread_free(*arg, sensors, {}, registry));
    }
    x.emplace(id, d.source);
    data.emplace(id, std::move(d));
  }

  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& [id, neighbours] : topology) {
    for (const auto& n : neighbours) dependents[n].push_back(id);
  }

  if (iteration_cap <= 0) {
    iteration_cap = static_cast<long>(device_sensors.size()) * 1000 + 1000;
  }
  std::deque<std::string> worklist;
  std::set<std::string> queued;
  for (const auto& [id, _] : device_sensors) {
    worklist.push_back(id);
    queued.insert(id);
  }
  Rng rng(shuffle_seed);

  while (!worklist.empty() && result.iterations < iteration_cap) {
    ++result.iterations;
    std::string id;
    if (shuffle_seed != 0) {
      size_t pick = static_cast<size_t>(rng.bounded(worklist.size()));
      id = worklist[pick];
      worklist.erase(worklist.begin() + static_cast<std::ptrdiff_t>(pick));
    } else {
      id = worklist.front();
      worklist.pop_front();
    }
    queued.erase(id);
    const DeviceData& d = data.at(id);
    std::vector<Value> candidates = {d.source};
    auto topo_it = topology.find(id);
    if (topo_it != topology.end()) {
      for (const auto& n : topo_it->second) {
        std::vector<Value> args = {x.at(n)};
        args.insert(args.end(), d.extra.begin(), d.extra.end());
        candidates.push_back(registry.apply_pure(decomposition->diffusion, args));
      }
    }
    Value next = value_min(candidates);
    if (next != x.at(id)) {
      x.at(id) = std::move(next);
      for (const auto& dep : dependents[id]) {
        if (queued.insert(dep).second) worklist.push_back(dep);
      }
    }
  }
  result.converged = worklist.empty();

  for (const auto& [id, sensors] : device_sensors) {
    std::map<std::string, Value> env = {{decomposition->placeholder, x.at(id)}};
    result.roots.emplace(
        id, eval_spread_free(*decomposition->context, sensors, env, registry));
  }
  return result;
}

}  // namespace fieldcalc
