#include "fieldcalc/ast.hpp"

#include <algorithm>
#include <functional>

namespace fieldcalc {

ExprPtr make_expr(Expression::Node node, SourceLocation loc) {
  return std::make_shared<const Expression>(std::move(node), loc);
}

ExprPtr make_pair_expr(ExprPtr first, ExprPtr second, SourceLocation loc) {
  auto* lhs = first->as<Expression::Literal>();
  auto* rhs = second->as<Expression::Literal>();
  if (lhs && rhs) {
    return make_expr(Expression::Literal{Value::pair(lhs->value, rhs->value)}, loc);
  }
  return make_expr(Expression::PairCtor{std::move(first), std::move(second)}, loc);
}

bool expr_equal(const Expression& a, const Expression& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* v = a.as<Expression::Variable>()) {
    return v->name == b.as<Expression::Variable>()->name;
  }
  if (auto* s = a.as<Expression::Sensor>()) {
    return s->name == b.as<Expression::Sensor>()->name;
  }
  if (auto* l = a.as<Expression::Literal>()) {
    return l->value == b.as<Expression::Literal>()->value;
  }
  if (auto* p = a.as<Expression::PairCtor>()) {
    auto* q = b.as<Expression::PairCtor>();
    return expr_equal(*p->first, *q->first) && expr_equal(*p->second, *q->second);
  }
  if (auto* f = a.as<Expression::First>()) {
    return expr_equal(*f->arg, *b.as<Expression::First>()->arg);
  }
  if (auto* s = a.as<Expression::Second>()) {
    return expr_equal(*s->arg, *b.as<Expression::Second>()->arg);
  }
  if (auto* c = a.as<Expression::Conditional>()) {
    auto* d = b.as<Expression::Conditional>();
    return expr_equal(*c->cond, *d->cond) && expr_equal(*c->then_branch, *d->then_branch) &&
           expr_equal(*c->else_branch, *d->else_branch);
  }
  if (auto* ap = a.as<Expression::Apply>()) {
    auto* bp = b.as<Expression::Apply>();
    if (ap->function != bp->function || ap->args.size() != bp->args.size()) return false;
    for (size_t i = 0; i < ap->args.size(); ++i) {
      if (!expr_equal(*ap->args[i], *bp->args[i])) return false;
    }
    return true;
  }
  auto* sp = a.as<Expression::Spread>();
  auto* sq = b.as<Expression::Spread>();
  if (sp->diffusion != sq->diffusion || sp->extra.size() != sq->extra.size()) return false;
  if (!expr_equal(*sp->source, *sq->source)) return false;
  for (size_t i = 0; i < sp->extra.size(); ++i) {
    if (!expr_equal(*sp->extra[i], *sq->extra[i])) return false;
  }
  return true;
}

namespace {

bool is_infix_builtin(const std::string& name) {
  return name == "+" || name == "or" || name == "<" || name == "=";
}

// Precedence-aware printing keeps round trips exact without flooding
// the output with parentheses.
enum Prec { PCond = 0, POr, PCmp, PSum, PUnary, PProj, PAtom };

void print(const Expression& e, std::string& out, int min_prec);

void print(const Expression& e, std::string& out, int min_prec) {
  if (auto* v = e.as<Expression::Variable>()) {
    out += v->name;
    return;
  }
  if (auto* s = e.as<Expression::Sensor>()) {
    out += "#" + s->name;
    return;
  }
  if (auto* l = e.as<Expression::Literal>()) {
    out += l->value.to_string();
    return;
  }
  if (auto* p = e.as<Expression::PairCtor>()) {
    out += "<";
    print(*p->first, out, PCond);
    out += ", ";
    print(*p->second, out, PCond);
    out += ">";
    return;
  }
  if (auto* f = e.as<Expression::First>()) {
    if (PProj < min_prec) {
      out += "(fst ";
      print(*f->arg, out, PProj);
      out += ")";
    } else {
      out += "fst ";
      print(*f->arg, out, PProj);
    }
    return;
  }
  if (auto* s = e.as<Expression::Second>()) {
    if (PProj < min_prec) {
      out += "(snd ";
      print(*s->arg, out, PProj);
      out += ")";
    } else {
      out += "snd ";
      print(*s->arg, out, PProj);
    }
    return;
  }
  if (auto* c = e.as<Expression::Conditional>()) {
    bool wrap = PCond < min_prec;
    if (wrap) out += "(";
    print(*c->cond, out, POr);
    out += " ? ";
    print(*c->then_branch, out, PCond);
    out += " : ";
    print(*c->else_branch, out, PCond);
    if (wrap) out += ")";
    return;
  }
  if (auto* ap = e.as<Expression::Apply>()) {
    if (ap->function == "-" && ap->args.size() == 1) {
      bool wrap = PUnary < min_prec;
      if (wrap) out += "(";
      out += "-";
      print(*ap->args[0], out, PUnary);
      if (wrap) out += ")";
      return;
    }
    if (ap->function == "not" && ap->args.size() == 1) {
      bool wrap = PUnary < min_prec;
      if (wrap) out += "(";
      out += "not ";
      print(*ap->args[0], out, PUnary);
      if (wrap) out += ")";
      return;
    }
    if (is_infix_builtin(ap->function) && ap->args.size() == 2) {
      int prec = ap->function == "or" ? POr : (ap->function == "+" ? PSum : PCmp);
      bool wrap = prec < min_prec;
      if (wrap) out += "(";
      print(*ap->args[0], out, prec);
      out += " " + ap->function + " ";
      // left-associative chains: the right operand needs one level more
      print(*ap->args[1], out, prec + 1);
      if (wrap) out += ")";
      return;
    }
    out += ap->function + "(";
    for (size_t i = 0; i < ap->args.size(); ++i) {
      if (i) out += ", ";
      print(*ap->args[i], out, PCond);
    }
    out += ")";
    return;
  }
  auto* sp = e.as<Expression::Spread>();
  out += "{ ";
  print(*sp->source, out, PCond);
  out += " : ";
  if (is_infix_builtin(sp->diffusion) && sp->extra.size() == 1) {
    out += "@ " + sp->diffusion + " ";
    print(*sp->extra[0], out, PCond);
  } else {
    out += sp->diffusion + "(@";
    for (const auto& arg : sp->extra) {
      out += ", ";
      print(*arg, out, PCond);
    }
    out += ")";
  }
  out += " }";
}

}  // namespace

std::string expr_to_string(const Expression& e) {
  std::string out;
  print(e, out, PCond);
  return out;
}

TypeSignature FunctionDef::type_signature() const {
  TypeSignature sig;
  sig.result = return_type;
  for (const auto& p : params) sig.args.push_back(p.type);
  return sig;
}

std::string def_to_string(const FunctionDef& def) {
  std::string out;
  auto sig_line = [&](const std::string& tag, const std::vector<SortSignature>& sigs) {
    if (sigs.empty()) return;
    out += tag + " ";
    for (size_t i = 0; i < sigs.size(); ++i) {
      if (i) out += ", ";
      out += sigs[i].to_string();
    }
    out += "\n";
  };
  sig_line("@sig", def.declared_sorts);
  sig_line("@stab", def.declared_stab);
  if (!def.declared_ann.empty()) {
    out += "@ann ";
    for (size_t i = 0; i < def.declared_ann.size(); ++i) {
      if (i) out += ", ";
      out += def.declared_ann[i].to_string();
    }
    out += "\n";
  }
  out += "def " + def.return_type.to_string() + " " + def.name + "(";
  for (size_t i = 0; i < def.params.size(); ++i) {
    if (i) out += ", ";
    out += def.params[i].type.to_string() + " " + def.params[i].name;
  }
  out += ") is " + expr_to_string(*def.body);
  return out;
}

const FunctionDef* Program::find(const std::string& name) const {
  auto it = defs.find(name);
  return it == defs.end() ? nullptr : &it->second;
}

std::string program_to_string(const Program& p) {
  std::string out;
  for (const auto& [name, def] : p.defs) {
    out += def_to_string(def) + "\n\n";
  }
  return out;
}

namespace {

template <typename Fn>
void visit_expr(const Expression& e, Fn&& fn) {
  fn(e);
  if (auto* p = e.as<Expression::PairCtor>()) {
    visit_expr(*p->first, fn);
    visit_expr(*p->second, fn);
  } else if (auto* f = e.as<Expression::First>()) {
    visit_expr(*f->arg, fn);
  } else if (auto* s = e.as<Expression::Second>()) {
    visit_expr(*s->arg, fn);
  } else if (auto* c = e.as<Expression::Conditional>()) {
    visit_expr(*c->cond, fn);
    visit_expr(*c->then_branch, fn);
    visit_expr(*c->else_branch, fn);
  } else if (auto* ap = e.as<Expression::Apply>()) {
    for (const auto& arg : ap->args) visit_expr(*arg, fn);
  } else if (auto* sp = e.as<Expression::Spread>()) {
    visit_expr(*sp->source, fn);
    for (const auto& arg : sp->extra) visit_expr(*arg, fn);
  }
}

}  // namespace

std::set<std::string> free_variables(const Expression& e) {
  std::set<std::string> out;
  visit_expr(e, [&](const Expression& sub) {
    if (auto* v = sub.as<Expression::Variable>()) out.insert(v->name);
  });
  return out;
}

std::set<std::string> called_functions(const Expression& e) {
  std::set<std::string> out;
  visit_expr(e, [&](const Expression& sub) {
    if (auto* ap = sub.as<Expression::Apply>()) out.insert(ap->function);
    if (auto* sp = sub.as<Expression::Spread>()) out.insert(sp->diffusion);
  });
  return out;
}

bool contains_spread(const Expression& e) {
  bool found = false;
  visit_expr(e, [&](const Expression& sub) {
    if (sub.as<Expression::Spread>()) found = true;
  });
  return found;
}

bool contains_sensor(const Expression& e) {
  bool found = false;
  visit_expr(e, [&](const Expression& sub) {
    if (sub.as<Expression::Sensor>()) found = true;
  });
  return found;
}

namespace {

bool is_builtin_name(const std::string& name) {
  return name == "not" || name == "or" || name == "-" || name == "+" || name == "=" ||
         name == "<";
}

// Detects a cycle through user-defined functions reachable from `name`.
bool find_cycle(const Program& p, const std::string& name, std::set<std::string>& visiting,
                std::set<std::string>& done, std::string& cycle_at) {
  if (done.count(name)) return false;
  if (visiting.count(name)) {
    cycle_at = name;
    return true;
  }
  const FunctionDef* def = p.find(name);
  if (!def) return false;
  visiting.insert(name);
  for (const auto& callee : called_functions(*def->body)) {
    if (find_cycle(p, callee, visiting, done, cycle_at)) return true;
  }
  visiting.erase(name);
  done.insert(name);
  return false;
}

}  // namespace

Report program_sanity(const Program& p, bool is_library) {
  Report report;
  for (const auto& [name, def] : p.defs) {
    std::set<std::string> seen;
    for (const auto& param : def.params) {
      if (!seen.insert(param.name).second) {
        report.error(def.location, "SANITY-PARAMS",
                     "duplicate parameter '" + param.name + "' in " + name);
      }
    }
    for (const auto& var : free_variables(*def.body)) {
      if (!seen.count(var)) {
        report.error(def.location, "SANITY-FREE",
                     "unbound variable '" + var + "' in body of " + name);
      }
    }
    for (const auto& callee : called_functions(*def.body)) {
      if (!is_builtin_name(callee) && !p.find(callee)) {
        report.error(def.location, "SANITY-II",
                     "function '" + callee + "' referenced by " + name + " is not defined");
      }
    }
  }
  std::set<std::string> visiting, done;
  for (const auto& [name, def] : p.defs) {
    std::string cycle_at;
    if (find_cycle(p, name, visiting, done, cycle_at)) {
      report.error(p.find(cycle_at) ? p.find(cycle_at)->location : SourceLocation{}, "SANITY-III",
                   "recursive call cycle through '" + cycle_at + "'");
      break;
    }
  }
  if (!is_library) {
    const FunctionDef* main_def = p.find("main");
    if (!main_def) {
      report.error({}, "SANITY-IV", "program has no main function");
    } else if (!main_def->params.empty()) {
      report.error(main_def->location, "SANITY-IV", "main must take zero arguments");
    }
  }
  return report;
}

}  // namespace fieldcalc
