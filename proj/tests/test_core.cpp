#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fieldcalc/oracle.hpp"
#include "fieldcalc/parser.hpp"
#include "fieldcalc/registry.hpp"
#include "fieldcalc/signatures.hpp"
#include "fieldcalc/sorts.hpp"
#include "fieldcalc/value.hpp"
#include "test_support.hpp"

using namespace fieldcalc;
using namespace fieldcalc::test;

namespace {

const TypeExpr kReal = TypeExpr::real();
const TypeExpr kBool = TypeExpr::boolean();
const TypeExpr kRealBool = TypeExpr::pair(kReal, kBool);
const TypeExpr kRealReal = TypeExpr::pair(kReal, kReal);

std::vector<TypeExpr> sample_types() {
  return {kReal, kBool, kRealBool, TypeExpr::pair(kRealBool, kReal)};
}

}  // namespace

TEST_CASE("value comparison follows the per-type total order") {
  CHECK(value_compare(bv(false), bv(true)) == Ordering::Less);
  CHECK(value_compare(pr(num(1), bv(true)), pr(num(1), bv(false))) == Ordering::Greater);
  CHECK(value_compare(pr(num(0), num(kPosInf)), pr(num(1), num(kNegInf))) == Ordering::Less);
  CHECK(value_compare(num(3), num(3)) == Ordering::Equal);
}

TEST_CASE("value comparison is a total order on random values") {
  Rng rng(11);
  for (const TypeExpr& t : sample_types()) {
    for (int i = 0; i < 250; ++i) {
      Value a = random_value(t, rng);
      Value b = random_value(t, rng);
      Value c = random_value(t, rng);
      // totality and antisymmetry
      Ordering ab = value_compare(a, b);
      Ordering ba = value_compare(b, a);
      if (ab == Ordering::Less) CHECK(ba == Ordering::Greater);
      if (ab == Ordering::Equal) {
        CHECK(ba == Ordering::Equal);
        CHECK(a == b);
      }
      // transitivity
      if (value_le(a, b) && value_le(b, c)) CHECK(value_le(a, c));
    }
  }
}

TEST_CASE("value_min picks the least element and stays in the list") {
  CHECK(value_min({num(4), num(1), num(9)}) == num(1));
  CHECK(value_min({num(8)}) == num(8));
  CHECK(value_min({pr(num(2), bv(true)), pr(num(2), bv(false))}) == pr(num(2), bv(false)));

  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    std::vector<Value> vs;
    size_t n = 1 + rng.bounded(6);
    for (size_t j = 0; j < n; ++j) vs.push_back(random_value(kRealBool, rng));
    Value m = value_min(vs);
    bool found = false;
    for (const auto& v : vs) {
      CHECK(value_le(m, v));
      if (v == m) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("type tops") {
  CHECK(type_top(kReal) == num(kPosInf));
  CHECK(type_top(kBool) == bv(true));
  CHECK(type_top(kRealBool) == pr(num(kPosInf), bv(true)));

  Rng rng(13);
  for (const TypeExpr& t : sample_types()) {
    Value top = type_top(t);
    for (int i = 0; i < 100; ++i) CHECK(value_le(random_value(t, rng), top));
  }
}

TEST_CASE("NaN is rejected and negative zero is normalised") {
  CHECK_THROWS_AS(Value::number(std::numeric_limits<double>::quiet_NaN()), InternalError);
  CHECK(Value::number(-0.0) == num(0.0));
  CHECK(min_sort_of_value(Value::number(-0.0)) == Sort::ground(GroundSort::Zr));
}

// ---- sort lattice ----

namespace {

Sort S(const char* text) { return parse_sort(text); }

}  // namespace

TEST_CASE("ground subsorting matches the lattice") {
  CHECK(subsort(S("nr"), S("znr")));
  CHECK(subsort(S("zr"), S("zpr")));
  CHECK(subsort(S("pr"), S("zpr")));
  CHECK(subsort(S("znr"), S("real")));
  CHECK(subsort(S("true"), S("bool")));
  CHECK_FALSE(subsort(S("nr"), S("zpr")));
  CHECK_FALSE(subsort(S("znr"), S("zpr")));
  CHECK(subsort(S("<nr,nr>"), S("<nr,znr>")));
  CHECK(subsort(S("<<nr,nr>,true>"), S("<<nr,znr>,bool>")));
}

TEST_CASE("subsorting coincides with denotation inclusion on the grid") {
  std::vector<Sort> sorts = sorts_refining(kReal);
  auto bools = sorts_refining(kBool);
  sorts.insert(sorts.end(), bools.begin(), bools.end());
  for (const auto& a : sorts) {
    for (const auto& b : sorts) {
      if (a.underlying_type() != b.underlying_type()) continue;
      bool included = true;
      for (const auto& v : default_grid(a)) {
        if (!sort_member(v, b)) included = false;
      }
      CHECK(subsort(a, b) == included);
    }
  }
  // pairs: pointwise, spot-checked on a sampled product
  for (const auto& a : sorts_refining(kRealBool)) {
    for (const auto& b : sorts_refining(kRealBool)) {
      bool included = true;
      for (const auto& v : default_grid(a)) {
        if (!sort_member(v, b)) included = false;
      }
      CHECK(subsort(a, b) == included);
    }
  }
}

TEST_CASE("membership is the minimal-sort cone") {
  Rng rng(14);
  std::vector<Sort> sorts = sorts_refining(kRealBool);
  for (int i = 0; i < 200; ++i) {
    Value v = random_value(kRealBool, rng);
    for (const auto& s : sorts) {
      CHECK(sort_member(v, s) == subsort(min_sort_of_value(v), s));
    }
  }
}

TEST_CASE("least upper bounds") {
  CHECK(sort_lub(S("nr"), S("pr")) == S("real"));
  CHECK(sort_lub(S("zr"), S("pr")) == S("zpr"));
  CHECK(sort_lub(S("znr"), S("znr")) == S("znr"));
  CHECK(sort_lub(S("false"), S("true")) == S("bool"));

  std::vector<Sort> sorts = sorts_refining(kReal);
  for (const auto& a : sorts) {
    for (const auto& b : sorts) {
      Sort l = sort_lub(a, b);
      CHECK(subsort(a, l));
      CHECK(subsort(b, l));
      CHECK(sort_lub(b, a) == l);
      CHECK(sort_lub(a, a) == a);
      for (const auto& c : sorts) {
        CHECK(sort_lub(sort_lub(a, b), c) == sort_lub(a, sort_lub(b, c)));
        // least: any upper bound is above the lub
        if (subsort(a, c) && subsort(b, c)) CHECK(subsort(l, c));
      }
    }
  }
}

TEST_CASE("progressive subsorting preserves tops") {
  CHECK(prog_subsort(S("pr"), S("zpr")));
  CHECK(prog_subsort(S("zr"), S("znr")));
  CHECK(prog_subsort(S("zpr"), S("real")));
  CHECK(prog_subsort(S("true"), S("bool")));
  CHECK_FALSE(prog_subsort(S("nr"), S("znr")));
  CHECK_FALSE(prog_subsort(S("false"), S("bool")));
  CHECK(prog_subsort(S("<pr,pr>"), S("<zpr,zpr>")));

  std::vector<Sort> sorts = sorts_refining(kReal);
  auto bools = sorts_refining(kBool);
  sorts.insert(sorts.end(), bools.begin(), bools.end());
  for (const auto& a : sorts) {
    for (const auto& b : sorts) {
      if (a.underlying_type() != b.underlying_type()) continue;
      CHECK(prog_subsort(a, b) == (subsort(a, b) && sort_top(a) == sort_top(b)));
    }
  }
}

TEST_CASE("sort tops") {
  CHECK(sort_top(S("zpr")) == num(kPosInf));
  CHECK(sort_top(S("znr")) == num(0));
  CHECK(sort_top(S("zr")) == num(0));
  CHECK(sort_top(S("false")) == bv(false));
  CHECK(sort_top(S("<real,bool>")) == pr(num(kPosInf), bv(true)));
  // nr has no mathematical top over the reals; the convention is the
  // greatest negative double
  Value nr_top = sort_top(S("nr"));
  CHECK(nr_top.as_number() < 0);
  CHECK(sort_member(nr_top, S("nr")));
}

TEST_CASE("keys and the leftmost-as-key preorder") {
  CHECK(sort_key(S("<<real,bool>,pr>")) == S("real"));
  CHECK(sort_key(S("pr")) == S("pr"));
  CHECK(value_key(pr(pr(num(3), bv(true)), num(0))) == num(3));
  CHECK(key_compare(pr(num(1), bv(true)), pr(num(1), bv(false))) == Ordering::Equal);
  CHECK(key_compare(pr(num(0), bv(true)), pr(num(1), bv(false))) == Ordering::Less);

  // v <=key v' iff key(v) <= key(v') over an exhaustive small grid
  for (const Value& a : default_grid(S("<real,bool>"))) {
    for (const Value& b : default_grid(S("<real,bool>"))) {
      CHECK(key_le(a, b) == value_le(value_key(a), value_key(b)));
    }
  }
}

TEST_CASE("canonical top application") {
  Sort rb = S("<real,bool>");
  CHECK(canonical_top_apply(rb, pr(num(kPosInf), bv(false))) == pr(num(kPosInf), bv(true)));
  CHECK(canonical_top_apply(rb, pr(num(3), bv(false))) == pr(num(3), bv(false)));
  CHECK(canonical_top_apply(S("real"), num(7)) == num(7));
}

TEST_CASE("minimal sorts of values") {
  CHECK(min_sort_of_value(num(0)) == S("zr"));
  CHECK(min_sort_of_value(bv(true)) == S("true"));
  CHECK(min_sort_of_value(pr(num(-2), bv(false))) == S("<nr,false>"));
  CHECK(min_sort_of_value(num(kPosInf)) == S("pr"));
  CHECK(min_sort_of_value(num(kNegInf)) == S("nr"));
}

TEST_CASE("annotated sorts of ground values") {
  auto check_ann = [](const Value& v, const char* sort) {
    auto a = annotated_sort_of_ground(v);
    REQUIRE(a.has_value());
    CHECK(a->support == S(sort));
    CHECK(a->annotation == Annotation::Bang);
  };
  check_ann(bv(false), "false");
  check_ann(bv(true), "true");
  check_ann(num(0), "zr");
  check_ann(num(kPosInf), "pr");
  CHECK_FALSE(annotated_sort_of_ground(num(5)).has_value());
  CHECK_FALSE(annotated_sort_of_ground(num(-1)).has_value());
}

// ---- signatures ----

namespace {

SortSignature SIG(const char* text) { return parse_sort_signature(text); }
AnnotatedSignature ASIG(const char* text) { return parse_annotated_signature(text); }

}  // namespace

TEST_CASE("most specific sort signature") {
  Registry registry;
  const auto& or_sigs = registry.at("or").sort_sigs;
  auto m = most_specific(or_sigs, {S("true"), S("bool")});
  REQUIRE(m.has_value());
  CHECK(*m == SIG("true(true,bool)"));

  const auto& plus_stab = registry.at("+").stab_sigs;
  m = most_specific(plus_stab, {S("zpr"), S("pr")});
  REQUIRE(m.has_value());
  CHECK(*m == SIG("pr(zpr,pr)"));

  // a gossiping identity has no applicable stabilising signature
  std::vector<SortSignature> id_stab = {SIG("zr(zr)")};
  CHECK_FALSE(most_specific(id_stab, {S("pr")}).has_value());
}

TEST_CASE("most specific annotated signature") {
  Registry registry;
  const auto& plus_ann = registry.at("+").ann_sigs;
  auto m = most_specific_annotated(plus_ann, S("real"), Annotation::Quest, {S("pr")});
  REQUIRE(m.has_value());
  CHECK(m->signature == ASIG("real(real,pr)[!]"));
  CHECK(m->composed == Annotation::Bang);

  std::vector<AnnotatedSignature> restrict_ann = {ASIG("real(real,bool)[?]")};
  m = most_specific_annotated(restrict_ann, S("real"), Annotation::Bang, {S("bool")});
  REQUIRE(m.has_value());
  CHECK(m->signature == ASIG("real(real,bool)[?]"));
  CHECK(m->composed == Annotation::Bang);

  const auto& or_ann = registry.at("or").ann_sigs;
  m = most_specific_annotated(or_ann, S("false"), Annotation::Quest, {S("false")});
  REQUIRE(m.has_value());
  CHECK(m->signature == ASIG("false(false,false)[!]"));
}

TEST_CASE("annotated lookup filters by key progressivity") {
  Registry registry;
  const auto& plus_ann = registry.at("+").ann_sigs;
  // a zr first argument cannot use the zpr/real entries: their key tops
  // differ from zr's
  auto m = most_specific_annotated(plus_ann, S("zr"), Annotation::Quest, {S("zr")});
  REQUIRE(m.has_value());
  CHECK(m->signature == ASIG("zr(zr,zr)[!]"));
  CHECK(m->composed == Annotation::Bang);
  // with a pr second argument nothing is left: zr(zr,zr) wants zr and
  // the signatures reachable from key zpr/real are key-incompatible
  CHECK_FALSE(most_specific_annotated(plus_ann, S("zr"), Annotation::Quest, {S("pr")})
                  .has_value());
  // an incoming ! makes the composed annotation ! regardless
  m = most_specific_annotated(plus_ann, S("real"), Annotation::Bang, {S("zpr")});
  REQUIRE(m.has_value());
  CHECK(m->signature == ASIG("real(real,zpr)[?]"));
  CHECK(m->composed == Annotation::Bang);
}

TEST_CASE("most specific is least among applicable") {
  Registry registry;
  for (const char* name : {"not", "or", "-", "+", "=", "<"}) {
    const FunctionEntry& entry = registry.at(name);
    std::vector<std::vector<Sort>> spaces;
    for (const auto& t : entry.type_sig.args) spaces.push_back(sorts_refining(t));
    std::vector<size_t> idx(spaces.size(), 0);
    while (true) {
      std::vector<Sort> tuple;
      for (size_t i = 0; i < spaces.size(); ++i) tuple.push_back(spaces[i][idx[i]]);
      auto m = most_specific(entry.sort_sigs, tuple);
      REQUIRE(m.has_value());  // the trivial signature always applies
      for (const auto& other : applicable_signatures(entry.sort_sigs, tuple)) {
        CHECK(subsort(m->result, other.result));
      }
      size_t p = 0;
      while (p < spaces.size() && ++idx[p] == spaces[p].size()) idx[p++] = 0;
      if (p == spaces.size()) break;
    }
  }
}

// ---- registry tables (entry-for-entry) ----

namespace {

void check_table(const std::vector<SortSignature>& actual, const std::vector<const char*>& expect) {
  REQUIRE(actual.size() == expect.size());
  for (const char* text : expect) {
    bool found = false;
    for (const auto& sig : actual) {
      if (sig == SIG(text)) found = true;
    }
    CHECK_MESSAGE(found, "missing signature ", text);
  }
}

void check_ann_table(const std::vector<AnnotatedSignature>& actual,
                     const std::vector<const char*>& expect) {
  REQUIRE(actual.size() == expect.size());
  for (const char* text : expect) {
    bool found = false;
    for (const auto& sig : actual) {
      if (sig == ASIG(text)) found = true;
    }
    CHECK_MESSAGE(found, "missing signature ", text);
  }
}

}  // namespace

TEST_CASE("built-in sort signatures match the tables") {
  Registry registry;
  check_table(registry.at("not").sort_sigs, {"true(false)", "false(true)", "bool(bool)"});
  check_table(registry.at("or").sort_sigs,
              {"false(false,false)", "true(true,bool)", "true(bool,true)", "bool(bool,bool)"});
  check_table(registry.at("-").sort_sigs,
              {"nr(pr)", "znr(zpr)", "zr(zr)", "zpr(znr)", "pr(nr)", "real(real)"});
  check_table(registry.at("+").sort_sigs,
              {"nr(nr,znr)", "nr(znr,nr)", "znr(znr,znr)", "zr(zr,zr)", "zpr(zpr,zpr)",
               "pr(zpr,pr)", "pr(pr,zpr)", "real(real,real)"});
  check_table(registry.at("=").sort_sigs,
              {"false(znr,pr)", "false(nr,zpr)", "false(zpr,nr)", "false(pr,znr)", "true(zr,zr)",
               "bool(real,real)"});
  check_table(registry.at("<").sort_sigs,
              {"false(zpr,nr)", "false(pr,znr)", "false(zr,zr)", "true(nr,zpr)", "true(znr,pr)",
               "bool(real,real)"});
}

TEST_CASE("built-in stabilising signatures match the tables") {
  Registry registry;
  check_table(registry.at("or").stab_sigs,
              {"false(false,false)", "true(true,bool)", "true(bool,true)"});
  check_table(registry.at("+").stab_sigs, {"zr(zr,zr)", "pr(zpr,pr)", "real(real,pr)"});
  for (const char* name : {"not", "-", "=", "<"}) {
    CHECK(registry.at(name).stab_sigs.empty());
  }
  // real(real,pr) is stabilising but not minimal among the sort
  // signatures, so it must not appear there
  bool in_sort_sigs = false;
  for (const auto& sig : registry.at("+").sort_sigs) {
    if (sig == SIG("real(real,pr)")) in_sort_sigs = true;
  }
  CHECK_FALSE(in_sort_sigs);
}

TEST_CASE("built-in annotated signatures match the tables") {
  Registry registry;
  check_ann_table(registry.at("or").ann_sigs,
                  {"false(false,false)[!]", "true(true,bool)[!]", "true(bool,true)[!]"});
  check_ann_table(registry.at("+").ann_sigs,
                  {"nr(nr,zr)[?]", "znr(znr,zr)[?]", "zr(zr,zr)[!]", "zpr(zpr,zpr)[?]",
                   "pr(zpr,pr)[!]", "pr(pr,zpr)[?]", "real(real,zpr)[?]", "real(real,pr)[!]"});
  for (const char* name : {"not", "-", "=", "<"}) {
    CHECK(registry.at(name).ann_sigs.empty());
  }
}

TEST_CASE("built-in signature sets are well formed") {
  Registry registry;
  Program empty;
  Report report = validate_signature_sets(empty, registry);
  for (const auto& d : report.diagnostics) {
    CAPTURE(d.to_string());
  }
  CHECK(report.ok());
}

TEST_CASE("built-in semantics saturate") {
  Registry registry;
  auto plus = [&](Value a, Value b) { return registry.apply_pure("+", {a, b}); };
  CHECK(plus(num(2), num(3)) == num(5));
  CHECK(plus(num(kPosInf), num(1)) == num(kPosInf));
  CHECK(plus(num(kPosInf), num(kPosInf)) == num(kPosInf));
  CHECK(plus(num(kNegInf), num(kNegInf)) == num(kNegInf));
  // the bottom inflates when anything is added to it
  CHECK(value_lt(num(kNegInf), plus(num(kNegInf), num(0.5))));
  CHECK(value_lt(num(kNegInf), plus(num(kNegInf), num(kPosInf))));
  CHECK(registry.apply_pure("=", {num(kPosInf), num(kPosInf)}) == bv(true));
  CHECK(registry.apply_pure("<", {num(kNegInf), num(-2)}) == bv(true));
  CHECK(registry.apply_pure("-", {num(0)}) == num(0));
  CHECK(registry.apply_pure("-", {num(kPosInf)}) == num(kNegInf));
  CHECK(registry.apply_pure("not", {bv(false)}) == bv(true));
  CHECK(registry.apply_pure("or", {bv(true), bv(false)}) == bv(true));
}

TEST_CASE("built-in sort signatures are semantically sound on the grid") {
  Registry registry;
  for (const char* name : {"not", "or", "-", "+", "=", "<"}) {
    const FunctionEntry& entry = registry.at(name);
    for (const auto& sig : entry.sort_sigs) {
      std::vector<std::vector<Value>> grids;
      for (const auto& s : sig.args) grids.push_back(default_grid(s));
      std::vector<size_t> idx(grids.size(), 0);
      while (true) {
        std::vector<Value> args;
        for (size_t i = 0; i < grids.size(); ++i) args.push_back(grids[i][idx[i]]);
        Value result = registry.apply_pure(name, args);
        CHECK_MESSAGE(sort_member(result, sig.result), name, " ", sig.to_string(), " at ",
                      result.to_string());
        size_t p = 0;
        while (p < grids.size() && ++idx[p] == grids[p].size()) idx[p++] = 0;
        if (p == grids.size()) break;
      }
    }
  }
}
