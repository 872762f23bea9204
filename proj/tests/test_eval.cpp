#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fieldcalc/eval.hpp"
#include "fieldcalc/network.hpp"
#include "fieldcalc/parser.hpp"
#include "test_support.hpp"

using namespace fieldcalc;
using namespace fieldcalc::test;

namespace {

struct Loaded {
  Program program;
  Registry registry;
};

Loaded load(const std::string& text) {
  ParseResult parsed = parse_program(text);
  REQUIRE_MESSAGE(parsed.ok(), text);
  Loaded out{std::move(parsed.program), Registry()};
  out.registry = Registry::for_program(out.program);
  return out;
}

SensorState sensors(double src, double dist) {
  return {{"src", num(src)}, {"dist", num(dist)}};
}

ValueTree tree(Value root, std::vector<ValueTree> children = {}) {
  return ValueTree{std::move(root), std::move(children)};
}

}  // namespace

TEST_CASE("the hop-count gradient evaluations") {
  Loaded l = load("def real main() is { #src : @ + #dist }");
  ValueTree expected1 = tree(num(0), {tree(num(0)), tree(num(1))});
  ValueTree t1 = eval_main(l.program, sensors(0, 1), {}, l.registry);
  CHECK(t1 == expected1);

  ValueTree expected2 = tree(num(8), {tree(num(8)), tree(num(1))});
  ValueTree t2 = eval_main(l.program, sensors(8, 1), {}, l.registry);
  CHECK(t2 == expected2);

  // with both as neighbours: min{4, 0+1, 8+1} = 1
  ValueTree expected3 = tree(num(1), {tree(num(4)), tree(num(1))});
  ValueTree t3 = eval_main(l.program, sensors(4, 1), {t1, t2}, l.registry);
  CHECK(t3 == expected3);
}

TEST_CASE("an isolated device yields the source value") {
  Loaded l = load("def real main() is { #src : @ + #dist }");
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    double src = rng.unit() * 10;
    ValueTree t = eval_main(l.program, sensors(src, 1), {}, l.registry);
    CHECK(t.root == num(src));
  }
}

TEST_CASE("the spread root never exceeds the source value") {
  Loaded l = load("def real main() is { #src : @ + #dist }");
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    SensorState s = sensors(rng.unit() * 10, 0.5 + rng.unit());
    std::vector<ValueTree> neighbours;
    size_t n = rng.bounded(4);
    for (size_t j = 0; j < n; ++j) {
      neighbours.push_back(
          eval_main(l.program, sensors(rng.unit() * 10, 0.5 + rng.unit()), {}, l.registry));
    }
    ValueTree t = eval_main(l.program, s, neighbours, l.registry);
    CHECK(value_le(t.root, t.children[0].root));
  }
}

TEST_CASE("user-defined calls build argument trees plus a body tree") {
  Loaded l = load(
      "def real double(real x) is x + x\n"
      "def real main() is double(3)\n");
  ValueTree t = eval_main(l.program, {}, {}, l.registry);
  // children: the argument tree and the body tree
  REQUIRE(t.children.size() == 2);
  CHECK(t.root == num(6));
  CHECK(t.children[0] == tree(num(3)));
  CHECK(t.children[1].root == num(6));
  REQUIRE(t.children[1].children.size() == 2);
  CHECK(t.children[1].children[0] == tree(num(3)));
}

TEST_CASE("conditionals evaluate both branches") {
  Loaded l = load("def real main() is (1 < 2) ? 10 : 20");
  ValueTree t = eval_main(l.program, {}, {}, l.registry);
  CHECK(t.root == num(10));
  REQUIRE(t.children.size() == 3);
  CHECK(t.children[1].root == num(10));
  CHECK(t.children[2].root == num(20));
}

TEST_CASE("pair construction and projections carry their subtrees") {
  Loaded l = load("def real main() is fst <1 + 1, TRUE>");
  ValueTree t = eval_main(l.program, {}, {}, l.registry);
  CHECK(t.root == num(2));
  REQUIRE(t.children.size() == 1);
  CHECK(t.children[0].root == pr(num(2), bv(true)));
  REQUIRE(t.children[0].children.size() == 2);  // ctor with a non-value child

  // a literal pair is a value and evaluates to a leaf
  Loaded l2 = load("def <real,bool> main() is <1, TRUE>");
  ValueTree t2 = eval_main(l2.program, {}, {}, l2.registry);
  CHECK(t2 == tree(pr(num(1), bv(true))));
}

TEST_CASE("missing sensors are evaluation errors") {
  Loaded l = load("def real main() is #src + 1");
  CHECK_THROWS_AS(eval_main(l.program, {}, {}, l.registry), EvalError);
}

TEST_CASE("tree shape depends only on the expression") {
  Loaded l = load(
      "def real helper(real x, bool c) is c ? x : x + 1\n"
      "def real main() is { #src : restrictSumLike(@, #dist) }\n"
      "def real restrictSumLike(real x, real y) is helper(x + y, y < 1)\n");
  Rng rng(23);
  TreeShape shape = shape_of_expr(*l.program.defs.at("main").body, l.registry);
  std::vector<ValueTree> trees;
  for (int i = 0; i < 30; ++i) {
    std::vector<ValueTree> neighbours;
    for (size_t j = 0; j < rng.bounded(3); ++j) {
      neighbours.push_back(trees.empty() ? eval_main(l.program, sensors(rng.unit() * 5, 1), {},
                                                     l.registry)
                                         : trees[rng.bounded(trees.size())]);
    }
    ValueTree t =
        eval_main(l.program, sensors(rng.unit() * 5, 0.5 + rng.unit()), neighbours, l.registry);
    CHECK(tree_matches_shape(t, shape));
    trees.push_back(std::move(t));
  }
}

TEST_CASE("evaluation is deterministic") {
  Loaded l = load("def real main() is { #src : @ + #dist }");
  ValueTree n1 = eval_main(l.program, sensors(0, 1), {}, l.registry);
  ValueTree a = eval_main(l.program, sensors(4, 1), {n1}, l.registry);
  ValueTree b = eval_main(l.program, sensors(4, 1), {n1}, l.registry);
  CHECK(a == b);
}

TEST_CASE("mismatched neighbour trees are rejected before evaluation") {
  Loaded l = load("def real main() is { #src : @ + #dist }");
  ValueTree bogus = tree(num(0), {tree(num(0))});  // one child instead of two
  Report report = validate_neighbour_trees({bogus}, *l.program.defs.at("main").body, l.registry);
  CHECK_FALSE(report.ok());
  ValueTree fine = eval_main(l.program, sensors(0, 1), {}, l.registry);
  CHECK(validate_neighbour_trees({fine}, *l.program.defs.at("main").body, l.registry).ok());
}

TEST_CASE("deeply nested call chains terminate") {
  std::string text;
  int depth = 60;
  text += "def real f0(real x) is x + 1\n";
  for (int i = 1; i < depth; ++i) {
    text += "def real f" + std::to_string(i) + "(real x) is f" + std::to_string(i - 1) +
            "(x) + f" + std::to_string(i - 1) + "(0)\n";
  }
  text += "def real main() is f" + std::to_string(depth - 1) + "(1)\n";
  Loaded l = load(text);
  // evaluate through a shallower entry to keep the tree small
  ParseResult entry = parse_program("def real main() is f12(1)");
  REQUIRE(entry.ok());
  Program merged = l.program;
  merged.defs.erase("main");
  merged.defs.emplace("main", entry.program.defs.at("main"));
  Registry registry = Registry::for_program(merged);
  ValueTree t = eval_main(merged, {}, {}, registry);
  CHECK(t.root.is_number());
}

TEST_CASE("value-tree JSON round trips") {
  Loaded l = load("def <real,bool> main() is { <#src, FALSE> : sp(@, <#dist, TRUE>) }\n"
                  "@ann <real,bool>(<real,bool>, <pr,bool>)[!]\n"
                  "def <real,bool> raw(<real,bool> x, <real,bool> y) is "
                  "<fst x + fst y, snd x or snd y>\n"
                  "def <real,bool> pt(<real,bool> x) is ((fst x) = POSINF) ? <POSINF, TRUE> : x\n"
                  "@stab <real,bool>(<real,bool>, <pr,bool>)\n"
                  "def <real,bool> sp(<real,bool> x, <real,bool> y) is pt(raw(x, y))\n");
  ValueTree t = eval_main(l.program, sensors(kPosInf, 1), {}, l.registry);
  ValueTree back = tree_from_json_text(tree_to_json(t));
  CHECK(back == t);
  CHECK(value_from_json_text(value_to_json(t.root)) == t.root);
}
