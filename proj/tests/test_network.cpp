#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "fieldcalc/check.hpp"
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

const char* kGradMain = "def real main() is { #src : @ + #dist }";

SensorState sensors(double src, double dist) {
  return {{"src", num(src)}, {"dist", num(dist)}};
}

ValueTree tree(Value root, std::vector<ValueTree> children = {}) {
  return ValueTree{std::move(root), std::move(children)};
}

Environment line_network(int n, double u) {
  Environment env;
  auto id = [](int i) {
    std::string s = std::to_string(i);
    return "d" + std::string(2 - std::min<size_t>(2, s.size()), '0') + s;
  };
  for (int i = 1; i <= 2 * n; ++i) {
    std::set<DeviceId> neighbours;
    if (i > 1) neighbours.insert(id(i - 1));
    if (i < 2 * n) neighbours.insert(id(i + 1));
    env.topology.emplace(id(i), std::move(neighbours));
    env.sensors.emplace(id(i), sensors(i <= n ? 0 : u, 1));
  }
  return env;
}

Field roots_only(const Field& field) { return field; }

}  // namespace

TEST_CASE("the three-step network evolution") {
  Loaded l = load(kGradMain);
  // sigma1 = (0,1), sigma2 = (8,1), sigma3 = (4,1)
  ValueTree theta1 = tree(num(0), {tree(num(0)), tree(num(1))});
  ValueTree theta2 = tree(num(8), {tree(num(8)), tree(num(1))});
  ValueTree theta3 = tree(num(1), {tree(num(4)), tree(num(1))});

  NetworkConfig empty;
  Environment env1;
  env1.topology = {{"d3", {}}};
  env1.sensors = {{"d3", sensors(0, 1)}};
  NetworkConfig step1 = env_change(empty, env1, l.program, l.registry);
  REQUIRE(step1.field.size() == 1);
  CHECK(step1.field.at("d3") == theta1);

  Environment env2;
  env2.topology = {{"d1", {"d3"}}, {"d2", {}}, {"d3", {"d1", "d2"}}};
  env2.sensors = {{"d1", sensors(0, 1)}, {"d2", sensors(8, 1)}, {"d3", sensors(4, 1)}};
  NetworkConfig step2 = env_change(step1, env2, l.program, l.registry);
  CHECK(step2.field.at("d1") == theta1);
  CHECK(step2.field.at("d2") == theta2);
  CHECK(step2.field.at("d3") == theta1);  // the old tree survives

  NetworkConfig step3 = fire(step2, "d3", l.program, l.registry);
  CHECK(step3.field.at("d1") == theta1);
  CHECK(step3.field.at("d2") == theta2);
  CHECK(step3.field.at("d3") == theta3);
  // the environment never changes on a firing
  CHECK(step3.env.topology == step2.env.topology);
  CHECK(step3.env.sensors == step2.env.sensors);
}

TEST_CASE("firing an isolated device is idempotent") {
  Loaded l = load(kGradMain);
  Environment env;
  env.topology = {{"a", {}}};
  env.sensors = {{"a", sensors(3, 1)}};
  NetworkConfig c0 = initial_config(env, l.program, l.registry);
  NetworkConfig c1 = fire(c0, "a", l.program, l.registry);
  NetworkConfig c2 = fire(c1, "a", l.program, l.registry);
  CHECK(c0 == c1);
  CHECK(c1 == c2);
}

TEST_CASE("removing a device shrinks the field") {
  Loaded l = load(kGradMain);
  Environment env = line_network(2, 10);
  NetworkConfig c = initial_config(env, l.program, l.registry);
  Environment smaller;
  smaller.topology = {{"d01", {}}};
  smaller.sensors = {{"d01", env.sensors.at("d01")}};
  NetworkConfig after = env_change(c, smaller, l.program, l.registry);
  CHECK(after.field.size() == 1);
  CHECK(after.field.count("d01") == 1);
}

TEST_CASE("ill-formed environments are rejected") {
  Loaded l = load(kGradMain);
  Environment env;
  env.topology = {{"a", {"ghost"}}};
  env.sensors = {{"a", sensors(0, 1)}};
  CHECK_THROWS_AS(env_change(NetworkConfig{}, env, l.program, l.registry), EvalError);
}

TEST_CASE("k-fair schedules") {
  std::vector<DeviceId> devices = {"a", "b", "c", "d"};
  for (int k : {1, 2, 3}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      Schedule s = make_k_fair_schedule(devices, k, seed);
      CHECK(s.order.size() == devices.size() * static_cast<size_t>(k));
      for (const auto& d : devices) {
        CHECK(std::count(s.order.begin(), s.order.end(), d) == k);
      }
      CHECK(is_k_fair(s.order, devices, k));
    }
  }
  // the verifier rejects unfair sequences
  CHECK_FALSE(is_k_fair({"a", "a", "b"}, {"a", "b"}, 2));       // b fires once
  CHECK_FALSE(is_k_fair({"a", "a", "b", "b"}, {"a", "b"}, 2));  // a's 1st fire not followed by b
  CHECK(is_k_fair({"a", "b", "a", "b"}, {"a", "b"}, 2));
  CHECK(is_k_fair({"a", "b", "b", "a"}, {"a", "b"}, 2));
}

TEST_CASE("the line network stabilises to the hop-count gradient") {
  Loaded l = load(kGradMain);
  int n = 5;
  Environment env = line_network(n, 10);
  NetworkConfig start = initial_config(env, l.program, l.registry);
  RunOutcome outcome = run_until_stable(start, l.program, l.registry, 100, 42);
  REQUIRE(outcome.stable);
  CHECK(outcome.rounds_used <= n + 1);
  for (int i = 1; i <= 2 * n; ++i) {
    std::string id = i < 10 ? "d0" + std::to_string(i) : "d" + std::to_string(i);
    Value expected = num(i <= n ? 0 : i - n);
    CHECK(outcome.config.field.at(id).root == expected);
  }
  // an already stable configuration is detected in one quiet round
  RunOutcome again = run_until_stable(outcome.config, l.program, l.registry, 100, 43);
  CHECK(again.stable);
  CHECK(again.rounds_used == 1);
  CHECK(again.config.field == outcome.config.field);
}

TEST_CASE("breaking a link makes the cut-off pair climb back to the source value") {
  Loaded l = load(kGradMain);
  int n = 5;
  Environment env = line_network(n, 10);
  NetworkConfig start = initial_config(env, l.program, l.registry);
  RunOutcome settled = run_until_stable(start, l.program, l.registry, 100, 7);
  REQUIRE(settled.stable);

  Environment cut = env;
  cut.topology.at("d08").erase("d09");
  cut.topology.at("d09").erase("d08");
  NetworkConfig after_cut = env_change(settled.config, cut, l.program, l.registry);
  RunOutcome healed = run_until_stable(after_cut, l.program, l.registry, 200, 8);
  REQUIRE(healed.stable);
  // unchanged up to the cut, then the isolated pair rises to u
  for (int i = 1; i <= n; ++i) {
    CHECK(healed.config.field.at("d0" + std::to_string(i)).root == num(0));
  }
  CHECK(healed.config.field.at("d06").root == num(1));
  CHECK(healed.config.field.at("d07").root == num(2));
  CHECK(healed.config.field.at("d08").root == num(3));
  CHECK(healed.config.field.at("d09") == tree(num(10), {tree(num(10)), tree(num(1))}));
  CHECK(healed.config.field.at("d10") == tree(num(10), {tree(num(10)), tree(num(1))}));
}

TEST_CASE("the gossiping identity does not recover from a raise") {
  Loaded l = load(
      "def real id(real x) is x\n"
      "def real main() is { #src : id(@) }\n");
  Environment env;
  env.topology = {{"a", {"b"}}, {"b", {"a", "c"}}, {"c", {"b"}}};
  env.sensors = {{"a", {{"src", num(5)}}},
                 {"b", {{"src", num(kPosInf)}}},
                 {"c", {{"src", num(kPosInf)}}}};
  NetworkConfig start = initial_config(env, l.program, l.registry);
  RunOutcome settled = run_until_stable(start, l.program, l.registry, 50, 9);
  REQUIRE(settled.stable);
  for (const auto& [id, t] : settled.config.field) CHECK(t.root == num(5));

  // raise the source: everyone stays stuck at the old minimum
  Environment raised = env;
  raised.sensors.at("a").at("src") = num(7);
  NetworkConfig after = env_change(settled.config, raised, l.program, l.registry);
  RunOutcome stuck = run_until_stable(after, l.program, l.registry, 50, 10);
  REQUIRE(stuck.stable);
  for (const auto& [id, t] : stuck.config.field) CHECK(t.root == num(5));

  // a fresh start from the raised environment lands on 7 instead:
  // the stable field depends on the starting state
  RunOutcome fresh = run_until_stable(initial_config(raised, l.program, l.registry), l.program,
                                      l.registry, 50, 11);
  REQUIRE(fresh.stable);
  for (const auto& [id, t] : fresh.config.field) CHECK(t.root == num(7));
  CHECK_FALSE(roots_only(fresh.config.field) == roots_only(stuck.config.field));

  // and the harness notices the violation
  SelfStabReport report = check_self_stabilisation(l.program, l.registry, raised, 8, 1234);
  CHECK_FALSE(report.well_annotated);
  CHECK(report.all_stable);
  CHECK_FALSE(report.unique);
}

TEST_CASE("the harness confirms the gradient's unique field") {
  Loaded l = load(kGradMain);
  Environment env = line_network(3, 10);
  SelfStabReport report = check_self_stabilisation(l.program, l.registry, env, 5, 99);
  CHECK(report.well_annotated);
  CHECK(report.all_stable);
  CHECK(report.unique);
  CHECK(report.stable_field.at("d04").root == num(1));

  // a single isolated device always lands on its source value
  Environment one;
  one.topology = {{"a", {}}};
  one.sensors = {{"a", sensors(4, 1)}};
  SelfStabReport single = check_self_stabilisation(l.program, l.registry, one, 4, 100);
  CHECK(single.unique);
  CHECK(single.stable_field.at("a").root == num(4));
}

TEST_CASE("appendix probes hold on the line network") {
  Loaded l = load(kGradMain);
  Environment env = line_network(5, 10);
  ProbeReport report = appendix_probes(l.program, l.registry, env, 4242);
  CHECK(report.applicable);
  CHECK(report.stable);
  for (const auto& v : report.violations) {
    CAPTURE(v.probe + " round " + std::to_string(v.round) + " " + v.device + ": " + v.detail);
  }
  CHECK(report.violations.empty());
}

TEST_CASE("appendix probes pass vacuously on an already stable network") {
  Loaded l = load(kGradMain);
  Environment env;
  env.topology = {{"a", {}}};
  env.sensors = {{"a", sensors(0, 1)}};
  ProbeReport report = appendix_probes(l.program, l.registry, env, 1);
  CHECK(report.ok());
  CHECK(report.rounds <= 1);
}

TEST_CASE("traces are reproducible for a fixed seed") {
  Loaded l = load(kGradMain);
  Environment env = line_network(4, 9);
  auto run_trace = [&](std::uint64_t seed) {
    std::ostringstream out;
    TraceSink sink = [&](const TraceEvent& e) {
      out << e.step << " " << e.action << " " << e.device << " " << value_to_json(*e.root)
          << "\n";
    };
    NetworkConfig start = initial_config(env, l.program, l.registry);
    run_until_stable(start, l.program, l.registry, 100, seed, sink);
    return out.str();
  };
  CHECK(run_trace(5) == run_trace(5));
  CHECK(run_trace(5) != run_trace(6));
}

TEST_CASE("the channel pattern runs end to end") {
  // channel composes grad, gradcast (pairs) and gradobs; its main has
  // several nested spreading expressions, so this exercises the full
  // value-tree alignment across neighbours
  ParseResult parsed = parse_files({corpus_path("lib.scf"), corpus_path("pairlib.scf")});
  REQUIRE(parsed.ok());
  ParseResult main_prog = parse_program("def real main() is channel(#srci, #srcj, 1)");
  REQUIRE(main_prog.ok());
  Program program = parsed.program;
  program.defs.emplace("main", main_prog.program.defs.at("main"));
  SensorTable table;
  table.declare("srci", parse_sort("zpr"));
  table.declare("srcj", parse_sort("zpr"));
  Registry registry = Registry::for_program(program, table);
  CheckOutcome outcome = run_full_check(program, registry, false);
  for (const auto& d : outcome.all().diagnostics) CAPTURE(d.to_string());
  CHECK(outcome.well_annotated());

  // a five-device line: the i source on the left end, the j source one
  // hop before the right end
  Environment env;
  auto dev = [](int i) { return "c" + std::to_string(i); };
  for (int i = 1; i <= 5; ++i) {
    std::set<DeviceId> neighbours;
    if (i > 1) neighbours.insert(dev(i - 1));
    if (i < 5) neighbours.insert(dev(i + 1));
    env.topology.emplace(dev(i), std::move(neighbours));
    env.sensors.emplace(dev(i), SensorState{{"srci", num(i == 1 ? 0 : kPosInf)},
                                            {"srcj", num(i == 4 ? 0 : kPosInf)},
                                            {"dist", num(1)}});
  }
  RunOutcome run = run_until_stable(initial_config(env, program, registry), program, registry,
                                    400, 31);
  REQUIRE(run.stable);
  // the stable channel field equals the gradient towards the j source
  const double expected[] = {3, 2, 1, 0, 1};
  for (int i = 1; i <= 5; ++i) {
    CAPTURE(i);
    CHECK(run.config.field.at(dev(i)).root == num(expected[i - 1]));
  }
  // and it is the same from any starting configuration
  SelfStabReport report = check_self_stabilisation(program, registry, env, 5, 441);
  CHECK(report.well_annotated);
  CHECK(report.unique);
}

TEST_CASE("value JSON rejects malformed input") {
  CHECK_THROWS_AS(value_from_json_text("\"INFINITY\""), EvalError);
  CHECK_THROWS_AS(value_from_json_text("[1,2]"), EvalError);
  CHECK_THROWS_AS(value_from_json_text("{\"fst\":1}"), EvalError);
  CHECK_THROWS_AS(tree_from_json_text("[1]"), EvalError);
  CHECK(value_from_json_text("{\"fst\":1,\"snd\":true}") == pr(num(1), bv(true)));
}

TEST_CASE("pair-valued sensors survive an environment round trip") {
  LoadedEnvironment loaded = parse_environment(
      R"({"sensorSorts":{"seed":"<zpr,bool>"},
          "devices":[{"id":"a","sensors":{"seed":{"fst":2,"snd":false}},"neighbors":[]}]})",
      "pairs");
  REQUIRE(loaded.report.ok());
  CHECK(loaded.env.sensors.at("a").at("seed") == pr(num(2), bv(false)));
  CHECK(loaded.sensors.find("seed") == parse_sort("<zpr,bool>"));
}

TEST_CASE("environment JSON loads and validates") {
  LoadedEnvironment loaded = load_environment(corpus_path("line10.json"));
  REQUIRE(loaded.report.ok());
  CHECK(loaded.env.topology.size() == 10);
  CHECK(loaded.env.well_formed());
  CHECK(loaded.sensors.find("src") == parse_sort("zpr"));
  CHECK(loaded.sensors.find("dist") == parse_sort("pr"));

  LoadedEnvironment bad = parse_environment(
      R"({"sensorSorts":{"dist":"pr"},"devices":[{"id":"a","sensors":{"dist":0}}]})", "bad");
  CHECK_FALSE(bad.report.ok());  // 0 is not in pr

  LoadedEnvironment ghost = parse_environment(
      R"({"devices":[{"id":"a","sensors":{},"neighbors":["b"]}]})", "ghost");
  CHECK_FALSE(ghost.report.ok());
}
