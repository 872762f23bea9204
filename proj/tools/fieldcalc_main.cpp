// Command-line entry point: check programs, evaluate single devices,
// simulate networks, and run the brute-force verifiers.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "fieldcalc/check.hpp"
#include "fieldcalc/eval.hpp"
#include "fieldcalc/network.hpp"
#include "fieldcalc/oracle.hpp"
#include "fieldcalc/parser.hpp"

namespace {

using namespace fieldcalc;

constexpr std::uint64_t kDefaultSeed = 20140401;

struct CommonOptions {
  std::string program_path;
  std::vector<std::string> includes;
  std::uint64_t seed = kDefaultSeed;
  bool json = false;
};

void print_report(const Report& report, bool json) {
  for (const auto& d : report.diagnostics) {
    std::cout << (json ? d.to_json() : d.to_string()) << "\n";
  }
}

int load_program(const CommonOptions& opts, Program& program, Report& report) {
  std::vector<std::string> paths = opts.includes;
  paths.push_back(opts.program_path);
  ParseResult parsed = parse_files(paths);
  report.append(parsed.report);
  program = std::move(parsed.program);
  return parsed.report.ok() ? 0 : 2;
}

void apply_grid_override() {
  const char* grid = std::getenv("FIELDCALC_GRID");
  if (!grid) return;
  std::vector<double> values;
  std::stringstream in(grid);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token == "POSINF") {
      values.push_back(kPosInf);
    } else if (token == "NEGINF") {
      values.push_back(kNegInf);
    } else if (!token.empty()) {
      values.push_back(std::strtod(token.c_str(), nullptr));
    }
  }
  if (!values.empty()) set_real_base_grid(std::move(values));
}

int cmd_check(const CommonOptions& opts, const std::string& env_path, bool emit_derivation) {
  Program program;
  Report parse_report;
  if (load_program(opts, program, parse_report) != 0) {
    print_report(parse_report, opts.json);
    return 2;
  }
  print_report(parse_report, opts.json);
  SensorTable sensors;
  if (!env_path.empty()) {
    LoadedEnvironment loaded = load_environment(env_path);
    if (!loaded.report.ok()) {
      print_report(loaded.report, opts.json);
      return 2;
    }
    sensors = loaded.sensors;
  }
  Registry registry = Registry::for_program(program, sensors);
  CheckOutcome outcome =
      run_full_check(program, registry, !program.has_main(), emit_derivation);
  print_report(outcome.all(), opts.json);
  if (emit_derivation) {
    for (const auto& trace : outcome.traces) std::cout << trace.to_string();
  }
  std::cout << "verdict: "
            << (outcome.well_annotated()
                    ? "well annotated"
                    : (outcome.well_sorted() ? "well sorted, not well annotated"
                                             : (outcome.well_typed() ? "well typed, not well sorted"
                                                                     : "not well typed")))
            << "\n";
  return outcome.well_annotated() ? 0 : 1;
}

int cmd_eval(const CommonOptions& opts, const std::string& sensors_path,
             const std::string& neighbors_path) {
  Program program;
  Report report;
  if (load_program(opts, program, report) != 0) {
    print_report(report, opts.json);
    return 2;
  }
  SensorState sensors;
  if (!sensors_path.empty()) {
    std::ifstream in(sensors_path);
    if (!in) {
      std::cerr << "cannot open " << sensors_path << "\n";
      return 2;
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      std::cerr << "sensors file must be a JSON object\n";
      return 2;
    }
    for (const auto& [name, value] : j.items()) {
      sensors.emplace(name, value_from_json_text(value.dump()));
    }
  }
  std::vector<ValueTree> neighbours;
  if (!neighbors_path.empty()) {
    std::ifstream in(neighbors_path);
    if (!in) {
      std::cerr << "cannot open " << neighbors_path << "\n";
      return 2;
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
      std::cerr << "neighbors file must be a JSON array of value-trees\n";
      return 2;
    }
    for (const auto& t : j) neighbours.push_back(tree_from_json_text(t.dump()));
  }
  Registry registry = Registry::for_program(program);
  const FunctionDef* main_def = program.find("main");
  if (!main_def) {
    std::cerr << "program has no main function\n";
    return 2;
  }
  Report shape_report = validate_neighbour_trees(neighbours, *main_def->body, registry);
  if (!shape_report.ok()) {
    print_report(shape_report, opts.json);
    return 2;
  }
  try {
    ValueTree tree = eval_main(program, sensors, neighbours, registry);
    std::cout << tree_to_json(tree) << "\n";
  } catch (const EvalError& err) {
    std::cerr << "evaluation error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}

struct LoadedRun {
  Program program;
  Registry registry;
  Environment env;
};

int load_run(const CommonOptions& opts, const std::string& env_path, LoadedRun& out) {
  Report report;
  if (load_program(opts, out.program, report) != 0) {
    print_report(report, opts.json);
    return 2;
  }
  LoadedEnvironment loaded = load_environment(env_path);
  if (!loaded.report.ok()) {
    print_report(loaded.report, opts.json);
    return 2;
  }
  out.env = std::move(loaded.env);
  out.registry = Registry::for_program(out.program, loaded.sensors);
  return 0;
}

int cmd_simulate(const CommonOptions& opts, const std::string& env_path, int max_rounds,
                 int k) {
  LoadedRun run;
  if (load_run(opts, env_path, run) != 0) return 2;
  if (max_rounds <= 0) max_rounds = default_max_rounds(run.env.topology.size());
  std::cout << "{\"seed\":" << opts.seed << "}\n";
  int steps = 0;
  NetworkConfig config = initial_config(run.env, run.program, run.registry);
  for (const auto& [id, tree] : config.field) {
    nlohmann::json j = {{"step", ++steps}, {"action", "env"}, {"device", id},
                        {"root", nlohmann::json::parse(value_to_json(tree.root))}};
    std::cout << j.dump() << "\n";
  }
  TraceSink sink = [](const TraceEvent& event) {
    nlohmann::json j = {{"step", event.step},
                        {"action", event.action},
                        {"device", event.device},
                        {"root", nlohmann::json::parse(value_to_json(*event.root))}};
    std::cout << j.dump() << "\n";
  };
  RunOutcome outcome = run_until_stable(config, run.program, run.registry, max_rounds,
                                        opts.seed, sink, &steps, k);
  std::cout << "{\"stable\":" << (outcome.stable ? "true" : "false")
            << ",\"rounds\":" << outcome.rounds_used << "}\n";
  std::cout << field_to_json(outcome.config.field) << "\n";
  return outcome.stable ? 0 : 1;
}

int cmd_selfstab(const CommonOptions& opts, const std::string& env_path, int trials,
                 int max_rounds) {
  LoadedRun run;
  if (load_run(opts, env_path, run) != 0) return 2;
  SelfStabReport report = check_self_stabilisation(run.program, run.registry, run.env, trials,
                                                   opts.seed, max_rounds);
  nlohmann::json j;
  j["seed"] = opts.seed;
  j["trials"] = report.trials;
  j["wellAnnotated"] = report.well_annotated;
  j["allStable"] = report.all_stable;
  j["unique"] = report.unique;
  j["roundsPerTrial"] = report.rounds_per_trial;
  if (report.unique) {
    j["field"] = nlohmann::json::parse(field_to_json(report.stable_field));
  } else if (report.counterexample_trials) {
    j["counterexample"] = {{"trials", {report.counterexample_trials->first,
                                       report.counterexample_trials->second}},
                           {"device", report.counterexample_device}};
  }
  std::cout << j.dump(2) << "\n";
  return report.unique ? 0 : 1;
}

int cmd_verify_signatures(const CommonOptions& opts) {
  Program program;
  Report report;
  if (load_program(opts, program, report) != 0) {
    print_report(report, opts.json);
    return 2;
  }
  Registry registry = Registry::for_program(program);
  SignatureSweep sweep = verify_registry_signatures(registry);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : sweep.entries) {
    nlohmann::json j = {{"function", entry.function},
                        {"signature", entry.signature},
                        {"pass", entry.verdict.pass},
                        {"checks", entry.verdict.checks}};
    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto& w : entry.verdict.witnesses) witnesses.push_back(w.to_string());
    j["witnesses"] = witnesses;
    out.push_back(j);
  }
  std::cout << out.dump(2) << "\n";
  return sweep.all_pass() ? 0 : 1;
}

int cmd_oracle(const CommonOptions& opts, const std::string& env_path) {
  LoadedRun run;
  if (load_run(opts, env_path, run) != 0) return 2;
  std::map<std::string, std::set<std::string>> topology;
  for (const auto& [id, neighbours] : run.env.topology) topology[id] = neighbours;
  RelaxationResult result = relaxation_fixpoint(run.program, run.registry, run.env.sensors,
                                                topology, 0, 0);
  nlohmann::json j;
  j["applicable"] = result.applicable;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  nlohmann::json roots = nlohmann::json::object();
  for (const auto& [id, value] : result.roots) {
    roots[id] = nlohmann::json::parse(value_to_json(value));
  }
  j["roots"] = roots;
  std::cout << j.dump(2) << "\n";
  return result.applicable && result.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fieldcalc: checker and simulator for self-stabilising computational fields"};
  app.require_subcommand(1);
  apply_grid_override();

  CommonOptions opts;
  std::string env_path;
  std::string sensors_path;
  std::string neighbors_path;
  int trials = 5;
  int max_rounds = 0;
  int fairness = 1;
  bool emit_derivation = false;

  auto add_common = [&](CLI::App* cmd, bool needs_program = true) {
    if (needs_program) {
      cmd->add_option("program,--program", opts.program_path, "program source file")
          ->required();
    }
    cmd->add_option("--include", opts.includes, "additional library files");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_flag("--json", opts.json, "emit diagnostics as JSON lines");
  };

  CLI::App* check = app.add_subcommand("check", "type, sort and annotation checking");
  add_common(check);
  check->add_option("--env", env_path, "environment file declaring sensor sorts");
  check->add_flag("--emit-derivation", emit_derivation, "dump annotated-sort derivations");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate main on a single device");
  add_common(eval_cmd);
  eval_cmd->add_option("--sensors", sensors_path, "sensor values (JSON object)");
  eval_cmd->add_option("--neighbors", neighbors_path, "neighbour value-trees (JSON array)");

  CLI::App* simulate = app.add_subcommand("simulate", "run rounds until the field is stable");
  add_common(simulate);
  simulate->add_option("--env", env_path, "environment file")->required();
  simulate->add_option("--max-rounds", max_rounds, "round cap (default 10x devices)");
  simulate->add_option("--k", fairness, "fairness degree of each round (default 1)");

  CLI::App* selfstab = app.add_subcommand("selfstab", "self-stabilisation harness");
  add_common(selfstab);
  selfstab->add_option("--env", env_path, "environment file")->required();
  selfstab->add_option("--trials", trials, "number of reachable starting configurations");
  selfstab->add_option("--max-rounds", max_rounds, "round cap per trial");

  CLI::App* verify = app.add_subcommand("verify-signatures",
                                        "brute-force oracle over all declared signatures");
  add_common(verify);

  CLI::App* oracle = app.add_subcommand("oracle", "relaxation fixpoint of the stable field");
  add_common(oracle);
  oracle->add_option("--env", env_path, "environment file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help exits cleanly, usage errors as 2
  }

  try {
    if (check->parsed()) return cmd_check(opts, env_path, emit_derivation);
    if (eval_cmd->parsed()) return cmd_eval(opts, sensors_path, neighbors_path);
    if (simulate->parsed()) return cmd_simulate(opts, env_path, max_rounds, fairness);
    if (selfstab->parsed()) return cmd_selfstab(opts, env_path, trials, max_rounds);
    if (verify->parsed()) return cmd_verify_signatures(opts);
    if (oracle->parsed()) return cmd_oracle(opts, env_path);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 2;
}
