#include "fieldcalc/network.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldcalc/check.hpp"
#include "fieldcalc/oracle.hpp"
#include "fieldcalc/parser.hpp"

namespace fieldcalc {

bool Environment::well_formed() const {
  if (topology.size() != sensors.size()) return false;
  for (const auto& [id, neighbours] : topology) {
    if (!sensors.count(id)) return false;
    for (const auto& n : neighbours) {
      if (!topology.count(n)) return false;
    }
  }
  return true;
}

std::vector<DeviceId> Environment::device_ids() const {
  std::vector<DeviceId> out;
  out.reserve(topology.size());
  for (const auto& [id, _] : topology) out.push_back(id);
  return out;
}

bool NetworkConfig::operator==(const NetworkConfig& other) const {
  return env.topology == other.env.topology && env.sensors == other.env.sensors &&
         field == other.field;
}

NetworkConfig fire(const NetworkConfig& config, const DeviceId& device, const Program& p,
                   const Registry& registry) {
  auto topo_it = config.env.topology.find(device);
  if (topo_it == config.env.topology.end()) {
    throw EvalError("unknown device '" + device + "'");
  }
  std::vector<ValueTree> neighbour_trees;
  neighbour_trees.reserve(topo_it->second.size());
  for (const auto& n : topo_it->second) {
    neighbour_trees.push_back(config.field.at(n));
  }
  NetworkConfig out = config;
  out.field.insert_or_assign(
      device, eval_main(p, config.env.sensors.at(device), neighbour_trees, registry));
  return out;
}

NetworkConfig env_change(const NetworkConfig& config, const Environment& new_env,
                         const Program& p, const Registry& registry) {
  if (!new_env.well_formed()) {
    throw EvalError("environment is not well formed");
  }
  NetworkConfig out;
  out.env = new_env;
  for (const auto& [id, sensors] : new_env.sensors) {
    auto old_it = config.field.find(id);
    if (old_it != config.field.end()) {
      out.field.emplace(id, old_it->second);
    } else {
      out.field.emplace(id, eval_main(p, sensors, {}, registry));
    }
  }
  return out;
}

NetworkConfig initial_config(const Environment& env, const Program& p, const Registry& registry) {
  return env_change(NetworkConfig{}, env, p, registry);
}

Schedule make_k_fair_schedule(const std::vector<DeviceId>& devices, int k, std::uint64_t seed) {
  Schedule schedule;
  schedule.k = k;
  schedule.seed = seed;
  Rng rng(seed);
  for (int round = 0; round < k; ++round) {
    std::vector<DeviceId> block = devices;
    rng.shuffle(block);
    schedule.order.insert(schedule.order.end(), block.begin(), block.end());
  }
  return schedule;
}

bool is_k_fair(const std::vector<DeviceId>& order, const std::vector<DeviceId>& devices, int k) {
  std::map<DeviceId, std::vector<size_t>> positions;
  for (const auto& d : devices) positions[d];
  for (size_t i = 0; i < order.size(); ++i) {
    auto it = positions.find(order[i]);
    if (it != positions.end()) it->second.push_back(i);
  }
  for (const auto& [d, fires] : positions) {
    if (static_cast<int>(fires.size()) < k) return false;
    for (int h = 1; h <= k; ++h) {
      size_t after = fires[static_cast<size_t>(h) - 1] + 1;
      for (const auto& other : devices) {
        if (other == d) continue;
        const auto& other_fires = positions.at(other);
        int count = static_cast<int>(other_fires.end() -
                                     std::lower_bound(other_fires.begin(), other_fires.end(),
                                                      after));
        if (count < k - h) return false;
      }
    }
  }
  return true;
}

RunOutcome run_until_stable(const NetworkConfig& config, const Program& p,
                            const Registry& registry, int max_rounds, std::uint64_t seed,
                            const TraceSink& trace, int* step_counter, int k) {
  RunOutcome outcome;
  outcome.config = config;
  Rng rng(seed);
  std::vector<DeviceId> devices = outcome.config.env.device_ids();
  int local_steps = 0;
  int* steps = step_counter ? step_counter : &local_steps;
  if (k < 1) k = 1;
  for (int round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (int block = 0; block < k; ++block) {
      std::vector<DeviceId> order = devices;
      rng.shuffle(order);
      for (const auto& d : order) {
        NetworkConfig next = fire(outcome.config, d, p, registry);
        if (!(next.field.at(d) == outcome.config.field.at(d))) changed = true;
        outcome.config = std::move(next);
        if (trace) {
          trace(TraceEvent{++*steps, "fire", d, outcome.config.field.at(d).root});
        }
      }
    }
    ++outcome.rounds_used;
    if (!changed) {
      outcome.stable = true;
      return outcome;
    }
  }
  return outcome;
}

namespace {

Value perturb_value(const Value& v, const Sort& sort, Rng& rng) {
  const std::vector<Value> grid = default_grid(sort);
  if (grid.empty() || !rng.chance(0.5)) return v;
  return rng.pick(grid);
}

// A random sub-environment of the target: a nonempty subset of its
// devices with the topology restricted and sensors possibly replaced by
// other values of their declared sorts.
Environment random_sub_environment(const Environment& target, const SensorTable& sensor_table,
                                   Rng& rng) {
  std::vector<DeviceId> devices = target.device_ids();
  std::set<DeviceId> kept;
  for (const auto& d : devices) {
    if (rng.chance(0.7)) kept.insert(d);
  }
  if (kept.empty() && !devices.empty()) kept.insert(rng.pick(devices));
  Environment out;
  for (const auto& d : kept) {
    std::set<DeviceId> neighbours;
    for (const auto& n : target.topology.at(d)) {
      if (kept.count(n)) neighbours.insert(n);
    }
    out.topology.emplace(d, std::move(neighbours));
    SensorState sensors = target.sensors.at(d);
    for (auto& [name, value] : sensors) {
      Sort sort = sensor_table.find(name).value_or(min_sort_of_value(value));
      value = perturb_value(value, sort, rng);
    }
    out.sensors.emplace(d, std::move(sensors));
  }
  return out;
}

NetworkConfig random_reachable_config(const Environment& target, const Program& p,
                                      const Registry& registry, Rng& rng) {
  NetworkConfig config;
  int env_steps = 1 + static_cast<int>(rng.bounded(2));
  for (int i = 0; i < env_steps; ++i) {
    Environment sub = random_sub_environment(target, registry.sensors(), rng);
    config = env_change(config, sub, p, registry);
    std::vector<DeviceId> devices = config.env.device_ids();
    if (devices.empty()) continue;
    int fires = static_cast<int>(rng.bounded(3 * devices.size() + 1));
    for (int f = 0; f < fires; ++f) {
      config = fire(config, rng.pick(devices), p, registry);
    }
  }
  return env_change(config, target, p, registry);
}

}  // namespace

SelfStabReport check_self_stabilisation(const Program& p, const Registry& registry,
                                        const Environment& env, int trials, std::uint64_t seed,
                                        int max_rounds) {
  SelfStabReport report;
  report.trials = trials;
  report.well_annotated = run_full_check(p, registry, /*is_library=*/false).well_annotated();
  if (max_rounds <= 0) max_rounds = default_max_rounds(env.topology.size());

  Rng rng(seed);
  std::vector<NetworkConfig> starts;
  starts.push_back(initial_config(env, p, registry));
  for (int i = 1; i < trials; ++i) {
    NetworkConfig candidate;
    bool distinct = false;
    for (int attempt = 0; attempt < 5 && !distinct; ++attempt) {
      Rng trial_rng = rng.fork();
      candidate = random_reachable_config(env, p, registry, trial_rng);
      distinct = std::none_of(starts.begin(), starts.end(),
                              [&](const NetworkConfig& c) { return c == candidate; });
    }
    starts.push_back(std::move(candidate));
  }

  report.all_stable = true;
  std::vector<Field> finals;
  for (const auto& start : starts) {
    RunOutcome outcome = run_until_stable(start, p, registry, max_rounds, rng.next());
    report.rounds_per_trial.push_back(outcome.rounds_used);
    if (!outcome.stable) report.all_stable = false;
    finals.push_back(std::move(outcome.config.field));
  }

  report.unique = report.all_stable;
  for (size_t i = 1; i < finals.size() && report.unique; ++i) {
    if (finals[i] != finals[0]) {
      report.unique = false;
      report.counterexample_trials = {0, static_cast<int>(i)};
      for (const auto& [id, tree] : finals[0]) {
        if (!(finals[i].at(id) == tree)) {
          report.counterexample_device = id;
          break;
        }
      }
    }
  }
  if (report.unique && !finals.empty()) report.stable_field = finals[0];
  return report;
}

ProbeReport appendix_probes(const Program& p, const Registry& registry, const Environment& env,
                            std::uint64_t seed, int max_rounds) {
  ProbeReport report;
  const FunctionDef* main_def = p.find("main");
  if (!main_def) return report;
  auto* spread = main_def->body->as<Expression::Spread>();
  if (!spread) return report;
  if (contains_spread(*spread->source)) return report;
  for (const auto& arg : spread->extra) {
    if (contains_spread(*arg)) return report;
  }
  report.applicable = true;
  if (max_rounds <= 0) max_rounds = default_max_rounds(env.topology.size());

  // Round-granular snapshots from the isolated-evaluation start.
  std::vector<Field> snapshots;
  NetworkConfig config = initial_config(env, p, registry);
  snapshots.push_back(config.field);
  Rng rng(seed);
  std::vector<DeviceId> devices = config.env.device_ids();
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<DeviceId> order = devices;
    rng.shuffle(order);
    for (const auto& d : order) config = fire(config, d, p, registry);
    snapshots.push_back(config.field);
    if (snapshots[snapshots.size() - 1] == snapshots[snapshots.size() - 2]) {
      report.stable = true;
      break;
    }
  }
  report.rounds = static_cast<int>(snapshots.size()) - 1;
  if (!report.stable || devices.empty()) return report;
  const Field& final_field = snapshots.back();

  auto source_value = [](const ValueTree& tree) { return tree.children.at(0).root; };

  // Minimum-value ascent: a minimal device strictly below its source
  // value must strictly increase over the next round, and the global
  // minimum never drops.
  for (size_t r = 0; r + 1 < snapshots.size(); ++r) {
    const Field& now = snapshots[r];
    const Field& next = snapshots[r + 1];
    const Value* min_now = nullptr;
    const Value* min_next = nullptr;
    for (const auto& [id, tree] : now) {
      if (!min_now || value_lt(tree.root, *min_now)) min_now = &tree.root;
    }
    for (const auto& [id, tree] : next) {
      if (!min_next || value_lt(tree.root, *min_next)) min_next = &tree.root;
    }
    if (value_lt(*min_next, *min_now)) {
      report.violations.push_back(
          {"minimum-increases", static_cast<int>(r), "", "global minimum decreased"});
    }
    for (const auto& [id, tree] : now) {
      if (tree.root == *min_now && tree.root != source_value(tree)) {
        if (!value_lt(tree.root, next.at(id).root)) {
          report.violations.push_back({"minimum-increases", static_cast<int>(r), id,
                                       "minimal device did not strictly increase"});
        }
      }
    }
  }

  // Minimal sources hold exactly their source value at stability and
  // nothing ends below them.
  {
    std::optional<Value> min_source;
    for (const auto& [id, tree] : final_field) {
      Value v0 = source_value(tree);
      if (!min_source || value_lt(v0, *min_source)) min_source = v0;
    }
    Value m0 = *min_source;
    for (const auto& [id, tree] : final_field) {
      Value v0 = source_value(tree);
      if (v0 == m0 && tree.root != v0) {
        report.violations.push_back(
            {"minimum-sources", report.rounds, id, "minimal source not at its source value"});
      }
      if (value_lt(tree.root, m0)) {
        report.violations.push_back(
            {"minimum-sources", report.rounds, id, "stable value below the minimal source"});
      }
    }
  }

  // Frontier: once some supporting neighbour has settled for good, one
  // more round settles the device.
  std::map<DeviceId, int> stab_round;
  for (const auto& d : devices) {
    int r = 0;
    for (size_t i = snapshots.size(); i-- > 0;) {
      if (!(snapshots[i].at(d) == final_field.at(d))) {
        r = static_cast<int>(i) + 1;
        break;
      }
    }
    stab_round[d] = r;
  }
  for (const auto& d : devices) {
    const ValueTree& tree = final_field.at(d);
    Value v0 = source_value(tree);
    if (tree.root == v0) {
      if (stab_round[d] != 0) {
        report.violations.push_back(
            {"frontier", stab_round[d], d, "source-stable device was not stable from the start"});
      }
      continue;
    }
    std::vector<Value> args;
    args.push_back(tree.root);  // placeholder for the neighbour value
    for (size_t i = 1; i < tree.children.size(); ++i) args.push_back(tree.children[i].root);
    int best_dep = -1;
    for (const auto& n : config.env.topology.at(d)) {
      args[0] = final_field.at(n).root;
      if (registry.apply_pure(spread->diffusion, args) == tree.root) {
        if (best_dep < 0 || stab_round[n] < best_dep) best_dep = stab_round[n];
      }
    }
    if (best_dep < 0) {
      report.violations.push_back(
          {"frontier", stab_round[d], d, "no neighbour supports the stable value"});
    } else if (stab_round[d] > best_dep + 1) {
      report.violations.push_back(
          {"frontier", stab_round[d], d,
           "device settled later than one round after its supporting neighbour"});
    }
  }
  return report;
}

// ---- JSON ----

namespace {

nlohmann::json value_to_json_impl(const Value& v) {
  if (v.is_bool()) return v.as_bool();
  if (v.is_number()) {
    double x = v.as_number();
    if (x == kPosInf) return "POSINF";
    if (x == kNegInf) return "NEGINF";
    return x;
  }
  nlohmann::json j;
  j["fst"] = value_to_json_impl(v.first());
  j["snd"] = value_to_json_impl(v.second());
  return j;
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number()) return Value::number(j.get<double>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "POSINF") return Value::number(kPosInf);
    if (s == "NEGINF") return Value::number(kNegInf);
    throw EvalError("unknown value string '" + s + "'");
  }
  if (j.is_object() && j.contains("fst") && j.contains("snd")) {
    return Value::pair(value_from_json(j.at("fst")), value_from_json(j.at("snd")));
  }
  throw EvalError("cannot decode value from JSON: " + j.dump());
}

nlohmann::json tree_to_json_impl(const ValueTree& t) {
  nlohmann::json children = nlohmann::json::array();
  for (const auto& child : t.children) children.push_back(tree_to_json_impl(child));
  return nlohmann::json::array({value_to_json_impl(t.root), children});
}

ValueTree tree_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j.at(1).is_array()) {
    throw EvalError("value-tree JSON must be [root, [children...]]");
  }
  ValueTree out{value_from_json(j.at(0)), {}};
  for (const auto& child : j.at(1)) out.children.push_back(tree_from_json(child));
  return out;
}

}  // namespace

std::string value_to_json(const Value& v) { return value_to_json_impl(v).dump(); }

std::string tree_to_json(const ValueTree& t) { return tree_to_json_impl(t).dump(); }

Value value_from_json_text(const std::string& text) {
  return value_from_json(nlohmann::json::parse(text));
}

ValueTree tree_from_json_text(const std::string& text) {
  return tree_from_json(nlohmann::json::parse(text));
}

std::string field_to_json(const Field& field) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, tree] : field) {
    j[id] = {{"value", value_to_json_impl(tree.root)}, {"tree", tree_to_json_impl(tree)}};
  }
  return j.dump();
}

LoadedEnvironment parse_environment(const std::string& json_text, const std::string& name) {
  LoadedEnvironment out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& err) {
    out.report.error({name, 0, 0}, "IO", std::string("invalid JSON: ") + err.what());
    return out;
  }
  if (j.contains("sensorSorts")) {
    for (const auto& [sensor, sort_name] : j.at("sensorSorts").items()) {
      try {
        out.sensors.declare(sensor, parse_sort(sort_name.get<std::string>()));
      } catch (const InternalError& err) {
        out.report.error({name, 0, 0}, "ENV", err.what());
      }
    }
  }
  if (!j.contains("devices") || !j.at("devices").is_array()) {
    out.report.error({name, 0, 0}, "ENV", "environment needs a \"devices\" array");
    return out;
  }
  for (const auto& device : j.at("devices")) {
    if (!device.contains("id")) {
      out.report.error({name, 0, 0}, "ENV", "device entry without id");
      continue;
    }
    DeviceId id = device.at("id").get<std::string>();
    if (out.env.topology.count(id)) {
      out.report.error({name, 0, 0}, "ENV", "duplicate device '" + id + "'");
      continue;
    }
    std::set<DeviceId> neighbours;
    if (device.contains("neighbors")) {
      for (const auto& n : device.at("neighbors")) neighbours.insert(n.get<std::string>());
    }
    SensorState sensors;
    if (device.contains("sensors")) {
      for (const auto& [sensor, value] : device.at("sensors").items()) {
        try {
          Value v = value_from_json(value);
          if (auto sort = out.sensors.find(sensor)) {
            if (!sort_member(v, *sort)) {
              out.report.error({name, 0, 0}, "ENV",
                               "sensor '" + sensor + "' of '" + id + "' has value " +
                                   v.to_string() + " outside sort " + sort->to_string());
            }
          }
          sensors.emplace(sensor, std::move(v));
        } catch (const std::exception& err) {
          out.report.error({name, 0, 0}, "ENV",
                           "sensor '" + sensor + "' of '" + id + "': " + err.what());
        }
      }
    }
    out.env.topology.emplace(id, std::move(neighbours));
    out.env.sensors.emplace(id, std::move(sensors));
  }
  if (!out.env.well_formed()) {
    out.report.error({name, 0, 0}, "ENV", "topology references unknown devices");
  }
  return out;
}

LoadedEnvironment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    LoadedEnvironment out;
    out.report.error({path, 0, 0}, "IO", "cannot open '" + path + "'");
    return out;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_environment(buffer.str(), path);
}

}  // namespace fieldcalc
