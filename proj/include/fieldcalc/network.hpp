#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/eval.hpp"
#include "fieldcalc/registry.hpp"
#include "fieldcalc/rng.hpp"

namespace fieldcalc {

using DeviceId = std::string;

// Directed neighbour graph; a device gathers the trees of the devices
// it maps to.
using Topology = std::map<DeviceId, std::set<DeviceId>>;

struct Environment {
  Topology topology;
  std::map<DeviceId, SensorState> sensors;

  bool well_formed() const;
  std::vector<DeviceId> device_ids() const;
};

using Field = std::map<DeviceId, ValueTree>;

struct NetworkConfig {
  Environment env;
  Field field;

  bool operator==(const NetworkConfig& other) const;
};

struct TraceEvent {
  int step = 0;
  std::string action;  // "fire" or "env"
  DeviceId device;     // empty for env changes
  std::optional<Value> root;
};

using TraceSink = std::function<void(const TraceEvent&)>;

// One firing: re-evaluates the device's main expression against its
// neighbours' current trees and its sensors.
NetworkConfig fire(const NetworkConfig& config, const DeviceId& device, const Program& p,
                   const Registry& registry);

// Environment change: every device of the new environment gets the
// tree of an isolated evaluation, then devices surviving from the old
// configuration keep their previous trees.
NetworkConfig env_change(const NetworkConfig& config, const Environment& new_env,
                         const Program& p, const Registry& registry);

NetworkConfig initial_config(const Environment& env, const Program& p, const Registry& registry);

struct Schedule {
  std::vector<DeviceId> order;
  int k = 1;
  std::uint64_t seed = 0;
};

// Concatenation of k independent uniform permutations of the devices;
// the h-th fire of any device sits in block h, so every later block
// contains all other devices and the sequence is k-fair.
Schedule make_k_fair_schedule(const std::vector<DeviceId>& devices, int k, std::uint64_t seed);

// Brute-force check of the fairness definition: for every h <= k, the
// h-th fire of any device is followed by at least k-h fires of every
// other device.
bool is_k_fair(const std::vector<DeviceId>& order, const std::vector<DeviceId>& devices, int k);

struct RunOutcome {
  NetworkConfig config;
  int rounds_used = 0;
  bool stable = false;
};

// Repeats k-fair rounds (k random permutations each, 1-fair by
// default) until a full round changes no value-tree, up to max_rounds.
RunOutcome run_until_stable(const NetworkConfig& config, const Program& p,
                            const Registry& registry, int max_rounds, std::uint64_t seed,
                            const TraceSink& trace = nullptr, int* step_counter = nullptr,
                            int k = 1);

inline int default_max_rounds(size_t devices) { return static_cast<int>(devices) * 10; }

struct SelfStabReport {
  bool well_annotated = false;
  bool all_stable = false;
  bool unique = false;
  int trials = 0;
  std::vector<int> rounds_per_trial;
  Field stable_field;  // when unique
  // first trial pair that disagreed, with one differing device
  std::optional<std::pair<int, int>> counterexample_trials;
  DeviceId counterexample_device;
};

// Builds `trials` distinct reachable configurations ending in `env`
// (random restricted/perturbed environments plus random fires), runs
// each to stability with an independent schedule and compares the
// resulting fields.
SelfStabReport check_self_stabilisation(const Program& p, const Registry& registry,
                                        const Environment& env, int trials, std::uint64_t seed,
                                        int max_rounds = 0);

struct ProbeViolation {
  std::string probe;  // "minimum-increases", "minimum-sources", "frontier"
  int round = 0;
  DeviceId device;
  std::string detail;
};

struct ProbeReport {
  bool applicable = false;  // main is a single spreading over stable parts
  bool stable = false;
  int rounds = 0;
  std::vector<ProbeViolation> violations;

  bool ok() const { return applicable && stable && violations.empty(); }
};

// Runs the network from the isolated-evaluation start and checks, per
// round, the minimum-value ascent, the self-stabilisation of minimal
// sources, and the one-round stabilisation of frontier devices whose
// supporting neighbour has settled.
ProbeReport appendix_probes(const Program& p, const Registry& registry, const Environment& env,
                            std::uint64_t seed, int max_rounds = 0);

// JSON environment files:
// { "devices": [ { "id": "...", "sensors": {...}, "neighbors": [...] } ],
//   "sensorSorts": { "name": "sort" } }
struct LoadedEnvironment {
  Environment env;
  SensorTable sensors;
  Report report;
};

LoadedEnvironment load_environment(const std::string& path);
LoadedEnvironment parse_environment(const std::string& json_text, const std::string& name);

std::string value_to_json(const Value& v);
std::string tree_to_json(const ValueTree& t);
Value value_from_json_text(const std::string& text);
ValueTree tree_from_json_text(const std::string& text);
std::string field_to_json(const Field& field);

}  // namespace fieldcalc
