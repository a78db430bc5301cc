#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ix/deploy.hpp"
#include "ix/metrics.hpp"
#include "ix/relayer.hpp"
#include "ix/samples.hpp"
#include "ix/sim.hpp"

namespace ix {

struct ServiceCfg {
  std::uint32_t chain_id = 0;
  MonolithicSpec contract;  // deployed decoupled (logic + state) at genesis
};

struct WorkloadCfg {
  std::string dapp;
  AccountId user;
  std::uint64_t at_ms = 0;  // offset after the deployment phase completes
  std::uint32_t count = 1;
  std::map<std::string, std::uint64_t> args;
  bool retry_on_conflict = false;
  std::uint64_t exec_gas_limit = 0;  // 0 = descriptor default
};

struct AssertionCfg {
  std::string type;  // all_committed | audit_clean | all_terminal | aggregation_law
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  std::string protocol = "integratex";  // or "baseline"
  bool ta = true;
  bool fgsl = true;
  std::uint64_t max_sim_ms = 3'600'000;
  GasSchedule gas;
  std::uint32_t bridge_timeout_blocks = 20;
  std::vector<ChainConfig> chains;
  std::vector<RelayerConfig> relayers;
  std::vector<ServiceCfg> services;
  std::vector<DappDescriptor> dapps;
  std::vector<WorkloadCfg> workload;
  std::vector<AssertionCfg> assertions;
};

// Human-readable structured config: JSON with the exact field names of the
// structs above (docs/protocol.md documents the schema).
ScenarioConfig parse_scenario_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);
ScenarioConfig load_scenario_file(const std::string& path);

struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::uint64_t checked_invocations = 0;
  std::uint64_t checked_slots = 0;
};

struct ScenarioOutcome {
  ScenarioConfig config;
  std::vector<InvocationRow> invocations;
  std::vector<RelayerRow> relayers;
  std::vector<DeployRow> deploys;
  SummaryRow summary;
  AuditReport audit;
  bool deploy_ok = true;
  bool workload_done = true;
  std::vector<std::string> assertion_failures;
  bool assertions_ok() const { return assertion_failures.empty(); }
};

// Builds the simulation, runs the deployment phase then the workload to
// quiescence, audits cross-chain state, and collects all metric rows.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

// Writes invocations.csv, relayers.csv, deploys.csv, summary.csv.
void write_outcome_csvs(const std::vector<ScenarioOutcome>& outcomes, const std::string& out_dir);

// The global cross-chain state audit, usable on any simulation.
AuditReport audit_simulation(const Simulation& sim);

// --- builtin scenarios --------------------------------------------------------------

struct BuiltinOptions {
  std::uint64_t seed = 1;
  std::optional<std::string> protocol;       // both when unset (where applicable)
  std::optional<bool> ta;
  std::optional<bool> fgsl;
  std::vector<std::uint64_t> block_times_ms;  // blocktime-sweep override
  std::optional<std::uint32_t> depth;
  std::optional<std::uint32_t> concurrency;
};

std::vector<std::string> builtin_scenario_names();
std::vector<ScenarioConfig> builtin_scenarios(const std::string& name, const BuiltinOptions& opts);

// Deployment gas for the sample contracts, with and without logic-state
// decoupling (the decoupled figure is the clonable logic program alone).
struct LsdGasRow {
  std::string contract;
  std::uint64_t monolithic_gas = 0;
  std::uint64_t decoupled_gas = 0;
  double saving_pct = 0;
};
std::vector<LsdGasRow> lsd_gas_table(const GasSchedule& gas);

}  // namespace ix
