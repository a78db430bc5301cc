// Scenario runner and metrics reporter for the cross-chain testbed.
//
//   ixbench run <scenario> [--seed N] [--out DIR] [--protocol P] [--ta on|off]
//                          [--fgsl on|off] [--block-time MS ...] [--depth D]
//                          [--concurrency K]
//   ixbench compare <csv_a> <csv_b> [--expect metric:op ...]
//   ixbench list
//   ixbench dump <builtin> [--seed N]
//
// <scenario> is a builtin name (see `list`) or a path to a scenario JSON
// file. Exit code 0 iff every in-config assertion holds.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ix/scenario.hpp"

namespace {

using namespace ix;

bool parse_on_off(const std::string& value, const std::string& flag) {
  if (value == "on") return true;
  if (value == "off") return false;
  throw CLI::ValidationError(flag + " must be 'on' or 'off'");
}

void print_summary_line(const ScenarioOutcome& out) {
  const auto& m = out.summary.metrics;
  std::cout << "  " << out.config.name << ": committed=" << format_metric(m.at("committed"))
            << " mean_latency=" << format_metric(m.at("mean_latency_s")) << "s"
            << " rounds=" << format_metric(m.at("mean_rounds"))
            << " gas=" << format_metric(m.at("gas_total"))
            << " audit=" << (out.audit.ok ? "ok" : "VIOLATED") << '\n';
  for (const std::string& failure : out.assertion_failures) {
    std::cout << "    assertion failed: " << failure << '\n';
  }
  for (const std::string& v : out.audit.violations) {
    std::cout << "    audit: " << v << '\n';
  }
}

// Paired protocol runs: report the latency reduction the integrated protocol
// achieves over the baseline.
void print_reductions(const std::vector<ScenarioOutcome>& outcomes) {
  for (const ScenarioOutcome& a : outcomes) {
    if (a.config.protocol != "integratex") continue;
    const std::string base_name = a.config.name.substr(0, a.config.name.rfind('-'));
    for (const ScenarioOutcome& b : outcomes) {
      if (b.config.protocol != "baseline") continue;
      if (b.config.name.substr(0, b.config.name.rfind('-')) != base_name) continue;
      const double ix_lat = a.summary.metrics.at("mean_latency_s");
      const double gp_lat = b.summary.metrics.at("mean_latency_s");
      if (ix_lat <= 0 || gp_lat <= 0) continue;
      std::cout << "  " << base_name << ": latency " << format_metric(ix_lat) << "s vs "
                << format_metric(gp_lat) << "s -> reduction "
                << format_metric((1.0 - ix_lat / gp_lat) * 100.0) << "%\n";
    }
  }
}

int cmd_run(const std::string& scenario, std::uint64_t seed, const std::string& out_dir,
            const std::string& protocol, const std::string& ta, const std::string& fgsl,
            const std::vector<std::uint64_t>& block_times, std::uint32_t depth,
            std::uint32_t concurrency) {
  std::vector<ScenarioConfig> configs;
  if (std::filesystem::exists(scenario)) {
    ScenarioConfig cfg = load_scenario_file(scenario);
    cfg.seed = seed != 0 ? seed : cfg.seed;
    if (!protocol.empty()) cfg.protocol = protocol;
    if (!ta.empty()) cfg.ta = parse_on_off(ta, "--ta");
    if (!fgsl.empty()) cfg.fgsl = parse_on_off(fgsl, "--fgsl");
    configs.push_back(std::move(cfg));
  } else {
    BuiltinOptions opts;
    opts.seed = seed != 0 ? seed : 1;
    if (!protocol.empty()) opts.protocol = protocol;
    if (!ta.empty()) opts.ta = parse_on_off(ta, "--ta");
    if (!fgsl.empty()) opts.fgsl = parse_on_off(fgsl, "--fgsl");
    opts.block_times_ms = block_times;
    if (depth != 0) opts.depth = depth;
    if (concurrency != 0) opts.concurrency = concurrency;
    configs = builtin_scenarios(scenario, opts);
  }

  std::vector<ScenarioOutcome> outcomes;
  bool ok = true;
  std::cout << "running " << configs.size() << " scenario(s)\n";
  for (const ScenarioConfig& cfg : configs) {
    outcomes.push_back(run_scenario(cfg));
    print_summary_line(outcomes.back());
    ok = ok && outcomes.back().assertions_ok() && outcomes.back().audit.ok;
  }
  print_reductions(outcomes);

  if (scenario == "lsd-gas") {
    std::cout << "  deployment gas with/without logic-state decoupling:\n";
    std::ostringstream csv;
    csv << "contract,monolithic_gas,decoupled_gas,saving_pct\n";
    for (const LsdGasRow& row : lsd_gas_table(configs.front().gas)) {
      std::cout << "    " << row.contract << ": " << row.monolithic_gas << " -> "
                << row.decoupled_gas << " (" << format_metric(row.saving_pct) << "% saved)\n";
      csv << row.contract << ',' << row.monolithic_gas << ',' << row.decoupled_gas << ','
          << format_metric(row.saving_pct) << '\n';
    }
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::ofstream f(out_dir + "/lsd_gas.csv", std::ios::binary);
      f << csv.str();
    }
  }

  if (!out_dir.empty()) {
    write_outcome_csvs(outcomes, out_dir);
    std::cout << "wrote CSVs to " << out_dir << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::vector<std::string>& expects) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrCode::ConfigError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  std::vector<Expectation> expectations;
  for (const std::string& e : expects) {
    const auto colon = e.find(':');
    if (colon == std::string::npos) fail(ErrCode::ConfigError, "--expect wants metric:op");
    expectations.push_back({e.substr(0, colon), e.substr(colon + 1)});
  }
  const CompareResult result = compare_summaries(slurp(path_a), slurp(path_b), expectations);
  bool any = false;
  for (const CompareLine& line : result.lines) {
    if (line.delta == 0) continue;
    any = true;
    std::cout << "  " << line.metric << ": " << format_metric(line.a) << " -> "
              << format_metric(line.b) << " (delta " << format_metric(line.delta) << ", "
              << format_metric(line.pct) << "%)\n";
  }
  if (!any) std::cout << "  no differences\n";
  for (const std::string& failure : result.failures) {
    std::cout << "  expectation failed: " << failure << '\n';
  }
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-chain integrated-execution testbed"};
  app.require_subcommand(1);

  std::string scenario, out_dir, protocol, ta, fgsl;
  std::uint64_t seed = 0;
  std::uint32_t depth = 0, concurrency = 0;
  std::vector<std::uint64_t> block_times;

  CLI::App* run = app.add_subcommand("run", "run a builtin or file scenario");
  run->add_option("scenario", scenario, "builtin name or scenario JSON path")->required();
  run->add_option("--seed", seed, "scenario seed");
  run->add_option("--out", out_dir, "directory for metrics CSVs");
  run->add_option("--protocol", protocol, "integratex|baseline (default: both where applicable)")
      ->check(CLI::IsMember({"integratex", "baseline"}));
  run->add_option("--ta", ta, "transaction aggregation on|off");
  run->add_option("--fgsl", fgsl, "fine-grained state lock on|off");
  run->add_option("--block-time", block_times, "block times in ms (blocktime-sweep)");
  run->add_option("--depth", depth, "call tree depth (depth-sweep, ta-ablation)");
  run->add_option("--concurrency", concurrency, "simultaneous calls (concurrency-sweep)");

  std::string csv_a, csv_b;
  std::vector<std::string> expects;
  CLI::App* compare = app.add_subcommand("compare", "diff two summary CSVs");
  compare->add_option("csv_a", csv_a)->required();
  compare->add_option("csv_b", csv_b)->required();
  compare->add_option("--expect", expects, "trend assertions, metric:lt|le|gt|ge|eq (a vs b)");

  CLI::App* list = app.add_subcommand("list", "list builtin scenarios");

  std::string dump_name;
  std::uint64_t dump_seed = 1;
  CLI::App* dump = app.add_subcommand("dump", "print a builtin scenario as JSON");
  dump->add_option("builtin", dump_name)->required();
  dump->add_option("--seed", dump_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario, seed, out_dir, protocol, ta, fgsl, block_times, depth, concurrency);
    }
    if (compare->parsed()) return cmd_compare(csv_a, csv_b, expects);
    if (list->parsed()) {
      for (const std::string& name : ix::builtin_scenario_names()) std::cout << name << '\n';
      return 0;
    }
    if (dump->parsed()) {
      ix::BuiltinOptions opts;
      opts.seed = dump_seed;
      for (const ix::ScenarioConfig& cfg : ix::builtin_scenarios(dump_name, opts)) {
        std::cout << ix::scenario_to_json(cfg);
      }
      return 0;
    }
  } catch (const ix::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
