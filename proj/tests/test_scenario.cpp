#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ix/scenario.hpp"

using namespace ix;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config json round-trips through parse and serialize") {
  const ScenarioConfig cfg = builtin_scenarios("train-hotel", {}).front();
  const std::string text = scenario_to_json(cfg);
  const ScenarioConfig back = parse_scenario_json(text);
  CHECK(back.name == cfg.name);
  CHECK(back.protocol == cfg.protocol);
  CHECK(back.chains.size() == cfg.chains.size());
  CHECK(back.services.size() == cfg.services.size());
  CHECK(back.dapps.size() == cfg.dapps.size());
  CHECK(back.workload.size() == cfg.workload.size());
  CHECK(scenario_to_json(back) == text);  // fixed point
}

TEST_CASE("config errors carry diagnostics") {
  SUBCASE("syntax errors point at the json problem") {
    try {
      static_cast<void>(parse_scenario_json("{ not json"));
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrCode::ConfigError);
    }
  }
  SUBCASE("unknown protocol") {
    CHECK_THROWS_AS(static_cast<void>(parse_scenario_json(
                        R"({"name":"x","protocol":"quantum","chains":[{"chain_id":1}]})")),
                    Error);
  }
  SUBCASE("a scenario without any honest relayer is rejected") {
    const char* text = R"({
      "name": "x", "chains": [{"chain_id": 1}],
      "relayers": [{"id": "d", "behavior": "drop", "p": 1.0}]
    })";
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_scenario_json(text)),
                         doctest::Contains("honest"), Error);
  }
  SUBCASE("unknown builtin scenario") {
    CHECK_THROWS_AS(static_cast<void>(builtin_scenarios("nope", {})), Error);
  }
}

TEST_CASE("the shipped scenario files parse and match the builtins") {
  const std::string root = IX_REPO_ROOT;
  const ScenarioConfig from_file = load_scenario_file(root + "/scenarios/train_hotel.json");
  const ScenarioConfig builtin = builtin_scenarios("train-hotel", {}).front();
  CHECK(scenario_to_json(from_file) == scenario_to_json(builtin));

  const ScenarioConfig faults = load_scenario_file(root + "/scenarios/fault_suite.json");
  const ScenarioConfig fault_builtin = builtin_scenarios("fault-suite", {}).front();
  CHECK(scenario_to_json(faults) == scenario_to_json(fault_builtin));

  // The shipped assembly sources are the embedded ones.
  CHECK(slurp(root + "/scenarios/programs/hotel_book.vm") == samples::kHotelBookAsm);
  CHECK(slurp(root + "/scenarios/programs/train_book.vm") == samples::kTrainBookAsm);
  CHECK(slurp(root + "/scenarios/programs/agency_plan.vm") == samples::kAgencyPlanAsm);
  CHECK(slurp(root + "/scenarios/programs/step.vm") == samples::kStepAsm);
  CHECK(slurp(root + "/scenarios/programs/hub.vm") == samples::kHubAsm);
}

TEST_CASE("train-hotel scenario runs, commits and the audit passes") {
  BuiltinOptions opts;
  opts.protocol = "integratex";
  const ScenarioOutcome out = run_scenario(builtin_scenarios("train-hotel", opts).front());
  CHECK(out.deploy_ok);
  CHECK(out.workload_done);
  CHECK(out.assertions_ok());
  CHECK(out.audit.ok);
  CHECK(out.summary.metrics.at("committed") == 1);
  CHECK(out.summary.metrics.at("messages_lock") == 2);
  CHECK(out.summary.metrics.at("messages_update") == 2);
  CHECK(out.summary.metrics.at("mean_rounds") == 10);
}

TEST_CASE("same config and seed give byte-identical csv outputs") {
  BuiltinOptions opts;
  opts.protocol = "integratex";
  opts.seed = 42;
  auto render = [&] {
    const ScenarioOutcome out = run_scenario(builtin_scenarios("train-hotel", opts).front());
    return invocation_csv(out.invocations) + relayer_csv(out.relayers) +
           deploy_csv(out.deploys) + summary_csv({out.summary});
  };
  const std::string a = render();
  const std::string b = render();
  CHECK(a == b);
}

TEST_CASE("csv headers are pinned") {
  CHECK(std::string(kInvocationHeader) ==
        "scenario,protocol,seed,invocation,dapp,depth,status,reason,submit_ms,terminal_ms,"
        "latency_ms,rounds,lock_msgs,update_msgs,seg_msgs,transfers_c1,transfers_c2,transfers_c3,"
        "latency_c1_ms,latency_c2_ms,latency_c3_ms,gas_c1,gas_c2,gas_c3,gas_total,retries");
  CHECK(std::string(kRelayerHeader) ==
        "scenario,relayer,behavior,fees,rewards,penalties,delivered,duplicates");
  CHECK(std::string(kDeployHeader) ==
        "scenario,job,service,t_requested_ms,t_registered_ms,t_verified_ms,gas_deploy,"
        "gas_register,gas_verify,restarts");
  const std::string summary = summary_csv({});
  CHECK(summary.substr(0, summary.find('\n')) ==
        "scenario,protocol,seed,invocations,committed,aborted_lock_conflict,aborted_exec_failure,"
        "aborted_timeout,mean_latency_s,max_latency_s,mean_rounds,throughput_per_s,latency_c1_s,"
        "latency_c2_s,latency_c3_s,gas_total,gas_c1,gas_c2,gas_c3,messages_lock,messages_update,"
        "messages_seg,transfers_c2,transfers_c3,relayer_fees,relayer_rewards,relayer_penalties,"
        "duplicates,deploy_gas_total,audit_ok");
}

TEST_CASE("compare: identical summaries produce an empty diff, mismatched schemas throw") {
  const std::string csv = summary_csv({SummaryRow{"s", "integratex", 1, {{"committed", 1}}}});
  const CompareResult same = compare_summaries(csv, csv, {});
  CHECK(same.ok());
  for (const CompareLine& line : same.lines) CHECK(line.delta == 0);

  CHECK_THROWS_AS(static_cast<void>(compare_summaries(csv, "a,b\n1,2\n", {})), Error);

  SUBCASE("expectations flag violated trends") {
    SummaryRow fast{"s", "integratex", 1, {{"mean_latency_s", 50}}};
    SummaryRow slow{"s", "baseline", 1, {{"mean_latency_s", 85}}};
    const CompareResult cmp =
        compare_summaries(summary_csv({fast}), summary_csv({slow}), {{"mean_latency_s", "lt"}});
    CHECK(cmp.ok());
    const CompareResult bad =
        compare_summaries(summary_csv({slow}), summary_csv({fast}), {{"mean_latency_s", "lt"}});
    CHECK_FALSE(bad.ok());
  }
}

TEST_CASE("fault-suite builtin settles every invocation and passes the audit") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    BuiltinOptions opts;
    opts.seed = seed;
    const ScenarioOutcome out = run_scenario(builtin_scenarios("fault-suite", opts).front());
    CHECK(out.workload_done);
    CHECK(out.audit.ok);
  }
}

TEST_CASE("lsd-gas table is exposed for reporting") {
  const auto rows = lsd_gas_table(GasSchedule{});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].contract == "train");
  CHECK(rows[1].contract == "hotel");
  CHECK(rows[1].saving_pct > rows[0].saving_pct);
}
