#include "ix/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ix/errors.hpp"

namespace ix {

const char* kInvocationHeader =
    "scenario,protocol,seed,invocation,dapp,depth,status,reason,submit_ms,terminal_ms,latency_ms,"
    "rounds,lock_msgs,update_msgs,seg_msgs,transfers_c1,transfers_c2,transfers_c3,latency_c1_ms,"
    "latency_c2_ms,latency_c3_ms,gas_c1,gas_c2,gas_c3,gas_total,retries";

const char* kRelayerHeader =
    "scenario,relayer,behavior,fees,rewards,penalties,delivered,duplicates";

const char* kDeployHeader =
    "scenario,job,service,t_requested_ms,t_registered_ms,t_verified_ms,gas_deploy,gas_register,"
    "gas_verify,restarts";

const std::vector<std::string>& summary_metric_names() {
  static const std::vector<std::string> names = {
      "invocations", "committed", "aborted_lock_conflict", "aborted_exec_failure",
      "aborted_timeout", "mean_latency_s", "max_latency_s", "mean_rounds", "throughput_per_s",
      "latency_c1_s", "latency_c2_s", "latency_c3_s",
      "gas_total", "gas_c1", "gas_c2", "gas_c3", "messages_lock", "messages_update",
      "messages_seg", "transfers_c2", "transfers_c3", "relayer_fees", "relayer_rewards",
      "relayer_penalties", "duplicates", "deploy_gas_total", "audit_ok",
  };
  return names;
}

std::string format_metric(double value) {
  if (std::floor(value) == value && std::abs(value) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string invocation_csv(const std::vector<InvocationRow>& rows) {
  std::ostringstream out;
  out << kInvocationHeader << '\n';
  for (const InvocationRow& r : rows) {
    out << r.scenario << ',' << r.protocol << ',' << r.seed << ',' << r.invocation << ',' << r.dapp
        << ',' << r.depth << ',' << r.status << ',' << r.reason << ',' << r.submit_ms << ','
        << r.terminal_ms << ',' << r.latency_ms << ',' << r.rounds << ',' << r.lock_msgs << ','
        << r.update_msgs << ',' << r.seg_msgs << ',' << r.transfers_c1 << ',' << r.transfers_c2
        << ',' << r.transfers_c3 << ',' << r.latency_c1_ms << ',' << r.latency_c2_ms << ','
        << r.latency_c3_ms << ',' << r.gas_c1 << ',' << r.gas_c2 << ',' << r.gas_c3 << ','
        << r.gas_total << ',' << r.retries << '\n';
  }
  return out.str();
}

std::string relayer_csv(const std::vector<RelayerRow>& rows) {
  std::ostringstream out;
  out << kRelayerHeader << '\n';
  for (const RelayerRow& r : rows) {
    out << r.scenario << ',' << r.relayer << ',' << r.behavior << ',' << r.fees << ',' << r.rewards
        << ',' << r.penalties << ',' << r.delivered << ',' << r.duplicates << '\n';
  }
  return out.str();
}

std::string deploy_csv(const std::vector<DeployRow>& rows) {
  std::ostringstream out;
  out << kDeployHeader << '\n';
  for (const DeployRow& r : rows) {
    out << r.scenario << ',' << r.job << ',' << r.service << ',' << r.t_requested_ms << ','
        << r.t_registered_ms << ',' << r.t_verified_ms << ',' << r.gas_deploy << ','
        << r.gas_register << ',' << r.gas_verify << ',' << r.restarts << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "scenario,protocol,seed";
  for (const std::string& name : summary_metric_names()) out << ',' << name;
  out << '\n';
  for (const SummaryRow& r : rows) {
    out << r.scenario << ',' << r.protocol << ',' << r.seed;
    for (const std::string& name : summary_metric_names()) {
      const auto it = r.metrics.find(name);
      out << ',' << format_metric(it == r.metrics.end() ? 0.0 : it->second);
    }
    out << '\n';
  }
  return out.str();
}

// --- compare -------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

struct ParsedSummary {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

ParsedSummary parse_summary(const std::string& csv) {
  ParsedSummary out;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) fail(ErrCode::SchemaMismatch, "empty summary csv");
  out.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.rows.push_back(split_csv_line(line));
  }
  if (out.rows.empty()) fail(ErrCode::SchemaMismatch, "summary csv has no data rows");
  return out;
}

}  // namespace

CompareResult compare_summaries(const std::string& csv_a, const std::string& csv_b,
                                const std::vector<Expectation>& expectations) {
  const ParsedSummary a = parse_summary(csv_a);
  const ParsedSummary b = parse_summary(csv_b);
  if (a.columns != b.columns) fail(ErrCode::SchemaMismatch, "summary schemas differ");

  // Compare the first data row of each file, metric columns only.
  CompareResult result;
  std::map<std::string, std::pair<double, double>> values;
  for (std::size_t i = 3; i < a.columns.size(); ++i) {
    CompareLine line;
    line.metric = a.columns[i];
    line.a = std::stod(a.rows.front()[i]);
    line.b = std::stod(b.rows.front()[i]);
    line.delta = line.b - line.a;
    line.pct = line.a != 0.0 ? line.delta / line.a * 100.0 : 0.0;
    values[line.metric] = {line.a, line.b};
    result.lines.push_back(line);
  }

  for (const Expectation& e : expectations) {
    const auto it = values.find(e.metric);
    if (it == values.end()) fail(ErrCode::SchemaMismatch, "unknown metric " + e.metric);
    const auto [va, vb] = it->second;
    bool ok = false;
    if (e.op == "lt") ok = va < vb;
    else if (e.op == "le") ok = va <= vb;
    else if (e.op == "gt") ok = va > vb;
    else if (e.op == "ge") ok = va >= vb;
    else if (e.op == "eq") ok = va == vb;
    else fail(ErrCode::ConfigError, "unknown comparison op " + e.op);
    if (!ok) {
      result.failures.push_back(e.metric + " expected a " + e.op + " b, got a=" +
                                format_metric(va) + " b=" + format_metric(vb));
    }
  }
  return result;
}

}  // namespace ix
