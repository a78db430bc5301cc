#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ix {

// Flat, schema-stable rows for the metrics CSVs. Columns are documented in
// the README; golden tests pin the headers.

struct InvocationRow {
  std::string scenario;
  std::string protocol;
  std::uint64_t seed = 0;
  std::string invocation;  // hex id
  std::string dapp;
  std::uint32_t depth = 0;
  std::string status;
  std::string reason;
  std::uint64_t submit_ms = 0;
  std::uint64_t terminal_ms = 0;
  std::uint64_t latency_ms = 0;
  std::uint64_t rounds = 0;  // execution-chain blocks, inclusive of the user tx
  std::uint32_t lock_msgs = 0;
  std::uint32_t update_msgs = 0;
  std::uint32_t seg_msgs = 0;
  std::uint32_t transfers_c1 = 0;
  std::uint32_t transfers_c2 = 0;
  std::uint32_t transfers_c3 = 0;
  std::uint64_t latency_c1_ms = 0;  // submit to last protocol activity per chain
  std::uint64_t latency_c2_ms = 0;
  std::uint64_t latency_c3_ms = 0;
  std::uint64_t gas_c1 = 0;
  std::uint64_t gas_c2 = 0;
  std::uint64_t gas_c3 = 0;
  std::uint64_t gas_total = 0;
  std::uint32_t retries = 0;
};

struct RelayerRow {
  std::string scenario;
  std::string relayer;
  std::string behavior;
  std::uint64_t fees = 0;
  std::int64_t rewards = 0;
  std::int64_t penalties = 0;
  std::uint64_t delivered = 0;
  std::uint64_t duplicates = 0;
};

struct DeployRow {
  std::string scenario;
  std::string job;
  std::string service;
  std::uint64_t t_requested_ms = 0;
  std::uint64_t t_registered_ms = 0;
  std::uint64_t t_verified_ms = 0;
  std::uint64_t gas_deploy = 0;
  std::uint64_t gas_register = 0;
  std::uint64_t gas_verify = 0;
  std::uint32_t restarts = 0;
};

// The summary is a flat metric map with a pinned column order so `compare`
// can diff any two runs.
struct SummaryRow {
  std::string scenario;
  std::string protocol;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
};

extern const char* kInvocationHeader;
extern const char* kRelayerHeader;
extern const char* kDeployHeader;
extern const std::vector<std::string>& summary_metric_names();

std::string invocation_csv(const std::vector<InvocationRow>& rows);
std::string relayer_csv(const std::vector<RelayerRow>& rows);
std::string deploy_csv(const std::vector<DeployRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);

std::string format_metric(double value);

// --- compare -------------------------------------------------------------------

struct CompareLine {
  std::string metric;
  double a = 0;
  double b = 0;
  double delta = 0;    // b - a
  double pct = 0;      // delta / a * 100 (0 when a == 0)
};

struct Expectation {
  std::string metric;
  std::string op;  // lt, le, gt, ge, eq
};

struct CompareResult {
  std::vector<CompareLine> lines;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

// Throws SchemaMismatch when the two summaries carry different columns.
CompareResult compare_summaries(const std::string& csv_a, const std::string& csv_b,
                                const std::vector<Expectation>& expectations);

}  // namespace ix
