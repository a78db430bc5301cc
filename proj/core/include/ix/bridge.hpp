#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ix/calltree.hpp"
#include "ix/messages.hpp"

namespace ix {

// --- service registry ----------------------------------------------------------

struct RegistryEntry {
  Address logic_addr;
  bool verified = false;
  std::uint32_t origin_chain = 0;
  Address origin_addr;
  std::string registrar;  // relayer (or "genesis") that registered the clone
  std::uint64_t registered_height = 0;
};

// Bridge-side record of an open clone job: which services may currently be
// registered, who is banned after a failed verification, restart budget.
struct CloneJob {
  Digest job_id;
  std::uint32_t execution_chain = 0;
  std::vector<CloneRef> entries;
  std::set<std::string> open_services;  // registrations accepted while open
  std::set<std::string> banned_relayers;
  // Each service's clone round restarts independently; a relayer whose clone
  // failed verification is banned for the whole job, so per-service restarts
  // are bounded by the number of faulty relayers.
  std::map<std::string, std::uint32_t> restarts;
  std::uint32_t restart_cap = 3;
  bool failed = false;

  std::uint32_t max_restarts() const {
    std::uint32_t out = 0;
    for (const auto& [service, n] : restarts) out = n > out ? n : out;
    return out;
  }
};

struct RelayerLedger {
  std::uint64_t fees = 0;
  std::int64_t rewards = 0;
  std::int64_t penalties = 0;
  std::uint64_t delivered = 0;    // messages accepted first from this relayer
  std::uint64_t duplicates = 0;   // deliveries suppressed by dedup
};

// --- invocation state machine ----------------------------------------------------

enum class InvStatus : std::uint8_t {
  Locking = 0,
  Executing = 1,
  Updating = 2,
  Committed = 3,
  Aborted = 4,
};

inline const char* inv_status_name(InvStatus s) {
  switch (s) {
    case InvStatus::Locking: return "Locking";
    case InvStatus::Executing: return "Executing";
    case InvStatus::Updating: return "Updating";
    case InvStatus::Committed: return "Committed";
    case InvStatus::Aborted: return "Aborted";
  }
  return "?";
}

struct TranscriptEvent {
  std::uint64_t time_ms = 0;
  std::uint32_t chain = 0;
  std::uint64_t height = 0;
  std::string label;
};

struct Invocation {
  Digest id;
  std::string dapp;
  AccountId user;
  std::map<std::string, std::uint64_t> args;
  bool baseline = false;
  bool ta = true;
  bool fgsl = true;
  std::uint64_t exec_gas_limit = 0;
  std::uint64_t fee_escrow = 0;
  std::uint64_t escrow_remaining = 0;

  InvStatus status = InvStatus::Locking;
  ErrCode abort_reason = ErrCode::Ok;
  std::uint64_t submit_ms = 0;
  std::uint64_t submit_height = 0;
  std::uint64_t deadline_height = 0;
  std::uint64_t expiry_time_ms = 0;
  std::uint64_t terminal_ms = 0;

  Analysis analysis;
  std::set<std::uint32_t> invoked_chains;
  std::map<std::uint32_t, std::vector<LockSub>> lock_plan;
  std::map<std::uint32_t, std::vector<SnapSub>> snapshots;
  // Without aggregation a chain answers once per contract, so completion is
  // counted per expected result rather than per chain.
  std::map<std::uint32_t, std::uint32_t> expected_results;
  std::map<std::uint32_t, std::uint32_t> received_results;
  std::set<std::uint32_t> lock_ok;
  std::map<std::uint32_t, std::vector<UpdateSub>> update_plan;
  bool update_commit = false;
  std::set<std::uint32_t> acks;

  // Sequential baseline bookkeeping.
  std::vector<std::string> segments;  // post-order node ids
  std::size_t segment_pos = 0;
  std::map<std::string, std::uint64_t> env;
  std::map<Address, std::map<std::string, SlotValue>> local_overlay;  // provisional local writes

  std::uint64_t terminal_height = 0;

  // Protocol-law counters (externally audited): cross-chain messages emitted
  // per phase. `stale_answers` counts abort updates re-sent for responses that
  // arrived after the invocation terminated.
  std::uint32_t lock_msgs = 0;
  std::uint32_t update_msgs = 0;
  std::uint32_t seg_msgs = 0;
  std::uint32_t stale_answers = 0;

  bool terminal() const { return status == InvStatus::Committed || status == InvStatus::Aborted; }
};

// Baseline segment execution state held by an invoked chain's bridge:
// whole-contract locks plus provisional writes visible to later segments of
// the same invocation.
struct BaselineLocal {
  std::set<Address> locked;
  std::map<Address, std::map<std::string, SlotValue>> overlay;
};

// --- per-chain bridge state --------------------------------------------------------

struct BridgeState {
  Address address;
  std::uint32_t chain_id = 0;
  std::uint32_t max_timeout_blocks = 20;

  std::map<std::string, RegistryEntry> registry;
  std::set<Digest> seen;
  std::map<Digest, CloneJob> clone_jobs;
  std::map<std::string, DappDescriptor> dapps;
  std::map<Digest, Invocation> invocations;
  std::map<std::string, RelayerLedger> relayer_ledgers;
  // Light-client style header store, filled from accepted messages.
  std::map<std::uint32_t, std::map<std::uint64_t, Digest>> header_store;

  // Invoked-chain records: state contracts locked per invocation (routes
  // abort updates), plus baseline segment state.
  std::map<Digest, std::vector<Address>> locked_states;
  std::map<Digest, BaselineLocal> baseline_local;

  // Integrated executions scheduled for the next block (drained by the
  // scheduler after the current block is sealed).
  std::vector<Digest> pending_keeper;

  std::uint64_t accepted_messages = 0;
  std::uint64_t duplicate_messages = 0;

  const RegistryEntry* find_service(const std::string& service_id) const {
    const auto it = registry.find(service_id);
    return it == registry.end() ? nullptr : &it->second;
  }
  bool service_verified(const std::string& service_id) const {
    const RegistryEntry* e = find_service(service_id);
    return e != nullptr && e->verified;
  }
};

}  // namespace ix
