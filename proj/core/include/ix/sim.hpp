#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ix/chain.hpp"
#include "ix/gas.hpp"
#include "ix/messages.hpp"

namespace ix {

class Simulation;

// Off-chain participants (relayers, providers, users) stepped by the global
// scheduler. Actors talk to chains only through submitted transactions and
// read-only snapshots.
class Actor {
 public:
  explicit Actor(std::string id) : id_(std::move(id)) {}
  virtual ~Actor() = default;

  const std::string& id() const { return id_; }
  std::uint64_t next_wake_ms = 0;

  virtual void wake(Simulation& sim) = 0;

 private:
  std::string id_;
};

// Observability kept outside consensus state so transaction reverts never
// rewind recorded measurements.
struct InvMetrics {
  std::map<std::uint32_t, std::uint64_t> gas_by_chain;
  std::map<std::uint32_t, std::uint32_t> transfer_rounds;  // inbound state requests per chain
  std::map<std::uint32_t, std::uint64_t> last_activity_ms;
  std::vector<TranscriptEvent> transcript;
};

// One relayer submission, kept so verifiability sweeps can audit every copy
// against its eventual receipt.
struct RelaySubmission {
  std::string relayer;
  std::uint32_t dest_chain = 0;
  Digest tx_hash;
  bool tampered = false;
  bool clone = false;  // clone-deploy race entry rather than an inbound message
};

struct SimMetrics {
  std::map<Digest, InvMetrics> invocations;
  std::vector<RelaySubmission> submissions;
  std::uint64_t relay_drops = 0;
  std::uint64_t relay_tampers = 0;        // tampered copies submitted
  std::uint64_t rejected_bad_proof = 0;   // inbound messages rejected by proof/header checks
  std::uint64_t rejected_not_finalized = 0;
};

// The whole multi-chain testbed: chains under one discrete-event clock, the
// transaction dispatcher, and deterministic seed derivation for every actor.
class Simulation : public TxExecutor {
 public:
  explicit Simulation(GasSchedule gas = {}, std::uint64_t seed = 0);

  void add_chain(ChainConfig config);
  Chain& chain(std::uint32_t id);
  const Chain& chain(std::uint32_t id) const;
  bool has_chain(std::uint32_t id) const { return chains_.count(id) > 0; }
  std::vector<std::uint32_t> chain_ids() const;

  std::uint64_t now() const { return now_ms_; }
  const GasSchedule& gas() const { return gas_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t sub_seed(const std::string& name) const;

  void add_actor(std::shared_ptr<Actor> actor);
  const std::vector<std::shared_ptr<Actor>>& actors() const { return actors_; }

  // Advance to the next due event (block production first, then actors).
  void step();
  // Run until the predicate holds (checked between steps). Returns false when
  // max_ms elapsed first.
  bool run_until(const std::function<bool()>& done, std::uint64_t max_ms);
  void run_for(std::uint64_t ms);

  // Genesis installation (scenario setup, before any block is produced).
  Address genesis_deploy_logic(std::uint32_t chain_id, const vm::Program& program,
                               const AccountId& deployer);
  Address genesis_deploy_state(std::uint32_t chain_id, const StateSpec& spec, Address logic_addr,
                               const AccountId& deployer);
  Address genesis_deploy_mono(std::uint32_t chain_id, const MonolithicSpec& spec,
                              const AccountId& deployer);
  void genesis_register_service(std::uint32_t chain_id, const std::string& service_id,
                                Address logic_addr, std::uint32_t origin_chain, Address origin_addr);
  void install_dapp(std::uint32_t chain_id, const DappDescriptor& dapp);

  // World knowledge the dApp provider compiled into descriptors: where each
  // service's state and original logic live.
  void add_service_info(const ServiceInfo& info);
  const ServiceInfo* find_service_info(const std::string& service_id) const;
  const std::map<std::string, ServiceInfo>& service_table() const { return service_table_; }

  // Cross-chain directory: how a bridging contract observes another chain's
  // canonical head (stands in for light-client header sync).
  std::uint64_t head_of(std::uint32_t chain_id) const;
  const Block& header_of(std::uint32_t chain_id, std::uint64_t height) const;

  // TxExecutor.
  void begin_block(Chain& chain, std::uint64_t height, std::uint64_t now_ms,
                   std::vector<Receipt>& receipts) override;
  Receipt execute(Chain& chain, const Transaction& tx, std::uint64_t now_ms) override;

  SimMetrics& metrics() { return metrics_; }
  const SimMetrics& metrics() const { return metrics_; }

  // Convenience: build, fund-check and submit a payload-carrying transaction.
  Digest submit(std::uint32_t chain_id, const AccountId& sender, Address target,
                const TxPayload& payload, std::uint64_t gas_limit);

 private:
  GasSchedule gas_;
  std::uint64_t seed_ = 0;
  std::uint64_t now_ms_ = 0;
  std::map<std::uint32_t, Chain> chains_;
  std::vector<std::shared_ptr<Actor>> actors_;
  std::map<std::string, ServiceInfo> service_table_;
  SimMetrics metrics_;
};

// Per-transaction execution context shared by the protocol handlers.
struct TxContext {
  Simulation& sim;
  Chain& chain;
  const Transaction& tx;
  Digest hash;
  std::uint64_t now_ms = 0;
  std::uint64_t height = 0;  // height of the block being produced
  std::vector<EventLog> logs;
  std::uint64_t gas_used = 0;
  Digest invocation_tag;  // attributes this tx's gas to an invocation

  void charge(std::uint64_t amount) {
    gas_used += amount;
    if (gas_used > tx.gas_limit) fail(ErrCode::InsufficientGas, "tx gas limit exceeded");
  }
  void emit(Address emitter, const std::string& topic, Bytes payload) {
    charge(sim.gas().event_cost(payload.size()));
    logs.push_back(EventLog{emitter, topic, std::move(payload)});
  }
};

}  // namespace ix
