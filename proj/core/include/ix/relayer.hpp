#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <set>
#include <string>

#include "ix/sim.hpp"

namespace ix {

enum class RelayerBehavior : std::uint8_t {
  Honest = 0,
  Drop = 1,            // skips each delivery with probability p (retried next poll)
  Tamper = 2,          // flips a byte somewhere in the copy with probability p
  PrematureClone = 3,  // deploys a configured service once without any event, then honest
};

struct RelayerConfig {
  std::string relayer_id;
  RelayerBehavior behavior = RelayerBehavior::Honest;
  double p = 0.0;
  std::uint64_t poll_interval_ms = 0;  // 0 = half the minimum block time
  std::uint64_t poll_offset_ms = 0;
  std::string premature_service;       // PrematureClone: which service to deploy eagerly
  std::uint32_t premature_target_chain = 0;
  std::uint64_t gas_limit = 5'000'000;
};

// Off-chain agent: polls finalized events on every chain, assembles
// header+receipt+proof messages, relays them to their destination bridges, and
// races clone deployments. Faulty behaviors are seeded from the scenario so
// runs replay exactly.
class Relayer : public Actor {
 public:
  Relayer(RelayerConfig config, Simulation& sim);

  void wake(Simulation& sim) override;

  const RelayerConfig& config() const { return config_; }

 private:
  struct PendingRelay {
    std::uint32_t source_chain = 0;
    Digest tx;
    std::uint32_t event_index = 0;
    std::uint32_t dest_chain = 0;
  };
  struct PendingClone {
    std::uint32_t origin_chain = 0;
    std::uint32_t execution_chain = 0;
    Digest job_id;
    std::string service_id;
    Address origin_addr;
  };

  void scan_chain(Simulation& sim, Chain& chain);
  void process_relays(Simulation& sim);
  void process_clones(Simulation& sim);
  void do_premature_clone(Simulation& sim);
  double draw();
  bool should_drop();

  RelayerConfig config_;
  std::mt19937_64 rng_;
  std::map<std::uint32_t, std::uint64_t> scan_cursor_;  // next height to scan per chain
  std::set<Digest> handled_;                            // message ids delivered (or given up)
  std::deque<PendingRelay> pending_;
  std::set<std::string> clone_keys_done_;
  std::deque<PendingClone> clones_;
  bool premature_done_ = false;
};

}  // namespace ix
