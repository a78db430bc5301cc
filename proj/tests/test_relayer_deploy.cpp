#include <doctest.h>

#include "world.hpp"

using namespace ix;
using test::World;

namespace {

RelayerConfig relayer(const std::string& id, RelayerBehavior behavior, double p = 0.0,
                      std::uint64_t offset = 0) {
  RelayerConfig cfg;
  cfg.relayer_id = id;
  cfg.behavior = behavior;
  cfg.p = p;
  cfg.poll_offset_ms = offset;
  return cfg;
}

}  // namespace

TEST_CASE("one honest relayer among three total droppers still delivers exactly once") {
  World w;
  w.add_relayers({relayer("honest", RelayerBehavior::Honest, 0, 300),
                  relayer("d1", RelayerBehavior::Drop, 1.0, 0),
                  relayer("d2", RelayerBehavior::Drop, 1.0, 100),
                  relayer("d3", RelayerBehavior::Drop, 1.0, 200)});
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
  const Digest id =
      w.invoke("train-hotel", {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}});
  REQUIRE(w.run_to_terminal(id));
  CHECK(w.find_invocation(id)->status == InvStatus::Committed);

  // Every accepted message was delivered by the honest relayer, exactly once.
  for (std::uint32_t c = 1; c <= 3; ++c) {
    const BridgeState& bridge = w.sim.chain(c).bridge();
    for (const auto& [who, ledger] : bridge.relayer_ledgers) {
      if (ledger.delivered > 0) CHECK(who == "honest");
    }
    CHECK(bridge.duplicate_messages == 0);
  }
}

TEST_CASE("tampered copies are rejected while the honest copy is accepted") {
  World w;
  w.add_relayers({relayer("evil", RelayerBehavior::Tamper, 1.0, 0),
                  relayer("honest", RelayerBehavior::Honest, 0, 1200)});
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
  const Digest id =
      w.invoke("train-hotel", {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}});
  REQUIRE(w.run_to_terminal(id, 6'000'000));
  CHECK(w.find_invocation(id)->status == InvStatus::Committed);
  CHECK(w.sim.metrics().relay_tampers > 0);
  CHECK(w.sim.metrics().rejected_bad_proof > 0);

  // Audit every submission against its receipt: tampered inbound copies never
  // dispatched; honest ones were never rejected for proof reasons.
  for (const RelaySubmission& sub : w.sim.metrics().submissions) {
    if (sub.clone) continue;
    const Receipt* rc = w.sim.chain(sub.dest_chain).find_receipt(sub.tx_hash);
    if (rc == nullptr) continue;
    if (sub.tampered) {
      CHECK(rc->status == TxStatus::Reverted);
    } else if (sub.relayer == "honest") {
      CHECK(rc->revert_reason != ErrCode::BadProof);
    }
  }
}

TEST_CASE("events are relayed only after the source reaches its confirmation depth") {
  World w(3, 5000, /*confirmation depth=*/2);
  w.add_honest_relayers(1);
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
  const Digest id =
      w.invoke("train-hotel", {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}});
  REQUIRE(w.run_to_terminal(id, 6'000'000));
  CHECK(w.find_invocation(id)->status == InvStatus::Committed);
  // The depth gate held for every accepted message (acceptance re-checks it).
  CHECK(w.sim.metrics().rejected_not_finalized == 0);
}

TEST_CASE("clone race: four honest relayers, one success, rest revert, registry single") {
  World w;
  w.add_relayers({relayer("r0", RelayerBehavior::Honest, 0, 0),
                  relayer("r1", RelayerBehavior::Honest, 0, 0),
                  relayer("r2", RelayerBehavior::Honest, 0, 0),
                  relayer("r3", RelayerBehavior::Honest, 0, 0)});
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));

  const BridgeState& bridge = w.sim.chain(1).bridge();
  REQUIRE(bridge.registry.count("hotel") == 1);
  REQUIRE(bridge.registry.count("train") == 1);
  CHECK(bridge.registry.at("hotel").verified);
  CHECK(bridge.registry.at("train").verified);

  // With identical offsets all four submitted in the same block: one success
  // per service, three reverts each.
  std::uint32_t clone_success = 0, clone_reverts = 0;
  for (const RelaySubmission& sub : w.sim.metrics().submissions) {
    if (!sub.clone) continue;
    const Receipt* rc = w.sim.chain(sub.dest_chain).find_receipt(sub.tx_hash);
    if (rc == nullptr) continue;
    if (rc->status == TxStatus::Success) {
      ++clone_success;
    } else {
      ++clone_reverts;
      CHECK(rc->revert_reason == ErrCode::AlreadyRegistered);
      CHECK(rc->gas_used > 0);  // losers pay for the failed attempt
    }
  }
  CHECK(clone_success == 2);  // one per service
  CHECK(clone_reverts == 6);

  // Winners earned a verification reward.
  std::int64_t rewards = 0;
  for (const auto& [who, ledger] : bridge.relayer_ledgers) rewards += ledger.rewards;
  CHECK(rewards == 2);
}

TEST_CASE("premature clone: deployed bytecode exists but stays unregistered and unpaid") {
  World w;
  RelayerConfig eager = relayer("eager", RelayerBehavior::PrematureClone);
  eager.premature_service = "hotel";
  eager.premature_target_chain = 1;
  w.add_relayers({eager, relayer("honest", RelayerBehavior::Honest, 0, 700)});
  w.setup_train_hotel();

  const std::uint64_t balance0 = w.sim.chain(1).account("eager").balance;
  w.sim.run_for(30'000);
  // The eager deploy happened with no event: bytecode exists, registry empty.
  CHECK(w.sim.chain(1).contracts().logic.size() >= 1);
  CHECK(w.sim.chain(1).bridge().registry.count("hotel") == 0);
  CHECK(w.sim.chain(1).account("eager").balance < balance0);  // gas borne, no reimbursement
  std::int64_t rewards = 0;
  for (const auto& [who, ledger] : w.sim.chain(1).bridge().relayer_ledgers) {
    rewards += ledger.rewards;
  }
  CHECK(rewards == 0);

  // The real deployment still proceeds normally afterwards.
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
  CHECK(w.sim.chain(1).bridge().registry.at("hotel").verified);
}

TEST_CASE("a registration without any open clone job reverts the whole transaction") {
  World w;
  w.setup_train_hotel();
  w.sim.chain(1).fund("rogue", test::kFund);
  const std::size_t logic_before = w.sim.chain(1).contracts().logic.size();
  const ServiceInfo* info = w.sim.find_service_info("hotel");
  const Bytes code = proto::getcode(w.sim.chain(3), info->logic_addr);
  const Digest tx = w.sim.submit(
      1, "rogue", w.sim.chain(1).bridge().address,
      PayloadCloneDeploy{sha256(Bytes{1}), "hotel", vm::decode_program(code), 3, info->logic_addr},
      5'000'000);
  w.sim.chain(1).produce_block(5000, w.sim);
  const Receipt* rc = w.sim.chain(1).find_receipt(tx);
  REQUIRE(rc != nullptr);
  CHECK(rc->status == TxStatus::Reverted);
  CHECK(rc->revert_reason == ErrCode::Unauthorized);
  // The deployment rolled back with the registration.
  CHECK(w.sim.chain(1).contracts().logic.size() == logic_before);
}

TEST_CASE("tampering clone winner fails verification, is penalized and banned; restart succeeds") {
  World w;
  // The tamperer polls first so it reliably wins the first race.
  w.add_relayers({relayer("evil", RelayerBehavior::Tamper, 1.0, 0),
                  relayer("honest", RelayerBehavior::Honest, 0, 900)});
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3), 6'000'000));

  const BridgeState& bridge = w.sim.chain(1).bridge();
  REQUIRE(bridge.registry.count("hotel") == 1);
  CHECK(bridge.registry.at("hotel").verified);
  CHECK(bridge.registry.at("hotel").registrar == "honest");

  // Verified clones always match the origin bytecode.
  for (const auto& [service, entry] : bridge.registry) {
    const Bytes& local = proto::getcode(w.sim.chain(1), entry.logic_addr);
    CHECK(proto::compare_bytes(w.sim.chain(entry.origin_chain), entry.origin_addr, sha256(local)));
  }

  // The tamperer took penalties and sits on the banned list.
  std::int64_t penalties = 0;
  for (const auto& [who, ledger] : bridge.relayer_ledgers) {
    if (who == "evil") penalties = ledger.penalties;
  }
  CHECK(penalties > 0);
  const DeploymentJob& job = w.provider->jobs().front();
  CHECK(job.phase == DeployPhase::Verified);
  CHECK(job.restart_count > 0);
}

TEST_CASE("liveness: one honest relayer among four across seeds") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    World w(seed);
    w.add_relayers({relayer("honest", RelayerBehavior::Honest, 0, 600),
                    relayer("d1", RelayerBehavior::Drop, 1.0, 0),
                    relayer("t1", RelayerBehavior::Tamper, 1.0, 100),
                    relayer("d2", RelayerBehavior::Drop, 1.0, 200)});
    w.setup_train_hotel();
    REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3), 6'000'000));
    const Digest id =
        w.invoke("train-hotel", {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}});
    REQUIRE(w.run_to_terminal(id, 6'000'000));
    CHECK(w.find_invocation(id)->status == InvStatus::Committed);
    CHECK(audit_simulation(w.sim).ok);
  }
}

TEST_CASE("fee flow: credited fees equal accepted messages times the flat fee") {
  World w;
  w.add_honest_relayers(3);
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
  const Digest id =
      w.invoke("train-hotel", {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}});
  REQUIRE(w.run_to_terminal(id));
  w.sim.run_for(30'000);
  for (std::uint32_t c = 1; c <= 3; ++c) {
    const BridgeState& bridge = w.sim.chain(c).bridge();
    std::uint64_t fees = 0;
    for (const auto& [who, ledger] : bridge.relayer_ledgers) fees += ledger.fees;
    CHECK(fees == bridge.accepted_messages * kRelayFee);
  }
}

TEST_CASE("deployment job transcript carries the phase timeline") {
  World w;
  w.add_honest_relayers(2);
  w.setup_train_hotel();
  REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
  const DeploymentJob& job = w.provider->jobs().front();
  CHECK(job.phase == DeployPhase::Verified);
  REQUIRE(job.phase_times.count("clone_requested") == 1);
  REQUIRE(job.phase_times.count("registered") == 1);
  REQUIRE(job.phase_times.count("verified") == 1);
  CHECK(job.phase_times.at("clone_requested") <= job.phase_times.at("registered"));
  CHECK(job.phase_times.at("registered") <= job.phase_times.at("verified"));
}
