#include <doctest.h>

#include "world.hpp"

using namespace ix;
using test::World;

namespace {

// Set up chains 1-3 with the hotel service on chain 3 and an open clone job on
// chain 1 so registrations are authorized.
struct BridgeWorld : World {
  Digest job;
  Address origin_logic;

  BridgeWorld() : World(5) {
    add_service(3, samples::hotel_contract());
    origin_logic = sim.find_service_info("hotel")->logic_addr;
    job = proto::derive_job_id("jobs", 1);
    sim.submit(1, "provider", sim.chain(1).bridge().address,
               PayloadRequestClone{job, 3, {{"hotel", origin_logic}}}, 500'000);
    step_block(1);
  }

  void step_block(std::uint32_t chain_id) {
    Chain& c = sim.chain(chain_id);
    c.produce_block(c.last_block_time() + c.config().block_time_ms, sim);
  }

  Digest clone_tx(const AccountId& relayer, const std::string& service, Bytes bytecode) {
    sim.chain(1).fund(relayer, test::kFund);
    return sim.submit(1, relayer, sim.chain(1).bridge().address,
                      PayloadCloneDeploy{job, service, vm::decode_program(bytecode), 3,
                                         origin_logic},
                      5'000'000);
  }

  Bytes hotel_bytecode() { return proto::getcode(sim.chain(3), origin_logic); }
};

}  // namespace

TEST_CASE("getcode returns exact deployed bytes and hashes agree across paths") {
  BridgeWorld w;
  const Bytes& code = proto::getcode(w.sim.chain(3), w.origin_logic);
  CHECK(code == vm::encode_program(lsd_transform(samples::hotel_contract()).logic));
  CHECK(proto::bytecode_hash_of(w.sim.chain(3), w.origin_logic) == sha256(code));
  CHECK(proto::compare_bytes(w.sim.chain(3), w.origin_logic, sha256(code)));
  CHECK_THROWS_AS(static_cast<void>(proto::getcode(w.sim.chain(3), Address{})), Error);
}

TEST_CASE("compare_bytes distinguishes faithful clones from tampered and unrelated code") {
  BridgeWorld w;
  Bytes tampered = w.hotel_bytecode();
  tampered.back() ^= 0x01;
  CHECK_FALSE(proto::compare_bytes(w.sim.chain(3), w.origin_logic, sha256(tampered)));
  const Bytes train = vm::encode_program(lsd_transform(samples::train_contract()).logic);
  CHECK_FALSE(proto::compare_bytes(w.sim.chain(3), w.origin_logic, sha256(train)));
}

TEST_CASE("registration: first write wins, the losing clone transaction reverts atomically") {
  BridgeWorld w;
  const Digest tx1 = w.clone_tx("r-a", "hotel", w.hotel_bytecode());
  const Digest tx2 = w.clone_tx("r-b", "hotel", w.hotel_bytecode());
  w.step_block(1);

  const Receipt* rc1 = w.sim.chain(1).find_receipt(tx1);
  const Receipt* rc2 = w.sim.chain(1).find_receipt(tx2);
  REQUIRE(rc1 != nullptr);
  REQUIRE(rc2 != nullptr);
  CHECK(rc1->status == TxStatus::Success);
  CHECK(rc2->status == TxStatus::Reverted);
  CHECK(rc2->revert_reason == ErrCode::AlreadyRegistered);
  CHECK(rc2->gas_used > 0);  // the failed attempt still pays

  const BridgeState& bridge = w.sim.chain(1).bridge();
  REQUIRE(bridge.registry.count("hotel") == 1);
  CHECK(bridge.registry.at("hotel").registrar == "r-a");
  CHECK_FALSE(bridge.registry.at("hotel").verified);
  // Only one bytecode stored: the loser's deployment rolled back with the tx.
  CHECK(w.sim.chain(1).contracts().logic.size() == 1);
}

TEST_CASE("registrations of two distinct ids both succeed") {
  BridgeWorld w;
  w.add_service(2, samples::train_contract());
  const Address train_logic = w.sim.find_service_info("train")->logic_addr;
  w.sim.submit(1, "provider", w.sim.chain(1).bridge().address,
               PayloadRequestClone{w.job, 2, {{"train", train_logic}}}, 500'000);
  w.step_block(1);
  w.clone_tx("r-a", "hotel", w.hotel_bytecode());
  w.clone_tx("r-a", "train", proto::getcode(w.sim.chain(2), train_logic));
  w.step_block(1);
  CHECK(w.sim.chain(1).bridge().registry.count("hotel") == 1);
  CHECK(w.sim.chain(1).bridge().registry.count("train") == 1);
}

TEST_CASE("an empty clone request is rejected at the precondition") {
  BridgeWorld w;
  const Digest tx = w.sim.submit(1, "provider", w.sim.chain(1).bridge().address,
                                 PayloadRequestClone{w.job, 3, {}}, 500'000);
  w.step_block(1);
  const Receipt* rc = w.sim.chain(1).find_receipt(tx);
  REQUIRE(rc != nullptr);
  CHECK(rc->status == TxStatus::Reverted);
}

TEST_CASE("inbound acceptance: finality gate, proof check, dedup") {
  BridgeWorld w;
  // Produce an event on chain 3 worth relaying: a lock request arriving from
  // chain 1 would do, but a hand-built event is enough for gating tests; use
  // a real LOCK_RESULT emitted through a lock dispatch.
  // Simpler: craft a CLONE_REQ-style verify round-trip via VERIFY_OUT.
  w.clone_tx("r-a", "hotel", w.hotel_bytecode());
  w.step_block(1);
  w.sim.submit(1, "provider", w.sim.chain(1).bridge().address,
               PayloadRequestVerification{w.job, "hotel"}, 500'000);
  w.step_block(1);  // block 3 holds VERIFY_OUT

  const Chain& exec = w.sim.chain(1);
  Digest verify_tx;
  for (const Receipt& rc : exec.receipts_at(exec.head_height())) {
    for (const EventLog& e : rc.logs) {
      if (e.topic == topic::kVerifyOut) verify_tx = rc.tx_hash;
    }
  }
  REQUIRE(verify_tx != Digest{});
  const ProofBundle bundle = exec.get_receipt_proof(verify_tx);
  CrossChainMessage msg;
  msg.source_chain = 1;
  msg.header = bundle.header;
  msg.receipt = bundle.receipt;
  msg.proof = bundle.proof;
  msg.event_index = 0;
  msg.relayer = "tester";
  w.sim.chain(3).fund("carrier", test::kFund);

  SUBCASE("rejected while the header is not yet finalized") {
    const Digest tx = w.sim.submit(3, "carrier", w.sim.chain(3).bridge().address,
                                   PayloadInbound{msg}, 5'000'000);
    w.step_block(3);
    const Receipt* rc = w.sim.chain(3).find_receipt(tx);
    CHECK(rc->status == TxStatus::Reverted);
    CHECK(rc->revert_reason == ErrCode::NotFinalized);
  }
  SUBCASE("accepted exactly once after finality; replays are silently acked") {
    w.step_block(1);  // finalize the verify block
    const Digest tx = w.sim.submit(3, "carrier", w.sim.chain(3).bridge().address,
                                   PayloadInbound{msg}, 5'000'000);
    w.step_block(3);
    CHECK(w.sim.chain(3).find_receipt(tx)->status == TxStatus::Success);
    CHECK(w.sim.chain(3).bridge().accepted_messages == 1);
    // VERIFY_RESULT dispatched exactly once.
    std::uint32_t results = 0;
    for (const Receipt& rc : w.sim.chain(3).receipts_at(w.sim.chain(3).head_height())) {
      for (const EventLog& e : rc.logs) {
        if (e.topic == topic::kVerifyResult) ++results;
      }
    }
    CHECK(results == 1);

    // Three replays from other relayers: one dispatch total.
    for (int i = 0; i < 3; ++i) {
      CrossChainMessage copy = msg;
      copy.relayer = "copy" + std::to_string(i);
      w.sim.chain(3).fund(copy.relayer, test::kFund);
      const Digest dup = w.sim.submit(3, copy.relayer, w.sim.chain(3).bridge().address,
                                      PayloadInbound{copy}, 5'000'000);
      w.step_block(3);
      CHECK(w.sim.chain(3).find_receipt(dup)->status == TxStatus::Success);
    }
    CHECK(w.sim.chain(3).bridge().accepted_messages == 1);
    CHECK(w.sim.chain(3).bridge().duplicate_messages == 3);
  }
  SUBCASE("a tampered payload byte is a permanent proof failure") {
    w.step_block(1);
    CrossChainMessage bad = msg;
    bad.receipt.logs[0].payload[0] ^= 0x01;
    const Digest tx = w.sim.submit(3, "carrier", w.sim.chain(3).bridge().address,
                                   PayloadInbound{bad}, 5'000'000);
    w.step_block(3);
    const Receipt* rc = w.sim.chain(3).find_receipt(tx);
    CHECK(rc->status == TxStatus::Reverted);
    CHECK(rc->revert_reason == ErrCode::BadProof);
    CHECK(w.sim.metrics().rejected_bad_proof == 1);
  }
  SUBCASE("a non-canonical header is a proof failure") {
    w.step_block(1);
    CrossChainMessage bad = msg;
    bad.header.receipts_root.bytes[0] ^= 0x01;
    bad.header.hash = block_hash(bad.header);
    const Digest tx = w.sim.submit(3, "carrier", w.sim.chain(3).bridge().address,
                                   PayloadInbound{bad}, 5'000'000);
    w.step_block(3);
    CHECK(w.sim.chain(3).find_receipt(tx)->revert_reason == ErrCode::BadProof);
  }
}

TEST_CASE("batch lock dispatch is atomic per chain") {
  // Two state contracts on chain 2; the second ask fails, so the first's
  // fresh lock must be released before the failure event is emitted.
  World w;
  w.add_honest_relayers(1);
  w.add_service(2, samples::step_contract("alpha", 2, 10));
  w.add_service(2, samples::step_contract("beta", 2, 10));

  Chain& invoked = w.sim.chain(2);
  const Address alpha = w.sim.find_service_info("alpha")->state_addr;
  const Address beta = w.sim.find_service_info("beta")->state_addr;

  // Pre-block beta with a whole lock from another invocation.
  LockAsk hostage;
  hostage.slot = "avail";
  hostage.bag_key = kWholeBagKey;
  hostage.whole = true;
  invoked.contracts().state.at(beta).lock_state(invoked.bridge().address, {hostage},
                                                sha256(Bytes{1}), 10'000, invoked.finality());

  LockReq req;
  req.invocation_id = sha256(Bytes{2});
  req.dest_chain = 2;
  req.execution_chain = 1;
  req.expiry_time_ms = 600'000;
  LockAsk a;
  a.slot = "avail";
  a.bag_key = "n1";
  a.amount = 3;
  LockAsk b = a;
  b.bag_key = "n2";
  b.whole = true;
  b.amount = 0;
  req.subs = {{alpha, {a}}, {beta, {b}}};

  // Drive the dispatch through a real inbound transaction from chain 1.
  Chain& exec = w.sim.chain(1);
  Receipt carrier;
  carrier.tx_hash = sha256(Bytes{7});
  carrier.status = TxStatus::Success;
  carrier.logs = {EventLog{exec.bridge().address, topic::kLockReq, encode_lock_req(req)}};
  // Synthesize the event on-chain by emitting through a request-clone tx is
  // roundabout; instead call the dispatcher directly in a transaction context.
  Transaction fake;
  fake.sender = "system";
  fake.gas_limit = UINT64_MAX;
  TxContext ctx{w.sim, invoked, fake, sha256(Bytes{8}), invoked.last_block_time() + 5000,
                invoked.head_height() + 1};
  proto::dispatch_lock(ctx, req);

  REQUIRE(ctx.logs.size() == 1);
  const LockResult result = decode_lock_result(ctx.logs[0].payload);
  CHECK_FALSE(result.ok);
  CHECK(result.reason == ErrCode::AlreadyLocked);
  // Alpha's fresh lock was rolled back with the batch.
  CHECK(invoked.contracts().state.at(alpha).lockpool().count(req.invocation_id) == 0);
  CHECK(invoked.contracts().state.at(alpha).available("avail", invoked.finality()) == 10);

  SUBCASE("the happy path returns one result event carrying both snapshots") {
    invoked.contracts().state.at(beta).update_state(invoked.bridge().address, sha256(Bytes{1}),
                                                    false, {}, invoked.finality());
    TxContext ctx2{w.sim, invoked, fake, sha256(Bytes{9}), invoked.last_block_time() + 5000,
                   invoked.head_height() + 1};
    proto::dispatch_lock(ctx2, req);
    REQUIRE(ctx2.logs.size() == 1);
    const LockResult ok = decode_lock_result(ctx2.logs[0].payload);
    CHECK(ok.ok);
    CHECK(ok.snapshot.size() == 2);
  }
}

TEST_CASE("update dispatch with outcome abort leaves values untouched and acks") {
  World w;
  w.add_service(2, samples::step_contract("gamma", 2, 10));
  Chain& invoked = w.sim.chain(2);
  const Address gamma = w.sim.find_service_info("gamma")->state_addr;
  const Digest inv = sha256(Bytes{3});

  LockAsk ask;
  ask.slot = "avail";
  ask.bag_key = "n1";
  ask.amount = 4;
  invoked.contracts().state.at(gamma).lock_state(invoked.bridge().address, {ask}, inv, 10'000,
                                                 invoked.finality());
  invoked.bridge().locked_states[inv].push_back(gamma);

  UpdateReq req;
  req.invocation_id = inv;
  req.dest_chain = 2;
  req.execution_chain = 1;
  req.commit = false;
  req.subs = {{gamma, {}}};
  Transaction fake;
  fake.sender = "system";
  fake.gas_limit = UINT64_MAX;
  TxContext ctx{w.sim, invoked, fake, sha256(Bytes{4}), invoked.last_block_time() + 5000,
                invoked.head_height() + 1};
  proto::dispatch_update(ctx, req);

  CHECK(invoked.contracts().state.at(gamma).slot("avail").uint_value == 10);
  CHECK(invoked.contracts().state.at(gamma).lockpool().count(inv) == 0);
  REQUIRE(ctx.logs.size() == 1);
  const UpdateAck ack = decode_update_ack(ctx.logs[0].payload);
  CHECK(ack.invocation_id == inv);
  CHECK_FALSE(ack.applied_commit);
}

TEST_CASE("forged header/receipt/proof triples are never accepted") {
  BridgeWorld w;
  w.sim.chain(2).fund("forger", test::kFund);
  std::mt19937_64 rng(99);
  auto rand_bytes = [&](std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
  };
  for (int i = 0; i < 64; ++i) {
    CrossChainMessage msg;
    msg.source_chain = static_cast<std::uint32_t>(1 + rng() % 3);
    msg.header.height = rng() % 4;
    msg.header.receipts_root = sha256(rand_bytes(8));
    msg.header.hash = block_hash(msg.header);
    msg.receipt.tx_hash = sha256(rand_bytes(8));
    msg.receipt.logs.push_back(
        EventLog{Address{}, topic::kLockResult, rand_bytes(4)});
    msg.proof.leaf_index = 0;
    msg.proof.declared_root = msg.header.receipts_root;
    msg.event_index = 0;
    const Digest tx = w.sim.submit(2, "forger", w.sim.chain(2).bridge().address,
                                   PayloadInbound{msg}, 5'000'000);
    w.step_block(2);
    const Receipt* rc = w.sim.chain(2).find_receipt(tx);
    REQUIRE(rc != nullptr);
    CHECK(rc->status == TxStatus::Reverted);
  }
  CHECK(w.sim.chain(2).bridge().accepted_messages == 0);
}
