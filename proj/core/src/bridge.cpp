#include <algorithm>

#include "ix/proto.hpp"

namespace ix::proto {

Digest derive_invocation_id(const Digest& user_tx_hash) {
  ByteWriter w;
  w.str("invocation");
  write_digest(w, user_tx_hash);
  return sha256(w.view());
}

Digest derive_job_id(const std::string& dapp_name, std::uint32_t execution_chain) {
  ByteWriter w;
  w.str("deploy-job");
  w.str(dapp_name);
  w.u32(execution_chain);
  return sha256(w.view());
}

const Bytes& getcode(const Chain& chain, const Address& addr) {
  const auto logic_it = chain.contracts().logic.find(addr);
  if (logic_it != chain.contracts().logic.end()) return logic_it->second.bytecode;
  const auto mono_it = chain.contracts().mono.find(addr);
  if (mono_it != chain.contracts().mono.end()) return mono_it->second.bytecode;
  fail(ErrCode::NotFound, "no bytecode at address");
}

Digest bytecode_hash_of(const Chain& chain, const Address& addr) {
  return sha256(getcode(chain, addr));
}

bool compare_bytes(const Chain& chain, const Address& local_addr, const Digest& foreign_hash) {
  return bytecode_hash_of(chain, local_addr) == foreign_hash;
}

void reg_server(TxContext& ctx, const Digest& job_id, const std::string& service_id,
                Address logic_addr, std::uint32_t origin_chain, Address origin_addr) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto job_it = bridge.clone_jobs.find(job_id);
  if (job_it == bridge.clone_jobs.end()) {
    fail(ErrCode::Unauthorized, "no open clone job for registration");
  }
  CloneJob& job = job_it->second;
  if (bridge.registry.count(service_id) > 0) fail(ErrCode::AlreadyRegistered, service_id);
  if (job.open_services.count(service_id) == 0) {
    fail(ErrCode::Unauthorized, "service not open for cloning");
  }
  if (job.banned_relayers.count(ctx.tx.sender) > 0) {
    fail(ErrCode::Unauthorized, "relayer banned after failed verification");
  }
  RegistryEntry entry;
  entry.logic_addr = logic_addr;
  entry.verified = false;
  entry.origin_chain = origin_chain;
  entry.origin_addr = origin_addr;
  entry.registrar = ctx.tx.sender;
  entry.registered_height = ctx.height;
  bridge.registry[service_id] = entry;
  job.open_services.erase(service_id);
  ctx.charge(ctx.sim.gas().storage_write);
}

Address handle_clone_deploy(TxContext& ctx, const PayloadCloneDeploy& p) {
  // Deploy and register in one transaction: if registration fails the whole
  // transaction reverts and no bytecode is stored.
  PayloadDeployLogic deploy{p.program};
  const Address addr = handle_deploy_logic(ctx, deploy);
  reg_server(ctx, p.job_id, p.service_id, addr, p.origin_chain, p.origin_addr);
  return addr;
}

namespace {

void record_state_request(TxContext& ctx, const Digest& invocation_id) {
  ctx.invocation_tag = invocation_id;
  InvMetrics& m = ctx.sim.metrics().invocations[invocation_id];
  m.transfer_rounds[ctx.chain.config().chain_id] += 1;
}

}  // namespace

void handle_inbound(TxContext& ctx, const PayloadInbound& p) {
  Simulation& sim = ctx.sim;
  const CrossChainMessage& msg = p.msg;
  BridgeState& bridge = ctx.chain.bridge();

  if (!sim.has_chain(msg.source_chain)) {
    ++sim.metrics().rejected_bad_proof;
    fail(ErrCode::BadProof, "unknown source chain");
  }
  const Chain& source = sim.chain(msg.source_chain);

  // Finality gate: the header must be this source chain's canonical block and
  // aged past the source's confirmation depth.
  if (msg.header.height > source.head_height()) {
    ++sim.metrics().rejected_not_finalized;
    fail(ErrCode::NotFinalized, "header beyond source head");
  }
  const Block& canonical = source.block_at(msg.header.height);
  if (block_hash(msg.header) != msg.header.hash || canonical.hash != msg.header.hash) {
    ++sim.metrics().rejected_bad_proof;
    fail(ErrCode::BadProof, "header is not canonical");
  }
  if (!source.is_finalized(msg.header.height)) {
    ++sim.metrics().rejected_not_finalized;
    fail(ErrCode::NotFinalized, "confirmation depth not reached");
  }

  // Receipt proof against the header's receipts root.
  const Bytes leaf = encode_receipt(msg.receipt);
  ctx.charge(sim.gas().proof_step * std::max<std::size_t>(1, msg.proof.siblings.size()));
  if (!merkle::verify(msg.header.receipts_root, leaf, msg.proof)) {
    ++sim.metrics().rejected_bad_proof;
    fail(ErrCode::BadProof, "receipt proof failed");
  }
  if (msg.event_index >= msg.receipt.logs.size()) {
    ++sim.metrics().rejected_bad_proof;
    fail(ErrCode::BadProof, "event index out of range");
  }

  // Dedup: identical messages from other relayers are silently acked.
  const Digest id = message_id(msg);
  if (bridge.seen.count(id) > 0) {
    ++bridge.duplicate_messages;
    ++bridge.relayer_ledgers[ctx.tx.sender].duplicates;
    return;
  }
  bridge.seen.insert(id);
  bridge.header_store[msg.source_chain][msg.header.height] = msg.header.hash;
  ++bridge.accepted_messages;
  RelayerLedger& ledger = bridge.relayer_ledgers[ctx.tx.sender];
  ++ledger.delivered;
  ledger.fees += kRelayFee;
  ctx.charge(sim.gas().storage_write);

  const EventLog& event = msg.receipt.logs[msg.event_index];
  if (!is_relayed_topic(event.topic)) fail(ErrCode::BadProof, "topic is not part of the protocol");

  if (event.topic == topic::kLockReq) {
    const LockReq req = decode_lock_req(event.payload);
    record_state_request(ctx, req.invocation_id);
    dispatch_lock(ctx, req);
  } else if (event.topic == topic::kLockResult) {
    const LockResult res = decode_lock_result(event.payload);
    ctx.invocation_tag = res.invocation_id;
    on_lock_result(ctx, res);
  } else if (event.topic == topic::kUpdateReq) {
    const UpdateReq req = decode_update_req(event.payload);
    ctx.invocation_tag = req.invocation_id;
    dispatch_update(ctx, req);
  } else if (event.topic == topic::kUpdateAck) {
    const UpdateAck ack = decode_update_ack(event.payload);
    ctx.invocation_tag = ack.invocation_id;
    on_update_ack(ctx, ack);
  } else if (event.topic == topic::kVerifyOut) {
    on_verify_out(ctx, decode_verify_out(event.payload));
  } else if (event.topic == topic::kVerifyResult) {
    on_verify_result(ctx, decode_verify_result(event.payload));
  } else if (event.topic == topic::kSegReq) {
    const SegReq req = decode_seg_req(event.payload);
    record_state_request(ctx, req.invocation_id);
    baseline_on_seg_req(ctx, req);
  } else if (event.topic == topic::kSegResult) {
    const SegResult res = decode_seg_result(event.payload);
    ctx.invocation_tag = res.invocation_id;
    baseline_on_seg_result(ctx, res);
  }
}

}  // namespace ix::proto
