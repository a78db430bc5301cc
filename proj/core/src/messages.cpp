#include "ix/messages.hpp"

namespace ix {

bool is_relayed_topic(const std::string& t) {
  return t == topic::kVerifyOut || t == topic::kVerifyResult || t == topic::kLockReq ||
         t == topic::kLockResult || t == topic::kUpdateReq || t == topic::kUpdateAck ||
         t == topic::kSegReq || t == topic::kSegResult;
}

// --- shared sub-encoders -------------------------------------------------------

namespace {

void write_lock_ask(ByteWriter& w, const LockAsk& ask) {
  w.str(ask.slot);
  w.str(ask.bag_key);
  w.boolean(ask.whole);
  w.boolean(ask.read);
  w.boolean(ask.dynamic);
  w.u64(ask.amount);
  w.u32(static_cast<std::uint32_t>(ask.map_keys.size()));
  for (const auto& k : ask.map_keys) w.str(k);
}

LockAsk read_lock_ask(ByteReader& r) {
  LockAsk ask;
  ask.slot = r.str();
  ask.bag_key = r.str();
  ask.whole = r.boolean();
  ask.read = r.boolean();
  ask.dynamic = r.boolean();
  ask.amount = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) ask.map_keys.push_back(r.str());
  return ask;
}

void write_snap_entry(ByteWriter& w, const SnapEntry& e) {
  w.str(e.slot);
  w.str(e.bag_key);
  w.u8(static_cast<std::uint8_t>(e.kind));
  w.str(e.map_key);
  w.u64(e.value);
}

SnapEntry read_snap_entry(ByteReader& r) {
  SnapEntry e;
  e.slot = r.str();
  e.bag_key = r.str();
  e.kind = static_cast<SnapKind>(r.u8());
  e.map_key = r.str();
  e.value = r.u64();
  return e;
}

void write_update_subs(ByteWriter& w, const std::vector<UpdateSub>& subs) {
  w.u32(static_cast<std::uint32_t>(subs.size()));
  for (const UpdateSub& sub : subs) {
    write_address(w, sub.state_addr);
    w.u32(static_cast<std::uint32_t>(sub.values.size()));
    for (const UpdateVal& v : sub.values) write_snap_entry(w, v);
  }
}

std::vector<UpdateSub> read_update_subs(ByteReader& r) {
  std::vector<UpdateSub> subs;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    UpdateSub sub;
    sub.state_addr = read_address(r);
    const std::uint32_t m = r.u32();
    for (std::uint32_t j = 0; j < m; ++j) sub.values.push_back(read_snap_entry(r));
    subs.push_back(std::move(sub));
  }
  return subs;
}

void write_clone_entries(ByteWriter& w, const std::vector<CloneEntry>& entries) {
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const CloneEntry& e : entries) {
    w.str(e.service_id);
    write_address(w, e.origin_addr);
  }
}

std::vector<CloneEntry> read_clone_entries(ByteReader& r) {
  std::vector<CloneEntry> entries;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    CloneEntry e;
    e.service_id = r.str();
    e.origin_addr = read_address(r);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

// --- event payload codecs --------------------------------------------------------

Bytes encode_clone_req(const CloneReq& m) {
  ByteWriter w;
  write_digest(w, m.job_id);
  w.u32(m.invoked_chain);
  w.u32(m.execution_chain);
  write_clone_entries(w, m.entries);
  return w.take();
}

CloneReq decode_clone_req(ByteView data) {
  ByteReader r(data);
  CloneReq m;
  m.job_id = read_digest(r);
  m.invoked_chain = r.u32();
  m.execution_chain = r.u32();
  m.entries = read_clone_entries(r);
  r.expect_done();
  return m;
}

Bytes encode_verify_out(const VerifyOut& m) {
  ByteWriter w;
  write_digest(w, m.job_id);
  w.str(m.service_id);
  w.u32(m.origin_chain);
  write_address(w, m.origin_addr);
  write_digest(w, m.clone_hash);
  w.u32(m.execution_chain);
  return w.take();
}

VerifyOut decode_verify_out(ByteView data) {
  ByteReader r(data);
  VerifyOut m;
  m.job_id = read_digest(r);
  m.service_id = r.str();
  m.origin_chain = r.u32();
  m.origin_addr = read_address(r);
  m.clone_hash = read_digest(r);
  m.execution_chain = r.u32();
  r.expect_done();
  return m;
}

Bytes encode_verify_result(const VerifyResult& m) {
  ByteWriter w;
  write_digest(w, m.job_id);
  w.str(m.service_id);
  w.boolean(m.match);
  w.u32(m.execution_chain);
  return w.take();
}

VerifyResult decode_verify_result(ByteView data) {
  ByteReader r(data);
  VerifyResult m;
  m.job_id = read_digest(r);
  m.service_id = r.str();
  m.match = r.boolean();
  m.execution_chain = r.u32();
  r.expect_done();
  return m;
}

Bytes encode_lock_req(const LockReq& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.u32(m.dest_chain);
  w.u32(m.execution_chain);
  w.u64(m.expiry_time_ms);
  w.u32(static_cast<std::uint32_t>(m.subs.size()));
  for (const LockSub& sub : m.subs) {
    write_address(w, sub.state_addr);
    w.u32(static_cast<std::uint32_t>(sub.asks.size()));
    for (const LockAsk& ask : sub.asks) write_lock_ask(w, ask);
  }
  return w.take();
}

LockReq decode_lock_req(ByteView data) {
  ByteReader r(data);
  LockReq m;
  m.invocation_id = read_digest(r);
  m.dest_chain = r.u32();
  m.execution_chain = r.u32();
  m.expiry_time_ms = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    LockSub sub;
    sub.state_addr = read_address(r);
    const std::uint32_t k = r.u32();
    for (std::uint32_t j = 0; j < k; ++j) sub.asks.push_back(read_lock_ask(r));
    m.subs.push_back(std::move(sub));
  }
  r.expect_done();
  return m;
}

Bytes encode_lock_result(const LockResult& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.u32(m.chain_id);
  w.u32(m.execution_chain);
  w.boolean(m.ok);
  w.u16(static_cast<std::uint16_t>(m.reason));
  w.u32(static_cast<std::uint32_t>(m.snapshot.size()));
  for (const SnapSub& sub : m.snapshot) {
    write_address(w, sub.state_addr);
    w.u32(static_cast<std::uint32_t>(sub.entries.size()));
    for (const SnapEntry& e : sub.entries) write_snap_entry(w, e);
  }
  return w.take();
}

LockResult decode_lock_result(ByteView data) {
  ByteReader r(data);
  LockResult m;
  m.invocation_id = read_digest(r);
  m.chain_id = r.u32();
  m.execution_chain = r.u32();
  m.ok = r.boolean();
  m.reason = static_cast<ErrCode>(r.u16());
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    SnapSub sub;
    sub.state_addr = read_address(r);
    const std::uint32_t k = r.u32();
    for (std::uint32_t j = 0; j < k; ++j) sub.entries.push_back(read_snap_entry(r));
    m.snapshot.push_back(std::move(sub));
  }
  r.expect_done();
  return m;
}

Bytes encode_update_req(const UpdateReq& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.u32(m.dest_chain);
  w.u32(m.execution_chain);
  w.boolean(m.commit);
  write_update_subs(w, m.subs);
  return w.take();
}

UpdateReq decode_update_req(ByteView data) {
  ByteReader r(data);
  UpdateReq m;
  m.invocation_id = read_digest(r);
  m.dest_chain = r.u32();
  m.execution_chain = r.u32();
  m.commit = r.boolean();
  m.subs = read_update_subs(r);
  r.expect_done();
  return m;
}

Bytes encode_update_ack(const UpdateAck& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.u32(m.chain_id);
  w.u32(m.execution_chain);
  w.boolean(m.applied_commit);
  return w.take();
}

UpdateAck decode_update_ack(ByteView data) {
  ByteReader r(data);
  UpdateAck m;
  m.invocation_id = read_digest(r);
  m.chain_id = r.u32();
  m.execution_chain = r.u32();
  m.applied_commit = r.boolean();
  r.expect_done();
  return m;
}

Bytes encode_seg_req(const SegReq& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.u32(m.dest_chain);
  w.u32(m.execution_chain);
  w.str(m.node_id);
  w.str(m.service_id);
  w.str(m.entry);
  w.str_u64_map(m.args);
  w.u64(m.expiry_time_ms);
  return w.take();
}

SegReq decode_seg_req(ByteView data) {
  ByteReader r(data);
  SegReq m;
  m.invocation_id = read_digest(r);
  m.dest_chain = r.u32();
  m.execution_chain = r.u32();
  m.node_id = r.str();
  m.service_id = r.str();
  m.entry = r.str();
  m.args = r.str_u64_map();
  m.expiry_time_ms = r.u64();
  r.expect_done();
  return m;
}

Bytes encode_seg_result(const SegResult& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.u32(m.chain_id);
  w.u32(m.execution_chain);
  w.str(m.node_id);
  w.boolean(m.ok);
  w.u16(static_cast<std::uint16_t>(m.reason));
  w.str_u64_map(m.outputs);
  write_update_subs(w, m.writes);
  return w.take();
}

SegResult decode_seg_result(ByteView data) {
  ByteReader r(data);
  SegResult m;
  m.invocation_id = read_digest(r);
  m.chain_id = r.u32();
  m.execution_chain = r.u32();
  m.node_id = r.str();
  m.ok = r.boolean();
  m.reason = static_cast<ErrCode>(r.u16());
  m.outputs = r.str_u64_map();
  m.writes = read_update_subs(r);
  r.expect_done();
  return m;
}

Bytes encode_invoke_done(const InvokeDone& m) {
  ByteWriter w;
  write_digest(w, m.invocation_id);
  w.boolean(m.committed);
  w.u16(static_cast<std::uint16_t>(m.reason));
  return w.take();
}

InvokeDone decode_invoke_done(ByteView data) {
  ByteReader r(data);
  InvokeDone m;
  m.invocation_id = read_digest(r);
  m.committed = r.boolean();
  m.reason = static_cast<ErrCode>(r.u16());
  r.expect_done();
  return m;
}

std::uint32_t event_destination(const EventLog& event) {
  const std::string& t = event.topic;
  if (t == topic::kLockReq) return decode_lock_req(event.payload).dest_chain;
  if (t == topic::kLockResult) return decode_lock_result(event.payload).execution_chain;
  if (t == topic::kUpdateReq) return decode_update_req(event.payload).dest_chain;
  if (t == topic::kUpdateAck) return decode_update_ack(event.payload).execution_chain;
  if (t == topic::kVerifyOut) return decode_verify_out(event.payload).origin_chain;
  if (t == topic::kVerifyResult) return decode_verify_result(event.payload).execution_chain;
  if (t == topic::kSegReq) return decode_seg_req(event.payload).dest_chain;
  if (t == topic::kSegResult) return decode_seg_result(event.payload).execution_chain;
  fail(ErrCode::ConfigError, "no destination for topic " + t);
}

// --- transport ---------------------------------------------------------------------

Digest message_id(std::uint32_t source_chain, const Digest& tx, std::uint32_t event_index) {
  ByteWriter w;
  w.u32(source_chain);
  write_digest(w, tx);
  w.u32(event_index);
  return sha256(w.view());
}

Digest message_id(const CrossChainMessage& msg) {
  return message_id(msg.source_chain, msg.receipt.tx_hash, msg.event_index);
}

Bytes encode_message(const CrossChainMessage& msg) {
  ByteWriter w;
  w.u32(msg.source_chain);
  write_block(w, msg.header);
  w.bytes(encode_receipt(msg.receipt));
  merkle::write_proof(w, msg.proof);
  w.u32(msg.event_index);
  w.str(msg.relayer);
  return w.take();
}

CrossChainMessage decode_message(ByteView data) {
  ByteReader r(data);
  CrossChainMessage msg;
  msg.source_chain = r.u32();
  msg.header = read_block(r);
  msg.receipt = decode_receipt(r.bytes());
  msg.proof = merkle::read_proof(r);
  msg.event_index = r.u32();
  msg.relayer = r.str();
  r.expect_done();
  return msg;
}

// --- calldata ------------------------------------------------------------------------

namespace {

enum class PayloadTag : std::uint8_t {
  DeployLogic = 1,
  DeployState = 2,
  DeployMono = 3,
  CloneDeploy = 4,
  RequestClone = 5,
  RequestVerification = 6,
  Inbound = 7,
  Invoke = 8,
  ExecuteInvocation = 9,
  CallState = 10,
  CallMono = 11,
  SetLockSize = 12,
};

}  // namespace

Bytes encode_payload(const TxPayload& payload) {
  ByteWriter w;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PayloadDeployLogic>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::DeployLogic));
          w.bytes(vm::encode_program(p.program));
        } else if constexpr (std::is_same_v<T, PayloadDeployState>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::DeployState));
          w.bytes(encode_state_spec(p.spec));
          write_address(w, p.logic_addr);
        } else if constexpr (std::is_same_v<T, PayloadDeployMono>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::DeployMono));
          w.bytes(encode_monolithic(p.spec));
        } else if constexpr (std::is_same_v<T, PayloadCloneDeploy>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::CloneDeploy));
          write_digest(w, p.job_id);
          w.str(p.service_id);
          w.bytes(vm::encode_program(p.program));
          w.u32(p.origin_chain);
          write_address(w, p.origin_addr);
        } else if constexpr (std::is_same_v<T, PayloadRequestClone>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::RequestClone));
          write_digest(w, p.job_id);
          w.u32(p.invoked_chain);
          write_clone_entries(w, p.entries);
        } else if constexpr (std::is_same_v<T, PayloadRequestVerification>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::RequestVerification));
          write_digest(w, p.job_id);
          w.str(p.service_id);
        } else if constexpr (std::is_same_v<T, PayloadInbound>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::Inbound));
          w.bytes(encode_message(p.msg));
        } else if constexpr (std::is_same_v<T, PayloadInvoke>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::Invoke));
          w.str(p.dapp);
          w.str_u64_map(p.args);
          w.boolean(p.baseline);
          w.boolean(p.ta);
          w.boolean(p.fgsl);
          w.u64(p.exec_gas_limit);
          w.u64(p.fee_escrow);
        } else if constexpr (std::is_same_v<T, PayloadExecuteInvocation>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::ExecuteInvocation));
          write_digest(w, p.invocation_id);
        } else if constexpr (std::is_same_v<T, PayloadCallState>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::CallState));
          w.str(p.entry);
          w.str_u64_map(p.args);
        } else if constexpr (std::is_same_v<T, PayloadCallMono>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::CallMono));
          w.str(p.entry);
          w.str_u64_map(p.args);
        } else if constexpr (std::is_same_v<T, PayloadSetLockSize>) {
          w.u8(static_cast<std::uint8_t>(PayloadTag::SetLockSize));
          w.u64(p.lock_size);
        }
      },
      payload);
  return w.take();
}

TxPayload decode_payload(ByteView calldata) {
  ByteReader r(calldata);
  const auto tag = static_cast<PayloadTag>(r.u8());
  switch (tag) {
    case PayloadTag::DeployLogic: {
      PayloadDeployLogic p{vm::decode_program(r.bytes())};
      r.expect_done();
      return p;
    }
    case PayloadTag::DeployState: {
      PayloadDeployState p;
      p.spec = decode_state_spec(r.bytes());
      p.logic_addr = read_address(r);
      r.expect_done();
      return p;
    }
    case PayloadTag::DeployMono: {
      PayloadDeployMono p{decode_monolithic(r.bytes())};
      r.expect_done();
      return p;
    }
    case PayloadTag::CloneDeploy: {
      PayloadCloneDeploy p;
      p.job_id = read_digest(r);
      p.service_id = r.str();
      p.program = vm::decode_program(r.bytes());
      p.origin_chain = r.u32();
      p.origin_addr = read_address(r);
      r.expect_done();
      return p;
    }
    case PayloadTag::RequestClone: {
      PayloadRequestClone p;
      p.job_id = read_digest(r);
      p.invoked_chain = r.u32();
      p.entries = read_clone_entries(r);
      r.expect_done();
      return p;
    }
    case PayloadTag::RequestVerification: {
      PayloadRequestVerification p;
      p.job_id = read_digest(r);
      p.service_id = r.str();
      r.expect_done();
      return p;
    }
    case PayloadTag::Inbound: {
      PayloadInbound p{decode_message(r.bytes())};
      r.expect_done();
      return p;
    }
    case PayloadTag::Invoke: {
      PayloadInvoke p;
      p.dapp = r.str();
      p.args = r.str_u64_map();
      p.baseline = r.boolean();
      p.ta = r.boolean();
      p.fgsl = r.boolean();
      p.exec_gas_limit = r.u64();
      p.fee_escrow = r.u64();
      r.expect_done();
      return p;
    }
    case PayloadTag::ExecuteInvocation: {
      PayloadExecuteInvocation p{read_digest(r)};
      r.expect_done();
      return p;
    }
    case PayloadTag::CallState: {
      PayloadCallState p;
      p.entry = r.str();
      p.args = r.str_u64_map();
      r.expect_done();
      return p;
    }
    case PayloadTag::CallMono: {
      PayloadCallMono p;
      p.entry = r.str();
      p.args = r.str_u64_map();
      r.expect_done();
      return p;
    }
    case PayloadTag::SetLockSize: {
      PayloadSetLockSize p{r.u64()};
      r.expect_done();
      return p;
    }
  }
  fail(ErrCode::EncodingError, "unknown payload tag");
}

}  // namespace ix
