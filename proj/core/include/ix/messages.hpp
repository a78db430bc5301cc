#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ix/contracts.hpp"
#include "ix/ledger.hpp"
#include "ix/merkle.hpp"

namespace ix {

// Event topics carried by relayers between chains. Payload layouts are
// bit-exact (docs/protocol.md); they are the wire protocol.
namespace topic {
inline constexpr const char* kCloneReq = "CLONE_REQ";
inline constexpr const char* kVerifyOut = "VERIFY_OUT";
inline constexpr const char* kVerifyResult = "VERIFY_RESULT";
inline constexpr const char* kLockReq = "LOCK_REQ";
inline constexpr const char* kLockResult = "LOCK_RESULT";
inline constexpr const char* kUpdateReq = "UPDATE_REQ";
inline constexpr const char* kUpdateAck = "UPDATE_ACK";
// Sequential-baseline extension topics, same transport rules.
inline constexpr const char* kSegReq = "SEG_REQ";
inline constexpr const char* kSegResult = "SEG_RESULT";
// Local observability only (never relayed): terminal invocation results.
inline constexpr const char* kInvokeDone = "INVOKE_DONE";
}  // namespace topic

bool is_relayed_topic(const std::string& topic);

// --- event payloads ------------------------------------------------------------

struct CloneEntry {
  std::string service_id;
  Address origin_addr;

  bool operator==(const CloneEntry&) const = default;
};

struct CloneReq {
  Digest job_id;
  std::uint32_t invoked_chain = 0;    // chain holding the originals
  std::uint32_t execution_chain = 0;  // chain the clones land on (emitting chain)
  std::vector<CloneEntry> entries;
};

struct VerifyOut {
  Digest job_id;
  std::string service_id;
  std::uint32_t origin_chain = 0;
  Address origin_addr;
  Digest clone_hash;
  std::uint32_t execution_chain = 0;
};

struct VerifyResult {
  Digest job_id;
  std::string service_id;
  bool match = false;
  std::uint32_t execution_chain = 0;
};

struct LockSub {
  Address state_addr;
  std::vector<LockAsk> asks;
};

struct LockReq {
  Digest invocation_id;
  std::uint32_t dest_chain = 0;
  std::uint32_t execution_chain = 0;
  std::uint64_t expiry_time_ms = 0;  // absolute simulated time; converted to a
                                     // local expiry height at lock time
  std::vector<LockSub> subs;
};

struct SnapSub {
  Address state_addr;
  std::vector<SnapEntry> entries;
};

struct LockResult {
  Digest invocation_id;
  std::uint32_t chain_id = 0;
  std::uint32_t execution_chain = 0;
  bool ok = false;
  ErrCode reason = ErrCode::Ok;
  std::vector<SnapSub> snapshot;
};

struct UpdateSub {
  Address state_addr;
  std::vector<UpdateVal> values;
};

struct UpdateReq {
  Digest invocation_id;
  std::uint32_t dest_chain = 0;
  std::uint32_t execution_chain = 0;
  bool commit = false;
  std::vector<UpdateSub> subs;
};

struct UpdateAck {
  Digest invocation_id;
  std::uint32_t chain_id = 0;
  std::uint32_t execution_chain = 0;
  bool applied_commit = false;
};

struct SegReq {
  Digest invocation_id;
  std::uint32_t dest_chain = 0;
  std::uint32_t execution_chain = 0;
  std::string node_id;
  std::string service_id;
  std::string entry;  // entry point of the original contract on its home chain
  std::map<std::string, std::uint64_t> args;  // resolved call arguments
  std::uint64_t expiry_time_ms = 0;
};

struct SegResult {
  Digest invocation_id;
  std::uint32_t chain_id = 0;
  std::uint32_t execution_chain = 0;
  std::string node_id;
  bool ok = false;
  ErrCode reason = ErrCode::Ok;
  std::map<std::string, std::uint64_t> outputs;
  std::vector<UpdateSub> writes;  // provisional values, committed by the final wave
};

struct InvokeDone {
  Digest invocation_id;
  bool committed = false;
  ErrCode reason = ErrCode::Ok;
};

Bytes encode_clone_req(const CloneReq&);
CloneReq decode_clone_req(ByteView);
Bytes encode_verify_out(const VerifyOut&);
VerifyOut decode_verify_out(ByteView);
Bytes encode_verify_result(const VerifyResult&);
VerifyResult decode_verify_result(ByteView);
Bytes encode_lock_req(const LockReq&);
LockReq decode_lock_req(ByteView);
Bytes encode_lock_result(const LockResult&);
LockResult decode_lock_result(ByteView);
Bytes encode_update_req(const UpdateReq&);
UpdateReq decode_update_req(ByteView);
Bytes encode_update_ack(const UpdateAck&);
UpdateAck decode_update_ack(ByteView);
Bytes encode_seg_req(const SegReq&);
SegReq decode_seg_req(ByteView);
Bytes encode_seg_result(const SegResult&);
SegResult decode_seg_result(ByteView);
Bytes encode_invoke_done(const InvokeDone&);
InvokeDone decode_invoke_done(ByteView);

// Destination chain a relayed event must be delivered to.
std::uint32_t event_destination(const EventLog& event);

// --- cross-chain transport -------------------------------------------------------

struct CrossChainMessage {
  std::uint32_t source_chain = 0;
  Block header;
  Receipt receipt;
  merkle::ReceiptProof proof;
  std::uint32_t event_index = 0;  // position in receipt.logs
  std::string relayer;
};

// Deterministically derived; never supplied free-form.
Digest message_id(std::uint32_t source_chain, const Digest& tx, std::uint32_t event_index);
Digest message_id(const CrossChainMessage& msg);

Bytes encode_message(const CrossChainMessage&);
CrossChainMessage decode_message(ByteView);

// --- transaction calldata ---------------------------------------------------------

struct PayloadDeployLogic {
  vm::Program program;
};
struct PayloadDeployState {
  StateSpec spec;
  Address logic_addr;
};
struct PayloadDeployMono {
  MonolithicSpec spec;
};
struct PayloadCloneDeploy {
  Digest job_id;
  std::string service_id;
  vm::Program program;
  std::uint32_t origin_chain = 0;
  Address origin_addr;
};
struct PayloadRequestClone {
  Digest job_id;
  std::uint32_t invoked_chain = 0;
  std::vector<CloneEntry> entries;
};
struct PayloadRequestVerification {
  Digest job_id;
  std::string service_id;
};
struct PayloadInbound {
  CrossChainMessage msg;
};
struct PayloadInvoke {
  std::string dapp;
  std::map<std::string, std::uint64_t> args;
  bool baseline = false;
  bool ta = true;
  bool fgsl = true;
  std::uint64_t exec_gas_limit = 0;
  std::uint64_t fee_escrow = 0;
};
struct PayloadExecuteInvocation {
  Digest invocation_id;
};
struct PayloadCallState {
  std::string entry;
  std::map<std::string, std::uint64_t> args;
};
struct PayloadCallMono {
  std::string entry;
  std::map<std::string, std::uint64_t> args;
};
struct PayloadSetLockSize {
  std::uint64_t lock_size = 1;
};

using TxPayload =
    std::variant<PayloadDeployLogic, PayloadDeployState, PayloadDeployMono, PayloadCloneDeploy,
                 PayloadRequestClone, PayloadRequestVerification, PayloadInbound, PayloadInvoke,
                 PayloadExecuteInvocation, PayloadCallState, PayloadCallMono, PayloadSetLockSize>;

Bytes encode_payload(const TxPayload& payload);
TxPayload decode_payload(ByteView calldata);

}  // namespace ix
