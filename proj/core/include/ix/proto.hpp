#pragma once

#include <cstdint>

#include "ix/sim.hpp"

namespace ix::proto {

// Effective timeout: the bridging contract's cap and the dApp's own maximum,
// whichever is smaller.
inline std::uint32_t effective_timeout(std::uint32_t bridge_max_blocks,
                                       std::uint32_t dapp_blocks) {
  return bridge_max_blocks < dapp_blocks ? bridge_max_blocks : dapp_blocks;
}

// Lock bags outlive the coordinator deadline by this factor so a commit
// decision made just before the deadline still reaches every invoked chain
// before its bags self-expire.
inline constexpr std::uint64_t kExpiryMarginFactor = 2;

Digest derive_invocation_id(const Digest& user_tx_hash);
Digest derive_job_id(const std::string& dapp_name, std::uint32_t execution_chain);

// Read-only, zero-gas bytecode inquiry (logic or monolithic contracts).
const Bytes& getcode(const Chain& chain, const Address& addr);
Digest bytecode_hash_of(const Chain& chain, const Address& addr);
bool compare_bytes(const Chain& chain, const Address& local_addr, const Digest& foreign_hash);

// Transaction handlers, dispatched from Simulation::execute. Deploy handlers
// return the created address.
Address handle_deploy_logic(TxContext& ctx, const PayloadDeployLogic& p);
Address handle_deploy_state(TxContext& ctx, const PayloadDeployState& p);
Address handle_deploy_mono(TxContext& ctx, const PayloadDeployMono& p);
Address handle_clone_deploy(TxContext& ctx, const PayloadCloneDeploy& p);
void handle_request_clone(TxContext& ctx, const PayloadRequestClone& p);
void handle_request_verification(TxContext& ctx, const PayloadRequestVerification& p);
void handle_inbound(TxContext& ctx, const PayloadInbound& p);
void handle_invoke(TxContext& ctx, const PayloadInvoke& p);
void handle_execute_invocation(TxContext& ctx, const PayloadExecuteInvocation& p);
void handle_call_state(TxContext& ctx, const PayloadCallState& p);
void handle_call_mono(TxContext& ctx, const PayloadCallMono& p);
void handle_set_lock_size(TxContext& ctx, const PayloadSetLockSize& p);

// Per-block timeout sweep for chains hosting invocations: anything in Locking
// or Executing past its deadline aborts, with abort updates broadcast.
void check_timeouts(Simulation& sim, Chain& chain, std::uint64_t height, std::uint64_t now_ms,
                    std::vector<Receipt>& receipts);

// Internal entry points shared between the bridge dispatcher and the two
// execution engines (also exercised directly by tests).
void on_lock_result(TxContext& ctx, const LockResult& res);
void on_update_ack(TxContext& ctx, const UpdateAck& ack);
void dispatch_lock(TxContext& ctx, const LockReq& req);
void dispatch_update(TxContext& ctx, const UpdateReq& req);
void on_verify_out(TxContext& ctx, const VerifyOut& msg);
void on_verify_result(TxContext& ctx, const VerifyResult& msg);
void baseline_on_seg_req(TxContext& ctx, const SegReq& req);
void baseline_on_seg_result(TxContext& ctx, const SegResult& res);
void baseline_handle_invoke(TxContext& ctx, const PayloadInvoke& p, const Digest& invocation_id);

// Shared: register a service id -> logic address binding, first write wins.
void reg_server(TxContext& ctx, const Digest& job_id, const std::string& service_id,
                Address logic_addr, std::uint32_t origin_chain, Address origin_addr);

}  // namespace ix::proto
