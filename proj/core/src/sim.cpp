#include "ix/sim.hpp"

#include <algorithm>

#include "ix/proto.hpp"

namespace ix {

Simulation::Simulation(GasSchedule gas, std::uint64_t seed) : gas_(gas), seed_(seed) {}

void Simulation::add_chain(ChainConfig config) {
  const std::uint32_t id = config.chain_id;
  if (chains_.count(id) > 0) fail(ErrCode::ConfigError, "duplicate chain id");
  auto [it, inserted] = chains_.emplace(id, Chain(std::move(config)));
  BridgeState& bridge = it->second.bridge();
  bridge.chain_id = id;
  bridge.address = derive_address(id, "system", 0);
}

Chain& Simulation::chain(std::uint32_t id) {
  const auto it = chains_.find(id);
  if (it == chains_.end()) fail(ErrCode::NotFound, "unknown chain " + std::to_string(id));
  return it->second;
}

const Chain& Simulation::chain(std::uint32_t id) const {
  const auto it = chains_.find(id);
  if (it == chains_.end()) fail(ErrCode::NotFound, "unknown chain " + std::to_string(id));
  return it->second;
}

std::vector<std::uint32_t> Simulation::chain_ids() const {
  std::vector<std::uint32_t> ids;
  ids.reserve(chains_.size());
  for (const auto& [id, c] : chains_) ids.push_back(id);
  return ids;
}

std::uint64_t Simulation::sub_seed(const std::string& name) const {
  ByteWriter w;
  w.u64(seed_);
  w.str(name);
  const Digest d = sha256(w.view());
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
  return out;
}

void Simulation::add_actor(std::shared_ptr<Actor> actor) { actors_.push_back(std::move(actor)); }

void Simulation::step() {
  std::uint64_t next = UINT64_MAX;
  for (const auto& [id, c] : chains_) {
    next = std::min(next, c.last_block_time() + c.config().block_time_ms);
  }
  for (const auto& actor : actors_) next = std::min(next, actor->next_wake_ms);
  if (next == UINT64_MAX) fail(ErrCode::ConfigError, "nothing scheduled");
  now_ms_ = next;

  // Blocks first (ascending chain id), then actors in registration order.
  for (auto& [id, c] : chains_) {
    if (c.last_block_time() + c.config().block_time_ms <= now_ms_) {
      c.produce_block(now_ms_, *this);
      // Keeper work scheduled during this block lands in the next one.
      auto pending = std::move(c.bridge().pending_keeper);
      c.bridge().pending_keeper.clear();
      for (const Digest& inv_id : pending) {
        const auto inv_it = c.bridge().invocations.find(inv_id);
        if (inv_it == c.bridge().invocations.end()) continue;
        Transaction tx;
        tx.sender = "keeper";
        tx.nonce = c.next_nonce(tx.sender);
        tx.target = c.bridge().address;
        tx.calldata = encode_payload(PayloadExecuteInvocation{inv_id});
        tx.gas_limit = inv_it->second.exec_gas_limit + 500000;
        tx.fee = tx.gas_limit;
        c.submit_tx(tx);
      }
    }
  }
  for (const auto& actor : actors_) {
    if (actor->next_wake_ms <= now_ms_) actor->wake(*this);
  }
}

bool Simulation::run_until(const std::function<bool()>& done, std::uint64_t max_ms) {
  while (!done()) {
    if (now_ms_ >= max_ms) return false;
    step();
  }
  return true;
}

void Simulation::run_for(std::uint64_t ms) {
  const std::uint64_t until = now_ms_ + ms;
  while (now_ms_ < until) step();
}

// --- genesis installation ------------------------------------------------------

Address Simulation::genesis_deploy_logic(std::uint32_t chain_id, const vm::Program& program,
                                         const AccountId& deployer) {
  vm::validate(program, false);
  Chain& c = chain(chain_id);
  Account& acct = c.account(deployer);
  const Address addr = derive_address(chain_id, deployer, acct.nonce);
  ++acct.nonce;
  LogicContract logic;
  logic.bytecode = vm::encode_program(program);
  logic.program = program;
  c.contracts().logic[addr] = std::move(logic);
  return addr;
}

Address Simulation::genesis_deploy_state(std::uint32_t chain_id, const StateSpec& spec,
                                         Address logic_addr, const AccountId& deployer) {
  Chain& c = chain(chain_id);
  if (c.contracts().logic.count(logic_addr) == 0) fail(ErrCode::NotFound, "logic not deployed");
  Account& acct = c.account(deployer);
  const Address addr = derive_address(chain_id, deployer, acct.nonce);
  ++acct.nonce;
  c.contracts().state.emplace(addr, StateContract(spec, logic_addr, c.bridge().address, deployer));
  return addr;
}

Address Simulation::genesis_deploy_mono(std::uint32_t chain_id, const MonolithicSpec& spec,
                                        const AccountId& deployer) {
  for (const auto& [name, prog] : spec.funcs) vm::validate(prog, true);
  Chain& c = chain(chain_id);
  Account& acct = c.account(deployer);
  const Address addr = derive_address(chain_id, deployer, acct.nonce);
  ++acct.nonce;
  MonolithicContract contract;
  contract.spec = spec;
  contract.deployer = deployer;
  contract.bytecode = encode_monolithic(spec);
  for (const SlotDecl& decl : spec.slots) contract.storage[decl.name] = SlotValue::from_decl(decl);
  c.contracts().mono[addr] = std::move(contract);
  return addr;
}

void Simulation::genesis_register_service(std::uint32_t chain_id, const std::string& service_id,
                                          Address logic_addr, std::uint32_t origin_chain,
                                          Address origin_addr) {
  Chain& c = chain(chain_id);
  BridgeState& bridge = c.bridge();
  if (bridge.registry.count(service_id) > 0) fail(ErrCode::AlreadyRegistered, service_id);
  RegistryEntry entry;
  entry.logic_addr = logic_addr;
  entry.verified = true;  // locally-originated services need no cross-chain verification
  entry.origin_chain = origin_chain;
  entry.origin_addr = origin_addr;
  entry.registrar = "genesis";
  entry.registered_height = 0;
  bridge.registry[service_id] = entry;
}

void Simulation::install_dapp(std::uint32_t chain_id, const DappDescriptor& dapp) {
  chain(chain_id).bridge().dapps[dapp.name] = dapp;
}

void Simulation::add_service_info(const ServiceInfo& info) { service_table_[info.service_id] = info; }

const ServiceInfo* Simulation::find_service_info(const std::string& service_id) const {
  const auto it = service_table_.find(service_id);
  return it == service_table_.end() ? nullptr : &it->second;
}

std::uint64_t Simulation::head_of(std::uint32_t chain_id) const { return chain(chain_id).head_height(); }

const Block& Simulation::header_of(std::uint32_t chain_id, std::uint64_t height) const {
  return chain(chain_id).block_at(height);
}

// --- transaction dispatch -------------------------------------------------------

void Simulation::begin_block(Chain& c, std::uint64_t height, std::uint64_t now_ms,
                             std::vector<Receipt>& receipts) {
  proto::check_timeouts(*this, c, height, now_ms, receipts);
}

Receipt Simulation::execute(Chain& c, const Transaction& tx, std::uint64_t now_ms) {
  Receipt receipt;
  receipt.tx_hash = tx_hash(tx);

  TxContext ctx{*this, c, tx, receipt.tx_hash, now_ms, c.head_height() + 1};

  const ChainStateSnapshot snap = c.snapshot_state();
  ErrCode outcome = ErrCode::Ok;
  try {
    ctx.charge(gas_.tx_base);
    const Account& acct = c.account(tx.sender);
    if (tx.nonce != acct.nonce) fail(ErrCode::BadNonce, "stale nonce at execution");
    if (acct.balance < tx.fee) fail(ErrCode::InsufficientBalance, "fee exceeds balance");

    const TxPayload payload = decode_payload(tx.calldata);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, PayloadDeployLogic>) {
            proto::handle_deploy_logic(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadDeployState>) {
            proto::handle_deploy_state(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadDeployMono>) {
            proto::handle_deploy_mono(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadCloneDeploy>) {
            proto::handle_clone_deploy(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadRequestClone>) {
            proto::handle_request_clone(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadRequestVerification>) {
            proto::handle_request_verification(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadInbound>) {
            proto::handle_inbound(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadInvoke>) {
            proto::handle_invoke(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadExecuteInvocation>) {
            proto::handle_execute_invocation(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadCallState>) {
            proto::handle_call_state(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadCallMono>) {
            proto::handle_call_mono(ctx, p);
          } else if constexpr (std::is_same_v<T, PayloadSetLockSize>) {
            proto::handle_set_lock_size(ctx, p);
          }
        },
        payload);
  } catch (const Error& e) {
    outcome = e.code();
  }

  if (outcome != ErrCode::Ok) {
    c.restore_state(snap);
    receipt.status = TxStatus::Reverted;
    receipt.revert_reason = outcome;
    // Reverted transactions keep no logs and no state changes; gas is still
    // charged below.
  } else {
    receipt.logs = std::move(ctx.logs);
  }
  receipt.gas_used = std::min(ctx.gas_used, tx.gas_limit);

  Account& sender = c.account(tx.sender);
  sender.nonce = tx.nonce + 1;
  sender.balance -= std::min(sender.balance, receipt.gas_used);

  if (!ctx.invocation_tag.is_zero()) {
    InvMetrics& m = metrics_.invocations[ctx.invocation_tag];
    m.gas_by_chain[c.config().chain_id] += receipt.gas_used;
    m.last_activity_ms[c.config().chain_id] = now_ms;
  }
  return receipt;
}

Digest Simulation::submit(std::uint32_t chain_id, const AccountId& sender, Address target,
                          const TxPayload& payload, std::uint64_t gas_limit) {
  Chain& c = chain(chain_id);
  Transaction tx;
  tx.sender = sender;
  tx.nonce = c.next_nonce(sender);
  tx.target = target;
  tx.calldata = encode_payload(payload);
  tx.gas_limit = gas_limit;
  tx.fee = gas_limit;
  return c.submit_tx(tx);
}

}  // namespace ix
