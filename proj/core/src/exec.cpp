#include <algorithm>

#include "ix/proto.hpp"

namespace ix::proto {

// ---------------------------------------------------------------------------
// Generic contract transactions
// ---------------------------------------------------------------------------

Address handle_deploy_logic(TxContext& ctx, const PayloadDeployLogic& p) {
  vm::validate(p.program, false);
  Bytes bytecode = vm::encode_program(p.program);
  ctx.charge(ctx.sim.gas().deploy_cost(bytecode.size(), 0));
  const Address addr = derive_address(ctx.chain.config().chain_id, ctx.tx.sender, ctx.tx.nonce);
  LogicContract logic;
  logic.bytecode = std::move(bytecode);
  logic.program = p.program;
  logic.deployed_height = ctx.height;
  ctx.chain.contracts().logic[addr] = std::move(logic);
  return addr;
}

Address handle_deploy_state(TxContext& ctx, const PayloadDeployState& p) {
  if (ctx.chain.contracts().logic.count(p.logic_addr) == 0) {
    fail(ErrCode::NotFound, "paired logic not deployed");
  }
  const Bytes encoded = encode_state_spec(p.spec);
  ctx.charge(ctx.sim.gas().deploy_cost(encoded.size(), p.spec.slots.size()));
  const Address addr = derive_address(ctx.chain.config().chain_id, ctx.tx.sender, ctx.tx.nonce);
  ctx.chain.contracts().state.emplace(
      addr, StateContract(p.spec, p.logic_addr, ctx.chain.bridge().address, ctx.tx.sender));
  return addr;
}

Address handle_deploy_mono(TxContext& ctx, const PayloadDeployMono& p) {
  for (const auto& [name, prog] : p.spec.funcs) vm::validate(prog, true);
  Bytes bytecode = encode_monolithic(p.spec);
  ctx.charge(ctx.sim.gas().deploy_cost(bytecode.size(), p.spec.slots.size()));
  const Address addr = derive_address(ctx.chain.config().chain_id, ctx.tx.sender, ctx.tx.nonce);
  MonolithicContract contract;
  contract.spec = p.spec;
  contract.deployer = ctx.tx.sender;
  contract.bytecode = std::move(bytecode);
  contract.deployed_height = ctx.height;
  for (const SlotDecl& decl : p.spec.slots) contract.storage[decl.name] = SlotValue::from_decl(decl);
  ctx.chain.contracts().mono[addr] = std::move(contract);
  return addr;
}

void handle_call_state(TxContext& ctx, const PayloadCallState& p) {
  auto& states = ctx.chain.contracts().state;
  const auto it = states.find(ctx.tx.target);
  if (it == states.end()) fail(ErrCode::NotFound, "no state contract at target");
  StateContract& st = it->second;
  const auto logic_it = ctx.chain.contracts().logic.find(st.logic_addr());
  if (logic_it == ctx.chain.contracts().logic.end()) fail(ErrCode::NotFound, "paired logic missing");
  const CallOutcome outcome = call_state_entry(st, logic_it->second.program, p.entry, p.args,
                                               ctx.tx.gas_limit - ctx.gas_used, ctx.sim.gas());
  ctx.charge(outcome.gas_used);
}

void handle_call_mono(TxContext& ctx, const PayloadCallMono& p) {
  auto& monos = ctx.chain.contracts().mono;
  const auto it = monos.find(ctx.tx.target);
  if (it == monos.end()) fail(ErrCode::NotFound, "no monolithic contract at target");
  const CallOutcome outcome =
      call_monolithic(it->second, p.entry, p.args, ctx.tx.gas_limit - ctx.gas_used, ctx.sim.gas());
  ctx.charge(outcome.gas_used);
}

void handle_set_lock_size(TxContext& ctx, const PayloadSetLockSize& p) {
  auto& states = ctx.chain.contracts().state;
  const auto it = states.find(ctx.tx.target);
  if (it == states.end()) fail(ErrCode::NotFound, "no state contract at target");
  it->second.set_lock_size(ctx.tx.sender, p.lock_size);
  ctx.charge(ctx.sim.gas().storage_write);
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace {

// Directory used when an invocation is admitted: service locations come from
// the provider-compiled table, clone status from this chain's own registry.
class InvokeDirectory : public ServiceDirectory {
 public:
  InvokeDirectory(const Simulation& sim, const BridgeState& bridge) : sim_(sim), bridge_(bridge) {}

  const ServiceInfo* find_service(const std::string& service_id) const override {
    return sim_.find_service_info(service_id);
  }
  bool registered_on(const std::string& service_id, std::uint32_t chain) const override {
    if (chain == bridge_.chain_id) return bridge_.registry.count(service_id) > 0;
    return sim_.chain(chain).bridge().registry.count(service_id) > 0;
  }

 private:
  const Simulation& sim_;
  const BridgeState& bridge_;
};

std::string working_key(const Address& addr, const std::string& slot, const std::string& sub) {
  return addr.hex() + "/" + slot + "/" + sub;
}

std::uint64_t expiry_height_from_time(const TxContext& ctx, std::uint64_t expiry_time_ms) {
  const std::uint64_t block_time = ctx.chain.config().block_time_ms;
  const std::uint64_t remaining =
      expiry_time_ms > ctx.now_ms ? expiry_time_ms - ctx.now_ms : 0;
  const std::uint64_t blocks = std::max<std::uint64_t>(1, (remaining + block_time - 1) / block_time);
  return ctx.height + blocks;
}

}  // namespace

std::uint64_t invocation_expiry_time(const Chain& exec_chain, std::uint64_t now_ms,
                                     std::uint32_t timeout_blocks) {
  return now_ms + kExpiryMarginFactor * timeout_blocks * exec_chain.config().block_time_ms;
}

void emit_update_wave(TxContext& ctx, Invocation& inv, bool commit) {
  const Address bridge_addr = ctx.chain.bridge().address;
  for (const std::uint32_t chain_id : inv.invoked_chains) {
    std::vector<UpdateSub> subs;
    const auto plan_it = inv.update_plan.find(chain_id);
    if (commit && plan_it != inv.update_plan.end()) {
      subs = plan_it->second;
    } else {
      // Abort wave: name the planned contracts so held locks release; chains
      // that never locked ack the cancellation.
      const auto lock_it = inv.lock_plan.find(chain_id);
      if (lock_it != inv.lock_plan.end()) {
        for (const LockSub& ls : lock_it->second) subs.push_back({ls.state_addr, {}});
      }
    }
    if (inv.ta) {
      UpdateReq req{inv.id, chain_id, ctx.chain.config().chain_id, commit, subs};
      ctx.emit(bridge_addr, topic::kUpdateReq, encode_update_req(req));
      ++inv.update_msgs;
    } else {
      for (const UpdateSub& sub : subs) {
        UpdateReq req{inv.id, chain_id, ctx.chain.config().chain_id, commit, {sub}};
        ctx.emit(bridge_addr, topic::kUpdateReq, encode_update_req(req));
        ++inv.update_msgs;
      }
    }
    if (inv.escrow_remaining >= kRelayFee) inv.escrow_remaining -= kRelayFee;
  }
}

void finish_invocation(TxContext& ctx, Invocation& inv, bool committed, ErrCode reason) {
  inv.status = committed ? InvStatus::Committed : InvStatus::Aborted;
  inv.abort_reason = reason;
  inv.terminal_ms = ctx.now_ms;
  inv.terminal_height = ctx.height;
  // Surplus escrow returns to the user.
  ctx.chain.account(inv.user).balance += inv.escrow_remaining;
  inv.escrow_remaining = 0;
  ctx.emit(ctx.chain.bridge().address, topic::kInvokeDone,
           encode_invoke_done({inv.id, committed, reason}));
  ctx.sim.metrics().invocations[inv.id].transcript.push_back(
      {ctx.now_ms, ctx.chain.config().chain_id, ctx.height,
       committed ? "committed" : std::string("aborted:") + err_name(reason)});
}

void abort_invocation(TxContext& ctx, Invocation& inv, ErrCode reason) {
  emit_update_wave(ctx, inv, false);
  // Locks held on this chain itself (baseline local segments) release at once.
  BridgeState& bridge = ctx.chain.bridge();
  const auto locked_it = bridge.locked_states.find(inv.id);
  if (locked_it != bridge.locked_states.end()) {
    const FinalityView fin = ctx.chain.finality();
    for (const Address& addr : locked_it->second) {
      const auto st_it = ctx.chain.contracts().state.find(addr);
      if (st_it == ctx.chain.contracts().state.end()) continue;
      if (st_it->second.ever_locked(inv.id)) {
        st_it->second.update_state(bridge.address, inv.id, false, {}, fin);
      }
    }
    bridge.locked_states.erase(locked_it);
  }
  inv.local_overlay.clear();
  finish_invocation(ctx, inv, false, reason);
}

// ---------------------------------------------------------------------------
// start_invocation
// ---------------------------------------------------------------------------

namespace {

std::map<std::uint32_t, std::vector<LockSub>> build_lock_plan(
    const Analysis& analysis, const std::map<std::string, std::uint64_t>& args, bool fgsl) {
  std::map<std::uint32_t, std::vector<LockSub>> plan;
  for (const auto& [chain_id, reqs] : analysis.requirements.by_chain) {
    std::vector<LockSub>& subs = plan[chain_id];
    for (const StateRequirement& req : reqs) {
      auto sub_it = std::find_if(subs.begin(), subs.end(), [&](const LockSub& s) {
        return s.state_addr == req.state_addr;
      });
      if (sub_it == subs.end()) {
        subs.push_back({req.state_addr, {}});
        sub_it = subs.end() - 1;
      }
      const LockModeKind mode = fgsl ? req.spec.mode : LockModeKind::Whole;
      LockAsk ask;
      ask.slot = req.spec.slot;
      if (mode == LockModeKind::Read) {
        // Shared read snapshot: one per slot per invocation.
        const auto prior = std::find_if(sub_it->asks.begin(), sub_it->asks.end(),
                                        [&](const LockAsk& a) { return a.slot == ask.slot; });
        if (prior != sub_it->asks.end()) continue;  // whole/amount/read already covers it
        ask.read = true;
        ask.bag_key = kReadBagKey;
        sub_it->asks.push_back(std::move(ask));
        continue;
      }
      if (mode == LockModeKind::Whole) {
        ask.whole = true;
        ask.bag_key = kWholeBagKey;
        for (const std::string& key_arg : req.spec.key_args) {
          const auto it = args.find(key_arg);
          if (it == args.end()) fail(ErrCode::ConfigError, "missing key argument " + key_arg);
          ask.map_keys.push_back(std::to_string(it->second));
        }
        // Whole locks on the same slot within one invocation coalesce, and
        // subsume any earlier read snapshot of it.
        const auto prior = std::find_if(sub_it->asks.begin(), sub_it->asks.end(),
                                        [&](const LockAsk& a) { return a.slot == ask.slot; });
        if (prior != sub_it->asks.end()) {
          if (prior->read) {
            *prior = ask;
            continue;
          }
          if (!prior->whole) fail(ErrCode::ConfigError, "mixed lock modes on slot " + ask.slot);
          for (const auto& k : ask.map_keys) {
            if (std::find(prior->map_keys.begin(), prior->map_keys.end(), k) ==
                prior->map_keys.end()) {
              prior->map_keys.push_back(k);
            }
          }
          continue;
        }
      } else {
        ask.whole = false;
        ask.dynamic = mode == LockModeKind::Dynamic;
        ask.bag_key = req.node_id;
        ask.amount = req.spec.expr.eval(args);
        if (ask.amount == 0) fail(ErrCode::ConfigError, "zero lock amount for slot " + ask.slot);
        const auto prior = std::find_if(sub_it->asks.begin(), sub_it->asks.end(),
                                        [&](const LockAsk& a) { return a.slot == ask.slot; });
        if (prior != sub_it->asks.end() && prior->whole) {
          fail(ErrCode::ConfigError, "mixed lock modes on slot " + ask.slot);
        }
      }
      sub_it->asks.push_back(std::move(ask));
    }
  }
  return plan;
}

void emit_lock_reqs(TxContext& ctx, Invocation& inv) {
  const Address bridge_addr = ctx.chain.bridge().address;
  for (const auto& [chain_id, subs] : inv.lock_plan) {
    if (inv.ta) {
      LockReq req{inv.id, chain_id, ctx.chain.config().chain_id, inv.expiry_time_ms, subs};
      ctx.emit(bridge_addr, topic::kLockReq, encode_lock_req(req));
      ++inv.lock_msgs;
      inv.expected_results[chain_id] = 1;
    } else {
      for (const LockSub& sub : subs) {
        LockReq req{inv.id, chain_id, ctx.chain.config().chain_id, inv.expiry_time_ms, {sub}};
        ctx.emit(bridge_addr, topic::kLockReq, encode_lock_req(req));
        ++inv.lock_msgs;
      }
      inv.expected_results[chain_id] = static_cast<std::uint32_t>(subs.size());
    }
    if (inv.escrow_remaining >= kRelayFee) inv.escrow_remaining -= kRelayFee;
  }
}

}  // namespace

void handle_invoke(TxContext& ctx, const PayloadInvoke& p) {
  const Digest inv_id = derive_invocation_id(ctx.hash);
  ctx.invocation_tag = inv_id;
  if (p.baseline) {
    baseline_handle_invoke(ctx, p, inv_id);
    return;
  }

  BridgeState& bridge = ctx.chain.bridge();
  const auto dapp_it = bridge.dapps.find(p.dapp);
  if (dapp_it == bridge.dapps.end()) fail(ErrCode::NotFound, "unknown dapp " + p.dapp);
  const DappDescriptor& dapp = dapp_it->second;

  InvokeDirectory dir(ctx.sim, bridge);
  Analysis analysis = analyze(dapp, dir);
  ctx.charge(ctx.sim.gas().instruction * analysis.tree.postorder.size());

  // Only verified logic participates in execution.
  for (const auto& [id, node] : analysis.tree.nodes) {
    if (!bridge.service_verified(node.service)) fail(ErrCode::UnverifiedLogic, node.service);
  }

  Invocation inv;
  inv.id = inv_id;
  inv.dapp = p.dapp;
  inv.user = ctx.tx.sender;
  inv.args = p.args;
  inv.ta = p.ta;
  inv.fgsl = p.fgsl;
  inv.exec_gas_limit = p.exec_gas_limit > 0 ? p.exec_gas_limit : dapp.exec_gas_limit;
  inv.submit_ms = ctx.now_ms;
  inv.submit_height = ctx.height;
  inv.analysis = std::move(analysis);
  inv.lock_plan = build_lock_plan(inv.analysis, p.args, p.fgsl);
  for (const auto& [chain_id, subs] : inv.lock_plan) inv.invoked_chains.insert(chain_id);

  const std::uint32_t timeout =
      effective_timeout(bridge.max_timeout_blocks, dapp.timeout_blocks);
  inv.deadline_height = ctx.height + timeout;
  inv.expiry_time_ms = invocation_expiry_time(ctx.chain, ctx.now_ms, timeout);

  // Cross-chain fee escrow: flat fee per expected message.
  const std::uint64_t expected_msgs = 4 * inv.invoked_chains.size();
  const std::uint64_t required = expected_msgs * kRelayFee;
  if (p.fee_escrow < required) fail(ErrCode::InsufficientFee, "escrow below expected fees");
  Account& user = ctx.chain.account(ctx.tx.sender);
  if (user.balance < p.fee_escrow) fail(ErrCode::InsufficientFee, "balance below escrow");
  user.balance -= p.fee_escrow;
  inv.fee_escrow = p.fee_escrow;
  inv.escrow_remaining = p.fee_escrow;

  ctx.charge(ctx.sim.gas().storage_write);
  if (inv.invoked_chains.empty()) {
    inv.status = InvStatus::Executing;
    bridge.pending_keeper.push_back(inv_id);
  } else {
    inv.status = InvStatus::Locking;
    emit_lock_reqs(ctx, inv);
  }
  ctx.sim.metrics().invocations[inv_id].transcript.push_back(
      {ctx.now_ms, ctx.chain.config().chain_id, ctx.height, "submitted"});
  bridge.invocations[inv_id] = std::move(inv);
}

// ---------------------------------------------------------------------------
// Locking phase
// ---------------------------------------------------------------------------

void dispatch_lock(TxContext& ctx, const LockReq& req) {
  BridgeState& bridge = ctx.chain.bridge();
  const FinalityView fin = ctx.chain.finality();
  const std::uint64_t expiry_height = expiry_height_from_time(ctx, req.expiry_time_ms);

  LockResult result;
  result.invocation_id = req.invocation_id;
  result.chain_id = ctx.chain.config().chain_id;
  result.execution_chain = req.execution_chain;

  // The batch locks all-or-nothing: on any sub-failure, locks taken earlier in
  // this same batch are released before the failure event is emitted.
  const ChainStateSnapshot snap = ctx.chain.snapshot_state();
  try {
    for (const LockSub& sub : req.subs) {
      const auto st_it = ctx.chain.contracts().state.find(sub.state_addr);
      if (st_it == ctx.chain.contracts().state.end()) fail(ErrCode::NotFound, "no state contract");
      std::vector<SnapEntry> entries =
          st_it->second.lock_state(bridge.address, sub.asks, req.invocation_id, expiry_height, fin);
      ctx.charge(ctx.sim.gas().storage_write * sub.asks.size() +
                 ctx.sim.gas().storage_read * entries.size());
      result.snapshot.push_back({sub.state_addr, std::move(entries)});
      bridge.locked_states[req.invocation_id].push_back(sub.state_addr);
    }
    result.ok = true;
  } catch (const Error& e) {
    ctx.chain.restore_state(snap);
    result.ok = false;
    result.reason = e.code();
    result.snapshot.clear();
  }
  ctx.emit(ctx.chain.bridge().address, topic::kLockResult, encode_lock_result(result));
}

void on_lock_result(TxContext& ctx, const LockResult& res) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto it = bridge.invocations.find(res.invocation_id);
  if (it == bridge.invocations.end()) return;
  Invocation& inv = it->second;

  if (inv.status == InvStatus::Locking) {
    if (inv.escrow_remaining >= kRelayFee) inv.escrow_remaining -= kRelayFee;
    if (res.ok) {
      std::vector<SnapSub>& merged = inv.snapshots[res.chain_id];
      merged.insert(merged.end(), res.snapshot.begin(), res.snapshot.end());
      if (++inv.received_results[res.chain_id] >= inv.expected_results[res.chain_id]) {
        inv.lock_ok.insert(res.chain_id);
      }
      ctx.sim.metrics().invocations[inv.id].transcript.push_back(
          {ctx.now_ms, ctx.chain.config().chain_id, ctx.height,
           "lock-ok:" + std::to_string(res.chain_id)});
      if (inv.lock_ok.size() == inv.invoked_chains.size()) {
        inv.status = InvStatus::Executing;
        bridge.pending_keeper.push_back(inv.id);
      }
    } else {
      // One conflicting chain aborts the whole invocation; chains already
      // locked unlock through the abort wave.
      abort_invocation(ctx, inv, ErrCode::LockConflict);
    }
    return;
  }
  if (inv.status == InvStatus::Aborted && res.ok) {
    // Late success after abort: answer with an abort update for that chain.
    const auto lock_it = inv.lock_plan.find(res.chain_id);
    std::vector<UpdateSub> subs;
    if (lock_it != inv.lock_plan.end()) {
      for (const LockSub& ls : lock_it->second) subs.push_back({ls.state_addr, {}});
    }
    UpdateReq req{inv.id, res.chain_id, ctx.chain.config().chain_id, false, subs};
    ctx.emit(bridge.address, topic::kUpdateReq, encode_update_req(req));
    ++inv.stale_answers;
  }
}

// ---------------------------------------------------------------------------
// Integrated execution
// ---------------------------------------------------------------------------

namespace {

struct ExecMeter {
  std::uint64_t used = 0;
  std::uint64_t limit = 0;
  void charge(std::uint64_t amount) {
    used += amount;
    if (used > limit) fail(ErrCode::InsufficientGas, "integrated execution out of gas");
  }
  std::uint64_t remaining() const { return limit - used; }
};

// Working copy of every transported snapshot entry; the values left here after
// the walk are exactly the update payloads.
struct WorkingState {
  std::map<std::string, std::uint64_t> values;  // addr/slot/bag or addr/slot/key

  bool has(const std::string& key) const { return values.count(key) > 0; }
};

}  // namespace

void integrated_execute(TxContext& ctx, Invocation& inv) {
  Chain& chain = ctx.chain;
  const DappDescriptor& dapp = chain.bridge().dapps.at(inv.dapp);
  ExecMeter meter{0, inv.exec_gas_limit};
  const GasSchedule& gas = ctx.sim.gas();

  WorkingState work;
  for (const auto& [chain_id, subs] : inv.snapshots) {
    for (const SnapSub& sub : subs) {
      for (const SnapEntry& e : sub.entries) {
        const std::string suffix = e.kind == SnapKind::MapEntry ? "key:" + e.map_key : e.bag_key;
        work.values[working_key(sub.state_addr, e.slot, suffix)] = e.value;
      }
    }
  }

  std::map<std::string, std::uint64_t> env = inv.args;

  auto resolve_read_key = [&](const Address& addr, const std::string& slot,
                              const std::string& node_id) -> std::string {
    const std::string per_node = working_key(addr, slot, node_id);
    if (work.has(per_node)) return per_node;
    const std::string whole = working_key(addr, slot, kWholeBagKey);
    if (work.has(whole)) return whole;
    const std::string read = working_key(addr, slot, kReadBagKey);
    if (work.has(read)) return read;
    fail(ErrCode::ExecFailure, "slot " + slot + " was not locked for node " + node_id);
  };
  auto resolve_write_key = [&](const Address& addr, const std::string& slot,
                               const std::string& node_id) -> std::string {
    const std::string per_node = working_key(addr, slot, node_id);
    if (work.has(per_node)) return per_node;
    const std::string whole = working_key(addr, slot, kWholeBagKey);
    if (work.has(whole)) return whole;
    fail(ErrCode::ExecFailure, "slot " + slot + " is not write-locked for node " + node_id);
  };

  for (const std::string& node_id : inv.analysis.tree.postorder) {
    const DappNode& dn = dapp.nodes.at(node_id);
    const ServiceInfo* svc = ctx.sim.find_service_info(dn.service);
    if (svc == nullptr) fail(ErrCode::UnknownService, dn.service);
    const RegistryEntry* reg = chain.bridge().find_service(dn.service);
    if (reg == nullptr || !reg->verified) fail(ErrCode::MissingLogic, dn.service);
    const auto logic_it = chain.contracts().logic.find(reg->logic_addr);
    if (logic_it == chain.contracts().logic.end()) fail(ErrCode::MissingLogic, dn.service);
    const vm::Program& program = logic_it->second.program;

    const bool remote = svc->home_chain != dapp.execution_chain;
    StateContract* local_state = nullptr;
    if (!remote) {
      const auto st_it = chain.contracts().state.find(svc->state_addr);
      if (st_it == chain.contracts().state.end()) fail(ErrCode::NotFound, "state contract missing");
      local_state = &st_it->second;
    }

    // Inputs.
    std::vector<std::uint64_t> inputs;
    inputs.reserve(program.abi.params.size());
    for (const std::string& param : program.abi.params) {
      const auto bind_it = std::find_if(dn.binds.begin(), dn.binds.end(),
                                        [&](const auto& kv) { return kv.first == param; });
      if (bind_it == dn.binds.end()) fail(ErrCode::AbiMismatch, "unbound parameter " + param);
      const BindSrc& src = bind_it->second;
      switch (src.kind) {
        case BindSrc::Kind::Const:
          inputs.push_back(src.value);
          break;
        case BindSrc::Kind::Arg: {
          const auto env_it = env.find(src.name);
          if (env_it == env.end()) fail(ErrCode::ExecFailure, "missing value " + src.name);
          inputs.push_back(env_it->second);
          break;
        }
        case BindSrc::Kind::Slot: {
          meter.charge(gas.storage_read);
          if (remote) {
            inputs.push_back(work.values.at(resolve_read_key(svc->state_addr, src.name, node_id)));
          } else {
            inputs.push_back(local_state->slot(src.name).uint_value);
          }
          break;
        }
        case BindSrc::Kind::MapEntry: {
          meter.charge(gas.storage_read);
          const auto key_it = inv.args.find(src.key_arg);
          if (key_it == inv.args.end()) fail(ErrCode::ExecFailure, "missing key arg " + src.key_arg);
          const std::string key = std::to_string(key_it->second);
          if (remote) {
            const std::string wk = working_key(svc->state_addr, src.name, "key:" + key);
            if (!work.has(wk)) fail(ErrCode::ExecFailure, "map entry not locked: " + src.name);
            inputs.push_back(work.values.at(wk));
          } else {
            const SlotValue& v = local_state->slot(src.name);
            const auto entry_it = v.map_value.find(key);
            inputs.push_back(entry_it == v.map_value.end() ? 0 : entry_it->second);
          }
          break;
        }
      }
    }

    const vm::ExecResult result = vm::execute(program, inputs, meter.remaining(), gas);
    meter.charge(result.gas_used);

    // Outputs: remote writes land in the working copy, local writes are
    // applied directly (this transaction is the commit point for local state).
    for (const auto& [out_name, dst] : dn.writes) {
      const auto out_it = std::find(program.abi.returns.begin(), program.abi.returns.end(), out_name);
      if (out_it == program.abi.returns.end()) fail(ErrCode::AbiMismatch, "unknown output " + out_name);
      const std::uint64_t value =
          result.outputs[static_cast<std::size_t>(out_it - program.abi.returns.begin())];
      meter.charge(gas.storage_write);
      if (dst.kind == WriteDst::Kind::Slot) {
        if (remote) {
          work.values.at(resolve_write_key(svc->state_addr, dst.slot, node_id)) = value;
        } else {
          local_state->direct_write_uint(inv.id, dst.slot, value);
        }
      } else {
        const auto key_it = inv.args.find(dst.key_arg);
        if (key_it == inv.args.end()) fail(ErrCode::ExecFailure, "missing key arg " + dst.key_arg);
        const std::string key = std::to_string(key_it->second);
        if (remote) {
          const std::string wk = working_key(svc->state_addr, dst.slot, "key:" + key);
          if (!work.has(wk)) fail(ErrCode::ExecFailure, "map entry not locked: " + dst.slot);
          work.values.at(wk) = value;
        } else {
          local_state->direct_write_map(inv.id, dst.slot, key, value);
        }
      }
    }
    for (std::size_t k = 0; k < program.abi.returns.size(); ++k) {
      env[node_id + "." + program.abi.returns[k]] = result.outputs[k];
    }
  }

  // Update payloads mirror the snapshot structure with post-execution values;
  // read snapshots carry nothing back.
  for (const auto& [chain_id, subs] : inv.snapshots) {
    std::vector<UpdateSub>& plan = inv.update_plan[chain_id];
    for (const SnapSub& sub : subs) {
      UpdateSub us{sub.state_addr, {}};
      for (const SnapEntry& e : sub.entries) {
        if (e.kind == SnapKind::UintRead) continue;
        UpdateVal val = e;
        const std::string suffix = e.kind == SnapKind::MapEntry ? "key:" + e.map_key : e.bag_key;
        val.value = work.values.at(working_key(sub.state_addr, e.slot, suffix));
        us.values.push_back(std::move(val));
      }
      plan.push_back(std::move(us));
    }
  }
  inv.env = std::move(env);
  ctx.charge(meter.used);
}

void handle_execute_invocation(TxContext& ctx, const PayloadExecuteInvocation& p) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto it = bridge.invocations.find(p.invocation_id);
  if (it == bridge.invocations.end()) return;
  if (it->second.status != InvStatus::Executing) return;  // superseded (e.g. timeout)
  ctx.invocation_tag = p.invocation_id;

  const ChainStateSnapshot snap = ctx.chain.snapshot_state();
  try {
    integrated_execute(ctx, it->second);
  } catch (const Error&) {
    // Discard the obtained states and every local write, then unlock all
    // locked contracts.
    ctx.chain.restore_state(snap);
    Invocation& inv = ctx.chain.bridge().invocations.at(p.invocation_id);
    abort_invocation(ctx, inv, ErrCode::ExecFailure);
    return;
  }
  Invocation& inv = ctx.chain.bridge().invocations.at(p.invocation_id);
  ctx.sim.metrics().invocations[inv.id].transcript.push_back(
      {ctx.now_ms, ctx.chain.config().chain_id, ctx.height, "executed"});
  inv.update_commit = true;
  if (inv.invoked_chains.empty()) {
    finish_invocation(ctx, inv, true, ErrCode::Ok);
  } else {
    inv.status = InvStatus::Updating;
    emit_update_wave(ctx, inv, true);
  }
}

// ---------------------------------------------------------------------------
// Updating phase
// ---------------------------------------------------------------------------

void dispatch_update(TxContext& ctx, const UpdateReq& req) {
  BridgeState& bridge = ctx.chain.bridge();
  const FinalityView fin = ctx.chain.finality();
  bool applied_commit = false;

  for (const UpdateSub& sub : req.subs) {
    const auto st_it = ctx.chain.contracts().state.find(sub.state_addr);
    if (st_it == ctx.chain.contracts().state.end()) continue;
    StateContract& st = st_it->second;
    if (!st.ever_locked(req.invocation_id)) continue;  // lock was cancelled before it happened
    const StateContract::UpdateOutcome outcome =
        st.update_state(bridge.address, req.invocation_id, req.commit, sub.values, fin);
    ctx.charge(ctx.sim.gas().storage_write * std::max<std::size_t>(1, sub.values.size()));
    applied_commit = applied_commit || outcome.applied_commit;
  }
  // An abort also drains whatever this bridge recorded as locked for the
  // invocation, whether or not the wave named it (baseline segment locks).
  if (!req.commit) {
    const auto locked_it = bridge.locked_states.find(req.invocation_id);
    if (locked_it != bridge.locked_states.end()) {
      for (const Address& addr : locked_it->second) {
        const auto st_it = ctx.chain.contracts().state.find(addr);
        if (st_it == ctx.chain.contracts().state.end()) continue;
        if (st_it->second.ever_locked(req.invocation_id)) {
          st_it->second.update_state(bridge.address, req.invocation_id, false, {}, fin);
        }
      }
    }
  }
  bridge.locked_states.erase(req.invocation_id);
  bridge.baseline_local.erase(req.invocation_id);

  UpdateAck ack{req.invocation_id, ctx.chain.config().chain_id, req.execution_chain,
                req.commit && applied_commit};
  ctx.emit(bridge.address, topic::kUpdateAck, encode_update_ack(ack));
}

void on_update_ack(TxContext& ctx, const UpdateAck& ack) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto it = bridge.invocations.find(ack.invocation_id);
  if (it == bridge.invocations.end()) return;
  Invocation& inv = it->second;
  inv.acks.insert(ack.chain_id);
  if (inv.status != InvStatus::Updating) return;  // post-abort bookkeeping only
  if (inv.escrow_remaining >= kRelayFee) inv.escrow_remaining -= kRelayFee;
  bool all_acked = true;
  for (const std::uint32_t chain_id : inv.invoked_chains) {
    if (inv.acks.count(chain_id) == 0) all_acked = false;
  }
  if (all_acked) finish_invocation(ctx, inv, true, ErrCode::Ok);
}

// ---------------------------------------------------------------------------
// Timeouts
// ---------------------------------------------------------------------------

void check_timeouts(Simulation& sim, Chain& chain, std::uint64_t height, std::uint64_t now_ms,
                    std::vector<Receipt>& receipts) {
  BridgeState& bridge = chain.bridge();
  std::vector<Digest> expired;
  for (const auto& [id, inv] : bridge.invocations) {
    if ((inv.status == InvStatus::Locking || inv.status == InvStatus::Executing) &&
        height > inv.deadline_height) {
      expired.push_back(id);
    }
  }
  if (expired.empty()) return;

  ByteWriter w;
  w.str("timeout-sweep");
  w.u32(chain.config().chain_id);
  w.u64(height);
  Receipt rc;
  rc.tx_hash = sha256(w.view());
  rc.status = TxStatus::Success;
  rc.gas_used = 0;

  Transaction system_tx;
  system_tx.sender = "system";
  system_tx.gas_limit = UINT64_MAX;
  TxContext ctx{sim, chain, system_tx, rc.tx_hash, now_ms, height};
  for (const Digest& id : expired) {
    Invocation& inv = bridge.invocations.at(id);
    ctx.invocation_tag = id;
    abort_invocation(ctx, inv, ErrCode::Timeout);
  }
  rc.logs = std::move(ctx.logs);
  rc.gas_used = 0;
  receipts.push_back(std::move(rc));
}

}  // namespace ix::proto
