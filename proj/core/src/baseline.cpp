#include <algorithm>

#include "handlers_internal.hpp"

namespace ix::proto {

// Sequential cross-chain baseline: each call-tree segment executes on its home
// chain under whole-contract locks, intermediate results hop back to the
// coordinator, and a final commit/abort wave settles every touched chain.

namespace {

std::uint64_t seg_expiry_height(const TxContext& ctx, std::uint64_t expiry_time_ms) {
  const std::uint64_t block_time = ctx.chain.config().block_time_ms;
  const std::uint64_t remaining = expiry_time_ms > ctx.now_ms ? expiry_time_ms - ctx.now_ms : 0;
  return ctx.height + std::max<std::uint64_t>(1, (remaining + block_time - 1) / block_time);
}

std::vector<LockAsk> whole_contract_asks(const StateSpec& spec) {
  std::vector<LockAsk> asks;
  for (const SlotDecl& decl : spec.slots) {
    if (decl.kind == SlotKind::Addr) continue;  // metadata, not lockable state
    LockAsk ask;
    ask.slot = decl.name;
    ask.whole = true;
    ask.bag_key = kWholeBagKey;
    asks.push_back(std::move(ask));
  }
  return asks;
}

// Resolve the call arguments a segment needs: Arg/Const binds become call
// args named after the entry's own parameters; Slot/MapEntry binds stay local
// to the contract's entry point.
std::map<std::string, std::uint64_t> resolve_call_args(
    const DappNode& dn, const std::map<std::string, std::uint64_t>& env) {
  std::map<std::string, std::uint64_t> args;
  for (const auto& [param, src] : dn.binds) {
    if (src.kind == BindSrc::Kind::Const) {
      args[param] = src.value;
    } else if (src.kind == BindSrc::Kind::Arg) {
      const auto it = env.find(src.name);
      if (it == env.end()) fail(ErrCode::ExecFailure, "missing value " + src.name);
      args[param] = it->second;
    }
  }
  return args;
}

// Execute one node's entry against (overlay over committed storage); returns
// outputs and appends provisional writes.
CallOutcome run_segment_entry(TxContext& ctx, StateContract& st, const vm::Program& logic,
                              const std::string& entry_name,
                              const std::map<std::string, std::uint64_t>& call_args,
                              std::map<std::string, SlotValue>& overlay,
                              std::vector<UpdateVal>& out_writes) {
  const EntryPoint* entry = nullptr;
  for (const EntryPoint& e : st.spec().entries) {
    if (e.name == entry_name) entry = &e;
  }
  if (entry == nullptr) fail(ErrCode::NotFound, "unknown entry " + entry_name);

  // Storage view: provisional values shadow committed ones.
  std::map<std::string, SlotValue> view = st.storage_snapshot();
  for (const auto& [slot, value] : overlay) view[slot] = value;

  std::uint64_t reads = 0;
  const std::vector<std::uint64_t> inputs =
      resolve_entry_inputs(*entry, logic.abi, view, call_args, &reads);
  const vm::ExecResult result =
      vm::execute(logic, inputs, ctx.tx.gas_limit - ctx.gas_used, ctx.sim.gas());

  std::map<std::string, SlotValue> mutated = view;
  const std::uint64_t writes = apply_entry_writes(*entry, logic.abi, mutated, call_args, result.outputs);
  for (const auto& [slot, value] : mutated) {
    if (value == view.at(slot)) continue;
    overlay[slot] = value;
    if (value.kind == SlotKind::Uint) {
      out_writes.push_back({slot, kWholeBagKey, SnapKind::UintWhole, "", value.uint_value});
    } else if (value.kind == SlotKind::Map) {
      const SlotValue& before = view.at(slot);
      for (const auto& [key, v] : value.map_value) {
        const auto prev = before.map_value.find(key);
        if (prev == before.map_value.end() || prev->second != v) {
          out_writes.push_back({slot, kWholeBagKey, SnapKind::MapEntry, key, v});
        }
      }
    }
  }

  CallOutcome outcome;
  outcome.outputs = result.outputs;
  outcome.gas_used =
      result.gas_used + reads * ctx.sim.gas().storage_read + writes * ctx.sim.gas().storage_write;
  return outcome;
}

void merge_update_vals(std::vector<UpdateSub>& plan, const Address& state_addr,
                       const std::vector<UpdateVal>& vals) {
  auto sub_it = std::find_if(plan.begin(), plan.end(),
                             [&](const UpdateSub& s) { return s.state_addr == state_addr; });
  if (sub_it == plan.end()) {
    plan.push_back({state_addr, {}});
    sub_it = plan.end() - 1;
  }
  for (const UpdateVal& val : vals) {
    auto prev = std::find_if(sub_it->values.begin(), sub_it->values.end(), [&](const UpdateVal& v) {
      return v.slot == val.slot && v.map_key == val.map_key && v.kind == val.kind;
    });
    if (prev == sub_it->values.end()) {
      sub_it->values.push_back(val);
    } else {
      prev->value = val.value;  // later segments override earlier provisional writes
    }
  }
}

void baseline_finalize(TxContext& ctx, Invocation& inv);

// Run local segments until the next remote one (or the end); emits the next
// SEG_REQ or finalizes.
void baseline_advance(TxContext& ctx, Invocation& inv) {
  Chain& chain = ctx.chain;
  const DappDescriptor& dapp = chain.bridge().dapps.at(inv.dapp);
  const FinalityView fin = chain.finality();

  while (inv.segment_pos < inv.segments.size()) {
    const std::string& node_id = inv.segments[inv.segment_pos];
    const DappNode& dn = dapp.nodes.at(node_id);
    const ServiceInfo* svc = ctx.sim.find_service_info(dn.service);
    if (svc == nullptr) fail(ErrCode::UnknownService, dn.service);

    if (svc->home_chain != dapp.execution_chain) {
      SegReq req;
      req.invocation_id = inv.id;
      req.dest_chain = svc->home_chain;
      req.execution_chain = dapp.execution_chain;
      req.node_id = node_id;
      req.service_id = dn.service;
      req.entry = dn.entry;
      req.args = resolve_call_args(dn, inv.env);
      req.expiry_time_ms = inv.expiry_time_ms;
      ctx.emit(chain.bridge().address, topic::kSegReq, encode_seg_req(req));
      ++inv.seg_msgs;
      if (inv.escrow_remaining >= kRelayFee) inv.escrow_remaining -= kRelayFee;
      return;
    }

    // Local segment: whole-lock the contract on first touch, run against the
    // local overlay, keep writes provisional until the commit wave.
    const auto st_it = chain.contracts().state.find(svc->state_addr);
    if (st_it == chain.contracts().state.end()) fail(ErrCode::NotFound, "state contract missing");
    StateContract& st = st_it->second;
    if (!st.ever_locked(inv.id) || st.lockpool().count(inv.id) == 0) {
      const std::uint64_t expiry = seg_expiry_height(ctx, inv.expiry_time_ms);
      st.lock_state(chain.bridge().address, whole_contract_asks(st.spec()), inv.id, expiry, fin);
      chain.bridge().locked_states[inv.id].push_back(svc->state_addr);
      ctx.charge(ctx.sim.gas().storage_write);
    }
    const auto logic_it = chain.contracts().logic.find(st.logic_addr());
    if (logic_it == chain.contracts().logic.end()) fail(ErrCode::MissingLogic, dn.service);

    std::vector<UpdateVal> writes;
    auto& overlay = inv.local_overlay[svc->state_addr];
    const CallOutcome outcome =
        run_segment_entry(ctx, st, logic_it->second.program, dn.entry,
                          resolve_call_args(dn, inv.env), overlay, writes);
    ctx.charge(outcome.gas_used);
    merge_update_vals(inv.update_plan[dapp.execution_chain], svc->state_addr, writes);

    for (std::size_t k = 0; k < logic_it->second.program.abi.returns.size(); ++k) {
      inv.env[node_id + "." + logic_it->second.program.abi.returns[k]] = outcome.outputs[k];
    }
    ++inv.segment_pos;
  }
  baseline_finalize(ctx, inv);
}

// All segments done: apply local provisional writes, release local locks, and
// send the commit wave to every touched remote chain.
void baseline_finalize(TxContext& ctx, Invocation& inv) {
  Chain& chain = ctx.chain;
  const std::uint32_t exec_chain = chain.config().chain_id;
  const FinalityView fin = chain.finality();

  const auto local_it = inv.update_plan.find(exec_chain);
  if (local_it != inv.update_plan.end()) {
    for (const UpdateSub& sub : local_it->second) {
      auto st_it = chain.contracts().state.find(sub.state_addr);
      if (st_it == chain.contracts().state.end()) continue;
      st_it->second.update_state(chain.bridge().address, inv.id, true, sub.values, fin);
      ctx.charge(ctx.sim.gas().storage_write * std::max<std::size_t>(1, sub.values.size()));
    }
  }
  // Locked-but-unwritten local contracts still release.
  const auto locked_it = chain.bridge().locked_states.find(inv.id);
  if (locked_it != chain.bridge().locked_states.end()) {
    for (const Address& addr : locked_it->second) {
      auto st_it = chain.contracts().state.find(addr);
      if (st_it == chain.contracts().state.end()) continue;
      if (st_it->second.lockpool().count(inv.id) > 0) {
        st_it->second.update_state(chain.bridge().address, inv.id, true, {}, fin);
      }
    }
    chain.bridge().locked_states.erase(locked_it);
  }
  inv.local_overlay.clear();

  if (inv.invoked_chains.empty()) {
    inv.update_commit = true;
    finish_invocation(ctx, inv, true, ErrCode::Ok);
    return;
  }
  inv.update_commit = true;
  inv.status = InvStatus::Updating;
  emit_update_wave(ctx, inv, true);
}

}  // namespace

void baseline_handle_invoke(TxContext& ctx, const PayloadInvoke& p, const Digest& invocation_id) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto dapp_it = bridge.dapps.find(p.dapp);
  if (dapp_it == bridge.dapps.end()) fail(ErrCode::NotFound, "unknown dapp " + p.dapp);
  const DappDescriptor& dapp = dapp_it->second;

  // The baseline runs each segment on its home chain, so no clones or
  // cross-chain verification are needed; the analysis is reused for the call
  // order and the set of touched chains.
  class HomeDirectory : public ServiceDirectory {
   public:
    explicit HomeDirectory(const Simulation& sim) : sim_(sim) {}
    const ServiceInfo* find_service(const std::string& id) const override {
      return sim_.find_service_info(id);
    }
    bool registered_on(const std::string&, std::uint32_t) const override { return true; }

   private:
    const Simulation& sim_;
  } dir(ctx.sim);
  Analysis analysis = analyze(dapp, dir);
  ctx.charge(ctx.sim.gas().instruction * analysis.tree.postorder.size());

  Invocation inv;
  inv.id = invocation_id;
  inv.dapp = p.dapp;
  inv.user = ctx.tx.sender;
  inv.args = p.args;
  inv.baseline = true;
  inv.ta = p.ta;
  inv.fgsl = p.fgsl;
  inv.exec_gas_limit = p.exec_gas_limit > 0 ? p.exec_gas_limit : dapp.exec_gas_limit;
  inv.submit_ms = ctx.now_ms;
  inv.submit_height = ctx.height;
  inv.segments = analysis.tree.postorder;
  inv.env = p.args;
  inv.analysis = std::move(analysis);

  std::size_t remote_segments = 0;
  for (const std::string& node_id : inv.segments) {
    const ServiceInfo* svc = ctx.sim.find_service_info(inv.analysis.tree.nodes.at(node_id).service);
    if (svc == nullptr) fail(ErrCode::UnknownService, node_id);
    if (svc->home_chain != dapp.execution_chain) {
      ++remote_segments;
      inv.invoked_chains.insert(svc->home_chain);
    }
  }

  const std::uint32_t timeout = effective_timeout(bridge.max_timeout_blocks, dapp.timeout_blocks);
  inv.deadline_height = ctx.height + timeout;
  inv.expiry_time_ms = invocation_expiry_time(ctx.chain, ctx.now_ms, timeout);

  const std::uint64_t expected_msgs = 2 * remote_segments + 2 * inv.invoked_chains.size();
  const std::uint64_t required = expected_msgs * kRelayFee;
  if (p.fee_escrow < required) fail(ErrCode::InsufficientFee, "escrow below expected fees");
  Account& user = ctx.chain.account(ctx.tx.sender);
  if (user.balance < p.fee_escrow) fail(ErrCode::InsufficientFee, "balance below escrow");
  user.balance -= p.fee_escrow;
  inv.fee_escrow = p.fee_escrow;
  inv.escrow_remaining = p.fee_escrow;

  inv.status = InvStatus::Executing;  // segment phase
  ctx.charge(ctx.sim.gas().storage_write);
  ctx.sim.metrics().invocations[invocation_id].transcript.push_back(
      {ctx.now_ms, ctx.chain.config().chain_id, ctx.height, "submitted"});

  Invocation& stored = bridge.invocations[invocation_id] = std::move(inv);
  baseline_advance(ctx, stored);
}

void baseline_on_seg_req(TxContext& ctx, const SegReq& req) {
  Chain& chain = ctx.chain;
  BridgeState& bridge = chain.bridge();
  const FinalityView fin = chain.finality();

  SegResult result;
  result.invocation_id = req.invocation_id;
  result.chain_id = chain.config().chain_id;
  result.execution_chain = req.execution_chain;
  result.node_id = req.node_id;

  try {
    const ServiceInfo* svc = ctx.sim.find_service_info(req.service_id);
    if (svc == nullptr || svc->home_chain != chain.config().chain_id) {
      fail(ErrCode::UnknownService, req.service_id);
    }
    const auto st_it = chain.contracts().state.find(svc->state_addr);
    if (st_it == chain.contracts().state.end()) fail(ErrCode::NotFound, "state contract missing");
    StateContract& st = st_it->second;

    BaselineLocal& local = bridge.baseline_local[req.invocation_id];
    if (local.locked.count(svc->state_addr) == 0) {
      const std::uint64_t expiry = seg_expiry_height(ctx, req.expiry_time_ms);
      st.lock_state(bridge.address, whole_contract_asks(st.spec()), req.invocation_id, expiry, fin);
      local.locked.insert(svc->state_addr);
      bridge.locked_states[req.invocation_id].push_back(svc->state_addr);
      ctx.charge(ctx.sim.gas().storage_write);
    }
    const auto logic_it = chain.contracts().logic.find(st.logic_addr());
    if (logic_it == chain.contracts().logic.end()) fail(ErrCode::MissingLogic, req.service_id);

    std::vector<UpdateVal> writes;
    auto& overlay = local.overlay[svc->state_addr];
    const CallOutcome outcome = run_segment_entry(ctx, st, logic_it->second.program, req.entry,
                                                  req.args, overlay, writes);
    ctx.charge(outcome.gas_used);

    result.ok = true;
    for (std::size_t k = 0; k < logic_it->second.program.abi.returns.size(); ++k) {
      result.outputs[req.node_id + "." + logic_it->second.program.abi.returns[k]] =
          outcome.outputs[k];
    }
    if (!writes.empty()) result.writes.push_back({svc->state_addr, std::move(writes)});
  } catch (const Error& e) {
    result.ok = false;
    result.reason = e.code();
    result.outputs.clear();
    result.writes.clear();
  }
  ctx.emit(bridge.address, topic::kSegResult, encode_seg_result(result));
}

void baseline_on_seg_result(TxContext& ctx, const SegResult& res) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto it = bridge.invocations.find(res.invocation_id);
  if (it == bridge.invocations.end()) return;
  Invocation& inv = it->second;

  if (inv.status != InvStatus::Executing) {
    if (inv.status == InvStatus::Aborted && res.ok) {
      // Stale segment success: release that chain's locks.
      UpdateReq req{inv.id, res.chain_id, ctx.chain.config().chain_id, false, {}};
      for (const UpdateSub& sub : res.writes) req.subs.push_back({sub.state_addr, {}});
      ctx.emit(bridge.address, topic::kUpdateReq, encode_update_req(req));
      ++inv.stale_answers;
    }
    return;
  }
  if (inv.escrow_remaining >= kRelayFee) inv.escrow_remaining -= kRelayFee;

  if (!res.ok) {
    const ErrCode reason =
        (res.reason == ErrCode::AlreadyLocked || res.reason == ErrCode::InsufficientAvailable)
            ? ErrCode::LockConflict
            : ErrCode::ExecFailure;
    abort_invocation(ctx, inv, reason);
    return;
  }
  for (const auto& [name, value] : res.outputs) inv.env[name] = value;
  for (const UpdateSub& sub : res.writes) {
    merge_update_vals(inv.update_plan[res.chain_id], sub.state_addr, sub.values);
  }
  ++inv.segment_pos;
  baseline_advance(ctx, inv);
}

}  // namespace ix::proto
