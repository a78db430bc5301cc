#include "ix/contracts.hpp"

#include <algorithm>

#include "ix/errors.hpp"

namespace ix {

// --- spec encodings ----------------------------------------------------------

namespace {

void write_slot_decl(ByteWriter& w, const SlotDecl& s) {
  w.str(s.name);
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.u64(s.init);
  w.str(s.init_addr);
  w.str_u64_map(s.init_map);
}

SlotDecl read_slot_decl(ByteReader& r) {
  SlotDecl s;
  s.name = r.str();
  s.kind = static_cast<SlotKind>(r.u8());
  s.init = r.u64();
  s.init_addr = r.str();
  s.init_map = r.str_u64_map();
  return s;
}

void write_bind(ByteWriter& w, const BindSrc& b) {
  w.u8(static_cast<std::uint8_t>(b.kind));
  w.str(b.name);
  w.str(b.key_arg);
  w.u64(b.value);
}

BindSrc read_bind(ByteReader& r) {
  BindSrc b;
  b.kind = static_cast<BindSrc::Kind>(r.u8());
  b.name = r.str();
  b.key_arg = r.str();
  b.value = r.u64();
  return b;
}

void write_entry(ByteWriter& w, const EntryPoint& e) {
  w.str(e.name);
  w.str(e.func);
  w.u32(static_cast<std::uint32_t>(e.binds.size()));
  for (const auto& [param, src] : e.binds) {
    w.str(param);
    write_bind(w, src);
  }
  w.u32(static_cast<std::uint32_t>(e.writes.size()));
  for (const auto& [out, dst] : e.writes) {
    w.str(out);
    w.u8(static_cast<std::uint8_t>(dst.kind));
    w.str(dst.slot);
    w.str(dst.key_arg);
  }
}

EntryPoint read_entry(ByteReader& r) {
  EntryPoint e;
  e.name = r.str();
  e.func = r.str();
  const std::uint32_t nb = r.u32();
  for (std::uint32_t i = 0; i < nb; ++i) {
    std::string param = r.str();
    e.binds.emplace_back(std::move(param), read_bind(r));
  }
  const std::uint32_t nw = r.u32();
  for (std::uint32_t i = 0; i < nw; ++i) {
    std::string out = r.str();
    WriteDst dst;
    dst.kind = static_cast<WriteDst::Kind>(r.u8());
    dst.slot = r.str();
    dst.key_arg = r.str();
    e.writes.emplace_back(std::move(out), dst);
  }
  return e;
}

void write_views(ByteWriter& w, const std::vector<ViewDecl>& views) {
  w.u32(static_cast<std::uint32_t>(views.size()));
  for (const ViewDecl& v : views) {
    w.str(v.name);
    w.str(v.slot);
  }
}

std::vector<ViewDecl> read_views(ByteReader& r) {
  std::vector<ViewDecl> views;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    ViewDecl v;
    v.name = r.str();
    v.slot = r.str();
    views.push_back(v);
  }
  return views;
}

}  // namespace

Bytes encode_monolithic(const MonolithicSpec& spec) {
  ByteWriter w;
  w.str(spec.name);
  w.u32(static_cast<std::uint32_t>(spec.slots.size()));
  for (const SlotDecl& s : spec.slots) write_slot_decl(w, s);
  w.u64(spec.lock_size);
  w.u32(static_cast<std::uint32_t>(spec.funcs.size()));
  for (const auto& [name, prog] : spec.funcs) {
    w.str(name);
    w.bytes(vm::encode_program(prog));
  }
  write_views(w, spec.views);
  w.u32(static_cast<std::uint32_t>(spec.entries.size()));
  for (const EntryPoint& e : spec.entries) write_entry(w, e);
  return w.take();
}

MonolithicSpec decode_monolithic(ByteView data) {
  ByteReader r(data);
  MonolithicSpec spec;
  spec.name = r.str();
  const std::uint32_t ns = r.u32();
  for (std::uint32_t i = 0; i < ns; ++i) spec.slots.push_back(read_slot_decl(r));
  spec.lock_size = r.u64();
  const std::uint32_t nf = r.u32();
  for (std::uint32_t i = 0; i < nf; ++i) {
    std::string name = r.str();
    spec.funcs.emplace_back(std::move(name), vm::decode_program(r.bytes()));
  }
  spec.views = read_views(r);
  const std::uint32_t ne = r.u32();
  for (std::uint32_t i = 0; i < ne; ++i) spec.entries.push_back(read_entry(r));
  r.expect_done();
  return spec;
}

Bytes encode_state_spec(const StateSpec& spec) {
  ByteWriter w;
  w.str(spec.name);
  w.u32(static_cast<std::uint32_t>(spec.slots.size()));
  for (const SlotDecl& s : spec.slots) write_slot_decl(w, s);
  w.u64(spec.lock_size);
  write_views(w, spec.views);
  w.u32(static_cast<std::uint32_t>(spec.entries.size()));
  for (const EntryPoint& e : spec.entries) write_entry(w, e);
  return w.take();
}

StateSpec decode_state_spec(ByteView data) {
  ByteReader r(data);
  StateSpec spec;
  spec.name = r.str();
  const std::uint32_t ns = r.u32();
  for (std::uint32_t i = 0; i < ns; ++i) spec.slots.push_back(read_slot_decl(r));
  spec.lock_size = r.u64();
  spec.views = read_views(r);
  const std::uint32_t ne = r.u32();
  for (std::uint32_t i = 0; i < ne; ++i) spec.entries.push_back(read_entry(r));
  r.expect_done();
  return spec;
}

SlotValue SlotValue::from_decl(const SlotDecl& decl) {
  SlotValue v;
  v.kind = decl.kind;
  v.uint_value = decl.init;
  v.addr_value = decl.init_addr;
  v.map_value = decl.init_map;
  return v;
}

// --- state contract ----------------------------------------------------------

StateContract::StateContract(StateSpec spec, Address logic_addr, Address bridge_addr,
                             AccountId deployer)
    : spec_(std::move(spec)),
      logic_addr_(logic_addr),
      bridge_addr_(bridge_addr),
      deployer_(std::move(deployer)),
      lock_size_(spec_.lock_size) {
  for (const SlotDecl& decl : spec_.slots) storage_[decl.name] = SlotValue::from_decl(decl);
}

const SlotValue& StateContract::slot(const std::string& name) const {
  const auto it = storage_.find(name);
  if (it == storage_.end()) fail(ErrCode::NotFound, "unknown slot " + name);
  return it->second;
}

SlotValue& StateContract::slot_mut(const std::string& name) {
  const auto it = storage_.find(name);
  if (it == storage_.end()) fail(ErrCode::NotFound, "unknown slot " + name);
  return it->second;
}

std::uint64_t StateContract::view(const std::string& view_name) const {
  for (const ViewDecl& v : spec_.views) {
    if (v.name == view_name) return slot(v.slot).uint_value;
  }
  fail(ErrCode::NotFound, "unknown view " + view_name);
}

void StateContract::set_lock_size(const AccountId& caller, std::uint64_t size) {
  if (caller != deployer_) fail(ErrCode::Unauthorized, "lock_size is deployer-settable only");
  if (size == 0) fail(ErrCode::ConfigError, "lock_size must be positive");
  lock_size_ = size;
}

std::uint64_t StateContract::pooled(const std::string& slot_name, const FinalityView& fin) const {
  std::uint64_t total = 0;
  for (const auto& [inv, bags] : lockpool_) {
    for (const LockBag& bag : bags) {
      if (bag.slot == slot_name && !bag.whole && !bag_expired(bag, fin)) total += bag.amount;
    }
  }
  return total;
}

std::uint64_t StateContract::available(const std::string& slot_name, const FinalityView& fin) const {
  const SlotValue& v = slot(slot_name);
  if (v.kind != SlotKind::Uint) fail(ErrCode::ConfigError, "available() on non-uint slot");
  return v.uint_value - pooled(slot_name, fin);
}

bool StateContract::whole_locked(const std::string& slot_name, const FinalityView& fin) const {
  for (const auto& [inv, bags] : lockpool_) {
    for (const LockBag& bag : bags) {
      if (bag.slot == slot_name && bag.whole && !bag_expired(bag, fin)) return true;
    }
  }
  return false;
}

bool StateContract::has_bags(const std::string& slot_name, const FinalityView& fin) const {
  for (const auto& [inv, bags] : lockpool_) {
    for (const LockBag& bag : bags) {
      if (bag.slot == slot_name && !bag_expired(bag, fin)) return true;
    }
  }
  return false;
}

std::size_t StateContract::live_bag_count(const FinalityView& fin) const {
  std::size_t n = 0;
  for (const auto& [inv, bags] : lockpool_) {
    for (const LockBag& bag : bags) {
      if (!bag_expired(bag, fin)) ++n;
    }
  }
  return n;
}

std::vector<SnapEntry> StateContract::lock_state(const Address& caller,
                                                 const std::vector<LockAsk>& asks,
                                                 const Digest& invocation_id,
                                                 std::uint64_t expiry_height,
                                                 const FinalityView& fin) {
  if (caller != bridge_addr_) fail(ErrCode::Unauthorized, "caller is not the bridging contract");
  std::vector<SnapEntry> snapshot;
  for (const LockAsk& ask : asks) {
    const SlotValue& v = slot(ask.slot);
    LockBag bag;
    bag.invocation_id = invocation_id;
    bag.bag_key = ask.bag_key;
    bag.slot = ask.slot;
    bag.expiry_height = expiry_height;
    if (ask.read) {
      if (v.kind != SlotKind::Uint) fail(ErrCode::ConfigError, "read lock on non-uint slot");
      if (whole_locked(ask.slot, fin)) {
        fail(ErrCode::AlreadyLocked, "slot " + ask.slot + " whole-locked");
      }
      bag.read = true;
      snapshot.push_back({ask.slot, ask.bag_key, SnapKind::UintRead, "", v.uint_value});
    } else if (ask.whole) {
      if (has_bags(ask.slot, fin)) fail(ErrCode::AlreadyLocked, "slot " + ask.slot + " has bags");
      bag.whole = true;
      if (v.kind == SlotKind::Uint) {
        snapshot.push_back({ask.slot, ask.bag_key, SnapKind::UintWhole, "", v.uint_value});
      } else if (v.kind == SlotKind::Map) {
        bag.map_keys = ask.map_keys;
        for (const std::string& key : ask.map_keys) {
          const auto it = v.map_value.find(key);
          const std::uint64_t entry = it == v.map_value.end() ? 0 : it->second;
          snapshot.push_back({ask.slot, ask.bag_key, SnapKind::MapEntry, key, entry});
        }
      } else {
        fail(ErrCode::ConfigError, "addr slots cannot be locked");
      }
    } else {
      if (v.kind != SlotKind::Uint) {
        fail(ErrCode::ConfigError, "fine-grained lock on non-uint slot " + ask.slot);
      }
      if (ask.amount == 0) fail(ErrCode::ConfigError, "zero-amount lock");
      // Dynamic-use states pool in multiples of lock_size.
      std::uint64_t amount = ask.amount;
      if (ask.dynamic && lock_size_ > 1) {
        amount = ((amount + lock_size_ - 1) / lock_size_) * lock_size_;
      }
      if (whole_locked(ask.slot, fin)) fail(ErrCode::AlreadyLocked, "slot " + ask.slot + " whole-locked");
      if (available(ask.slot, fin) < amount) {
        fail(ErrCode::InsufficientAvailable, "slot " + ask.slot);
      }
      bag.amount = amount;
      snapshot.push_back({ask.slot, ask.bag_key, SnapKind::UintAmount, "", amount});
    }
    lockpool_[invocation_id].push_back(std::move(bag));
  }
  ever_locked_.insert(invocation_id);
  return snapshot;
}

StateContract::UpdateOutcome StateContract::update_state(const Address& caller,
                                                         const Digest& invocation_id, bool commit,
                                                         const std::vector<UpdateVal>& values,
                                                         const FinalityView& fin) {
  if (caller != bridge_addr_) fail(ErrCode::Unauthorized, "caller is not the bridging contract");
  UpdateOutcome outcome;
  if (settled_.count(invocation_id) > 0) {
    outcome.already_settled = true;
    return outcome;
  }
  if (ever_locked_.count(invocation_id) == 0) {
    fail(ErrCode::UnknownInvocation, "no bags ever existed for invocation");
  }

  auto& bags = lockpool_[invocation_id];
  std::vector<AppliedDelta> deltas;
  if (commit) {
    for (const UpdateVal& val : values) {
      if (val.kind == SnapKind::UintRead) continue;  // nothing to write back
      const auto bag_it = std::find_if(bags.begin(), bags.end(), [&](const LockBag& b) {
        return b.slot == val.slot && b.bag_key == val.bag_key;
      });
      if (bag_it == bags.end() || bag_expired(*bag_it, fin)) {
        // The pooled portion already expired back into availability; applying
        // a stale commit could double-spend the slot, so it is dropped and
        // surfaced to the audit.
        ++outcome.expired_commit_entries;
        ++expired_commit_total_;
        continue;
      }
      SlotValue& v = slot_mut(val.slot);
      switch (val.kind) {
        case SnapKind::UintWhole: {
          deltas.push_back({val.slot, "", v.uint_value, val.value});
          v.uint_value = val.value;
          break;
        }
        case SnapKind::UintAmount: {
          if (val.value > bag_it->amount) fail(ErrCode::ConfigError, "leftover exceeds pooled");
          const std::uint64_t consumed = bag_it->amount - val.value;
          if (v.uint_value < consumed) fail(ErrCode::ConfigError, "slot conservation violated");
          deltas.push_back({val.slot, "", v.uint_value, v.uint_value - consumed});
          v.uint_value -= consumed;
          break;
        }
        case SnapKind::MapEntry: {
          const auto prev = v.map_value.find(val.map_key);
          deltas.push_back({val.slot, val.map_key,
                            prev == v.map_value.end() ? 0 : prev->second, val.value});
          v.map_value[val.map_key] = val.value;
          break;
        }
        case SnapKind::UintRead:
          break;
      }
    }
    outcome.applied_commit = true;
  }
  lockpool_.erase(invocation_id);
  settled_[invocation_id] = commit;
  history_.push_back({invocation_id, commit && outcome.applied_commit, values, std::move(deltas)});
  return outcome;
}

void StateContract::direct_write_uint(const Digest& invocation_id, const std::string& slot_name,
                                      std::uint64_t value) {
  SlotValue& v = slot_mut(slot_name);
  if (v.kind != SlotKind::Uint) fail(ErrCode::AbiMismatch, "direct write to non-uint slot");
  AppliedUpdate up;
  up.invocation_id = invocation_id;
  up.commit = true;
  up.deltas.push_back({slot_name, "", v.uint_value, value});
  v.uint_value = value;
  history_.push_back(std::move(up));
}

void StateContract::direct_write_map(const Digest& invocation_id, const std::string& slot_name,
                                     const std::string& key, std::uint64_t value) {
  SlotValue& v = slot_mut(slot_name);
  if (v.kind != SlotKind::Map) fail(ErrCode::AbiMismatch, "direct map write to non-map slot");
  const auto prev = v.map_value.find(key);
  AppliedUpdate up;
  up.invocation_id = invocation_id;
  up.commit = true;
  up.deltas.push_back({slot_name, key, prev == v.map_value.end() ? 0 : prev->second, value});
  v.map_value[key] = value;
  history_.push_back(std::move(up));
}

// --- entry-point plumbing ------------------------------------------------------

std::vector<std::uint64_t> resolve_entry_inputs(const EntryPoint& entry, const vm::Abi& abi,
                                                const std::map<std::string, SlotValue>& storage,
                                                const std::map<std::string, std::uint64_t>& args,
                                                std::uint64_t* reads) {
  auto arg_value = [&](const std::string& name) {
    const auto it = args.find(name);
    if (it == args.end()) fail(ErrCode::AbiMismatch, "missing call argument " + name);
    return it->second;
  };
  auto slot_value = [&](const std::string& name) -> const SlotValue& {
    const auto it = storage.find(name);
    if (it == storage.end()) fail(ErrCode::NotFound, "unknown slot " + name);
    return it->second;
  };

  std::vector<std::uint64_t> inputs;
  inputs.reserve(abi.params.size());
  for (const std::string& param : abi.params) {
    const auto bind_it =
        std::find_if(entry.binds.begin(), entry.binds.end(),
                     [&](const auto& kv) { return kv.first == param; });
    if (bind_it == entry.binds.end()) fail(ErrCode::AbiMismatch, "unbound parameter " + param);
    const BindSrc& src = bind_it->second;
    switch (src.kind) {
      case BindSrc::Kind::Arg:
        inputs.push_back(arg_value(src.name));
        break;
      case BindSrc::Kind::Const:
        inputs.push_back(src.value);
        break;
      case BindSrc::Kind::Slot: {
        const SlotValue& v = slot_value(src.name);
        if (v.kind != SlotKind::Uint) fail(ErrCode::AbiMismatch, "slot bind on non-uint slot");
        inputs.push_back(v.uint_value);
        if (reads != nullptr) ++*reads;
        break;
      }
      case BindSrc::Kind::MapEntry: {
        const SlotValue& v = slot_value(src.name);
        if (v.kind != SlotKind::Map) fail(ErrCode::AbiMismatch, "map bind on non-map slot");
        const std::string key = std::to_string(arg_value(src.key_arg));
        const auto it = v.map_value.find(key);
        inputs.push_back(it == v.map_value.end() ? 0 : it->second);
        if (reads != nullptr) ++*reads;
        break;
      }
    }
  }
  return inputs;
}

std::uint64_t apply_entry_writes(const EntryPoint& entry, const vm::Abi& abi,
                                 std::map<std::string, SlotValue>& storage,
                                 const std::map<std::string, std::uint64_t>& args,
                                 const std::vector<std::uint64_t>& outputs) {
  std::uint64_t writes = 0;
  for (const auto& [out_name, dst] : entry.writes) {
    const auto out_it = std::find(abi.returns.begin(), abi.returns.end(), out_name);
    if (out_it == abi.returns.end()) fail(ErrCode::AbiMismatch, "unknown output " + out_name);
    const std::uint64_t value = outputs[static_cast<std::size_t>(out_it - abi.returns.begin())];
    const auto slot_it = storage.find(dst.slot);
    if (slot_it == storage.end()) fail(ErrCode::NotFound, "unknown slot " + dst.slot);
    if (dst.kind == WriteDst::Kind::Slot) {
      if (slot_it->second.kind != SlotKind::Uint) fail(ErrCode::AbiMismatch, "write to non-uint slot");
      slot_it->second.uint_value = value;
    } else {
      if (slot_it->second.kind != SlotKind::Map) fail(ErrCode::AbiMismatch, "map write to non-map slot");
      const auto key_it = args.find(dst.key_arg);
      if (key_it == args.end()) fail(ErrCode::AbiMismatch, "missing key argument " + dst.key_arg);
      slot_it->second.map_value[std::to_string(key_it->second)] = value;
    }
    ++writes;
  }
  return writes;
}

namespace {

const EntryPoint* find_entry(const std::vector<EntryPoint>& entries, const std::string& name) {
  for (const EntryPoint& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

}  // namespace

CallOutcome call_monolithic(MonolithicContract& contract, const std::string& entry_name,
                            const std::map<std::string, std::uint64_t>& args,
                            std::uint64_t gas_limit, const GasSchedule& gas) {
  const EntryPoint* entry = find_entry(contract.spec.entries, entry_name);
  if (entry == nullptr) fail(ErrCode::NotFound, "unknown entry " + entry_name);
  const auto func_it =
      std::find_if(contract.spec.funcs.begin(), contract.spec.funcs.end(),
                   [&](const auto& kv) { return kv.first == entry->func; });
  if (func_it == contract.spec.funcs.end()) fail(ErrCode::NotFound, "unknown func " + entry->func);
  const vm::Program& program = func_it->second;

  std::uint64_t reads = 0;
  std::vector<std::uint64_t> inputs =
      resolve_entry_inputs(*entry, program.abi, contract.storage, args, &reads);

  vm::StorageHook hook;
  hook.load = [&](std::uint64_t idx) -> std::uint64_t {
    if (idx >= contract.spec.slots.size()) fail(ErrCode::Revert, "sload slot index out of range");
    const SlotDecl& decl = contract.spec.slots[idx];
    const SlotValue& v = contract.storage.at(decl.name);
    if (v.kind != SlotKind::Uint) fail(ErrCode::Revert, "sload on non-uint slot");
    return v.uint_value;
  };
  hook.store = [&](std::uint64_t idx, std::uint64_t value) {
    if (idx >= contract.spec.slots.size()) fail(ErrCode::Revert, "sstore slot index out of range");
    const SlotDecl& decl = contract.spec.slots[idx];
    SlotValue& v = contract.storage.at(decl.name);
    if (v.kind != SlotKind::Uint) fail(ErrCode::Revert, "sstore on non-uint slot");
    v.uint_value = value;
  };

  vm::ExecResult result = vm::execute(program, inputs, gas_limit, gas, &hook);
  const std::uint64_t writes =
      apply_entry_writes(*entry, program.abi, contract.storage, args, result.outputs);

  CallOutcome outcome;
  outcome.outputs = std::move(result.outputs);
  outcome.gas_used = result.gas_used + reads * gas.storage_read + writes * gas.storage_write;
  return outcome;
}

CallOutcome call_state_entry(StateContract& contract, const vm::Program& logic,
                             const std::string& entry_name,
                             const std::map<std::string, std::uint64_t>& args,
                             std::uint64_t gas_limit, const GasSchedule& gas) {
  const EntryPoint* entry = find_entry(contract.spec().entries, entry_name);
  if (entry == nullptr) fail(ErrCode::NotFound, "unknown entry " + entry_name);

  std::uint64_t reads = 0;
  auto storage = contract.storage_snapshot();
  std::vector<std::uint64_t> inputs = resolve_entry_inputs(*entry, logic.abi, storage, args, &reads);
  vm::ExecResult result = vm::execute(logic, inputs, gas_limit, gas, nullptr);

  std::map<std::string, SlotValue> mutated = storage;
  const std::uint64_t writes = apply_entry_writes(*entry, logic.abi, mutated, args, result.outputs);
  for (auto& [name, value] : mutated) {
    if (!(value == storage.at(name))) contract.slot_mut(name) = value;
  }

  CallOutcome outcome;
  outcome.outputs = std::move(result.outputs);
  outcome.gas_used = result.gas_used + reads * gas.storage_read + writes * gas.storage_write;
  return outcome;
}

}  // namespace ix
