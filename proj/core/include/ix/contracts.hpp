#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ix/hash.hpp"
#include "ix/vm.hpp"

namespace ix {

// ---------------------------------------------------------------------------
// Contract specifications (deployable artifacts)
// ---------------------------------------------------------------------------

enum class SlotKind : std::uint8_t { Uint = 0, Addr = 1, Map = 2 };

struct SlotDecl {
  std::string name;
  SlotKind kind = SlotKind::Uint;
  std::uint64_t init = 0;                          // Uint slots
  std::string init_addr;                           // Addr slots
  std::map<AccountId, std::uint64_t> init_map;     // Map slots

  bool operator==(const SlotDecl&) const = default;
};

struct ViewDecl {
  std::string name;
  std::string slot;

  bool operator==(const ViewDecl&) const = default;
};

// How an entry point feeds its program and where results land.
struct BindSrc {
  enum class Kind : std::uint8_t { Arg = 0, Const = 1, Slot = 2, MapEntry = 3 };
  Kind kind = Kind::Arg;
  std::string name;     // arg name or slot name
  std::string key_arg;  // MapEntry: the arg holding the map key
  std::uint64_t value = 0;

  bool operator==(const BindSrc&) const = default;
};

struct WriteDst {
  enum class Kind : std::uint8_t { Slot = 0, MapEntry = 1 };
  Kind kind = Kind::Slot;
  std::string slot;
  std::string key_arg;

  bool operator==(const WriteDst&) const = default;
};

struct EntryPoint {
  std::string name;
  std::string func;  // program name (monolithic) — state contracts use the paired logic
  std::vector<std::pair<std::string, BindSrc>> binds;   // program param -> source
  std::vector<std::pair<std::string, WriteDst>> writes; // program output -> destination

  bool operator==(const EntryPoint&) const = default;
};

// A traditional single contract: storage plus functions in one deployable.
struct MonolithicSpec {
  std::string name;
  std::vector<SlotDecl> slots;
  std::uint64_t lock_size = 1;
  std::vector<std::pair<std::string, vm::Program>> funcs;
  std::vector<ViewDecl> views;
  std::vector<EntryPoint> entries;

  bool operator==(const MonolithicSpec&) const = default;
};

// The stationary half of a decoupled contract: storage, views, lock plumbing,
// and entry points that call the paired logic program.
struct StateSpec {
  std::string name;
  std::vector<SlotDecl> slots;
  std::uint64_t lock_size = 1;
  std::vector<ViewDecl> views;
  std::vector<EntryPoint> entries;

  bool operator==(const StateSpec&) const = default;
};

Bytes encode_monolithic(const MonolithicSpec& spec);
MonolithicSpec decode_monolithic(ByteView data);
Bytes encode_state_spec(const StateSpec& spec);
StateSpec decode_state_spec(ByteView data);

// ---------------------------------------------------------------------------
// Runtime slot values and the lock pool
// ---------------------------------------------------------------------------

struct SlotValue {
  SlotKind kind = SlotKind::Uint;
  std::uint64_t uint_value = 0;
  std::string addr_value;
  std::map<AccountId, std::uint64_t> map_value;

  static SlotValue from_decl(const SlotDecl& decl);
  bool operator==(const SlotValue&) const = default;
};

inline constexpr const char* kWholeBagKey = "__whole";
inline constexpr const char* kReadBagKey = "__read";

struct LockBag {
  Digest invocation_id;
  std::string bag_key;  // call-tree node id for amount bags, "__whole"/"__read" otherwise
  std::string slot;
  bool whole = false;
  bool read = false;    // shared: conflicts only with whole locks
  std::uint64_t amount = 0;            // pooled portion (amount bags)
  std::uint64_t expiry_height = 0;     // bag self-expires once this height finalizes
  std::vector<std::string> map_keys;   // map entries snapshotted under a whole lock

  bool operator==(const LockBag&) const = default;
};

// One lock request against one slot of one state contract. Dynamic asks carry
// the estimated need; the contract rounds the pooled portion up to its own
// live lock_size.
struct LockAsk {
  std::string slot;
  std::string bag_key;
  bool whole = false;
  bool read = false;
  bool dynamic = false;
  std::uint64_t amount = 0;
  std::vector<std::string> map_keys;
};

enum class SnapKind : std::uint8_t { UintWhole = 0, UintAmount = 1, MapEntry = 2, UintRead = 3 };

struct SnapEntry {
  std::string slot;
  std::string bag_key;
  SnapKind kind = SnapKind::UintWhole;
  std::string map_key;
  std::uint64_t value = 0;

  bool operator==(const SnapEntry&) const = default;
};

using UpdateVal = SnapEntry;  // same shape: slot/bag/kind/key plus the new value

struct AppliedDelta {
  std::string slot;
  std::string map_key;  // empty for scalar slots
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
};

struct AppliedUpdate {
  Digest invocation_id;
  bool commit = false;
  std::vector<UpdateVal> values;
  std::vector<AppliedDelta> deltas;  // exact storage transitions, for the audit replay
};

struct FinalityView {
  std::uint64_t head_height = 0;
  std::uint32_t confirmation_depth = 0;

  bool finalized(std::uint64_t height) const {
    return height <= head_height && head_height - height >= confirmation_depth;
  }
};

// ---------------------------------------------------------------------------
// Deployed contract instances
// ---------------------------------------------------------------------------

struct LogicContract {
  Bytes bytecode;
  vm::Program program;
  std::uint64_t deployed_height = 0;
};

class StateContract {
 public:
  StateContract() = default;
  StateContract(StateSpec spec, Address logic_addr, Address bridge_addr, AccountId deployer);

  const StateSpec& spec() const { return spec_; }
  const Address& logic_addr() const { return logic_addr_; }
  const Address& bridge_addr() const { return bridge_addr_; }
  const AccountId& deployer() const { return deployer_; }

  const SlotValue& slot(const std::string& name) const;
  SlotValue& slot_mut(const std::string& name);
  std::uint64_t view(const std::string& view_name) const;

  // Deployer-only lock_size reconfiguration.
  void set_lock_size(const AccountId& caller, std::uint64_t size);
  std::uint64_t lock_size() const { return lock_size_; }

  // Pooled-but-unexpired amount per uint slot; committed value minus this is
  // what remains lockable.
  std::uint64_t pooled(const std::string& slot, const FinalityView& fin) const;
  std::uint64_t available(const std::string& slot, const FinalityView& fin) const;
  bool whole_locked(const std::string& slot, const FinalityView& fin) const;
  bool has_bags(const std::string& slot, const FinalityView& fin) const;

  // Caller must be the registered bridging contract. Throws Unauthorized /
  // AlreadyLocked / InsufficientAvailable; the caller owns batch atomicity.
  std::vector<SnapEntry> lock_state(const Address& caller, const std::vector<LockAsk>& asks,
                                    const Digest& invocation_id, std::uint64_t expiry_height,
                                    const FinalityView& fin);

  struct UpdateOutcome {
    bool already_settled = false;
    bool applied_commit = false;
    std::uint32_t expired_commit_entries = 0;  // commit values whose bag had expired
  };

  // Commit replaces whole values, removes the consumed part of amount bags,
  // and writes map entries; abort just drops the bags. Idempotent per
  // invocation. Throws Unauthorized / UnknownInvocation.
  UpdateOutcome update_state(const Address& caller, const Digest& invocation_id, bool commit,
                             const std::vector<UpdateVal>& values, const FinalityView& fin);

  // Execution-chain-local writes made inside an integrated-execution
  // transaction (that transaction is their commit point). Recorded in the
  // applied-update history so the audit replay covers them.
  void direct_write_uint(const Digest& invocation_id, const std::string& slot, std::uint64_t value);
  void direct_write_map(const Digest& invocation_id, const std::string& slot,
                        const std::string& key, std::uint64_t value);

  const std::map<Digest, std::vector<LockBag>>& lockpool() const { return lockpool_; }
  std::size_t live_bag_count(const FinalityView& fin) const;
  const std::vector<AppliedUpdate>& history() const { return history_; }
  bool ever_locked(const Digest& invocation_id) const { return ever_locked_.count(invocation_id) > 0; }
  const std::map<Digest, bool>& settled() const { return settled_; }
  std::uint32_t expired_commit_total() const { return expired_commit_total_; }

  std::map<std::string, SlotValue> storage_snapshot() const { return storage_; }

 private:
  bool bag_expired(const LockBag& bag, const FinalityView& fin) const {
    return fin.finalized(bag.expiry_height);
  }

  StateSpec spec_;
  Address logic_addr_;
  Address bridge_addr_;
  AccountId deployer_;
  std::uint64_t lock_size_ = 1;
  std::map<std::string, SlotValue> storage_;
  std::map<Digest, std::vector<LockBag>> lockpool_;
  std::set<Digest> ever_locked_;
  std::map<Digest, bool> settled_;  // invocation -> outcome (true = commit)
  std::vector<AppliedUpdate> history_;
  std::uint32_t expired_commit_total_ = 0;
};

struct MonolithicContract {
  MonolithicSpec spec;
  std::map<std::string, SlotValue> storage;
  AccountId deployer;
  Bytes bytecode;
  std::uint64_t deployed_height = 0;
};

struct Contracts {
  std::map<Address, LogicContract> logic;
  std::map<Address, StateContract> state;
  std::map<Address, MonolithicContract> mono;
};

// Resolve an entry's input bindings against storage + call args.
std::vector<std::uint64_t> resolve_entry_inputs(const EntryPoint& entry, const vm::Abi& abi,
                                                const std::map<std::string, SlotValue>& storage,
                                                const std::map<std::string, std::uint64_t>& args,
                                                std::uint64_t* reads);

// Apply an entry's output writes to storage. Returns the number of writes.
std::uint64_t apply_entry_writes(const EntryPoint& entry, const vm::Abi& abi,
                                 std::map<std::string, SlotValue>& storage,
                                 const std::map<std::string, std::uint64_t>& args,
                                 const std::vector<std::uint64_t>& outputs);

// Direct local call of a monolithic contract entry (storage-backed execution).
struct CallOutcome {
  std::vector<std::uint64_t> outputs;
  std::uint64_t gas_used = 0;
};
CallOutcome call_monolithic(MonolithicContract& contract, const std::string& entry_name,
                            const std::map<std::string, std::uint64_t>& args,
                            std::uint64_t gas_limit, const GasSchedule& gas);

// Direct local call of a state-contract entry through its paired logic.
CallOutcome call_state_entry(StateContract& contract, const vm::Program& logic,
                             const std::string& entry_name,
                             const std::map<std::string, std::uint64_t>& args,
                             std::uint64_t gas_limit, const GasSchedule& gas);

}  // namespace ix
