#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ix/contracts.hpp"

namespace ix {

// Amount expressions are evaluated against user transaction arguments, so
// input-derived lock amounts are known before anything leaves the execution
// chain: base + sum(coeff * arg).
struct AmountExpr {
  std::uint64_t base = 0;
  std::vector<std::pair<std::uint64_t, std::string>> terms;

  std::uint64_t eval(const std::map<std::string, std::uint64_t>& args) const;
  bool operator==(const AmountExpr&) const = default;
};

enum class LockModeKind : std::uint8_t {
  Whole = 0,
  Amount = 1,   // exact, input-derived
  Dynamic = 2,  // rounded up to a lock_size multiple
  Read = 3,     // value snapshot, shared with other readers and amount locks
};

struct LockSpec {
  std::string slot;
  LockModeKind mode = LockModeKind::Whole;
  AmountExpr expr;                     // Amount / Dynamic
  std::vector<std::string> key_args;   // Map slots: args naming the entries used

  bool operator==(const LockSpec&) const = default;
};

// One call in a cross-chain dApp. `children` are dependency edges: every child
// executes before its parent (post-order), and binds may reference the outputs
// of any earlier node as "<node>.<output>".
struct DappNode {
  std::string id;
  std::string service;
  std::string entry;  // entry point of the service's state contract (baseline path)
  std::vector<std::string> children;
  std::vector<LockSpec> locks;
  std::vector<std::pair<std::string, BindSrc>> binds;    // param -> source
  std::vector<std::pair<std::string, WriteDst>> writes;  // output -> slot
};

// BindSrc reuse: Kind::Slot names a slot of the node's own state contract;
// a name containing '.' under Kind::Arg refers to another node's output.
inline bool is_node_output_ref(const BindSrc& src) {
  return src.kind == BindSrc::Kind::Arg && src.name.find('.') != std::string::npos;
}

struct DappDescriptor {
  std::string name;
  std::uint32_t execution_chain = 0;
  std::uint32_t timeout_blocks = 10;
  std::uint64_t exec_gas_limit = 2'000'000;
  std::string root;
  std::map<std::string, DappNode> nodes;
};

struct CallTreeNode {
  std::string id;
  std::string service;
  std::uint32_t home_chain = 0;
  std::optional<Address> logic_addr;
  std::vector<std::string> children;
};

struct CallTree {
  std::string root;
  std::map<std::string, CallTreeNode> nodes;
  std::uint32_t depth = 0;                // longest root-to-leaf path, in edges
  std::vector<std::string> postorder;     // execution order
};

struct StateRequirement {
  std::string node_id;
  std::uint32_t chain = 0;
  std::string service;
  Address state_addr;
  LockSpec spec;
};

// Requirements grouped by invoked chain (execution-chain state is mutated
// directly during integrated execution and never locked remotely).
struct StateRequirementSet {
  std::map<std::uint32_t, std::vector<StateRequirement>> by_chain;
};

struct CloneRef {
  std::string service_id;
  std::uint32_t origin_chain = 0;
  Address origin_addr;

  bool operator==(const CloneRef&) const = default;
};

struct Analysis {
  CallTree tree;
  StateRequirementSet requirements;
  std::vector<CloneRef> clone_list;
};

// Where a service lives and whether its logic is usable on a given chain.
struct ServiceInfo {
  std::string service_id;
  std::uint32_t home_chain = 0;
  Address state_addr;
  Address logic_addr;  // on the home chain
};

class ServiceDirectory {
 public:
  virtual ~ServiceDirectory() = default;
  virtual const ServiceInfo* find_service(const std::string& service_id) const = 0;
  // True when the service's logic is already registered on `chain`.
  virtual bool registered_on(const std::string& service_id, std::uint32_t chain) const = 0;
};

Analysis analyze(const DappDescriptor& dapp, const ServiceDirectory& services);

}  // namespace ix
