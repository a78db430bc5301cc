#include "ix/calltree.hpp"

#include <algorithm>
#include <set>

#include "ix/errors.hpp"

namespace ix {

std::uint64_t AmountExpr::eval(const std::map<std::string, std::uint64_t>& args) const {
  std::uint64_t total = base;
  for (const auto& [coeff, arg] : terms) {
    const auto it = args.find(arg);
    if (it == args.end()) fail(ErrCode::ConfigError, "amount expression needs argument " + arg);
    total += coeff * it->second;
  }
  return total;
}

namespace {

struct Walker {
  const DappDescriptor& dapp;
  const ServiceDirectory& services;
  CallTree tree;
  StateRequirementSet requirements;
  std::set<std::string> cloned_seen;
  std::vector<CloneRef> clone_list;
  std::set<std::string> on_path;
  std::set<std::string> done;

  std::uint32_t walk(const std::string& id) {
    if (on_path.count(id) > 0) fail(ErrCode::CyclicCalls, "cycle through node " + id);
    if (done.count(id) > 0) return depth_of(id);
    const auto node_it = dapp.nodes.find(id);
    if (node_it == dapp.nodes.end()) fail(ErrCode::ConfigError, "unknown node " + id);
    const DappNode& node = node_it->second;

    const ServiceInfo* info = services.find_service(node.service);
    if (info == nullptr) fail(ErrCode::UnknownService, node.service);

    on_path.insert(id);
    std::uint32_t child_depth = 0;
    for (const std::string& child : node.children) {
      child_depth = std::max(child_depth, walk(child) + 1);
    }
    on_path.erase(id);
    done.insert(id);

    CallTreeNode tn;
    tn.id = id;
    tn.service = node.service;
    tn.home_chain = info->home_chain;
    if (info->home_chain == dapp.execution_chain) tn.logic_addr = info->logic_addr;
    tn.children = node.children;
    tree.nodes[id] = std::move(tn);
    tree.postorder.push_back(id);
    depths[id] = child_depth;

    if (info->home_chain != dapp.execution_chain) {
      for (const LockSpec& lock : node.locks) {
        StateRequirement req;
        req.node_id = id;
        req.chain = info->home_chain;
        req.service = node.service;
        req.state_addr = info->state_addr;
        req.spec = lock;
        requirements.by_chain[info->home_chain].push_back(std::move(req));
      }
      if (!services.registered_on(node.service, dapp.execution_chain) &&
          cloned_seen.insert(node.service).second) {
        clone_list.push_back({node.service, info->home_chain, info->logic_addr});
      }
    }
    return child_depth;
  }

  std::uint32_t depth_of(const std::string& id) const { return depths.at(id); }

  std::map<std::string, std::uint32_t> depths;
};

}  // namespace

Analysis analyze(const DappDescriptor& dapp, const ServiceDirectory& services) {
  if (dapp.nodes.find(dapp.root) == dapp.nodes.end()) {
    fail(ErrCode::ConfigError, "descriptor root " + dapp.root + " undefined");
  }
  Walker walker{dapp, services};
  walker.tree.root = dapp.root;
  walker.tree.depth = walker.walk(dapp.root);

  // Binds may only reference outputs of nodes that execute earlier.
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < walker.tree.postorder.size(); ++i) {
    order[walker.tree.postorder[i]] = i;
  }
  for (const std::string& id : walker.tree.postorder) {
    const DappNode& node = dapp.nodes.at(id);
    for (const auto& [param, src] : node.binds) {
      if (!is_node_output_ref(src)) continue;
      const std::string ref = src.name.substr(0, src.name.find('.'));
      const auto it = order.find(ref);
      if (it == order.end() || it->second >= order.at(id)) {
        fail(ErrCode::ConfigError,
             "node " + id + " binds output of " + ref + " which does not execute earlier");
      }
    }
  }

  Analysis a;
  a.tree = std::move(walker.tree);
  a.requirements = std::move(walker.requirements);
  a.clone_list = std::move(walker.clone_list);
  return a;
}

}  // namespace ix
