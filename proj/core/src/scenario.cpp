#include "ix/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ix/lsd.hpp"
#include "ix/proto.hpp"

namespace ix {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFunding = 1'000'000'000'000ULL;

// ---------------------------------------------------------------------------
// JSON codec
// ---------------------------------------------------------------------------

json bind_to_json(const BindSrc& src) {
  switch (src.kind) {
    case BindSrc::Kind::Arg: return json{{"arg", src.name}};
    case BindSrc::Kind::Const: return json{{"const", src.value}};
    case BindSrc::Kind::Slot: return json{{"slot", src.name}};
    case BindSrc::Kind::MapEntry: return json{{"map", src.name}, {"key", src.key_arg}};
  }
  return {};
}

BindSrc bind_from_json(const json& j, const std::string& where) {
  BindSrc src;
  if (j.contains("arg")) {
    src.kind = BindSrc::Kind::Arg;
    src.name = j.at("arg").get<std::string>();
  } else if (j.contains("const")) {
    src.kind = BindSrc::Kind::Const;
    src.value = j.at("const").get<std::uint64_t>();
  } else if (j.contains("slot")) {
    src.kind = BindSrc::Kind::Slot;
    src.name = j.at("slot").get<std::string>();
  } else if (j.contains("map")) {
    src.kind = BindSrc::Kind::MapEntry;
    src.name = j.at("map").get<std::string>();
    src.key_arg = j.at("key").get<std::string>();
  } else {
    fail(ErrCode::ConfigError, where + ": bind needs one of arg/const/slot/map");
  }
  return src;
}

json write_dst_to_json(const WriteDst& dst) {
  if (dst.kind == WriteDst::Kind::Slot) return json{{"slot", dst.slot}};
  return json{{"map", dst.slot}, {"key", dst.key_arg}};
}

WriteDst write_dst_from_json(const json& j, const std::string& where) {
  WriteDst dst;
  if (j.contains("slot")) {
    dst.kind = WriteDst::Kind::Slot;
    dst.slot = j.at("slot").get<std::string>();
  } else if (j.contains("map")) {
    dst.kind = WriteDst::Kind::MapEntry;
    dst.slot = j.at("map").get<std::string>();
    dst.key_arg = j.at("key").get<std::string>();
  } else {
    fail(ErrCode::ConfigError, where + ": write needs slot or map");
  }
  return dst;
}

const char* slot_kind_name(SlotKind kind) {
  switch (kind) {
    case SlotKind::Uint: return "uint";
    case SlotKind::Addr: return "addr";
    case SlotKind::Map: return "map";
  }
  return "uint";
}

SlotKind slot_kind_from(const std::string& s, const std::string& where) {
  if (s == "uint") return SlotKind::Uint;
  if (s == "addr") return SlotKind::Addr;
  if (s == "map") return SlotKind::Map;
  fail(ErrCode::ConfigError, where + ": unknown slot kind " + s);
}

json contract_to_json(const MonolithicSpec& spec) {
  json slots = json::array();
  for (const SlotDecl& s : spec.slots) {
    json slot{{"name", s.name}, {"kind", slot_kind_name(s.kind)}};
    if (s.kind == SlotKind::Uint) slot["init"] = s.init;
    if (s.kind == SlotKind::Addr) slot["init"] = s.init_addr;
    if (s.kind == SlotKind::Map) {
      json m = json::object();
      for (const auto& [k, v] : s.init_map) m[k] = v;
      slot["init"] = m;
    }
    slots.push_back(slot);
  }
  json funcs = json::array();
  for (const auto& [name, prog] : spec.funcs) {
    funcs.push_back({{"name", name}, {"asm", vm::disassemble(prog)}});
  }
  json views = json::array();
  for (const ViewDecl& v : spec.views) views.push_back({{"name", v.name}, {"slot", v.slot}});
  json entries = json::array();
  for (const EntryPoint& e : spec.entries) {
    json binds = json::object();
    for (const auto& [param, src] : e.binds) binds[param] = bind_to_json(src);
    json writes = json::object();
    for (const auto& [out, dst] : e.writes) writes[out] = write_dst_to_json(dst);
    entries.push_back({{"name", e.name}, {"func", e.func}, {"binds", binds}, {"writes", writes}});
  }
  return json{{"name", spec.name}, {"slots", slots},   {"lock_size", spec.lock_size},
              {"funcs", funcs},    {"views", views},   {"entries", entries}};
}

MonolithicSpec contract_from_json(const json& j, const std::string& where) {
  MonolithicSpec spec;
  spec.name = j.at("name").get<std::string>();
  for (const json& js : j.at("slots")) {
    SlotDecl s;
    s.name = js.at("name").get<std::string>();
    s.kind = slot_kind_from(js.value("kind", "uint"), where);
    if (js.contains("init")) {
      if (s.kind == SlotKind::Uint) s.init = js.at("init").get<std::uint64_t>();
      if (s.kind == SlotKind::Addr) s.init_addr = js.at("init").get<std::string>();
      if (s.kind == SlotKind::Map) {
        for (const auto& [k, v] : js.at("init").items()) s.init_map[k] = v.get<std::uint64_t>();
      }
    }
    spec.slots.push_back(std::move(s));
  }
  spec.lock_size = j.value("lock_size", 1ULL);
  for (const json& jf : j.at("funcs")) {
    spec.funcs.emplace_back(jf.at("name").get<std::string>(),
                            vm::assemble(jf.at("asm").get<std::string>()));
  }
  if (j.contains("views")) {
    for (const json& jv : j.at("views")) {
      spec.views.push_back({jv.at("name").get<std::string>(), jv.at("slot").get<std::string>()});
    }
  }
  for (const json& je : j.at("entries")) {
    EntryPoint e;
    e.name = je.at("name").get<std::string>();
    e.func = je.at("func").get<std::string>();
    for (const auto& [param, src] : je.at("binds").items()) {
      e.binds.emplace_back(param, bind_from_json(src, where + "/entry " + e.name));
    }
    if (je.contains("writes")) {
      for (const auto& [out, dst] : je.at("writes").items()) {
        e.writes.emplace_back(out, write_dst_from_json(dst, where + "/entry " + e.name));
      }
    }
    spec.entries.push_back(std::move(e));
  }
  return spec;
}

const char* lock_mode_name(LockModeKind mode) {
  switch (mode) {
    case LockModeKind::Whole: return "whole";
    case LockModeKind::Amount: return "amount";
    case LockModeKind::Dynamic: return "dynamic";
    case LockModeKind::Read: return "read";
  }
  return "whole";
}

LockModeKind lock_mode_from(const std::string& s, const std::string& where) {
  if (s == "whole") return LockModeKind::Whole;
  if (s == "amount") return LockModeKind::Amount;
  if (s == "dynamic") return LockModeKind::Dynamic;
  if (s == "read") return LockModeKind::Read;
  fail(ErrCode::ConfigError, where + ": unknown lock mode " + s);
}

json dapp_to_json(const DappDescriptor& dapp) {
  json nodes = json::object();
  for (const auto& [id, node] : dapp.nodes) {
    json locks = json::array();
    for (const LockSpec& lock : node.locks) {
      json jl{{"slot", lock.slot}, {"mode", lock_mode_name(lock.mode)}};
      if (lock.mode == LockModeKind::Amount || lock.mode == LockModeKind::Dynamic) {
        jl["base"] = lock.expr.base;
        json terms = json::object();
        for (const auto& [coeff, arg] : lock.expr.terms) terms[arg] = coeff;
        jl["terms"] = terms;
      }
      if (!lock.key_args.empty()) jl["keys"] = lock.key_args;
      locks.push_back(jl);
    }
    json binds = json::object();
    for (const auto& [param, src] : node.binds) binds[param] = bind_to_json(src);
    json writes = json::object();
    for (const auto& [out, dst] : node.writes) writes[out] = write_dst_to_json(dst);
    nodes[id] = json{{"service", node.service}, {"entry", node.entry},
                     {"children", node.children}, {"locks", locks},
                     {"binds", binds},            {"writes", writes}};
  }
  return json{{"name", dapp.name},
              {"execution_chain", dapp.execution_chain},
              {"timeout_blocks", dapp.timeout_blocks},
              {"exec_gas_limit", dapp.exec_gas_limit},
              {"root", dapp.root},
              {"nodes", nodes}};
}

DappDescriptor dapp_from_json(const json& j) {
  DappDescriptor dapp;
  dapp.name = j.at("name").get<std::string>();
  dapp.execution_chain = j.at("execution_chain").get<std::uint32_t>();
  dapp.timeout_blocks = j.value("timeout_blocks", 10U);
  dapp.exec_gas_limit = j.value("exec_gas_limit", 2'000'000ULL);
  dapp.root = j.at("root").get<std::string>();
  for (const auto& [id, jn] : j.at("nodes").items()) {
    DappNode node;
    node.id = id;
    node.service = jn.at("service").get<std::string>();
    node.entry = jn.value("entry", "");
    if (jn.contains("children")) node.children = jn.at("children").get<std::vector<std::string>>();
    if (jn.contains("locks")) {
      for (const json& jl : jn.at("locks")) {
        LockSpec lock;
        lock.slot = jl.at("slot").get<std::string>();
        lock.mode = lock_mode_from(jl.value("mode", "whole"), "dapp " + dapp.name);
        lock.expr.base = jl.value("base", 0ULL);
        if (jl.contains("terms")) {
          for (const auto& [arg, coeff] : jl.at("terms").items()) {
            lock.expr.terms.emplace_back(coeff.get<std::uint64_t>(), arg);
          }
        }
        if (jl.contains("keys")) lock.key_args = jl.at("keys").get<std::vector<std::string>>();
        node.locks.push_back(std::move(lock));
      }
    }
    for (const auto& [param, src] : jn.at("binds").items()) {
      node.binds.emplace_back(param, bind_from_json(src, "dapp " + dapp.name + "/" + id));
    }
    if (jn.contains("writes")) {
      for (const auto& [out, dst] : jn.at("writes").items()) {
        node.writes.emplace_back(out, write_dst_from_json(dst, "dapp " + dapp.name + "/" + id));
      }
    }
    dapp.nodes[id] = std::move(node);
  }
  return dapp;
}

const char* behavior_name(RelayerBehavior b) {
  switch (b) {
    case RelayerBehavior::Honest: return "honest";
    case RelayerBehavior::Drop: return "drop";
    case RelayerBehavior::Tamper: return "tamper";
    case RelayerBehavior::PrematureClone: return "premature_clone";
  }
  return "honest";
}

RelayerBehavior behavior_from(const std::string& s, const std::string& where) {
  if (s == "honest") return RelayerBehavior::Honest;
  if (s == "drop") return RelayerBehavior::Drop;
  if (s == "tamper") return RelayerBehavior::Tamper;
  if (s == "premature_clone") return RelayerBehavior::PrematureClone;
  fail(ErrCode::ConfigError, where + ": unknown relayer behavior " + s);
}

MonolithicSpec builtin_contract(const std::string& name) {
  if (name == "hotel") return samples::hotel_contract();
  if (name == "train") return samples::train_contract();
  if (name == "agency") return samples::agency_contract();
  fail(ErrCode::ConfigError, "unknown builtin contract " + name);
}

}  // namespace

ScenarioConfig parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrCode::ConfigError, std::string("scenario json: ") + e.what());
  }
  try {
    ScenarioConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.seed = j.value("seed", 1ULL);
    cfg.protocol = j.value("protocol", "integratex");
    if (cfg.protocol != "integratex" && cfg.protocol != "baseline") {
      fail(ErrCode::ConfigError, "protocol must be integratex or baseline");
    }
    cfg.ta = j.value("ta", true);
    cfg.fgsl = j.value("fgsl", true);
    cfg.max_sim_ms = j.value("max_sim_ms", 3'600'000ULL);
    cfg.bridge_timeout_blocks = j.value("bridge_timeout_blocks", 20U);
    if (j.contains("gas")) {
      const json& g = j.at("gas");
      cfg.gas.instruction = g.value("instruction", cfg.gas.instruction);
      cfg.gas.deploy_base = g.value("deploy_base", cfg.gas.deploy_base);
      cfg.gas.bytecode_byte = g.value("bytecode_byte", cfg.gas.bytecode_byte);
      cfg.gas.storage_slot = g.value("storage_slot", cfg.gas.storage_slot);
      cfg.gas.storage_write = g.value("storage_write", cfg.gas.storage_write);
      cfg.gas.storage_read = g.value("storage_read", cfg.gas.storage_read);
      cfg.gas.event_base = g.value("event_base", cfg.gas.event_base);
      cfg.gas.event_byte = g.value("event_byte", cfg.gas.event_byte);
      cfg.gas.tx_base = g.value("tx_base", cfg.gas.tx_base);
      cfg.gas.proof_step = g.value("proof_step", cfg.gas.proof_step);
    }
    for (const json& jc : j.at("chains")) {
      ChainConfig c;
      c.chain_id = jc.at("chain_id").get<std::uint32_t>();
      c.block_time_ms = jc.value("block_time_ms", 5000ULL);
      c.max_txs_per_block = jc.value("max_txs_per_block", 4096U);
      c.confirmation_depth = jc.value("confirmation_depth", 1U);
      c.fault_threshold_note = jc.value("fault_threshold_note", std::string("t < 1/3"));
      cfg.chains.push_back(std::move(c));
    }
    if (j.contains("relayers")) {
      for (const json& jr : j.at("relayers")) {
        RelayerConfig r;
        r.relayer_id = jr.at("id").get<std::string>();
        r.behavior = behavior_from(jr.value("behavior", "honest"), "relayer " + r.relayer_id);
        r.p = jr.value("p", 0.0);
        r.poll_interval_ms = jr.value("poll_interval_ms", 0ULL);
        r.poll_offset_ms = jr.value("poll_offset_ms", 0ULL);
        r.premature_service = jr.value("premature_service", std::string());
        r.premature_target_chain = jr.value("premature_target_chain", 0U);
        cfg.relayers.push_back(std::move(r));
      }
    }
    if (j.contains("services")) {
      for (const json& js : j.at("services")) {
        ServiceCfg s;
        s.chain_id = js.at("chain_id").get<std::uint32_t>();
        if (js.contains("builtin")) {
          s.contract = builtin_contract(js.at("builtin").get<std::string>());
        } else {
          s.contract = contract_from_json(js.at("contract"), "service");
        }
        cfg.services.push_back(std::move(s));
      }
    }
    if (j.contains("dapps")) {
      for (const json& jd : j.at("dapps")) cfg.dapps.push_back(dapp_from_json(jd));
    }
    if (j.contains("workload")) {
      for (const json& jw : j.at("workload")) {
        WorkloadCfg w;
        w.dapp = jw.at("dapp").get<std::string>();
        w.user = jw.value("user", std::string("user-0"));
        w.at_ms = jw.value("at_ms", 0ULL);
        w.count = jw.value("count", 1U);
        if (jw.contains("args")) {
          for (const auto& [k, v] : jw.at("args").items()) w.args[k] = v.get<std::uint64_t>();
        }
        w.retry_on_conflict = jw.value("retry_on_conflict", false);
        w.exec_gas_limit = jw.value("exec_gas_limit", 0ULL);
        cfg.workload.push_back(std::move(w));
      }
    }
    if (j.contains("assertions")) {
      for (const json& ja : j.at("assertions")) cfg.assertions.push_back({ja.at("type").get<std::string>()});
    }

    bool any_honest = cfg.relayers.empty();
    for (const RelayerConfig& r : cfg.relayers) {
      if (r.behavior == RelayerBehavior::Honest || r.behavior == RelayerBehavior::PrematureClone) {
        any_honest = true;
      }
    }
    if (!any_honest) fail(ErrCode::ConfigError, "at least one relayer must be honest");
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrCode::ConfigError, std::string("scenario json: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["protocol"] = cfg.protocol;
  j["ta"] = cfg.ta;
  j["fgsl"] = cfg.fgsl;
  j["max_sim_ms"] = cfg.max_sim_ms;
  j["bridge_timeout_blocks"] = cfg.bridge_timeout_blocks;
  j["gas"] = json{{"instruction", cfg.gas.instruction},
                  {"deploy_base", cfg.gas.deploy_base},
                  {"bytecode_byte", cfg.gas.bytecode_byte},
                  {"storage_slot", cfg.gas.storage_slot},
                  {"storage_write", cfg.gas.storage_write},
                  {"storage_read", cfg.gas.storage_read},
                  {"event_base", cfg.gas.event_base},
                  {"event_byte", cfg.gas.event_byte},
                  {"tx_base", cfg.gas.tx_base},
                  {"proof_step", cfg.gas.proof_step}};
  j["chains"] = json::array();
  for (const ChainConfig& c : cfg.chains) {
    j["chains"].push_back({{"chain_id", c.chain_id},
                           {"block_time_ms", c.block_time_ms},
                           {"max_txs_per_block", c.max_txs_per_block},
                           {"confirmation_depth", c.confirmation_depth},
                           {"fault_threshold_note", c.fault_threshold_note}});
  }
  j["relayers"] = json::array();
  for (const RelayerConfig& r : cfg.relayers) {
    json jr{{"id", r.relayer_id}, {"behavior", behavior_name(r.behavior)}};
    if (r.p != 0.0) jr["p"] = r.p;
    if (r.poll_interval_ms != 0) jr["poll_interval_ms"] = r.poll_interval_ms;
    if (r.poll_offset_ms != 0) jr["poll_offset_ms"] = r.poll_offset_ms;
    if (!r.premature_service.empty()) {
      jr["premature_service"] = r.premature_service;
      jr["premature_target_chain"] = r.premature_target_chain;
    }
    j["relayers"].push_back(jr);
  }
  j["services"] = json::array();
  for (const ServiceCfg& s : cfg.services) {
    j["services"].push_back({{"chain_id", s.chain_id}, {"contract", contract_to_json(s.contract)}});
  }
  j["dapps"] = json::array();
  for (const DappDescriptor& d : cfg.dapps) j["dapps"].push_back(dapp_to_json(d));
  j["workload"] = json::array();
  for (const WorkloadCfg& w : cfg.workload) {
    json jw{{"dapp", w.dapp}, {"user", w.user},   {"at_ms", w.at_ms},
            {"count", w.count}, {"retry_on_conflict", w.retry_on_conflict}};
    json args = json::object();
    for (const auto& [k, v] : w.args) args[k] = v;
    jw["args"] = args;
    if (w.exec_gas_limit != 0) jw["exec_gas_limit"] = w.exec_gas_limit;
    j["workload"].push_back(jw);
  }
  j["assertions"] = json::array();
  for (const AssertionCfg& a : cfg.assertions) j["assertions"].push_back({{"type", a.type}});
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrCode::ConfigError, "cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

// ---------------------------------------------------------------------------
// Workload driver
// ---------------------------------------------------------------------------

namespace {

class UserDriver : public Actor {
 public:
  struct Item {
    WorkloadCfg cfg;
    std::uint64_t due_ms = 0;
    std::uint64_t first_submit_ms = 0;
    bool submitted = false;
    bool done = false;
    bool failed = false;
    Digest current_tx;
    Digest current_inv;
    Digest committed_inv;
    std::uint64_t committed_ms = 0;
    std::uint32_t retries = 0;
  };

  UserDriver(const ScenarioConfig& cfg, std::uint32_t execution_chain, std::uint64_t poll_ms)
      : Actor("user-driver"), config_(cfg), execution_chain_(execution_chain), poll_ms_(poll_ms) {
    next_wake_ms = UINT64_MAX;  // armed by start()
  }

  void start(Simulation& sim, std::uint64_t phase_start_ms) {
    for (const WorkloadCfg& w : config_.workload) {
      for (std::uint32_t i = 0; i < w.count; ++i) {
        Item item;
        item.cfg = w;
        item.cfg.user = w.user + (w.count > 1 ? "-" + std::to_string(i) : "");
        item.due_ms = phase_start_ms + w.at_ms;
        items_.push_back(std::move(item));
      }
    }
    for (Item& item : items_) sim.chain(execution_chain_).fund(item.cfg.user, kFunding);
    next_wake_ms = phase_start_ms + 1;
  }

  void wake(Simulation& sim) override {
    Chain& exec = sim.chain(execution_chain_);
    const BridgeState& bridge = exec.bridge();
    for (Item& item : items_) {
      if (item.done || item.failed) continue;
      if (!item.submitted) {
        if (sim.now() < item.due_ms) continue;
        PayloadInvoke payload;
        payload.dapp = item.cfg.dapp;
        payload.args = item.cfg.args;
        payload.baseline = config_.protocol == "baseline";
        payload.ta = config_.ta;
        payload.fgsl = config_.fgsl;
        payload.exec_gas_limit = item.cfg.exec_gas_limit;
        payload.fee_escrow = 64 * kRelayFee;
        const Digest tx = sim.submit(execution_chain_, item.cfg.user, bridge.address, payload,
                                     4'000'000);
        item.current_tx = tx;
        item.current_inv = proto::derive_invocation_id(tx);
        attempt_submit_ms_[item.current_inv] = sim.now();
        if (item.first_submit_ms == 0) item.first_submit_ms = sim.now() == 0 ? 1 : sim.now();
        item.submitted = true;
        continue;
      }
      const auto inv_it = bridge.invocations.find(item.current_inv);
      if (inv_it == bridge.invocations.end()) {
        // Either not yet included, or the invoke transaction itself reverted
        // (unverified logic, insufficient fee ...): that settles the item.
        const Receipt* rc = exec.find_receipt(item.current_tx);
        if (rc != nullptr && rc->status == TxStatus::Reverted) item.failed = true;
        continue;
      }
      const Invocation& inv = inv_it->second;
      if (!inv.terminal()) continue;
      if (!exec.is_finalized(inv.terminal_height)) continue;
      if (inv.status == InvStatus::Committed) {
        item.done = true;
        item.committed_inv = inv.id;
        item.committed_ms = inv.terminal_ms;
      } else if (item.cfg.retry_on_conflict && inv.abort_reason == ErrCode::LockConflict) {
        // Conflicts never wait mid-flight; the user backs off one effective
        // timeout before resubmitting.
        const std::uint64_t backoff =
            proto::effective_timeout(bridge.max_timeout_blocks,
                                     bridge.dapps.at(item.cfg.dapp).timeout_blocks) *
            exec.config().block_time_ms;
        item.due_ms = sim.now() + backoff;
        item.submitted = false;
        ++item.retries;
      } else {
        item.failed = true;
      }
    }
    next_wake_ms = sim.now() + poll_ms_;
  }

  bool all_settled() const {
    return std::all_of(items_.begin(), items_.end(),
                       [](const Item& i) { return i.done || i.failed; });
  }
  const std::vector<Item>& items() const { return items_; }
  std::uint64_t attempt_submit_ms(const Digest& inv) const {
    const auto it = attempt_submit_ms_.find(inv);
    return it == attempt_submit_ms_.end() ? 0 : it->second;
  }

 private:
  ScenarioConfig config_;
  std::uint32_t execution_chain_;
  std::uint64_t poll_ms_;
  std::vector<Item> items_;
  std::map<Digest, std::uint64_t> attempt_submit_ms_;
};

std::uint32_t pick_execution_chain(const ScenarioConfig& cfg) {
  if (!cfg.dapps.empty()) return cfg.dapps.front().execution_chain;
  return cfg.chains.empty() ? 1 : cfg.chains.front().chain_id;
}

}  // namespace

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

AuditReport audit_simulation(const Simulation& sim) {
  AuditReport report;
  auto violate = [&](const std::string& what) {
    report.ok = false;
    report.violations.push_back(what);
  };

  // Per-contract checks: no live bags, no expired commits, and a full replay
  // of every applied update from genesis values.
  for (const std::uint32_t chain_id : sim.chain_ids()) {
    const Chain& chain = sim.chain(chain_id);
    const FinalityView fin = chain.finality();
    for (const auto& [addr, st] : chain.contracts().state) {
      if (st.live_bag_count(fin) != 0) {
        violate("chain " + std::to_string(chain_id) + " contract " + addr.hex().substr(0, 8) +
                ": unreleased lock bags");
      }
      if (st.expired_commit_total() != 0) {
        violate("chain " + std::to_string(chain_id) + " contract " + addr.hex().substr(0, 8) +
                ": commit arrived after bag expiry");
      }
      std::map<std::string, SlotValue> replay;
      for (const SlotDecl& decl : st.spec().slots) replay[decl.name] = SlotValue::from_decl(decl);
      for (const AppliedUpdate& up : st.history()) {
        for (const AppliedDelta& d : up.deltas) {
          SlotValue& v = replay.at(d.slot);
          std::uint64_t* cell = nullptr;
          if (d.map_key.empty()) {
            cell = &v.uint_value;
          } else {
            cell = &v.map_value[d.map_key];
          }
          if (*cell != d.old_value) {
            violate("chain " + std::to_string(chain_id) + " slot " + d.slot +
                    ": interleaved update lost (replay mismatch)");
          }
          *cell = d.new_value;
        }
      }
      for (const auto& [name, value] : st.storage_snapshot()) {
        ++report.checked_slots;
        if (!(replay.at(name) == value)) {
          violate("chain " + std::to_string(chain_id) + " slot " + name +
                  ": final state diverges from applied-update replay");
        }
      }
    }

    // Fee flow: credited fees equal accepted messages times the flat fee.
    std::uint64_t fees = 0;
    for (const auto& [relayer, ledger] : chain.bridge().relayer_ledgers) fees += ledger.fees;
    if (fees != chain.bridge().accepted_messages * kRelayFee) {
      violate("chain " + std::to_string(chain_id) + ": relayer fees diverge from accepted messages");
    }
  }

  // Cross-chain all-or-nothing per invocation.
  for (const std::uint32_t exec_id : sim.chain_ids()) {
    const Chain& exec = sim.chain(exec_id);
    for (const auto& [inv_id, inv] : exec.bridge().invocations) {
      ++report.checked_invocations;
      if (!inv.terminal()) {
        violate("invocation " + inv_id.hex().substr(0, 8) + " did not terminate");
        continue;
      }
      const bool committed = inv.status == InvStatus::Committed;
      for (const std::uint32_t chain_id : sim.chain_ids()) {
        const Chain& chain = sim.chain(chain_id);
        for (const auto& [addr, st] : chain.contracts().state) {
          const auto settled_it = st.settled().find(inv_id);
          const bool applied = settled_it != st.settled().end() && settled_it->second;
          if (applied && !committed) {
            violate("aborted invocation " + inv_id.hex().substr(0, 8) + " committed on chain " +
                    std::to_string(chain_id));
          }
        }
      }
      if (committed) {
        // Every invoked chain must have applied the commit on every planned
        // contract.
        const auto& plan = inv.update_plan;
        for (const std::uint32_t chain_id : inv.invoked_chains) {
          const auto plan_it = plan.find(chain_id);
          if (plan_it == plan.end()) continue;
          const Chain& chain = sim.chain(chain_id);
          for (const UpdateSub& sub : plan_it->second) {
            const auto st_it = chain.contracts().state.find(sub.state_addr);
            if (st_it == chain.contracts().state.end()) continue;
            const auto settled_it = st_it->second.settled().find(inv_id);
            if (settled_it == st_it->second.settled().end() || !settled_it->second) {
              violate("committed invocation " + inv_id.hex().substr(0, 8) +
                      " not applied on chain " + std::to_string(chain_id));
            }
          }
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace {

std::uint64_t max_block_time(const ScenarioConfig& cfg) {
  std::uint64_t out = 0;
  for (const ChainConfig& c : cfg.chains) out = std::max(out, c.block_time_ms);
  return out == 0 ? 5000 : out;
}

std::uint64_t min_block_time(const ScenarioConfig& cfg) {
  std::uint64_t out = UINT64_MAX;
  for (const ChainConfig& c : cfg.chains) out = std::min(out, c.block_time_ms);
  return out == UINT64_MAX ? 5000 : out;
}

void collect_deploy_rows(const ScenarioConfig& cfg, const Simulation& sim,
                         const ProviderActor& provider, std::vector<DeployRow>& rows) {
  for (const DeploymentJob& job : provider.jobs()) {
    const Chain& exec = sim.chain(job.execution_chain);
    for (const CloneRef& ref : job.clone_list) {
      DeployRow row;
      row.scenario = cfg.name;
      row.job = job.job_id.hex().substr(0, 12);
      row.service = ref.service_id;
      const auto t_req = job.phase_times.find("clone_requested");
      if (t_req != job.phase_times.end()) row.t_requested_ms = t_req->second;
      const auto t_ver = job.phase_times.find("verified");
      if (t_ver != job.phase_times.end()) row.t_verified_ms = t_ver->second;
      row.restarts = job.restart_count;

      const RegistryEntry* entry = exec.bridge().find_service(ref.service_id);
      if (entry != nullptr && entry->registered_height <= exec.head_height()) {
        row.t_registered_ms = exec.block_at(entry->registered_height).timestamp_ms;
        // Winning clone transaction: split deploy vs registration gas.
        for (const Digest& tx : exec.block_at(entry->registered_height).tx_hashes) {
          const Transaction* t = exec.find_tx(tx);
          const Receipt* rc = exec.find_receipt(tx);
          if (t == nullptr || rc == nullptr || rc->status != TxStatus::Success) continue;
          try {
            const TxPayload payload = decode_payload(t->calldata);
            if (const auto* clone = std::get_if<PayloadCloneDeploy>(&payload)) {
              if (clone->service_id != ref.service_id) continue;
              const Bytes bytecode = vm::encode_program(clone->program);
              row.gas_deploy = cfg.gas.deploy_cost(bytecode.size(), 0);
              row.gas_register = rc->gas_used - std::min(rc->gas_used, row.gas_deploy);
            }
          } catch (const Error&) {
          }
        }
      }
      // Verification gas: the provider request plus both inbound legs.
      for (std::uint64_t h = 1; h <= exec.head_height(); ++h) {
        for (const Digest& tx : exec.block_at(h).tx_hashes) {
          const Transaction* t = exec.find_tx(tx);
          const Receipt* rc = exec.find_receipt(tx);
          if (t == nullptr || rc == nullptr) continue;
          try {
            const TxPayload payload = decode_payload(t->calldata);
            if (const auto* req = std::get_if<PayloadRequestVerification>(&payload)) {
              if (req->service_id == ref.service_id && rc->status == TxStatus::Success) {
                row.gas_verify += rc->gas_used;
              }
            } else if (const auto* inbound = std::get_if<PayloadInbound>(&payload)) {
              const auto& logs = inbound->msg.receipt.logs;
              if (inbound->msg.event_index < logs.size() &&
                  logs[inbound->msg.event_index].topic == topic::kVerifyResult &&
                  rc->status == TxStatus::Success) {
                const VerifyResult vr =
                    decode_verify_result(logs[inbound->msg.event_index].payload);
                if (vr.service_id == ref.service_id) row.gas_verify += rc->gas_used;
              }
            }
          } catch (const Error&) {
          }
        }
      }
      const Chain& origin = sim.chain(ref.origin_chain);
      for (std::uint64_t h = 1; h <= origin.head_height(); ++h) {
        for (const Digest& tx : origin.block_at(h).tx_hashes) {
          const Transaction* t = origin.find_tx(tx);
          const Receipt* rc = origin.find_receipt(tx);
          if (t == nullptr || rc == nullptr || rc->status != TxStatus::Success) continue;
          try {
            const TxPayload payload = decode_payload(t->calldata);
            if (const auto* inbound = std::get_if<PayloadInbound>(&payload)) {
              const auto& logs = inbound->msg.receipt.logs;
              if (inbound->msg.event_index < logs.size() &&
                  logs[inbound->msg.event_index].topic == topic::kVerifyOut) {
                const VerifyOut vo = decode_verify_out(logs[inbound->msg.event_index].payload);
                if (vo.service_id == ref.service_id) row.gas_verify += rc->gas_used;
              }
            }
          } catch (const Error&) {
          }
        }
      }
      rows.push_back(std::move(row));
    }
  }
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& config) {
  ScenarioOutcome outcome;
  outcome.config = config;

  Simulation sim(config.gas, config.seed);
  for (const ChainConfig& c : config.chains) {
    sim.add_chain(c);
    sim.chain(c.chain_id).bridge().max_timeout_blocks = config.bridge_timeout_blocks;
    sim.chain(c.chain_id).fund("keeper", kFunding);
    sim.chain(c.chain_id).fund("provider", kFunding);
  }
  for (const RelayerConfig& r : config.relayers) {
    for (const ChainConfig& c : config.chains) sim.chain(c.chain_id).fund(r.relayer_id, kFunding);
  }

  // Services deploy decoupled at genesis on their home chains.
  for (const ServiceCfg& svc : config.services) {
    const Decoupled dec = lsd_transform(svc.contract);
    const Address logic =
        sim.genesis_deploy_logic(svc.chain_id, dec.logic, "provider");
    const Address state = sim.genesis_deploy_state(svc.chain_id, dec.state, logic, "provider");
    sim.genesis_register_service(svc.chain_id, svc.contract.name, logic, svc.chain_id, logic);
    sim.add_service_info({svc.contract.name, svc.chain_id, state, logic});
  }
  for (const DappDescriptor& dapp : config.dapps) sim.install_dapp(dapp.execution_chain, dapp);

  for (const RelayerConfig& r : config.relayers) {
    sim.add_actor(std::make_shared<Relayer>(r, sim));
  }
  auto provider = std::make_shared<ProviderActor>("provider-actor", "provider",
                                                  std::max<std::uint64_t>(1, min_block_time(config) / 2));
  // Clone jobs only matter for the integrated protocol; the baseline executes
  // on home chains where every original already lives.
  if (config.protocol == "integratex") {
    for (const DappDescriptor& dapp : config.dapps) provider->prepare_job(sim, dapp);
  }
  sim.add_actor(provider);

  const std::uint32_t exec_chain = pick_execution_chain(config);
  auto driver = std::make_shared<UserDriver>(config, exec_chain,
                                             std::max<std::uint64_t>(1, min_block_time(config) / 2));
  sim.add_actor(driver);

  // Phase 1: deployment.
  outcome.deploy_ok =
      sim.run_until([&] { return provider->all_terminal(); }, config.max_sim_ms);
  for (const DeploymentJob& job : provider->jobs()) {
    if (job.phase != DeployPhase::Verified) outcome.deploy_ok = false;
  }

  // Phase 2: workload.
  const std::uint64_t phase2_start = sim.now();
  driver->start(sim, phase2_start);
  outcome.workload_done = sim.run_until(
      [&] {
        if (!driver->all_settled()) return false;
        for (const std::uint32_t id : sim.chain_ids()) {
          for (const auto& [inv_id, inv] : sim.chain(id).bridge().invocations) {
            if (!inv.terminal()) return false;
          }
        }
        return true;
      },
      config.max_sim_ms);

  // Grace: let acks, stale answers and bag expiries settle.
  const std::uint64_t grace =
      (2ULL * config.bridge_timeout_blocks + 8) * max_block_time(config);
  if (sim.now() + grace < config.max_sim_ms) {
    sim.run_for(grace);
  }

  outcome.audit = audit_simulation(sim);

  // ---- rows -----------------------------------------------------------------

  for (const std::uint32_t chain_id : sim.chain_ids()) {
    const Chain& chain = sim.chain(chain_id);
    for (const auto& [inv_id, inv] : chain.bridge().invocations) {
      InvocationRow row;
      row.scenario = config.name;
      row.protocol = inv.baseline ? "baseline" : "integratex";
      row.seed = config.seed;
      row.invocation = inv_id.hex().substr(0, 12);
      row.dapp = inv.dapp;
      row.depth = inv.analysis.tree.depth;
      row.status = inv.status == InvStatus::Committed ? "committed"
                   : inv.status == InvStatus::Aborted ? "aborted"
                                                      : inv_status_name(inv.status);
      row.reason = inv.status == InvStatus::Aborted ? err_name(inv.abort_reason) : "";
      const std::uint64_t driver_submit = driver->attempt_submit_ms(inv_id);
      row.submit_ms = driver_submit != 0 ? driver_submit : inv.submit_ms;
      row.terminal_ms = inv.terminal_ms;
      row.latency_ms = inv.terminal_ms > row.submit_ms ? inv.terminal_ms - row.submit_ms : 0;
      row.rounds = inv.terminal_height >= inv.submit_height
                       ? inv.terminal_height - inv.submit_height + 1
                       : 0;
      row.lock_msgs = inv.lock_msgs;
      row.update_msgs = inv.update_msgs;
      row.seg_msgs = inv.seg_msgs;
      const auto m_it = sim.metrics().invocations.find(inv_id);
      if (m_it != sim.metrics().invocations.end()) {
        const InvMetrics& m = m_it->second;
        auto transfers = [&](std::uint32_t c) {
          const auto it = m.transfer_rounds.find(c);
          return it == m.transfer_rounds.end() ? 0U : it->second;
        };
        auto gas_on = [&](std::uint32_t c) {
          const auto it = m.gas_by_chain.find(c);
          return it == m.gas_by_chain.end() ? 0ULL : it->second;
        };
        row.transfers_c1 = transfers(1);
        row.transfers_c2 = transfers(2);
        row.transfers_c3 = transfers(3);
        auto chain_latency = [&](std::uint32_t c) -> std::uint64_t {
          const auto it = m.last_activity_ms.find(c);
          if (it == m.last_activity_ms.end() || it->second <= row.submit_ms) return 0;
          return it->second - row.submit_ms;
        };
        row.latency_c1_ms = chain_latency(1);
        row.latency_c2_ms = chain_latency(2);
        row.latency_c3_ms = chain_latency(3);
        row.gas_c1 = gas_on(1);
        row.gas_c2 = gas_on(2);
        row.gas_c3 = gas_on(3);
        for (const auto& [c, g] : m.gas_by_chain) row.gas_total += g;
      }
      outcome.invocations.push_back(std::move(row));
    }
  }

  std::map<std::string, RelayerRow> relayer_rows;
  for (const RelayerConfig& r : config.relayers) {
    RelayerRow row;
    row.scenario = config.name;
    row.relayer = r.relayer_id;
    row.behavior = behavior_name(r.behavior);
    relayer_rows[r.relayer_id] = row;
  }
  for (const std::uint32_t chain_id : sim.chain_ids()) {
    for (const auto& [relayer, ledger] : sim.chain(chain_id).bridge().relayer_ledgers) {
      RelayerRow& row = relayer_rows[relayer];
      if (row.relayer.empty()) {
        row.scenario = config.name;
        row.relayer = relayer;
        row.behavior = "unknown";
      }
      row.fees += ledger.fees;
      row.rewards += ledger.rewards;
      row.penalties += ledger.penalties;
      row.delivered += ledger.delivered;
      row.duplicates += ledger.duplicates;
    }
  }
  for (auto& [id, row] : relayer_rows) outcome.relayers.push_back(row);

  collect_deploy_rows(config, sim, *provider, outcome.deploys);

  // ---- summary ---------------------------------------------------------------

  auto& m = outcome.summary.metrics;
  outcome.summary.scenario = config.name;
  outcome.summary.protocol = config.protocol;
  outcome.summary.seed = config.seed;
  double committed = 0, aborted_lock = 0, aborted_exec = 0, aborted_timeout = 0;
  double rounds_sum = 0, rounds_n = 0;
  double gas_total = 0, gas_c1 = 0, gas_c2 = 0, gas_c3 = 0;
  double lock_msgs = 0, update_msgs = 0, seg_msgs = 0, transfers_c2 = 0, transfers_c3 = 0;
  double lat_c1 = 0, lat_c2 = 0, lat_c3 = 0;
  for (const InvocationRow& row : outcome.invocations) {
    if (row.status == "committed") {
      committed += 1;
      rounds_sum += static_cast<double>(row.rounds);
      rounds_n += 1;
    } else if (row.reason == err_name(ErrCode::LockConflict)) {
      aborted_lock += 1;
    } else if (row.reason == err_name(ErrCode::Timeout)) {
      aborted_timeout += 1;
    } else if (!row.reason.empty()) {
      aborted_exec += 1;
    }
    gas_total += static_cast<double>(row.gas_total);
    gas_c1 += static_cast<double>(row.gas_c1);
    gas_c2 += static_cast<double>(row.gas_c2);
    gas_c3 += static_cast<double>(row.gas_c3);
    lock_msgs += row.lock_msgs;
    update_msgs += row.update_msgs;
    seg_msgs += row.seg_msgs;
    transfers_c2 += row.transfers_c2;
    transfers_c3 += row.transfers_c3;
    lat_c1 = std::max(lat_c1, static_cast<double>(row.latency_c1_ms) / 1000.0);
    lat_c2 = std::max(lat_c2, static_cast<double>(row.latency_c2_ms) / 1000.0);
    lat_c3 = std::max(lat_c3, static_cast<double>(row.latency_c3_ms) / 1000.0);
  }
  // Item-level latency: retries count against the same booking attempt.
  double lat_sum = 0, lat_max = 0, lat_n = 0;
  std::uint64_t first_submit = UINT64_MAX, last_terminal = 0;
  for (const UserDriver::Item& item : driver->items()) {
    if (!item.done) continue;
    const double latency =
        static_cast<double>(item.committed_ms - item.first_submit_ms) / 1000.0;
    lat_sum += latency;
    lat_max = std::max(lat_max, latency);
    lat_n += 1;
    first_submit = std::min(first_submit, item.first_submit_ms);
    last_terminal = std::max(last_terminal, item.committed_ms);
  }
  m["invocations"] = static_cast<double>(outcome.invocations.size());
  m["committed"] = committed;
  m["aborted_lock_conflict"] = aborted_lock;
  m["aborted_exec_failure"] = aborted_exec;
  m["aborted_timeout"] = aborted_timeout;
  m["mean_latency_s"] = lat_n > 0 ? lat_sum / lat_n : 0.0;
  m["max_latency_s"] = lat_max;
  m["mean_rounds"] = rounds_n > 0 ? rounds_sum / rounds_n : 0.0;
  m["throughput_per_s"] =
      (lat_n > 0 && last_terminal > first_submit)
          ? lat_n / (static_cast<double>(last_terminal - first_submit) / 1000.0)
          : 0.0;
  m["latency_c1_s"] = lat_c1;
  m["latency_c2_s"] = lat_c2;
  m["latency_c3_s"] = lat_c3;
  m["gas_total"] = gas_total;
  m["gas_c1"] = gas_c1;
  m["gas_c2"] = gas_c2;
  m["gas_c3"] = gas_c3;
  m["messages_lock"] = lock_msgs;
  m["messages_update"] = update_msgs;
  m["messages_seg"] = seg_msgs;
  m["transfers_c2"] = transfers_c2;
  m["transfers_c3"] = transfers_c3;
  double fees = 0, rewards = 0, penalties = 0, duplicates = 0;
  for (const RelayerRow& row : outcome.relayers) {
    fees += static_cast<double>(row.fees);
    rewards += static_cast<double>(row.rewards);
    penalties += static_cast<double>(row.penalties);
    duplicates += static_cast<double>(row.duplicates);
  }
  m["relayer_fees"] = fees;
  m["relayer_rewards"] = rewards;
  m["relayer_penalties"] = penalties;
  m["duplicates"] = duplicates;
  double deploy_gas = 0;
  for (const DeployRow& row : outcome.deploys) {
    deploy_gas += static_cast<double>(row.gas_deploy + row.gas_register + row.gas_verify);
  }
  m["deploy_gas_total"] = deploy_gas;
  m["audit_ok"] = outcome.audit.ok ? 1.0 : 0.0;

  // ---- assertions ------------------------------------------------------------

  for (const AssertionCfg& a : config.assertions) {
    if (a.type == "audit_clean") {
      if (!outcome.audit.ok) {
        outcome.assertion_failures.push_back("audit_clean: " + outcome.audit.violations.front());
      }
    } else if (a.type == "all_committed") {
      bool ok = outcome.workload_done;
      for (const UserDriver::Item& item : driver->items()) ok = ok && item.done;
      if (!ok) outcome.assertion_failures.push_back("all_committed: some workload items failed");
    } else if (a.type == "all_terminal") {
      if (!outcome.workload_done) {
        outcome.assertion_failures.push_back("all_terminal: simulation hit max_sim_ms");
      }
    } else if (a.type == "aggregation_law") {
      for (const InvocationRow& row : outcome.invocations) {
        if (row.protocol != "integratex") continue;
        const std::uint32_t chains = (row.transfers_c2 > 0 ? 1 : 0) + (row.transfers_c3 > 0 ? 1 : 0);
        if (row.status == "committed" && (row.lock_msgs != chains || row.update_msgs != chains)) {
          outcome.assertion_failures.push_back("aggregation_law: invocation " + row.invocation);
        }
      }
    } else if (a.type == "deploys_verified") {
      if (!outcome.deploy_ok) {
        outcome.assertion_failures.push_back("deploys_verified: a deployment job failed");
      }
    } else {
      outcome.assertion_failures.push_back("unknown assertion type " + a.type);
    }
  }

  // Retries per item feed back into the first matching invocation row.
  for (const UserDriver::Item& item : driver->items()) {
    if (item.retries == 0) continue;
    for (InvocationRow& row : outcome.invocations) {
      if (row.invocation == item.committed_inv.hex().substr(0, 12)) row.retries = item.retries;
    }
  }
  return outcome;
}

void write_outcome_csvs(const std::vector<ScenarioOutcome>& outcomes, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<InvocationRow> invocations;
  std::vector<RelayerRow> relayers;
  std::vector<DeployRow> deploys;
  std::vector<SummaryRow> summaries;
  for (const ScenarioOutcome& o : outcomes) {
    invocations.insert(invocations.end(), o.invocations.begin(), o.invocations.end());
    relayers.insert(relayers.end(), o.relayers.begin(), o.relayers.end());
    deploys.insert(deploys.end(), o.deploys.begin(), o.deploys.end());
    summaries.push_back(o.summary);
  }
  const auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(out_dir + "/" + name, std::ios::binary);
    out << content;
  };
  write("invocations.csv", invocation_csv(invocations));
  write("relayers.csv", relayer_csv(relayers));
  write("deploys.csv", deploy_csv(deploys));
  write("summary.csv", summary_csv(summaries));
}

// ---------------------------------------------------------------------------
// Builtin scenarios
// ---------------------------------------------------------------------------

namespace {

std::vector<ChainConfig> three_chains(std::uint64_t block_time_ms) {
  std::vector<ChainConfig> chains;
  for (std::uint32_t id = 1; id <= 3; ++id) {
    ChainConfig c;
    c.chain_id = id;
    c.block_time_ms = block_time_ms;
    c.max_txs_per_block = 4096;
    c.confirmation_depth = 1;
    chains.push_back(c);
  }
  return chains;
}

std::vector<RelayerConfig> four_relayers(std::uint64_t seed, std::uint64_t block_time_ms) {
  std::vector<RelayerConfig> relayers;
  const std::uint64_t poll = std::max<std::uint64_t>(1, block_time_ms / 2);
  for (int i = 0; i < 4; ++i) {
    RelayerConfig r;
    r.relayer_id = "r" + std::to_string(i);
    r.behavior = RelayerBehavior::Honest;
    r.poll_interval_ms = poll;
    // Seeded phase offsets vary the clone-race winner between runs.
    ByteWriter w;
    w.u64(seed);
    w.u8(static_cast<std::uint8_t>(i));
    std::uint64_t mix = 0;
    const Digest d = sha256(w.view());
    for (int b = 0; b < 8; ++b) mix |= static_cast<std::uint64_t>(d.bytes[b]) << (8 * b);
    r.poll_offset_ms = mix % poll;
    relayers.push_back(std::move(r));
  }
  return relayers;
}

ScenarioConfig base_scenario(const std::string& name, std::uint64_t seed,
                             std::uint64_t block_time_ms) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.seed = seed;
  cfg.chains = three_chains(block_time_ms);
  cfg.relayers = four_relayers(seed, block_time_ms);
  cfg.assertions = {{"audit_clean"}};
  return cfg;
}

void apply_protocol(ScenarioConfig& cfg, const std::string& protocol) {
  cfg.protocol = protocol;
  cfg.name += "-" + protocol;
  if (protocol == "baseline") {
    // The sequential pipeline needs a longer window than the integrated one:
    // both systems share chains and depth, only the timeout budget differs.
    cfg.bridge_timeout_blocks = 100;
    for (DappDescriptor& dapp : cfg.dapps) dapp.timeout_blocks = 60;
  }
}

ScenarioConfig train_hotel_config(std::uint64_t seed, std::uint64_t block_time_ms,
                                  const std::string& protocol) {
  ScenarioConfig cfg = base_scenario("train-hotel-bt" + std::to_string(block_time_ms / 1000), seed,
                                     block_time_ms);
  cfg.services = {{2, samples::train_contract()},
                  {3, samples::hotel_contract()},
                  {1, samples::agency_contract()}};
  cfg.dapps = {samples::train_hotel_dapp(1, 2, 3)};
  WorkloadCfg w;
  w.dapp = "train-hotel";
  w.user = "user";
  w.args = {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}};
  cfg.workload = {w};
  cfg.assertions.push_back({"all_committed"});
  apply_protocol(cfg, protocol);
  return cfg;
}

ScenarioConfig depth_config(std::uint64_t seed, std::uint32_t depth, const std::string& protocol,
                            bool ta) {
  ScenarioConfig cfg = base_scenario("depth-" + std::to_string(depth), seed, 5000);
  cfg.ta = ta;
  if (!ta) cfg.name += "-ta-off";
  for (std::uint32_t i = 1; i <= depth; ++i) {
    cfg.services.push_back(
        {i % 2 == 1 ? 2U : 3U, samples::step_contract("step" + std::to_string(i), 5, 100)});
  }
  DappDescriptor dapp = samples::depth_dapp(1, {2, 3}, depth);
  cfg.services.push_back({1, samples::hub_contract("hub-" + dapp.name, 1'000'000)});
  cfg.dapps = {dapp};
  WorkloadCfg w;
  w.dapp = dapp.name;
  w.user = "user";
  w.args = {{"num", 1}};
  cfg.workload = {w};
  cfg.assertions.push_back({"all_committed"});
  if (protocol == "integratex" && ta) cfg.assertions.push_back({"aggregation_law"});
  apply_protocol(cfg, protocol);
  return cfg;
}

ScenarioConfig concurrency_config(std::uint64_t seed, std::uint32_t k, bool fgsl) {
  ScenarioConfig cfg = base_scenario("concurrency-" + std::to_string(k), seed, 5000);
  cfg.fgsl = fgsl;
  cfg.name += fgsl ? "-fgsl-on" : "-fgsl-off";
  cfg.services = {{3, samples::hotel_contract()}, {1, samples::hub_contract("book-hub", 1'000'000)}};
  cfg.dapps = {samples::booking_dapp(1, 3)};
  WorkloadCfg w;
  w.dapp = "book-room";
  w.user = "user";
  w.count = k;
  w.args = {{"num_rooms", 1}};
  w.retry_on_conflict = true;
  cfg.workload = {w};
  cfg.assertions.push_back({"all_committed"});
  cfg.max_sim_ms = 7'200'000;
  apply_protocol(cfg, "integratex");
  return cfg;
}

ScenarioConfig fault_config(std::uint64_t seed) {
  ScenarioConfig cfg = base_scenario("fault", seed, 5000);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto range = [&](std::uint64_t n) { return n == 0 ? 0 : rng() % n; };

  // One honest relayer, the rest adversarial.
  cfg.relayers[1].behavior = RelayerBehavior::Drop;
  cfg.relayers[1].p = 1.0;
  cfg.relayers[2].behavior = RelayerBehavior::Tamper;
  cfg.relayers[2].p = 0.5;
  if (range(2) == 0) {
    cfg.relayers[3].behavior = RelayerBehavior::Drop;
    cfg.relayers[3].p = 1.0;
  } else {
    cfg.relayers[3].behavior = RelayerBehavior::Tamper;
    cfg.relayers[3].p = 0.5;
  }

  samples::RandomDapp rd = samples::random_dapp(rng, {1, 2, 3}, 5, "fz" + std::to_string(seed));
  for (const auto& [service, contract] : rd.services) {
    cfg.services.push_back({rd.home_chain.at(service), contract});
  }
  // Forced failure classes: undersized timeouts, oversized asks, tight gas.
  const std::uint64_t flavor = range(4);
  if (flavor == 1) rd.descriptor.timeout_blocks = 3;  // deterministic timeout abort
  cfg.dapps = {rd.descriptor};

  WorkloadCfg w;
  w.dapp = rd.descriptor.name;
  w.user = "user";
  w.count = 1 + static_cast<std::uint32_t>(range(3));  // concurrent conflicting calls
  w.args = rd.args;
  if (flavor == 2) w.args["num"] = 1000;            // exec failure: require fails
  if (flavor == 3) w.exec_gas_limit = 3000;         // exec failure: gas exhaustion
  cfg.workload = {w};
  apply_protocol(cfg, "integratex");
  return cfg;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"train-hotel", "depth-sweep",      "blocktime-sweep", "concurrency-sweep",
          "ta-ablation", "lsd-gas",          "deploy-phase",    "fault-suite"};
}

std::vector<ScenarioConfig> builtin_scenarios(const std::string& name, const BuiltinOptions& opts) {
  std::vector<ScenarioConfig> out;
  const std::vector<std::string> protocols =
      opts.protocol ? std::vector<std::string>{*opts.protocol}
                    : std::vector<std::string>{"integratex", "baseline"};

  if (name == "train-hotel") {
    for (const std::string& p : protocols) out.push_back(train_hotel_config(opts.seed, 5000, p));
  } else if (name == "blocktime-sweep") {
    std::vector<std::uint64_t> times = opts.block_times_ms;
    if (times.empty()) times = {2000, 5000, 8000, 12000};
    for (const std::uint64_t bt : times) {
      for (const std::string& p : protocols) out.push_back(train_hotel_config(opts.seed, bt, p));
    }
  } else if (name == "depth-sweep") {
    std::vector<std::uint32_t> depths =
        opts.depth ? std::vector<std::uint32_t>{*opts.depth} : std::vector<std::uint32_t>{2, 3, 4};
    for (const std::uint32_t d : depths) {
      for (const std::string& p : protocols) {
        out.push_back(depth_config(opts.seed, d, p, opts.ta.value_or(true)));
      }
    }
  } else if (name == "ta-ablation") {
    const std::uint32_t d = opts.depth.value_or(4);
    out.push_back(depth_config(opts.seed, d, "integratex", true));
    out.push_back(depth_config(opts.seed, d, "integratex", false));
  } else if (name == "concurrency-sweep") {
    std::vector<std::uint32_t> ks;
    if (opts.concurrency) {
      ks = {*opts.concurrency};
    } else {
      ks = {1, 2, 3, 4, 5, 6};
    }
    const std::vector<bool> modes =
        opts.fgsl ? std::vector<bool>{*opts.fgsl} : std::vector<bool>{true, false};
    for (const std::uint32_t k : ks) {
      for (const bool mode : modes) out.push_back(concurrency_config(opts.seed, k, mode));
    }
  } else if (name == "deploy-phase" || name == "lsd-gas") {
    // Deployment-focused runs: the train-and-hotel clone jobs with no workload.
    ScenarioConfig cfg = train_hotel_config(opts.seed, 5000, "integratex");
    cfg.name = name;
    cfg.workload.clear();
    cfg.assertions = {{"audit_clean"}, {"deploys_verified"}};
    out.push_back(std::move(cfg));
  } else if (name == "fault-suite") {
    out.push_back(fault_config(opts.seed));
  } else {
    fail(ErrCode::ConfigError, "unknown builtin scenario " + name);
  }
  return out;
}

namespace {

std::uint64_t deploy_gas_for(const GasSchedule& gas, const MonolithicSpec& mono) {
  return gas.deploy_cost(encode_monolithic(mono).size(), mono.slots.size());
}

}  // namespace

std::vector<LsdGasRow> lsd_gas_table(const GasSchedule& gas) {
  std::vector<LsdGasRow> rows;
  for (const MonolithicSpec& mono : {samples::train_contract(), samples::hotel_contract()}) {
    const Decoupled dec = lsd_transform(mono);
    LsdGasRow row;
    row.contract = mono.name;
    row.monolithic_gas = deploy_gas_for(gas, mono);
    row.decoupled_gas = gas.deploy_cost(vm::encode_program(dec.logic).size(), 0);
    row.saving_pct = 100.0 * (1.0 - static_cast<double>(row.decoupled_gas) /
                                        static_cast<double>(row.monolithic_gas));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ix
