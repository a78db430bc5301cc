#include "ix/relayer.hpp"

#include <algorithm>

#include "ix/proto.hpp"

namespace ix {

Relayer::Relayer(RelayerConfig config, Simulation& sim)
    : Actor(config.relayer_id), config_(std::move(config)),
      rng_(sim.sub_seed("relayer/" + config_.relayer_id)) {
  if (config_.poll_interval_ms == 0) {
    std::uint64_t min_block = UINT64_MAX;
    for (const std::uint32_t id : sim.chain_ids()) {
      min_block = std::min(min_block, sim.chain(id).config().block_time_ms);
    }
    config_.poll_interval_ms = std::max<std::uint64_t>(1, min_block / 2);
  }
  next_wake_ms = config_.poll_offset_ms + config_.poll_interval_ms;
}

double Relayer::draw() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // portable uniform [0,1)
}

bool Relayer::should_drop() {
  return config_.behavior == RelayerBehavior::Drop && draw() < config_.p;
}

void Relayer::wake(Simulation& sim) {
  if (config_.behavior == RelayerBehavior::PrematureClone && !premature_done_) {
    do_premature_clone(sim);
    premature_done_ = true;
  }
  for (const std::uint32_t id : sim.chain_ids()) scan_chain(sim, sim.chain(id));
  process_clones(sim);
  process_relays(sim);
  next_wake_ms = sim.now() + config_.poll_interval_ms;
}

void Relayer::scan_chain(Simulation&, Chain& chain) {
  const std::uint32_t chain_id = chain.config().chain_id;
  const std::uint64_t head = chain.head_height();
  const std::uint32_t depth = chain.config().confirmation_depth;
  if (head < depth) return;
  const std::uint64_t last_final = head - depth;

  std::uint64_t& cursor = scan_cursor_[chain_id];
  for (std::uint64_t h = cursor; h <= last_final; ++h) {
    const std::vector<Receipt>& receipts = chain.receipts_at(h);
    for (const Receipt& rc : receipts) {
      for (std::uint32_t i = 0; i < rc.logs.size(); ++i) {
        const EventLog& event = rc.logs[i];
        if (event.topic == topic::kCloneReq) {
          const CloneReq req = decode_clone_req(event.payload);
          for (const CloneEntry& entry : req.entries) {
            const std::string key = req.job_id.hex() + "/" + entry.service_id + "/" +
                                    std::to_string(h);
            if (clone_keys_done_.insert(key).second) {
              clones_.push_back({req.invoked_chain, req.execution_chain, req.job_id,
                                 entry.service_id, entry.origin_addr});
            }
          }
          continue;
        }
        if (!is_relayed_topic(event.topic)) continue;
        const Digest id = message_id(chain_id, rc.tx_hash, i);
        if (handled_.count(id) > 0) continue;
        const bool queued = std::any_of(pending_.begin(), pending_.end(), [&](const PendingRelay& p) {
          return p.source_chain == chain_id && p.tx == rc.tx_hash && p.event_index == i;
        });
        if (queued) continue;
        pending_.push_back({chain_id, rc.tx_hash, i, event_destination(event)});
      }
    }
  }
  cursor = last_final + 1;
}

void Relayer::process_relays(Simulation& sim) {
  std::size_t n = pending_.size();
  while (n-- > 0) {
    PendingRelay item = pending_.front();
    pending_.pop_front();
    const Digest mid = message_id(item.source_chain, item.tx, item.event_index);

    if (!sim.has_chain(item.dest_chain)) {
      handled_.insert(mid);
      continue;
    }
    Chain& dest = sim.chain(item.dest_chain);
    if (dest.bridge().seen.count(mid) > 0) {
      handled_.insert(mid);  // someone else already delivered it
      continue;
    }
    if (should_drop()) {
      ++sim.metrics().relay_drops;
      pending_.push_back(item);  // reconsidered next poll
      continue;
    }

    CrossChainMessage msg;
    msg.source_chain = item.source_chain;
    const ProofBundle bundle = sim.chain(item.source_chain).get_receipt_proof(item.tx);
    msg.header = bundle.header;
    msg.receipt = bundle.receipt;
    msg.proof = bundle.proof;
    msg.event_index = item.event_index;
    msg.relayer = mid.hex().substr(0, 8);

    bool tampered = false;
    if (config_.behavior == RelayerBehavior::Tamper && draw() < config_.p) {
      tampered = true;
      ++sim.metrics().relay_tampers;
      const std::uint64_t choice = rng_() % 3;
      if (choice == 0 && !msg.receipt.logs[item.event_index].payload.empty()) {
        Bytes& payload = msg.receipt.logs[item.event_index].payload;
        payload[rng_() % payload.size()] ^= 0x01;
      } else if (choice == 1) {
        msg.header.receipts_root.bytes[rng_() % 32] ^= 0x01;
        msg.header.hash = block_hash(msg.header);
      } else if (!msg.proof.siblings.empty()) {
        msg.proof.siblings[rng_() % msg.proof.siblings.size()].sibling.bytes[rng_() % 32] ^= 0x01;
      } else {
        msg.receipt.tx_hash.bytes[rng_() % 32] ^= 0x01;  // single-leaf proofs
      }
    }

    try {
      const Digest tx = sim.submit(item.dest_chain, id(), dest.bridge().address,
                                   PayloadInbound{msg}, config_.gas_limit);
      sim.metrics().submissions.push_back({id(), item.dest_chain, tx, tampered, false});
      handled_.insert(mid);
    } catch (const Error& e) {
      if (e.code() == ErrCode::InsufficientBalance) {
        pending_.push_back(item);  // logged and retried next poll
      } else {
        handled_.insert(mid);
      }
    }
  }
}

void Relayer::process_clones(Simulation& sim) {
  std::size_t n = clones_.size();
  while (n-- > 0) {
    PendingClone task = clones_.front();
    clones_.pop_front();

    Chain& exec = sim.chain(task.execution_chain);
    if (exec.bridge().registry.count(task.service_id) > 0) continue;  // race already settled
    if (should_drop()) {
      ++sim.metrics().relay_drops;
      clones_.push_back(task);
      continue;
    }

    // Off-chain read-only inquiry; no gas is consumed for getcode.
    Bytes bytecode;
    try {
      bytecode = proto::getcode(sim.chain(task.origin_chain), task.origin_addr);
    } catch (const Error&) {
      continue;
    }
    vm::Program program;
    try {
      program = vm::decode_program(bytecode);
    } catch (const Error&) {
      continue;
    }
    bool tampered = false;
    if (config_.behavior == RelayerBehavior::Tamper && draw() < config_.p) {
      // Alter the clone in a way that still deploys: the bytecode hash no
      // longer matches the original, so cross-chain verification must fail.
      tampered = true;
      ++sim.metrics().relay_tampers;
      bool mutated = false;
      for (vm::Instr& ins : program.code) {
        if (ins.op == vm::Op::Push) {
          ins.imm ^= 1;
          mutated = true;
          break;
        }
      }
      if (!mutated && !program.abi.params.empty()) program.abi.params[0][0] ^= 1;
    }
    PayloadCloneDeploy payload{task.job_id, task.service_id, program, task.origin_chain,
                               task.origin_addr};
    try {
      const Digest tx = sim.submit(task.execution_chain, id(), exec.bridge().address,
                                   payload, config_.gas_limit);
      sim.metrics().submissions.push_back({id(), task.execution_chain, tx, tampered, true});
    } catch (const Error& e) {
      if (e.code() == ErrCode::InsufficientBalance) clones_.push_back(task);
    }
  }
}

void Relayer::do_premature_clone(Simulation& sim) {
  if (config_.premature_service.empty()) return;
  const ServiceInfo* info = sim.find_service_info(config_.premature_service);
  if (info == nullptr) return;
  const std::uint32_t target = config_.premature_target_chain;
  if (!sim.has_chain(target)) return;
  Bytes bytecode;
  try {
    bytecode = proto::getcode(sim.chain(info->home_chain), info->logic_addr);
  } catch (const Error&) {
    return;
  }
  // An eager clone without any event: a bare deploy, no registration, gas
  // borne by this relayer with no reimbursement.
  try {
    PayloadDeployLogic payload{vm::decode_program(bytecode)};
    sim.submit(target, id(), Address{}, payload, config_.gas_limit);
  } catch (const Error&) {
  }
}

}  // namespace ix
