#include "ix/deploy.hpp"

#include <algorithm>

#include "handlers_internal.hpp"

namespace ix::proto {

// ---------------------------------------------------------------------------
// Bridge-side handlers
// ---------------------------------------------------------------------------

void handle_request_clone(TxContext& ctx, const PayloadRequestClone& p) {
  if (p.entries.empty()) fail(ErrCode::ConfigError, "empty clone request");
  BridgeState& bridge = ctx.chain.bridge();
  CloneJob& job = bridge.clone_jobs[p.job_id];
  job.job_id = p.job_id;
  job.execution_chain = bridge.chain_id;
  for (const CloneEntry& entry : p.entries) {
    if (bridge.registry.count(entry.service_id) > 0) continue;  // already present
    CloneRef ref;
    ref.service_id = entry.service_id;
    ref.origin_chain = p.invoked_chain;
    ref.origin_addr = entry.origin_addr;
    if (std::find(job.entries.begin(), job.entries.end(), ref) == job.entries.end()) {
      job.entries.push_back(ref);
    }
    job.open_services.insert(entry.service_id);
  }
  ctx.charge(ctx.sim.gas().storage_write);

  CloneReq event;
  event.job_id = p.job_id;
  event.invoked_chain = p.invoked_chain;
  event.execution_chain = bridge.chain_id;
  event.entries = p.entries;
  ctx.emit(bridge.address, topic::kCloneReq, encode_clone_req(event));
}

namespace {

std::uint64_t hash_gas(const GasSchedule& gas, std::size_t bytes) {
  return gas.instruction * (1 + bytes / 32);
}

}  // namespace

void handle_request_verification(TxContext& ctx, const PayloadRequestVerification& p) {
  BridgeState& bridge = ctx.chain.bridge();
  const RegistryEntry* entry = bridge.find_service(p.service_id);
  if (entry == nullptr) fail(ErrCode::NotFound, "service not registered: " + p.service_id);

  const Bytes& bytecode = getcode(ctx.chain, entry->logic_addr);
  ctx.charge(ctx.sim.gas().storage_read + hash_gas(ctx.sim.gas(), bytecode.size()));

  VerifyOut event;
  event.job_id = p.job_id;
  event.service_id = p.service_id;
  event.origin_chain = entry->origin_chain;
  event.origin_addr = entry->origin_addr;
  event.clone_hash = sha256(bytecode);
  event.execution_chain = bridge.chain_id;
  ctx.emit(bridge.address, topic::kVerifyOut, encode_verify_out(event));
}

void on_verify_out(TxContext& ctx, const VerifyOut& msg) {
  // Invoked chain: hash the original bytecode and compare.
  bool match = false;
  try {
    const Bytes& local = getcode(ctx.chain, msg.origin_addr);
    ctx.charge(ctx.sim.gas().storage_read + hash_gas(ctx.sim.gas(), local.size()));
    match = sha256(local) == msg.clone_hash;
  } catch (const Error&) {
    match = false;  // nothing deployed at the claimed origin
  }
  VerifyResult result;
  result.job_id = msg.job_id;
  result.service_id = msg.service_id;
  result.match = match;
  result.execution_chain = msg.execution_chain;
  ctx.emit(ctx.chain.bridge().address, topic::kVerifyResult, encode_verify_result(result));
}

void on_verify_result(TxContext& ctx, const VerifyResult& msg) {
  BridgeState& bridge = ctx.chain.bridge();
  const auto job_it = bridge.clone_jobs.find(msg.job_id);
  const auto reg_it = bridge.registry.find(msg.service_id);
  if (reg_it == bridge.registry.end()) return;  // evicted meanwhile
  RegistryEntry& entry = reg_it->second;
  if (entry.verified) return;

  if (msg.match) {
    entry.verified = true;
    ++bridge.relayer_ledgers[entry.registrar].rewards;
    ctx.charge(ctx.sim.gas().storage_write);
    return;
  }

  // Tampered or wrong clone: penalize the registrar, evict the entry, and
  // restart the off-chain clone round with the offender banned.
  ++bridge.relayer_ledgers[entry.registrar].penalties;
  const std::string registrar = entry.registrar;
  bridge.registry.erase(reg_it);
  ctx.charge(ctx.sim.gas().storage_write);
  if (job_it == bridge.clone_jobs.end()) return;
  CloneJob& job = job_it->second;
  job.banned_relayers.insert(registrar);
  if (++job.restarts[msg.service_id] > job.restart_cap) {
    job.failed = true;
    return;
  }
  job.open_services.insert(msg.service_id);
  const auto ref_it = std::find_if(job.entries.begin(), job.entries.end(),
                                   [&](const CloneRef& r) { return r.service_id == msg.service_id; });
  if (ref_it == job.entries.end()) return;
  CloneReq event;
  event.job_id = job.job_id;
  event.invoked_chain = ref_it->origin_chain;
  event.execution_chain = bridge.chain_id;
  event.entries.push_back({ref_it->service_id, ref_it->origin_addr});
  ctx.emit(bridge.address, topic::kCloneReq, encode_clone_req(event));
}

}  // namespace ix::proto

namespace ix {

// ---------------------------------------------------------------------------
// Provider actor
// ---------------------------------------------------------------------------

ProviderActor::ProviderActor(std::string id, AccountId account, std::uint64_t poll_interval_ms)
    : Actor(std::move(id)), account_(std::move(account)), poll_interval_ms_(poll_interval_ms) {
  next_wake_ms = poll_interval_ms_;
}

const DeploymentJob& ProviderActor::prepare_job(Simulation& sim, const DappDescriptor& dapp) {
  class WorldDirectory : public ServiceDirectory {
   public:
    explicit WorldDirectory(const Simulation& sim) : sim_(sim) {}
    const ServiceInfo* find_service(const std::string& id) const override {
      return sim_.find_service_info(id);
    }
    bool registered_on(const std::string& id, std::uint32_t chain) const override {
      return sim_.chain(chain).bridge().registry.count(id) > 0;
    }

   private:
    const Simulation& sim_;
  } dir(sim);

  const Analysis analysis = analyze(dapp, dir);
  DeploymentJob job;
  job.job_id = proto::derive_job_id(dapp.name, dapp.execution_chain);
  job.dapp = dapp.name;
  job.execution_chain = dapp.execution_chain;
  job.clone_list = analysis.clone_list;
  job.phase = DeployPhase::Prepared;
  job.phase_times["prepared"] = 0;
  jobs_.push_back(std::move(job));
  return jobs_.back();
}

bool ProviderActor::all_terminal() const {
  return std::all_of(jobs_.begin(), jobs_.end(), [](const DeploymentJob& j) { return j.terminal(); });
}

void ProviderActor::wake(Simulation& sim) {
  for (DeploymentJob& job : jobs_) {
    if (!job.terminal()) drive(sim, job);
  }
  next_wake_ms = sim.now() + poll_interval_ms_;
}

void ProviderActor::drive(Simulation& sim, DeploymentJob& job) {
  Chain& exec = sim.chain(job.execution_chain);
  const BridgeState& bridge = exec.bridge();

  switch (job.phase) {
    case DeployPhase::Prepared: {
      if (job.clone_list.empty()) {
        job.phase = DeployPhase::Verified;  // nothing to clone, zero cross-chain messages
        job.phase_times["verified"] = sim.now();
        return;
      }
      // One request per origin chain, carrying that chain's address list.
      std::map<std::uint32_t, std::vector<CloneEntry>> by_origin;
      for (const CloneRef& ref : job.clone_list) {
        by_origin[ref.origin_chain].push_back({ref.service_id, ref.origin_addr});
      }
      for (const auto& [origin, entries] : by_origin) {
        PayloadRequestClone payload{job.job_id, origin, entries};
        sim.submit(job.execution_chain, account_, bridge.address, payload, 500000);
      }
      job.phase = DeployPhase::CloneRequested;
      job.phase_times["clone_requested"] = sim.now();
      return;
    }
    case DeployPhase::CloneRequested:
    case DeployPhase::Registered:
    case DeployPhase::Verifying: {
      const auto job_state_it = bridge.clone_jobs.find(job.job_id);
      if (job_state_it != bridge.clone_jobs.end()) {
        job.restart_count = job_state_it->second.max_restarts();
        if (job_state_it->second.failed) {
          job.phase = DeployPhase::Failed;
          job.phase_times["failed"] = sim.now();
          return;
        }
      }

      bool all_registered = true;
      bool all_verified = true;
      for (const CloneRef& ref : job.clone_list) {
        const RegistryEntry* entry = bridge.find_service(ref.service_id);
        if (entry == nullptr || !exec.is_finalized(entry->registered_height)) {
          all_registered = false;
          all_verified = false;
          continue;
        }
        if (entry->verified) continue;
        all_verified = false;
        // Initiate verification once this registration generation finalizes,
        // and again after any restart re-registers.
        const auto issued = job.verify_issued_for.find(ref.service_id);
        if (issued == job.verify_issued_for.end() || issued->second != entry->registered_height) {
          PayloadRequestVerification payload{job.job_id, ref.service_id};
          sim.submit(job.execution_chain, account_, bridge.address, payload, 500000);
          job.verify_issued_for[ref.service_id] = entry->registered_height;
        }
      }
      if (job.phase == DeployPhase::CloneRequested && all_registered) {
        job.phase = DeployPhase::Registered;
        job.phase_times["registered"] = sim.now();
      }
      if (job.phase == DeployPhase::Registered && !job.verify_issued_for.empty()) {
        job.phase = DeployPhase::Verifying;
        job.phase_times["verifying"] = sim.now();
      }
      if (all_verified) {
        job.phase = DeployPhase::Verified;
        job.phase_times["verified"] = sim.now();
      }
      return;
    }
    case DeployPhase::Verified:
    case DeployPhase::Failed:
      return;
  }
}

}  // namespace ix
