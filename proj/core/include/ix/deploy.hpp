#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ix/sim.hpp"

namespace ix {

enum class DeployPhase : std::uint8_t {
  Prepared = 0,
  CloneRequested = 1,
  Registered = 2,
  Verifying = 3,
  Verified = 4,
  Failed = 5,
};

inline const char* deploy_phase_name(DeployPhase p) {
  switch (p) {
    case DeployPhase::Prepared: return "Prepared";
    case DeployPhase::CloneRequested: return "CloneRequested";
    case DeployPhase::Registered: return "Registered";
    case DeployPhase::Verifying: return "Verifying";
    case DeployPhase::Verified: return "Verified";
    case DeployPhase::Failed: return "Failed";
  }
  return "?";
}

// Provider-side record of one end-to-end deployment: preparation, clone
// request, registration, cross-chain verification, restarts on mismatch.
struct DeploymentJob {
  Digest job_id;
  std::string dapp;
  std::uint32_t execution_chain = 0;
  std::vector<CloneRef> clone_list;
  DeployPhase phase = DeployPhase::Prepared;
  std::uint32_t restart_count = 0;

  // Phase timeline (simulated ms), for the deployment report.
  std::map<std::string, std::uint64_t> phase_times;
  // Per-service verification bookkeeping: registered_height the last
  // verification request was issued for.
  std::map<std::string, std::uint64_t> verify_issued_for;

  bool terminal() const { return phase == DeployPhase::Verified || phase == DeployPhase::Failed; }
};

// The cross-chain dApp provider: analyzes descriptors, requests clones,
// initiates verification once registrations finalize, and watches jobs to a
// terminal phase. One actor may drive many jobs.
class ProviderActor : public Actor {
 public:
  ProviderActor(std::string id, AccountId account, std::uint64_t poll_interval_ms);

  // Prepare a job for a descriptor already installed on the execution chain.
  const DeploymentJob& prepare_job(Simulation& sim, const DappDescriptor& dapp);

  void wake(Simulation& sim) override;

  const std::vector<DeploymentJob>& jobs() const { return jobs_; }
  bool all_terminal() const;

 private:
  void drive(Simulation& sim, DeploymentJob& job);

  AccountId account_;
  std::uint64_t poll_interval_ms_;
  std::vector<DeploymentJob> jobs_;
};

}  // namespace ix
