#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ix/calltree.hpp"
#include "ix/contracts.hpp"

namespace ix::samples {

// Assembly sources for the sample contracts (identical copies ship under
// scenarios/programs/).
extern const char* kHotelBookAsm;
extern const char* kTrainBookAsm;
extern const char* kAgencyPlanAsm;
extern const char* kStepAsm;
extern const char* kHubAsm;
// Impure variant used to exercise the not-decouplable path.
extern const char* kCounterImpureAsm;

// Monolithic contract specs (slots + business function + views + entries).
MonolithicSpec hotel_contract();
MonolithicSpec train_contract();
MonolithicSpec agency_contract();
MonolithicSpec step_contract(const std::string& name, std::uint64_t price, std::uint64_t avail);
MonolithicSpec hub_contract(const std::string& name, std::uint64_t budget);
MonolithicSpec impure_counter_contract();

// The train-and-hotel descriptor: agency on the execution chain books an
// outbound train leg, a hotel room, and a return train leg.
// Call depth is 3 (agency -> t_out -> hotel -> t_ret as dependency edges).
DappDescriptor train_hotel_dapp(std::uint32_t execution_chain, std::uint32_t train_chain,
                                std::uint32_t hotel_chain);

// Linear pipeline of `depth` remote steps, alternating over `invoked_chains`,
// aggregated by a local hub on the execution chain.
DappDescriptor depth_dapp(std::uint32_t execution_chain,
                          const std::vector<std::uint32_t>& invoked_chains, std::uint32_t depth);

// Single contested remote slot (hotel room booking) for concurrency sweeps.
DappDescriptor booking_dapp(std::uint32_t execution_chain, std::uint32_t hotel_chain);

// Deterministic random dApps over up to `max_contracts` fresh services spread
// across `chains` (the first entry is the execution chain). Used for the
// aggregation-law, atomicity, and differential suites.
struct RandomDapp {
  DappDescriptor descriptor;
  std::vector<std::pair<std::string, MonolithicSpec>> services;  // service id -> contract
  std::map<std::string, std::uint32_t> home_chain;
  std::map<std::string, std::uint64_t> args;
};
RandomDapp random_dapp(std::mt19937_64& rng, const std::vector<std::uint32_t>& chains,
                       std::uint32_t max_contracts, const std::string& name_prefix);

}  // namespace ix::samples
