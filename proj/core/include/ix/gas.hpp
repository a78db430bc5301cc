#pragma once

#include <cstdint>

namespace ix {

// Gas constants, fixed for the lifetime of a scenario. Proportioned after
// Ethereum's schedule so that deployment and aggregation savings point the
// same way, without claiming opcode-level compatibility.
struct GasSchedule {
  std::uint64_t instruction = 3;
  std::uint64_t deploy_base = 32000;
  std::uint64_t bytecode_byte = 200;
  std::uint64_t storage_slot = 20000;  // per declared slot, charged at deploy
  std::uint64_t storage_write = 5000;
  std::uint64_t storage_read = 200;
  std::uint64_t event_base = 375;
  std::uint64_t event_byte = 8;
  std::uint64_t tx_base = 21000;
  std::uint64_t proof_step = 60;  // per Merkle sibling folded during inbound verification

  std::uint64_t deploy_cost(std::uint64_t bytecode_bytes, std::uint64_t slots) const {
    return deploy_base + bytecode_byte * bytecode_bytes + storage_slot * slots;
  }
  std::uint64_t event_cost(std::uint64_t payload_bytes) const {
    return event_base + event_byte * payload_bytes;
  }
};

// Flat cross-chain fee credited to the relayer whose copy of a message is
// accepted first; users escrow `expected messages x relay_fee` up front.
inline constexpr std::uint64_t kRelayFee = 1000;

}  // namespace ix
