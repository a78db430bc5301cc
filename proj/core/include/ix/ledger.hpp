#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ix/hash.hpp"

namespace ix {

struct ChainConfig {
  std::uint32_t chain_id = 0;
  std::uint64_t block_time_ms = 5000;
  std::uint32_t max_txs_per_block = 4096;
  std::uint32_t confirmation_depth = 1;
  // Documentation only: the consensus fault-tolerance assumption this chain is
  // modeled under. Never interpreted by the simulator.
  std::string fault_threshold_note = "t < 1/3";
};

struct Transaction {
  AccountId sender;
  std::uint64_t nonce = 0;
  Address target;  // zero address = contract creation
  Bytes calldata;
  std::uint64_t gas_limit = 0;
  std::uint64_t fee = 0;  // prepaid, gas-price-weighted (gas price is 1 unit)
};

struct EventLog {
  Address emitter;
  std::string topic;
  Bytes payload;

  bool operator==(const EventLog&) const = default;
};

enum class TxStatus : std::uint8_t { Success = 0, Reverted = 1 };

struct Receipt {
  Digest tx_hash;
  TxStatus status = TxStatus::Success;
  std::uint64_t gas_used = 0;
  std::vector<EventLog> logs;
  ErrCode revert_reason = ErrCode::Ok;

  bool operator==(const Receipt&) const = default;
};

struct Block {
  std::uint64_t height = 0;
  Digest parent_hash;
  std::uint64_t timestamp_ms = 0;
  std::vector<Digest> tx_hashes;
  Digest receipts_root;
  std::uint64_t gas_used = 0;
  Digest hash;  // sha256 of the canonical header encoding

  bool operator==(const Block&) const = default;
};

Bytes encode_tx(const Transaction& tx);
Digest tx_hash(const Transaction& tx);

Bytes encode_receipt(const Receipt& r);
Receipt decode_receipt(ByteView data);

Bytes encode_header(const Block& b);  // excludes `hash`
Digest block_hash(const Block& b);

void write_block(ByteWriter& w, const Block& b);
Block read_block(ByteReader& r);
void write_event(ByteWriter& w, const EventLog& e);
EventLog read_event(ByteReader& r);

}  // namespace ix
