#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ix/bridge.hpp"
#include "ix/contracts.hpp"
#include "ix/ledger.hpp"
#include "ix/merkle.hpp"

namespace ix {

struct Account {
  std::uint64_t nonce = 0;
  std::uint64_t balance = 0;
};

struct ProofBundle {
  Block header;
  Receipt receipt;
  merkle::ReceiptProof proof;
};

class Chain;

// Hook the simulation provides to run transactions against contract state.
class TxExecutor {
 public:
  virtual ~TxExecutor() = default;
  // Protocol housekeeping at the top of a block (timeout sweeps). Appended
  // receipts come before user transactions.
  virtual void begin_block(Chain& chain, std::uint64_t height, std::uint64_t now_ms,
                           std::vector<Receipt>& receipts) = 0;
  virtual Receipt execute(Chain& chain, const Transaction& tx, std::uint64_t now_ms) = 0;
};

struct ChainStateSnapshot {
  Contracts contracts;
  BridgeState bridge;
  std::map<AccountId, Account> accounts;
};

// One simulated blockchain: scheduled block production, FIFO mempool with a
// per-block cap, receipts under a Merkle root, depth-based finality. Single
// writer: only the discrete-event scheduler mutates a chain.
class Chain {
 public:
  explicit Chain(ChainConfig config);

  const ChainConfig& config() const { return config_; }
  FinalityView finality() const { return {head_height(), config_.confirmation_depth}; }

  // Accounts.
  Account& account(const AccountId& id);
  const Account& account(const AccountId& id) const;
  void fund(const AccountId& id, std::uint64_t amount);
  std::uint64_t next_nonce(const AccountId& id) const;

  // Mempool: validates nonce continuity (queued txs included) and prepaid fee.
  Digest submit_tx(const Transaction& tx);
  std::size_t mempool_size() const { return mempool_.size(); }

  const Block& produce_block(std::uint64_t now_ms, TxExecutor& executor);

  std::uint64_t head_height() const;
  const Block& head() const { return blocks_.back(); }
  const Block& block_at(std::uint64_t height) const;
  bool is_finalized(std::uint64_t height) const;
  std::uint64_t last_block_time() const { return blocks_.back().timestamp_ms; }

  const Receipt* find_receipt(const Digest& tx) const;
  const Transaction* find_tx(const Digest& tx) const;
  std::pair<std::uint64_t, std::uint32_t> receipt_location(const Digest& tx) const;
  ProofBundle get_receipt_proof(const Digest& tx) const;
  const std::vector<Receipt>& receipts_at(std::uint64_t height) const;

  Contracts& contracts() { return contracts_; }
  const Contracts& contracts() const { return contracts_; }
  BridgeState& bridge() { return bridge_; }
  const BridgeState& bridge() const { return bridge_; }

  // Whole-state copy used to roll back reverted transactions.
  ChainStateSnapshot snapshot_state() const;
  void restore_state(const ChainStateSnapshot& snap);

 private:
  ChainConfig config_;
  std::map<AccountId, Account> accounts_;
  std::map<AccountId, std::uint64_t> pending_nonces_;
  Contracts contracts_;
  BridgeState bridge_;
  std::deque<Transaction> mempool_;
  std::vector<Block> blocks_;
  std::vector<std::vector<Receipt>> receipts_;
  std::map<Digest, std::pair<std::uint64_t, std::uint32_t>> receipt_index_;
  std::map<Digest, Transaction> tx_store_;  // included transactions, by hash
};

}  // namespace ix
