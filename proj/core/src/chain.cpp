#include "ix/chain.hpp"

#include <algorithm>

namespace ix {

// --- canonical encodings -----------------------------------------------------

Bytes encode_tx(const Transaction& tx) {
  ByteWriter w;
  w.str(tx.sender);
  w.u64(tx.nonce);
  write_address(w, tx.target);
  w.bytes(tx.calldata);
  w.u64(tx.gas_limit);
  w.u64(tx.fee);
  return w.take();
}

Digest tx_hash(const Transaction& tx) { return sha256(encode_tx(tx)); }

void write_event(ByteWriter& w, const EventLog& e) {
  write_address(w, e.emitter);
  w.str(e.topic);
  w.bytes(e.payload);
}

EventLog read_event(ByteReader& r) {
  EventLog e;
  e.emitter = read_address(r);
  e.topic = r.str();
  e.payload = r.bytes();
  return e;
}

Bytes encode_receipt(const Receipt& rc) {
  ByteWriter w;
  write_digest(w, rc.tx_hash);
  w.u8(static_cast<std::uint8_t>(rc.status));
  w.u16(static_cast<std::uint16_t>(rc.revert_reason));
  w.u64(rc.gas_used);
  w.u32(static_cast<std::uint32_t>(rc.logs.size()));
  for (const EventLog& e : rc.logs) write_event(w, e);
  return w.take();
}

Receipt decode_receipt(ByteView data) {
  ByteReader r(data);
  Receipt rc;
  rc.tx_hash = read_digest(r);
  rc.status = static_cast<TxStatus>(r.u8());
  rc.revert_reason = static_cast<ErrCode>(r.u16());
  rc.gas_used = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) rc.logs.push_back(read_event(r));
  r.expect_done();
  return rc;
}

Bytes encode_header(const Block& b) {
  ByteWriter w;
  w.u64(b.height);
  write_digest(w, b.parent_hash);
  w.u64(b.timestamp_ms);
  w.u32(static_cast<std::uint32_t>(b.tx_hashes.size()));
  for (const Digest& h : b.tx_hashes) write_digest(w, h);
  write_digest(w, b.receipts_root);
  w.u64(b.gas_used);
  return w.take();
}

Digest block_hash(const Block& b) { return sha256(encode_header(b)); }

void write_block(ByteWriter& w, const Block& b) {
  w.raw(encode_header(b));
  write_digest(w, b.hash);
}

Block read_block(ByteReader& r) {
  Block b;
  b.height = r.u64();
  b.parent_hash = read_digest(r);
  b.timestamp_ms = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) b.tx_hashes.push_back(read_digest(r));
  b.receipts_root = read_digest(r);
  b.gas_used = r.u64();
  b.hash = read_digest(r);
  return b;
}

// --- chain -------------------------------------------------------------------

Chain::Chain(ChainConfig config) : config_(std::move(config)) {
  if (config_.block_time_ms == 0) fail(ErrCode::ConfigError, "block_time must be positive");
  if (config_.max_txs_per_block < 1) fail(ErrCode::ConfigError, "max_txs_per_block must be >= 1");
  Block genesis;
  genesis.height = 0;
  genesis.timestamp_ms = 0;
  genesis.receipts_root = merkle::empty_root();
  genesis.hash = block_hash(genesis);
  blocks_.push_back(genesis);
  receipts_.push_back({});
}

Account& Chain::account(const AccountId& id) { return accounts_[id]; }

const Account& Chain::account(const AccountId& id) const {
  static const Account kEmpty{};
  const auto it = accounts_.find(id);
  return it == accounts_.end() ? kEmpty : it->second;
}

void Chain::fund(const AccountId& id, std::uint64_t balance) { accounts_[id].balance += balance; }

Digest Chain::submit_tx(const Transaction& tx) {
  if (tx.gas_limit == 0) fail(ErrCode::ConfigError, "gas_limit must be positive");
  const Account& acct = account(tx.sender);
  const std::uint64_t pending = pending_nonces_[tx.sender];
  const std::uint64_t expected = std::max(acct.nonce, pending);
  if (tx.nonce != expected) {
    fail(ErrCode::BadNonce, "expected nonce " + std::to_string(expected) + " got " +
                                std::to_string(tx.nonce));
  }
  if (acct.balance < tx.fee) fail(ErrCode::InsufficientBalance, "fee exceeds balance");
  pending_nonces_[tx.sender] = tx.nonce + 1;
  mempool_.push_back(tx);
  return tx_hash(tx);
}

std::uint64_t Chain::next_nonce(const AccountId& id) const {
  const auto it = pending_nonces_.find(id);
  const std::uint64_t pending = it == pending_nonces_.end() ? 0 : it->second;
  return std::max(account(id).nonce, pending);
}

const Block& Chain::produce_block(std::uint64_t now_ms, TxExecutor& executor) {
  const Block& parent = blocks_.back();
  if (now_ms < parent.timestamp_ms + config_.block_time_ms) {
    fail(ErrCode::ConfigError, "block produced before one block_time elapsed");
  }

  Block block;
  block.height = parent.height + 1;
  block.parent_hash = parent.hash;
  block.timestamp_ms = now_ms;

  std::vector<Receipt> receipts;

  // Protocol housekeeping (timeout sweeps) runs ahead of user transactions and
  // is recorded as a synthetic receipt so its events are provable on-chain.
  executor.begin_block(*this, block.height, now_ms, receipts);
  for (Receipt& rc : receipts) block.tx_hashes.push_back(rc.tx_hash);

  std::uint32_t taken = 0;
  while (!mempool_.empty() && taken < config_.max_txs_per_block) {
    Transaction tx = mempool_.front();
    mempool_.pop_front();
    ++taken;
    Receipt rc = executor.execute(*this, tx, now_ms);
    rc.tx_hash = tx_hash(tx);
    block.tx_hashes.push_back(rc.tx_hash);
    tx_store_[rc.tx_hash] = std::move(tx);
    receipts.push_back(std::move(rc));
  }

  std::vector<Bytes> leaves;
  leaves.reserve(receipts.size());
  std::uint64_t gas_total = 0;
  for (const Receipt& rc : receipts) {
    leaves.push_back(encode_receipt(rc));
    gas_total += rc.gas_used;
  }
  block.receipts_root = merkle::build_root(leaves);
  block.gas_used = gas_total;
  block.hash = block_hash(block);

  for (std::size_t i = 0; i < receipts.size(); ++i) {
    receipt_index_[receipts[i].tx_hash] = {block.height, static_cast<std::uint32_t>(i)};
  }
  blocks_.push_back(std::move(block));
  receipts_.push_back(std::move(receipts));
  return blocks_.back();
}

std::uint64_t Chain::head_height() const { return blocks_.back().height; }

const Block& Chain::block_at(std::uint64_t height) const {
  if (height >= blocks_.size()) fail(ErrCode::UnknownHeight, "height past head");
  return blocks_[height];
}

bool Chain::is_finalized(std::uint64_t height) const {
  if (height > head_height()) fail(ErrCode::UnknownHeight, "height past head");
  return head_height() - height >= config_.confirmation_depth;
}

const Receipt* Chain::find_receipt(const Digest& tx) const {
  const auto it = receipt_index_.find(tx);
  if (it == receipt_index_.end()) return nullptr;
  return &receipts_[it->second.first][it->second.second];
}

const Transaction* Chain::find_tx(const Digest& tx) const {
  const auto it = tx_store_.find(tx);
  return it == tx_store_.end() ? nullptr : &it->second;
}

std::pair<std::uint64_t, std::uint32_t> Chain::receipt_location(const Digest& tx) const {
  const auto it = receipt_index_.find(tx);
  if (it == receipt_index_.end()) fail(ErrCode::NotFound, "tx not included");
  return it->second;
}

ProofBundle Chain::get_receipt_proof(const Digest& tx) const {
  const auto [height, index] = receipt_location(tx);
  const std::vector<Receipt>& rcs = receipts_[height];
  std::vector<Bytes> leaves;
  leaves.reserve(rcs.size());
  for (const Receipt& rc : rcs) leaves.push_back(encode_receipt(rc));
  ProofBundle bundle;
  bundle.header = blocks_[height];
  bundle.receipt = rcs[index];
  bundle.proof = merkle::prove(leaves, index);
  return bundle;
}

const std::vector<Receipt>& Chain::receipts_at(std::uint64_t height) const {
  if (height >= receipts_.size()) fail(ErrCode::UnknownHeight, "height past head");
  return receipts_[height];
}

ChainStateSnapshot Chain::snapshot_state() const {
  return ChainStateSnapshot{contracts_, bridge_, accounts_};
}

void Chain::restore_state(const ChainStateSnapshot& snap) {
  contracts_ = snap.contracts;
  bridge_ = snap.bridge;
  accounts_ = snap.accounts;
}

}  // namespace ix
