#include "ix/merkle.hpp"

#include "ix/errors.hpp"

namespace ix::merkle {

Digest empty_root() {
  return sha256(ByteView{});
}

Digest leaf_hash(ByteView leaf) {
  Bytes buf;
  buf.reserve(leaf.size() + 1);
  buf.push_back(kLeafPrefix);
  buf.insert(buf.end(), leaf.begin(), leaf.end());
  return sha256(buf);
}

Digest node_hash(const Digest& left, const Digest& right) {
  Bytes buf;
  buf.reserve(65);
  buf.push_back(kNodePrefix);
  buf.insert(buf.end(), left.bytes.begin(), left.bytes.end());
  buf.insert(buf.end(), right.bytes.begin(), right.bytes.end());
  return sha256(buf);
}

static std::vector<Digest> next_level(const std::vector<Digest>& level) {
  std::vector<Digest> up;
  up.reserve((level.size() + 1) / 2);
  std::size_t i = 0;
  for (; i + 1 < level.size(); i += 2) up.push_back(node_hash(level[i], level[i + 1]));
  if (i < level.size()) up.push_back(level[i]);  // odd node promoted
  return up;
}

Digest build_root(std::span<const Bytes> leaves) {
  if (leaves.empty()) return empty_root();
  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const Bytes& leaf : leaves) level.push_back(leaf_hash(leaf));
  while (level.size() > 1) level = next_level(level);
  return level.front();
}

ReceiptProof prove(std::span<const Bytes> leaves, std::size_t index) {
  if (index >= leaves.size()) fail(ErrCode::IndexOutOfRange, "leaf index past end");
  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const Bytes& leaf : leaves) level.push_back(leaf_hash(leaf));

  ReceiptProof proof;
  proof.leaf_index = static_cast<std::uint32_t>(index);
  std::size_t pos = index;
  while (level.size() > 1) {
    const std::size_t sib = pos ^ 1;
    if (sib < level.size()) {
      proof.siblings.push_back({level[sib], (sib < pos) ? Side::Left : Side::Right});
    }
    // an odd trailing node has no sibling at this level and is promoted
    pos /= 2;
    level = next_level(level);
  }
  proof.declared_root = level.front();
  return proof;
}

bool verify(const Digest& root, ByteView leaf, const ReceiptProof& proof) {
  Digest acc = leaf_hash(leaf);
  for (const ProofStep& step : proof.siblings) {
    acc = (step.side == Side::Left) ? node_hash(step.sibling, acc) : node_hash(acc, step.sibling);
  }
  return acc == root;
}

void write_proof(ByteWriter& w, const ReceiptProof& proof) {
  w.u32(proof.leaf_index);
  w.u32(static_cast<std::uint32_t>(proof.siblings.size()));
  for (const ProofStep& step : proof.siblings) {
    write_digest(w, step.sibling);
    w.u8(static_cast<std::uint8_t>(step.side));
  }
  write_digest(w, proof.declared_root);
}

ReceiptProof read_proof(ByteReader& r) {
  ReceiptProof proof;
  proof.leaf_index = r.u32();
  const std::uint32_t n = r.u32();
  proof.siblings.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ProofStep step;
    step.sibling = read_digest(r);
    const std::uint8_t side = r.u8();
    if (side > 1) fail(ErrCode::EncodingError, "bad proof side");
    step.side = static_cast<Side>(side);
    proof.siblings.push_back(step);
  }
  proof.declared_root = read_digest(r);
  return proof;
}

}  // namespace ix::merkle
