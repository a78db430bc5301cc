#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ix/hash.hpp"

namespace ix::merkle {

// Binary Merkle tree over canonical receipt encodings.
//
// Hashing is domain-separated: leaves are hashed with a 0x00 prefix, internal
// nodes with a 0x01 prefix, so a leaf can never masquerade as a node. An odd
// node at any level is promoted unchanged to the next level (no duplication).
// The root of the empty tree is the hash of the empty byte string.

inline constexpr std::uint8_t kLeafPrefix = 0x00;
inline constexpr std::uint8_t kNodePrefix = 0x01;

enum class Side : std::uint8_t { Left = 0, Right = 1 };

struct ProofStep {
  Digest sibling;
  Side side;  // where the sibling sits relative to the running hash

  bool operator==(const ProofStep&) const = default;
};

struct ReceiptProof {
  std::uint32_t leaf_index = 0;
  std::vector<ProofStep> siblings;
  Digest declared_root;

  bool operator==(const ReceiptProof&) const = default;
};

Digest empty_root();
Digest leaf_hash(ByteView leaf);
Digest node_hash(const Digest& left, const Digest& right);

Digest build_root(std::span<const Bytes> leaves);
ReceiptProof prove(std::span<const Bytes> leaves, std::size_t index);
bool verify(const Digest& root, ByteView leaf, const ReceiptProof& proof);

void write_proof(ByteWriter& w, const ReceiptProof& proof);
ReceiptProof read_proof(ByteReader& r);

}  // namespace ix::merkle
