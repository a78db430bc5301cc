#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "ix/bytes.hpp"

namespace ix {

// 256-bit digest. One hash function (SHA-256) is used everywhere: block
// hashes, tx hashes, bytecode hashes, Merkle nodes, message ids.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex() const { return to_hex(bytes); }
  ByteView view() const { return ByteView(bytes.data(), bytes.size()); }
  bool is_zero() const;

  static Digest from_hex(std::string_view hex);
};

Digest sha256(ByteView data);
inline Digest sha256(const Bytes& data) { return sha256(ByteView(data)); }

// Contract address: sha256(chain_id, deployer, nonce) truncated to 20 bytes.
struct Address {
  std::array<std::uint8_t, 20> bytes{};

  auto operator<=>(const Address&) const = default;

  std::string hex() const { return to_hex(bytes); }
  bool is_zero() const;

  static Address from_hex(std::string_view hex);
};

using AccountId = std::string;

Address derive_address(std::uint32_t chain_id, const AccountId& deployer, std::uint64_t nonce);

inline void write_digest(ByteWriter& w, const Digest& d) { w.raw(d.view()); }
Digest read_digest(ByteReader& r);
inline void write_address(ByteWriter& w, const Address& a) { w.raw(ByteView(a.bytes.data(), a.bytes.size())); }
Address read_address(ByteReader& r);

}  // namespace ix
