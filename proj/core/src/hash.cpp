#include "ix/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>

#include "ix/errors.hpp"

namespace ix {

Digest sha256(ByteView data) {
  Digest out;
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.bytes.data(), &len) != 1 || len != out.bytes.size()) {
    EVP_MD_CTX_free(ctx);
    fail(ErrCode::EncodingError, "sha256 failure");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

bool Digest::is_zero() const {
  return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

Digest Digest::from_hex(std::string_view hex) {
  Bytes raw = ix::from_hex(hex);
  if (raw.size() != 32) fail(ErrCode::EncodingError, "digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

bool Address::is_zero() const {
  return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

Address Address::from_hex(std::string_view hex) {
  Bytes raw = ix::from_hex(hex);
  if (raw.size() != 20) fail(ErrCode::EncodingError, "address must be 20 bytes");
  Address a;
  std::copy(raw.begin(), raw.end(), a.bytes.begin());
  return a;
}

Address derive_address(std::uint32_t chain_id, const AccountId& deployer, std::uint64_t nonce) {
  ByteWriter w;
  w.u32(chain_id);
  w.str(deployer);
  w.u64(nonce);
  const Digest d = sha256(w.view());
  Address a;
  std::copy(d.bytes.begin(), d.bytes.begin() + 20, a.bytes.begin());
  return a;
}

Digest read_digest(ByteReader& r) {
  Digest d;
  for (auto& b : d.bytes) b = r.u8();
  return d;
}

Address read_address(ByteReader& r) {
  Address a;
  for (auto& b : a.bytes) b = r.u8();
  return a;
}

}  // namespace ix
