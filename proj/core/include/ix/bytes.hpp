#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ix/errors.hpp"

namespace ix {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Canonical serialization used for everything that gets hashed: integers are
// little-endian with fixed width, byte strings and strings carry a u32 length
// prefix, sequences carry a u32 count prefix. See docs/protocol.md.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void boolean(bool v) { u8(v ? 1 : 0); }
  void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void bytes(ByteView data);
  void str(std::string_view s);

  template <class T, class Fn>
  void seq(const std::vector<T>& items, Fn&& encode_one) {
    u32(static_cast<std::uint32_t>(items.size()));
    for (const auto& item : items) encode_one(*this, item);
  }

  void str_u64_map(const std::map<std::string, std::uint64_t>& m);

  const Bytes& view() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  bool boolean() { return u8() != 0; }
  Bytes bytes();
  std::string str();
  std::map<std::string, std::uint64_t> str_u64_map();

  std::uint32_t seq_len() { return u32(); }

  bool done() const { return pos_ == data_.size(); }
  void expect_done() const;

 private:
  void need(std::size_t n) const;

  ByteView data_;
  std::size_t pos_ = 0;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

}  // namespace ix
