#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace editforge {

/// 64-bit FNV-1a, used for sample ids and config fingerprints.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001B3ULL;
    }
    return *this;
  }

  Fnv1a& update(std::span<const unsigned char> bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001B3ULL;
    }
    return *this;
  }

  Fnv1a& update_u64(std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(value >> (8 * i));
      state_ *= 0x100000001B3ULL;
    }
    return *this;
  }

  std::uint64_t digest() const { return state_; }

  std::string hex() const { return to_hex(state_); }

  static std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

inline std::string fnv1a_hex(std::string_view bytes) { return Fnv1a{}.update(bytes).hex(); }

}  // namespace editforge
