#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace rtlscan {

// 64-bit FNV-1a. Used for fixture keys, assertion ids and config digests.
// Stable across platforms and runs; not cryptographic.
class Digest {
 public:
  Digest() = default;

  Digest& update(std::string_view data) {
    for (unsigned char c : data) {
      state_ ^= c;
      state_ *= 0x100000001b3ull;
    }
    return *this;
  }

  // Length-prefixes each field so ("ab","c") and ("a","bc") differ.
  Digest& field(std::string_view data) {
    update(std::to_string(data.size()));
    update(":");
    update(data);
    return *this;
  }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
      out[i] = digits[v & 0xf];
      v >>= 4;
    }
    return out;
  }

  uint64_t value() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ull;
};

inline std::string digest_of(std::initializer_list<std::string_view> fields) {
  Digest d;
  for (auto f : fields) d.field(f);
  return d.hex();
}

}  // namespace rtlscan
