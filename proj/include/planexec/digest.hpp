#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace planexec {

// Hex-encoded SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// Keyed digest used as a simulated signature: sha256(key || bytes).
std::string keyed_digest(std::string_view key, std::string_view bytes);

// Canonical byte encoding: length-prefixed fields appended in declaration
// order. Two values encode to the same bytes iff they are equal field-wise.
class Encoder {
 public:
  Encoder& u64(std::uint64_t v);                        // 8 bytes, big-endian
  Encoder& bytes(std::string_view s);                   // u64 length + raw
  Encoder& list(const std::vector<std::string>& items); // u64 count + each
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

}  // namespace planexec
