#include "planexec/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace planexec {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hexdigits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexdigits[md[i] >> 4]);
    out.push_back(hexdigits[md[i] & 0xf]);
  }
  return out;
}

std::string keyed_digest(std::string_view key, std::string_view bytes) {
  std::string buf;
  buf.reserve(key.size() + bytes.size() + 1);
  buf.append(key);
  buf.push_back('\x1f');
  buf.append(bytes);
  return sha256_hex(buf);
}

Encoder& Encoder::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<char>((v >> shift) & 0xff));
  }
  return *this;
}

Encoder& Encoder::bytes(std::string_view s) {
  u64(s.size());
  buf_.append(s);
  return *this;
}

Encoder& Encoder::list(const std::vector<std::string>& items) {
  u64(items.size());
  for (const auto& item : items) {
    bytes(item);
  }
  return *this;
}

}  // namespace planexec
