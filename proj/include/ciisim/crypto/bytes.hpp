#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ciisim::crypto {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class CryptoErrc {
  kOutOfRange,
  kOffCurve,
  kInvalidCurve,
  kKeyLength,
  kTagMismatch,
  kMalformed,
};

class CryptoError : public std::runtime_error {
 public:
  CryptoError(CryptoErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  CryptoErrc code() const noexcept { return code_; }

 private:
  CryptoErrc code_;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace ciisim::crypto
