#include "surfcomp/util/base64.hpp"

#include <sodium.h>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {
constexpr int kVariant = sodium_base64_VARIANT_ORIGINAL;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(sodium_base64_encoded_len(bytes.size(), kVariant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), kVariant);
  out.resize(out.size() - 1);  // drop the terminating NUL
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
  std::size_t written = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(),
                        " \r\n", &written, &end, kVariant) != 0 ||
      end != text.data() + text.size()) {
    throw PreconditionError("malformed base64 payload");
  }
  out.resize(written);
  return out;
}

}  // namespace surfcomp
