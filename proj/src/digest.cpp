#include "sdoc/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <stdexcept>

namespace sdoc {

namespace {

void hex_append(std::string& out, const unsigned char* bytes, size_t n) {
  static const char* digits = "0123456789abcdef";
  for (size_t i = 0; i < n; ++i) {
    out.push_back(digits[bytes[i] >> 4]);
    out.push_back(digits[bytes[i] & 0x0f]);
  }
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data) {
    if (EVP_DigestUpdate(ctx_, data.data(), data.size()) != 1) {
      throw std::runtime_error("sha256 update failed");
    }
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) {
      throw std::runtime_error("sha256 final failed");
    }
    std::string out;
    out.reserve(2 * len);
    hex_append(out, md.data(), len);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string length_prefix(std::string_view field) {
  // 8-byte big-endian length, then the bytes.
  std::string out;
  uint64_t n = field.size();
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((n >> shift) & 0xff));
  }
  out.append(field);
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string digest_fields(const std::vector<std::string>& fields) {
  Sha256 h;
  for (const auto& f : fields) {
    h.update(length_prefix(f));
  }
  return h.hex();
}

std::string digest_fields(std::initializer_list<std::string_view> fields) {
  Sha256 h;
  for (auto f : fields) {
    h.update(length_prefix(f));
  }
  return h.hex();
}

}  // namespace sdoc
