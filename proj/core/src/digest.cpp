#include "docsimp/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "docsimp/error.hpp"

namespace docsimp {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error(ErrorCode::io, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0x0f]);
  }
  return out;
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::non_alphabetic_word: return "non-alphabetic-word";
    case ErrorCode::transport: return "transport";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::provider: return "provider";
    case ErrorCode::replay_miss: return "replay-miss";
    case ErrorCode::unknown_template: return "unknown-template";
    case ErrorCode::missing_binding: return "missing-binding";
    case ErrorCode::extra_binding: return "extra-binding";
    case ErrorCode::template_format: return "template-format";
    case ErrorCode::empty_bank: return "empty-bank";
    case ErrorCode::cot_generation: return "cot-generation";
    case ErrorCode::missing_unit_text: return "missing-unit-text";
    case ErrorCode::empty_references: return "empty-references";
    case ErrorCode::no_verdicts: return "no-verdicts";
    case ErrorCode::manifest: return "manifest";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

}  // namespace docsimp
