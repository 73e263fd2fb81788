#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace marketsim::io {

// FNV-1a 64-bit; used for observation hashes and manifest content hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s) {
  return fnv1a(s.data(), s.size());
}

std::string hex64(std::uint64_t h);

// Hash of a file's raw bytes, formatted as 16 hex chars. Throws on IO error.
std::string hash_file(const std::string& path);

}  // namespace marketsim::io
