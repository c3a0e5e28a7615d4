#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace dilaflow {

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// 16 hex digits of the FNV-1a hash, optionally behind a short prefix.
inline std::string content_id(std::string_view text, std::string_view prefix = {}) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return std::string(prefix) + buf;
}

}  // namespace dilaflow
