#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace triage {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
inline std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
std::uint64_t Fnv1aValue(const T& value, std::uint64_t h) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  return Fnv1a(std::string_view(bytes, sizeof(T)), h);
}

// splitmix64 finalizer; spreads a combined key into a generator seed.
inline std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace triage
