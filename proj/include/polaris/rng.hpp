#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace polaris {

// 64-bit FNV-1a over a label string.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Every random stream in the engine is derived from one root seed plus a
// stream label (and optionally an index), so runs are reproducible and
// streams are independent of each other.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                                    std::uint64_t index = 0) {
  return mix64(root ^ mix64(fnv1a64(stream)) ^ mix64(index * 0x9e3779b97f4a7c15ull + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view stream,
                                std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(root, stream, index));
}

}  // namespace polaris
