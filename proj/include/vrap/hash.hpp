#pragma once

#include <cstdint>
#include <string_view>

namespace vrap {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

/// splitmix64 finalizer; used to decorrelate seeded hashes.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Incremental FNV-1a over length-prefixed fields, so ("ab","c") and
/// ("a","bc") hash differently.
class FieldHasher {
 public:
  void add(std::string_view field) noexcept {
    add_u64(field.size());
    state_ = fnv1a(field, state_);
  }
  void add_u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(v >> (8 * i));
      state_ *= kFnvPrime;
    }
  }
  std::uint64_t digest() const noexcept { return mix64(state_); }

 private:
  std::uint64_t state_ = kFnvOffset;
};

}  // namespace vrap
