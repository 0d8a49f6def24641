#pragma once

#include <cstdint>
#include <string_view>

namespace modnls {

/// One step of the splitmix64 generator; advances `state`.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-component seed derived from one global seed.
///
/// The component name is folded with FNV-1a and mixed into the global seed
/// through one splitmix64 step, so streams of different components are
/// independent of each other and of the order components are created in.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view component) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : component) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = global_seed ^ h;
  return splitmix64(state);
}

}  // namespace modnls
