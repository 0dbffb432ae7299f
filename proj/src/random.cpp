#include "mbm/random.hpp"

#include <algorithm>

namespace mbm {

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

void NormalStream::fill(std::span<double> out) {
  for (double& x : out) x = normal_(engine_);
}

void ZeroSource::fill(std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t n, std::uint64_t path_index) {
  return mix64(mix64(mix64(master_seed) ^ n) ^ path_index);
}

}  // namespace mbm
