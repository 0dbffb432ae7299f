#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mbm {

/// Source of independent standard normal variates.
class GaussianSource {
 public:
  virtual ~GaussianSource() = default;
  virtual void fill(std::span<double> out) = 0;
};

/// Seeded mt19937_64 stream; identical seeds give identical variates.
class NormalStream final : public GaussianSource {
 public:
  explicit NormalStream(std::uint64_t seed);
  void fill(std::span<double> out) override;

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Degenerate stream that only yields zeros (for linearity tests).
class ZeroSource final : public GaussianSource {
 public:
  void fill(std::span<double> out) override;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the stream owned by (master seed, grid size, path index).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t n, std::uint64_t path_index);

}  // namespace mbm
