#pragma once

#include "sktap/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>

namespace sktap {

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Per-replica seed: base xor splitmix64(replica).
Seed replica_seed(Seed base, std::uint64_t replica);

enum class Stream : std::uint32_t {
  disorder = 0,
  magnetization = 1,
  probe = 2,
};

// Counter-addressed random numbers: draw i depends only on (seed, stream, i).
// Normals use inverse-transform sampling.
class RandomStream {
 public:
  RandomStream(Seed seed, Stream stream) : seed_(seed), stream_(static_cast<std::uint32_t>(stream)) {}

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform(std::uint64_t i) const;
  double normal(std::uint64_t i) const;
  void fill_normal(double* out, std::size_t count, std::uint64_t offset = 0) const;
  Vector normal_vector(Index n, std::uint64_t offset = 0) const;

 private:
  Seed seed_;
  std::uint32_t stream_;
};

}  // namespace sktap
