#include "sktap/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace sktap {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Seed replica_seed(Seed base, std::uint64_t replica) { return base ^ splitmix64(replica); }

double RandomStream::uniform(std::uint64_t i) const {
  const std::uint64_t block = i >> 1;
  const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block),
                                         static_cast<std::uint32_t>(block >> 32), stream_, 0u};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto r = philox4x32_10(ctr, key);
  const int half = static_cast<int>(i & 1u) * 2;
  const std::uint64_t bits = (static_cast<std::uint64_t>(r[half]) << 32) | r[half + 1];
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal(std::uint64_t i) const {
  // Phi^{-1}(u) = -sqrt(2) erfc^{-1}(2u)
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform(i));
}

void RandomStream::fill_normal(double* out, std::size_t count, std::uint64_t offset) const {
  for (std::size_t j = 0; j < count; ++j) out[j] = normal(offset + j);
}

Vector RandomStream::normal_vector(Index n, std::uint64_t offset) const {
  Vector v(n);
  fill_normal(v.data(), static_cast<std::size_t>(n), offset);
  return v;
}

}  // namespace sktap
