#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace quasilab {

using Rng = std::mt19937_64;

/// splitmix64 finaliser, used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replica `index` under master seed `seed`: mix64(seed ^ mix64(index)).
constexpr std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(replica_seed(seed, index));
}

/// Uniform draw in [0, 1).
inline double uniform01(Rng& rng) {
  return std::generate_canonical<double, 53>(rng);
}

/// Multinomial(n, probs) by sequential conditional binomials. `probs` need
/// not be normalised; counts.size() == probs.size().
void sample_multinomial(Rng& rng, int n, std::span<const double> probs, std::span<int> counts);

std::vector<int> sample_multinomial(Rng& rng, int n, std::span<const double> probs);

/// Index i with cdf[i-1] <= u < cdf[i], skipping zero-mass entries; `cdf` is
/// non-decreasing with last entry the total mass.
int inverse_cdf(std::span<const double> cdf, double u);

}  // namespace quasilab
