#include "quasilab/random.hpp"

#include <algorithm>

namespace quasilab {

void sample_multinomial(Rng& rng, int n, std::span<const double> probs, std::span<int> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  std::ptrdiff_t last = static_cast<std::ptrdiff_t>(probs.size()) - 1;
  while (last >= 0 && !(probs[last] > 0.0)) --last;
  if (last < 0 || n <= 0) return;
  double remaining_mass = 0.0;
  for (std::ptrdiff_t i = 0; i <= last; ++i) remaining_mass += probs[i];
  int remaining = n;
  for (std::ptrdiff_t i = 0; i < last && remaining > 0; ++i) {
    if (probs[i] > 0.0) {
      const double p = probs[i] / remaining_mass;
      int c = remaining;
      if (p < 1.0) {
        std::binomial_distribution<int> bin(remaining, p);
        c = bin(rng);
      }
      counts[i] = c;
      remaining -= c;
    }
    remaining_mass -= probs[i];
  }
  counts[last] += remaining;
}

std::vector<int> sample_multinomial(Rng& rng, int n, std::span<const double> probs) {
  std::vector<int> counts(probs.size(), 0);
  sample_multinomial(rng, n, probs, counts);
  return counts;
}

int inverse_cdf(std::span<const double> cdf, double u) {
  const double total = cdf.back();
  const double target = u * total;
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) {
    // u*total rounded up to total: take the last entry carrying mass.
    int i = static_cast<int>(cdf.size()) - 1;
    while (i > 0 && cdf[i] == cdf[i - 1]) --i;
    return i;
  }
  return static_cast<int>(it - cdf.begin());
}

}  // namespace quasilab
