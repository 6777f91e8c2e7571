#include "quasilab/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "quasilab/errors.hpp"

namespace quasilab {

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  k = std::min(k, n - k);
  if (n <= 60) {
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / i;
    return std::log(static_cast<double>(c));
  }
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_binomial(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

std::vector<double> lumped_mutation_row(int ell, int kappa, double q, int b) {
  // A class-b chromosome gains k mismatches among its ell-b matching loci
  // and loses l of its b mismatches; it lands in class b + k - l.
  const double back = q / (kappa - 1);
  std::vector<double> gain(ell - b + 1), loss(b + 1);
  for (int k = 0; k <= ell - b; ++k) gain[k] = binomial_pmf(ell - b, k, q);
  for (int l = 0; l <= b; ++l) loss[l] = binomial_pmf(b, l, back);
  std::vector<double> row(ell + 1, 0.0);
  for (int k = 0; k <= ell - b; ++k) {
    if (gain[k] == 0.0) continue;
    for (int l = 0; l <= b; ++l) row[b + k - l] += gain[k] * loss[l];
  }
  return row;
}

double lumped_mutation(int ell, int kappa, double q, int b, int c) {
  if (b < 0 || b > ell || c < 0 || c > ell) return 0.0;
  const double back = q / (kappa - 1);
  double sum = 0.0;
  // k - l = c - b, 0 <= k <= ell-b, 0 <= l <= b.
  for (int l = 0; l <= b; ++l) {
    const int k = c - b + l;
    if (k < 0 || k > ell - b) continue;
    sum += binomial_pmf(ell - b, k, q) * binomial_pmf(b, l, back);
  }
  return sum;
}

LumpedKernel::LumpedKernel(int ell, int kappa, double q, double sigma)
    : ell_(ell), kappa_(kappa), q_(q), sigma_(sigma) {
  if (ell < 1 || kappa < 2) throw ValidationError("LumpedKernel: need ell >= 1, kappa >= 2");
  const auto n = static_cast<std::size_t>(ell + 1);
  mh_.resize(n * n);
  cdf_.resize(n * n);
  for (int b = 0; b <= ell; ++b) {
    auto row = lumped_mutation_row(ell, kappa, q, b);
    double acc = 0.0;
    for (int c = 0; c <= ell; ++c) {
      mh_[index(b, c)] = row[c];
      acc += row[c];
      cdf_[index(b, c)] = acc;
    }
    for (int c = 0; c <= ell; ++c) cdf_[index(b, c)] = std::min(1.0, cdf_[index(b, c)] / acc);
    cdf_[index(b, ell)] = 1.0;
  }
}

std::vector<double> LumpedKernel::child_class_law(std::span<const int> o) const {
  std::vector<double> law(ell_ + 1, 0.0);
  double total = 0.0;
  for (int k = 0; k <= ell_; ++k) {
    if (o[k] == 0) continue;
    const double w = o[k] * lumped_fitness(k, sigma_);
    total += w;
    auto row = mutation_row(k);
    for (int h = 0; h <= ell_; ++h) law[h] += w * row[h];
  }
  for (double& x : law) x /= total;
  return law;
}

void check_occupancy(std::span<const int> o, int ell, int m) {
  if (static_cast<int>(o.size()) != ell + 1)
    throw ValidationError("occupancy must have ell+1 = " + std::to_string(ell + 1) + " entries");
  long long s = 0;
  for (int x : o) {
    if (x < 0) throw ValidationError("occupancy entries must be non-negative");
    s += x;
  }
  if (s != m) throw ValidationError("occupancy entries must sum to m = " + std::to_string(m));
}

double occupancy_transition_prob(const LumpedKernel& kernel, std::span<const int> o,
                                 std::span<const int> o2) {
  const auto law = kernel.child_class_law(o);
  int m = 0;
  for (int x : o2) m += x;
  double log_p = std::lgamma(m + 1.0);
  for (std::size_t h = 0; h < o2.size(); ++h) {
    if (o2[h] == 0) continue;
    if (law[h] <= 0.0) return 0.0;
    log_p += o2[h] * std::log(law[h]) - std::lgamma(o2[h] + 1.0);
  }
  return std::exp(log_p);
}

Occupancy occupancy_step(const LumpedKernel& kernel, std::span<const int> o, Rng& rng) {
  int m = 0;
  for (int x : o) m += x;
  const auto law = kernel.child_class_law(o);
  return sample_multinomial(rng, m, law);
}

bool leq(std::span<const int> o, std::span<const int> o2) {
  long long a = 0, b = 0;
  for (std::size_t l = 0; l < o.size(); ++l) {
    a += o[l];
    b += o2[l];
    if (a > b) return false;
  }
  return true;
}

namespace {

void compositions(int parts, int total, Occupancy& cur, int pos, std::vector<Occupancy>& out) {
  if (pos == parts - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur[pos] = v;
    compositions(parts, total - v, cur, pos + 1, out);
  }
}

}  // namespace

std::vector<Occupancy> all_occupancies(int ell, int m) {
  std::vector<Occupancy> out;
  Occupancy cur(ell + 1, 0);
  compositions(ell + 1, m, cur, 0, out);
  return out;
}

}  // namespace quasilab
