#pragma once

#include <span>
#include <vector>

#include "quasilab/params.hpp"
#include "quasilab/random.hpp"

namespace quasilab {

/// Occupancy distribution: o(0..ell) class counts summing to m.
using Occupancy = std::vector<int>;

/// log C(n, k); exact integer arithmetic for n <= 60, lgamma beyond.
double log_binomial(int n, int k);

/// C(n, k) p^k (1-p)^(n-k) with 0^0 = 1.
double binomial_pmf(int n, int k, double p);

/// A_H(b): sigma for b = 0, 1 otherwise.
inline double lumped_fitness(int b, double sigma) { return b == 0 ? sigma : 1.0; }

/// M_H(b, c): probability that a class-b chromosome mutates into class c.
double lumped_mutation(int ell, int kappa, double q, int b, int c);

/// Row M_H(b, 0..ell), computed as the convolution of the forward and
/// backward mutation counts.
std::vector<double> lumped_mutation_row(int ell, int kappa, double q, int b);

/// Lumped kernels for fixed (ell, kappa, q, sigma), with the full M_H matrix
/// and its row CDFs precomputed.
class LumpedKernel {
 public:
  LumpedKernel(int ell, int kappa, double q, double sigma);
  explicit LumpedKernel(const ModelParams& p) : LumpedKernel(p.ell, p.kappa, p.q, p.sigma) {}

  int ell() const { return ell_; }
  int kappa() const { return kappa_; }
  double q() const { return q_; }
  double sigma() const { return sigma_; }

  double mutation(int b, int c) const { return mh_[index(b, c)]; }
  std::span<const double> mutation_row(int b) const {
    return {mh_.data() + index(b, 0), static_cast<std::size_t>(ell_ + 1)};
  }
  /// Non-decreasing CDF of row b, last entry exactly 1.
  std::span<const double> mutation_cdf(int b) const {
    return {cdf_.data() + index(b, 0), static_cast<std::size_t>(ell_ + 1)};
  }

  /// p_h = sum_k o(k) A_H(k) M_H(k, h) / sum_k o(k) A_H(k): the class law of
  /// one child of population o.
  std::vector<double> child_class_law(std::span<const int> o) const;

 private:
  std::size_t index(int b, int c) const {
    return static_cast<std::size_t>(b) * (ell_ + 1) + static_cast<std::size_t>(c);
  }
  int ell_;
  int kappa_;
  double q_;
  double sigma_;
  std::vector<double> mh_;
  std::vector<double> cdf_;
};

/// Throws ValidationError unless o has ell+1 non-negative entries summing to m.
void check_occupancy(std::span<const int> o, int ell, int m);

/// Multinomial law of the next occupancy: m!/prod o2(h)! prod p_h^o2(h).
double occupancy_transition_prob(const LumpedKernel& kernel, std::span<const int> o,
                                 std::span<const int> o2);

/// Draws m children i.i.d. from the child class law.
Occupancy occupancy_step(const LumpedKernel& kernel, std::span<const int> o, Rng& rng);

/// o <= o2 iff every prefix sum of o is at most the matching prefix of o2.
bool leq(std::span<const int> o, std::span<const int> o2);

/// Every element of P^m_{ell+1}, o(0) = m first.
std::vector<Occupancy> all_occupancies(int ell, int m);

}  // namespace quasilab
