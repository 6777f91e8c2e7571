#pragma once

#include <span>
#include <vector>

#include "quasilab/params.hpp"

namespace quasilab {

/// Limit parameters of the deterministic dynamics: master fitness sigma and
/// a = lim ell*q.
struct LimitModel {
  double sigma = 2.0;
  double a = 0.1;

  /// sigma e^{-a} > 1: the quasispecies regime.
  bool supercritical() const;
};

/// f(r) = (sigma r_0, r_1, ..., r_K) / ((sigma-1) r_0 + 1).
SimplexPoint selection_map_f(std::span<const double> r, double sigma);

/// F_k(r) = sum_{i<=k} f_i(r) e^{-a} a^{k-i}/(k-i)!.
SimplexPoint limit_map_F(std::span<const double> r, const LimitModel& model);

/// Same map through the expanded form
/// e^{-a}/((sigma-1) r_0 + 1) (a^k/k! sigma r_0 + sum_{1<=i<=k} a^{k-i}/(k-i)! r_i).
SimplexPoint limit_map_F_expanded(std::span<const double> r, const LimitModel& model);

/// F~(r) = e^{-a} sigma r / ((sigma-1) r + 1).
double scalar_map_Ftilde(double r, const LimitModel& model);

struct QuasispeciesDistribution {
  std::vector<double> rho;  // rho*_0..rho*_K, zero when subcritical
  bool supercritical = false;
};

/// rho*_k = (sigma e^{-a} - 1) a^k/k! sum_{i>=1} i^k / sigma^i in the
/// supercritical regime, 0 otherwise.
QuasispeciesDistribution rho_star(const LimitModel& model, int K);

struct FixedPointResult {
  SimplexPoint point;
  long iterations = 0;
};

/// Iterates z <- F(z) until |z^{n+1} - z^n|_1 < tol. Throws ConvergenceError
/// with the last iterate after max_iters.
FixedPointResult iterate_to_fixed_point(std::span<const double> z0, const LimitModel& model,
                                        double tol = 1e-12, long max_iters = 1'000'000);

/// Iterations of F from z0 until |z^n - target|_1 < eps, target being rho*
/// (or 0 when z0_0 = 0 or subcritical). Returns max_iters if never reached.
long relaxation_time(std::span<const double> z0, const LimitModel& model, double eps = 1e-3,
                     long max_iters = 1'000'000);

}  // namespace quasilab
