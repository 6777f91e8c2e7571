#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quasilab/dynamics.hpp"
#include "quasilab/nelder_mead.hpp"
#include "quasilab/params.hpp"

namespace quasilab {

class ReducedChain;

// ---------------------------------------------------------------------------
// Rate functions

/// I(p, t) = t ln(t/p) + (1-t) ln((1-t)/(1-p)), with 0 ln(0/0) = 0. Returns
/// +infinity when t puts mass where p has none, or p, t are outside [0, 1].
double binomial_rate(double p, double t);

/// I_K(p, t) = sum_k t_k ln(t_k/p_k) + (1-|t|_1) ln((1-|t|_1)/(1-|p|_1)).
double multinomial_rate(std::span<const double> p, std::span<const double> t);

struct MultinomialBoundCheck {
  double residual = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// |ln(n!/(i_0!...i_N!(n-s)!)) + sum_k i_k ln(i_k/n) + (n-s) ln((n-s)/n)|
/// against (N+2) ln n + 2N + 3, with N + 1 = counts.size().
MultinomialBoundCheck log_multinomial_bound_check(int n, std::span<const int> counts);

/// M_inf(i, j) = e^{-a} a^{j-i}/(j-i)! for i <= j, 0 otherwise.
double limit_mutation(int i, int j, double a);

/// (M_inf(k, 0), ..., M_inf(k, K)).
std::vector<double> limit_mutation_row(int k, int K, double a);

/// (K+1) x (K+1) matrix beta(i, j), row-major.
using TransportMatrix = std::vector<std::vector<double>>;

/// beta in B(t): upper triangular, entries in [0, 1], column sums equal t.
bool in_transport_set(const TransportMatrix& beta, std::span<const double> t, double tol = 1e-12);

/// I(r, xi, beta, t) = I_K(f(r), xi) + sum_k xi_k I_K(M_inf(k), beta(k, .)/xi_k),
/// +infinity unless r, xi, t are in D and beta is in B(t).
double rate_I(const LimitModel& model, std::span<const double> r, std::span<const double> xi,
              const TransportMatrix& beta, std::span<const double> t);

/// Finite-size counterpart I_l built on the lumped kernel rows of `chain`,
/// including the theta-class term.
double rate_I_finite(const ReducedChain& chain, double sigma, std::span<const double> r,
                     std::span<const double> xi, const TransportMatrix& beta,
                     std::span<const double> t);

struct ZeroSetWitness {
  SimplexPoint xi;
  TransportMatrix beta;
  SimplexPoint t;
};

/// xi = f(r), beta(k, j) = xi_k M_inf(k, j), t = column sums = F(r).
ZeroSetWitness zero_set_witness(const LimitModel& model, std::span<const double> r);

// ---------------------------------------------------------------------------
// Variational costs

struct CostOptions {
  int restarts = 20;
  std::uint64_t seed = 0x5eed;
  NelderMeadOptions nelder_mead{};
};

struct CostResult {
  double value = 0.0;
  /// Points rho_0 = r, ..., rho_l = t.
  std::vector<SimplexPoint> path;
  /// Minimising xi_k and beta_k of each step.
  std::vector<SimplexPoint> xi;
  std::vector<TransportMatrix> beta;
};

/// V_1(r, t) = inf { I(r, xi, beta, t) : xi in D, beta in B(t) }, by
/// multi-start simplex search. Restart i depends only on (seed, i), so more
/// restarts never raise the value. Throws ConvergenceError if no feasible
/// point is found.
CostResult cost_V1(const LimitModel& model, std::span<const double> r, std::span<const double> t,
                   const CostOptions& opts = {});

struct PathCostOptions {
  CostOptions inner{4, 0x5eed, {}};
  int outer_restarts = 2;
  NelderMeadOptions outer{0.05, 1e-14, 1e-9, 4000};
};

/// V_l(r, t): l chained V_1 steps with the intermediate points optimised
/// jointly. Starts from the deterministic orbit, the straight line, and any
/// `extra_starts` (each a list of l-1 intermediate points).
CostResult cost_Vl(const LimitModel& model, std::span<const double> r, std::span<const double> t,
                   int l, const PathCostOptions& opts = {},
                   const std::vector<std::vector<SimplexPoint>>& extra_starts = {});

// ---------------------------------------------------------------------------
// One-dimensional (K = 0) costs: master sequence only

/// Selection probability of the master class at concentration rho. With
/// `printed_denominator` the variant sigma rho / ((sigma-1) rho - 1) is used.
double master_selection(double rho, double sigma, bool printed_denominator = false);

/// min over gamma in [t, 1] of I(sel(rho), gamma) + gamma I(e^{-a}, t/gamma):
/// the K = 0 one-step cost.
double master_step_cost(const LimitModel& model, double rho, double t,
                        bool printed_denominator = false);

/// Sum of master_step_cost along consecutive points of `path`.
double master_path_cost(const LimitModel& model, std::span<const double> path,
                        bool printed_denominator = false);

struct MasterPathOptions {
  /// Grid points of [0, 1] for the global search (spaced as (i/grid)^2).
  int grid = 400;
  int max_sweeps = 200;
  bool printed_denominator = false;
};

struct MasterPathResult {
  double value = 0.0;
  std::vector<double> path;  // rho_0..rho_l
};

/// l-step cost from s to t over intermediate points in [0, 1]: a dynamic
/// programme on a grid gives the global candidate, which is then polished by
/// cyclic coordinate descent together with the orbit of F~, the straight
/// line and `warm_start` when given.
MasterPathResult master_cost_l(const LimitModel& model, double s, double t, int l,
                               const MasterPathOptions& opts = {},
                               std::span<const double> warm_start = {});

/// inf over l <= l_max of master_cost_l: the K = 0 multi-step cost V~(s, t).
MasterPathResult master_cost(const LimitModel& model, double s, double t, int l_max = 50,
                             const MasterPathOptions& opts = {});

/// Whether V~(s, t) = 0 numerically (below `tol`) with l <= l_max. Requires
/// sigma e^{-a} > 1 (throws ValidationError otherwise).
bool master_cost_zero_check(const LimitModel& model, double s, double t, int l_max = 50,
                            double tol = 1e-6);

struct PsiOptions {
  int l_max = 20;
  /// l_max is doubled until the value moves by less than rel_tol, at most up to l_cap.
  double rel_tol = 1e-3;
  int l_cap = 320;
  bool printed_denominator = false;
  /// Sum from k = 1 as printed: the step out of rho_0 carries no cost, so
  /// rho_1 is free.
  bool literal_index = false;
  MasterPathOptions path{};
};

struct PsiResult {
  double value = 0.0;
  int best_l = 0;
  std::vector<double> path;
  int l_max_used = 0;
  /// Value at l_max_used / 2, the stabilisation certificate.
  double previous_value = 0.0;
  bool stabilized = false;
  /// True when rho*(a) = 0 and psi = 0 holds by convention.
  bool by_convention = false;
  /// Grid-programme cost with exactly l steps, at index l-1 (before polishing).
  std::vector<double> value_by_l;
};

/// psi(a) = inf_l inf { sum_{k=0}^{l-1} I(sel(rho_k), gamma_k)
///                      + gamma_k I(e^{-a}, rho_{k+1}/gamma_k) },
/// rho_0 = rho*(a), rho_l = 0.
PsiResult psi(const LimitModel& model, const PsiOptions& opts = {});

/// ln(kappa) / psi; +infinity when psi = 0.
double critical_alpha(double psi_value, int kappa);

}  // namespace quasilab
