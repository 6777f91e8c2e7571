#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "quasilab/params.hpp"
#include "quasilab/random.hpp"
#include "quasilab/reduced_chain.hpp"
#include "quasilab/table.hpp"

namespace quasilab {

/// Which process estimate_stationary simulates: the sequence-level chain, the
/// occupancy chain, or the reduced chain Z^theta of either bounding process.
enum class ChainKind { wf, occupancy, lower, upper };

ChainKind parse_chain_kind(const std::string& name);
const char* to_string(ChainKind kind);

struct StationaryOptions {
  ChainKind chain = ChainKind::occupancy;
  /// Negative selects default_burn_in(params).
  long burn_in = -1;
  long steps = 10'000;
  int replicas = 32;
  std::uint64_t seed = 1;
};

struct StationaryEstimate {
  ChainKind chain = ChainKind::occupancy;
  int K = 0;
  int replicas = 0;
  long burn_in = 0;
  long steps = 0;
  /// Per class k <= K: mean of N_k/m over time and replicas.
  std::vector<double> mean;
  /// Per class: within-replica time variance of N_k/m, averaged over replicas.
  std::vector<double> variance;
  /// Per class: standard deviation of the replica means over sqrt(replicas).
  std::vector<double> standard_error;
  /// Same three quantities for sum_{j<=k} N_j/m.
  std::vector<double> prefix_mean;
  std::vector<double> prefix_standard_error;
  /// Per class: |first-half mean - second-half mean| in units of their
  /// combined standard error; NaN with a single replica.
  std::vector<double> half_discrepancy;
  /// False when some half_discrepancy exceeds 4.
  bool mixing_ok = true;
  std::vector<std::vector<double>> replica_means;
};

/// 10 times the number of iterations of F from (1, 0, ..., 0) needed to come
/// within 1e-3 of its limit in l1, and at least 10.
long default_burn_in(const ModelParams& p);

/// Runs independent replicas from the all-master state (z_enter for the
/// reduced chains), discards the burn-in and averages N_k/m for k <= K.
/// Replica r uses make_stream(seed, r); the result does not depend on the
/// number of threads. Structural checks only, so q = 0 is accepted.
StationaryEstimate estimate_stationary(const ModelParams& p, const StationaryOptions& opts);

Table stationary_table(const ModelParams& p, const StationaryEstimate& est);

// ---------------------------------------------------------------------------
// Renewal identity

/// A Markov chain on integer vectors with a regeneration state e.
struct RenewalSpec {
  ClassVector e;
  std::function<ClassVector(const ClassVector&, Rng&)> step;
  std::function<double(const ClassVector&)> f;
  /// Steps per replica, for each side.
  long horizon = 100'000;
  long burn_in = 0;
  int replicas = 16;
  std::uint64_t seed = 1;
};

struct RenewalResult {
  double time_average = 0.0;
  double time_average_se = 0.0;
  double cycle_ratio = 0.0;
  double cycle_ratio_se = 0.0;
  /// |time_average - cycle_ratio| / sqrt(se_1^2 + se_2^2).
  double discrepancy = 0.0;
  long cycles = 0;
};

/// Left side: long-run time average of f (replica r on stream 2r), with the
/// standard error from 20 batch means per replica. Right
/// side: sum over complete cycles from e of the f-sums over the sum of cycle
/// lengths (replica r on stream 2r+1), with a delta-method standard error.
RenewalResult renewal_check(const RenewalSpec& spec);

/// Two-state chain on {0}, {1}: P(0 -> 1) = p01, P(1 -> 0) = p10, e = {0}.
RenewalSpec two_state_spec(double p01, double p10);

/// Z^theta with e = z_enter.
RenewalSpec reduced_chain_spec(const ReducedChain& chain, std::function<double(const ClassVector&)> f);

/// Stationary law of Z^theta from the exact rows, by power iteration from
/// z_enter (so the unreachable absorbing states get no mass).
std::vector<std::pair<ClassVector, double>> exact_stationary(const ReducedChain& chain,
                                                             double tol = 1e-14,
                                                             long max_iters = 1'000'000);

// ---------------------------------------------------------------------------
// Stopping times

struct TimeSummary {
  int replicas = 0;
  std::int64_t cap = 0;
  /// Means over all samples, censored ones counted at the cap.
  double mean_tau_star = 0.0;
  double mean_tau = 0.0;
  double mean_tau0 = 0.0;
  double censored_tau_star = 0.0;
  double censored_tau = 0.0;
  double censored_tau0 = 0.0;
  std::int64_t max_sample = 0;
};

TimeSummary summarize_times(const std::vector<StoppingTimes>& samples, std::int64_t cap);

struct TimeTrendRow {
  ModelParams params;
  TimeSummary summary;
};

/// hitting_times for each parameter set, one summary row each.
std::vector<TimeTrendRow> measure_times(const std::vector<ModelParams>& grid, Theta theta,
                                        int replicas, std::int64_t cap, std::uint64_t seed);

Table times_table(const std::vector<StoppingTimes>& samples);
Table time_trend_table(const std::vector<TimeTrendRow>& rows, Theta theta);

// ---------------------------------------------------------------------------
// Phase scan

struct PhaseScanOptions {
  int ell = 20;
  int kappa = 2;
  double sigma = 2.0;
  int K = 0;
  long burn_in = -1;
  long steps = 2'000;
  int replicas = 4;
  std::uint64_t seed = 1;
  /// Tolerance recorded with the output: |N_0/m - rho*_0| <= abs_tol + se_factor SE.
  double abs_tol = 0.05;
  double se_factor = 4.0;
};

struct PhasePoint {
  double a = 0.0;
  double alpha = 0.0;
  int ell = 0;
  int m = 0;
  double q = 0.0;
  double psi = 0.0;
  double rho0 = 0.0;
  bool quasispecies = false;
  double n0_mean = 0.0;
  double n0_se = 0.0;
};

/// For each (a, alpha): psi(a), the predicted phase (alpha psi(a) > ln kappa),
/// and the stationary N_0/m of the occupancy chain at q = a/ell,
/// m = round(alpha ell), started from all-master.
std::vector<PhasePoint> phase_scan(const std::vector<double>& a_grid,
                                   const std::vector<double>& alpha_grid,
                                   const PhaseScanOptions& opts);

Table phase_table(const std::vector<PhasePoint>& points, const PhaseScanOptions& opts);

}  // namespace quasilab
