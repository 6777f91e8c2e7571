#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "quasilab/coupling.hpp"
#include "quasilab/occupancy.hpp"
#include "quasilab/params.hpp"
#include "quasilab/random.hpp"

namespace quasilab {

/// Which bounding process the reduced chain follows: theta = ell (lower) or
/// theta = K+1 (upper).
using Theta = Bound;

enum class StateTag { generic, enter, exit };

const char* to_string(StateTag tag);

struct ReducedState {
  ClassVector z;
  StateTag tag = StateTag::generic;

  bool operator==(const ReducedState& other) const { return z == other.z; }
};

/// Largest instance accepted by the exact transition enumeration.
inline constexpr int kReducedGuardM = 12;
inline constexpr int kReducedGuardK = 2;

/// The chain Z^theta on D = {z in N^{K+1} : |z|_1 <= m}: classes 0..K of the
/// bounding process while a master sequence is present, with the remaining
/// m - |z|_1 individuals sitting in class theta.
class ReducedChain {
 public:
  ReducedChain(const ModelParams& p, Theta theta);

  Theta theta() const { return theta_; }
  /// The Hamming class that absorbs everything outside 0..K.
  int theta_class() const { return theta_ == Theta::lower ? ell_ : K_ + 1; }
  int m() const { return m_; }
  int K() const { return K_; }

  /// M_H(i, j) for i in {0..K, theta}, j in 0..K. Row index K+1 stands for theta.
  double mutation(int i, int j) const { return mh_[i][j]; }
  /// 1 - |M_H(i)|_1, summed over the classes outside 0..K.
  double escape(int i) const { return escape_[i]; }

  ReducedState enter() const;
  ReducedState exit() const;
  /// Wraps z with its tag. Throws ValidationError if z is not in D.
  ReducedState state(ClassVector z) const;

  /// Exact p^theta(z, z2), including the exit aggregation and the forced
  /// exit -> enter move. Throws GuardError past (m <= 12, K <= 2).
  double transition_prob(const ReducedState& z, const ReducedState& z2) const;

  /// Full row of p^theta(z, .), keyed by class vector. Same guard.
  std::map<ClassVector, double> transition_row(const ReducedState& z) const;

  /// p^theta(z, s, b, z2) summed over compatible s and b, with z_0 >= 1.
  /// No exit aggregation; z2_0 may be 0.
  double generic_prob(const ClassVector& z, const ClassVector& z2) const;

  /// Samples the next state by selection, then per-class mutation.
  ReducedState step(const ReducedState& z, Rng& rng) const;

  /// Every element of D.
  std::vector<ClassVector> states() const;

 private:
  void check_guard() const;

  Theta theta_;
  int ell_;
  int m_;
  int K_;
  double sigma_;
  std::vector<std::vector<double>> mh_;  // (K+2) x (K+1)
  std::vector<double> escape_;           // K+2
};

struct StoppingTimes {
  std::int64_t tau_star = 0;
  std::int64_t tau = 0;
  std::int64_t tau0 = 0;
  bool tau_star_censored = false;
  bool tau_censored = false;
  bool tau0_censored = false;
};

/// tau* = first n with O^theta_n in W*, tau = first n >= tau* with
/// O^theta_n = o_exit, for the bounding occupancy process started at o_exit.
/// Counting stops at `cap` steps and the affected times are flagged.
void discovery_times(const LumpedKernel& kernel, int K, int m, Bound bound, std::int64_t cap,
                     Rng& rng, StoppingTimes& out);

/// tau_0 = first n with Z_n(0) = 0 from z_enter, capped.
void persistence_time(const ReducedChain& chain, std::int64_t cap, Rng& rng, StoppingTimes& out);

/// One record per replica; replica r uses stream make_stream(seed, r).
std::vector<StoppingTimes> hitting_times(const ModelParams& p, Theta theta, int replicas,
                                         std::int64_t cap, std::uint64_t seed);

}  // namespace quasilab
