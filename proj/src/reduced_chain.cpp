#include "quasilab/reduced_chain.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "quasilab/errors.hpp"
#include "quasilab/parallel.hpp"

namespace quasilab {

const char* to_string(StateTag tag) {
  switch (tag) {
    case StateTag::enter: return "enter";
    case StateTag::exit: return "exit";
    default: return "generic";
  }
}

ReducedChain::ReducedChain(const ModelParams& p, Theta theta)
    : theta_(theta), ell_(p.ell), m_(p.m), K_(p.K), sigma_(p.sigma) {
  if (p.K < 0 || p.K >= p.ell)
    throw ValidationError("ReducedChain: need 0 <= K < ell so that class K+1 exists");
  const int theta_cls = theta_class();
  mh_.assign(K_ + 2, std::vector<double>(K_ + 1, 0.0));
  escape_.assign(K_ + 2, 0.0);
  for (int r = 0; r <= K_ + 1; ++r) {
    const int cls = r <= K_ ? r : theta_cls;
    const auto row = lumped_mutation_row(p.ell, p.kappa, p.q, cls);
    for (int j = 0; j <= K_; ++j) mh_[r][j] = row[j];
    double esc = 0.0;
    for (int j = K_ + 1; j <= p.ell; ++j) esc += row[j];
    escape_[r] = esc;
  }
}

ReducedState ReducedChain::enter() const {
  ClassVector z(K_ + 1, 0);
  z[0] = theta_ == Theta::lower ? 1 : m_;
  return {z, StateTag::enter};
}

ReducedState ReducedChain::exit() const {
  ClassVector z(K_ + 1, 0);
  if (theta_ == Theta::upper && K_ >= 1) z[1] = m_;
  return {z, StateTag::exit};
}

ReducedState ReducedChain::state(ClassVector z) const {
  if (static_cast<int>(z.size()) != K_ + 1)
    throw ValidationError("reduced state must have K+1 entries");
  long long s = 0;
  for (int x : z) {
    if (x < 0) throw ValidationError("reduced state entries must be non-negative");
    s += x;
  }
  if (s > m_) throw ValidationError("reduced state must satisfy |z|_1 <= m");
  StateTag tag = StateTag::generic;
  if (z == exit().z) tag = StateTag::exit;
  else if (z == enter().z) tag = StateTag::enter;
  return {std::move(z), tag};
}

std::vector<ClassVector> ReducedChain::states() const {
  std::vector<ClassVector> out;
  ClassVector cur(K_ + 1, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == K_ + 1) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, m_);
  return out;
}

void ReducedChain::check_guard() const {
  if (m_ > kReducedGuardM || K_ > kReducedGuardK)
    throw GuardError("exact reduced-chain enumeration is limited to m <= 12 and K <= 2 (got m = " +
                     std::to_string(m_) + ", K = " + std::to_string(K_) + ")");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// n ln p with 0 ln 0 = 0.
double xlog(int n, double p) {
  if (n == 0) return 0.0;
  if (p <= 0.0) return kNegInf;
  return n * std::log(p);
}

/// Enumerates p^theta(z, s, b, z') for fixed z. When `target` is set, only
/// terms landing on it are visited and b is pruned by its column sums.
class TermEnumerator {
 public:
  TermEnumerator(const ReducedChain& chain, double sigma, const ClassVector& z,
                 const ClassVector* target)
      : chain_(chain), sigma_(sigma), z_(z), target_(target), K_(chain.K()), m_(chain.m()) {
    log_fact_.resize(m_ + 1);
    for (int i = 0; i <= m_; ++i) log_fact_[i] = std::lgamma(i + 1.0);
    z_sum_ = 0;
    for (int x : z_) z_sum_ += x;
    s_.assign(K_ + 1, 0);
    b_.assign(K_ + 1, std::vector<int>(K_ + 1, 0));
    col_.assign(K_ + 1, 0);
    c_.assign(K_ + 1, 0);
  }

  template <class Sink>
  void run(Sink&& sink) {
    enumerate_s(0, 0, sink);
  }

 private:
  template <class Sink>
  void enumerate_s(int i, int used, Sink& sink) {
    if (i == K_ + 1) {
      // |z|_1 = m forces |s|_1 = m: the theta class is empty.
      if (z_sum_ == m_ && used != m_) return;
      s_sum_ = used;
      log_sel_ = selection_log();
      enumerate_b(0, 0, 0.0, sink);
      return;
    }
    const int hi = z_[i] == 0 ? 0 : m_ - used;
    for (int v = 0; v <= hi; ++v) {
      s_[i] = v;
      enumerate_s(i + 1, used + v, sink);
    }
    s_[i] = 0;
  }

  double selection_log() const {
    double lp = log_fact_[m_] - log_fact_[m_ - s_sum_];
    lp += xlog(s_[0], sigma_ * z_[0]);
    for (int i = 0; i <= K_; ++i) lp -= log_fact_[s_[i]];
    for (int i = 1; i <= K_; ++i) lp += xlog(s_[i], z_[i]);
    lp += xlog(m_ - s_sum_, m_ - z_sum_);
    lp -= m_ * std::log((sigma_ - 1.0) * z_[0] + m_);
    return lp;
  }

  // Row i of b, entry j. A finished row adds its multinomial coefficient and
  // the escape term for the s_i - |b(i,.)|_1 children sent to theta.
  template <class Sink>
  void enumerate_b(int i, int j, double lp, Sink& sink) {
    if (lp == kNegInf) return;
    if (i == K_ + 1) {
      enumerate_theta(lp, sink);
      return;
    }
    int row_used = 0;
    for (int jj = 0; jj < j; ++jj) row_used += b_[i][jj];
    if (j == K_ + 1) {
      const int rest = s_[i] - row_used;
      double term = log_fact_[s_[i]] - log_fact_[rest] + xlog(rest, chain_.escape(i));
      for (int jj = 0; jj <= K_; ++jj) term -= log_fact_[b_[i][jj]];
      enumerate_b(i + 1, 0, lp + term, sink);
      return;
    }
    int hi = s_[i] - row_used;
    if (target_) hi = std::min(hi, (*target_)[j] - col_[j]);
    for (int v = 0; v <= hi; ++v) {
      b_[i][j] = v;
      col_[j] += v;
      enumerate_b(i, j + 1, lp + xlog(v, chain_.mutation(i, j)), sink);
      col_[j] -= v;
    }
    b_[i][j] = 0;
  }

  template <class Sink>
  void enumerate_theta(double lp, Sink& sink) {
    const int pool = m_ - s_sum_;
    if (target_) {
      int c_sum = 0;
      for (int j = 0; j <= K_; ++j) {
        c_[j] = (*target_)[j] - col_[j];
        if (c_[j] < 0) return;
        c_sum += c_[j];
      }
      if (c_sum > pool) return;
      finish(lp, pool, c_sum, sink);
      return;
    }
    enumerate_c(0, 0, lp, pool, sink);
  }

  template <class Sink>
  void enumerate_c(int j, int used, double lp, int pool, Sink& sink) {
    if (j == K_ + 1) {
      finish(lp, pool, used, sink);
      return;
    }
    for (int v = 0; v <= pool - used; ++v) {
      c_[j] = v;
      enumerate_c(j + 1, used + v, lp, pool, sink);
    }
    c_[j] = 0;
  }

  template <class Sink>
  void finish(double lp, int pool, int c_sum, Sink& sink) {
    const int rest = pool - c_sum;
    const int theta_row = K_ + 1;
    lp += log_fact_[pool] - log_fact_[rest] + xlog(rest, chain_.escape(theta_row));
    for (int j = 0; j <= K_; ++j)
      lp += xlog(c_[j], chain_.mutation(theta_row, j)) - log_fact_[c_[j]];
    if (lp == kNegInf) return;
    ClassVector next(K_ + 1);
    for (int j = 0; j <= K_; ++j) next[j] = col_[j] + c_[j];
    sink(next, std::exp(lp + log_sel_));
  }

  const ReducedChain& chain_;
  double sigma_;
  const ClassVector& z_;
  const ClassVector* target_;
  int K_;
  int m_;
  int z_sum_ = 0;
  int s_sum_ = 0;
  double log_sel_ = 0.0;
  std::vector<double> log_fact_;
  std::vector<int> s_;
  std::vector<std::vector<int>> b_;
  std::vector<int> col_;
  std::vector<int> c_;
};

}  // namespace

double ReducedChain::generic_prob(const ClassVector& z, const ClassVector& z2) const {
  check_guard();
  if (z[0] < 1) throw ValidationError("generic_prob requires z_0 >= 1");
  double total = 0.0;
  TermEnumerator en(*this, sigma_, z, &z2);
  en.run([&](const ClassVector&, double p) { total += p; });
  return total;
}

double ReducedChain::transition_prob(const ReducedState& z, const ReducedState& z2) const {
  check_guard();
  const auto ex = exit();
  if (z.z == ex.z) return z2.z == enter().z ? 1.0 : 0.0;
  if (z.z[0] == 0) return z2.z == z.z ? 1.0 : 0.0;
  if (z2.z == ex.z) {
    double total = 0.0;
    for (const auto& w : states())
      if (w[0] == 0) total += generic_prob(z.z, w);
    return total;
  }
  if (z2.z[0] == 0) return 0.0;
  return generic_prob(z.z, z2.z);
}

std::map<ClassVector, double> ReducedChain::transition_row(const ReducedState& z) const {
  check_guard();
  std::map<ClassVector, double> row;
  const auto ex = exit();
  if (z.z == ex.z) {
    row[enter().z] = 1.0;
    return row;
  }
  if (z.z[0] == 0) {
    row[z.z] = 1.0;
    return row;
  }
  TermEnumerator en(*this, sigma_, z.z, nullptr);
  en.run([&](const ClassVector& next, double p) {
    if (next[0] == 0) row[ex.z] += p;
    else row[next] += p;
  });
  return row;
}

ReducedState ReducedChain::step(const ReducedState& z, Rng& rng) const {
  if (z.z == exit().z) return enter();
  if (z.z[0] == 0) return z;

  int z_sum = 0;
  for (int x : z.z) z_sum += x;
  std::vector<double> weights(K_ + 2);
  weights[0] = sigma_ * z.z[0];
  for (int i = 1; i <= K_; ++i) weights[i] = z.z[i];
  weights[K_ + 1] = m_ - z_sum;
  const auto s = sample_multinomial(rng, m_, weights);

  ClassVector next(K_ + 1, 0);
  std::vector<double> law(K_ + 2);
  std::vector<int> counts(K_ + 2);
  for (int i = 0; i <= K_ + 1; ++i) {
    if (s[i] == 0) continue;
    for (int j = 0; j <= K_; ++j) law[j] = mh_[i][j];
    law[K_ + 1] = escape_[i];
    sample_multinomial(rng, s[i], law, counts);
    for (int j = 0; j <= K_; ++j) next[j] += counts[j];
  }
  if (next[0] == 0) return exit();
  return state(std::move(next));
}

void discovery_times(const LumpedKernel& kernel, int K, int m, Bound bound, std::int64_t cap,
                     Rng& rng, StoppingTimes& out) {
  const int ell = kernel.ell();
  const auto o_exit = exit_occupancy(bound, ell, m);
  Occupancy o = o_exit;
  std::int64_t n = 0;
  while (o[0] == 0 && n < cap) {
    o = bound_map(bound, kernel, K, o, UniformMatrix::draw(m, ell, rng));
    ++n;
  }
  out.tau_star = n;
  out.tau_star_censored = o[0] == 0;
  if (out.tau_star_censored) {
    out.tau = n;
    out.tau_censored = true;
    return;
  }
  while (o != o_exit && n < cap) {
    o = bound_map(bound, kernel, K, o, UniformMatrix::draw(m, ell, rng));
    ++n;
  }
  out.tau = n;
  out.tau_censored = o != o_exit;
}

void persistence_time(const ReducedChain& chain, std::int64_t cap, Rng& rng, StoppingTimes& out) {
  auto z = chain.enter();
  std::int64_t n = 0;
  while (z.z[0] != 0 && n < cap) {
    z = chain.step(z, rng);
    ++n;
  }
  out.tau0 = n;
  out.tau0_censored = z.z[0] != 0;
}

std::vector<StoppingTimes> hitting_times(const ModelParams& p, Theta theta, int replicas,
                                         std::int64_t cap, std::uint64_t seed) {
  const LumpedKernel kernel(p);
  const ReducedChain chain(p, theta);
  std::vector<StoppingTimes> out(replicas);
  for_each_replica(replicas, [&](int r) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(r));
    discovery_times(kernel, p.K, p.m, theta, cap, rng, out[r]);
    persistence_time(chain, cap, rng, out[r]);
  });
  return out;
}

}  // namespace quasilab
