#include "quasilab/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "quasilab/errors.hpp"

namespace quasilab {

bool LimitModel::supercritical() const { return sigma * std::exp(-a) > 1.0; }

SimplexPoint selection_map_f(std::span<const double> r, double sigma) {
  const double denom = (sigma - 1.0) * r[0] + 1.0;
  SimplexPoint out(r.begin(), r.end());
  out[0] *= sigma;
  for (double& x : out) x /= denom;
  return out;
}

SimplexPoint limit_map_F(std::span<const double> r, const LimitModel& model) {
  const auto f = selection_map_f(r, model.sigma);
  const int n = static_cast<int>(r.size());
  // Poisson(a) weights e^{-a} a^d / d!
  std::vector<double> poisson(n);
  poisson[0] = std::exp(-model.a);
  for (int d = 1; d < n; ++d) poisson[d] = poisson[d - 1] * model.a / d;
  SimplexPoint out(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i <= k; ++i) out[k] += f[i] * poisson[k - i];
  return out;
}

SimplexPoint limit_map_F_expanded(std::span<const double> r, const LimitModel& model) {
  const int n = static_cast<int>(r.size());
  const double pre = std::exp(-model.a) / ((model.sigma - 1.0) * r[0] + 1.0);
  SimplexPoint out(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = std::pow(model.a, k) / std::tgamma(k + 1.0) * model.sigma * r[0];
    for (int i = 1; i <= k; ++i) s += std::pow(model.a, k - i) / std::tgamma(k - i + 1.0) * r[i];
    out[k] = pre * s;
  }
  return out;
}

double scalar_map_Ftilde(double r, const LimitModel& model) {
  // Same operation order as F_0, so the two agree bit for bit.
  return r * model.sigma / ((model.sigma - 1.0) * r + 1.0) * std::exp(-model.a);
}

namespace {

/// sum_{i>=1} i^k / sigma^i scaled by a^k/k!, summed in log space. Stops once
/// past the peak of the summand and 5 consecutive terms fall below 1e-18 of
/// the partial sum.
double weighted_series(int k, double sigma, double a) {
  const double log_sigma = std::log(sigma);
  const double log_pre = k * std::log(a) - std::lgamma(k + 1.0);
  const double peak = k / log_sigma;
  double sum = 0.0;
  int small = 0;
  for (long i = 1;; ++i) {
    const double term = std::exp(log_pre + k * std::log(static_cast<double>(i)) - i * log_sigma);
    sum += term;
    if (static_cast<double>(i) > peak && term < 1e-18 * sum) {
      if (++small >= 5) break;
    } else {
      small = 0;
    }
    if (i > 100'000'000) break;
  }
  return sum;
}

}  // namespace

QuasispeciesDistribution rho_star(const LimitModel& model, int K) {
  QuasispeciesDistribution q;
  q.rho.assign(K + 1, 0.0);
  q.supercritical = model.supercritical();
  if (!q.supercritical) return q;
  const double gap = model.sigma * std::exp(-model.a) - 1.0;
  for (int k = 0; k <= K; ++k) q.rho[k] = gap * weighted_series(k, model.sigma, model.a);
  return q;
}

FixedPointResult iterate_to_fixed_point(std::span<const double> z0, const LimitModel& model,
                                        double tol, long max_iters) {
  SimplexPoint z(z0.begin(), z0.end());
  for (long n = 1; n <= max_iters; ++n) {
    auto next = limit_map_F(z, model);
    double change = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) change += std::abs(next[k] - z[k]);
    z = std::move(next);
    if (change < tol) return {z, n};
  }
  std::ostringstream msg;
  msg << "iterate_to_fixed_point: no convergence to tol " << tol << " within " << max_iters
      << " iterations (sigma e^-a - 1 = " << model.sigma * std::exp(-model.a) - 1.0
      << "; near criticality raise max_iters); last iterate:";
  for (double x : z) msg << ' ' << x;
  throw ConvergenceError(msg.str());
}

long relaxation_time(std::span<const double> z0, const LimitModel& model, double eps,
                     long max_iters) {
  const int K = static_cast<int>(z0.size()) - 1;
  std::vector<double> target(K + 1, 0.0);
  if (z0[0] > 0.0 && model.supercritical()) target = rho_star(model, K).rho;
  SimplexPoint z(z0.begin(), z0.end());
  for (long n = 0; n < max_iters; ++n) {
    double dist = 0.0;
    for (int k = 0; k <= K; ++k) dist += std::abs(z[k] - target[k]);
    if (dist < eps) return n;
    z = limit_map_F(z, model);
  }
  return max_iters;
}

}  // namespace quasilab
