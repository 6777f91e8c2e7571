#include "quasilab/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "quasilab/errors.hpp"
#include "quasilab/occupancy.hpp"
#include "quasilab/random.hpp"
#include "quasilab/reduced_chain.hpp"

namespace quasilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

/// x ln(x/y) with 0 ln(0/y) = 0 and x ln(x/0) = +inf for x > 0.
double xlogxy(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log(x / y);
}

bool in_unit(double x) { return x >= -kSlack && x <= 1.0 + kSlack; }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

bool in_domain(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= -kSlack)) return false;
    s += x;
  }
  return s <= 1.0 + kSlack;
}

}  // namespace

double binomial_rate(double p, double t) {
  if (!in_unit(p) || !in_unit(t)) return kInf;
  p = clamp01(p);
  t = clamp01(t);
  return xlogxy(t, p) + xlogxy(1.0 - t, 1.0 - p);
}

double multinomial_rate(std::span<const double> p, std::span<const double> t) {
  if (p.size() != t.size()) throw ValidationError("multinomial_rate: size mismatch");
  if (!in_domain(p) || !in_domain(t)) return kInf;
  double sp = 0.0, st = 0.0, out = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = std::max(p[k], 0.0), tk = std::max(t[k], 0.0);
    sp += pk;
    st += tk;
    out += xlogxy(tk, pk);
  }
  out += xlogxy(std::max(1.0 - st, 0.0), std::max(1.0 - sp, 0.0));
  return out;
}

MultinomialBoundCheck log_multinomial_bound_check(int n, std::span<const int> counts) {
  if (n < 1) throw ValidationError("log_multinomial_bound_check: n must be positive");
  long s = 0;
  for (int c : counts) {
    if (c < 0) throw ValidationError("log_multinomial_bound_check: negative count");
    s += c;
  }
  if (s > n) throw ValidationError("log_multinomial_bound_check: counts exceed n");
  const double dn = n;
  double log_coef = std::lgamma(dn + 1.0) - std::lgamma(static_cast<double>(n - s) + 1.0);
  double entropy = xlogxy(static_cast<double>(n - s), 1.0) - (n - s) * std::log(dn);
  for (int c : counts) {
    log_coef -= std::lgamma(c + 1.0);
    entropy += xlogxy(c, 1.0) - c * std::log(dn);
  }
  const int N = static_cast<int>(counts.size()) - 1;
  MultinomialBoundCheck out;
  out.residual = std::abs(log_coef + entropy);
  out.bound = (N + 2) * std::log(dn) + 2.0 * N + 3.0;
  out.holds = out.residual <= out.bound;
  return out;
}

double limit_mutation(int i, int j, double a) {
  if (j < i) return 0.0;
  const int d = j - i;
  if (a == 0.0) return d == 0 ? 1.0 : 0.0;
  return std::exp(-a + d * std::log(a) - std::lgamma(d + 1.0));
}

std::vector<double> limit_mutation_row(int k, int K, double a) {
  std::vector<double> row(K + 1);
  for (int j = 0; j <= K; ++j) row[j] = limit_mutation(k, j, a);
  return row;
}

bool in_transport_set(const TransportMatrix& beta, std::span<const double> t, double tol) {
  const std::size_t n = t.size();
  if (beta.size() != n) return false;
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (beta[i].size() != n) return false;
      const double b = beta[i][j];
      if (b < -tol || b > 1.0 + tol) return false;
      if (i > j && std::abs(b) > tol) return false;
      col += b;
    }
    if (std::abs(col - t[j]) > tol) return false;
  }
  return true;
}

namespace {

/// sum_k xi_k I_K(row_k, beta(k, .)/xi_k) over the given rows, +inf when a
/// row of beta exceeds xi_k.
double transport_term(const std::vector<std::vector<double>>& rows, std::span<const double> xi,
                      const TransportMatrix& beta, std::vector<double>& scratch) {
  const std::size_t n = xi.size();
  double out = 0.0;
  scratch.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_sum += std::max(beta[k][j], 0.0);
    const double x = std::max(xi[k], 0.0);
    if (x <= 0.0) {
      if (row_sum > kSlack) return kInf;
      continue;
    }
    if (row_sum > x * (1.0 + 1e-12) + kSlack) return kInf;
    for (std::size_t j = 0; j < n; ++j) scratch[j] = std::max(beta[k][j], 0.0) / x;
    out += x * multinomial_rate(rows[k], scratch);
    if (!std::isfinite(out)) return kInf;
  }
  return out;
}

}  // namespace

double rate_I(const LimitModel& model, std::span<const double> r, std::span<const double> xi,
              const TransportMatrix& beta, std::span<const double> t) {
  const std::size_t n = r.size();
  if (xi.size() != n || t.size() != n) throw ValidationError("rate_I: size mismatch");
  if (!in_domain(r) || !in_domain(xi) || !in_domain(t)) return kInf;
  if (!in_transport_set(beta, t, 1e-9)) return kInf;
  const auto f = selection_map_f(r, model.sigma);
  const double selection = multinomial_rate(f, xi);
  if (!std::isfinite(selection)) return kInf;
  std::vector<std::vector<double>> rows(n);
  for (std::size_t k = 0; k < n; ++k)
    rows[k] = limit_mutation_row(static_cast<int>(k), static_cast<int>(n) - 1, model.a);
  std::vector<double> scratch;
  return selection + transport_term(rows, xi, beta, scratch);
}

double rate_I_finite(const ReducedChain& chain, double sigma, std::span<const double> r,
                     std::span<const double> xi, const TransportMatrix& beta,
                     std::span<const double> t) {
  const int K = chain.K();
  const std::size_t n = static_cast<std::size_t>(K) + 1;
  if (r.size() != n || xi.size() != n || t.size() != n)
    throw ValidationError("rate_I_finite: size mismatch");
  if (!in_domain(r) || !in_domain(xi) || !in_domain(t)) return kInf;
  if (beta.size() != n) return kInf;
  // beta carries the mass arriving from classes 0..K; the theta class supplies
  // the rest of t.
  std::vector<double> from_theta(n);
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (beta[i][j] < -1e-9) return kInf;
      if (i > j && std::abs(beta[i][j]) > 1e-9) return kInf;
      col += beta[i][j];
    }
    from_theta[j] = t[j] - col;
    if (from_theta[j] < -1e-9) return kInf;
    // Column sums are matched to the same tolerance as in_transport_set.
    if (std::abs(from_theta[j]) <= 1e-12) from_theta[j] = 0.0;
  }
  const auto f = selection_map_f(r, sigma);
  const double selection = multinomial_rate(f, xi);
  if (!std::isfinite(selection)) return kInf;
  std::vector<std::vector<double>> rows(n + 1, std::vector<double>(n));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = chain.mutation(static_cast<int>(i), static_cast<int>(j));
  std::vector<double> scratch;
  double out = selection + transport_term(rows, xi, beta, scratch);
  if (!std::isfinite(out)) return kInf;
  const double rest = std::max(1.0 - std::accumulate(xi.begin(), xi.end(), 0.0), 0.0);
  double theta_mass = 0.0;
  for (double x : from_theta) theta_mass += std::max(x, 0.0);
  if (rest <= 0.0) return theta_mass > 1e-9 ? kInf : out;
  if (theta_mass > rest * (1.0 + 1e-12) + kSlack) return kInf;
  for (std::size_t j = 0; j < n; ++j) scratch[j] = std::max(from_theta[j], 0.0) / rest;
  return out + rest * multinomial_rate(rows[n], scratch);
}

ZeroSetWitness zero_set_witness(const LimitModel& model, std::span<const double> r) {
  const int K = static_cast<int>(r.size()) - 1;
  ZeroSetWitness w;
  w.xi = selection_map_f(r, model.sigma);
  w.beta.assign(K + 1, std::vector<double>(K + 1, 0.0));
  w.t.assign(K + 1, 0.0);
  for (int k = 0; k <= K; ++k)
    for (int j = k; j <= K; ++j) {
      w.beta[k][j] = w.xi[k] * limit_mutation(k, j, model.a);
      w.t[j] += w.beta[k][j];
    }
  return w;
}

// ---------------------------------------------------------------------------
// V_1

namespace {

/// Unknowns: xi_0..xi_K, then beta(i, j) for i < j in column order. The
/// diagonal beta(j, j) = t_j - sum_{i<j} beta(i, j).
struct StepLayout {
  int K;
  std::size_t size() const { return static_cast<std::size_t>((K + 1) + K * (K + 1) / 2); }

  std::vector<double> encode(std::span<const double> xi, const TransportMatrix& beta) const {
    std::vector<double> x(xi.begin(), xi.end());
    for (int j = 1; j <= K; ++j)
      for (int i = 0; i < j; ++i) x.push_back(beta[i][j]);
    return x;
  }

  void decode(std::span<const double> x, std::span<const double> t, SimplexPoint& xi,
              TransportMatrix& beta) const {
    xi.assign(x.begin(), x.begin() + K + 1);
    beta.assign(K + 1, std::vector<double>(K + 1, 0.0));
    std::size_t pos = static_cast<std::size_t>(K) + 1;
    for (int j = 0; j <= K; ++j) {
      double off = 0.0;
      for (int i = 0; i < j; ++i) {
        beta[i][j] = x[pos++];
        off += beta[i][j];
      }
      beta[j][j] = t[j] - off;
    }
  }
};

/// A feasible starting point: t_j is split over rows i <= j in proportion to
/// f_i(r) M_inf(i, j), and xi tops each row sum up towards f(r).
std::vector<double> feasible_start(const LimitModel& model, std::span<const double> r,
                                   std::span<const double> t, const StepLayout& layout) {
  const int K = layout.K;
  const auto f = selection_map_f(r, model.sigma);
  TransportMatrix beta(K + 1, std::vector<double>(K + 1, 0.0));
  std::vector<double> row_sum(K + 1, 0.0);
  for (int j = 0; j <= K; ++j) {
    double w = 0.0;
    for (int i = 0; i <= j; ++i) w += f[i] * limit_mutation(i, j, model.a);
    for (int i = 0; i <= j; ++i) {
      beta[i][j] = w > 0.0 ? t[j] * f[i] * limit_mutation(i, j, model.a) / w : (i == j ? t[j] : 0.0);
      row_sum[i] += beta[i][j];
    }
  }
  const double used = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
  double extra = 0.0;
  for (int k = 0; k <= K; ++k) extra += std::max(f[k] - row_sum[k], 0.0);
  const double lambda = extra > 0.0 ? std::min(1.0, std::max(1.0 - used, 0.0) / extra) : 0.0;
  SimplexPoint xi(K + 1);
  for (int k = 0; k <= K; ++k) xi[k] = row_sum[k] + lambda * std::max(f[k] - row_sum[k], 0.0);
  return layout.encode(xi, beta);
}

}  // namespace

CostResult cost_V1(const LimitModel& model, std::span<const double> r, std::span<const double> t,
                   const CostOptions& opts) {
  if (r.size() != t.size() || r.empty()) throw ValidationError("cost_V1: size mismatch");
  const StepLayout layout{static_cast<int>(r.size()) - 1};
  SimplexPoint xi;
  TransportMatrix beta;
  const Objective objective = [&](std::span<const double> x) {
    layout.decode(x, t, xi, beta);
    return rate_I(model, r, xi, beta, t);
  };

  const auto x0 = feasible_start(model, r, t, layout);
  std::vector<double> best_x = x0;
  double best = objective(x0);

  const int restarts = std::max(opts.restarts, 1);
  for (int i = 0; i < restarts; ++i) {
    std::vector<double> start;
    NelderMeadOptions nm = opts.nelder_mead;
    if (i == 0) {
      start = x0;
    } else if (i % 2 == 1) {
      // Fresh simplex around the incumbent with a shrinking step.
      start = best_x;
      nm.initial_step = opts.nelder_mead.initial_step / (1.0 + i);
    } else {
      // Random feasible perturbation of the incumbent.
      auto stream = make_stream(opts.seed, static_cast<std::uint64_t>(i));
      start = best_x;
      for (int attempt = 0; attempt < 20; ++attempt) {
        std::vector<double> cand = best_x;
        for (double& c : cand) c += 0.2 * (uniform01(stream) - 0.5);
        if (std::isfinite(objective(cand))) {
          start = std::move(cand);
          break;
        }
      }
    }
    const auto res = nelder_mead(objective, start, nm);
    if (res.value < best) {
      best = res.value;
      best_x = res.x;
    }
  }
  if (!std::isfinite(best)) {
    // V_1 is +infinity when no feasible (xi, beta) exists.
    CostResult out;
    out.value = kInf;
    out.path = {SimplexPoint(r.begin(), r.end()), SimplexPoint(t.begin(), t.end())};
    return out;
  }
  CostResult out;
  layout.decode(best_x, t, xi, beta);
  out.value = std::max(best, 0.0);
  out.path = {SimplexPoint(r.begin(), r.end()), SimplexPoint(t.begin(), t.end())};
  out.xi = {xi};
  out.beta = {beta};
  return out;
}

// ---------------------------------------------------------------------------
// V_l

CostResult cost_Vl(const LimitModel& model, std::span<const double> r, std::span<const double> t,
                   int l, const PathCostOptions& opts,
                   const std::vector<std::vector<SimplexPoint>>& extra_starts) {
  if (l < 1) throw ValidationError("cost_Vl: l must be at least 1");
  if (r.size() != t.size() || r.empty()) throw ValidationError("cost_Vl: size mismatch");
  if (l == 1) return cost_V1(model, r, t, opts.inner);
  const std::size_t n = r.size();
  const SimplexPoint start(r.begin(), r.end()), end(t.begin(), t.end());

  auto points_of = [&](std::span<const double> x) {
    std::vector<SimplexPoint> pts;
    pts.reserve(static_cast<std::size_t>(l) + 1);
    pts.push_back(start);
    for (int k = 0; k + 1 < l; ++k) pts.emplace_back(x.begin() + k * n, x.begin() + (k + 1) * n);
    pts.push_back(end);
    return pts;
  };
  const Objective objective = [&](std::span<const double> x) {
    const auto pts = points_of(x);
    double total = 0.0;
    for (int k = 1; k < l; ++k)
      if (!in_domain(pts[k])) return kInf;
    for (int k = 0; k < l; ++k) {
      total += cost_V1(model, pts[k], pts[k + 1], opts.inner).value;
      if (!std::isfinite(total)) return kInf;
    }
    return total;
  };
  auto flatten = [&](const std::vector<SimplexPoint>& mids) {
    std::vector<double> x;
    for (const auto& p : mids) x.insert(x.end(), p.begin(), p.end());
    return x;
  };

  std::vector<std::vector<double>> starts;
  {
    std::vector<SimplexPoint> orbit;
    SimplexPoint z = start;
    for (int k = 1; k < l; ++k) {
      z = limit_map_F(z, model);
      orbit.push_back(z);
    }
    starts.push_back(flatten(orbit));
    std::vector<SimplexPoint> line;
    for (int k = 1; k < l; ++k) {
      SimplexPoint p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = start[i] + (end[i] - start[i]) * k / l;
      line.push_back(p);
    }
    starts.push_back(flatten(line));
    for (const auto& s : extra_starts) {
      if (static_cast<int>(s.size()) != l - 1) throw ValidationError("cost_Vl: extra start has wrong length");
      starts.push_back(flatten(s));
    }
  }

  std::vector<double> best_x;
  double best = kInf;
  for (const auto& s : starts) {
    const double v = objective(s);
    if (v < best) {
      best = v;
      best_x = s;
    }
  }
  if (best_x.empty()) best_x = starts.front();
  for (int i = 0; i < std::max(opts.outer_restarts, 1); ++i) {
    NelderMeadOptions nm = opts.outer;
    nm.initial_step = opts.outer.initial_step / (1.0 + 2.0 * i);
    for (const auto& s : (i == 0 ? starts : std::vector<std::vector<double>>{best_x})) {
      if (!std::isfinite(objective(s))) continue;
      const auto res = nelder_mead(objective, s, nm);
      if (res.value < best) {
        best = res.value;
        best_x = res.x;
      }
    }
  }

  CostResult out;
  out.path = points_of(best_x);
  if (!std::isfinite(best)) {
    out.value = kInf;
    return out;
  }
  out.value = 0.0;
  for (int k = 0; k < l; ++k) {
    auto step = cost_V1(model, out.path[k], out.path[k + 1], opts.inner);
    out.value += step.value;
    out.xi.push_back(step.xi.empty() ? SimplexPoint{} : step.xi.front());
    out.beta.push_back(step.beta.empty() ? TransportMatrix{} : step.beta.front());
  }
  out.value = std::max(out.value, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// K = 0

double master_selection(double rho, double sigma, bool printed_denominator) {
  const double denom = printed_denominator ? (sigma - 1.0) * rho - 1.0 : (sigma - 1.0) * rho + 1.0;
  return sigma * rho / denom;
}

double master_step_cost(const LimitModel& model, double rho, double t, bool printed_denominator) {
  if (!in_unit(rho) || !in_unit(t)) return kInf;
  rho = clamp01(rho);
  t = clamp01(t);
  const double p = master_selection(rho, model.sigma, printed_denominator);
  if (!std::isfinite(p) || !in_unit(p)) return kInf;
  const double keep = std::exp(-model.a);
  const double lose = 1.0 - keep;
  auto h = [&](double gamma) {
    const double sel = binomial_rate(p, gamma);
    if (gamma <= 0.0) return t > 0.0 ? kInf : sel;
    return sel + gamma * binomial_rate(keep, std::min(t / gamma, 1.0));
  };
  // h is convex on [t, 1] with h'(g) = ln((g - t)(1 - p) / (p (1 - g)(1 - e^{-a}))),
  // which vanishes at the point below.
  const double denom = 1.0 - p + p * lose;
  double gamma = denom > 0.0 ? (p * lose + t * (1.0 - p)) / denom : 1.0;
  gamma = std::clamp(gamma, t, 1.0);
  return std::max(std::min({h(gamma), h(t), h(1.0)}), 0.0);
}

double master_path_cost(const LimitModel& model, std::span<const double> path,
                        bool printed_denominator) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    total += master_step_cost(model, path[k], path[k + 1], printed_denominator);
    if (!std::isfinite(total)) return kInf;
  }
  return total;
}

namespace {

/// Minimises g over [lo, hi] by Brent's method, keeping x0 if nothing better
/// turns up.
std::pair<double, double> minimise_1d(const std::function<double(double)>& g, double lo, double hi,
                                      double x0) {
  double best_x = x0, best_v = g(x0);
  if (!(hi > lo)) return {best_x, best_v};
  const auto [x, v] = boost::math::tools::brent_find_minima(
      [&](double y) {
        const double val = g(y);
        return std::isfinite(val) ? val : std::numeric_limits<double>::max();
      },
      lo, hi, 52);
  if (v < best_v) return {x, v};
  return {best_x, best_v};
}

/// Cyclic coordinate descent on the interior points of `path`, each point
/// moving within the bracket of its neighbours widened by `reach`.
double polish(const LimitModel& model, std::vector<double>& path, const MasterPathOptions& opts,
              double reach) {
  const bool printed = opts.printed_denominator;
  double total = master_path_cost(model, path, printed);
  const std::size_t l = path.size() - 1;
  for (int sweep = 0; sweep < opts.max_sweeps && l > 1; ++sweep) {
    const double before = total;
    for (std::size_t k = 1; k < l; ++k) {
      const double prev = path[k - 1], next = path[k + 1];
      auto g = [&](double x) {
        return master_step_cost(model, prev, x, printed) + master_step_cost(model, x, next, printed);
      };
      const double lo = std::max(0.0, std::min({prev, next, path[k]}) - reach);
      const double hi = std::min(1.0, std::max({prev, next, path[k]}) + reach);
      path[k] = minimise_1d(g, lo, hi, path[k]).first;
    }
    total = master_path_cost(model, path, printed);
    if (!(before - total > 1e-15 * std::max(1.0, std::abs(total)))) break;
  }
  return total;
}

/// Dynamic programme over a grid of [0, 1] (denser near 0) with s and t
/// added: best[l-1] is the cheapest l-step grid path from s to t.
class GridProgram {
 public:
  GridProgram(const LimitModel& model, double s, double t, int grid, bool printed) {
    for (int i = 0; i <= grid; ++i) {
      const double u = static_cast<double>(i) / grid;
      nodes_.push_back(u * u);
    }
    nodes_.push_back(s);
    nodes_.push_back(t);
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    const std::size_t n = nodes_.size();
    s_ = static_cast<std::size_t>(std::find(nodes_.begin(), nodes_.end(), s) - nodes_.begin());
    t_ = static_cast<std::size_t>(std::find(nodes_.begin(), nodes_.end(), t) - nodes_.begin());
    cost_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cost_[i * n + j] = master_step_cost(model, nodes_[i], nodes_[j], printed);
    // to_t_[i] = cheapest cost from node i to t in the current number of steps.
    to_t_.resize(n);
    for (std::size_t i = 0; i < n; ++i) to_t_[i] = cost_[i * n + t_];
    choice_.emplace_back(n, t_);
  }

  /// Cost of the best path with the current number of steps.
  double value() const { return to_t_[s_]; }
  int steps() const { return static_cast<int>(choice_.size()); }

  /// Adds one step in front of every path.
  void extend() {
    const std::size_t n = nodes_.size();
    std::vector<double> next(n, kInf);
    std::vector<std::size_t> arg(n, t_);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = cost_[i * n + j] + to_t_[j];
        if (v < next[i]) {
          next[i] = v;
          arg[i] = j;
        }
      }
    to_t_.swap(next);
    choice_.push_back(std::move(arg));
  }

  std::vector<double> path() const {
    std::vector<double> out{nodes_[s_]};
    std::size_t at = s_;
    for (int k = steps() - 1; k >= 0; --k) {
      at = choice_[static_cast<std::size_t>(k)][at];
      out.push_back(nodes_[at]);
    }
    return out;
  }


 private:
  std::vector<double> nodes_;
  std::size_t s_ = 0, t_ = 0;
  std::vector<double> cost_;
  std::vector<double> to_t_;
  std::vector<std::vector<std::size_t>> choice_;
};

/// Polishes each start and returns the cheapest result.
MasterPathResult best_of(const LimitModel& model, std::vector<std::vector<double>> starts,
                         const MasterPathOptions& opts, double reach) {
  MasterPathResult best{kInf, starts.front()};
  for (auto& p : starts) {
    const double v = polish(model, p, opts, reach);
    if (v < best.value) best = {v, p};
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

std::vector<double> orbit_start(const LimitModel& model, double s, double t, int l) {
  std::vector<double> orbit{s};
  for (int k = 1; k < l; ++k) orbit.push_back(scalar_map_Ftilde(orbit.back(), model));
  orbit.push_back(t);
  return orbit;
}

std::vector<double> line_start(double s, double t, int l) {
  std::vector<double> line;
  for (int k = 0; k <= l; ++k) line.push_back(s + (t - s) * k / l);
  return line;
}

}  // namespace

MasterPathResult master_cost_l(const LimitModel& model, double s, double t, int l,
                               const MasterPathOptions& opts, std::span<const double> warm_start) {
  if (l < 1) throw ValidationError("master_cost_l: l must be at least 1");
  GridProgram dp(model, s, t, opts.grid, opts.printed_denominator);
  while (dp.steps() < l) dp.extend();
  std::vector<std::vector<double>> starts{dp.path(), orbit_start(model, s, t, l), line_start(s, t, l)};
  if (!warm_start.empty()) {
    if (static_cast<int>(warm_start.size()) != l + 1)
      throw ValidationError("master_cost_l: warm start has wrong length");
    std::vector<double> w(warm_start.begin(), warm_start.end());
    w.front() = s;
    w.back() = t;
    starts.push_back(std::move(w));
  }
  return best_of(model, std::move(starts), opts, 2.0 / opts.grid);
}

MasterPathResult master_cost(const LimitModel& model, double s, double t, int l_max,
                             const MasterPathOptions& opts) {
  if (l_max < 1) throw ValidationError("master_cost: l_max must be at least 1");
  GridProgram dp(model, s, t, opts.grid, opts.printed_denominator);
  MasterPathResult best{kInf, {s, t}};
  for (int l = 1; l <= l_max; ++l) {
    if (l > 1) dp.extend();
    auto r = best_of(model, {dp.path(), orbit_start(model, s, t, l)}, opts, 2.0 / opts.grid);
    if (r.value < best.value) best = std::move(r);
    if (best.value == 0.0) break;
  }
  return best;
}

bool master_cost_zero_check(const LimitModel& model, double s, double t, int l_max, double tol) {
  if (!model.supercritical())
    throw ValidationError("master_cost_zero_check: requires sigma e^{-a} > 1");
  return master_cost(model, s, t, l_max).value < tol;
}

// ---------------------------------------------------------------------------
// psi

PsiResult psi(const LimitModel& model, const PsiOptions& opts) {
  PsiResult out;
  const double start = rho_star(model, 0).rho[0];
  if (start <= 0.0) {
    out.by_convention = true;
    out.stabilized = true;
    out.path = {0.0};
    return out;
  }
  if (opts.literal_index) {
    // With l = 1 the sum from k = 1 is empty.
    out.best_l = 1;
    out.path = {start, 0.0};
    out.l_max_used = std::max(opts.l_max, 1);
    out.previous_value = 0.0;
    out.stabilized = true;
    return out;
  }
  MasterPathOptions path_opts = opts.path;
  path_opts.printed_denominator = opts.printed_denominator;
  const double reach = 2.0 / path_opts.grid;

  GridProgram dp(model, start, 0.0, path_opts.grid, opts.printed_denominator);
  std::vector<std::vector<double>> grid_paths;
  auto grow_to = [&](int l_max) {
    while (static_cast<int>(out.value_by_l.size()) < l_max) {
      if (!out.value_by_l.empty()) dp.extend();
      out.value_by_l.push_back(dp.value());
      grid_paths.push_back(dp.path());
    }
  };
  // Best polished value over l <= l_max, polishing the grid optimum and the
  // straight line at the grid-optimal l.
  auto best_up_to = [&](int l_max) {
    grow_to(l_max);
    const auto it = std::min_element(out.value_by_l.begin(), out.value_by_l.begin() + l_max);
    const int l = static_cast<int>(it - out.value_by_l.begin()) + 1;
    auto r = best_of(model, {grid_paths[static_cast<std::size_t>(l - 1)], line_start(start, 0.0, l)},
                     path_opts, reach);
    return std::make_pair(l, r);
  };

  int l_max = std::max(opts.l_max, 1);
  auto [l_best, best] = best_up_to(l_max);
  double previous = kInf;
  while (std::isfinite(best.value)) {
    if (std::isfinite(previous) &&
        std::abs(previous - best.value) <= opts.rel_tol * std::max(best.value, 1e-300)) {
      out.stabilized = true;
      break;
    }
    if (2 * l_max > opts.l_cap) break;
    previous = best.value;
    l_max *= 2;
    auto [l2, r2] = best_up_to(l_max);
    if (r2.value < best.value) {
      l_best = l2;
      best = std::move(r2);
    }
  }
  out.value = best.value;
  out.best_l = l_best;
  out.path = best.path;
  out.l_max_used = l_max;
  out.previous_value = previous;
  return out;
}

double critical_alpha(double psi_value, int kappa) {
  if (kappa < 2) throw ValidationError("critical_alpha: kappa must be at least 2");
  if (!(psi_value > 0.0)) return kInf;
  return std::log(static_cast<double>(kappa)) / psi_value;
}

}  // namespace quasilab
