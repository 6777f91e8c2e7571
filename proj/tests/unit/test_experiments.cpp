#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "quasilab/dynamics.hpp"
#include "quasilab/errors.hpp"
#include "quasilab/experiments.hpp"
#include "quasilab/parallel.hpp"

using namespace quasilab;

namespace {

ModelParams params(int ell, int m, int K, double a) {
  ModelParams p;
  p.ell = ell;
  p.m = m;
  p.kappa = 2;
  p.q = a / ell;
  p.sigma = 2.0;
  p.K = K;
  p.a = a;
  return p;
}

std::string csv(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("chain names") {
  CHECK(parse_chain_kind("wf") == ChainKind::wf);
  CHECK(parse_chain_kind("upper") == ChainKind::upper);
  CHECK(std::string(to_string(ChainKind::lower)) == "lower");
  CHECK_THROWS_AS(parse_chain_kind("middle"), ValidationError);
}

TEST_CASE("default burn-in") {
  const auto p = params(20, 200, 2, 0.1);
  const long b = default_burn_in(p);
  CHECK(b >= 10);
  CHECK(b == std::max(10L, 10 * relaxation_time(std::vector<double>{1.0, 0.0, 0.0}, LimitModel{2.0, 0.1})));
}

TEST_CASE("without mutation the master class stays full") {
  auto p = params(6, 10, 1, 0.1);
  p.q = 0.0;
  p.a.reset();
  for (ChainKind chain : {ChainKind::wf, ChainKind::occupancy, ChainKind::upper}) {
    StationaryOptions opts;
    opts.chain = chain;
    opts.burn_in = 5;
    opts.steps = 200;
    opts.replicas = 3;
    const auto est = estimate_stationary(p, opts);
    CHECK(est.mean[0] == 1.0);
    CHECK(est.mean[1] == 0.0);
    CHECK(est.variance[0] == 0.0);
  }
}

TEST_CASE("stationary estimates sit between the bounding chains") {
  const auto p = params(10, 40, 1, 0.1);
  StationaryOptions opts;
  opts.steps = 4000;
  opts.replicas = 8;
  opts.seed = 17;
  opts.chain = ChainKind::lower;
  const auto lo = estimate_stationary(p, opts);
  opts.chain = ChainKind::occupancy;
  const auto mid = estimate_stationary(p, opts);
  opts.chain = ChainKind::upper;
  const auto hi = estimate_stationary(p, opts);
  for (int k = 0; k <= p.K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double se_lo = std::hypot(lo.prefix_standard_error[i], mid.prefix_standard_error[i]);
    const double se_hi = std::hypot(hi.prefix_standard_error[i], mid.prefix_standard_error[i]);
    CHECK(lo.prefix_mean[i] <= mid.prefix_mean[i] + 4 * se_lo);
    CHECK(mid.prefix_mean[i] <= hi.prefix_mean[i] + 4 * se_hi);
  }
  for (const auto& est : {lo, mid, hi})
    for (std::size_t k = 0; k < est.mean.size(); ++k) {
      CHECK(est.mean[k] >= 0.0);
      CHECK(est.mean[k] <= 1.0);
      CHECK(est.variance[k] >= 0.0);
    }
}

TEST_CASE("variance falls as m doubles") {
  StationaryOptions opts;
  opts.steps = 3000;
  opts.replicas = 6;
  opts.seed = 23;
  double previous = 1.0;
  for (int m : {50, 100, 200, 400}) {
    const auto est = estimate_stationary(params(20, m, 0, 0.1), opts);
    CHECK(est.variance[0] < previous);
    previous = est.variance[0];
  }
}

TEST_CASE("estimates do not depend on the thread count") {
  const auto p = params(10, 30, 2, 0.1);
  StationaryOptions opts;
  opts.steps = 500;
  opts.replicas = 5;
  replica_threads() = 1;
  const auto a = csv(stationary_table(p, estimate_stationary(p, opts)));
  replica_threads() = 3;
  const auto b = csv(stationary_table(p, estimate_stationary(p, opts)));
  replica_threads() = 0;
  CHECK(a == b);
}

TEST_CASE("renewal identity") {
  auto two = two_state_spec(0.3, 0.6);
  two.horizon = 50000;
  two.replicas = 4;
  two.seed = 29;
  const auto res = renewal_check(two);
  CHECK(std::abs(res.time_average - 1.0 / 3.0) < 4 * res.time_average_se);
  CHECK(std::abs(res.cycle_ratio - 1.0 / 3.0) < 4 * res.cycle_ratio_se);
  CHECK(res.discrepancy < 4.0);
  CHECK(res.cycles > 0);

  auto ones = two_state_spec(0.3, 0.6);
  ones.horizon = 2000;
  ones.replicas = 2;
  ones.f = [](const ClassVector&) { return 1.0; };
  const auto unit = renewal_check(ones);
  CHECK(unit.time_average == 1.0);
  CHECK(unit.cycle_ratio == 1.0);
}

TEST_CASE("exact stationary law of the reduced chain matches simulation") {
  const auto p = params(5, 6, 1, 0.25);
  const ReducedChain chain(p, Theta::lower);
  const auto law = exact_stationary(chain);
  double total = 0.0, mean0 = 0.0;
  for (const auto& [z, w] : law) {
    total += w;
    mean0 += w * z[0] / static_cast<double>(p.m);
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  StationaryOptions opts;
  opts.chain = ChainKind::lower;
  opts.burn_in = 100;
  opts.steps = 20000;
  opts.replicas = 8;
  opts.seed = 31;
  const auto est = estimate_stationary(p, opts);
  CHECK(std::abs(est.mean[0] - mean0) < 4 * est.standard_error[0]);

  auto spec = reduced_chain_spec(chain, [](const ClassVector& z) { return static_cast<double>(z[0]); });
  spec.horizon = 50000;
  spec.replicas = 4;
  spec.seed = 37;
  const auto res = renewal_check(spec);
  CHECK(res.discrepancy < 4.0);
  CHECK(std::abs(res.time_average / p.m - mean0) < 4 * res.time_average_se / p.m);
}

TEST_CASE("persistence time grows with m") {
  for (Theta theta : {Theta::lower, Theta::upper}) {
    std::vector<ModelParams> grid;
    for (int m : {20, 40, 60}) grid.push_back(params(10, m, 1, 0.5));
    const auto rows = measure_times(grid, theta, 100, 1000000, 5);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(r.summary.censored_tau0 == 0.0);
    CHECK(rows[0].summary.mean_tau0 < rows[1].summary.mean_tau0);
    CHECK(rows[1].summary.mean_tau0 < rows[2].summary.mean_tau0);
    CHECK(time_trend_table(rows, theta).rows.size() == 3);
  }
}

TEST_CASE("discovery time grows with ell") {
  std::vector<ModelParams> grid;
  for (int ell : {6, 8, 10}) grid.push_back(params(ell, 4, 1, 0.1));
  const auto rows = measure_times(grid, Theta::lower, 100, 1000000, 5);
  CHECK(rows[0].summary.mean_tau_star < rows[1].summary.mean_tau_star);
  CHECK(rows[1].summary.mean_tau_star < rows[2].summary.mean_tau_star);
}

TEST_CASE("caps are respected and censoring is reported") {
  const auto samples = hitting_times(params(12, 30, 1, 0.2), Theta::upper, 10, 25, 41);
  const auto s = summarize_times(samples, 25);
  CHECK(s.max_sample <= 25);
  CHECK(s.censored_tau0 > 0.0);
  CHECK(times_table(samples).rows.size() == 10);
}

TEST_CASE("phase scan") {
  PhaseScanOptions opts;
  opts.steps = 1500;
  opts.replicas = 4;
  opts.seed = 43;
  const std::vector<double> a_grid{0.1, 1.0}, alpha_grid{10.0};
  const auto points = phase_scan(a_grid, alpha_grid, opts);
  REQUIRE(points.size() == a_grid.size() * alpha_grid.size());
  CHECK(phase_table(points, opts).rows.size() == points.size());

  const auto& ordered = points[0];
  CHECK(ordered.quasispecies);
  CHECK(ordered.alpha * ordered.psi > std::log(2.0));
  CHECK(ordered.m == 200);
  CHECK(std::abs(ordered.n0_mean - ordered.rho0) <= opts.abs_tol + opts.se_factor * ordered.n0_se);

  const auto& disordered = points[1];
  CHECK_FALSE(disordered.quasispecies);
  CHECK(disordered.psi == 0.0);
  CHECK(disordered.n0_mean < 0.02);
}
