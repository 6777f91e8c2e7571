#include <doctest.h>

#include <cmath>
#include <vector>

#include "quasilab/dynamics.hpp"
#include "quasilab/errors.hpp"
#include "quasilab/random.hpp"

using namespace quasilab;

namespace {

const LimitModel desk{2.0, 0.1};
const LimitModel subcritical{2.0, 1.0};

double l1_distance(const std::vector<double>& u, const std::vector<double>& v) {
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d += std::abs(u[i] - v[i]);
  return d;
}

SimplexPoint random_point(int dim, Rng& rng) {
  // Uniform on the corner simplex of dimension dim via sorted uniforms.
  std::vector<double> u(static_cast<std::size_t>(dim) + 1);
  for (auto& x : u) x = uniform01(rng);
  std::sort(u.begin(), u.end());
  SimplexPoint r(static_cast<std::size_t>(dim));
  double prev = 0.0;
  for (int i = 0; i < dim; ++i) {
    r[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] - prev;
    prev = u[static_cast<std::size_t>(i)];
  }
  return r;
}

}  // namespace

TEST_CASE("selection map f") {
  const std::vector<double> r{0.5, 0.2};
  const auto f = selection_map_f(r, 2.0);
  CHECK(f[0] == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(f[1] == doctest::Approx(0.1333).epsilon(1e-3));
  CHECK(selection_map_f(std::vector<double>{0.0, 0.3, 0.1}, 2.0) == std::vector<double>{0.0, 0.3, 0.1});
  CHECK(selection_map_f(std::vector<double>{1.0, 0.0}, 2.0) == std::vector<double>{1.0, 0.0});
}

TEST_CASE("limit map F") {
  const auto F = limit_map_F(std::vector<double>{0.5, 0.0, 0.0}, desk);
  CHECK(std::abs(F[0] - 0.603225) < 1e-6);
  CHECK(limit_map_F(std::vector<double>{0.0, 0.0}, desk) == std::vector<double>{0.0, 0.0});
  const auto rho = rho_star(desk, 4).rho;
  CHECK(l1_distance(limit_map_F(rho, desk), rho) < 1e-12);
}

TEST_CASE("expanded and composed forms of F agree") {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = random_point(1 + trial % 5, rng);
    const auto a = limit_map_F(r, desk);
    const auto b = limit_map_F_expanded(r, desk);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-14);
  }
}

TEST_CASE("F maps the domain into itself") {
  Rng rng(3);
  for (const auto& model : {desk, subcritical, LimitModel{5.0, 0.7}}) {
    for (int trial = 0; trial < 500; ++trial) {
      const auto r = random_point(1 + trial % 6, rng);
      const auto F = limit_map_F(r, model);
      CHECK(in_simplex_domain(F, 1e-14));
      CHECK(F[0] == scalar_map_Ftilde(r[0], model));
    }
  }
}

TEST_CASE("scalar map") {
  CHECK(scalar_map_Ftilde(0.0, desk) == 0.0);
  CHECK(scalar_map_Ftilde(1.0, desk) == doctest::Approx(0.904837).epsilon(1e-6));
  const double r0 = rho_star(desk, 0).rho[0];
  CHECK(std::abs(scalar_map_Ftilde(r0, desk) - r0) < 1e-12);
}

TEST_CASE("rho_star") {
  const auto q = rho_star(desk, 2);
  CHECK(q.supercritical);
  CHECK(std::abs(q.rho[0] - (2 * std::exp(-0.1) - 1)) < 1e-14);
  CHECK(std::abs(q.rho[1] - (2 * std::exp(-0.1) - 1) * 0.1 * 2) < 1e-14);
  CHECK(q.rho[0] == doctest::Approx(0.809675).epsilon(1e-6));
  CHECK(q.rho[1] == doctest::Approx(0.161935).epsilon(1e-5));

  const auto none = rho_star(subcritical, 3);
  CHECK_FALSE(none.supercritical);
  for (double x : none.rho) CHECK(x == 0.0);

  const auto long_tail = rho_star(desk, 60).rho;
  double total = 0.0;
  for (double x : long_tail) {
    CHECK(x >= 0.0);
    total += x;
  }
  CHECK(total >= 1 - 1e-10);
  CHECK(total <= 1 + 1e-12);
}

TEST_CASE("iteration converges to the predicted fixed point") {
  auto from_null = iterate_to_fixed_point(std::vector<double>{0.0, 0.3, 0.1}, desk);
  CHECK(l1_norm(from_null.point) < 1e-10);

  const std::vector<double> seed{0.01, 0.0, 0.0};
  const auto up = iterate_to_fixed_point(seed, desk);
  CHECK(l1_distance(up.point, rho_star(desk, 2).rho) < 1e-10);
  CHECK(up.iterations > 0);

  const auto down = iterate_to_fixed_point(std::vector<double>{0.9, 0.0, 0.0}, subcritical);
  CHECK(l1_norm(down.point) < 1e-10);
}

TEST_CASE("the master coordinate moves monotonically") {
  for (double start : {0.01, 0.5, 0.95}) {
    std::vector<double> z{start, 0.0, 0.0};
    int sign = 0;
    for (int n = 0; n < 200; ++n) {
      const auto next = limit_map_F(z, desk);
      const double d = next[0] - z[0];
      if (d != 0.0) {
        const int s = d > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        CHECK(s == sign);
      }
      z = next;
    }
  }
}

TEST_CASE("iteration budget exhaustion is reported") {
  CHECK_THROWS_AS(iterate_to_fixed_point(std::vector<double>{0.01}, desk, 1e-15, 3), ConvergenceError);
  CHECK(relaxation_time(std::vector<double>{0.01}, desk) > 0);
  CHECK(relaxation_time(rho_star(desk, 1).rho, desk) == 0);
}
