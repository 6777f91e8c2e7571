#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "quasilab/errors.hpp"
#include "quasilab/sequence_wf.hpp"

using namespace quasilab;

namespace {

ModelParams params(int ell, int m, int kappa, double q) {
  ModelParams p;
  p.ell = ell;
  p.m = m;
  p.kappa = kappa;
  p.q = q;
  p.sigma = 2.0;
  return p;
}

Sequence word(std::vector<std::uint8_t> letters) { return Sequence(std::move(letters)); }

}  // namespace

TEST_CASE("sharp peak fitness") {
  const auto w = Sequence::master(4);
  CHECK(fitness(w.letters(), 2.0) == 2.0);
  CHECK(fitness(w.letters(), 3.5) == 3.5);
  CHECK(fitness(word({0, 1, 0, 0}).letters(), 2.0) == 1.0);
  CHECK(w.is_master());
  CHECK(word({1, 0, 1, 1}).distance_to_master() == 3);
}

TEST_CASE("selection_probability") {
  const auto w = Sequence::master(3);
  const auto u = word({1, 0, 0});
  const auto v = word({0, 0, 1});
  CHECK(selection_probability(w.letters(), Population({w, u}), 2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(selection_probability(u.letters(), Population({u, u, u}), 2.0) == 1.0);
  CHECK(selection_probability(v.letters(), Population({w, u}), 2.0) == 0.0);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_population(6, 2, 2, rng);
    std::set<Sequence> distinct;
    for (int i = 0; i < x.size(); ++i) distinct.insert(x.sequence(i));
    double total = 0.0;
    for (const auto& s : distinct) total += selection_probability(s.letters(), x, 2.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("mutation_probability") {
  const double q = 0.1;
  const auto w3 = Sequence::master(3);
  CHECK(mutation_probability(w3.letters(), w3.letters(), q, 2) == doctest::Approx(std::pow(1 - q, 3)));
  const auto a = word({0, 2});
  const auto b = word({0, 3});
  CHECK(mutation_probability(a.letters(), b.letters(), q, 4) == doctest::Approx((1 - q) * q / 3));
  CHECK(mutation_probability(a.letters(), b.letters(), 0.0, 4) == 0.0);
}

TEST_CASE("mutation rows are stochastic for ell <= 3") {
  const double q = 0.07;
  for (int kappa : {2, 3}) {
    for (int ell = 1; ell <= 3; ++ell) {
      int words = 1;
      for (int j = 0; j < ell; ++j) words *= kappa;
      for (int u = 0; u < words; ++u) {
        const auto su = decode_population(static_cast<std::uint64_t>(u), 1, ell, kappa).sequence(0);
        double row = 0.0;
        for (int v = 0; v < words; ++v) {
          const auto sv = decode_population(static_cast<std::uint64_t>(v), 1, ell, kappa).sequence(0);
          row += mutation_probability(su.letters(), sv.letters(), q, kappa);
        }
        CHECK(std::abs(row - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("hamming_class_counts") {
  CHECK(hamming_class_counts(Population(4, 3)) == std::vector<int>{4, 0, 0, 0});
  const Population x({Sequence::master(3), word({1, 1, 0})});
  CHECK(hamming_class_counts(x) == std::vector<int>{1, 0, 1, 0});
  CHECK(hamming_class_counts(far_population(2, 3)) == std::vector<int>{0, 0, 0, 2});

  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const auto y = random_population(9, 5, 3, rng);
    std::vector<int> naive(6, 0);
    std::vector<Sequence> members;
    for (int i = 0; i < y.size(); ++i) {
      int d = 0;
      for (auto letter : y.member(i)) d += letter != 0;
      naive[static_cast<std::size_t>(d)] += 1;
      members.push_back(y.sequence(i));
    }
    CHECK(hamming_class_counts(y) == naive);
    std::reverse(members.begin(), members.end());
    CHECK(hamming_class_counts(Population(members)) == naive);
  }
}

TEST_CASE("wf_step with m = 1, ell = 1 keeps the master with probability 1 - q") {
  const auto p = params(1, 1, 2, 0.2);
  Rng rng(5);
  const int draws = 100000;
  int kept = 0;
  const Population x(1, 1);
  for (int i = 0; i < draws; ++i) kept += wf_step(x, p, rng).member(0)[0] == 0;
  const double se = std::sqrt(0.8 * 0.2 / draws);
  CHECK(std::abs(static_cast<double>(kept) / draws - 0.8) < 4 * se);
}

TEST_CASE("wf_step without mutation stays all-master") {
  const auto p = params(6, 5, 2, 0.0);
  Rng rng(8);
  Population x(5, 6);
  for (int n = 0; n < 20; ++n) x = wf_step(x, p, rng);
  CHECK(x == Population(5, 6));
}

TEST_CASE("wf_step is reproducible and letters stay in the alphabet") {
  const auto p = params(7, 6, 3, 0.2);
  auto r1 = make_stream(42, 0);
  auto r2 = make_stream(42, 0);
  Population a(6, 7), b(6, 7);
  for (int n = 0; n < 10; ++n) {
    a = wf_step(a, p, r1);
    b = wf_step(b, p, r2);
  }
  CHECK(a == b);
  for (int i = 0; i < a.size(); ++i)
    for (auto letter : a.member(i)) CHECK(letter < 3);
}

TEST_CASE("enumerate_transition_row") {
  const auto p1 = params(1, 1, 2, 0.1);
  const auto row = enumerate_transition_row(Population(1, 1), p1);
  REQUIRE(row.size() == 2);
  CHECK(row[0].next == Population(1, 1));
  CHECK(row[0].probability == doctest::Approx(0.9));
  CHECK(row[1].probability == doctest::Approx(0.1));

  const auto p = params(2, 2, 2, 0.1);
  const Population x({Sequence::master(2), word({1, 0})});
  double total = 0.0;
  for (const auto& e : enumerate_transition_row(x, p)) total += e.probability;
  CHECK(std::abs(total - 1.0) < 1e-12);

  CHECK_THROWS_AS(enumerate_transition_row(Population(4, 6), params(6, 4, 2, 0.1)), GuardError);
}

TEST_CASE("empirical wf transitions match the enumerated row") {
  const auto p = params(2, 2, 2, 0.1);
  const Population x({Sequence::master(2), word({1, 1})});
  const auto row = enumerate_transition_row(x, p);
  std::map<Population, int> seen;
  Rng rng(77);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) seen[wf_step(x, p, rng)] += 1;
  for (const auto& e : row) {
    const double freq = static_cast<double>(seen[e.next]) / draws;
    const double se = std::sqrt(std::max(e.probability * (1 - e.probability), 1.0 / draws) / draws);
    CHECK(std::abs(freq - e.probability) < 5 * se);
  }
}
