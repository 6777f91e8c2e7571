#include "quasilab/sequence_wf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quasilab/errors.hpp"

namespace quasilab {

bool Sequence::is_master() const {
  return std::all_of(letters_.begin(), letters_.end(), [](std::uint8_t c) { return c == 0; });
}

int Sequence::distance_to_master() const {
  return static_cast<int>(std::count_if(letters_.begin(), letters_.end(),
                                        [](std::uint8_t c) { return c != 0; }));
}

int hamming_distance(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v) {
  int d = 0;
  for (std::size_t j = 0; j < u.size(); ++j) d += u[j] != v[j];
  return d;
}

namespace {

int distance_to_master(std::span<const std::uint8_t> u) {
  int d = 0;
  for (auto c : u) d += c != 0;
  return d;
}

}  // namespace

Population::Population(int m, int ell)
    : m_(m), ell_(ell), data_(static_cast<std::size_t>(m) * ell, 0) {}

Population::Population(const std::vector<Sequence>& members)
    : m_(static_cast<int>(members.size())),
      ell_(members.empty() ? 0 : members.front().length()) {
  data_.reserve(static_cast<std::size_t>(m_) * ell_);
  for (const auto& s : members) {
    if (s.length() != ell_) throw ValidationError("population members must share one length");
    data_.insert(data_.end(), s.letters().begin(), s.letters().end());
  }
}

Sequence Population::sequence(int i) const {
  auto s = member(i);
  return Sequence(std::vector<std::uint8_t>(s.begin(), s.end()));
}

double fitness(std::span<const std::uint8_t> u, double sigma) {
  return distance_to_master(u) == 0 ? sigma : 1.0;
}

double selection_probability(std::span<const std::uint8_t> u, const Population& x, double sigma) {
  double total = 0.0;
  int count = 0;
  for (int i = 0; i < x.size(); ++i) {
    auto xi = x.member(i);
    total += fitness(xi, sigma);
    if (std::equal(xi.begin(), xi.end(), u.begin(), u.end())) ++count;
  }
  return fitness(u, sigma) * count / total;
}

double mutation_probability(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v,
                            double q, int kappa) {
  const double keep = 1.0 - q;
  const double change = q / (kappa - 1);
  double prob = 1.0;
  for (std::size_t j = 0; j < u.size(); ++j) prob *= u[j] == v[j] ? keep : change;
  return prob;
}

std::vector<int> hamming_class_counts(const Population& x) {
  std::vector<int> counts(x.length() + 1, 0);
  for (int i = 0; i < x.size(); ++i) ++counts[distance_to_master(x.member(i))];
  return counts;
}

Population wf_step(const Population& x, const ModelParams& p, Rng& rng) {
  const int m = x.size();
  const int ell = x.length();

  // Cumulative fitness over members; parent i is chosen with weight A(x(i)).
  std::vector<double> cdf(m);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += fitness(x.member(i), p.sigma);
    cdf[i] = acc;
  }

  Population y(m, ell);
  const bool binary = p.kappa == 2;
  for (int c = 0; c < m; ++c) {
    const int parent = inverse_cdf(cdf, uniform01(rng));
    auto src = x.member(parent);
    auto dst = y.member(c);
    for (int j = 0; j < ell; ++j) {
      std::uint8_t letter = src[j];
      if (uniform01(rng) < p.q) {
        if (binary) {
          letter ^= 1;
        } else {
          // Uniform over the kappa-1 letters different from the current one.
          auto shift = static_cast<std::uint8_t>(
              1 + std::min<int>(static_cast<int>(uniform01(rng) * (p.kappa - 1)), p.kappa - 2));
          letter = static_cast<std::uint8_t>((letter + shift) % p.kappa);
        }
      }
      dst[j] = letter;
    }
  }
  return y;
}

Population decode_population(std::uint64_t code, int m, int ell, int kappa) {
  Population y(m, ell);
  for (int i = m - 1; i >= 0; --i) {
    auto s = y.member(i);
    for (int j = ell - 1; j >= 0; --j) {
      s[j] = static_cast<std::uint8_t>(code % kappa);
      code /= kappa;
    }
  }
  return y;
}

std::vector<TransitionEntry> enumerate_transition_row(const Population& x, const ModelParams& p) {
  const int m = x.size();
  const int ell = x.length();
  const double n_states = std::pow(static_cast<double>(p.kappa), static_cast<double>(ell) * m);
  if (n_states > kEnumerationGuard)
    throw GuardError("enumerate_transition_row: kappa^(ell*m) = " + std::to_string(n_states) +
                     " exceeds the guard 1e6");

  // g(v) = sum_u F(u, x) M(u, v): the law of a single child. Each member
  // contributes A(x(i))/total, which groups identical members into F(u, x).
  const auto n_seq = static_cast<std::uint64_t>(std::llround(std::pow(p.kappa, ell)));
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += fitness(x.member(i), p.sigma);
  std::vector<double> child_law(n_seq, 0.0);
  for (std::uint64_t v = 0; v < n_seq; ++v) {
    auto vs = decode_population(v, 1, ell, p.kappa);
    double g = 0.0;
    for (int i = 0; i < m; ++i) {
      g += fitness(x.member(i), p.sigma) / total *
           mutation_probability(x.member(i), vs.member(0), p.q, p.kappa);
    }
    child_law[v] = g;
  }

  const auto n_rows = static_cast<std::uint64_t>(std::llround(n_states));
  std::vector<TransitionEntry> row;
  row.reserve(n_rows);
  for (std::uint64_t code = 0; code < n_rows; ++code) {
    double prob = 1.0;
    std::uint64_t rest = code;
    for (int i = 0; i < m; ++i) {
      prob *= child_law[rest % n_seq];
      rest /= n_seq;
    }
    row.push_back({decode_population(code, m, ell, p.kappa), prob});
  }
  return row;
}

Population far_population(int m, int ell) {
  Population y(m, ell);
  for (int i = 0; i < m; ++i) {
    auto s = y.member(i);
    std::fill(s.begin(), s.end(), std::uint8_t{1});
  }
  return y;
}

Population random_population(int m, int ell, int kappa, Rng& rng) {
  Population y(m, ell);
  std::uniform_int_distribution<int> letter(0, kappa - 1);
  for (int i = 0; i < m; ++i)
    for (auto& c : y.member(i)) c = static_cast<std::uint8_t>(letter(rng));
  return y;
}

}  // namespace quasilab
