#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quasilab/params.hpp"
#include "quasilab/random.hpp"

namespace quasilab {

/// A chromosome of length ell over {0, ..., kappa-1}. The master sequence
/// is the all-zero word.
class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(std::vector<std::uint8_t> letters) : letters_(std::move(letters)) {}

  static Sequence master(int ell) { return Sequence(std::vector<std::uint8_t>(ell, 0)); }

  int length() const { return static_cast<int>(letters_.size()); }
  std::span<const std::uint8_t> letters() const { return letters_; }
  std::uint8_t operator[](int j) const { return letters_[j]; }

  bool is_master() const;
  /// Hamming distance to the master sequence.
  int distance_to_master() const;

  bool operator==(const Sequence&) const = default;
  auto operator<=>(const Sequence&) const = default;

 private:
  std::vector<std::uint8_t> letters_;
};

int hamming_distance(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v);

/// m chromosomes of length ell stored contiguously, one byte per letter.
class Population {
 public:
  Population() = default;
  Population(int m, int ell);  // all-master
  explicit Population(const std::vector<Sequence>& members);

  int size() const { return m_; }
  int length() const { return ell_; }

  std::span<const std::uint8_t> member(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * ell_, static_cast<std::size_t>(ell_)};
  }
  std::span<std::uint8_t> member(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * ell_, static_cast<std::size_t>(ell_)};
  }
  Sequence sequence(int i) const;

  bool operator==(const Population&) const = default;
  auto operator<=>(const Population&) const = default;

 private:
  int m_ = 0;
  int ell_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Sharp peak fitness: sigma on the master sequence, 1 elsewhere.
double fitness(std::span<const std::uint8_t> u, double sigma);

/// F(u, x) = A(u) card{i : x(i) = u} / sum_i A(x(i)).
double selection_probability(std::span<const std::uint8_t> u, const Population& x, double sigma);

/// M(u, v) = prod_j ((1-q) 1{u_j = v_j} + q/(kappa-1) 1{u_j != v_j}).
double mutation_probability(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v,
                            double q, int kappa);

/// N_k(x) for k = 0..ell.
std::vector<int> hamming_class_counts(const Population& x);

/// One Wright-Fisher generation: each child picks a parent by fitness-
/// proportional sampling, then every locus mutates independently with
/// probability q to a uniformly chosen different letter.
Population wf_step(const Population& x, const ModelParams& p, Rng& rng);

struct TransitionEntry {
  Population next;
  double probability;
};

/// Largest kappa^(ell*m) accepted by enumerate_transition_row.
inline constexpr double kEnumerationGuard = 1e6;

/// Exact row P(X_{n+1} = y | X_n = x) for every y in (A^ell)^m, in
/// lexicographic order of y. Throws GuardError past kEnumerationGuard.
std::vector<TransitionEntry> enumerate_transition_row(const Population& x, const ModelParams& p);

/// Decodes index `code` (base kappa, most significant letter first) as a
/// population of m sequences of length ell.
Population decode_population(std::uint64_t code, int m, int ell, int kappa);

/// Population whose members are all the sequence 1...1 (Hamming class ell).
Population far_population(int m, int ell);

/// Population of uniformly random sequences.
Population random_population(int m, int ell, int kappa, Rng& rng);

}  // namespace quasilab
