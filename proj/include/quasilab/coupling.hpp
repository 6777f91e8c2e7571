#pragma once

#include <span>
#include <vector>

#include "quasilab/occupancy.hpp"
#include "quasilab/random.hpp"

namespace quasilab {

/// An m x (ell+1) matrix of uniforms driving one coupled step. Column 0 picks
/// each child's parent class, column 1 its mutation; the other columns are
/// drawn but unused.
class UniformMatrix {
 public:
  UniformMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static UniformMatrix draw(int m, int ell, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
};

/// Psi_O: child i takes parent class F_sel^{-1}(r(i,0)) and then class
/// F_mut^{-1}(r(i,1)) of that parent's M_H row, both CDFs in ascending class
/// order. Monotone for the prefix-sum order.
Occupancy coupling_map(const LumpedKernel& kernel, std::span<const int> o, const UniformMatrix& r);

/// pi_l: classes K+1..ell are emptied into class ell.
Occupancy project_lower(std::span<const int> o, int K);
/// pi_{K+1}: classes K+1..ell are emptied into class K+1.
Occupancy project_upper(std::span<const int> o, int K);

enum class Bound { lower, upper };

Occupancy enter_occupancy(Bound bound, int ell, int m);
Occupancy exit_occupancy(Bound bound, int ell, int m);

/// The four-case lower (Psi^l) or upper (Psi^{K+1}) map.
Occupancy bound_map(Bound bound, const LumpedKernel& kernel, int K, std::span<const int> o,
                    const UniformMatrix& r);

inline Occupancy lower_map(const LumpedKernel& kernel, int K, std::span<const int> o,
                           const UniformMatrix& r) {
  return bound_map(Bound::lower, kernel, K, o, r);
}
inline Occupancy upper_map(const LumpedKernel& kernel, int K, std::span<const int> o,
                           const UniformMatrix& r) {
  return bound_map(Bound::upper, kernel, K, o, r);
}

struct CoupledTrajectories {
  std::vector<Occupancy> lower;
  std::vector<Occupancy> middle;
  std::vector<Occupancy> upper;
};

/// Drives O^l, O and O^{K+1} from o0 with one shared uniform matrix per
/// step. Throws CouplingViolation if O^l_n <= O_n <= O^{K+1}_n fails.
CoupledTrajectories run_coupled(const LumpedKernel& kernel, int K, std::span<const int> o0,
                                int steps, Rng& rng);

}  // namespace quasilab
