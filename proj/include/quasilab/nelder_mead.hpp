#pragma once

#include <functional>
#include <span>
#include <vector>

namespace quasilab {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
  double initial_step = 0.05;
  /// Stop when the spread of simplex values falls below ftol and its
  /// diameter below xtol.
  double ftol = 1e-15;
  double xtol = 1e-10;
  int max_evaluations = 20000;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex search with dimension-adaptive coefficients.
/// The objective may return +infinity to reject a point; x0 should be finite.
MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0,
                           const NelderMeadOptions& opts = {});

}  // namespace quasilab
