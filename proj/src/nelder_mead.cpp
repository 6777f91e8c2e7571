#include "quasilab/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace quasilab {

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0,
                           const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  MinimizeResult res;
  if (n == 0) {
    res.value = f(x0);
    res.evaluations = 1;
    res.converged = true;
    return res;
  }
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 0.5 / dn;
  const double delta = 1.0 - 1.0 / dn;

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  vals[0] = eval(pts[0]);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = pts[i + 1];
    p[i] += opts.initial_step;
    vals[i + 1] = eval(p);
    if (!std::isfinite(vals[i + 1])) {
      p[i] = x0[i] - opts.initial_step;
      vals[i + 1] = eval(p);
    }
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (evals < opts.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        diameter = std::max(diameter, std::abs(pts[i][k] - pts[best][k]));
    const double spread = vals[worst] - vals[best];
    if (std::isfinite(vals[worst]) && spread <= opts.ftol && diameter <= opts.xtol) {
      res.converged = true;
      break;
    }
    if (diameter <= 1e-3 * opts.xtol) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / dn;
    }
    for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - pts[worst][k]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + beta * (xr[k] - centroid[k]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t k = 0; k < n; ++k) {
      xc[k] = outside ? centroid[k] + gamma * (xr[k] - centroid[k])
                      : centroid[k] - gamma * (centroid[k] - pts[worst][k]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k)
        pts[i][k] = pts[best][k] + delta * (pts[i][k] - pts[best][k]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.value = *it;
  res.evaluations = evals;
  return res;
}

}  // namespace quasilab
