#include "quasilab/coupling.hpp"

#include <string>

#include "quasilab/errors.hpp"

namespace quasilab {

UniformMatrix UniformMatrix::draw(int m, int ell, Rng& rng) {
  UniformMatrix r(m, ell + 1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= ell; ++j) r(i, j) = uniform01(rng);
  return r;
}

Occupancy coupling_map(const LumpedKernel& kernel, std::span<const int> o, const UniformMatrix& r) {
  const int ell = kernel.ell();
  const int m = r.rows();
  // Selection CDF at class k is ((sigma-1) o(0) + S_k) / ((sigma-1) o(0) + m),
  // S_k the prefix sum of o. Written this way it is increasing in both o(0)
  // and S_k, which makes the parent choice monotone in o.
  const double boost = (kernel.sigma() - 1.0) * o[0];
  const double total = boost + m;
  std::vector<double> sel_cdf(ell + 1);
  long long prefix = 0;
  for (int k = 0; k <= ell; ++k) {
    prefix += o[k];
    sel_cdf[k] = prefix == m ? 1.0 : (boost + static_cast<double>(prefix)) / total;
  }
  Occupancy out(ell + 1, 0);
  for (int i = 0; i < m; ++i) {
    const int parent = inverse_cdf(sel_cdf, r(i, 0));
    const int child = inverse_cdf(kernel.mutation_cdf(parent), r(i, 1));
    ++out[child];
  }
  return out;
}

Occupancy project_lower(std::span<const int> o, int K) {
  const int ell = static_cast<int>(o.size()) - 1;
  Occupancy p(ell + 1, 0);
  int rest = 0;
  for (int k = 0; k <= ell; ++k) {
    if (k <= K) p[k] = o[k];
    else rest += o[k];
  }
  if (K < ell) p[ell] += rest;
  return p;
}

Occupancy project_upper(std::span<const int> o, int K) {
  const int ell = static_cast<int>(o.size()) - 1;
  Occupancy p(ell + 1, 0);
  int rest = 0;
  for (int k = 0; k <= ell; ++k) {
    if (k <= K) p[k] = o[k];
    else rest += o[k];
  }
  if (K < ell) p[K + 1] += rest;
  return p;
}

Occupancy enter_occupancy(Bound bound, int ell, int m) {
  Occupancy o(ell + 1, 0);
  if (bound == Bound::lower) {
    o[0] = 1;
    o[ell] += m - 1;
  } else {
    o[0] = m;
  }
  return o;
}

Occupancy exit_occupancy(Bound bound, int ell, int m) {
  Occupancy o(ell + 1, 0);
  if (bound == Bound::lower) o[ell] = m;
  else o[1] = m;
  return o;
}

Occupancy bound_map(Bound bound, const LumpedKernel& kernel, int K, std::span<const int> o,
                    const UniformMatrix& r) {
  const int ell = kernel.ell();
  const int m = r.rows();
  if (o[0] == 0) {
    auto next = coupling_map(kernel, o, r);
    if (next[0] == 0) return next;
    return enter_occupancy(bound, ell, m);
  }
  const auto projected = bound == Bound::lower ? project_lower(o, K) : project_upper(o, K);
  auto next = coupling_map(kernel, projected, r);
  if (next[0] == 0) return exit_occupancy(bound, ell, m);
  return bound == Bound::lower ? project_lower(next, K) : project_upper(next, K);
}

namespace {

std::string show(std::span<const int> o) {
  std::string s = "(";
  for (std::size_t i = 0; i < o.size(); ++i) s += (i ? "," : "") + std::to_string(o[i]);
  return s + ")";
}

}  // namespace

CoupledTrajectories run_coupled(const LumpedKernel& kernel, int K, std::span<const int> o0,
                                int steps, Rng& rng) {
  const int ell = kernel.ell();
  int m = 0;
  for (int x : o0) m += x;
  CoupledTrajectories t;
  t.lower.emplace_back(o0.begin(), o0.end());
  t.middle.emplace_back(o0.begin(), o0.end());
  t.upper.emplace_back(o0.begin(), o0.end());
  for (int n = 1; n <= steps; ++n) {
    const auto r = UniformMatrix::draw(m, ell, rng);
    t.lower.push_back(lower_map(kernel, K, t.lower.back(), r));
    t.middle.push_back(coupling_map(kernel, t.middle.back(), r));
    t.upper.push_back(upper_map(kernel, K, t.upper.back(), r));
    if (!leq(t.lower.back(), t.middle.back()) || !leq(t.middle.back(), t.upper.back())) {
      throw CouplingViolation("sandwich broken at step " + std::to_string(n) + ": lower " +
                              show(t.lower.back()) + ", middle " + show(t.middle.back()) +
                              ", upper " + show(t.upper.back()));
    }
  }
  return t;
}

}  // namespace quasilab
