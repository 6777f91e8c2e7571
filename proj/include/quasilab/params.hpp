#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace quasilab {

/// Continuum state: a point of {r in R^{K+1} : r_k >= 0, sum r_k <= 1}.
using SimplexPoint = std::vector<double>;

/// Reduced-chain state: class counts z_0..z_K with |z|_1 <= m.
using ClassVector = std::vector<int>;

/// Sentinel used for alpha = +infinity.
inline constexpr double kInfiniteAlpha = std::numeric_limits<double>::infinity();

/// Scalar parameters of the Wright-Fisher sharp peak model.
///
/// `a` and `alpha` are the asymptotic targets of l*q and m/l. They are kept
/// next to (ell, m, q) because experiments move along the asymptotic regime
/// at fixed (a, alpha).
struct ModelParams {
  int ell = 1;
  int m = 1;
  int kappa = 2;
  double q = 0.0;
  double sigma = 2.0;
  int K = 0;
  std::optional<double> a;
  std::optional<double> alpha;

  /// |ell*q - a| when `a` is set, otherwise nullopt.
  std::optional<double> a_mismatch() const;

  /// The `a` used by limit objects: the stored target if present, else ell*q.
  double effective_a() const { return a.value_or(ell * q); }

  bool operator==(const ModelParams&) const = default;
};

/// Returns `p` unchanged if every constraint holds, throws ValidationError
/// naming the first violated constraint otherwise.
ModelParams validate(const ModelParams& p);

/// Checks every constraint and returns all violations (empty when valid).
std::vector<std::string> violations(const ModelParams& p);

double l1_norm(std::span<const double> v);
long long l1_norm(std::span<const int> v);

/// True when v is in the simplex domain up to `tol`.
bool in_simplex_domain(std::span<const double> v, double tol = 1e-12);

/// Parameters plus run-level settings read from a config file.
struct RunConfig {
  ModelParams params;
  std::uint64_t seed = 0;
};

/// Parses flat `key = value` lines (`#` starts a comment). Recognised keys:
/// ell, m, kappa, q, sigma, K, a, alpha, seed. `alpha = inf` is accepted.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Applies key/value settings onto `cfg`. Unknown keys throw ValidationError.
void apply_settings(RunConfig& cfg, const std::map<std::string, std::string>& kv);

/// Fills q = a/ell and m = round(alpha*ell) when only (a, alpha, ell) are
/// given, and a = ell*q when only q is given.
void complete_derived(ModelParams& p);

RunConfig load_config_file(const std::string& path);

}  // namespace quasilab
