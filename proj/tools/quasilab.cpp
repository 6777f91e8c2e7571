// Command-line front end: one subcommand per experiment, CSV or JSON output.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quasilab/coupling.hpp"
#include "quasilab/dynamics.hpp"
#include "quasilab/errors.hpp"
#include "quasilab/experiments.hpp"
#include "quasilab/ldp.hpp"
#include "quasilab/occupancy.hpp"
#include "quasilab/parallel.hpp"
#include "quasilab/reduced_chain.hpp"
#include "quasilab/sequence_wf.hpp"
#include "quasilab/table.hpp"

using namespace quasilab;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

/// Options shared by every subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value parameter file");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--out", c.out, "output path (default stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", c.threads, "worker threads for replica loops (0 = all cores)");
  for (const char* key : {"ell", "m", "kappa", "q", "sigma", "K", "a", "alpha"}) {
    auto* opt = cmd->add_option_function<std::string>(
        std::string("--") + key, [&c, key](const std::string& v) { c.overrides[key] = v; },
        std::string("model parameter ") + key);
    (void)opt;
  }
}

struct Resolved {
  ModelParams params;
  std::uint64_t seed = 0;
};

/// Config file, then flag overrides, then derived values; validated.
Resolved resolve(const Common& c, bool strict = true) {
  RunConfig cfg;
  if (!c.config.empty()) cfg = load_config_file(c.config);
  apply_settings(cfg, c.overrides);
  if (cfg.params.m <= 0 && !(cfg.params.alpha && std::isfinite(*cfg.params.alpha))) cfg.params.m = 1;
  complete_derived(cfg.params);
  if (strict) validate(cfg.params);
  Resolved r{cfg.params, cfg.seed};
  if (c.seed) r.seed = *c.seed;
  return r;
}

void emit(const Common& c, const Table& t) {
  const auto fmt = parse_output_format(c.format);
  if (c.out.empty()) {
    write_table(std::cout, t, fmt);
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ValidationError("cannot open output file '" + c.out + "'");
  write_table(f, t, fmt);
}

void add_param_metadata(Table& t, const Resolved& r) {
  const auto& p = r.params;
  t.add_metadata("ell", std::to_string(p.ell));
  t.add_metadata("m", std::to_string(p.m));
  t.add_metadata("kappa", std::to_string(p.kappa));
  t.add_metadata("q", format_real(p.q));
  t.add_metadata("sigma", format_real(p.sigma));
  t.add_metadata("K", std::to_string(p.K));
  t.add_metadata("seed", std::to_string(r.seed));
  if (auto d = p.a_mismatch()) t.add_metadata("a_mismatch", format_real(*d));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse grid value '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty grid");
  return out;
}

/// replica, step, n_0..n_K, n_rest.
void class_columns(Table& t, int K) {
  t.columns = {"replica", "step"};
  for (int k = 0; k <= K; ++k) t.columns.push_back("n_" + std::to_string(k));
  t.columns.push_back("n_rest");
}

std::vector<Cell> class_row(int rep, long step, const std::vector<int>& counts, int K) {
  std::vector<Cell> row{std::int64_t{rep}, std::int64_t{step}};
  std::int64_t rest = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (static_cast<int>(k) <= K)
      row.emplace_back(std::int64_t{counts[k]});
    else
      rest += counts[k];
  }
  row.emplace_back(rest);
  return row;
}

Theta parse_theta(const std::string& s) {
  if (s == "lower") return Theta::lower;
  if (s == "upper") return Theta::upper;
  throw ValidationError("theta must be lower or upper");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wright-Fisher quasispecies toolkit"};
  app.require_subcommand(1);

  Common c;
  long steps = 100;
  int replicas = 1;

  auto* wf = app.add_subcommand("simulate-wf", "sequence-level chain; Hamming class counts per step");
  add_common(wf, c);
  wf->add_option("--steps", steps);
  wf->add_option("--replicas", replicas);

  auto* occ = app.add_subcommand("simulate-occupancy", "occupancy chain trajectories");
  add_common(occ, c);
  occ->add_option("--steps", steps);
  occ->add_option("--replicas", replicas);

  std::string theta = "upper";
  auto* bounds = app.add_subcommand("simulate-bounds", "reduced chain Z^theta trajectories");
  add_common(bounds, c);
  bounds->add_option("--steps", steps);
  bounds->add_option("--replicas", replicas);
  bounds->add_option("--theta", theta)->check(CLI::IsMember({"lower", "upper"}));

  std::int64_t cap = 1'000'000;
  auto* times = app.add_subcommand("hitting-times", "discovery and persistence times");
  add_common(times, c);
  times->add_option("--replicas", replicas);
  times->add_option("--cap", cap);
  times->add_option("--theta", theta)->check(CLI::IsMember({"lower", "upper"}));

  std::string z0_text;
  auto* dyn = app.add_subcommand("dynamics", "rho* and iteration of the limit map F");
  add_common(dyn, c);
  dyn->add_option("--z0", z0_text, "comma-separated start point (default (1,0,...))");

  std::string a_grid, alpha_grid;
  bool printed = false;
  auto* psi_cmd = app.add_subcommand("psi", "psi(a) and the critical alpha");
  add_common(psi_cmd, c);
  psi_cmd->add_option("--a-grid", a_grid, "comma-separated a values (default: a)");
  psi_cmd->add_flag("--paper-denominator", printed,
                    "use sigma rho/((sigma-1) rho - 1) as the selection term");
  PsiOptions po;
  psi_cmd->add_option("--lmax", po.l_max, "initial l_max (doubled until stable)");
  psi_cmd->add_flag("--literal-index", po.literal_index,
                    "sum from k = 1, leaving the step out of rho_0 unpriced");

  PhaseScanOptions scan;
  auto* phase = app.add_subcommand("phase-diagram", "psi versus simulation on an (a, alpha) grid");
  add_common(phase, c);
  phase->add_option("--sim-ell", scan.ell, "sequence length of the simulations");
  phase->add_option("--a-grid", a_grid)->required();
  phase->add_option("--alpha-grid", alpha_grid)->required();
  phase->add_option("--steps", scan.steps);
  phase->add_option("--replicas", scan.replicas);
  phase->add_option("--burn-in", scan.burn_in);

  std::string renewal_case = "two-state";
  long horizon = 200'000;
  auto* renewal = app.add_subcommand("renewal-check", "time average versus regeneration cycles");
  add_common(renewal, c);
  renewal->add_option("--case", renewal_case)->check(CLI::IsMember({"two-state", "reduced"}));
  renewal->add_option("--theta", theta)->check(CLI::IsMember({"lower", "upper"}));
  bool force_exact = false;
  renewal->add_flag("--exact", force_exact,
                    "require the exact stationary value (m <= 12, K <= 2), failing otherwise");
  renewal->add_option("--horizon", horizon);
  renewal->add_option("--replicas", replicas);

  StationaryOptions st;
  std::string chain = "occupancy";
  auto* stat = app.add_subcommand("stationary", "stationary means of N_k/m");
  add_common(stat, c);
  stat->add_option("--chain", chain)->check(CLI::IsMember({"wf", "occupancy", "lower", "upper"}));
  stat->add_option("--burn-in", st.burn_in, "negative: 10x the deterministic relaxation time");
  stat->add_option("--steps", st.steps);
  stat->add_option("--replicas", st.replicas);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    replica_threads() = c.threads;
    if (steps < 0 || replicas < 1) throw ValidationError("steps must be >= 0 and replicas >= 1");

    if (wf->parsed()) {
      const auto r = resolve(c);
      const auto& p = r.params;
      Table t;
      class_columns(t, p.K);
      add_param_metadata(t, r);
      for (int rep = 0; rep < replicas; ++rep) {
        auto rng = make_stream(r.seed, static_cast<std::uint64_t>(rep));
        Population x(p.m, p.ell);
        for (long n = 0; n <= steps; ++n) {
          if (n > 0) x = wf_step(x, p, rng);
          t.add_row(class_row(rep, n, hamming_class_counts(x), p.K));
        }
      }
      emit(c, t);
    } else if (occ->parsed()) {
      const auto r = resolve(c);
      const auto& p = r.params;
      const LumpedKernel kernel(p);
      Table t;
      class_columns(t, p.K);
      add_param_metadata(t, r);
      for (int rep = 0; rep < replicas; ++rep) {
        auto rng = make_stream(r.seed, static_cast<std::uint64_t>(rep));
        Occupancy o(p.ell + 1, 0);
        o[0] = p.m;
        for (long n = 0; n <= steps; ++n) {
          if (n > 0) o = occupancy_step(kernel, o, rng);
          t.add_row(class_row(rep, n, o, p.K));
        }
      }
      emit(c, t);
    } else if (bounds->parsed()) {
      const auto r = resolve(c);
      const ReducedChain zc(r.params, parse_theta(theta));
      Table t;
      t.columns = {"replica", "step"};
      for (int k = 0; k <= r.params.K; ++k) t.columns.push_back("z_" + std::to_string(k));
      t.columns.push_back("state_tag");
      add_param_metadata(t, r);
      t.add_metadata("theta", theta);
      for (int rep = 0; rep < replicas; ++rep) {
        auto rng = make_stream(r.seed, static_cast<std::uint64_t>(rep));
        auto z = zc.enter();
        for (long n = 0; n <= steps; ++n) {
          if (n > 0) z = zc.step(z, rng);
          std::vector<Cell> row{std::int64_t{rep}, std::int64_t{n}};
          for (int v : z.z) row.emplace_back(std::int64_t{v});
          row.emplace_back(std::string(to_string(z.tag)));
          t.add_row(std::move(row));
        }
      }
      emit(c, t);
    } else if (times->parsed()) {
      const auto r = resolve(c);
      auto t = times_table(hitting_times(r.params, parse_theta(theta), replicas, cap, r.seed));
      add_param_metadata(t, r);
      t.add_metadata("theta", theta);
      t.add_metadata("cap", std::to_string(cap));
      emit(c, t);
    } else if (dyn->parsed()) {
      // Only the limit parameters matter here.
      const auto r = resolve(c, false);
      const auto& p = r.params;
      const LimitModel model{p.sigma, p.effective_a()};
      if (!(model.sigma > 1.0)) throw ValidationError("invalid parameters: sigma must exceed 1");
      if (!(model.a > 0.0)) throw ValidationError("invalid parameters: a must be > 0");
      if (p.K < 0) throw ValidationError("invalid parameters: K must be non-negative");
      SimplexPoint z0(p.K + 1, 0.0);
      z0[0] = 1.0;
      if (!z0_text.empty()) {
        z0 = parse_grid(z0_text);
        if (static_cast<int>(z0.size()) != p.K + 1 || !in_simplex_domain(z0))
          throw ValidationError("--z0 must be a point of the simplex domain with K+1 entries");
      }
      const auto rho = rho_star(model, p.K);
      const auto fp = iterate_to_fixed_point(z0, model);
      auto residual = [&](const SimplexPoint& x) {
        const auto y = limit_map_F(x, model);
        double d = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) d += std::abs(y[k] - x[k]);
        return d;
      };
      if (c.format == "json" || dyn->get_option("--format")->count() == 0) {
        nlohmann::ordered_json doc;
        doc["sigma"] = model.sigma;
        doc["a"] = model.a;
        doc["K"] = p.K;
        doc["supercritical"] = rho.supercritical;
        doc["rho_star"] = rho.rho;
        doc["z0"] = z0;
        doc["fixed_point"] = fp.point;
        doc["iterations"] = fp.iterations;
        doc["rho_star_residual"] = residual(rho.rho);
        doc["fixed_point_residual"] = residual(fp.point);
        doc["relaxation_time"] = relaxation_time(z0, model);
        if (c.out.empty()) {
          std::cout << doc.dump(2) << '\n';
        } else {
          std::ofstream f(c.out);
          if (!f) throw ValidationError("cannot open output file '" + c.out + "'");
          f << doc.dump(2) << '\n';
        }
      } else {
        Table t;
        t.columns = {"k", "rho_star", "fixed_point"};
        add_param_metadata(t, r);
        t.add_metadata("iterations", std::to_string(fp.iterations));
        t.add_metadata("rho_star_residual", format_real(residual(rho.rho)));
        t.add_metadata("fixed_point_residual", format_real(residual(fp.point)));
        for (int k = 0; k <= p.K; ++k)
          t.add_row({std::int64_t{k}, rho.rho[k], fp.point[k]});
        emit(c, t);
      }
    } else if (psi_cmd->parsed()) {
      const auto r = resolve(c, false);
      const auto& p = r.params;
      if (!(p.sigma > 1.0) || p.kappa < 2) throw ValidationError("need sigma > 1 and kappa >= 2");
      std::vector<double> grid;
      if (!a_grid.empty()) {
        grid = parse_grid(a_grid);
      } else if (p.a) {
        grid = {*p.a};
      } else {
        throw ValidationError("psi needs --a or --a-grid");
      }
      Table t;
      t.columns = {"a", "rho_star_0", "psi", "alpha_c", "best_l", "l_max_used", "stabilized"};
      t.add_metadata("sigma", format_real(p.sigma));
      t.add_metadata("kappa", std::to_string(p.kappa));
      t.add_metadata("selection_denominator", printed ? "(sigma-1)rho-1" : "(sigma-1)rho+1");
      t.add_metadata("sum_index_start", po.literal_index ? "1" : "0");
      po.printed_denominator = printed;
      for (double a : grid) {
        if (!(a > 0.0)) throw ValidationError("a must be > 0");
        const LimitModel model{p.sigma, a};
        const auto res = psi(model, po);
        t.add_row({a, rho_star(model, 0).rho[0], res.value, critical_alpha(res.value, p.kappa),
                   std::int64_t{res.best_l}, std::int64_t{res.l_max_used},
                   std::int64_t{res.stabilized}});
      }
      emit(c, t);
    } else if (phase->parsed()) {
      const auto r = resolve(c, false);
      scan.kappa = r.params.kappa;
      scan.sigma = r.params.sigma;
      scan.K = r.params.K;
      scan.seed = r.seed;
      const auto pts = phase_scan(parse_grid(a_grid), parse_grid(alpha_grid), scan);
      emit(c, phase_table(pts, scan));
    } else if (renewal->parsed()) {
      RenewalResult res;
      Table t;
      t.columns = {"case", "time_average", "time_average_se", "cycle_ratio", "cycle_ratio_se",
                   "discrepancy_se", "cycles", "exact"};
      double exact = std::nan("");
      std::uint64_t seed = c.seed.value_or(0);
      if (renewal_case == "two-state") {
        auto spec = two_state_spec(0.3, 0.6);
        spec.horizon = horizon;
        spec.replicas = replicas;
        spec.seed = seed;
        res = renewal_check(spec);
        exact = 0.3 / (0.3 + 0.6);
      } else {
        const auto rr = resolve(c);
        seed = rr.seed;
        const ReducedChain zc(rr.params, parse_theta(theta));
        const int m = rr.params.m;
        auto f = [m](const ClassVector& z) { return static_cast<double>(z[0]) / m; };
        if (force_exact || (m <= kReducedGuardM && rr.params.K <= kReducedGuardK)) {
          exact = 0.0;
          for (const auto& [z, w] : exact_stationary(zc)) exact += w * f(z);
        }
        auto spec = reduced_chain_spec(zc, f);
        spec.horizon = horizon;
        spec.replicas = replicas;
        spec.seed = seed;
        res = renewal_check(spec);
        add_param_metadata(t, rr);
      }
      t.add_row({renewal_case, res.time_average, res.time_average_se, res.cycle_ratio,
                 res.cycle_ratio_se, res.discrepancy, std::int64_t{res.cycles}, exact});
      emit(c, t);
    } else if (stat->parsed()) {
      const auto r = resolve(c);
      st.chain = parse_chain_kind(chain);
      st.seed = r.seed;
      const auto est = estimate_stationary(r.params, st);
      auto t = stationary_table(r.params, est);
      t.add_metadata("seed", std::to_string(r.seed));
      t.add_metadata("tolerance", "max(0.05, 4 SE) against rho_star; finite-size bias O(1/sqrt(m))");
      emit(c, t);
    }
  } catch (const GuardError& e) {
    std::cerr << "guard violation: " << e.what() << '\n';
    return kExitGuard;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
