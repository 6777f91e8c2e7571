#include "quasilab/params.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "quasilab/errors.hpp"

namespace quasilab {

std::optional<double> ModelParams::a_mismatch() const {
  if (!a) return std::nullopt;
  return std::abs(ell * q - *a);
}

std::vector<std::string> violations(const ModelParams& p) {
  std::vector<std::string> out;
  if (p.ell < 1) out.emplace_back("ell must be a positive integer");
  if (p.m < 1) out.emplace_back("m must be a positive integer");
  if (p.kappa < 2) out.emplace_back("kappa must be at least 2");
  if (!(p.q > 0.0)) out.emplace_back("q must be > 0");
  if (p.kappa >= 2 && !(p.q < 1.0 - 1.0 / p.kappa))
    out.emplace_back("q >= 1-1/kappa (q must lie in ]0, 1-1/kappa[)");
  if (!(p.sigma > 1.0)) out.emplace_back("sigma must exceed 1");
  if (p.K < 0) out.emplace_back("K must be non-negative");
  if (p.K > p.ell) out.emplace_back("K must not exceed ell");
  if (p.a && !(*p.a > 0.0)) out.emplace_back("a must be > 0");
  if (p.alpha && !(*p.alpha > 0.0)) out.emplace_back("alpha must be > 0 (or inf)");
  return out;
}

ModelParams validate(const ModelParams& p) {
  auto v = violations(p);
  if (!v.empty()) throw ValidationError("invalid parameters: " + v.front());
  return p;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

long long l1_norm(std::span<const int> v) {
  long long s = 0;
  for (int x : v) s += x < 0 ? -static_cast<long long>(x) : x;
  return s;
}

bool in_simplex_domain(std::span<const double> v, double tol) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= -tol)) return false;
    s += x;
  }
  return s <= 1.0 + tol;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "+inf" || value == "infinity") return kInfiniteAlpha;
  try {
    std::size_t pos = 0;
    double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': cannot parse real '" + value + "'");
  }
}

long long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) eq = line.find(':');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_settings(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  auto& p = cfg.params;
  for (const auto& [key, value] : kv) {
    if (key == "ell") p.ell = static_cast<int>(parse_integer(key, value));
    else if (key == "m") p.m = static_cast<int>(parse_integer(key, value));
    else if (key == "kappa") p.kappa = static_cast<int>(parse_integer(key, value));
    else if (key == "q") p.q = parse_real(key, value);
    else if (key == "sigma") p.sigma = parse_real(key, value);
    else if (key == "K") p.K = static_cast<int>(parse_integer(key, value));
    else if (key == "a") p.a = parse_real(key, value);
    else if (key == "alpha") p.alpha = parse_real(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(key, value));
    else throw ValidationError("unknown config key '" + key + "'");
  }
}

void complete_derived(ModelParams& p) {
  if (p.q == 0.0 && p.a && p.ell > 0) p.q = *p.a / p.ell;
  if (!p.a && p.q > 0.0) p.a = p.ell * p.q;
  if (p.m <= 0 && p.alpha && std::isfinite(*p.alpha))
    p.m = static_cast<int>(std::lround(*p.alpha * p.ell));
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  cfg.params.m = 0;  // so alpha can fill it
  apply_settings(cfg, parse_key_values(buf.str()));
  return cfg;
}

}  // namespace quasilab
