#pragma once

// Run configuration: a flat key=value file, strictly validated.
// Unknown keys are rejected so typos fail loudly instead of silently running
// with defaults.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace o2nc {

class config_error : public std::runtime_error {
 public:
  config_error(int line, const std::string& msg)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + msg
                                    : "config: " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline const std::vector<std::string>& known_problem_ids() {
  static const std::vector<std::string> ids = {"quadratic", "scaled_abs",
                                               "piecewise_quadratic", "toy_mlp"};
  return ids;
}

inline const std::vector<std::string>& known_algorithm_ids() {
  static const std::vector<std::string> ids = {"eo2nc", "o2nc_orig", "sgdm_rs",
                                               "sgdm_std"};
  return ids;
}

struct run_config {
  std::int64_t n = 0;        // horizon (steps)
  std::int64_t d = 0;        // ambient dimension
  std::uint64_t seed = 0;    // root seed
  std::string problem;       // problem id
  std::string algorithm;     // algorithm id (comma-separated pair for compare)
  double c = 1.0;            // stationarity scale
  double fstar = 1.0;        // optimality-gap bound F(x0) - inf F
  double g = 1.0;            // Lipschitz constant of the objective
  double sigma = 0.0;        // gradient-noise level, E|xi|^2 = sigma^2
  double epsilon = 0.05;     // target accuracy (internal; not a file key)

  // Optional schedule overrides; when absent the horizon-tuned formulas apply.
  std::optional<double> alpha;
  std::optional<double> eta;
  std::optional<double> mu;
  std::optional<double> bigd;
};

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline void validate_algorithm_field(const std::string& field, int line) {
  if (field.empty()) throw config_error(line, "algorithm: empty value");
  for (const std::string& id : split_list(field, ',')) {
    bool ok = false;
    for (const std::string& known : known_algorithm_ids()) ok = ok || id == known;
    if (!ok) throw config_error(line, "algorithm: unknown id '" + id + "'");
  }
}

inline void validate_config(const run_config& cfg) {
  if (cfg.n < 1) throw config_error(0, "n: must be >= 1");
  if (cfg.d < 1) throw config_error(0, "d: must be >= 1");
  if (cfg.problem.empty()) throw config_error(0, "problem: missing");
  {
    bool ok = false;
    for (const std::string& known : known_problem_ids()) ok = ok || cfg.problem == known;
    if (!ok) throw config_error(0, "problem: unknown id '" + cfg.problem + "'");
  }
  if (cfg.algorithm.empty()) throw config_error(0, "algorithm: missing");
  validate_algorithm_field(cfg.algorithm, 0);
  if (!(cfg.c > 0.0)) throw config_error(0, "c: must be > 0");
  if (!(cfg.fstar > 0.0)) throw config_error(0, "fstar: must be > 0");
  if (cfg.g < 0.0) throw config_error(0, "g: must be >= 0");
  if (cfg.sigma < 0.0) throw config_error(0, "sigma: must be >= 0");
  if (!(cfg.g + cfg.sigma > 0.0)) throw config_error(0, "g + sigma: must be > 0");
  if (!(cfg.epsilon > 0.0)) throw config_error(0, "epsilon: must be > 0");
  if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha < 1.0)) {
    throw config_error(0, "alpha: override must lie in (0, 1)");
  }
  if (cfg.eta && !(*cfg.eta > 0.0)) throw config_error(0, "eta: override must be > 0");
  if (cfg.mu && !(*cfg.mu >= 0.0)) throw config_error(0, "mu: override must be >= 0");
  if (cfg.bigd && !(*cfg.bigd > 0.0)) throw config_error(0, "bigd: override must be > 0");
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_real(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw config_error(line, key + ": not a real number: '" + v + "'");
  }
  if (pos != v.size()) throw config_error(line, key + ": trailing characters in '" + v + "'");
  return out;
}

inline std::int64_t parse_int(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw config_error(line, key + ": not an integer: '" + v + "'");
  }
  if (pos != v.size()) throw config_error(line, key + ": trailing characters in '" + v + "'");
  return out;
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw config_error(line, key + ": not a nonnegative integer: '" + v + "'");
  }
  if (pos != v.size()) throw config_error(line, key + ": trailing characters in '" + v + "'");
  return out;
}

}  // namespace detail

// Parses one key=value assignment into cfg.  Throws config_error on unknown
// keys or malformed values.
inline void apply_config_assignment(run_config& cfg, const std::string& key,
                                    const std::string& value, int line) {
  using detail::parse_int;
  using detail::parse_real;
  using detail::parse_u64;
  if (key == "n") {
    cfg.n = parse_int(value, key, line);
  } else if (key == "d") {
    cfg.d = parse_int(value, key, line);
  } else if (key == "seed") {
    cfg.seed = parse_u64(value, key, line);
  } else if (key == "problem") {
    cfg.problem = value;
  } else if (key == "algorithm") {
    cfg.algorithm = value;
  } else if (key == "c") {
    cfg.c = parse_real(value, key, line);
  } else if (key == "fstar") {
    cfg.fstar = parse_real(value, key, line);
  } else if (key == "g") {
    cfg.g = parse_real(value, key, line);
  } else if (key == "sigma") {
    cfg.sigma = parse_real(value, key, line);
  } else if (key == "alpha") {
    cfg.alpha = parse_real(value, key, line);
  } else if (key == "eta") {
    cfg.eta = parse_real(value, key, line);
  } else if (key == "mu") {
    cfg.mu = parse_real(value, key, line);
  } else if (key == "bigd") {
    cfg.bigd = parse_real(value, key, line);
  } else {
    throw config_error(line, "unknown key '" + key + "'");
  }
}

inline run_config parse_config_text(const std::string& text) {
  run_config cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw config_error(line, "expected key=value, got '" + s + "'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw config_error(line, "empty key");
    apply_config_assignment(cfg, key, value, line);
  }
  validate_config(cfg);
  return cfg;
}

inline run_config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error(0, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace o2nc
