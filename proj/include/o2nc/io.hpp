#pragma once

// Serialization: trajectory/certificate CSVs, the JSON sidecar, the binary
// iterate dump, and the run-id hash.
//
// Determinism contract: every float printed to CSV uses "%.17g", which
// round-trips doubles exactly, so identical runs produce byte-identical
// files.  The sidecar embeds the canonical flat config text; re-running from
// the sidecar therefore rebuilds the exact same run.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "o2nc/config.hpp"
#include "o2nc/drivers.hpp"
#include "o2nc/schedule.hpp"
#include "o2nc/stationarity.hpp"
#include "o2nc/vec.hpp"

namespace o2nc {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// Canonical flat config text: fixed key order, exact float formatting.
inline std::string canonical_config_text(const run_config& cfg) {
  std::ostringstream out;
  out << "n = " << cfg.n << "\n";
  out << "d = " << cfg.d << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "problem = " << cfg.problem << "\n";
  out << "algorithm = " << cfg.algorithm << "\n";
  out << "c = " << format_real(cfg.c) << "\n";
  out << "fstar = " << format_real(cfg.fstar) << "\n";
  out << "g = " << format_real(cfg.g) << "\n";
  out << "sigma = " << format_real(cfg.sigma) << "\n";
  if (cfg.alpha) out << "alpha = " << format_real(*cfg.alpha) << "\n";
  if (cfg.eta) out << "eta = " << format_real(*cfg.eta) << "\n";
  if (cfg.mu) out << "mu = " << format_real(*cfg.mu) << "\n";
  if (cfg.bigd) out << "bigd = " << format_real(*cfg.bigd) << "\n";
  return out.str();
}

// FNV-1a 64-bit over the canonical config text (which includes the seed).
inline std::string run_id(const run_config& cfg) {
  const std::string text = canonical_config_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string trajectory_csv(const trajectory& traj) {
  std::ostringstream out;
  out << "t,s,delta_norm,grad_norm,x_norm,xbar_norm\n";
  for (std::int64_t t = 1; t <= traj.steps(); ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    out << t << ',' << format_real(traj.s[i]) << ',' << format_real(norm(traj.delta[i])) << ','
        << format_real(norm(traj.g[i])) << ',' << format_real(norm(traj.x[i])) << ','
        << format_real(norm(traj.xbar[i])) << "\n";
  }
  return out.str();
}

inline std::string certificate_csv(const std::vector<certificate>& certs) {
  std::ostringstream out;
  out << "n,mean_grad_norm,variance,c,total\n";
  for (const certificate& cert : certs) {
    out << cert.n << ',' << format_real(cert.mean_grad_norm) << ',' << format_real(cert.variance)
        << ',' << format_real(cert.c) << ',' << format_real(cert.total) << "\n";
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Binary iterate dump: 16-byte header (8-byte magic, u32 rows, u32 cols,
// little-endian), then rows*cols doubles, row-major, little-endian.
// Row 0 is x0; rows 1..N are the iterates.
// ---------------------------------------------------------------------------
inline constexpr char kVectorMagic[8] = {'O', '2', 'N', 'C', 'V', 'E', 'C', '1'};

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64_le(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

inline double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace detail

inline void write_iterates_binary(const std::string& path, const real_vector& x0,
                                  const std::vector<real_vector>& xs) {
  const std::uint32_t rows = static_cast<std::uint32_t>(xs.size() + 1);
  const std::uint32_t cols = static_cast<std::uint32_t>(x0.size());
  std::string out;
  out.reserve(16 + static_cast<std::size_t>(rows) * cols * 8);
  out.append(kVectorMagic, sizeof(kVectorMagic));
  detail::put_u32_le(out, rows);
  detail::put_u32_le(out, cols);
  for (double v : x0) detail::put_f64_le(out, v);
  for (const real_vector& x : xs) {
    if (x.size() != x0.size()) throw std::invalid_argument("write_iterates_binary: ragged rows");
    for (double v : x) detail::put_f64_le(out, v);
  }
  write_text_file(path, out);
}

// Returns rows as vectors; row 0 is x0.
inline std::vector<real_vector> read_iterates_binary(const std::string& path) {
  const std::string raw = read_text_file(path);
  if (raw.size() < 16 || std::memcmp(raw.data(), kVectorMagic, sizeof(kVectorMagic)) != 0) {
    throw std::runtime_error("bad iterate dump header: " + path);
  }
  const auto* base = reinterpret_cast<const unsigned char*>(raw.data());
  const std::uint32_t rows = detail::get_u32_le(base + 8);
  const std::uint32_t cols = detail::get_u32_le(base + 12);
  if (raw.size() != 16 + static_cast<std::size_t>(rows) * cols * 8) {
    throw std::runtime_error("iterate dump size mismatch: " + path);
  }
  std::vector<real_vector> out(rows, real_vector(cols));
  const unsigned char* p = base + 16;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      out[r][c] = detail::get_f64_le(p);
      p += 8;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON sidecar.
// ---------------------------------------------------------------------------
inline nlohmann::json config_to_json(const run_config& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["seed"] = cfg.seed;
  j["problem"] = cfg.problem;
  j["algorithm"] = cfg.algorithm;
  j["c"] = cfg.c;
  j["fstar"] = cfg.fstar;
  j["g"] = cfg.g;
  j["sigma"] = cfg.sigma;
  if (cfg.alpha) j["alpha"] = *cfg.alpha;
  if (cfg.eta) j["eta"] = *cfg.eta;
  if (cfg.mu) j["mu"] = *cfg.mu;
  if (cfg.bigd) j["bigd"] = *cfg.bigd;
  return j;
}

inline nlohmann::json schedule_to_json(const schedule_params& p) {
  nlohmann::json j;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["eta"] = p.eta;
  j["mu"] = p.mu;
  j["bigd"] = p.bigd;
  j["beta_eff"] = p.beta_eff;
  j["eta_eff"] = p.eta_eff;
  return j;
}

// Loads the exact config back from a sidecar (or accepts a flat config file).
inline run_config config_from_sidecar(const std::string& path) {
  const std::string text = read_text_file(path);
  if (!text.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos &&
      text[text.find_first_not_of(" \t\r\n")] == '{') {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("config_text")) {
      throw config_error(0, "sidecar missing config_text: " + path);
    }
    return parse_config_text(j.at("config_text").get<std::string>());
  }
  return parse_config_text(text);
}

}  // namespace o2nc
