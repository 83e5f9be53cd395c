#pragma once

// Experiment harness: the four CLI commands as library functions.
//
//   cmd_run      one driver from a config file -> out/<run-id>/{trajectory.csv,
//                certificate.csv, summary.json}
//   cmd_compare  two algorithms, paired substreams over K seeds -> table of
//                best/final train loss and certificate aggregates + loss curves
//   cmd_verify   named property suite -> per-check pass/fail report
//   cmd_certify  recompute certificates for an existing run directory
//
// Exit codes: 0 success, 1 usage/config, 2 numeric failure, 3 verification
// failure.  All artifacts are deterministic functions of the config file:
// re-running a command reproduces every CSV byte for byte (summaries carry no
// timestamps; wall-clock appears only in compare's printed table).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "o2nc/config.hpp"
#include "o2nc/drivers.hpp"
#include "o2nc/io.hpp"
#include "o2nc/omd.hpp"
#include "o2nc/problems.hpp"
#include "o2nc/schedule.hpp"
#include "o2nc/stationarity.hpp"
#include "o2nc/verify.hpp"
#include "o2nc/weights.hpp"

namespace o2nc {

struct harness_options {
  std::string config_path;
  std::string out_root;               // --out, else O2NC_OUT, else "out"
  int seeds = 5;                      // compare trials
  std::string suite = "all";          // verify suite name
  std::optional<double> c_override;   // certify --c (default: config c)
  std::string grid = "log";           // "log" or "full"
  std::string trajectory_path;        // certify input CSV
};

inline std::string resolve_out_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("O2NC_OUT"); env != nullptr && *env != '\0') return env;
  return "out";
}

namespace detail {

// A finished single-algorithm run; exactly one of the two record shapes is
// active depending on the algorithm id.
struct run_result {
  std::string algorithm;
  bool is_original = false;
  trajectory traj;
  original_o2nc_record rec;

  std::int64_t steps() const { return is_original ? rec.steps() : traj.steps(); }
};

inline run_result execute_algorithm(const std::string& alg, const problem& prob,
                                    const run_config& cfg, const schedule_params& sp,
                                    const random_stream& root, std::uint64_t trial) {
  trial_streams st = make_trial_streams(root, trial);
  run_result out;
  out.algorithm = alg;
  if (alg == "eo2nc") {
    composite_omd learner(omd_mode::rescaled, omd_schedule(sp), cfg.d);
    out.traj = run_exponentiated_o2nc(prob, learner, cfg, sp, st.noise, st.scaling);
  } else if (alg == "sgdm_rs") {
    out.traj = run_random_scaled_sgdm(prob, cfg, sp, st.noise, st.scaling);
  } else if (alg == "sgdm_std") {
    out.traj = run_standard_sgdm(prob, cfg, sp, st.noise);
  } else if (alg == "o2nc_orig") {
    const auto [k_epochs, t_window] = factor_horizon(cfg.n);
    out.is_original = true;
    out.rec = run_original_o2nc(prob, cfg, sp, k_epochs, t_window, st.noise, st.scaling);
  } else {
    throw config_error(0, "unknown algorithm id: " + alg);
  }
  return out;
}

// Same column layout as trajectory_csv, for the window-based baseline: the
// average column holds the mean of the probe points seen so far in the
// current window (equal to the window mean at window boundaries).
inline std::string original_csv(const original_o2nc_record& rec) {
  std::string out = "t,s,delta_norm,grad_norm,x_norm,xbar_norm\n";
  real_vector window_sum = zeros(rec.x0.size());
  std::int64_t in_window = 0;
  for (std::int64_t t = 1; t <= rec.steps(); ++t) {
    const std::size_t i = static_cast<std::size_t>(t - 1);
    axpy(1.0, rec.w[i], window_sum);
    ++in_window;
    const real_vector partial_mean = scaled(window_sum, 1.0 / static_cast<double>(in_window));
    out += std::to_string(t);
    out += ',';
    out += format_real(rec.s[i]);
    out += ',';
    out += format_real(norm(rec.delta[i]));
    out += ',';
    out += format_real(norm(rec.g[i]));
    out += ',';
    out += format_real(norm(rec.x[i]));
    out += ',';
    out += format_real(norm(partial_mean));
    out += '\n';
    if (t % rec.t_window == 0) {
      window_sum = zeros(rec.x0.size());
      in_window = 0;
    }
  }
  return out;
}

// Certificate of the uniform witness over window k's probe points (the
// object the unexponentiated baseline outputs).
inline certificate original_window_certificate(const original_o2nc_record& rec,
                                               const problem& prob, double c, std::int64_t k) {
  if (k < 1 || k > rec.k_epochs) {
    throw std::out_of_range("original_window_certificate: window out of range");
  }
  if (!(c > 0.0)) throw std::invalid_argument("original_window_certificate: c must be > 0");
  const std::int64_t lo = (k - 1) * rec.t_window + 1;
  const std::int64_t hi = k * rec.t_window;
  const double p = 1.0 / static_cast<double>(rec.t_window);
  real_vector mean_grad = zeros(rec.x0.size());
  const real_vector& wbar = rec.wbar[static_cast<std::size_t>(k - 1)];
  double variance = 0.0;
  for (std::int64_t t = lo; t <= hi; ++t) {
    const real_vector& w = rec.w[static_cast<std::size_t>(t - 1)];
    axpy(p, prob.gradient(w), mean_grad);
    const double dist = distance(w, wbar);
    variance += p * dist * dist;
  }
  certificate cert;
  cert.n = hi;
  cert.mean_grad_norm = norm(mean_grad);
  cert.variance = variance;
  cert.c = c;
  cert.total = cert.mean_grad_norm + c * variance;
  return cert;
}

inline std::vector<std::int64_t> make_grid(const std::string& grid, std::int64_t n) {
  if (grid == "full") return full_grid(n);
  if (grid == "log") return log_grid(n);
  throw config_error(0, "grid must be 'log' or 'full', got '" + grid + "'");
}

inline std::vector<certificate> run_certificates(const run_result& rr, const problem& prob,
                                                 double c, const std::string& grid) {
  std::vector<certificate> certs;
  if (rr.is_original) {
    for (std::int64_t k : make_grid(grid, rr.rec.k_epochs)) {
      certs.push_back(original_window_certificate(rr.rec, prob, c, k));
    }
  } else {
    for (std::int64_t n : make_grid(grid, rr.traj.steps())) {
      certs.push_back(certificate_value(rr.traj, prob, c, n));
    }
  }
  return certs;
}

struct loss_summary {
  double final_loss = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::optional<double> holdout_final;
};

inline loss_summary summarize_losses(const std::vector<real_vector>& xs, const problem& prob) {
  loss_summary s;
  for (const real_vector& x : xs) s.best_loss = std::min(s.best_loss, prob.value(x));
  s.final_loss = prob.value(xs.back());
  s.holdout_final = prob.holdout_value(xs.back());
  return s;
}

inline const certificate& min_certificate(const std::vector<certificate>& certs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < certs.size(); ++i) {
    if (certs[i].total < certs[best].total) best = i;
  }
  return certs[best];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------
inline int cmd_run(const harness_options& opts, std::ostream& out, std::ostream& err) {
  run_config cfg;
  try {
    cfg = parse_config_file(opts.config_path);
    if (split_list(cfg.algorithm).size() != 1) {
      throw config_error(0, "run needs a single algorithm id, got '" + cfg.algorithm + "'");
    }
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  schedule_params sp;
  std::unique_ptr<problem> prob;
  const random_stream root(cfg.seed);
  try {
    sp = derive_schedule(cfg);
    prob = make_problem(cfg, root);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  detail::run_result rr;
  try {
    rr = detail::execute_algorithm(cfg.algorithm, *prob, cfg, sp, root, 0);
  } catch (const numeric_error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  }

  std::vector<certificate> certs;
  try {
    certs = detail::run_certificates(rr, *prob, cfg.c, opts.grid);
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  const certificate& best_cert = detail::min_certificate(certs);
  const detail::loss_summary losses =
      detail::summarize_losses(rr.is_original ? rr.rec.x : rr.traj.x, *prob);

  // Output rule: a uniformly selected average iterate (window mean for the
  // baseline), drawn from the trial's dedicated selection substream.
  random_stream select = substream(root.split(1), stream_role::output_select);
  std::int64_t output_index = 0;
  double output_loss = 0.0;
  if (rr.is_original) {
    const real_vector& chosen = select_output(rr.rec, select);
    output_index = static_cast<std::int64_t>(&chosen - rr.rec.wbar.data()) + 1;
    output_loss = prob->value(chosen);
  } else {
    const real_vector& chosen = select_output(rr.traj, select);
    output_index = static_cast<std::int64_t>(&chosen - rr.traj.xbar.data()) + 1;
    output_loss = prob->value(chosen);
  }

  nlohmann::json summary;
  summary["tool_version"] = kToolVersion;
  summary["run_id"] = run_id(cfg);
  summary["algorithm"] = cfg.algorithm;
  summary["config_text"] = canonical_config_text(cfg);
  summary["config"] = config_to_json(cfg);
  summary["schedule"] = schedule_to_json(sp);
  nlohmann::json metrics;
  metrics["steps"] = rr.steps();
  metrics["grid"] = opts.grid;
  metrics["final_loss"] = losses.final_loss;
  metrics["best_loss"] = losses.best_loss;
  if (losses.holdout_final) metrics["holdout_final"] = *losses.holdout_final;
  metrics["final_certificate_total"] = certs.back().total;
  metrics["best_certificate_total"] = best_cert.total;
  metrics["best_certificate_n"] = best_cert.n;
  metrics["output_index"] = output_index;
  metrics["output_loss"] = output_loss;
  if (rr.is_original) {
    metrics["k_epochs"] = rr.rec.k_epochs;
    metrics["t_window"] = rr.rec.t_window;
  }
  summary["metrics"] = metrics;

  const std::filesystem::path dir =
      std::filesystem::path(resolve_out_root(opts.out_root)) / run_id(cfg);
  std::filesystem::create_directories(dir);
  write_text_file((dir / "trajectory.csv").string(),
                  rr.is_original ? detail::original_csv(rr.rec) : trajectory_csv(rr.traj));
  write_text_file((dir / "certificate.csv").string(), certificate_csv(certs));
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

  out << "run " << run_id(cfg) << ": " << cfg.algorithm << " on " << cfg.problem
      << ", N=" << cfg.n << ", d=" << cfg.d << ", seed=" << cfg.seed << "\n";
  out << "  final loss " << format_real(losses.final_loss) << ", best loss "
      << format_real(losses.best_loss) << "\n";
  out << "  best certificate total " << format_real(best_cert.total) << " at n=" << best_cert.n
      << " (c=" << format_real(cfg.c) << ")\n";
  out << "  wrote " << (dir / "trajectory.csv").string() << "\n";
  out << "  wrote " << (dir / "certificate.csv").string() << "\n";
  out << "  wrote " << (dir / "summary.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------
struct seed_summary {
  std::uint64_t trial = 0;
  double final_loss = 0.0;
  double best_loss = 0.0;
  double final_certificate_total = 0.0;
  double best_certificate_total = 0.0;
  double wall_seconds = 0.0;
};

struct algorithm_summary {
  std::string algorithm;
  std::vector<seed_summary> per_seed;
  double best_loss_mean = 0.0, best_loss_std = 0.0;
  double final_loss_mean = 0.0, final_loss_std = 0.0;
  double best_cert_mean = 0.0, best_cert_std = 0.0;
};

namespace detail {

// Sample mean / std (k-1 denominator; zero for a single seed), accumulated
// in ascending trial order so aggregates are exactly recomputable from rows.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return {mean, std::sqrt(acc / static_cast<double>(v.size() - 1))};
}

inline void aggregate(algorithm_summary& a) {
  std::vector<double> best, fin, cert;
  for (const seed_summary& s : a.per_seed) {
    best.push_back(s.best_loss);
    fin.push_back(s.final_loss);
    cert.push_back(s.best_certificate_total);
  }
  std::tie(a.best_loss_mean, a.best_loss_std) = mean_std(best);
  std::tie(a.final_loss_mean, a.final_loss_std) = mean_std(fin);
  std::tie(a.best_cert_mean, a.best_cert_std) = mean_std(cert);
}

// Per-step loss curve: the Figure-1-shaped artifact external plotters read.
inline std::string loss_curve_csv(const std::vector<real_vector>& xs, const problem& prob) {
  const bool has_holdout = prob.holdout_value(xs[0]).has_value();
  std::string out = has_holdout ? "t,train_loss,holdout_loss\n" : "t,train_loss\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_real(prob.value(xs[i]));
    if (has_holdout) {
      out += ',';
      out += format_real(*prob.holdout_value(xs[i]));
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

// Runs both algorithm ids over `seeds` paired trials.  Trial k of both
// algorithms shares noise/scaling substreams, so for sgdm_rs vs sgdm_std the
// scaling draw is the only difference in inputs.
inline int cmd_compare(const harness_options& opts, std::ostream& out, std::ostream& err) {
  run_config cfg;
  std::vector<std::string> algs;
  try {
    cfg = parse_config_file(opts.config_path);
    algs = split_list(cfg.algorithm);
    if (algs.size() != 2) {
      throw config_error(0, "compare needs algorithm=<id>,<id>, got '" + cfg.algorithm + "'");
    }
    if (opts.seeds < 1) throw config_error(0, "--seeds must be >= 1");
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  schedule_params sp;
  std::unique_ptr<problem> prob;
  const random_stream root(cfg.seed);
  try {
    sp = derive_schedule(cfg);
    prob = make_problem(cfg, root);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  struct trial_output {
    seed_summary rows[2];
    std::string curves[2];
  };
  // Fan out one worker per trial; each worker owns its substreams and runs
  // both algorithms so pairing stays within the worker.
  std::vector<std::future<trial_output>> futures;
  futures.reserve(static_cast<std::size_t>(opts.seeds));
  for (int k = 0; k < opts.seeds; ++k) {
    futures.push_back(std::async(std::launch::async, [&, k]() {
      trial_output to;
      for (int a = 0; a < 2; ++a) {
        const auto t0 = std::chrono::steady_clock::now();
        const detail::run_result rr = detail::execute_algorithm(
            algs[static_cast<std::size_t>(a)], *prob, cfg, sp, root,
            static_cast<std::uint64_t>(k));
        const std::vector<real_vector>& xs = rr.is_original ? rr.rec.x : rr.traj.x;
        const detail::loss_summary losses = detail::summarize_losses(xs, *prob);
        const std::vector<certificate> certs =
            detail::run_certificates(rr, *prob, cfg.c, "log");
        seed_summary row;
        row.trial = static_cast<std::uint64_t>(k);
        row.final_loss = losses.final_loss;
        row.best_loss = losses.best_loss;
        row.final_certificate_total = certs.back().total;
        row.best_certificate_total = detail::min_certificate(certs).total;
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        to.rows[a] = row;
        to.curves[a] = detail::loss_curve_csv(rr.is_original ? rr.rec.w : rr.traj.x, *prob);
      }
      return to;
    }));
  }

  algorithm_summary summaries[2];
  summaries[0].algorithm = algs[0];
  summaries[1].algorithm = algs[1];
  std::vector<trial_output> outputs;
  outputs.reserve(futures.size());
  try {
    for (auto& f : futures) outputs.push_back(f.get());  // ascending trial order
  } catch (const numeric_error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  }
  for (const trial_output& to : outputs) {
    summaries[0].per_seed.push_back(to.rows[0]);
    summaries[1].per_seed.push_back(to.rows[1]);
  }
  detail::aggregate(summaries[0]);
  detail::aggregate(summaries[1]);

  const std::filesystem::path dir =
      std::filesystem::path(resolve_out_root(opts.out_root)) / run_id(cfg);
  std::filesystem::create_directories(dir);
  nlohmann::json report;
  report["tool_version"] = kToolVersion;
  report["run_id"] = run_id(cfg);
  report["config_text"] = canonical_config_text(cfg);
  report["config"] = config_to_json(cfg);
  report["schedule"] = schedule_to_json(sp);
  report["seeds"] = opts.seeds;
  for (const algorithm_summary& a : summaries) {
    nlohmann::json ja;
    ja["algorithm"] = a.algorithm;
    ja["best_loss"] = {{"mean", a.best_loss_mean}, {"std", a.best_loss_std}};
    ja["final_loss"] = {{"mean", a.final_loss_mean}, {"std", a.final_loss_std}};
    ja["best_certificate_total"] = {{"mean", a.best_cert_mean}, {"std", a.best_cert_std}};
    for (const seed_summary& s : a.per_seed) {
      ja["per_seed"].push_back({{"trial", s.trial},
                                {"final_loss", s.final_loss},
                                {"best_loss", s.best_loss},
                                {"final_certificate_total", s.final_certificate_total},
                                {"best_certificate_total", s.best_certificate_total}});
    }
    report["algorithms"].push_back(ja);
  }
  write_text_file((dir / "compare.json").string(), report.dump(2) + "\n");
  for (int a = 0; a < 2; ++a) {
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      const std::string name =
          "curve_" + algs[static_cast<std::size_t>(a)] + "_trial" + std::to_string(k) + ".csv";
      write_text_file((dir / name).string(), outputs[k].curves[a]);
    }
  }

  out << "compare on " << cfg.problem << ", N=" << cfg.n << ", d=" << cfg.d << ", "
      << opts.seeds << " paired seed(s), base seed " << cfg.seed << "\n";
  out << "  " << std::left << std::setw(12) << "algorithm" << std::right << std::setw(16)
      << "best_loss_mean" << std::setw(15) << "best_loss_std" << std::setw(17)
      << "final_loss_mean" << std::setw(16) << "final_loss_std" << std::setw(15)
      << "cert_min_mean" << std::setw(13) << "wall_s_sum" << "\n";
  for (const algorithm_summary& a : summaries) {
    double wall = 0.0;
    for (const seed_summary& s : a.per_seed) wall += s.wall_seconds;
    std::ostringstream line;
    line.precision(6);
    line << "  " << std::left << std::setw(12) << a.algorithm << std::right << std::setw(16)
         << a.best_loss_mean << std::setw(15) << a.best_loss_std << std::setw(17)
         << a.final_loss_mean << std::setw(16) << a.final_loss_std << std::setw(15)
         << a.best_cert_mean << std::setw(13) << wall;
    out << line.str() << "\n";
  }
  out << "  wrote " << (dir / "compare.json").string() << " and " << 2 * outputs.size()
      << " loss-curve CSVs\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------
inline int cmd_verify(const harness_options& opts, std::ostream& out, std::ostream& err) {
  const std::vector<std::string>& names = known_suites();
  if (std::find(names.begin(), names.end(), opts.suite) == names.end()) {
    err << "unknown verify suite '" << opts.suite << "'; expected one of:";
    for (const std::string& n : names) err << " " << n;
    err << "\n";
    return 1;
  }
  std::vector<suite_report> reports;
  if (opts.suite == "all") {
    reports = run_all_suites();
  } else {
    reports.push_back(run_verify_suite(opts.suite));
  }
  bool all_pass = true;
  int checks = 0;
  for (const suite_report& rep : reports) {
    out << "suite " << rep.suite << "\n";
    for (const check_result& c : rep.checks) {
      ++checks;
      out << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name;
      std::ostringstream margin;
      margin.precision(6);
      margin << c.margin;
      out << " (margin " << margin.str() << ")";
      if (!c.detail.empty()) out << " — " << c.detail;
      out << "\n";
      all_pass = all_pass && c.passed;
    }
  }
  out << (all_pass ? "OK" : "FAILED") << ": " << checks << " check(s) across "
      << reports.size() << " suite(s)\n";
  return all_pass ? 0 : 3;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------
// Recomputes certificates for a finished run.  The input is the trajectory
// CSV written by cmd_run; the sibling summary.json supplies the exact config,
// the run is replayed deterministically, and the replay must reproduce the
// CSV byte for byte before any certificate is reported (else the trajectory
// and problem do not match).
inline int cmd_certify(const harness_options& opts, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  const fs::path csv_path(opts.trajectory_path);
  run_config cfg;
  std::string on_disk;
  try {
    on_disk = read_text_file(csv_path.string());
    cfg = config_from_sidecar((csv_path.parent_path() / "summary.json").string());
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  schedule_params sp;
  std::unique_ptr<problem> prob;
  const random_stream root(cfg.seed);
  detail::run_result rr;
  try {
    sp = derive_schedule(cfg);
    prob = make_problem(cfg, root);
    rr = detail::execute_algorithm(cfg.algorithm, *prob, cfg, sp, root, 0);
  } catch (const numeric_error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  const std::string replayed =
      rr.is_original ? detail::original_csv(rr.rec) : trajectory_csv(rr.traj);
  if (replayed != on_disk) {
    err << "trajectory/problem mismatch: replay of " << run_id(cfg)
        << " does not reproduce " << csv_path.string() << "\n";
    return 1;
  }

  const double c = opts.c_override.value_or(cfg.c);
  std::vector<certificate> certs;
  try {
    certs = detail::run_certificates(rr, *prob, c, opts.grid);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  const certificate& best = detail::min_certificate(certs);

  const fs::path out_path = csv_path.parent_path() / "certify.csv";
  write_text_file(out_path.string(), certificate_csv(certs));
  out << "certified " << certs.size() << " index(es) on grid '" << opts.grid
      << "' at c=" << format_real(c) << "\n";
  out << "  minimum total " << format_real(best.total) << " at n=" << best.n << "\n";
  out << "  wrote " << out_path.string() << "\n";
  return 0;
}

}  // namespace o2nc
