// Command-line front end: curve sweeps, single solves, Monte Carlo
// simulation of the realization cascade, verification, and the closed-form
// binary evaluator. Exit codes: 0 success, 1 usage/parse, 2 convergence,
// 3 verification failure.

#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crdp/binary_analytic.hpp"
#include "crdp/brute_force.hpp"
#include "crdp/causality.hpp"
#include "crdp/model_io.hpp"
#include "crdp/prob.hpp"
#include "crdp/realization.hpp"
#include "crdp/solver.hpp"
#include "crdp/version.hpp"

namespace {

using crdp::format_sig;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kConvergence = 2;
constexpr int kVerification = 3;
constexpr int kMaxHorizon = 8;

struct CommonArgs {
  std::string model;
  std::string distortion_file;
  std::string mode = "stationary";
  int horizon = -1;
  double tol = 1e-11;
  int max_iter = 5000;
  double damping = 0.0;
};

void add_model_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--model", a.model,
                  "model file with [source] (and [distortion] unless given separately)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--distortion-file", a.distortion_file,
                  "separate file providing the [distortion] section")
      ->check(CLI::ExistingFile);
}

void add_solver_options(CLI::App* cmd, CommonArgs& a, bool with_mode) {
  if (with_mode) {
    cmd->add_option("--mode", a.mode, "solver mode")
        ->check(CLI::IsMember({"stationary", "exact"}))
        ->capture_default_str();
    cmd->add_option("--horizon", a.horizon, "stages 0..n (exact mode only)");
  }
  cmd->add_option("--tol", a.tol, "fixed-point tolerance (sup norm)")->capture_default_str();
  cmd->add_option("--max-iter", a.max_iter, "iteration cap per solve")->capture_default_str();
  cmd->add_option("--damping", a.damping, "marginal mixing factor in [0,1)")
      ->capture_default_str();
}

crdp::ModelFile load_inputs(const CommonArgs& a) {
  const crdp::ConfigFile model_cfg = crdp::parse_config(a.model);
  crdp::MarkovSource source = crdp::load_markov_source(model_cfg);
  const int x_size = source.alphabet.size;
  if (!a.distortion_file.empty()) {
    const crdp::ConfigFile dist_cfg = crdp::parse_config(a.distortion_file);
    return {std::move(source), crdp::load_distortion_spec(dist_cfg, x_size)};
  }
  return {std::move(source), crdp::load_distortion_spec(model_cfg, x_size)};
}

bool make_config(const CommonArgs& a, crdp::SolverConfig& cfg) {
  cfg.mode = a.mode == "exact" ? crdp::HorizonMode::exact : crdp::HorizonMode::stationary;
  cfg.horizon = a.horizon;
  cfg.tol = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.damping = a.damping;
  if (cfg.mode == crdp::HorizonMode::exact &&
      (a.horizon < 0 || a.horizon > kMaxHorizon)) {
    std::cerr << "crdp: exact mode needs --horizon between 0 and " << kMaxHorizon << "\n";
    return false;
  }
  return true;
}

void diag(const crdp::RdPoint& p) {
  std::cerr << "solve: s=" << format_sig(p.s) << " D=" << format_sig(p.distortion)
            << " R=" << format_sig(p.rate) << " iterations=" << p.iterations
            << " converged=" << (p.converged ? 1 : 0)
            << " residual=" << format_sig(p.residual) << "\n";
}

json manifest_base(const char* command, const CommonArgs& a) {
  json j;
  j["tool"] = "crdp";
  j["version"] = crdp::version_string;
  j["command"] = command;
  j["inputs"]["model"] = a.model;
  if (!a.distortion_file.empty()) j["inputs"]["distortion_file"] = a.distortion_file;
  return j;
}

bool write_manifest(const std::string& path, json j, Clock::time_point t0) {
  // Duration is informational only; it is the one field exempt from the
  // byte-reproducibility guarantee.
  j["duration_seconds"] =
      std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - t0).count();
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    std::cerr << "crdp: cannot write " << path << "\n";
    return false;
  }
  os << j.dump(2) << "\n";
  return true;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

// "a:b:n" -> n points linearly spaced from a to b inclusive.
bool parse_grid_spec(const std::string& spec, std::vector<double>& out) {
  const std::size_t c1 = spec.find(':');
  const std::size_t c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) return false;
  double a = 0.0, b = 0.0;
  long long n = 0;
  const std::string_view ns(spec.data() + c2 + 1, spec.size() - c2 - 1);
  const auto res = std::from_chars(ns.data(), ns.data() + ns.size(), n);
  if (!parse_double(std::string_view(spec).substr(0, c1), a) ||
      !parse_double(std::string_view(spec).substr(c1 + 1, c2 - c1 - 1), b) ||
      res.ec != std::errc{} || res.ptr != ns.data() + ns.size() || n < 0)
    return false;
  out.clear();
  for (long long i = 0; i < n; ++i)
    out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
  return true;
}

bool parse_list_spec(const std::string& spec, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string::npos) end = spec.size();
    std::string_view piece(spec.data() + start, end - start);
    while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front())))
      piece.remove_prefix(1);
    while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back())))
      piece.remove_suffix(1);
    if (!piece.empty()) {
      double v = 0.0;
      if (!parse_double(piece, v)) return false;
      out.push_back(v);
    }
    start = end + 1;
  }
  return true;
}

void solve_targets(const crdp::MarkovSource& source, const crdp::DistortionSpec& dist,
                   const crdp::SolverConfig& base, const std::vector<double>& targets,
                   int threads, std::vector<crdp::RdPoint>& out) {
  out.assign(targets.size(), {});
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(targets.size())));
  if (t == 1) {
    for (std::size_t i = 0; i < targets.size(); ++i)
      out[i] = crdp::solve_for_target_distortion(source, dist, base, targets[i]).point;
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(t));
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k)
    pool.emplace_back([&, k]() {
      try {
        for (std::size_t i = static_cast<std::size_t>(k); i < targets.size();
             i += static_cast<std::size_t>(t))
          out[i] = crdp::solve_for_target_distortion(source, dist, base, targets[i]).point;
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct CurveArgs {
  CommonArgs common;
  std::string s_grid, s_list, d_grid, d_list;
  std::string out;
  int threads = 1;
};

int run_curve(const CurveArgs& c) {
  const auto t0 = Clock::now();
  crdp::SolverConfig base;
  if (!make_config(c.common, base)) return kUsage;

  std::vector<double> values;
  bool slope_grid = true;
  std::string grid_desc;
  bool ok = true;
  if (!c.s_grid.empty()) {
    ok = parse_grid_spec(c.s_grid, values);
    grid_desc = "--s-grid " + c.s_grid;
  } else if (!c.s_list.empty()) {
    ok = parse_list_spec(c.s_list, values);
    grid_desc = "--s-list " + c.s_list;
  } else if (!c.d_grid.empty()) {
    ok = parse_grid_spec(c.d_grid, values);
    slope_grid = false;
    grid_desc = "--d-grid " + c.d_grid;
  } else {
    ok = parse_list_spec(c.d_list, values);
    slope_grid = false;
    grid_desc = "--d-list " + c.d_list;
  }
  if (!ok) {
    std::cerr << "crdp: cannot parse grid (" << grid_desc << ")\n";
    return kUsage;
  }
  if (values.empty()) {
    std::cerr << "crdp: empty grid\n";
    return kUsage;
  }
  for (double v : values) {
    if (slope_grid && v > 0.0) {
      std::cerr << "crdp: slopes must be nonpositive\n";
      return kUsage;
    }
    if (!slope_grid && v < 0.0) {
      std::cerr << "crdp: distortion targets must be nonnegative\n";
      return kUsage;
    }
  }
  if (c.threads < 1) {
    std::cerr << "crdp: --threads must be at least 1\n";
    return kUsage;
  }

  const crdp::ModelFile mf = load_inputs(c.common);
  std::vector<crdp::RdPoint> points;
  if (slope_grid) {
    points = crdp::sweep_curve(mf.source, mf.distortion, base, values, c.threads);
  } else {
    solve_targets(mf.source, mf.distortion, base, values, c.threads, points);
  }
  for (const crdp::RdPoint& p : points) diag(p);

  std::ofstream os(c.out, std::ios::binary);
  if (!os) {
    std::cerr << "crdp: cannot write " << c.out << "\n";
    return kUsage;
  }
  crdp::write_curve_csv(os, points);
  os.close();

  json j = manifest_base("curve", c.common);
  j["options"]["grid"] = grid_desc;
  j["options"]["mode"] = c.common.mode;
  j["options"]["horizon"] = c.common.horizon;
  j["options"]["tol"] = c.common.tol;
  j["options"]["max_iter"] = c.common.max_iter;
  j["options"]["damping"] = c.common.damping;
  j["options"]["threads"] = c.threads;
  j["outputs"] = json::array({c.out});
  if (!write_manifest(c.out + ".manifest.json", std::move(j), t0)) return kUsage;

  long long bad = 0;
  for (const crdp::RdPoint& p : points)
    if (!p.converged) ++bad;
  if (bad > 0) {
    std::cerr << "crdp: " << bad << " of " << points.size()
              << " points did not converge\n";
    return kConvergence;
  }
  return kOk;
}

struct SolveArgs {
  CommonArgs common;
  double d_target = -1.0;
  double slope = 1.0;
  bool use_target = false;
  std::string dump_kernel;
};

int run_solve(const SolveArgs& s) {
  const auto t0 = Clock::now();
  crdp::SolverConfig base;
  if (!make_config(s.common, base)) return kUsage;
  const crdp::ModelFile mf = load_inputs(s.common);

  crdp::SolveResult res;
  bool above_edge = false;
  if (s.use_target) {
    if (s.d_target < 0.0) {
      std::cerr << "crdp: --distortion must be nonnegative\n";
      return kUsage;
    }
    above_edge = s.d_target >= crdp::d_max(mf.source, mf.distortion) - 1e-15;
    res = crdp::solve_for_target_distortion(mf.source, mf.distortion, base, s.d_target);
  } else {
    if (s.slope > 0.0) {
      std::cerr << "crdp: --slope must be nonpositive\n";
      return kUsage;
    }
    base.slope = s.slope;
    res = crdp::solve_fixed_point(mf.source, mf.distortion, base);
  }
  diag(res.point);

  std::cout << "s=" << format_sig(res.point.s) << "\n"
            << "D=" << format_sig(res.point.distortion) << "\n"
            << "R=" << format_sig(res.point.rate) << "\n"
            << "iterations=" << res.point.iterations << "\n"
            << "converged=" << (res.point.converged ? 1 : 0) << "\n";
  if (above_edge) std::cout << "note=above D_max\n";

  json j = manifest_base("solve", s.common);
  j["options"]["mode"] = s.common.mode;
  j["options"]["horizon"] = s.common.horizon;
  j["options"]["tol"] = s.common.tol;
  j["options"]["max_iter"] = s.common.max_iter;
  j["options"]["damping"] = s.common.damping;
  if (s.use_target)
    j["options"]["distortion"] = s.d_target;
  else
    j["options"]["slope"] = s.slope;
  j["outputs"] = json::array();

  if (!s.dump_kernel.empty()) {
    std::ofstream os(s.dump_kernel, std::ios::binary);
    if (!os) {
      std::cerr << "crdp: cannot write " << s.dump_kernel << "\n";
      return kUsage;
    }
    os << "stage,row,y,p\n";
    for (std::size_t i = 0; i < res.policy.stage.size(); ++i) {
      const crdp::StochasticKernel& k = res.policy.stage[i];
      for (long long r = 0; r < k.rows(); ++r)
        for (int y = 0; y < k.cols(); ++y)
          os << i << ',' << r << ',' << y << ',' << format_sig(k(r, y)) << "\n";
    }
    j["outputs"].push_back(s.dump_kernel);
  }
  const std::string manifest_path =
      s.dump_kernel.empty() ? "crdp-solve-manifest.json" : s.dump_kernel + ".manifest.json";
  if (!write_manifest(manifest_path, std::move(j), t0)) return kUsage;
  return res.point.converged ? kOk : kConvergence;
}

struct SimArgs {
  CommonArgs common;
  double d_target = -1.0;
  double slope = 1.0;
  bool use_target = false;
  long long steps = 100000;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

int run_simulate(const SimArgs& s) {
  const auto t0 = Clock::now();
  crdp::SolverConfig base;  // simulation realizes the per-letter solution
  base.tol = s.common.tol;
  base.max_iter = s.common.max_iter;
  base.damping = s.common.damping;
  const crdp::ModelFile mf = load_inputs(s.common);

  crdp::SolveResult res;
  if (s.use_target) {
    if (s.d_target < 0.0) {
      std::cerr << "crdp: --distortion must be nonnegative\n";
      return kUsage;
    }
    res = crdp::solve_for_target_distortion(mf.source, mf.distortion, base, s.d_target);
  } else {
    if (s.slope > 0.0) {
      std::cerr << "crdp: --slope must be nonpositive\n";
      return kUsage;
    }
    base.slope = s.slope;
    res = crdp::solve_fixed_point(mf.source, mf.distortion, base);
  }
  diag(res.point);
  if (!res.point.converged) {
    std::cerr << "crdp: solver did not converge; not simulating\n";
    return kConvergence;
  }
  if (s.steps < 1) {
    std::cerr << "crdp: --steps must be at least 1\n";
    return kUsage;
  }

  const crdp::RealizationSpec realization = crdp::identity_realization(res.policy);
  const crdp::Trace trace =
      crdp::simulate(mf.source, mf.distortion, realization, s.steps, s.seed);
  const crdp::EmpiricalStats stats =
      crdp::empirical_stats(trace, mf.distortion.y_size());

  const std::string trace_path = s.out_prefix + ".trace.csv";
  const std::string stats_path = s.out_prefix + ".stats.txt";
  {
    std::ofstream os(trace_path, std::ios::binary);
    if (!os) {
      std::cerr << "crdp: cannot write " << trace_path << "\n";
      return kUsage;
    }
    crdp::write_trace_csv(os, trace);
  }
  {
    std::ofstream os(stats_path, std::ios::binary);
    if (!os) {
      std::cerr << "crdp: cannot write " << stats_path << "\n";
      return kUsage;
    }
    crdp::write_stats(os, stats, trace.rng_name, trace.seed);
  }

  const double diff = std::abs(stats.mean_distortion - res.point.distortion);
  const double sigmas = stats.std_err > 0.0
                            ? diff / stats.std_err
                            : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  std::cout << "target_distortion=" << format_sig(res.point.distortion) << "\n"
            << "empirical_distortion=" << format_sig(stats.mean_distortion) << "\n"
            << "std_err=" << format_sig(stats.std_err) << "\n"
            << "deviation_sigmas=" << format_sig(sigmas) << "\n";

  json j = manifest_base("simulate", s.common);
  if (s.use_target)
    j["options"]["distortion"] = s.d_target;
  else
    j["options"]["slope"] = s.slope;
  j["options"]["steps"] = s.steps;
  j["options"]["seed"] = s.seed;
  j["options"]["rng"] = trace.rng_name;
  j["options"]["tol"] = s.common.tol;
  j["options"]["max_iter"] = s.common.max_iter;
  j["options"]["damping"] = s.common.damping;
  j["outputs"] = json::array({trace_path, stats_path});
  if (!write_manifest(s.out_prefix + ".manifest.json", std::move(j), t0)) return kUsage;
  return kOk;
}

struct VerifyArgs {
  CommonArgs common;
  int horizon = 2;
  double d_target = -1.0;
  bool have_target = false;
  bool inject_anticausal = false;
};

crdp::JointTable anticausal_joint(const crdp::MarkovSource& source) {
  // Horizon-1 fixture: both reconstructions copy x_1, which no causal
  // system can do at stage 0.
  const int X = source.alphabet.size;
  crdp::JointTable j({X * X, X * X});
  for (int x0 = 0; x0 < X; ++x0)
    for (int x1 = 0; x1 < X; ++x1) {
      const double p = source.initial[x0] * source.transition(x0, x1);
      const int idx[2] = {x0 * X + x1, x1 * X + x1};
      j.at(idx) += p;
    }
  j.validate();
  return j;
}

int run_verify(const VerifyArgs& v) {
  const auto t0 = Clock::now();
  if (v.horizon < 0 || v.horizon > kMaxHorizon) {
    std::cerr << "crdp: verification horizon capacity is " << kMaxHorizon << "\n";
    return kUsage;
  }
  const crdp::ModelFile mf = load_inputs(v.common);
  const double edge = crdp::d_max(mf.source, mf.distortion);
  const double target = v.have_target ? v.d_target : edge / 2.0;

  crdp::SolverConfig base;
  base.tol = v.common.tol;
  base.max_iter = v.common.max_iter;
  base.damping = v.common.damping;
  crdp::SolverConfig exact = base;
  exact.mode = crdp::HorizonMode::exact;
  exact.horizon = v.horizon;

  const crdp::SolveResult res =
      crdp::solve_for_target_distortion(mf.source, mf.distortion, exact, target);
  diag(res.point);

  enum Status { kPass, kFail, kSkip };
  struct Row {
    std::string name;
    Status status;
    std::string detail;
  };
  std::vector<Row> rows;

  {
    if (v.inject_anticausal) {
      const crdp::CausalityReport rep =
          crdp::check_causality(anticausal_joint(mf.source), mf.source.alphabet.size,
                                mf.source.alphabet.size);
      rows.push_back({"causality", rep.causal ? kPass : kFail,
                      "max CMI " + format_sig(rep.max_cmi_bits) + " bits (injected fixture)"});
    } else {
      const crdp::CausalityReport rep = crdp::check_causality(mf.source, res.policy);
      rows.push_back({"causality", rep.causal ? kPass : kFail,
                      "max CMI " + format_sig(rep.max_cmi_bits) + " bits"});
    }
  }

  rows.push_back({"fixed_point", res.point.converged ? kPass : kFail,
                  "residual " + format_sig(res.point.residual) + ", iterations " +
                      std::to_string(res.point.iterations)});

  {
    const crdp::EvalResult ev =
        crdp::evaluate_policy(mf.source, mf.distortion, res.policy, res.point.s);
    const double gap = std::abs(ev.rate - ev.rate_closed_form);
    rows.push_back({"closed_form_rate", gap < 1e-8 ? kPass : kFail,
                    "|MI - closed form| = " + format_sig(gap) + " bits"});
  }

  if (v.horizon <= 2 && mf.source.alphabet.size == 2 && mf.distortion.y_size() == 2) {
    crdp::BruteForceSettings settings;
    settings.horizon = v.horizon;
    settings.d_target = target;
    const crdp::BruteForceResult bf =
        crdp::brute_force_rdf(mf.source, mf.distortion, settings);
    const double gap = std::abs(bf.rate - res.point.rate);
    rows.push_back({"oracle", bf.feasible && gap <= 1e-3 ? kPass : kFail,
                    "|solver - search| = " + format_sig(gap) + " bits"});
  } else {
    rows.push_back({"oracle", kSkip, "binary sources with horizon <= 2 only"});
  }

  if (mf.distortion.y_window() == 0) {
    const crdp::SolveResult st =
        crdp::solve_for_target_distortion(mf.source, mf.distortion, base, target);
    diag(st.point);
    const crdp::RealizationSpec ident = crdp::identity_realization(st.policy);
    const crdp::RealizationReport rep =
        crdp::verify_realization(mf.source, st.policy, ident, v.horizon);
    rows.push_back({"realization", rep.max_tv == 0.0 ? kPass : kFail,
                    "max TV " + format_sig(rep.max_tv)});
  } else {
    rows.push_back({"realization", kSkip, "needs a reconstruction-memoryless distortion"});
  }

  bool failed = false;
  json checks = json::array();
  for (const Row& r : rows) {
    const char* tag = r.status == kPass ? "PASS" : r.status == kFail ? "FAIL" : "SKIP";
    std::cout << r.name << ": " << tag << " (" << r.detail << ")\n";
    checks.push_back({{"name", r.name}, {"status", tag}, {"detail", r.detail}});
    if (r.status == kFail) failed = true;
  }
  if (failed) {
    std::cerr << "crdp: verification failures:";
    for (const Row& r : rows)
      if (r.status == kFail) std::cerr << " " << r.name;
    std::cerr << "\n";
  }

  json j = manifest_base("verify", v.common);
  j["options"]["horizon"] = v.horizon;
  j["options"]["distortion"] = target;
  j["options"]["inject_anticausal"] = v.inject_anticausal;
  j["options"]["tol"] = v.common.tol;
  j["options"]["max_iter"] = v.common.max_iter;
  j["checks"] = checks;
  j["outputs"] = json::array();
  if (!write_manifest("crdp-verify-manifest.json", std::move(j), t0)) return kUsage;
  return failed ? kVerification : kOk;
}

struct AnalyticArgs {
  double p = 0.0, q = 0.0, d = 0.0;
};

int run_analytic(const AnalyticArgs& a) {
  const auto t0 = Clock::now();
  const crdp::BinaryExampleParams params{a.p, a.q};
  const crdp::AnalyticKernel k = crdp::analytic_kernel(params, a.d);
  std::cout << "alpha=" << format_sig(k.alpha) << "\n"
            << "beta=" << format_sig(k.beta) << "\n"
            << "gamma=" << format_sig(k.gamma) << "\n"
            << "d_max=" << format_sig(crdp::analytic_dmax(params)) << "\n"
            << "rate=" << format_sig(crdp::analytic_rdf(params, a.d)) << "\n"
            << "within_validity=" << (k.within_validity ? 1 : 0) << "\n";

  json j;
  j["tool"] = "crdp";
  j["version"] = crdp::version_string;
  j["command"] = "analytic";
  j["options"]["p"] = a.p;
  j["options"]["q"] = a.q;
  j["options"]["distortion"] = a.d;
  j["outputs"] = json::array();
  if (!write_manifest("crdp-analytic-manifest.json", std::move(j), t0)) return kUsage;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal rate-distortion solver for finite-alphabet Markov sources"};
  app.set_version_flag("--version", std::string("crdp ") + crdp::version_string);
  app.require_subcommand(1);

  CurveArgs curve_args;
  CLI::App* curve = app.add_subcommand("curve", "sweep the rate-distortion curve to CSV");
  add_model_options(curve, curve_args.common);
  add_solver_options(curve, curve_args.common, true);
  {
    CLI::Option_group* grid = curve->add_option_group("grid", "exactly one grid");
    grid->add_option("--s-grid", curve_args.s_grid, "slopes a:b:n (nonpositive)");
    grid->add_option("--s-list", curve_args.s_list, "comma-separated slopes");
    grid->add_option("--d-grid", curve_args.d_grid, "distortion targets a:b:n");
    grid->add_option("--d-list", curve_args.d_list, "comma-separated distortion targets");
    grid->require_option(1);
  }
  curve->add_option("--threads", curve_args.threads, "worker threads")->capture_default_str();
  curve->add_option("--out", curve_args.out, "output CSV path")->required();

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "solve a single point");
  add_model_options(solve, solve_args.common);
  add_solver_options(solve, solve_args.common, true);
  CLI::Option* solve_d = nullptr;
  {
    CLI::Option_group* level = solve->add_option_group("level", "exactly one of");
    solve_d = level->add_option("--distortion", solve_args.d_target, "target distortion");
    level->add_option("--slope", solve_args.slope, "Lagrange slope (nonpositive)");
    level->require_option(1);
  }
  solve->add_option("--dump-kernel", solve_args.dump_kernel,
                    "write the solved kernel table (stage,row,y,p)");

  SimArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo run of the realization cascade (per-letter mode)");
  add_model_options(simulate, sim_args.common);
  add_solver_options(simulate, sim_args.common, false);
  CLI::Option* sim_d = nullptr;
  {
    CLI::Option_group* level = simulate->add_option_group("level", "exactly one of");
    sim_d = level->add_option("--distortion", sim_args.d_target, "target distortion");
    level->add_option("--slope", sim_args.slope, "Lagrange slope (nonpositive)");
    level->require_option(1);
  }
  simulate->add_option("--steps", sim_args.steps, "number of main steps")
      ->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--out-prefix", sim_args.out_prefix,
                       "prefix for .trace.csv / .stats.txt")
      ->required();

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  add_model_options(verify, verify_args.common);
  add_solver_options(verify, verify_args.common, false);
  verify->add_option("--horizon", verify_args.horizon, "stages 0..n")
      ->capture_default_str();
  CLI::Option* vd = verify->add_option("--distortion", verify_args.d_target,
                                       "target distortion (default d_max/2)");
  verify->add_flag("--inject-anticausal", verify_args.inject_anticausal,
                   "swap in an anticausal fixture; the causality check must fail");

  AnalyticArgs analytic_args;
  CLI::App* analytic =
      app.add_subcommand("analytic", "closed-form binary kernel and curve value");
  analytic->add_option("p", analytic_args.p, "0 -> 1 flip probability")->required();
  analytic->add_option("q", analytic_args.q, "1 -> 0 flip probability")->required();
  analytic->add_option("D", analytic_args.d, "distortion level")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  verify_args.have_target = vd->count() > 0;
  solve_args.use_target = solve_d->count() > 0;
  sim_args.use_target = sim_d->count() > 0;

  try {
    if (app.got_subcommand(curve)) return run_curve(curve_args);
    if (app.got_subcommand(solve)) return run_solve(solve_args);
    if (app.got_subcommand(simulate)) return run_simulate(sim_args);
    if (app.got_subcommand(verify)) return run_verify(verify_args);
    if (app.got_subcommand(analytic)) return run_analytic(analytic_args);
  } catch (const crdp::ParseError& e) {
    std::cerr << "crdp: " << e.what() << "\n";
    return kUsage;
  } catch (const crdp::DegenerateMarginalError& e) {
    std::cerr << "crdp: solver degenerated: " << e.what() << "\n";
    return kConvergence;
  } catch (const crdp::ErgodicityError& e) {
    std::cerr << "crdp: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "crdp: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
