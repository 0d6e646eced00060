#include "crdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <utility>

namespace crdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453094172321214581766;

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// log(sum exp(ell)), stable; returns -inf only when every entry is -inf.
double log_sum_exp(std::span<const double> ell) {
  double m = kNegInf;
  for (double e : ell) m = std::max(m, e);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double e : ell) acc += std::exp(e - m);
  return m + std::log(acc);
}

// Writes softmax(ell) into out; throws when the whole row has zero weight.
void softmax_into(std::span<const double> ell, std::span<double> out) {
  double m = kNegInf;
  for (double e : ell) m = std::max(m, e);
  if (m == kNegInf)
    throw DegenerateMarginalError("reconstruction kernel row has zero total weight");
  double acc = 0.0;
  for (std::size_t i = 0; i < ell.size(); ++i) {
    out[i] = std::exp(ell[i] - m);
    acc += out[i];
  }
  for (double& v : out) v /= acc;
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Joint law P(x^i, y^i) for each stage of an exact-mode policy driven by the
// source. stage[i] is flat with index x_hist * |Y|^(i+1) + y_hist.
std::vector<std::vector<double>> forward_joints(const MarkovSource& source,
                                                const CausalPolicy& policy) {
  const int X = policy.x_size;
  const int Y = policy.y_size;
  const int n = policy.horizon;
  std::vector<std::vector<double>> joint(static_cast<std::size_t>(n) + 1);

  joint[0].assign(static_cast<std::size_t>(X) * Y, 0.0);
  for (int x0 = 0; x0 < X; ++x0)
    for (int y0 = 0; y0 < Y; ++y0)
      joint[0][static_cast<std::size_t>(x0) * Y + y0] =
          source.initial[x0] * policy.stage[0](x0, y0);

  for (int i = 0; i + 1 <= n; ++i) {
    const long long xs = ipow(X, i + 1);
    const long long ys = ipow(Y, i + 1);
    auto& next = joint[static_cast<std::size_t>(i) + 1];
    next.assign(static_cast<std::size_t>(xs * X) * static_cast<std::size_t>(ys * Y), 0.0);
    const StochasticKernel& K = policy.stage[static_cast<std::size_t>(i) + 1];
    for (long long xh = 0; xh < xs; ++xh) {
      const int xi = static_cast<int>(xh % X);
      for (long long yh = 0; yh < ys; ++yh) {
        const double p = joint[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(xh * ys + yh)];
        if (p == 0.0) continue;
        for (int xn = 0; xn < X; ++xn) {
          const double pt = p * source.transition(xi, xn);
          if (pt == 0.0) continue;
          const long long nx = xh * X + xn;
          const long long row = yh * (xs * X) + nx;
          for (int yn = 0; yn < Y; ++yn) {
            const double v = pt * K(row, yn);
            if (v == 0.0) continue;
            next[static_cast<std::size_t>(nx * (ys * Y) + yh * Y + yn)] += v;
          }
        }
      }
    }
  }
  return joint;
}

OutputMarginalFamily induced_marginals_exact(const MarkovSource& source,
                                             const CausalPolicy& policy) {
  const int Y = policy.y_size;
  const int n = policy.horizon;
  auto joint = forward_joints(source, policy);

  OutputMarginalFamily fam;
  fam.mode = HorizonMode::exact;
  fam.y_size = Y;
  fam.stage.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const long long xs = ipow(policy.x_size, i + 1);
    const long long ys = ipow(Y, i + 1);
    std::vector<double> py(static_cast<std::size_t>(ys), 0.0);
    for (long long xh = 0; xh < xs; ++xh)
      for (long long yh = 0; yh < ys; ++yh)
        py[static_cast<std::size_t>(yh)] +=
            joint[static_cast<std::size_t>(i)][static_cast<std::size_t>(xh * ys + yh)];

    StochasticKernel M(ys / Y, Y);
    std::vector<double> row(static_cast<std::size_t>(Y));
    for (long long prev = 0; prev < ys / Y; ++prev) {
      double mass = 0.0;
      for (int y = 0; y < Y; ++y) mass += py[static_cast<std::size_t>(prev * Y + y)];
      if (mass > 0.0) {
        for (int y = 0; y < Y; ++y)
          row[static_cast<std::size_t>(y)] = py[static_cast<std::size_t>(prev * Y + y)] / mass;
      } else {
        // Unreachable reconstruction history: any row works; keep it uniform.
        std::fill(row.begin(), row.end(), 1.0 / Y);
      }
      M.set_row(prev, row);
    }
    fam.stage.push_back(std::move(M));
  }
  return fam;
}

struct StationaryProblem {
  std::vector<double> pw;  // steady window law, window index most recent first
  long long w_states = 0;
};

StationaryProblem stationary_problem(const MarkovSource& source, const DistortionSpec& dist) {
  require(dist.y_window() == 0,
          "stationary mode requires a distortion with no reconstruction memory");
  require(dist.x_size() == source.alphabet.size,
          "distortion source alphabet does not match the source");
  JointTable wj = window_joint(source, dist.x_window());
  StationaryProblem sp;
  sp.pw.assign(wj.flat().begin(), wj.flat().end());
  sp.w_states = dist.x_states();
  return sp;
}

EvalResult evaluate_stationary(const MarkovSource& source, const DistortionSpec& dist,
                               const CausalPolicy& policy, double s) {
  const StationaryProblem sp = stationary_problem(source, dist);
  const StochasticKernel& K = policy.stage[0];
  const int Y = policy.y_size;

  std::vector<double> q(static_cast<std::size_t>(Y), 0.0);
  double distortion = 0.0;
  for (long long w = 0; w < sp.w_states; ++w) {
    const double pw = sp.pw[static_cast<std::size_t>(w)];
    for (int y = 0; y < Y; ++y) {
      q[static_cast<std::size_t>(y)] += pw * K(w, y);
      distortion += pw * K(w, y) * dist.value_flat(w, y);
    }
  }

  double mi = 0.0;        // nats
  double log_part = 0.0;  // E[log Z_w]
  for (long long w = 0; w < sp.w_states; ++w) {
    const double pw = sp.pw[static_cast<std::size_t>(w)];
    if (pw == 0.0) continue;
    double z = 0.0;
    for (int y = 0; y < Y; ++y) {
      const double k = K(w, y);
      if (k > 0.0) mi += pw * k * std::log(k / q[static_cast<std::size_t>(y)]);
      z += q[static_cast<std::size_t>(y)] * std::exp(s * dist.value_flat(w, y));
    }
    log_part += pw * std::log(z);
  }

  EvalResult out;
  out.distortion = distortion;
  out.rate = std::max(0.0, mi) / kLn2;
  out.rate_closed_form = (s * distortion - log_part) / kLn2;
  return out;
}

EvalResult evaluate_exact(const MarkovSource& source, const DistortionSpec& dist,
                          const CausalPolicy& policy, double s) {
  const int X = policy.x_size;
  const int Y = policy.y_size;
  const int n = policy.horizon;
  const StageCost cost(source, dist);
  const auto joint = forward_joints(source, policy);

  double d_total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const long long xs = ipow(X, i + 1);
    const long long ys = ipow(Y, i + 1);
    for (long long xh = 0; xh < xs; ++xh)
      for (long long yh = 0; yh < ys; ++yh) {
        const double p = joint[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(xh * ys + yh)];
        if (p > 0.0) d_total += p * cost.rho(i, xh, yh);
      }
  }

  // Exact mutual information between the two full blocks.
  const long long xs_n = ipow(X, n + 1);
  const long long ys_n = ipow(Y, n + 1);
  std::vector<double> px(static_cast<std::size_t>(xs_n), 0.0);
  std::vector<double> py(static_cast<std::size_t>(ys_n), 0.0);
  const auto& last = joint[static_cast<std::size_t>(n)];
  for (long long xh = 0; xh < xs_n; ++xh)
    for (long long yh = 0; yh < ys_n; ++yh) {
      const double p = last[static_cast<std::size_t>(xh * ys_n + yh)];
      px[static_cast<std::size_t>(xh)] += p;
      py[static_cast<std::size_t>(yh)] += p;
    }
  double mi = 0.0;
  for (long long xh = 0; xh < xs_n; ++xh)
    for (long long yh = 0; yh < ys_n; ++yh) {
      const double p = last[static_cast<std::size_t>(xh * ys_n + yh)];
      if (p > 0.0)
        mi += p * std::log(p / (px[static_cast<std::size_t>(xh)] *
                                py[static_cast<std::size_t>(yh)]));
    }

  // Closed form s*D - sum E[g_i] - sum E[log Z_i] against the induced
  // marginals; matches the exact rate at a solver fixed point.
  const OutputMarginalFamily fam = induced_marginals_exact(source, policy);
  const GTable g = backward_g(source, cost, fam, s, n);
  double e_g = 0.0, e_logz = 0.0;
  std::vector<double> ell(static_cast<std::size_t>(Y));
  for (int i = 0; i <= n; ++i) {
    const long long xs = ipow(X, i + 1);
    const long long ys = ipow(Y, i + 1);
    const auto& ji = joint[static_cast<std::size_t>(i)];
    const auto& gi = g.stage[static_cast<std::size_t>(i)];
    const StochasticKernel& M = fam.stage[static_cast<std::size_t>(i)];
    for (long long xh = 0; xh < xs; ++xh) {
      for (long long prev = 0; prev < ys / Y; ++prev) {
        double pw = 0.0;
        for (int y = 0; y < Y; ++y)
          pw += ji[static_cast<std::size_t>(xh * ys + prev * Y + y)];
        if (pw == 0.0) continue;
        for (int y = 0; y < Y; ++y) {
          const long long yh = prev * Y + y;
          const double p = ji[static_cast<std::size_t>(xh * ys + yh)];
          if (p > 0.0) e_g += p * gi[static_cast<std::size_t>(xh * ys + yh)];
          ell[static_cast<std::size_t>(y)] =
              safe_log(M(prev, y)) + s * cost.rho(i, xh, yh) -
              gi[static_cast<std::size_t>(xh * ys + yh)];
        }
        e_logz += pw * log_sum_exp(ell);
      }
    }
  }

  EvalResult out;
  const double letters = n + 1;
  out.distortion = d_total / letters;
  out.rate = std::max(0.0, mi) / (letters * kLn2);
  out.rate_closed_form = (s * d_total - e_g - e_logz) / (letters * kLn2);
  return out;
}

// One pass of the per-letter iteration; returns the sup-norm marginal change.
double stationary_step(const StationaryProblem& sp, const DistortionSpec& dist,
                       double s, double damping, std::vector<double>& q,
                       StochasticKernel& K) {
  const int Y = dist.y_size();
  std::vector<double> ell(static_cast<std::size_t>(Y));
  std::vector<double> row(static_cast<std::size_t>(Y));
  std::vector<double> qn(static_cast<std::size_t>(Y), 0.0);
  for (long long w = 0; w < sp.w_states; ++w) {
    for (int y = 0; y < Y; ++y)
      ell[static_cast<std::size_t>(y)] =
          safe_log(q[static_cast<std::size_t>(y)]) + s * dist.value_flat(w, y);
    softmax_into(ell, row);
    K.set_row(w, row);
    const double pw = sp.pw[static_cast<std::size_t>(w)];
    for (int y = 0; y < Y; ++y)
      qn[static_cast<std::size_t>(y)] += pw * row[static_cast<std::size_t>(y)];
  }
  double res = 0.0;
  for (int y = 0; y < Y; ++y) {
    const std::size_t j = static_cast<std::size_t>(y);
    res = std::max(res, std::abs(qn[j] - q[j]));
    q[j] = (1.0 - damping) * qn[j] + damping * q[j];
  }
  return res;
}

SolveResult solve_stationary(const MarkovSource& source, const DistortionSpec& dist,
                             const SolverConfig& config) {
  const StationaryProblem sp = stationary_problem(source, dist);
  const int Y = dist.y_size();

  std::vector<double> q(static_cast<std::size_t>(Y), 1.0 / Y);
  StochasticKernel K(sp.w_states, Y);

  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  while (it < config.max_iter) {
    ++it;
    residual = stationary_step(sp, dist, config.slope, config.damping, q, K);
    if (residual <= config.tol) {
      converged = true;
      break;
    }
  }

  SolveResult out;
  out.policy.mode = HorizonMode::stationary;
  out.policy.x_size = dist.x_size();
  out.policy.y_size = Y;
  out.policy.x_window = dist.x_window();
  out.policy.horizon = -1;
  out.policy.stage.push_back(K);

  out.marginals = update_output_marginals(source, out.policy);

  const EvalResult ev = evaluate_stationary(source, dist, out.policy, config.slope);
  out.point.s = config.slope;
  out.point.distortion = ev.distortion;
  out.point.rate = ev.rate;
  out.point.iterations = it;
  out.point.converged = converged;
  out.point.residual = residual;
  return out;
}

SolveResult solve_exact(const MarkovSource& source, const DistortionSpec& dist,
                        const SolverConfig& config) {
  require(config.horizon >= 0, "exact mode needs a nonnegative horizon");
  require(dist.x_size() == source.alphabet.size,
          "distortion source alphabet does not match the source");
  const int X = dist.x_size();
  const int Y = dist.y_size();
  const int n = config.horizon;
  const StageCost cost(source, dist);

  OutputMarginalFamily fam = OutputMarginalFamily::uniform_exact(Y, n);

  CausalPolicy policy;
  policy.mode = HorizonMode::exact;
  policy.x_size = X;
  policy.y_size = Y;
  policy.horizon = n;
  policy.x_window = dist.x_window();

  OutputMarginalFamily induced;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  std::vector<double> blended;
  while (it < config.max_iter) {
    ++it;
    const GTable g = backward_g(source, cost, fam, config.slope, n);
    policy.stage.clear();
    for (int i = 0; i <= n; ++i)
      policy.stage.push_back(optimal_stage_kernel(cost, fam, g, config.slope, i));
    induced = induced_marginals_exact(source, policy);

    residual = 0.0;
    for (int i = 0; i <= n; ++i) {
      const StochasticKernel& a = induced.stage[static_cast<std::size_t>(i)];
      const StochasticKernel& b = fam.stage[static_cast<std::size_t>(i)];
      for (long long r = 0; r < a.rows(); ++r)
        for (int y = 0; y < Y; ++y)
          residual = std::max(residual, std::abs(a(r, y) - b(r, y)));
    }

    if (config.damping > 0.0) {
      blended.resize(static_cast<std::size_t>(Y));
      for (int i = 0; i <= n; ++i) {
        StochasticKernel mix(fam.stage[static_cast<std::size_t>(i)].rows(), Y);
        for (long long r = 0; r < mix.rows(); ++r) {
          for (int y = 0; y < Y; ++y)
            blended[static_cast<std::size_t>(y)] =
                (1.0 - config.damping) * induced.stage[static_cast<std::size_t>(i)](r, y) +
                config.damping * fam.stage[static_cast<std::size_t>(i)](r, y);
          mix.set_row(r, blended);
        }
        fam.stage[static_cast<std::size_t>(i)] = std::move(mix);
      }
    } else {
      fam = induced;
    }

    if (residual <= config.tol) {
      converged = true;
      break;
    }
  }

  SolveResult out;
  out.policy = std::move(policy);
  out.marginals = std::move(induced);

  const EvalResult ev = evaluate_exact(source, dist, out.policy, config.slope);
  out.point.s = config.slope;
  out.point.distortion = ev.distortion;
  out.point.rate = ev.rate;
  out.point.iterations = it;
  out.point.converged = converged;
  out.point.residual = residual;
  return out;
}

// Zero-rate result for targets at or beyond the constant-reconstruction edge.
SolveResult zero_rate_result(const MarkovSource& source, const DistortionSpec& dist,
                             const SolverConfig& base, double d_target) {
  const int X = dist.x_size();
  const int Y = dist.y_size();
  const JointTable wj = window_joint(source, dist.x_window());

  int best_y = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < Y; ++y) {
    long long y_win = 0;
    for (int k = 0; k <= dist.y_window(); ++k) y_win = y_win * Y + y;
    double e = 0.0;
    for (long long w = 0; w < dist.x_states(); ++w)
      e += wj.flat()[static_cast<std::size_t>(w)] * dist.value_flat(w, y_win);
    if (e < best - 1e-15) {
      best = e;
      best_y = y;
    }
  }

  SolveResult out;
  out.policy.mode = base.mode;
  out.policy.x_size = X;
  out.policy.y_size = Y;
  out.policy.x_window = dist.x_window();
  out.marginals.mode = base.mode;
  out.marginals.y_size = Y;

  std::vector<double> point_row(static_cast<std::size_t>(Y), 0.0);
  point_row[static_cast<std::size_t>(best_y)] = 1.0;

  if (base.mode == HorizonMode::stationary) {
    out.policy.horizon = -1;
    StochasticKernel K(dist.x_states(), Y);
    for (long long w = 0; w < dist.x_states(); ++w) K.set_row(w, point_row);
    out.policy.stage.push_back(std::move(K));
    StochasticKernel M(1, Y);
    M.set_row(0, point_row);
    out.marginals.stage.push_back(std::move(M));
  } else {
    require(base.horizon >= 0, "exact mode needs a nonnegative horizon");
    out.policy.horizon = base.horizon;
    for (int i = 0; i <= base.horizon; ++i) {
      StochasticKernel K(out.policy.exact_rows(i), Y);
      for (long long r = 0; r < K.rows(); ++r) K.set_row(r, point_row);
      out.policy.stage.push_back(std::move(K));
      StochasticKernel M(ipow(Y, i), Y);
      for (long long r = 0; r < M.rows(); ++r) M.set_row(r, point_row);
      out.marginals.stage.push_back(std::move(M));
    }
  }

  out.point = RdPoint{0.0, d_target, 0.0, 0, true, 0.0};
  return out;
}

}  // namespace

void validate_policy(const CausalPolicy& policy) {
  require(policy.x_size > 0 && policy.y_size > 0, "policy alphabet sizes must be positive");
  if (policy.mode == HorizonMode::stationary) {
    require(policy.stage.size() == 1, "stationary policy holds exactly one kernel");
    require(policy.x_window >= 0, "negative source window");
    require(policy.stage[0].rows() == ipow(policy.x_size, policy.x_window + 1),
            "stationary kernel row count does not match the source window");
    require(policy.stage[0].cols() == policy.y_size,
            "kernel columns do not match the reconstruction alphabet");
  } else {
    require(policy.horizon >= 0, "exact policy needs a nonnegative horizon");
    require(policy.stage.size() == static_cast<std::size_t>(policy.horizon) + 1,
            "exact policy needs one kernel per stage");
    for (int i = 0; i <= policy.horizon; ++i) {
      require(policy.stage[static_cast<std::size_t>(i)].rows() == policy.exact_rows(i),
              "stage kernel row count does not match its history space");
      require(policy.stage[static_cast<std::size_t>(i)].cols() == policy.y_size,
              "kernel columns do not match the reconstruction alphabet");
    }
  }
}

OutputMarginalFamily OutputMarginalFamily::uniform_exact(int y_size, int horizon) {
  OutputMarginalFamily fam;
  fam.mode = HorizonMode::exact;
  fam.y_size = y_size;
  std::vector<double> row(static_cast<std::size_t>(y_size), 1.0 / y_size);
  for (int i = 0; i <= horizon; ++i) {
    StochasticKernel M(ipow(y_size, i), y_size);
    for (long long r = 0; r < M.rows(); ++r) M.set_row(r, row);
    fam.stage.push_back(std::move(M));
  }
  return fam;
}

OutputMarginalFamily OutputMarginalFamily::uniform_stationary(int y_size) {
  OutputMarginalFamily fam;
  fam.mode = HorizonMode::stationary;
  fam.y_size = y_size;
  StochasticKernel M(1, y_size);
  std::vector<double> row(static_cast<std::size_t>(y_size), 1.0 / y_size);
  M.set_row(0, row);
  fam.stage.push_back(std::move(M));
  return fam;
}

GTable backward_g(const MarkovSource& source, const StageCost& cost,
                  const OutputMarginalFamily& marginals, double s, int horizon) {
  require(marginals.mode == HorizonMode::exact, "backward recursion needs exact-mode marginals");
  require(marginals.stage.size() == static_cast<std::size_t>(horizon) + 1,
          "marginal family does not cover the horizon");
  const int X = source.alphabet.size;
  const int Y = marginals.y_size;

  GTable g;
  g.stage.resize(static_cast<std::size_t>(horizon) + 1);
  g.stage[static_cast<std::size_t>(horizon)]
      .assign(static_cast<std::size_t>(ipow(X, horizon + 1) * ipow(Y, horizon + 1)), 0.0);

  std::vector<double> ell(static_cast<std::size_t>(Y));
  for (int i = horizon - 1; i >= 0; --i) {
    const long long xs = ipow(X, i + 1);
    const long long ys = ipow(Y, i + 1);
    auto& gi = g.stage[static_cast<std::size_t>(i)];
    gi.assign(static_cast<std::size_t>(xs * ys), 0.0);
    const auto& gnext = g.stage[static_cast<std::size_t>(i) + 1];
    const StochasticKernel& M = marginals.stage[static_cast<std::size_t>(i) + 1];
    for (long long xh = 0; xh < xs; ++xh) {
      const int xi = static_cast<int>(xh % X);
      for (long long yh = 0; yh < ys; ++yh) {
        double acc = 0.0;
        for (int xn = 0; xn < X; ++xn) {
          const double t = source.transition(xi, xn);
          if (t == 0.0) continue;
          const long long nx = xh * X + xn;
          for (int y = 0; y < Y; ++y) {
            const long long ny = yh * Y + y;
            ell[static_cast<std::size_t>(y)] =
                safe_log(M(yh, y)) + s * cost.rho(i + 1, nx, ny) -
                gnext[static_cast<std::size_t>(nx * (ys * Y) + ny)];
          }
          acc += t * log_sum_exp(ell);
        }
        gi[static_cast<std::size_t>(xh * ys + yh)] = -acc;
      }
    }
  }
  return g;
}

StochasticKernel optimal_stage_kernel(const StageCost& cost,
                                      const OutputMarginalFamily& marginals,
                                      const GTable& g, double s, int stage) {
  const int X = cost.dist().x_size();
  const int Y = marginals.y_size;
  const long long xs = ipow(X, stage + 1);
  const long long ys_prev = ipow(Y, stage);
  const StochasticKernel& M = marginals.stage[static_cast<std::size_t>(stage)];
  const auto& gi = g.stage[static_cast<std::size_t>(stage)];

  StochasticKernel K(ys_prev * xs, Y);
  std::vector<double> ell(static_cast<std::size_t>(Y));
  std::vector<double> row(static_cast<std::size_t>(Y));
  for (long long prev = 0; prev < ys_prev; ++prev) {
    for (long long xh = 0; xh < xs; ++xh) {
      for (int y = 0; y < Y; ++y) {
        const long long yh = prev * Y + y;
        ell[static_cast<std::size_t>(y)] =
            safe_log(M(prev, y)) + s * cost.rho(stage, xh, yh) -
            gi[static_cast<std::size_t>(xh * (ys_prev * Y) + yh)];
      }
      softmax_into(ell, row);
      K.set_row(prev * xs + xh, row);
    }
  }
  return K;
}

OutputMarginalFamily update_output_marginals(const MarkovSource& source,
                                             const CausalPolicy& policy) {
  validate_policy(policy);
  if (policy.mode == HorizonMode::exact) return induced_marginals_exact(source, policy);

  const JointTable wj = window_joint(source, policy.x_window);
  const StochasticKernel& K = policy.stage[0];
  const int Y = policy.y_size;
  std::vector<double> q(static_cast<std::size_t>(Y), 0.0);
  for (long long w = 0; w < K.rows(); ++w) {
    const double pw = wj.flat()[static_cast<std::size_t>(w)];
    for (int y = 0; y < Y; ++y) q[static_cast<std::size_t>(y)] += pw * K(w, y);
  }
  OutputMarginalFamily fam;
  fam.mode = HorizonMode::stationary;
  fam.y_size = Y;
  StochasticKernel M(1, Y);
  M.set_row(0, q);
  fam.stage.push_back(std::move(M));
  return fam;
}

SolveResult solve_fixed_point(const MarkovSource& source, const DistortionSpec& dist,
                              const SolverConfig& config) {
  require(config.slope <= 0.0, "slope must be nonpositive");
  require(config.damping >= 0.0 && config.damping < 1.0, "damping must lie in [0, 1)");
  require(config.tol > 0.0, "tolerance must be positive");
  require(config.max_iter > 0, "iteration budget must be positive");
  if (config.mode == HorizonMode::stationary) return solve_stationary(source, dist, config);
  return solve_exact(source, dist, config);
}

EvalResult evaluate_policy(const MarkovSource& source, const DistortionSpec& dist,
                           const CausalPolicy& policy, double s) {
  validate_policy(policy);
  if (policy.mode == HorizonMode::stationary) {
    require(policy.x_window == dist.x_window(),
            "policy window does not match the distortion window");
    return evaluate_stationary(source, dist, policy, s);
  }
  return evaluate_exact(source, dist, policy, s);
}

std::vector<RdPoint> sweep_curve(const MarkovSource& source, const DistortionSpec& dist,
                                 SolverConfig base, std::vector<double> slopes,
                                 int threads) {
  std::vector<RdPoint> points(slopes.size());
  auto run_block = [&](int offset, int stride) {
    for (std::size_t i = static_cast<std::size_t>(offset); i < slopes.size();
         i += static_cast<std::size_t>(stride)) {
      SolverConfig cfg = base;
      cfg.slope = slopes[i];
      points[i] = solve_fixed_point(source, dist, cfg).point;
    }
  };

  if (threads <= 1 || slopes.size() <= 1) {
    run_block(0, 1);
  } else {
    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(threads), slopes.size()));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          run_block(t, workers);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::sort(points.begin(), points.end(), [](const RdPoint& a, const RdPoint& b) {
    if (a.distortion != b.distortion) return a.distortion < b.distortion;
    return a.s < b.s;
  });
  return points;
}

SolveResult solve_for_target_distortion(const MarkovSource& source,
                                        const DistortionSpec& dist, SolverConfig base,
                                        double d_target, double d_tol) {
  require(d_target >= 0.0, "target distortion must be nonnegative");
  require(d_tol > 0.0, "distortion tolerance must be positive");
  const double edge = d_max(source, dist);
  if (d_target >= edge - 1e-15) return zero_rate_result(source, dist, base, d_target);

  auto solve_at = [&](double s) {
    SolverConfig cfg = base;
    cfg.slope = s;
    return solve_fixed_point(source, dist, cfg);
  };

  double lo = -1.0;  // more negative slope: smaller distortion
  double hi = 0.0;   // distortion at hi exceeds the target
  SolveResult at_lo = solve_at(lo);
  while (at_lo.point.distortion > d_target && lo > -80.0) {
    hi = lo;
    lo *= 2.0;
    at_lo = solve_at(lo);
  }
  if (at_lo.point.distortion > d_target) {
    // Distortion floor of the problem sits above the request.
    at_lo.point.converged = false;
    return at_lo;
  }
  if (std::abs(at_lo.point.distortion - d_target) <= d_tol) return at_lo;

  SolveResult best = at_lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    SolveResult r = solve_at(mid);
    const double dm = r.point.distortion;
    if (std::abs(dm - d_target) < std::abs(best.point.distortion - d_target))
      best = std::move(r);
    if (std::abs(best.point.distortion - d_target) <= d_tol) break;
    if (dm > d_target)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-14 * std::max(1.0, std::abs(lo))) break;
  }

  best.point.converged =
      best.point.converged && std::abs(best.point.distortion - d_target) <= 10.0 * d_tol;
  return best;
}

}  // namespace crdp
