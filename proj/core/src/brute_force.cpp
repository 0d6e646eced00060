#include "crdp/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace crdp {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214581766;

// Problem constants folded into plain arrays: source string law, total
// distortion per string pair, and the parameter layout. Strings are bit
// fields with stage 0 in the highest bit.
struct Enumerated {
  int n = 0;
  int strings = 0;                // 2^(n+1)
  std::vector<double> px;         // P(x^n)
  std::vector<double> rho_total;  // sum of stage costs, index xs * strings + ys
  std::vector<int> offset;        // first parameter of each stage
  int params = 0;
};

Enumerated enumerate_problem(const MarkovSource& source, const DistortionSpec& dist,
                             int n) {
  Enumerated e;
  e.n = n;
  e.strings = 1 << (n + 1);
  e.px.assign(static_cast<std::size_t>(e.strings), 0.0);
  for (int xs = 0; xs < e.strings; ++xs) {
    double p = source.initial[(xs >> n) & 1];
    for (int i = 1; i <= n; ++i)
      p *= source.transition((xs >> (n - i + 1)) & 1, (xs >> (n - i)) & 1);
    e.px[static_cast<std::size_t>(xs)] = p;
  }

  const StageCost cost(source, dist);
  e.rho_total.assign(static_cast<std::size_t>(e.strings) * e.strings, 0.0);
  for (int xs = 0; xs < e.strings; ++xs)
    for (int ys = 0; ys < e.strings; ++ys) {
      double t = 0.0;
      for (int i = 0; i <= n; ++i) t += cost.rho(i, xs >> (n - i), ys >> (n - i));
      e.rho_total[static_cast<std::size_t>(xs) * e.strings + ys] = t;
    }

  e.offset.resize(static_cast<std::size_t>(n) + 1);
  int off = 0;
  for (int i = 0; i <= n; ++i) {
    e.offset[static_cast<std::size_t>(i)] = off;
    off += (1 << i) * (1 << (i + 1));
  }
  e.params = off;
  return e;
}

struct Workspace {
  std::vector<double> joint;
  std::vector<double> py;
};

struct Eval {
  double rate = 0.0;        // per-letter bits
  double distortion = 0.0;  // per-letter
};

// Parameter j holds P(y_i = 1 | y^{i-1}, x^i) at j = offset[i] +
// y_prev * 2^(i+1) + x_hist.
Eval evaluate(const Enumerated& e, std::span<const double> th, Workspace& ws,
              long long& evals) {
  ++evals;
  const int S = e.strings, n = e.n;
  ws.joint.assign(static_cast<std::size_t>(S) * S, 0.0);
  ws.py.assign(static_cast<std::size_t>(S), 0.0);

  double d = 0.0;
  for (int xs = 0; xs < S; ++xs) {
    const double px = e.px[static_cast<std::size_t>(xs)];
    if (px == 0.0) continue;
    for (int ys = 0; ys < S; ++ys) {
      double c = px;
      for (int i = 0; i <= n; ++i) {
        const int j = e.offset[static_cast<std::size_t>(i)] +
                      (ys >> (n + 1 - i)) * (1 << (i + 1)) + (xs >> (n - i));
        const double t1 = th[static_cast<std::size_t>(j)];
        c *= ((ys >> (n - i)) & 1) ? t1 : 1.0 - t1;
      }
      ws.joint[static_cast<std::size_t>(xs) * S + ys] = c;
      ws.py[static_cast<std::size_t>(ys)] += c;
      d += c * e.rho_total[static_cast<std::size_t>(xs) * S + ys];
    }
  }

  double mi = 0.0;
  for (int xs = 0; xs < S; ++xs)
    for (int ys = 0; ys < S; ++ys) {
      const double p = ws.joint[static_cast<std::size_t>(xs) * S + ys];
      if (p > 0.0)
        mi += p * std::log(p / (e.px[static_cast<std::size_t>(xs)] *
                                ws.py[static_cast<std::size_t>(ys)]));
    }

  Eval out;
  out.rate = std::max(0.0, mi) / ((n + 1) * kLn2);
  out.distortion = d / (n + 1);
  return out;
}

// Exact distortion floor by dynamic programming over the perfect-information
// state (x^i, y^{i-1}); also emits the minimizing deterministic policy.
double distortion_floor(const MarkovSource& source, const Enumerated& e,
                        const StageCost& cost, std::vector<double>& th_det) {
  const int n = e.n;
  th_det.assign(static_cast<std::size_t>(e.params), 0.0);
  std::vector<double> next;  // V_{i+1}, index xh * 2^(i+2) ... built per level
  for (int i = n; i >= 0; --i) {
    const int xs = 1 << (i + 1);
    const int yprevs = 1 << i;
    std::vector<double> cur(static_cast<std::size_t>(xs) * yprevs, 0.0);
    for (int xh = 0; xh < xs; ++xh) {
      const int xi = xh & 1;
      for (int yp = 0; yp < yprevs; ++yp) {
        double best = std::numeric_limits<double>::infinity();
        int best_y = 0;
        for (int y = 0; y < 2; ++y) {
          const int yh = yp * 2 + y;
          double v = cost.rho(i, xh, yh);
          if (i < n) {
            for (int xn = 0; xn < 2; ++xn)
              v += source.transition(xi, xn) *
                   next[static_cast<std::size_t>(xh * 2 + xn) * (yprevs * 2) + yh];
          }
          if (v < best - 1e-15) {
            best = v;
            best_y = y;
          }
        }
        cur[static_cast<std::size_t>(xh) * yprevs + yp] = best;
        th_det[static_cast<std::size_t>(e.offset[static_cast<std::size_t>(i)] +
                                        yp * (1 << (i + 1)) + xh)] = best_y;
      }
    }
    next = std::move(cur);
  }
  double floor_total = 0.0;
  for (int x0 = 0; x0 < 2; ++x0) floor_total += source.initial[x0] * next[x0];
  return floor_total / (n + 1);
}

// Exhaustive grid with shrinking windows; only used when the parameter count
// is tiny. Keeps the best rate among budget-respecting points.
Eval grid_search(const Enumerated& e, double target, const BruteForceSettings& st,
                 Workspace& ws, long long& evals) {
  const int P = e.params;
  std::vector<double> lo(static_cast<std::size_t>(P), 0.0);
  std::vector<double> hi(static_cast<std::size_t>(P), 1.0);
  std::vector<double> th(static_cast<std::size_t>(P), 0.5);
  std::vector<double> best_th = th;
  Eval best;
  best.rate = std::numeric_limits<double>::infinity();

  const int G = std::max(3, st.grid);
  std::vector<int> idx(static_cast<std::size_t>(P));
  for (int round = 0; round < st.grid_refinements; ++round) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (int j = 0; j < P; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        th[sj] = lo[sj] + (hi[sj] - lo[sj]) * idx[sj] / (G - 1);
      }
      const Eval ev = evaluate(e, th, ws, evals);
      if (ev.distortion <= target + 1e-12 && ev.rate < best.rate) {
        best = ev;
        best_th = th;
      }
      int j = P - 1;
      while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == G) {
        idx[static_cast<std::size_t>(j)] = 0;
        --j;
      }
      if (j < 0) break;
    }
    for (int j = 0; j < P; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      const double span = (hi[sj] - lo[sj]) / (G - 1) * 2.0;
      lo[sj] = std::max(0.0, best_th[sj] - span);
      hi[sj] = std::min(1.0, best_th[sj] + span);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Convex search over string kernels.
//
// A full-history policy is equivalent to a row-stochastic kernel Q(ys | xs)
// whose (i+1)-symbol y-prefix marginals depend on xs only through the
// (i+1)-symbol x-prefix. Those are linear constraints, so the feasible
// kernels form a polytope; its vertices are the deterministic maps
// y_i = f_i(x^i, y^{i-1}). Mutual information is convex in Q and the average
// distortion is linear, so for a fixed multiplier the Lagrangian
// I(Q) + lambda * D(Q) has no spurious local minima and conditional-gradient
// steps with a vertex oracle converge to the global optimum, certified by the
// duality gap. An outer bisection on lambda meets the distortion budget; the
// final blend between the bracketing solutions is exact because D is linear.
// ---------------------------------------------------------------------------

// Minimizes sum c(xs, ys) * Q(xs, ys) over the polytope by backward dynamic
// programming on (x-prefix, y-prefix) states; returns the vertex as ymap.
void best_vertex(const Enumerated& e, const std::vector<double>& c,
                 std::vector<int>& ymap) {
  const int n = e.n, S = e.strings;
  // W holds the partial sums for prefixes of length L, index xp * 2^L + yp.
  std::vector<double> w(static_cast<std::size_t>(S) * S);
  for (int xs = 0; xs < S; ++xs)
    for (int ys = 0; ys < S; ++ys)
      w[static_cast<std::size_t>(xs) * S + ys] = c[static_cast<std::size_t>(xs) * S + ys];

  std::vector<std::vector<int>> choice(static_cast<std::size_t>(n) + 1);
  for (int L = n + 1; L >= 1; --L) {
    const int xp_count = 1 << L;
    const int yp_count = 1 << (L - 1);
    std::vector<int>& ch = choice[static_cast<std::size_t>(L - 1)];
    ch.assign(static_cast<std::size_t>(xp_count) * yp_count, 0);
    std::vector<double> u(static_cast<std::size_t>(xp_count) * yp_count);
    for (int xp = 0; xp < xp_count; ++xp)
      for (int yp = 0; yp < yp_count; ++yp) {
        const double w0 = w[static_cast<std::size_t>(xp) * (yp_count * 2) + yp * 2];
        const double w1 = w[static_cast<std::size_t>(xp) * (yp_count * 2) + yp * 2 + 1];
        const int b = w1 < w0 ? 1 : 0;
        ch[static_cast<std::size_t>(xp) * yp_count + yp] = b;
        u[static_cast<std::size_t>(xp) * yp_count + yp] = b ? w1 : w0;
      }
    // Sum out the x symbol revealed at this stage.
    std::vector<double> wprev(static_cast<std::size_t>(xp_count / 2) * yp_count);
    for (int xp = 0; xp < xp_count / 2; ++xp)
      for (int yp = 0; yp < yp_count; ++yp)
        wprev[static_cast<std::size_t>(xp) * yp_count + yp] =
            u[static_cast<std::size_t>(xp * 2) * yp_count + yp] +
            u[static_cast<std::size_t>(xp * 2 + 1) * yp_count + yp];
    w = std::move(wprev);
  }

  ymap.assign(static_cast<std::size_t>(S), 0);
  for (int xs = 0; xs < S; ++xs) {
    int yp = 0;
    for (int i = 0; i <= n; ++i) {
      const int xp = xs >> (n - i);
      yp = yp * 2 +
           choice[static_cast<std::size_t>(i)]
                 [static_cast<std::size_t>(xp) * (1 << i) + yp];
    }
    ymap[static_cast<std::size_t>(xs)] = yp;
  }
}

struct QPoint {
  double value = 0.0;       // I + lambda * D, total nats
  double mi = 0.0;          // total nats
  double distortion = 0.0;  // total over stages
};

// Mixture of deterministic vertices with the given weights.
void build_q(const Enumerated& e, const std::vector<std::vector<int>>& verts,
             const std::vector<double>& w, std::vector<double>& q) {
  const int S = e.strings;
  q.assign(static_cast<std::size_t>(S) * S, 0.0);
  for (std::size_t k = 0; k < verts.size(); ++k) {
    if (w[k] == 0.0) continue;
    for (int xs = 0; xs < S; ++xs)
      q[static_cast<std::size_t>(xs) * S + verts[k][static_cast<std::size_t>(xs)]] +=
          w[k];
  }
}

QPoint q_objective(const Enumerated& e, double lambda, const std::vector<double>& q,
                   std::vector<double>& py, long long& evals) {
  ++evals;
  const int S = e.strings;
  py.assign(static_cast<std::size_t>(S), 0.0);
  for (int xs = 0; xs < S; ++xs) {
    const double px = e.px[static_cast<std::size_t>(xs)];
    if (px == 0.0) continue;
    for (int ys = 0; ys < S; ++ys)
      py[static_cast<std::size_t>(ys)] += px * q[static_cast<std::size_t>(xs) * S + ys];
  }
  QPoint out;
  for (int xs = 0; xs < S; ++xs) {
    const double px = e.px[static_cast<std::size_t>(xs)];
    if (px == 0.0) continue;
    for (int ys = 0; ys < S; ++ys) {
      const double v = q[static_cast<std::size_t>(xs) * S + ys];
      if (v > 0.0) {
        out.mi += px * v * std::log(v / py[static_cast<std::size_t>(ys)]);
        out.distortion += px * v * e.rho_total[static_cast<std::size_t>(xs) * S + ys];
      }
    }
  }
  out.mi = std::max(0.0, out.mi);
  out.value = out.mi + lambda * out.distortion;
  return out;
}

// Gradient of the Lagrangian in Q. The log ratio is clamped below so zero
// entries still offer the vertex oracle a strong but bounded incentive to
// grow their support; the optimum itself is interior (the entropy gradient
// diverges at the boundary), so the clamp is inactive once converged and the
// reported duality gap is honest.
void q_gradient(const Enumerated& e, double lambda, const std::vector<double>& q,
                const std::vector<double>& py, std::vector<double>& grad) {
  const int S = e.strings;
  grad.assign(static_cast<std::size_t>(S) * S, 0.0);
  for (int xs = 0; xs < S; ++xs) {
    const double px = e.px[static_cast<std::size_t>(xs)];
    if (px == 0.0) continue;
    for (int ys = 0; ys < S; ++ys) {
      const double v = q[static_cast<std::size_t>(xs) * S + ys];
      const double p = py[static_cast<std::size_t>(ys)];
      // Unsupported outputs (p == 0) cost nothing extra to open; entries that
      // are zero under a supported output want mass with unbounded strength.
      double ratio = 0.0;
      if (p > 0.0) ratio = v > 0.0 ? std::max(std::log(v / p), -46.0) : -46.0;
      grad[static_cast<std::size_t>(xs) * S + ys] =
          px * (ratio + lambda * e.rho_total[static_cast<std::size_t>(xs) * S + ys]);
    }
  }
}

// Euclidean projection onto the probability simplex (Held-Wolfe-Crowder).
void project_simplex(std::vector<double>& v) {
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double acc = 0.0, tau = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += u[i];
    const double t = (acc - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i + 1);
      tau = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - tau);
}

// Re-optimizes the mixture weights over the collected vertices by projected
// gradient with backtracking; the reduced problem is convex and projection
// can both activate and retire vertices.
QPoint reweight(const Enumerated& e, double lambda,
                const std::vector<std::vector<int>>& verts, std::vector<double>& w,
                std::vector<double>& q, std::vector<double>& py,
                std::vector<double>& grad, long long& evals) {
  const int S = e.strings;
  const std::size_t K = verts.size();
  std::vector<double> gk(K), trial(K);
  build_q(e, verts, w, q);
  QPoint cur = q_objective(e, lambda, q, py, evals);
  double step = 1.0;
  for (int it = 0; it < 200; ++it) {
    q_gradient(e, lambda, q, py, grad);
    double gmin = std::numeric_limits<double>::infinity();
    double gdotw = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double g = 0.0;
      for (int xs = 0; xs < S; ++xs)
        g += grad[static_cast<std::size_t>(xs) * S +
                  verts[k][static_cast<std::size_t>(xs)]];
      gk[k] = g;
      gmin = std::min(gmin, g);
      gdotw += g * w[k];
    }
    if (gdotw - gmin <= 1e-13) break;

    bool moved = false;
    while (step > 1e-14) {
      for (std::size_t k = 0; k < K; ++k) trial[k] = w[k] - step * gk[k];
      project_simplex(trial);
      build_q(e, verts, trial, q);
      const QPoint next = q_objective(e, lambda, q, py, evals);
      if (next.value < cur.value - 1e-15) {
        w = trial;
        cur = next;
        step = std::min(step * 1.6, 1e3);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  build_q(e, verts, w, q);
  cur = q_objective(e, lambda, q, py, evals);
  return cur;
}

struct FwState {
  std::vector<std::vector<int>> verts;
  std::vector<double> w;
  std::vector<double> q, py, grad;
};

// Fully corrective conditional gradient: the vertex oracle proposes a new
// deterministic map, an exact line search activates it, and the mixture
// weights are re-optimized over all collected vertices. gap_out carries the
// duality-gap certificate from the final iteration.
QPoint fw_min(const Enumerated& e, double lambda, double tol, FwState& st,
              const BruteForceSettings& settings, long long& evals, double& gap_out) {
  constexpr double kInvPhi = 0.6180339887498949;
  const int S = e.strings;
  QPoint cur = reweight(e, lambda, st.verts, st.w, st.q, st.py, st.grad, evals);
  gap_out = std::numeric_limits<double>::infinity();
  std::vector<int> ymap;
  std::vector<double> mix(st.q.size());
  for (int t = 0; t < settings.fw_iters; ++t) {
    q_gradient(e, lambda, st.q, st.py, st.grad);
    best_vertex(e, st.grad, ymap);
    double gap = 0.0;
    for (int xs = 0; xs < S; ++xs) {
      for (int ys = 0; ys < S; ++ys)
        gap += st.grad[static_cast<std::size_t>(xs) * S + ys] *
               st.q[static_cast<std::size_t>(xs) * S + ys];
      gap -= st.grad[static_cast<std::size_t>(xs) * S + ymap[static_cast<std::size_t>(xs)]];
    }
    gap_out = gap;
    if (gap <= tol) break;

    std::size_t s = st.verts.size();
    for (std::size_t k = 0; k < st.verts.size(); ++k)
      if (st.verts[k] == ymap) {
        s = k;
        break;
      }
    if (s == st.verts.size()) {
      st.verts.push_back(ymap);
      st.w.push_back(0.0);
    }

    // Exact line search toward the proposed vertex; the objective is convex
    // along the segment, fresh vertices get a positive starting weight, and
    // repeat proposals still advance when the reweighting step stalls.
    auto at_gamma = [&](double g) {
      for (int xs = 0; xs < S; ++xs) {
        for (int ys = 0; ys < S; ++ys)
          mix[static_cast<std::size_t>(xs) * S + ys] =
              (1.0 - g) * st.q[static_cast<std::size_t>(xs) * S + ys];
        mix[static_cast<std::size_t>(xs) * S + ymap[static_cast<std::size_t>(xs)]] += g;
      }
      return q_objective(e, lambda, mix, st.py, evals).value;
    };
    double a = 0.0, b = 1.0;
    double m1 = b - kInvPhi * (b - a), m2 = a + kInvPhi * (b - a);
    double f1 = at_gamma(m1), f2 = at_gamma(m2);
    for (int it = 0; it < 70; ++it) {
      if (f1 <= f2) {
        b = m2;
        m2 = m1;
        f2 = f1;
        m1 = b - kInvPhi * (b - a);
        f1 = at_gamma(m1);
      } else {
        a = m1;
        m1 = m2;
        f1 = f2;
        m2 = a + kInvPhi * (b - a);
        f2 = at_gamma(m2);
      }
    }
    const double gamma = 0.5 * (a + b);
    for (double& v : st.w) v *= 1.0 - gamma;
    st.w[s] += gamma;

    cur = reweight(e, lambda, st.verts, st.w, st.q, st.py, st.grad, evals);

    // Drop dead vertices so the reduced problems stay small.
    if (st.verts.size() > 96) {
      std::size_t out_k = 0;
      for (std::size_t k = 0; k < st.verts.size(); ++k)
        if (st.w[k] > 0.0) {
          if (out_k != k) {
            st.verts[out_k] = std::move(st.verts[k]);
            st.w[out_k] = st.w[k];
          }
          ++out_k;
        }
      st.verts.resize(out_k);
      st.w.resize(out_k);
    }
  }
  return cur;
}

}  // namespace

BruteForceResult brute_force_rdf(const MarkovSource& source, const DistortionSpec& dist,
                                 const BruteForceSettings& settings) {
  if (source.alphabet.size != 2 || dist.x_size() != 2 || dist.y_size() != 2)
    throw std::invalid_argument("reference optimizer handles binary alphabets only");
  if (settings.horizon < 0 || settings.horizon > 3)
    throw std::invalid_argument("reference optimizer handles horizons 0 through 3");
  if (settings.d_target < 0.0)
    throw std::invalid_argument("distortion budget must be nonnegative");

  BruteForceResult out;
  const double edge = d_max(source, dist);
  if (settings.d_target >= edge) {
    out.rate = 0.0;
    out.distortion = settings.d_target;
    const Enumerated e0 = enumerate_problem(source, dist, settings.horizon);
    const StageCost cost0(source, dist);
    std::vector<double> det;
    out.min_distortion = distortion_floor(source, e0, cost0, det);
    return out;
  }

  const Enumerated e = enumerate_problem(source, dist, settings.horizon);
  const StageCost cost(source, dist);
  Workspace ws;

  std::vector<double> th_det;
  out.min_distortion = distortion_floor(source, e, cost, th_det);
  if (settings.d_target < out.min_distortion - 1e-12) {
    out.feasible = false;
    out.rate = std::numeric_limits<double>::infinity();
    out.distortion = out.min_distortion;
    return out;
  }

  if (e.params <= settings.max_grid_params) {
    const Eval best = grid_search(e, settings.d_target, settings, ws, out.evaluations);
    out.rate = best.rate;
    out.distortion = best.distortion;
    return out;
  }

  const int S = e.strings;
  const double d_total = settings.d_target * (e.n + 1);

  // Seed the vertex set with the distortion-floor policy.
  FwState st;
  {
    std::vector<int> det_map(static_cast<std::size_t>(S), 0);
    for (int xs = 0; xs < S; ++xs) {
      int yp = 0;
      for (int i = 0; i <= e.n; ++i) {
        const int j = e.offset[static_cast<std::size_t>(i)] + yp * (1 << (i + 1)) +
                      (xs >> (e.n - i));
        yp = yp * 2 + (th_det[static_cast<std::size_t>(j)] > 0.5 ? 1 : 0);
      }
      det_map[static_cast<std::size_t>(xs)] = yp;
    }
    st.verts.push_back(std::move(det_map));
    st.w.push_back(1.0);
  }

  struct Bracket {
    double lambda = 0.0;
    double mi = 0.0;
    double distortion = 0.0;
    double gap = 0.0;
    std::vector<double> q;
  };

  auto solve_at = [&](double lambda) {
    Bracket b;
    const QPoint p =
        fw_min(e, lambda, settings.fw_tol, st, settings, out.evaluations, b.gap);
    b.lambda = lambda;
    b.mi = p.mi;
    b.distortion = p.distortion;
    b.q = st.q;
    return b;
  };

  Bracket lo = solve_at(0.0);  // min-rate end; distortion is the largest here
  Bracket hi;
  bool have_hi = false;
  if (lo.distortion <= d_total) {
    // Already inside the budget at zero multiplier: the rate is (numerically)
    // zero and the point stands on its own.
    hi = lo;
    have_hi = true;
  } else {
    double lambda = 1.0;
    while (lambda <= settings.lambda_max) {
      Bracket b = solve_at(lambda);
      if (b.distortion <= d_total) {
        hi = std::move(b);
        have_hi = true;
        break;
      }
      lo = std::move(b);
      lambda *= 2.0;
    }
    if (have_hi) {
      for (int it = 0; it < settings.bisect_iters; ++it) {
        const double mid = 0.5 * (lo.lambda + hi.lambda);
        Bracket b = solve_at(mid);
        if (b.distortion <= d_total)
          hi = std::move(b);
        else
          lo = std::move(b);
        if (hi.lambda - lo.lambda < 1e-10 * (1.0 + hi.lambda)) break;
      }
    }
  }
  double rate_total = std::numeric_limits<double>::infinity();
  double dist_total = d_total;
  // Certify with the brackets that shape the answer, not the warm-up legs.
  out.gap = lo.gap;
  if (have_hi && hi.distortion >= d_total - 1e-15) {
    rate_total = hi.mi;
    dist_total = hi.distortion;
    out.gap = hi.gap;
  } else if (have_hi) {
    // Exact blend: distortion is linear in Q and I is convex, so the mixture
    // meeting the budget with equality is optimal for the budgeted problem.
    const double span = lo.distortion - hi.distortion;
    const double t = span > 0.0 ? (lo.distortion - d_total) / span : 0.0;
    std::vector<double> q(static_cast<std::size_t>(S) * S);
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] = (1.0 - t) * lo.q[i] + t * hi.q[i];
    const QPoint p = q_objective(e, 0.0, q, st.py, out.evaluations);
    rate_total = p.mi;
    dist_total = p.distortion;
    out.gap = std::max(lo.gap, hi.gap);
  }

  out.rate = std::max(0.0, rate_total) / ((e.n + 1) * kLn2);
  out.distortion = dist_total / (e.n + 1);

  // The floor policy is always feasible; never report worse than it.
  const Eval det_ev = evaluate(e, th_det, ws, out.evaluations);
  if (!(out.distortion <= settings.d_target + 1e-9) || det_ev.rate < out.rate) {
    if (det_ev.distortion <= settings.d_target + 1e-9) {
      out.rate = det_ev.rate;
      out.distortion = det_ev.distortion;
    }
  }
  return out;
}

}  // namespace crdp
