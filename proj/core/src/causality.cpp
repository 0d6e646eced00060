#include "crdp/causality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace crdp {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214581766;

int string_length(long long states, int base, const char* what) {
  int len = 0;
  long long v = 1;
  while (v < states) {
    v *= base;
    ++len;
  }
  if (v != states || len < 1)
    throw std::invalid_argument(std::string(what) + ": axis is not a power of the alphabet");
  return len;
}

}  // namespace

CausalPolicy unroll_stationary(const MarkovSource& source, const CausalPolicy& policy,
                               int horizon) {
  validate_policy(policy);
  if (policy.mode != HorizonMode::stationary)
    throw std::invalid_argument("unroll_stationary: policy is already per-stage");
  if (horizon < 0) throw std::invalid_argument("unroll_stationary: negative horizon");
  const int X = policy.x_size;
  const int Y = policy.y_size;
  const int m = policy.x_window;
  const StochasticKernel& K = policy.stage[0];

  std::vector<StochasticKernel> pre(static_cast<std::size_t>(m) + 1);
  for (int k = 1; k <= m; ++k)
    pre[static_cast<std::size_t>(k)] = reversed_prehistory(source, k);

  CausalPolicy out;
  out.mode = HorizonMode::exact;
  out.x_size = X;
  out.y_size = Y;
  out.horizon = horizon;
  out.x_window = m;

  std::vector<double> row(static_cast<std::size_t>(Y));
  std::vector<int> digits;
  for (int i = 0; i <= horizon; ++i) {
    const long long xs = ipow(X, i + 1);
    const long long ys_prev = ipow(Y, i);
    StochasticKernel stage(ys_prev * xs, Y);
    for (long long xh = 0; xh < xs; ++xh) {
      // Digits of the history, most recent first.
      digits.assign(static_cast<std::size_t>(i) + 1, 0);
      long long rem = xh;
      for (int j = 0; j <= i; ++j) {
        digits[static_cast<std::size_t>(j)] = static_cast<int>(rem % X);
        rem /= X;
      }
      const int have = std::min(m + 1, i + 1);
      long long w_head = 0;
      for (int j = 0; j < have; ++j) w_head = w_head * X + digits[static_cast<std::size_t>(j)];
      const int missing = m + 1 - have;
      std::fill(row.begin(), row.end(), 0.0);
      if (missing == 0) {
        for (int y = 0; y < Y; ++y) row[static_cast<std::size_t>(y)] = K(w_head, y);
      } else {
        const int x0 = digits[static_cast<std::size_t>(i)];
        const StochasticKernel& pk = pre[static_cast<std::size_t>(missing)];
        const long long tuples = ipow(X, missing);
        for (long long t = 0; t < tuples; ++t) {
          const double w = pk(x0, static_cast<int>(t));
          if (w == 0.0) continue;
          const long long widx = w_head * tuples + t;
          for (int y = 0; y < Y; ++y) row[static_cast<std::size_t>(y)] += w * K(widx, y);
        }
      }
      for (long long yh = 0; yh < ys_prev; ++yh) stage.set_row(yh * xs + xh, row);
    }
    out.stage.push_back(std::move(stage));
  }
  return out;
}

JointTable policy_joint(const MarkovSource& source, const CausalPolicy& policy,
                        int horizon) {
  validate_policy(policy);
  CausalPolicy exact;
  const CausalPolicy* p = &policy;
  if (policy.mode == HorizonMode::stationary) {
    if (horizon < 0)
      throw std::invalid_argument("policy_joint: stationary policies need a horizon");
    exact = unroll_stationary(source, policy, horizon);
    p = &exact;
  } else if (horizon >= 0 && horizon != policy.horizon) {
    throw std::invalid_argument("policy_joint: horizon conflicts with the policy");
  }

  const int X = p->x_size;
  const int Y = p->y_size;
  const int n = p->horizon;
  std::vector<double> cur(static_cast<std::size_t>(X) * Y, 0.0);
  for (int x0 = 0; x0 < X; ++x0)
    for (int y0 = 0; y0 < Y; ++y0)
      cur[static_cast<std::size_t>(x0) * Y + y0] =
          source.initial[x0] * p->stage[0](x0, y0);

  for (int i = 1; i <= n; ++i) {
    const long long xs = ipow(X, i);
    const long long ys = ipow(Y, i);
    std::vector<double> next(static_cast<std::size_t>(xs * X) * static_cast<std::size_t>(ys * Y),
                             0.0);
    const StochasticKernel& K = p->stage[static_cast<std::size_t>(i)];
    for (long long xh = 0; xh < xs; ++xh) {
      const int xi = static_cast<int>(xh % X);
      for (long long yh = 0; yh < ys; ++yh) {
        const double pv = cur[static_cast<std::size_t>(xh * ys + yh)];
        if (pv == 0.0) continue;
        for (int xn = 0; xn < X; ++xn) {
          const double pt = pv * source.transition(xi, xn);
          if (pt == 0.0) continue;
          const long long nx = xh * X + xn;
          const long long krow = yh * (xs * X) + nx;
          for (int yn = 0; yn < Y; ++yn)
            next[static_cast<std::size_t>(nx * (ys * Y) + yh * Y + yn)] += pt * K(krow, yn);
        }
      }
    }
    cur = std::move(next);
  }

  return JointTable::from_flat({static_cast<int>(ipow(X, n + 1)), static_cast<int>(ipow(Y, n + 1))},
                               std::move(cur));
}

CausalityReport check_causality(const JointTable& joint, int x_size, int y_size,
                                double threshold_bits) {
  if (joint.dims().size() != 2)
    throw std::invalid_argument("check_causality: expected a two-axis joint");
  const long long XS = joint.dims()[0];
  const long long YS = joint.dims()[1];
  const int nx = string_length(XS, x_size, "check_causality");
  const int ny = string_length(YS, y_size, "check_causality");
  if (nx != ny) throw std::invalid_argument("check_causality: string lengths differ");
  const int n = nx - 1;
  auto J = joint.flat();

  std::vector<double> px(static_cast<std::size_t>(XS), 0.0);
  for (long long xs = 0; xs < XS; ++xs)
    for (long long ys = 0; ys < YS; ++ys)
      px[static_cast<std::size_t>(xs)] += J[static_cast<std::size_t>(xs * YS + ys)];

  CausalityReport report;
  report.threshold_bits = threshold_bits;
  for (int i = 0; i + 1 <= n; ++i) {
    const long long y_pref = ipow(y_size, i + 1);
    const long long y_rest = YS / y_pref;
    const long long x_pref = ipow(x_size, i + 1);
    const long long x_rest = XS / x_pref;

    // A(x^n, y^i), and its marginals over the conditioning blocks.
    std::vector<double> A(static_cast<std::size_t>(XS) * static_cast<std::size_t>(y_pref), 0.0);
    for (long long xs = 0; xs < XS; ++xs)
      for (long long ys = 0; ys < YS; ++ys)
        A[static_cast<std::size_t>(xs * y_pref + ys / y_rest)] +=
            J[static_cast<std::size_t>(xs * YS + ys)];

    std::vector<double> b(static_cast<std::size_t>(x_pref), 0.0);  // P(x^i)
    for (long long xs = 0; xs < XS; ++xs) b[static_cast<std::size_t>(xs / x_rest)] +=
        px[static_cast<std::size_t>(xs)];
    std::vector<double> d(static_cast<std::size_t>(x_pref) * static_cast<std::size_t>(y_pref),
                          0.0);  // P(x^i, y^i)
    for (long long xs = 0; xs < XS; ++xs)
      for (long long yp = 0; yp < y_pref; ++yp)
        d[static_cast<std::size_t>((xs / x_rest) * y_pref + yp)] +=
            A[static_cast<std::size_t>(xs * y_pref + yp)];

    double cmi = 0.0;
    for (long long xs = 0; xs < XS; ++xs) {
      const long long xp = xs / x_rest;
      for (long long yp = 0; yp < y_pref; ++yp) {
        const double a = A[static_cast<std::size_t>(xs * y_pref + yp)];
        if (a <= 0.0) continue;
        cmi += a * std::log((a * b[static_cast<std::size_t>(xp)]) /
                            (px[static_cast<std::size_t>(xs)] *
                             d[static_cast<std::size_t>(xp * y_pref + yp)]));
      }
    }
    report.cmi_bits.push_back(std::max(0.0, cmi) / kLn2);
  }

  for (double v : report.cmi_bits) report.max_cmi_bits = std::max(report.max_cmi_bits, v);
  report.causal = report.max_cmi_bits < threshold_bits;
  return report;
}

CausalityReport check_causality(const MarkovSource& source, const CausalPolicy& policy,
                                int horizon, double threshold_bits) {
  const JointTable joint = policy_joint(source, policy, horizon);
  return check_causality(joint, policy.x_size, policy.y_size, threshold_bits);
}

}  // namespace crdp
