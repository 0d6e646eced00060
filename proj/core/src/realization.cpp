#include "crdp/realization.hpp"

#include <algorithm>
#include <cmath>

#include "crdp/causality.hpp"
#include "crdp/rng.hpp"

namespace crdp {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void validate_kernel(const CascadeKernel& k, const char* what) {
  if (k.in_size < 1 || k.out_size < 1)
    throw std::invalid_argument(std::string(what) + ": bad alphabet size");
  if (k.in_window < 1 || k.out_window < 0)
    throw std::invalid_argument(std::string(what) + ": bad window");
  if (k.rows.rows() != k.in_states() * k.own_states() || k.rows.cols() != k.out_size)
    throw std::invalid_argument(std::string(what) + ": kernel shape mismatch");
}

CascadeKernel copy_kernel(int size) {
  CascadeKernel k;
  k.in_size = k.out_size = size;
  k.in_window = 1;
  k.out_window = 0;
  k.rows = StochasticKernel(size, size);
  std::vector<double> row(static_cast<std::size_t>(size), 0.0);
  for (int s = 0; s < size; ++s) {
    row[static_cast<std::size_t>(s)] = 1.0;
    k.rows.set_row(s, row);
    row[static_cast<std::size_t>(s)] = 0.0;
  }
  return k;
}

}  // namespace

long long CascadeKernel::row_index(std::span<const int> in_recent,
                                   std::span<const int> out_recent) const {
  if (static_cast<int>(in_recent.size()) != in_window ||
      static_cast<int>(out_recent.size()) != out_window)
    throw std::invalid_argument("CascadeKernel: window arity mismatch");
  long long in_idx = 0;
  for (int s : in_recent) in_idx = in_idx * in_size + s;
  long long out_idx = 0;
  for (int s : out_recent) out_idx = out_idx * out_size + s;
  return in_idx * own_states() + out_idx;
}

void validate_realization(const RealizationSpec& realization, int x_size) {
  validate_kernel(realization.encoder, "encoder");
  validate_kernel(realization.channel, "channel");
  validate_kernel(realization.decoder, "decoder");
  require(realization.encoder.in_size == x_size,
          "encoder input alphabet does not match the source");
  require(realization.channel.in_size == realization.encoder.out_size,
          "channel input alphabet does not match the encoder output");
  require(realization.decoder.in_size == realization.channel.out_size,
          "decoder input alphabet does not match the channel output");
}

RealizationSpec identity_realization(const CausalPolicy& policy) {
  validate_policy(policy);
  require(policy.mode == HorizonMode::stationary,
          "identity_realization: windowed policies only");
  RealizationSpec r;
  r.encoder = copy_kernel(policy.x_size);
  r.channel.in_size = policy.x_size;
  r.channel.out_size = policy.y_size;
  r.channel.in_window = policy.x_window + 1;
  r.channel.out_window = 0;
  r.channel.rows = policy.stage[0];
  r.decoder = copy_kernel(policy.y_size);
  return r;
}

RealizationSpec bsc_realization(const BinaryExampleParams& params, double d) {
  const double w = indicator_mass(params);
  if (std::abs(w - 0.5) > 1e-9)
    throw std::invalid_argument(
        "bsc_realization: needs the symmetric case with event mass one half");
  if (!(d > 0.0 && d < 0.5))
    throw std::invalid_argument("bsc_realization: need 0 < d < 1/2");

  RealizationSpec r;
  r.encoder.in_size = 2;
  r.encoder.out_size = 2;
  r.encoder.in_window = 2;
  r.encoder.out_window = 0;
  r.encoder.rows = StochasticKernel::from_rows(
      {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});  // flag two ones in a row
  r.channel.in_size = 2;
  r.channel.out_size = 2;
  r.channel.in_window = 1;
  r.channel.out_window = 0;
  r.channel.rows = StochasticKernel::from_rows({{1.0 - d, d}, {d, 1.0 - d}});
  r.decoder = copy_kernel(2);
  return r;
}

Trace simulate(const MarkovSource& source, const DistortionSpec& dist,
               const RealizationSpec& realization, long long steps, std::uint64_t seed) {
  validate_realization(realization, source.alphabet.size);
  require(dist.x_size() == source.alphabet.size,
          "simulate: distortion source alphabet mismatch");
  require(dist.y_size() == realization.decoder.out_size,
          "simulate: distortion reconstruction alphabet mismatch");
  require(steps >= 1, "simulate: need at least one step");

  const CascadeKernel& enc = realization.encoder;
  const CascadeKernel& ch = realization.channel;
  const CascadeKernel& dec = realization.decoder;

  // Warm-up long enough that every window at step 0 sees sampled symbols.
  const int warm = std::max({ch.in_window + dec.in_window - 2, enc.out_window,
                             ch.out_window, dec.out_window, dist.y_window()});
  const int xpre = std::max(warm + enc.in_window - 1, dist.x_window());

  std::vector<int> xs(static_cast<std::size_t>(xpre + steps), 0);
  std::vector<int> as(static_cast<std::size_t>(warm + steps), 0);
  std::vector<int> bs(static_cast<std::size_t>(warm + steps), 0);
  std::vector<int> ys(static_cast<std::size_t>(warm + steps), 0);
  auto get = [](const std::vector<int>& v, long long t, int off) {
    const long long i = t + off;
    return (i < 0 || i >= static_cast<long long>(v.size())) ? 0
                                                            : v[static_cast<std::size_t>(i)];
  };

  SplitMix64 rng(seed);
  xs[static_cast<std::size_t>(xpre)] = rng.sample(source.initial.probs());
  const StochasticKernel back = reversed_prehistory(source, 1);
  for (int k = 1; k <= xpre; ++k)
    xs[static_cast<std::size_t>(xpre - k)] =
        rng.sample(back.row(xs[static_cast<std::size_t>(xpre - k + 1)]));

  std::vector<int> win;
  std::vector<int> own;
  auto fill_window = [&](std::vector<int>& dst, const std::vector<int>& v, long long t,
                         int off, int len) {
    dst.assign(static_cast<std::size_t>(len), 0);
    for (int j = 0; j < len; ++j) dst[static_cast<std::size_t>(j)] = get(v, t - j, off);
  };
  auto run_stage = [&](long long t) {
    fill_window(win, xs, t, xpre, enc.in_window);
    fill_window(own, as, t - 1, warm, enc.out_window);
    as[static_cast<std::size_t>(t + warm)] =
        rng.sample(enc.rows.row(enc.row_index(win, own)));
    fill_window(win, as, t, warm, ch.in_window);
    fill_window(own, bs, t - 1, warm, ch.out_window);
    bs[static_cast<std::size_t>(t + warm)] =
        rng.sample(ch.rows.row(ch.row_index(win, own)));
    fill_window(win, bs, t, warm, dec.in_window);
    fill_window(own, ys, t - 1, warm, dec.out_window);
    ys[static_cast<std::size_t>(t + warm)] =
        rng.sample(dec.rows.row(dec.row_index(win, own)));
  };

  for (long long t = -warm; t < 0; ++t) run_stage(t);

  Trace trace;
  trace.seed = seed;
  trace.rng_name = SplitMix64::name();
  trace.x.reserve(static_cast<std::size_t>(steps));
  trace.rho.reserve(static_cast<std::size_t>(steps));
  std::vector<int> xwin, ywin;
  for (long long t = 0; t < steps; ++t) {
    if (t > 0)
      xs[static_cast<std::size_t>(t + xpre)] =
          rng.sample(source.transition.row(xs[static_cast<std::size_t>(t + xpre - 1)]));
    run_stage(t);
    fill_window(xwin, xs, t, xpre, dist.x_window() + 1);
    fill_window(ywin, ys, t, warm, dist.y_window() + 1);
    trace.x.push_back(xs[static_cast<std::size_t>(t + xpre)]);
    trace.a.push_back(as[static_cast<std::size_t>(t + warm)]);
    trace.b.push_back(bs[static_cast<std::size_t>(t + warm)]);
    trace.y.push_back(ys[static_cast<std::size_t>(t + warm)]);
    trace.rho.push_back(dist.value(xwin, ywin));
  }
  for (int k = 1; k <= xpre; ++k)
    trace.x_prehistory.push_back(xs[static_cast<std::size_t>(xpre - k)]);
  return trace;
}

EmpiricalStats empirical_stats(const Trace& trace, int y_size) {
  require(y_size >= 1, "empirical_stats: bad alphabet size");
  EmpiricalStats st;
  st.n = static_cast<long long>(trace.rho.size());
  st.marginal_y.assign(static_cast<std::size_t>(y_size), 0.0);
  if (st.n == 0) return st;

  double sum = 0.0;
  for (double v : trace.rho) sum += v;
  st.mean_distortion = sum / static_cast<double>(st.n);
  if (st.n >= 2) {
    double ss = 0.0;
    for (double v : trace.rho) {
      const double d = v - st.mean_distortion;
      ss += d * d;
    }
    st.std_err = std::sqrt(ss / static_cast<double>(st.n - 1) / static_cast<double>(st.n));
  }
  for (int y : trace.y) {
    require(y >= 0 && y < y_size, "empirical_stats: reconstruction symbol out of range");
    st.marginal_y[static_cast<std::size_t>(y)] += 1.0;
  }
  for (double& v : st.marginal_y) v /= static_cast<double>(st.n);
  return st;
}

RealizationReport verify_realization(const MarkovSource& source, const CausalPolicy& policy,
                                     const RealizationSpec& realization, int horizon) {
  validate_realization(realization, source.alphabet.size);
  validate_policy(policy);
  const CascadeKernel& enc = realization.encoder;
  const CascadeKernel& ch = realization.channel;
  const CascadeKernel& dec = realization.decoder;
  require(enc.out_window == 0 && ch.out_window == 0 && dec.out_window == 0,
          "verify_realization: components must not condition on their own outputs");
  require(enc.in_window <= 2 && ch.in_window <= 2 && dec.in_window <= 2,
          "verify_realization: input windows above 2 are not supported");
  require(horizon >= 0 && horizon <= 8, "verify_realization: horizon limited to 8");
  require(policy.y_size == dec.out_size,
          "verify_realization: reconstruction alphabet mismatch");

  CausalPolicy unrolled;
  const CausalPolicy* target = &policy;
  if (policy.mode == HorizonMode::stationary) {
    unrolled = unroll_stationary(source, policy, horizon);
    target = &unrolled;
  } else {
    require(policy.horizon == horizon, "verify_realization: horizon conflicts with policy");
  }

  const int X = source.alphabet.size;
  const int A = enc.out_size;
  const int B = ch.out_size;
  const int Y = dec.out_size;
  const int We = enc.in_window, Wc = ch.in_window, Wd = dec.in_window;
  const long long AW = ipow(A, Wc - 1);  // carried code symbols
  const long long BW = ipow(B, Wd - 1);  // carried received symbols

  RealizationReport report;
  report.stage_tv.assign(static_cast<std::size_t>(horizon) + 1, 0.0);

  // cond[((xh * Y^i + yh) * AW + aw) * BW + bw] = P(aw, bw | x^i, y^{i-1});
  // blocks of dead conditions stay identically zero.
  std::vector<double> cond;
  std::vector<double> cvals(static_cast<std::size_t>(Y));

  // Stage 0 folds the sampled prehistory: source symbols from the reversed
  // chain, then enough warm-up code/received symbols to fill every window.
  {
    const int Lx = (We - 1) + (Wc - 1) + (Wd - 1);
    const int wu = (Wc - 1) + (Wd - 1);   // warm-up code symbols a_{-1..-wu}
    const int wb = Wd - 1;                // warm-up received symbols b_{-1..-wb}
    const StochasticKernel pre = reversed_prehistory(source, Lx);
    const long long pre_tuples = ipow(X, Lx);
    const long long a_tuples = ipow(A, wu);
    const long long b_tuples = ipow(B, wb);

    std::vector<double> c0(static_cast<std::size_t>(X) * Y, 0.0);
    std::vector<double> n1(
        static_cast<std::size_t>(X) * Y * static_cast<std::size_t>(AW * BW), 0.0);

    std::vector<int> xat(static_cast<std::size_t>(Lx) + 1, 0);  // xat[k] = x_{-k}
    std::vector<int> aat(static_cast<std::size_t>(wu) + 1, 0);  // aat[k] = a_{-k}
    std::vector<int> bat(static_cast<std::size_t>(wb) + 1, 0);  // bat[k] = b_{-k}
    std::vector<int> wtmp;
    auto enc_row_at = [&](int t_back) {  // encoder row for time -t_back
      wtmp.assign(static_cast<std::size_t>(We), 0);
      for (int j = 0; j < We; ++j) {
        const int k = t_back + j;
        wtmp[static_cast<std::size_t>(j)] =
            k <= Lx ? xat[static_cast<std::size_t>(k)] : 0;
      }
      long long idx = 0;
      for (int v : wtmp) idx = idx * X + v;
      return idx;
    };
    auto ch_row_at = [&](int t_back) {
      wtmp.assign(static_cast<std::size_t>(Wc), 0);
      for (int j = 0; j < Wc; ++j) {
        const int k = t_back + j;
        wtmp[static_cast<std::size_t>(j)] =
            k <= wu ? aat[static_cast<std::size_t>(k)] : 0;
      }
      long long idx = 0;
      for (int v : wtmp) idx = idx * A + v;
      return idx;
    };

    for (int x0 = 0; x0 < X; ++x0) {
      xat[0] = x0;
      for (long long pt = 0; pt < pre_tuples; ++pt) {
        const double wpre = Lx == 0 ? 1.0 : pre(x0, static_cast<int>(pt));
        if (wpre == 0.0) continue;
        for (int k = 1; k <= Lx; ++k)
          xat[static_cast<std::size_t>(k)] =
              static_cast<int>((pt / ipow(X, Lx - k)) % X);

        for (long long at = 0; at < a_tuples; ++at) {
          for (int k = 1; k <= wu; ++k)
            aat[static_cast<std::size_t>(k)] =
                static_cast<int>((at / ipow(A, wu - k)) % A);
          double wa = wpre;
          for (int k = wu; k >= 1 && wa != 0.0; --k)
            wa *= enc.rows(enc_row_at(k), aat[static_cast<std::size_t>(k)]);
          if (wa == 0.0) continue;

          for (long long bt = 0; bt < b_tuples; ++bt) {
            for (int k = 1; k <= wb; ++k)
              bat[static_cast<std::size_t>(k)] =
                  static_cast<int>((bt / ipow(B, wb - k)) % B);
            double wab = wa;
            for (int k = wb; k >= 1 && wab != 0.0; --k)
              wab *= ch.rows(ch_row_at(k), bat[static_cast<std::size_t>(k)]);
            if (wab == 0.0) continue;

            // Stage-0 emissions.
            for (int a0 = 0; a0 < A; ++a0) {
              aat[0] = a0;
              const double w1 = wab * enc.rows(enc_row_at(0), a0);
              if (w1 == 0.0) continue;
              long long awn = 0;  // carried tuple (a_0, ..., a_{2-Wc})
              for (int j = 0; j < Wc - 1; ++j)
                awn = awn * A + aat[static_cast<std::size_t>(j)];
              for (int b0 = 0; b0 < B; ++b0) {
                bat[0] = b0;
                const double w2 = w1 * ch.rows(ch_row_at(0), b0);
                if (w2 == 0.0) continue;
                long long bwn = 0;
                for (int j = 0; j < Wd - 1; ++j)
                  bwn = bwn * B + bat[static_cast<std::size_t>(j)];
                long long drow = 0;
                for (int j = 0; j < Wd; ++j) drow = drow * B + bat[static_cast<std::size_t>(j)];
                for (int y = 0; y < Y; ++y) {
                  const double w3 = w2 * dec.rows(drow, y);
                  if (w3 == 0.0) continue;
                  c0[static_cast<std::size_t>(x0 * Y + y)] += w3;
                  n1[static_cast<std::size_t>(((x0 * Y + y) * AW + awn) * BW + bwn)] += w3;
                }
              }
            }
          }
        }
      }
    }

    const StochasticKernel& U0 = target->stage[0];
    for (int x0 = 0; x0 < X; ++x0) {
      double tv = 0.0;
      for (int y = 0; y < Y; ++y)
        tv += std::abs(c0[static_cast<std::size_t>(x0 * Y + y)] - U0(x0, y));
      report.stage_tv[0] = std::max(report.stage_tv[0], 0.5 * tv);
    }

    // Condition on (x^1, y^0); the fresh source symbol carries no information
    // about the carried code/received symbols, so blocks repeat over it.
    cond.assign(static_cast<std::size_t>(X * X) * Y * static_cast<std::size_t>(AW * BW),
                0.0);
    for (int x0 = 0; x0 < X; ++x0)
      for (int y0 = 0; y0 < Y; ++y0) {
        const double mass = c0[static_cast<std::size_t>(x0 * Y + y0)];
        if (mass <= 0.0) continue;
        for (long long ab = 0; ab < AW * BW; ++ab) {
          const double v =
              n1[static_cast<std::size_t>((x0 * Y + y0) * AW * BW + ab)] / mass;
          if (v == 0.0) continue;
          for (int x1 = 0; x1 < X; ++x1)
            cond[static_cast<std::size_t>((((x0 * X + x1) * Y + y0)) *
                                          (AW * BW) + ab)] = v;
        }
      }
  }

  // Later stages: every window lies inside the explicit histories.
  std::vector<double> acc(static_cast<std::size_t>(Y) * static_cast<std::size_t>(AW * BW));
  for (int i = 1; i <= horizon; ++i) {
    const long long xs = ipow(X, i + 1);
    const long long ys = ipow(Y, i);
    const StochasticKernel& Ui = target->stage[static_cast<std::size_t>(i)];
    std::vector<double> next;
    if (i < horizon)
      next.assign(static_cast<std::size_t>(xs * X) * static_cast<std::size_t>(ys * Y) *
                      static_cast<std::size_t>(AW * BW),
                  0.0);

    for (long long xh = 0; xh < xs; ++xh) {
      long long erow = 0;
      for (int j = 0; j < We; ++j) erow = erow * X + static_cast<int>((xh / ipow(X, j)) % X);
      for (long long yh = 0; yh < ys; ++yh) {
        std::fill(cvals.begin(), cvals.end(), 0.0);
        std::fill(acc.begin(), acc.end(), 0.0);
        const std::size_t base =
            static_cast<std::size_t>((xh * ys + yh) * (AW * BW));
        double block = 0.0;
        for (long long aw = 0; aw < AW; ++aw)
          for (long long bw = 0; bw < BW; ++bw) {
            const double v = cond[base + static_cast<std::size_t>(aw * BW + bw)];
            if (v == 0.0) continue;
            block += v;
            for (int ai = 0; ai < A; ++ai) {
              const double e1 = v * enc.rows(erow, ai);
              if (e1 == 0.0) continue;
              const long long crow = ai * AW + aw;
              const long long awn = Wc > 1 ? ai * (AW / A) + aw / A : 0;
              for (int bi = 0; bi < B; ++bi) {
                const double e2 = e1 * ch.rows(crow, bi);
                if (e2 == 0.0) continue;
                const long long drow = bi * BW + bw;
                const long long bwn = Wd > 1 ? bi * (BW / B) + bw / B : 0;
                for (int y = 0; y < Y; ++y) {
                  const double e3 = e2 * dec.rows(drow, y);
                  if (e3 == 0.0) continue;
                  cvals[static_cast<std::size_t>(y)] += e3;
                  acc[static_cast<std::size_t>(y * (AW * BW) + awn * BW + bwn)] += e3;
                }
              }
            }
          }
        if (block <= 0.0) continue;  // unreachable condition
        double tv = 0.0;
        for (int y = 0; y < Y; ++y)
          tv += std::abs(cvals[static_cast<std::size_t>(y)] - Ui(yh * xs + xh, y));
        report.stage_tv[static_cast<std::size_t>(i)] =
            std::max(report.stage_tv[static_cast<std::size_t>(i)], 0.5 * tv);

        if (i < horizon) {
          // Divide each child block by the emission mass of its branch; the
          // fresh source symbol is independent of the carried state.
          for (int y = 0; y < Y; ++y) {
            const double cy = cvals[static_cast<std::size_t>(y)];
            if (cy <= 0.0) continue;
            for (long long ab = 0; ab < AW * BW; ++ab) {
              const double nv = acc[static_cast<std::size_t>(y * (AW * BW) + ab)] / cy;
              if (nv == 0.0) continue;
              for (int xn = 0; xn < X; ++xn)
                next[static_cast<std::size_t>(
                         ((xh * X + xn) * (ys * Y) + yh * Y + y) * (AW * BW)) +
                     static_cast<std::size_t>(ab)] = nv;
            }
          }
        }
      }
    }
    cond = std::move(next);
  }

  for (double v : report.stage_tv) report.max_tv = std::max(report.max_tv, v);
  return report;
}

CascadeFilter::CascadeFilter(const MarkovSource& source, const RealizationSpec& realization)
    : source_(&source), enc_(realization.encoder), ch_(realization.channel) {
  validate_realization(realization, source.alphabet.size);
  require(enc_.out_window == 0 && ch_.out_window == 0,
          "CascadeFilter: encoder and channel must not condition on their own outputs");
  x_size_ = source.alphabet.size;
  a_size_ = enc_.out_size;
  const int We = enc_.in_window, Wc = ch_.in_window;
  xw_states_ = ipow(x_size_, We);
  aw_states_ = ipow(a_size_, Wc);
  post_.assign(static_cast<std::size_t>(xw_states_ * aw_states_), 0.0);

  // Prior over (x window, code window) at step 0, before any observation:
  // stationary law for the source window, encoder applied along the tail.
  const int L = We + Wc - 1;
  const JointTable wj = window_joint(source, L - 1);
  std::vector<int> digits(static_cast<std::size_t>(L));
  std::vector<int> atup(static_cast<std::size_t>(Wc));
  const long long tuples = ipow(x_size_, L);
  const long long a_tuples = aw_states_;
  for (long long f = 0; f < tuples; ++f) {
    const double w = wj.flat()[static_cast<std::size_t>(f)];
    if (w == 0.0) continue;
    for (int k = 0; k < L; ++k)
      digits[static_cast<std::size_t>(k)] = static_cast<int>((f / ipow(x_size_, L - 1 - k)) % x_size_);
    long long xw = 0;
    for (int j = 0; j < We; ++j) xw = xw * x_size_ + digits[static_cast<std::size_t>(j)];
    for (long long at = 0; at < a_tuples; ++at) {
      for (int k = 0; k < Wc; ++k)
        atup[static_cast<std::size_t>(k)] =
            static_cast<int>((at / ipow(a_size_, Wc - 1 - k)) % a_size_);
      double p = w;
      for (int k = 0; k < Wc && p != 0.0; ++k) {
        long long erow = 0;
        for (int j = 0; j < We; ++j)
          erow = erow * x_size_ + digits[static_cast<std::size_t>(k + j)];
        p *= enc_.rows(erow, atup[static_cast<std::size_t>(k)]);
      }
      if (p == 0.0) continue;
      post_[static_cast<std::size_t>(xw * aw_states_ + at)] += p;
    }
  }
}

Distribution CascadeFilter::update(int b) {
  require(b >= 0 && b < ch_.out_size, "CascadeFilter: received symbol out of range");
  const int X = x_size_, A = a_size_;
  const long long xw_top = xw_states_ / X;

  if (!first_) {
    work_.assign(post_.size(), 0.0);
    for (long long xw = 0; xw < xw_states_; ++xw) {
      const int x_recent = static_cast<int>(xw / xw_top);
      for (long long aw = 0; aw < aw_states_; ++aw) {
        const double v = post_[static_cast<std::size_t>(xw * aw_states_ + aw)];
        if (v == 0.0) continue;
        for (int xn = 0; xn < X; ++xn) {
          const double pt = v * source_->transition(x_recent, xn);
          if (pt == 0.0) continue;
          const long long xwn = static_cast<long long>(xn) * xw_top + xw / X;
          for (int an = 0; an < A; ++an) {
            const double pa = pt * enc_.rows(xwn, an);
            if (pa == 0.0) continue;
            const long long awn = static_cast<long long>(an) * (aw_states_ / A) + aw / A;
            work_[static_cast<std::size_t>(xwn * aw_states_ + awn)] += pa;
          }
        }
      }
    }
    post_.swap(work_);
  }
  first_ = false;

  double total = 0.0;
  for (long long xw = 0; xw < xw_states_; ++xw)
    for (long long aw = 0; aw < aw_states_; ++aw) {
      double& v = post_[static_cast<std::size_t>(xw * aw_states_ + aw)];
      v *= ch_.rows(aw, b);
      total += v;
    }
  if (!(total > 0.0))
    throw ImpossibleEvidenceError("CascadeFilter: observation has zero probability");
  for (double& v : post_) v /= total;
  return source_posterior();
}

Distribution CascadeFilter::source_posterior() const {
  const long long xw_top = xw_states_ / x_size_;
  std::vector<double> p(static_cast<std::size_t>(x_size_), 0.0);
  for (long long xw = 0; xw < xw_states_; ++xw) {
    const int x_recent = static_cast<int>(xw / xw_top);
    for (long long aw = 0; aw < aw_states_; ++aw)
      p[static_cast<std::size_t>(x_recent)] +=
          post_[static_cast<std::size_t>(xw * aw_states_ + aw)];
  }
  return Distribution(std::move(p));
}

std::vector<Distribution> bayes_filter(const MarkovSource& source,
                                       const RealizationSpec& realization,
                                       std::span<const int> received) {
  CascadeFilter filter(source, realization);
  std::vector<Distribution> out;
  out.reserve(received.size());
  for (int b : received) out.push_back(filter.update(b));
  return out;
}

}  // namespace crdp
