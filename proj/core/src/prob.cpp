#include "crdp/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace crdp {

namespace {

constexpr double kLog2 = 0.6931471805599453;

double check_mass(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (std::isnan(v)) throw std::invalid_argument(std::string(what) + ": NaN entry");
    if (v < -kSumTol) throw std::invalid_argument(std::string(what) + ": negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRenormTol)
    throw std::invalid_argument(std::string(what) + ": mass " + std::to_string(sum) +
                                " not within renormalization tolerance of 1");
  return sum;
}

// Clamp float-noise negatives, renormalize when mass is off by more than kSumTol.
void normalize_inplace(std::span<double> p, double sum) {
  for (double& v : p)
    if (v < 0.0) v = 0.0;
  if (std::abs(sum - 1.0) > kSumTol) {
    for (double& v : p) v /= sum;
  }
}

}  // namespace

long long ipow(int base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

Alphabet::Alphabet(int n) : size(n) {
  if (n < 1) throw std::invalid_argument("Alphabet: size must be >= 1");
}

Alphabet::Alphabet(int n, std::vector<std::string> names) : size(n), labels(std::move(names)) {
  if (n < 1) throw std::invalid_argument("Alphabet: size must be >= 1");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("Alphabet: label count must equal size");
}

Distribution::Distribution(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw std::invalid_argument("Distribution: empty");
  double sum = check_mass(p_, "Distribution");
  normalize_inplace(p_, sum);
}

Distribution Distribution::uniform(int n) {
  return Distribution(std::vector<double>(n, 1.0 / n));
}

Distribution Distribution::point_mass(int n, int at) {
  std::vector<double> p(n, 0.0);
  p.at(at) = 1.0;
  return Distribution(std::move(p));
}

StochasticKernel::StochasticKernel(long long rows, int cols) : cols_(cols) {
  if (rows < 0 || cols < 1) throw std::invalid_argument("StochasticKernel: bad shape");
  v_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

StochasticKernel StochasticKernel::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("StochasticKernel: no rows");
  StochasticKernel k(static_cast<long long>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) k.set_row(static_cast<long long>(r), rows[r]);
  return k;
}

StochasticKernel StochasticKernel::from_flat(long long rows, int cols,
                                             std::vector<double> values) {
  if (static_cast<long long>(values.size()) != rows * cols)
    throw std::invalid_argument("StochasticKernel: flat size mismatch");
  StochasticKernel k(rows, cols);
  for (long long r = 0; r < rows; ++r)
    k.set_row(r, std::span<const double>(values.data() + r * cols, static_cast<std::size_t>(cols)));
  return k;
}

void StochasticKernel::set_row(long long r, std::span<const double> values) {
  if (static_cast<int>(values.size()) != cols_)
    throw std::invalid_argument("StochasticKernel: row width mismatch");
  double sum = check_mass(values, "StochasticKernel row");
  double* dst = v_.data() + static_cast<std::size_t>(r) * cols_;
  std::copy(values.begin(), values.end(), dst);
  normalize_inplace({dst, static_cast<std::size_t>(cols_)}, sum);
}

JointTable::JointTable(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("JointTable: no axes");
  std::size_t n = 1;
  strides_.assign(dims_.size(), 1);
  for (int i = static_cast<int>(dims_.size()) - 1; i >= 0; --i) {
    if (dims_[i] < 1) throw std::invalid_argument("JointTable: bad axis size");
    strides_[i] = n;
    n *= static_cast<std::size_t>(dims_[i]);
  }
  p_.assign(n, 0.0);
}

JointTable JointTable::from_flat(std::vector<int> dims, std::vector<double> probs) {
  JointTable t(std::move(dims));
  if (probs.size() != t.p_.size()) throw std::invalid_argument("JointTable: flat size mismatch");
  t.p_ = std::move(probs);
  t.validate();
  return t;
}

std::size_t JointTable::offset(std::span<const int> idx) const {
  if (idx.size() != dims_.size()) throw std::invalid_argument("JointTable: index arity mismatch");
  std::size_t o = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= dims_[i]) throw std::out_of_range("JointTable: index out of range");
    o += strides_[i] * static_cast<std::size_t>(idx[i]);
  }
  return o;
}

double JointTable::mass() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

JointTable JointTable::marginal(std::span<const int> axes) const {
  std::vector<int> out_dims;
  for (int a : axes) out_dims.push_back(dims_.at(static_cast<std::size_t>(a)));
  JointTable out(out_dims);
  std::vector<int> idx(dims_.size(), 0);
  for (std::size_t f = 0; f < p_.size(); ++f) {
    std::size_t rem = f;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      idx[i] = static_cast<int>(rem / strides_[i]);
      rem %= strides_[i];
    }
    std::size_t o = 0;
    for (std::size_t i = 0; i < axes.size(); ++i)
      o += out.strides_[i] * static_cast<std::size_t>(idx[static_cast<std::size_t>(axes[i])]);
    out.p_[o] += p_[f];
  }
  return out;
}

void JointTable::validate() {
  double sum = check_mass(p_, "JointTable");
  normalize_inplace(p_, sum);
}

MarkovSource::MarkovSource(Alphabet a, Distribution init, StochasticKernel trans)
    : alphabet(std::move(a)), initial(std::move(init)), transition(std::move(trans)) {
  if (initial.size() != alphabet.size)
    throw std::invalid_argument("MarkovSource: initial distribution size mismatch");
  if (!transition.is_square() || transition.cols() != alphabet.size)
    throw std::invalid_argument("MarkovSource: transition must be square over the alphabet");
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("binary_entropy: p outside [0,1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double entropy_of(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

double entropy(const Distribution& p) { return entropy_of(p.probs()); }

double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: alphabet mismatch");
  double d = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

double mutual_information(const JointTable& joint) {
  if (joint.dims().size() != 2)
    throw std::invalid_argument("mutual_information: expected a two-axis joint");
  const int nx = joint.dims()[0], ny = joint.dims()[1];
  std::vector<double> px(nx, 0.0), py(ny, 0.0);
  auto flat = joint.flat();
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      double v = flat[static_cast<std::size_t>(x) * ny + y];
      px[x] += v;
      py[y] += v;
    }
  double mi = 0.0;
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      double v = flat[static_cast<std::size_t>(x) * ny + y];
      if (v > 0.0) mi += v * std::log2(v / (px[x] * py[y]));
    }
  return std::max(mi, 0.0);
}

bool is_ergodic(const MarkovSource& source) {
  const int n = source.alphabet.size;
  const auto& T = source.transition;
  // Irreducibility: the positive-entry digraph must be strongly connected.
  auto reachable = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        double w = forward ? T(u, v) : T(v, u);
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  if (!reachable(true) || !reachable(false)) return false;
  // Aperiodicity: gcd over edges of (level[u] + 1 - level[v]) in a BFS tree.
  std::vector<int> level(n, -1);
  std::queue<int> q;
  q.push(0);
  level[0] = 0;
  long long g = 0;
  std::vector<std::pair<int, int>> edges;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (T(u, v) <= 0.0) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
      edges.emplace_back(u, v);
    }
  }
  for (auto [u, v] : edges) g = std::gcd(g, static_cast<long long>(level[u] + 1 - level[v]));
  return g == 1;
}

Distribution stationary_distribution(const MarkovSource& source) {
  if (!is_ergodic(source))
    throw ErgodicityError("stationary_distribution: chain is not irreducible and aperiodic");
  const int n = source.alphabet.size;
  const auto& T = source.transition;
  // Solve (T^t - I) pi = 0 with the last equation replaced by sum(pi) = 1,
  // by Gaussian elimination with partial pivoting.
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (int r = 0; r < n - 1; ++r) {
    for (int c = 0; c < n; ++c) A[r][c] = T(c, r) - (r == c ? 1.0 : 0.0);
    A[r][n] = 0.0;
  }
  for (int c = 0; c < n; ++c) A[n - 1][c] = 1.0;
  A[n - 1][n] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    if (std::abs(A[col][col]) < 1e-300)
      throw ErgodicityError("stationary_distribution: singular system");
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (int c = col; c <= n; ++c) A[r][c] -= f * A[col][c];
    }
  }
  std::vector<double> pi(n);
  for (int i = 0; i < n; ++i) pi[i] = A[i][n] / A[i][i];
  Distribution d(std::move(pi));
  // Residual guard; the linear solve on these sizes is exact to roundoff.
  for (int j = 0; j < n; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) col += d[i] * T(i, j);
    if (std::abs(col - d[j]) > 1e-12)
      throw ErgodicityError("stationary_distribution: residual above 1e-12");
  }
  return d;
}

JointTable steady_pair_joint(const MarkovSource& source) { return window_joint(source, 1); }

JointTable window_joint(const MarkovSource& source, int window) {
  if (window < 0) throw std::invalid_argument("window_joint: negative window");
  Distribution pi = stationary_distribution(source);
  const int n = source.alphabet.size;
  std::vector<int> dims(static_cast<std::size_t>(window) + 1, n);
  JointTable t(dims);
  auto flat = t.flat_mut();
  const long long total = ipow(n, window + 1);
  std::vector<int> sym(static_cast<std::size_t>(window) + 1);
  for (long long f = 0; f < total; ++f) {
    // Axis order is most recent first: (x_i, x_{i-1}, ..., x_{i-window}).
    long long rem = f;
    for (int a = window; a >= 0; --a) {
      sym[static_cast<std::size_t>(a)] = static_cast<int>(rem % n);
      rem /= n;
    }
    double p = pi[sym[static_cast<std::size_t>(window)]];
    for (int a = window; a > 0; --a)
      p *= source.transition(sym[static_cast<std::size_t>(a)],
                             sym[static_cast<std::size_t>(a - 1)]);
    flat[static_cast<std::size_t>(f)] = p;
  }
  return t;
}

StochasticKernel reversed_prehistory(const MarkovSource& source, int depth) {
  if (depth < 0) throw std::invalid_argument("reversed_prehistory: negative depth");
  const int n = source.alphabet.size;
  Distribution pi = stationary_distribution(source);
  // One-step reversed kernel B(prev | cur) = pi(prev) T(cur | prev) / pi(cur).
  StochasticKernel back(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int cur = 0; cur < n; ++cur) {
    for (int prev = 0; prev < n; ++prev)
      row[static_cast<std::size_t>(prev)] = pi[prev] * source.transition(prev, cur) / pi[cur];
    back.set_row(cur, row);
  }
  const long long cols = ipow(n, depth);
  if (cols > std::numeric_limits<int>::max())
    throw std::invalid_argument("reversed_prehistory: depth too large");
  StochasticKernel out(n, static_cast<int>(cols));
  std::vector<double> tuple(static_cast<std::size_t>(cols));
  for (int x0 = 0; x0 < n; ++x0) {
    for (long long t = 0; t < cols; ++t) {
      double p = 1.0;
      int cur = x0;
      for (int j = 0; j < depth; ++j) {
        const int prev = static_cast<int>((t / ipow(n, depth - 1 - j)) % n);
        p *= back(cur, prev);
        cur = prev;
      }
      tuple[static_cast<std::size_t>(t)] = p;
    }
    out.set_row(x0, tuple);
  }
  return out;
}

MarkovSource binary_markov_source(double p, double q) {
  if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
    throw std::invalid_argument("binary_markov_source: need 0 < p,q < 1");
  Alphabet a(2);
  StochasticKernel t = StochasticKernel::from_rows({{1.0 - p, p}, {q, 1.0 - q}});
  Distribution init({q / (p + q), p / (p + q)});
  return MarkovSource(std::move(a), std::move(init), std::move(t));
}

}  // namespace crdp
