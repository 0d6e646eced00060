#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crdp {

// Thrown when an operation requires an irreducible aperiodic chain and the
// given transition matrix is not one.
struct ErgodicityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Probability vectors are accepted as-is when their mass is within kSumTol of
// one, silently renormalized when within kRenormTol, and rejected otherwise.
inline constexpr double kSumTol = 1e-12;
inline constexpr double kRenormTol = 1e-9;

struct Alphabet {
  int size = 0;
  std::vector<std::string> labels;  // display only; empty or one per symbol

  Alphabet() = default;
  explicit Alphabet(int n);
  Alphabet(int n, std::vector<std::string> names);
};

inline bool operator==(const Alphabet& a, const Alphabet& b) { return a.size == b.size; }

class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
  std::span<const double> probs() const { return p_; }

  static Distribution uniform(int n);
  static Distribution point_mass(int n, int at);

 private:
  std::vector<double> p_;
};

// Row-stochastic matrix; every row obeys the Distribution mass rules.
class StochasticKernel {
 public:
  StochasticKernel() = default;
  StochasticKernel(long long rows, int cols);  // rows start as zero and must be set

  static StochasticKernel from_rows(const std::vector<std::vector<double>>& rows);
  static StochasticKernel from_flat(long long rows, int cols, std::vector<double> values);

  long long rows() const { return cols_ == 0 ? 0 : static_cast<long long>(v_.size()) / cols_; }
  int cols() const { return cols_; }
  std::span<const double> row(int r) const { return row(static_cast<long long>(r)); }
  std::span<const double> row(long long r) const {
    return {v_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  double operator()(long long r, int c) const {
    return v_[static_cast<std::size_t>(r) * cols_ + c];
  }

  // Validates and renormalizes per the mass rules.
  void set_row(long long r, std::span<const double> values);

  bool is_square() const { return rows() == cols_; }

 private:
  int cols_ = 0;
  std::vector<double> v_;
};

// Dense joint probability table over a product of finite alphabets.
// Storage is row-major with the last axis fastest.
class JointTable {
 public:
  JointTable() = default;
  explicit JointTable(std::vector<int> dims);  // zero-filled builder
  static JointTable from_flat(std::vector<int> dims, std::vector<double> probs);

  const std::vector<int>& dims() const { return dims_; }
  std::size_t flat_size() const { return p_.size(); }
  std::span<const double> flat() const { return p_; }
  std::span<double> flat_mut() { return p_; }

  double at(std::span<const int> idx) const { return p_[offset(idx)]; }
  double& at(std::span<const int> idx) { return p_[offset(idx)]; }

  double mass() const;
  // Keeps the listed axes (in the given order), summing out the rest.
  JointTable marginal(std::span<const int> axes) const;
  // Checks nonnegativity and total mass; renormalizes per the mass rules.
  void validate();

 private:
  std::size_t offset(std::span<const int> idx) const;
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::vector<double> p_;
};

struct MarkovSource {
  Alphabet alphabet;
  Distribution initial;
  StochasticKernel transition;  // square, rows = conditioning symbol

  MarkovSource(Alphabet a, Distribution init, StochasticKernel trans);
};

// Entropy and divergence, all in bits. 0*log 0 is 0; p*log(p/0) is +infinity.
double binary_entropy(double p);
double entropy(const Distribution& p);
double entropy_of(std::span<const double> p);
double kl_divergence(const Distribution& p, const Distribution& q);
// Mutual information of a two-axis joint.
double mutual_information(const JointTable& joint);

bool is_ergodic(const MarkovSource& source);
// Unique distribution with pi T = pi, residual below 1e-12.
Distribution stationary_distribution(const MarkovSource& source);
// Steady-state pair law P(x_i, x_{i-1}); axes ordered (x_i, x_{i-1}).
JointTable steady_pair_joint(const MarkovSource& source);
// Steady-state law of the window (x_i, x_{i-1}, ..., x_{i-window}); the
// returned table has window+1 axes, most recent first.
JointTable window_joint(const MarkovSource& source, int window);

// Law of the reversed stationary chain run depth steps back from a given
// start symbol: rows over x_0, columns over the tuple (x_{-1}, ..., x_{-depth})
// encoded most-significant-first. Requires an ergodic chain.
StochasticKernel reversed_prehistory(const MarkovSource& source, int depth);

// Two-state chain with flip probabilities p (0 to 1) and q (1 to 0),
// initialized at its stationary distribution.
MarkovSource binary_markov_source(double p, double q);

long long ipow(int base, int exp);

}  // namespace crdp
