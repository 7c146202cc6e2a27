#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/matrix.hpp"

namespace gcmc {

/// Relabeling s^1..s^N with non-increasing mass. Ties keep declaration order.
/// Ranks are 0-based here.
class StateOrdering {
 public:
  StateOrdering() = default;
  explicit StateOrdering(std::vector<std::size_t> rank_to_index) : by_rank_(std::move(rank_to_index)) {
    by_index_.assign(by_rank_.size(), 0);
    for (std::size_t r = 0; r < by_rank_.size(); ++r) by_index_.at(by_rank_[r]) = r;
  }

  std::size_t size() const noexcept { return by_rank_.size(); }
  /// Label index holding rank r.
  std::size_t index_at(std::size_t rank) const { return by_rank_.at(rank); }
  /// Rank of label index i.
  std::size_t rank_of(std::size_t index) const { return by_index_.at(index); }
  const std::vector<std::size_t>& ranks() const noexcept { return by_rank_; }

 private:
  std::vector<std::size_t> by_rank_;
  std::vector<std::size_t> by_index_;
};

template <class T>
StateOrdering order_states(const BasicDistribution<T>& d) {
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  return StateOrdering(std::move(idx));
}

/// Labels in rank order.
template <class T>
std::vector<std::string> ordered_labels(const BasicDistribution<T>& d, const StateOrdering& o) {
  std::vector<std::string> out;
  for (auto i : o.ranks()) out.push_back(d.labels()[i]);
  return out;
}

/// Row-stochastic matrix bound to the distribution it was built for.
///
/// The matrix is stored in label order (the order of base().labels()); the
/// rank-order view used by the construction is available via rank_matrix().
template <class T = double>
class BasicStochasticKernel {
 public:
  BasicStochasticKernel() = default;
  BasicStochasticKernel(BasicDistribution<T> base, StateOrdering ordering, Matrix<T> matrix,
                        std::optional<T> p)
      : base_(std::move(base)), ordering_(std::move(ordering)), matrix_(std::move(matrix)), p_(std::move(p)) {
    if (!matrix_.square() || matrix_.rows() != base_.size())
      throw Error(ErrorCode::InvalidArgument, "kernel matrix does not match its base distribution");
  }

  /// Wraps an arbitrary matrix, e.g. to run the checks on a hand-built one.
  static BasicStochasticKernel from_matrix(BasicDistribution<T> base, Matrix<T> matrix) {
    auto ord = order_states(base);
    return BasicStochasticKernel(std::move(base), std::move(ord), std::move(matrix), std::nullopt);
  }

  std::size_t size() const noexcept { return matrix_.rows(); }
  const std::vector<std::string>& labels() const noexcept { return base_.labels(); }
  const BasicDistribution<T>& base() const noexcept { return base_; }
  const StateOrdering& ordering() const noexcept { return ordering_; }
  const Matrix<T>& matrix() const noexcept { return matrix_; }
  const std::optional<T>& p() const noexcept { return p_; }

  const T& operator()(std::size_t i, std::size_t j) const { return matrix_(i, j); }

  T at(const std::string& from, const std::string& to) const {
    return matrix_(base_.index_of(from), base_.index_of(to));
  }

  /// Entry between ranks l and m (0-based).
  const T& by_rank(std::size_t l, std::size_t m) const {
    return matrix_(ordering_.index_at(l), ordering_.index_at(m));
  }

  Matrix<T> rank_matrix() const {
    Matrix<T> out(size(), size());
    for (std::size_t l = 0; l < size(); ++l)
      for (std::size_t m = 0; m < size(); ++m) out(l, m) = by_rank(l, m);
    return out;
  }

 private:
  BasicDistribution<T> base_;
  StateOrdering ordering_;
  Matrix<T> matrix_;
  std::optional<T> p_;
};

using StochasticKernel = BasicStochasticKernel<double>;
using ExactKernel = BasicStochasticKernel<Rational>;

namespace detail {

template <class T>
void check_kernel_input(const BasicDistribution<T>& d, const Graph& g) {
  require_labels_match(d, g);
  if (!is_connected(g)) throw Error(ErrorCode::NotConnected, "kernel construction needs a connected graph");
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!(d[i] > T(0))) throw Error(ErrorCode::ZeroMass, "zero mass at " + d.labels()[i]);
}

/// For rank l: (#edges to later ranks) + sum over edges to earlier ranks of
/// the mass ratio earlier/l.
template <class T>
T rank_load(const BasicDistribution<T>& d, const Graph& g, const StateOrdering& o, std::size_t l) {
  const std::size_t il = o.index_at(l);
  T load(0);
  for (auto j : g.neighbors(il)) {
    if (o.rank_of(j) > l) load += T(1);
    else load += d[j] / d[il];
  }
  return load;
}

}  // namespace detail

/// Common off-diagonal scale p: the minimum over ranks of 1 / (2 * load).
/// Returns 1/2 for a single vertex, where the minimum is over an empty set
/// and only the p <= 1/2 cap applies.
template <class T>
T base_probability(const BasicDistribution<T>& d, const Graph& g, const StateOrdering& o) {
  detail::check_kernel_input(d, g);
  if (o.size() != d.size()) throw Error(ErrorCode::InvalidArgument, "ordering size mismatch");
  const T half = T(1) / T(2);
  if (d.size() == 1) return half;
  std::optional<T> p;
  for (std::size_t l = 0; l < d.size(); ++l) {
    T load = detail::rank_load(d, g, o, l);
    // connected with N >= 2 means every vertex has a neighbor
    if (!(load > T(0))) throw Error(ErrorCode::NotConnected, "isolated vertex " + d.labels()[o.index_at(l)]);
    T candidate = T(1) / (T(2) * load);
    if (!p || candidate < *p) p = candidate;
  }
  return *p;
}

/// Reversible graph-consistent kernel for a strictly positive target:
/// moves to a later rank get p, moves to an earlier rank get the mass ratio
/// times p, and the diagonal takes the rest.
template <class T>
BasicStochasticKernel<T> build_kernel(const BasicDistribution<T>& d, const Graph& g) {
  detail::check_kernel_input(d, g);
  auto ord = order_states(d);
  const T p = base_probability(d, g, ord);
  const std::size_t n = d.size();
  Matrix<T> m(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    const std::size_t il = ord.index_at(l);
    for (auto j : g.neighbors(il)) {
      if (ord.rank_of(j) > l) m(il, j) = p;
      else m(il, j) = d[j] / d[il] * p;
    }
    m(il, il) = T(1) - p * detail::rank_load(d, g, ord, l);
  }
  return BasicStochasticKernel<T>(d, std::move(ord), std::move(m), p);
}

/// max |base(i) P(i,j) - base(j) P(j,i)|.
template <class T>
T verify_reversible(const BasicStochasticKernel<T>& k) {
  T worst(0);
  const auto& b = k.base();
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = i + 1; j < k.size(); ++j) {
      T r = abs_value(b[i] * k(i, j) - b[j] * k(j, i));
      if (r > worst) worst = r;
    }
  return worst;
}

/// max-norm of base * P - base.
template <class T>
T stationary_residual(const BasicStochasticKernel<T>& k) {
  auto moved = left_multiply(k.base().mass(), k.matrix());
  T worst(0);
  for (std::size_t j = 0; j < moved.size(); ++j) {
    T r = abs_value(moved[j] - k.base()[j]);
    if (r > worst) worst = r;
  }
  return worst;
}

template <class T>
void require_stochastic(const Matrix<T>& m, double tol = 1e-9) {
  if (!m.square() || m.rows() == 0) throw Error(ErrorCode::NotStochastic, "matrix is not square");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    T sum(0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) < T(0)) throw Error(ErrorCode::NotStochastic, "negative entry in row " + std::to_string(i));
      sum += m(i, j);
    }
    if (abs_value(sum - T(1)) > T(tol))
      throw Error(ErrorCode::NotStochastic, "row " + std::to_string(i) + " does not sum to 1");
  }
}

/// Dobrushin ergodic coefficient: 1 - min over row pairs of the row overlap.
template <class T>
T dobrushin_delta(const Matrix<T>& m) {
  require_stochastic(m);
  T best_overlap(1);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.rows(); ++j) {
      T overlap(0);
      for (std::size_t h = 0; h < m.cols(); ++h) overlap += std::min(m(i, h), m(j, h));
      if (overlap < best_overlap) best_overlap = overlap;
    }
  T delta = T(1) - best_overlap;
  return delta < T(0) ? T(0) : delta;
}

template <class T>
Matrix<T> matrix_power(const Matrix<T>& m, std::uint64_t n) {
  if (!m.square()) throw Error(ErrorCode::InvalidArgument, "matrix power of a non-square matrix");
  if (n == 0) return Matrix<T>::identity(m.rows());
  Matrix<T> result;
  bool have = false;
  Matrix<T> base = m;
  while (n > 0) {
    if (n & 1u) {
      result = have ? result * base : base;
      have = true;
    }
    n >>= 1u;
    if (n) base = base * base;
  }
  return result;
}

struct LemmaReport {
  std::size_t n = 0;
  std::uint64_t k = 0;
  double c_n = 0.0;
  double delta = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Checks delta(P^(N-1)) <= 1 - (c_N / k)^(N-1), c_N = 1 / (2 (N-1)^2), for
/// the kernel built from mixture(d, k) on g.
inline LemmaReport lemma_bound_check(const Distribution& d, const Graph& g, std::uint64_t k) {
  const std::size_t n = d.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "the power bound needs at least 3 states");
  const auto kb = kbar(d);
  if (k <= kb)
    throw Error(ErrorCode::InvalidK, "k=" + std::to_string(k) + " must exceed kbar=" + std::to_string(kb));
  auto kernel = build_kernel(mixture(d, k), g);
  LemmaReport r;
  r.n = n;
  r.k = k;
  r.c_n = 1.0 / (2.0 * double(n - 1) * double(n - 1));
  r.delta = dobrushin_delta(matrix_power(kernel.matrix(), n - 1));
  r.bound = 1.0 - std::pow(r.c_n / double(k), double(n - 1));
  r.holds = r.delta <= r.bound + 1e-12;
  return r;
}

struct ContractionReport {
  std::uint64_t steps = 0;
  double tv = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// TV(initial P^n, base) against delta(P^(N-1))^floor(n / (N-1)).
inline ContractionReport contraction_check(const StochasticKernel& k, const Distribution& initial,
                                           std::uint64_t n, double tol = 1e-12) {
  require_same_labels(initial, k.base());
  const std::size_t states = k.size();
  if (states < 2) throw Error(ErrorCode::InvalidArgument, "contraction needs at least 2 states");
  if (n < states - 1) throw Error(ErrorCode::InvalidArgument, "n must be at least N-1");
  auto pn = matrix_power(k.matrix(), n);
  Distribution moved(initial.labels(), left_multiply(initial.mass(), pn));
  ContractionReport r;
  r.steps = n;
  r.tv = tv_distance(moved, k.base());
  const double delta = dobrushin_delta(matrix_power(k.matrix(), states - 1));
  r.bound = std::pow(delta, double(n / (states - 1)));
  r.holds = r.tv <= r.bound + tol;
  return r;
}

}  // namespace gcmc
