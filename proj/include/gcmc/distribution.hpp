#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/numeric.hpp"

namespace gcmc {

/// Probability vector over an ordered label list.
///
/// Masses are stored exactly as given; the support is decided by an exact
/// comparison with zero, so callers that parse noisy input should clean it
/// first (see from_parsed).
template <class T = double>
class BasicDistribution {
 public:
  BasicDistribution() = default;

  BasicDistribution(std::vector<std::string> labels, std::vector<T> mass)
      : labels_(std::move(labels)), mass_(std::move(mass)) {
    if (labels_.empty()) throw Error(ErrorCode::InvalidDistribution, "empty label list");
    if (labels_.size() != mass_.size())
      throw Error(ErrorCode::InvalidDistribution, "label and mass lengths differ");
    T sum(0);
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      if (mass_[i] < T(0))
        throw Error(ErrorCode::InvalidDistribution, "negative mass at " + labels_[i]);
      sum += mass_[i];
    }
    if (abs_value(sum - T(1)) > tolerance<T>(1e-12))
      throw Error(ErrorCode::InvalidDistribution, "masses do not sum to 1");
  }

  /// Cleans parser noise: |mass| < 1e-15 becomes an exact zero.
  static BasicDistribution from_parsed(std::vector<std::string> labels, std::vector<T> mass) {
    for (auto& m : mass)
      if (abs_value(m) < T(1e-15)) m = T(0);
    return BasicDistribution(std::move(labels), std::move(mass));
  }

  static BasicDistribution uniform(std::vector<std::string> labels) {
    const std::size_t n = labels.size();
    if (n == 0) throw Error(ErrorCode::InvalidDistribution, "empty label list");
    std::vector<T> mass(n, T(1) / T(n));
    return BasicDistribution(std::move(labels), std::move(mass));
  }

  static BasicDistribution dirac(std::vector<std::string> labels, const std::string& atom) {
    std::vector<T> mass(labels.size(), T(0));
    auto it = std::find(labels.begin(), labels.end(), atom);
    if (it == labels.end()) throw Error(ErrorCode::UnknownLabel, atom);
    mass[static_cast<std::size_t>(it - labels.begin())] = T(1);
    return BasicDistribution(std::move(labels), std::move(mass));
  }

  std::size_t size() const noexcept { return mass_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<T>& mass() const noexcept { return mass_; }
  const T& operator[](std::size_t i) const { return mass_[i]; }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw Error(ErrorCode::UnknownLabel, label);
    return static_cast<std::size_t>(it - labels_.begin());
  }

  const T& at(const std::string& label) const { return mass_[index_of(label)]; }

  /// The same measure viewed on a sub-list of labels. All dropped mass must
  /// be zero.
  BasicDistribution restrict_to(const std::vector<std::string>& sub) const {
    std::vector<T> m;
    m.reserve(sub.size());
    for (const auto& l : sub) m.push_back(at(l));
    return BasicDistribution(sub, std::move(m));
  }

  /// The same measure extended by zeros onto a super-list of labels.
  BasicDistribution extend_to(const std::vector<std::string>& super) const {
    std::vector<T> m(super.size(), T(0));
    for (std::size_t i = 0; i < super.size(); ++i) {
      auto it = std::find(labels_.begin(), labels_.end(), super[i]);
      if (it != labels_.end()) m[i] = mass_[static_cast<std::size_t>(it - labels_.begin())];
    }
    return BasicDistribution(super, std::move(m));
  }

  friend bool operator==(const BasicDistribution& a, const BasicDistribution& b) {
    return a.labels_ == b.labels_ && a.mass_ == b.mass_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<T> mass_;
};

using Distribution = BasicDistribution<double>;
using ExactDistribution = BasicDistribution<Rational>;

template <class T>
std::vector<std::string> support(const BasicDistribution<T>& d) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > T(0)) out.push_back(d.labels()[i]);
  return out;
}

template <class T>
void require_same_labels(const BasicDistribution<T>& a, const BasicDistribution<T>& b) {
  if (a.labels() != b.labels())
    throw Error(ErrorCode::LabelMismatch, "distributions are defined over different label lists");
}

template <class T>
void require_labels_match(const BasicDistribution<T>& d, const Graph& g) {
  if (d.labels() != g.labels())
    throw Error(ErrorCode::LabelMismatch, "distribution labels differ from graph labels");
}

/// Half-L1 distance.
template <class T>
T tv_distance(const BasicDistribution<T>& a, const BasicDistribution<T>& b) {
  require_same_labels(a, b);
  T sum(0);
  for (std::size_t i = 0; i < a.size(); ++i) sum += abs_value(a[i] - b[i]);
  return sum / T(2);
}

/// ceil(1 / smallest positive mass).
template <class T>
std::uint64_t kbar(const BasicDistribution<T>& d) {
  bool found = false;
  T low(0);
  for (const auto& m : d.mass())
    if (m > T(0) && (!found || m < low)) {
      low = m;
      found = true;
    }
  if (!found) throw Error(ErrorCode::InvalidDistribution, "no positive mass");
  return ceil_to_u64(T(1) / low);
}

/// Labels whose mass is strictly below 1/k.
template <class T>
std::vector<std::string> low_mass_set(const BasicDistribution<T>& d, std::uint64_t k) {
  if (k < 2) throw Error(ErrorCode::InvalidK, "k must be at least 2, got " + std::to_string(k));
  std::vector<std::string> out;
  const T kk(k);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] * kk < T(1)) out.push_back(d.labels()[i]);
  return out;
}

/// (1/k) * uniform(low_mass_set) + ((k-1)/k) * d.
template <class T>
BasicDistribution<T> mixture(const BasicDistribution<T>& d, std::uint64_t k) {
  auto low = low_mass_set(d, k);
  if (low.empty())
    throw Error(ErrorCode::EmptyLowMassSet, "no label has mass below 1/" + std::to_string(k));
  const T kk(k);
  const T spread = T(1) / (kk * T(low.size()));
  const T keep = T(k - 1) / kk;
  std::vector<T> mass(d.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    mass[i] = keep * d[i];
    if (next < low.size() && low[next] == d.labels()[i]) {
      mass[i] += spread;
      ++next;
    }
  }
  return BasicDistribution<T>(d.labels(), std::move(mass));
}

}  // namespace gcmc
