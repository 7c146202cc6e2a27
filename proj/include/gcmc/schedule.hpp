#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/numeric.hpp"

namespace gcmc {

enum class ScheduleKind { PaperPoly, GrowthConstrained, Practical };

constexpr std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::PaperPoly: return "PAPER_POLY";
    case ScheduleKind::GrowthConstrained: return "GROWTH_CONSTRAINED";
    case ScheduleKind::Practical: return "PRACTICAL";
  }
  return "?";
}

/// Largest mixture index the planner accepts as a starting point.
inline constexpr std::uint64_t kMaxKbar = 1'000'000'000;

/// User-adjustable schedule parameters.
struct ScheduleOverrides {
  std::optional<double> c;               // growth constant, GROWTH_CONSTRAINED only
  std::vector<std::uint64_t> blocks;     // block lengths, PRACTICAL only
};

/// Piecewise-constant time schedule for the mixture family.
///
/// Block k (k >= k_start) covers the half-open time range
/// [boundary(k), boundary(k + 1)); times are normalized so that
/// boundary(k_start) == 0. Boundaries are exact big integers because the
/// polynomial schedule leaves 64-bit range after a handful of blocks.
class Schedule {
 public:
  Schedule(ScheduleKind kind, std::size_t n, std::uint64_t k_start, double c,
           std::vector<std::uint64_t> blocks)
      : kind_(kind), n_(n), k_start_(k_start), c_(c), blocks_(std::move(blocks)) {
    if (n_ == 0) throw Error(ErrorCode::InvalidArgument, "schedule needs N >= 1");
    if (k_start_ < 2) throw Error(ErrorCode::InvalidArgument, "schedule must start at k >= 2");
    if (kind_ == ScheduleKind::GrowthConstrained && !(c_ > 0.0 && std::isfinite(c_)))
      throw Error(ErrorCode::InvalidOverride, "growth constant c must be positive and finite");
    if (kind_ == ScheduleKind::Practical) {
      if (blocks_.empty()) throw Error(ErrorCode::InvalidOverride, "practical schedule needs block lengths");
      for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i] == 0) throw Error(ErrorCode::InvalidOverride, "block lengths must be positive");
        if (i > 0 && blocks_[i] < blocks_[i - 1])
          throw Error(ErrorCode::InvalidOverride, "block lengths must be non-decreasing");
      }
    }
  }

  ScheduleKind kind() const noexcept { return kind_; }
  std::size_t state_count() const noexcept { return n_; }
  std::uint64_t k_start() const noexcept { return k_start_; }
  double c() const noexcept { return c_; }
  const std::vector<std::uint64_t>& blocks() const noexcept { return blocks_; }
  bool faithful() const noexcept { return kind_ != ScheduleKind::Practical; }

  /// Number of blocks, when finite.
  std::optional<std::uint64_t> block_count() const {
    if (kind_ == ScheduleKind::Practical) return blocks_.size();
    return std::nullopt;
  }

  /// Un-normalized polynomial time t_k = k^(5N).
  BigInt poly_time(std::uint64_t k) const { return boost::multiprecision::pow(BigInt(k), unsigned(5 * n_)); }

  /// Length of block k.
  BigInt block_length(std::uint64_t k) const {
    require_index(k);
    switch (kind_) {
      case ScheduleKind::PaperPoly: return poly_time(k + 1) - poly_time(k);
      case ScheduleKind::GrowthConstrained: return growth_gap(k);
      case ScheduleKind::Practical: {
        auto i = k - k_start_;
        if (i >= blocks_.size())
          throw Error(ErrorCode::ScheduleExhausted, "no block " + std::to_string(k) + " in practical schedule");
        return BigInt(blocks_[i]);
      }
    }
    return BigInt(0);
  }

  /// Normalized start time of block k; k may be one past the last finite block.
  BigInt boundary(std::uint64_t k) const {
    require_index(k);
    if (kind_ == ScheduleKind::PaperPoly) return poly_time(k) - poly_time(k_start_);
    if (kind_ == ScheduleKind::Practical && k - k_start_ > blocks_.size())
      throw Error(ErrorCode::ScheduleExhausted, "no block " + std::to_string(k) + " in practical schedule");
    BigInt t = 0;
    for (std::uint64_t j = k_start_; j < k; ++j) t += block_length(j);
    return t;
  }

  /// First `count` block starts, boundary(k_start) .. boundary(k_start+count-1).
  /// Finite schedules stop at their end time.
  std::vector<BigInt> boundaries(std::size_t count) const {
    std::vector<BigInt> out;
    BigInt t = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t k = k_start_ + i;
      if (kind_ == ScheduleKind::PaperPoly) {
        out.push_back(poly_time(k) - poly_time(k_start_));
        continue;
      }
      out.push_back(t);
      if (kind_ == ScheduleKind::Practical && i >= blocks_.size()) break;
      if (i + 1 < count) t += block_length(k);
    }
    return out;
  }

  /// Total covered time of a finite schedule.
  std::optional<BigInt> horizon() const {
    if (kind_ != ScheduleKind::Practical) return std::nullopt;
    BigInt t = 0;
    for (auto b : blocks_) t += b;
    return t;
  }

  /// Mixture index of the block containing time t.
  std::uint64_t locate(std::uint64_t t) const {
    const BigInt target(t);
    std::uint64_t k = k_start_;
    BigInt end = block_length(k);
    while (end <= target) {
      ++k;
      end += block_length(k);
    }
    return k;
  }

 private:
  void require_index(std::uint64_t k) const {
    if (k < k_start_)
      throw Error(ErrorCode::InvalidArgument,
                  "block " + std::to_string(k) + " precedes k_start " + std::to_string(k_start_));
  }

  /// ceil(c * k^(5N-1)), at least 1, evaluated exactly from the binary value of c.
  BigInt growth_gap(std::uint64_t k) const {
    int exp = 0;
    const double frac = std::frexp(c_, &exp);
    const auto mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
    BigInt scaled = BigInt(mant) * boost::multiprecision::pow(BigInt(k), unsigned(5 * n_ - 1));
    const int shift = exp - 53;
    BigInt gap;
    if (shift >= 0) {
      gap = scaled << shift;
    } else {
      BigInt denom = BigInt(1) << (-shift);
      gap = scaled / denom;
      if (gap * denom != scaled) gap += 1;
    }
    return gap < 1 ? BigInt(1) : gap;
  }

  ScheduleKind kind_;
  std::size_t n_;
  std::uint64_t k_start_;
  double c_;
  std::vector<std::uint64_t> blocks_;
};

/// Geometric block lengths first, first*ratio, first*ratio^2, ...
inline std::vector<std::uint64_t> geometric_blocks(std::uint64_t first, std::uint64_t ratio, std::size_t count) {
  if (first == 0 || ratio == 0) throw Error(ErrorCode::InvalidOverride, "geometric blocks need positive first and ratio");
  std::vector<std::uint64_t> out;
  std::uint64_t b = first;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(b);
    if (i + 1 < count && b > std::numeric_limits<std::uint64_t>::max() / ratio)
      throw Error(ErrorCode::InvalidOverride, "geometric block length overflows 64 bits");
    b *= ratio;
  }
  return out;
}

/// Starting mixture index kbar(d) + 1, refusing absurdly small masses.
inline std::uint64_t first_mixture_index(const Distribution& d) {
  auto kb = kbar(d);
  if (kb > kMaxKbar)
    throw Error(ErrorCode::KbarTooLarge, "kbar=" + std::to_string(kb) + " exceeds the supported maximum");
  return kb + 1;
}

/// Schedule for target d on graph g (the state space the chain lives on).
inline Schedule make_schedule(ScheduleKind kind, const Distribution& d, const Graph& g,
                              const ScheduleOverrides& overrides = {}) {
  require_labels_match(d, g);
  const auto k_start = first_mixture_index(d);
  switch (kind) {
    case ScheduleKind::PaperPoly:
      return Schedule(kind, g.size(), k_start, 0.0, {});
    case ScheduleKind::GrowthConstrained: {
      const double c = overrides.c.value_or(1.0);
      if (!(c > 0.0)) throw Error(ErrorCode::InvalidOverride, "growth constant c must be positive");
      return Schedule(kind, g.size(), k_start, c, {});
    }
    case ScheduleKind::Practical:
      return Schedule(kind, g.size(), k_start, 0.0, overrides.blocks);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schedule kind");
}

/// Checks block_length(l) >= c * l^(5N-1) for every block l in [k_start, last].
inline bool satisfies_min_gap(const Schedule& s, double c, std::uint64_t last) {
  int exp = 0;
  const double frac = std::frexp(c, &exp);
  const auto mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  for (std::uint64_t l = s.k_start(); l <= last; ++l) {
    if (s.block_count() && l - s.k_start() >= *s.block_count()) break;
    BigInt need = BigInt(mant) * boost::multiprecision::pow(BigInt(l), unsigned(5 * s.state_count() - 1));
    BigInt have = s.block_length(l);
    const int shift = exp - 53;
    // compare have >= need * 2^shift without rounding
    bool ok = shift >= 0 ? have >= (need << shift) : (have << (-shift)) >= need;
    if (!ok) return false;
  }
  return true;
}

}  // namespace gcmc
