#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/kernel.hpp"
#include "gcmc/planner.hpp"
#include "gcmc/rng.hpp"

namespace gcmc {

/// Per-row cumulative sums of a kernel over its nonzero entries, in label
/// order. The last nonzero entry of each row is pinned to 1 so rounding can
/// never push a draw past the end of the row.
class CdfTable {
 public:
  struct Entry {
    std::size_t target;
    double cdf;
  };

  CdfTable() = default;
  explicit CdfTable(const StochasticKernel& k) {
    rows_.resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k.size(); ++j) {
        if (k(i, j) > 0.0) {
          acc += k(i, j);
          rows_[i].push_back({j, acc});
        }
      }
      if (rows_[i].empty()) throw Error(ErrorCode::NotStochastic, "kernel row with no mass");
      rows_[i].back().cdf = 1.0;
    }
  }

  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<Entry>& row(std::size_t i) const { return rows_.at(i); }

  /// Inverse-CDF: first entry whose cumulative mass exceeds u.
  std::size_t sample(std::size_t i, double u) const {
    for (const auto& e : rows_[i])
      if (u < e.cdf) return e.target;
    return rows_[i].back().target;
  }

 private:
  std::vector<std::vector<Entry>> rows_;
};

/// One transition from `state` under kernel k.
inline std::string step(const std::string& state, const StochasticKernel& k, CounterRng& rng) {
  const auto& labels = k.labels();
  auto it = std::find(labels.begin(), labels.end(), state);
  if (it == labels.end()) throw Error(ErrorCode::UnknownState, state);
  const auto i = static_cast<std::size_t>(it - labels.begin());
  const double u = rng.uniform();
  double acc = 0.0;
  std::optional<std::size_t> last;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (k(i, j) <= 0.0) continue;
    acc += k(i, j);
    last = j;
    if (u < acc) return labels[j];
  }
  return labels[*last];
}

struct TrajectoryReport {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::uint64_t steps = 0;
  std::vector<std::string> labels;
  std::vector<std::uint64_t> visit_counts;
  Distribution empirical;
  Distribution target;
  std::vector<std::pair<std::uint64_t, double>> tv_trace;
  std::uint64_t consistency_violations = 0;
  std::string initial_state;
  std::string final_state;
  PlanMode mode = PlanMode::Constant;
  bool faithful = true;
  std::optional<std::uint64_t> last_k;

  double final_tv() const { return tv_distance(empirical, target); }
};

struct RunOptions {
  std::uint64_t replica = 0;
  /// Extra stream discriminator, used by the product runner for factor chains.
  std::uint64_t substream = 0;
  std::vector<std::uint64_t> checkpoints;
  /// Called with (t, full label index) for t = 0 .. steps.
  std::function<void(std::uint64_t, std::size_t)> trace;
};

/// Shared sampling tables for a plan. Thread-safe; one instance can serve
/// every replica of a run.
class PlanSampler {
 public:
  explicit PlanSampler(const ChainPlan& p) : plan_(&p) {
    if (p.mode == PlanMode::Infeasible) throw Error(ErrorCode::InfeasiblePlan, p.reason);
    if (p.kernel) fixed_ = std::make_shared<const CdfTable>(*p.kernel);
    for (const auto& l : p.state_labels()) to_full_.push_back(p.graph.index_of(l));
    initial_cdf_.reserve(p.initial.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.initial.size(); ++i) {
      acc += p.initial[i];
      initial_cdf_.push_back(acc);
    }
    for (std::size_t i = p.initial.size(); i-- > 0;)
      if (p.initial[i] > 0.0) {
        initial_cdf_[i] = 1.0;
        break;
      }
  }

  const ChainPlan& plan() const noexcept { return *plan_; }
  const std::vector<std::size_t>& to_full() const noexcept { return to_full_; }

  std::shared_ptr<const CdfTable> table(std::uint64_t k) const {
    if (fixed_) return fixed_;
    std::lock_guard lock(mutex_);
    auto it = tables_.find(k);
    if (it != tables_.end()) return it->second;
    auto t = std::make_shared<const CdfTable>(*plan_->family->at(k));
    tables_.emplace(k, t);
    return t;
  }

  std::size_t sample_initial(double u) const {
    for (std::size_t i = 0; i < initial_cdf_.size(); ++i)
      if (u < initial_cdf_[i] && plan_->initial[i] > 0.0) return i;
    return initial_cdf_.size() - 1;
  }

 private:
  const ChainPlan* plan_;
  std::shared_ptr<const CdfTable> fixed_;
  std::vector<std::size_t> to_full_;
  std::vector<double> initial_cdf_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const CdfTable>> tables_;
};

/// A single trajectory advancing one step at a time. States are indices into
/// the plan's state space.
class ChainWalker {
 public:
  ChainWalker(const PlanSampler& sampler, CounterRng rng) : sampler_(&sampler), rng_(rng) {
    const auto& p = sampler.plan();
    if (p.mode == PlanMode::NonHomogeneous) {
      k_ = p.schedule->k_start();
      block_end_big_ = p.schedule->block_length(k_);
      block_end_ = saturate(block_end_big_);
    }
    table_ = sampler.table(k_);
    state_ = sampler.sample_initial(rng_.uniform());
  }

  std::size_t state() const noexcept { return state_; }
  std::size_t full_state() const { return sampler_->to_full()[state_]; }
  std::uint64_t time() const noexcept { return time_; }
  std::uint64_t k() const noexcept { return k_; }
  std::uint64_t violations() const noexcept { return violations_; }

  /// X(time) -> X(time + 1) under the kernel in force at `time`.
  void advance() {
    const auto& p = sampler_->plan();
    if (p.mode == PlanMode::NonHomogeneous && time_ >= block_end_) {
      while (time_ >= block_end_) {
        ++k_;
        block_end_big_ += p.schedule->block_length(k_);
        block_end_ = saturate(block_end_big_);
      }
      table_ = sampler_->table(k_);
    }
    const std::size_t next = table_->sample(state_, rng_.uniform());
    const auto& full = sampler_->to_full();
    if (!p.graph.adjacent(full[state_], full[next])) ++violations_;
    state_ = next;
    ++time_;
  }

 private:
  static std::uint64_t saturate(const BigInt& v) {
    if (v > BigInt(std::numeric_limits<std::uint64_t>::max())) return std::numeric_limits<std::uint64_t>::max();
    return v.convert_to<std::uint64_t>();
  }

  const PlanSampler* sampler_;
  CounterRng rng_;
  std::shared_ptr<const CdfTable> table_;
  std::size_t state_ = 0;
  std::uint64_t time_ = 0;
  std::uint64_t k_ = 0;
  BigInt block_end_big_ = 0;
  std::uint64_t block_end_ = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t violations_ = 0;
};

namespace detail {

inline std::vector<std::uint64_t> normalize_checkpoints(std::vector<std::uint64_t> cps, std::uint64_t steps) {
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  for (auto c : cps)
    if (c == 0 || c > steps)
      throw Error(ErrorCode::InvalidArgument, "checkpoint " + std::to_string(c) + " outside [1, steps]");
  return cps;
}

inline void check_runnable(const ChainPlan& p, std::uint64_t steps) {
  if (p.mode == PlanMode::Infeasible) throw Error(ErrorCode::InfeasiblePlan, p.reason);
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "steps must be at least 1");
  if (p.mode == PlanMode::NonHomogeneous) {
    if (auto h = p.schedule->horizon(); h && *h < BigInt(steps))
      throw Error(ErrorCode::ScheduleExhausted,
                  "schedule covers " + h->str() + " steps, run needs " + std::to_string(steps));
  }
}

inline double tv_from_counts(const std::vector<std::uint64_t>& counts, std::uint64_t total,
                             const Distribution& target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    sum += std::fabs(double(counts[i]) / double(total) - target[i]);
  return sum / 2.0;
}

inline Distribution empirical_from_counts(const std::vector<std::string>& labels,
                                          const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  std::vector<double> mass(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) mass[i] = double(counts[i]) / double(total);
  return Distribution(labels, std::move(mass));
}

}  // namespace detail

/// Runs one trajectory of `steps` counted states X(0) .. X(steps-1); the
/// report's final_state is X(steps).
inline TrajectoryReport run(const PlanSampler& sampler, std::uint64_t steps, std::uint64_t seed,
                            const RunOptions& opts = {}) {
  const auto& p = sampler.plan();
  detail::check_runnable(p, steps);
  const auto cps = detail::normalize_checkpoints(opts.checkpoints, steps);

  ChainWalker walker(sampler, CounterRng(seed, opts.replica, opts.substream));
  const std::size_t n_full = p.graph.size();
  std::vector<std::uint64_t> counts(n_full, 0);

  TrajectoryReport r;
  r.seed = seed;
  r.replica = opts.replica;
  r.steps = steps;
  r.labels = p.graph.labels();
  r.target = p.target;
  r.mode = p.mode;
  r.faithful = p.faithful();
  r.initial_state = p.graph.label(walker.full_state());

  std::size_t next_cp = 0;
  for (std::uint64_t t = 0; t < steps; ++t) {
    const auto full = walker.full_state();
    ++counts[full];
    if (opts.trace) opts.trace(t, full);
    walker.advance();
    if (next_cp < cps.size() && cps[next_cp] == t + 1) {
      r.tv_trace.emplace_back(t + 1, detail::tv_from_counts(counts, t + 1, p.target));
      ++next_cp;
    }
  }
  if (opts.trace) opts.trace(steps, walker.full_state());

  r.visit_counts = std::move(counts);
  r.empirical = detail::empirical_from_counts(r.labels, r.visit_counts, steps);
  r.consistency_violations = walker.violations();
  r.final_state = p.graph.label(walker.full_state());
  if (p.mode == PlanMode::NonHomogeneous) r.last_k = walker.k();
  return r;
}

inline TrajectoryReport run(const ChainPlan& p, std::uint64_t steps, std::uint64_t seed, const RunOptions& opts = {}) {
  detail::check_runnable(p, steps);
  PlanSampler sampler(p);
  return run(sampler, steps, seed, opts);
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results are
/// written by index, so output does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Independent replicas 0 .. replicas-1 of the same plan.
inline std::vector<TrajectoryReport> run_replicas(const ChainPlan& p, std::uint64_t steps, std::uint64_t seed,
                                                  std::size_t replicas, std::vector<std::uint64_t> checkpoints = {},
                                                  unsigned threads = 0) {
  detail::check_runnable(p, steps);
  if (replicas == 0) throw Error(ErrorCode::InvalidArgument, "replicas must be at least 1");
  PlanSampler sampler(p);
  std::vector<TrajectoryReport> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t i) {
    RunOptions o;
    o.replica = i;
    o.checkpoints = checkpoints;
    out[i] = run(sampler, steps, seed, o);
  });
  return out;
}

/// Pools visit counts of several reports over the same label list. Summation
/// makes this associative and order-insensitive; tv traces are dropped.
inline TrajectoryReport merge_reports(const std::vector<TrajectoryReport>& reports) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to merge");
  TrajectoryReport out = reports.front();
  out.tv_trace.clear();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.labels != out.labels) throw Error(ErrorCode::LabelMismatch, "merging reports over different labels");
    out.steps += r.steps;
    out.consistency_violations += r.consistency_violations;
    for (std::size_t j = 0; j < out.visit_counts.size(); ++j) out.visit_counts[j] += r.visit_counts[j];
  }
  out.empirical = detail::empirical_from_counts(out.labels, out.visit_counts, out.steps);
  return out;
}

/// Time average of f along the trajectory, from the visit counts.
inline double ergodic_average(const TrajectoryReport& r, const std::vector<double>& f) {
  if (f.size() != r.visit_counts.size())
    throw Error(ErrorCode::InvalidArgument, "f must have one value per label");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * double(r.visit_counts[i]);
  return sum / double(r.steps);
}

/// Expectation of f under d.
inline double expectation(const Distribution& d, const std::vector<double>& f) {
  if (f.size() != d.size()) throw Error(ErrorCode::InvalidArgument, "f must have one value per label");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * d[i];
  return sum;
}

// ---------------------------------------------------------------------------
// Too-fast schedule counterexample

/// Four states s1..s4 with edges {s1,s3}, {s3,s4}, {s2,s4}.
inline Graph counterexample_graph() {
  return Graph::build({"s1", "s2", "s3", "s4"}, {{"s1", "s3"}, {"s3", "s4"}, {"s2", "s4"}});
}

inline Distribution counterexample_target() {
  return Distribution({"s1", "s2", "s3", "s4"}, {0.5, 0.5, 0.0, 0.0});
}

/// Level cap for the 2^l mixture index. From level 53 on, the escape
/// probability 2^-(l+1) out of s1 is below the resolution of a 53-bit uniform
/// draw, and every later table maps each possible draw to the same successor.
inline constexpr unsigned kCounterexampleMaxLevel = 62;

/// Kernel P^(mu_{2^l}, G) of the counterexample, 1 <= l <= kCounterexampleMaxLevel.
inline StochasticKernel counterexample_kernel(unsigned level) {
  if (level < 1 || level > kCounterexampleMaxLevel)
    throw Error(ErrorCode::InvalidArgument, "counterexample level out of range");
  return build_kernel(mixture(counterexample_target(), std::uint64_t{1} << level), counterexample_graph());
}

struct CounterexampleSummary {
  std::uint64_t replicas = 0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  double stuck_fraction = 0.0;
  double mean_final_tv = 0.0;
  double mean_s1_frequency = 0.0;
  std::uint64_t consistency_violations = 0;
};

/// Runs the four-state instance where the kernel changes every step:
/// the transition X(t) -> X(t+1) uses level l = t + 1 (capped), i.e. target
/// mu_{2^(t+1)}. Every replica starts in s1. A replica counts as stuck when
/// its empirical frequency of s1 exceeds 0.9 at the horizon.
inline CounterexampleSummary counterexample_scenario(std::uint64_t replicas, std::uint64_t steps, std::uint64_t seed,
                                                     unsigned threads = 0) {
  if (replicas == 0) throw Error(ErrorCode::InvalidArgument, "replicas must be at least 1");
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "steps must be at least 1");
  const Graph g = counterexample_graph();
  const Distribution mu = counterexample_target();
  std::vector<CdfTable> tables;
  tables.reserve(kCounterexampleMaxLevel);
  for (unsigned l = 1; l <= kCounterexampleMaxLevel; ++l) tables.emplace_back(counterexample_kernel(l));

  struct Outcome {
    bool stuck = false;
    double tv = 0.0;
    double s1 = 0.0;
    std::uint64_t violations = 0;
  };
  std::vector<Outcome> outcomes(replicas);
  parallel_for(replicas, threads, [&](std::size_t rep) {
    CounterRng rng(seed, rep);
    std::uint64_t counts[4] = {0, 0, 0, 0};
    std::size_t state = 0;
    Outcome o;
    for (std::uint64_t t = 0; t < steps; ++t) {
      ++counts[state];
      const std::size_t level = std::min<std::uint64_t>(t + 1, kCounterexampleMaxLevel);
      const std::size_t next = tables[level - 1].sample(state, rng.uniform());
      if (!g.adjacent(state, next)) ++o.violations;
      state = next;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < 4; ++i) tv += std::fabs(double(counts[i]) / double(steps) - mu[i]);
    o.tv = tv / 2.0;
    o.s1 = double(counts[0]) / double(steps);
    o.stuck = o.s1 > 0.9;
    outcomes[rep] = o;
  });

  CounterexampleSummary s;
  s.replicas = replicas;
  s.steps = steps;
  s.seed = seed;
  for (const auto& o : outcomes) {
    s.stuck_fraction += o.stuck ? 1.0 : 0.0;
    s.mean_final_tv += o.tv;
    s.mean_s1_frequency += o.s1;
    s.consistency_violations += o.violations;
  }
  s.stuck_fraction /= double(replicas);
  s.mean_final_tv /= double(replicas);
  s.mean_s1_frequency /= double(replicas);
  return s;
}

}  // namespace gcmc
