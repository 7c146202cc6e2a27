#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/planner.hpp"
#include "gcmc/simulator.hpp"

namespace gcmc {

/// Joint state spaces above this size are not materialized; only marginal
/// statistics are tracked for them.
inline constexpr std::size_t kMaxJointStates = 1'000'000;

struct ProductFactor {
  Distribution target;
  Graph graph;
  std::optional<ScheduleSpec> schedule;
};

/// Independent chains, one per factor, read jointly as a chain on the strong
/// product of the factor graphs.
struct ProductSpec {
  std::vector<ChainPlan> plans;
  std::size_t joint_size = 0;
  /// Present when joint_size <= kMaxJointStates.
  std::optional<Graph> joint_graph;
  std::optional<Distribution> joint_target;
  bool faithful = true;

  std::size_t factor_count() const noexcept { return plans.size(); }
};

/// Product measure over lexicographically ordered tuples, first factor most
/// significant.
inline Distribution product_distribution(const std::vector<Distribution>& factors) {
  if (factors.empty()) throw Error(ErrorCode::InvalidArgument, "product of zero distributions");
  std::vector<std::string> labels = factors.front().labels();
  std::vector<double> mass = factors.front().mass();
  for (std::size_t h = 1; h < factors.size(); ++h) {
    const auto& f = factors[h];
    std::vector<std::string> nl;
    std::vector<double> nm;
    nl.reserve(labels.size() * f.size());
    nm.reserve(labels.size() * f.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) {
        nl.push_back(product_label(labels[i], f.labels()[j]));
        nm.push_back(mass[i] * f[j]);
      }
    labels = std::move(nl);
    mass = std::move(nm);
  }
  return Distribution(std::move(labels), std::move(mass));
}

inline ProductSpec build_product_spec(const std::vector<ProductFactor>& factors) {
  if (factors.empty()) throw Error(ErrorCode::InvalidArgument, "product spec needs at least one factor");
  ProductSpec spec;
  spec.joint_size = 1;
  bool too_big = false;
  for (std::size_t h = 0; h < factors.size(); ++h) {
    const auto& f = factors[h];
    if (classify(f.target, f.graph).tag == CaseTag::SupportSplit)
      throw Error(ErrorCode::InfeasibleFactor, "factor " + std::to_string(h) + " has its support split across components");
    PlanOptions opts;
    opts.schedule = f.schedule;
    spec.plans.push_back(plan(f.target, f.graph, opts));
    spec.faithful = spec.faithful && spec.plans.back().faithful();
    if (spec.joint_size > kMaxJointStates / f.graph.size()) too_big = true;
    spec.joint_size *= f.graph.size();
  }
  if (too_big) {
    spec.joint_size = 0;
    return spec;
  }
  std::vector<Graph> graphs;
  std::vector<Distribution> targets;
  for (const auto& f : factors) {
    graphs.push_back(f.graph);
    targets.push_back(f.target);
  }
  spec.joint_graph = strong_product(graphs);
  spec.joint_target = product_distribution(targets);
  return spec;
}

struct ProductReport {
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::vector<TrajectoryReport> marginals;
  /// Joint visit statistics; absent when the joint space is not materialized.
  std::optional<TrajectoryReport> joint;
  std::uint64_t joint_violations = 0;
  /// max over joint states of |joint empirical - product of marginal empiricals|.
  std::optional<double> factorization_defect;
};

/// Advances every factor chain once per step on its own random stream and
/// records the joint state.
inline ProductReport run_product(const ProductSpec& spec, std::uint64_t steps, std::uint64_t seed,
                                 std::vector<std::uint64_t> checkpoints = {}, std::uint64_t replica = 0) {
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "steps must be at least 1");
  const std::size_t r = spec.plans.size();
  for (const auto& p : spec.plans) detail::check_runnable(p, steps);
  const auto cps = detail::normalize_checkpoints(std::move(checkpoints), steps);

  std::vector<std::unique_ptr<PlanSampler>> samplers;
  std::vector<ChainWalker> walkers;
  for (std::size_t h = 0; h < r; ++h) {
    samplers.push_back(std::make_unique<PlanSampler>(spec.plans[h]));
    walkers.emplace_back(*samplers.back(), CounterRng(seed, replica, h + 1));
  }

  std::vector<std::vector<std::uint64_t>> marginal_counts(r);
  std::vector<std::size_t> radix(r);
  for (std::size_t h = 0; h < r; ++h) {
    marginal_counts[h].assign(spec.plans[h].graph.size(), 0);
    radix[h] = spec.plans[h].graph.size();
  }
  const bool joint = spec.joint_graph.has_value();
  std::vector<std::uint64_t> joint_counts(joint ? spec.joint_size : 0, 0);

  auto joint_index = [&] {
    std::size_t idx = 0;
    for (std::size_t h = 0; h < r; ++h) idx = idx * radix[h] + walkers[h].full_state();
    return idx;
  };

  ProductReport rep;
  rep.seed = seed;
  rep.steps = steps;
  std::vector<std::pair<std::uint64_t, double>> joint_trace;
  std::size_t next_cp = 0;
  std::size_t cur = joint ? joint_index() : 0;
  const std::size_t joint_start = cur;
  std::vector<std::size_t> starts;
  for (const auto& w : walkers) starts.push_back(w.full_state());
  std::uint64_t factor_violations_seen = 0;
  for (std::uint64_t t = 0; t < steps; ++t) {
    for (std::size_t h = 0; h < r; ++h) ++marginal_counts[h][walkers[h].full_state()];
    if (joint) ++joint_counts[cur];
    for (auto& w : walkers) w.advance();
    if (joint) {
      const std::size_t nxt = joint_index();
      if (!spec.joint_graph->adjacent(cur, nxt)) ++rep.joint_violations;
      cur = nxt;
    } else {
      std::uint64_t v = 0;
      for (const auto& w : walkers) v += w.violations();
      if (v > factor_violations_seen) ++rep.joint_violations;
      factor_violations_seen = v;
    }
    if (joint && next_cp < cps.size() && cps[next_cp] == t + 1) {
      joint_trace.emplace_back(t + 1, detail::tv_from_counts(joint_counts, t + 1, *spec.joint_target));
      ++next_cp;
    }
  }

  for (std::size_t h = 0; h < r; ++h) {
    const auto& p = spec.plans[h];
    TrajectoryReport m;
    m.seed = seed;
    m.replica = replica;
    m.steps = steps;
    m.labels = p.graph.labels();
    m.target = p.target;
    m.visit_counts = marginal_counts[h];
    m.empirical = detail::empirical_from_counts(m.labels, m.visit_counts, steps);
    m.consistency_violations = walkers[h].violations();
    m.initial_state = p.graph.label(starts[h]);
    m.final_state = p.graph.label(walkers[h].full_state());
    m.mode = p.mode;
    m.faithful = p.faithful();
    if (p.mode == PlanMode::NonHomogeneous) m.last_k = walkers[h].k();
    rep.marginals.push_back(std::move(m));
  }
  if (joint) {
    TrajectoryReport j;
    j.seed = seed;
    j.replica = replica;
    j.steps = steps;
    j.labels = spec.joint_graph->labels();
    j.target = *spec.joint_target;
    j.visit_counts = std::move(joint_counts);
    j.empirical = detail::empirical_from_counts(j.labels, j.visit_counts, steps);
    j.tv_trace = std::move(joint_trace);
    j.consistency_violations = rep.joint_violations;
    j.initial_state = spec.joint_graph->label(joint_start);
    j.final_state = spec.joint_graph->label(cur);
    j.mode = PlanMode::Homogeneous;
    for (const auto& p : spec.plans)
      if (p.mode == PlanMode::NonHomogeneous) j.mode = PlanMode::NonHomogeneous;
    j.faithful = spec.faithful;
    // factorization defect
    std::vector<Distribution> marg;
    for (const auto& m : rep.marginals) marg.push_back(m.empirical);
    const auto prod = product_distribution(marg);
    double defect = 0.0;
    for (std::size_t i = 0; i < j.empirical.size(); ++i) defect = std::max(defect, std::fabs(j.empirical[i] - prod[i]));
    rep.factorization_defect = defect;
    rep.joint = std::move(j);
  }
  return rep;
}

}  // namespace gcmc
