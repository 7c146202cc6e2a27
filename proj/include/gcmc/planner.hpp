#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/kernel.hpp"
#include "gcmc/schedule.hpp"

namespace gcmc {

enum class CaseTag { Dirac, ConnectedSupport, SupportInOneComponent, SupportSplit };

constexpr std::string_view to_string(CaseTag t) {
  switch (t) {
    case CaseTag::Dirac: return "DIRAC";
    case CaseTag::ConnectedSupport: return "CONNECTED_SUPPORT";
    case CaseTag::SupportInOneComponent: return "SUPPORT_IN_ONE_COMPONENT";
    case CaseTag::SupportSplit: return "SUPPORT_SPLIT";
  }
  return "?";
}

/// Which of the four support/graph situations a (target, graph) pair is in,
/// with the evidence for it.
struct CaseClass {
  CaseTag tag = CaseTag::Dirac;
  std::vector<std::string> support;
  /// DIRAC: the atom.
  std::optional<std::string> atom;
  /// Components of G[supp], in order of first label (all cases but DIRAC).
  std::vector<std::vector<std::string>> support_components;
  /// Support grouped by the component of G it falls in.
  std::vector<std::vector<std::string>> support_by_component;
  /// SUPPORT_IN_ONE_COMPONENT / CONNECTED_SUPPORT: the component of G holding the support.
  std::vector<std::string> component;
  /// SUPPORT_SPLIT: two support labels in different components of G.
  std::optional<std::pair<std::string, std::string>> split_pair;
};

inline CaseClass classify(const Distribution& d, const Graph& g) {
  require_labels_match(d, g);
  CaseClass out;
  out.support = support(d);
  if (out.support.size() == 1) {
    out.tag = CaseTag::Dirac;
    out.atom = out.support.front();
    return out;
  }
  out.support_components = connected_components(induced_subgraph(g, out.support));

  const auto comp = component_ids(g);
  std::map<std::size_t, std::vector<std::string>> grouped;
  for (const auto& s : out.support) grouped[comp[g.index_of(s)]].push_back(s);
  for (auto& [id, labels] : grouped) out.support_by_component.push_back(labels);

  if (grouped.size() > 1) {
    out.tag = CaseTag::SupportSplit;
    out.split_pair = {out.support_by_component[0].front(), out.support_by_component[1].front()};
    return out;
  }
  const auto home = grouped.begin()->first;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (comp[i] == home) out.component.push_back(g.label(i));
  out.tag = out.support_components.size() == 1 ? CaseTag::ConnectedSupport : CaseTag::SupportInOneComponent;
  return out;
}

enum class PlanMode { Constant, Homogeneous, NonHomogeneous, Infeasible };

constexpr std::string_view to_string(PlanMode m) {
  switch (m) {
    case PlanMode::Constant: return "CONSTANT";
    case PlanMode::Homogeneous: return "HOMOGENEOUS";
    case PlanMode::NonHomogeneous: return "NONHOMOGENEOUS";
    case PlanMode::Infeasible: return "INFEASIBLE";
  }
  return "?";
}

/// Requested schedule; the planner fills in N and k_start from the state
/// space it settles on.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::PaperPoly;
  ScheduleOverrides overrides;
};

struct PlanOptions {
  std::optional<ScheduleSpec> schedule;
  std::optional<double> epsilon;
  /// Initial law over the full label list; defaults to uniform on the plan's state space.
  std::optional<Distribution> initial;
  /// Ask for an exact homogeneous chain. Impossible when the support is
  /// disconnected inside one component; such requests yield an INFEASIBLE plan.
  bool exact_homogeneous = false;
};

/// Lazily built kernels P^(mu_k, G), one per mixture index k. Shared between
/// copies of a plan and safe to query from several threads.
class KernelFamily {
 public:
  KernelFamily(Distribution target, Graph graph) : target_(std::move(target)), graph_(std::move(graph)) {}

  std::shared_ptr<const StochasticKernel> at(std::uint64_t k) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    auto kernel = std::make_shared<const StochasticKernel>(build_kernel(mixture(target_, k), graph_));
    cache_.emplace(k, kernel);
    return kernel;
  }

  const Distribution& target() const noexcept { return target_; }
  const Graph& graph() const noexcept { return graph_; }

 private:
  Distribution target_;
  Graph graph_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const StochasticKernel>> cache_;
};

/// Executable chain description. The state space is a sub-list of the full
/// graph's labels: the atom, the support, or the component holding the
/// support, depending on the case.
struct ChainPlan {
  CaseClass case_class;
  PlanMode mode = PlanMode::Infeasible;
  Graph graph;                  // full input graph
  Distribution target;          // full input target
  Graph state_graph;            // graph the chain moves on
  Distribution state_target;    // target restricted to the state space
  Distribution initial;         // over the state space
  std::optional<StochasticKernel> kernel;      // CONSTANT / HOMOGENEOUS
  std::optional<Schedule> schedule;            // NONHOMOGENEOUS
  std::shared_ptr<KernelFamily> family;        // NONHOMOGENEOUS
  std::optional<std::uint64_t> k;              // mixture index of an epsilon plan
  std::optional<double> epsilon;
  std::optional<double> advertised_tv;         // TV(mu_k, mu) of an epsilon plan
  std::string reason;                          // INFEASIBLE explanation

  const std::vector<std::string>& state_labels() const noexcept { return state_graph.labels(); }
  bool faithful() const { return !schedule || schedule->faithful(); }
};

namespace detail {

inline Distribution initial_on(const std::vector<std::string>& states, const std::optional<Distribution>& user) {
  if (!user) return Distribution::uniform(states);
  for (std::size_t i = 0; i < user->size(); ++i) {
    if ((*user)[i] > 0.0 && std::find(states.begin(), states.end(), user->labels()[i]) == states.end())
      throw Error(ErrorCode::InvalidArgument,
                  "initial distribution charges " + user->labels()[i] + " outside the chain's state space");
  }
  return user->restrict_to(states);
}

/// Epsilon plans use k = max(ceil(1/eps), kbar + 1).
inline std::uint64_t epsilon_index(double eps, const Distribution& d) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  const std::uint64_t from_eps = ceil_to_u64(1.0 / eps);
  return std::max(from_eps, first_mixture_index(d));
}

}  // namespace detail

inline ChainPlan plan(const Distribution& d, const Graph& g, const PlanOptions& opts = {}) {
  if (opts.schedule && opts.epsilon)
    throw Error(ErrorCode::ConflictingOptions, "supply either a schedule or an epsilon, not both");
  ChainPlan out;
  out.case_class = classify(d, g);
  out.graph = g;
  out.target = d;
  const auto& cc = out.case_class;

  switch (cc.tag) {
    case CaseTag::Dirac: {
      out.mode = PlanMode::Constant;
      out.state_graph = induced_subgraph(g, std::vector<std::string>{*cc.atom});
      out.state_target = d.restrict_to(out.state_graph.labels());
      out.kernel = build_kernel(out.state_target, out.state_graph);
      break;
    }
    case CaseTag::ConnectedSupport: {
      out.mode = PlanMode::Homogeneous;
      out.state_graph = induced_subgraph(g, cc.support);
      out.state_target = d.restrict_to(out.state_graph.labels());
      out.kernel = build_kernel(out.state_target, out.state_graph);
      break;
    }
    case CaseTag::SupportInOneComponent: {
      out.state_graph = induced_subgraph(g, cc.component);
      out.state_target = d.restrict_to(out.state_graph.labels());
      if (opts.exact_homogeneous) {
        out.mode = PlanMode::Infeasible;
        out.reason =
            "support is disconnected inside one component: no homogeneous graph-consistent chain has this "
            "target as its limiting empirical law";
        out.state_graph = g;
        out.state_target = d;
        break;
      }
      if (opts.epsilon) {
        out.mode = PlanMode::Homogeneous;
        out.epsilon = *opts.epsilon;
        out.k = detail::epsilon_index(*opts.epsilon, out.state_target);
        auto mixed = mixture(out.state_target, *out.k);
        out.advertised_tv = tv_distance(mixed, out.state_target);
        out.kernel = build_kernel(mixed, out.state_graph);
      } else if (opts.schedule) {
        out.mode = PlanMode::NonHomogeneous;
        out.schedule = make_schedule(opts.schedule->kind, out.state_target, out.state_graph, opts.schedule->overrides);
        out.family = std::make_shared<KernelFamily>(out.state_target, out.state_graph);
      } else {
        throw Error(ErrorCode::MissingSchedule,
                    "support is disconnected inside its component: supply a schedule or an epsilon");
      }
      break;
    }
    case CaseTag::SupportSplit: {
      out.mode = PlanMode::Infeasible;
      out.reason = "support states " + cc.split_pair->first + " and " + cc.split_pair->second +
                   " lie in different components of the graph";
      out.state_graph = g;
      out.state_target = d;
      break;
    }
  }
  out.initial = detail::initial_on(out.state_graph.labels(), opts.initial);
  return out;
}

/// Kernel in force at time t of a non-homogeneous plan.
inline std::shared_ptr<const StochasticKernel> kernel_at_time(const ChainPlan& p, std::uint64_t t) {
  if (p.mode != PlanMode::NonHomogeneous)
    throw Error(ErrorCode::WrongMode, "kernel_at_time needs a NONHOMOGENEOUS plan, got " + std::string(to_string(p.mode)));
  return p.family->at(p.schedule->locate(t));
}

}  // namespace gcmc
