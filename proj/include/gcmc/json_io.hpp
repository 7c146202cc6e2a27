#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/kernel.hpp"
#include "gcmc/planner.hpp"
#include "gcmc/product.hpp"
#include "gcmc/simulator.hpp"

namespace gcmc::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Output: floats always carry 17 significant digits.

namespace detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline void write(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad = indent >= 0 ? std::string(std::size_t(indent) * std::size_t(depth + 1), ' ') : "";
  const std::string close_pad = indent >= 0 ? std::string(std::size_t(indent) * std::size_t(depth), ' ') : "";
  const char* nl = indent >= 0 ? "\n" : "";
  const char* sep = indent >= 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(it.key()).dump() << sep;
        write(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // numeric rows stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat || indent < 0) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << (indent >= 0 ? ", " : ",");
          write(os, j[i], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        write(os, j[i], indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serializes with every float printed to 17 significant digits.
inline std::string dump(const json& j, int indent = 2) {
  std::ostringstream os;
  detail::write(os, j, indent, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Input

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::vector<std::string> string_list(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw Error(ErrorCode::ParseError, std::string(what) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline double parse_mass(const json& e) {
  if (e.is_number()) return e.get<double>();
  if (e.is_string()) {
    const auto s = e.get<std::string>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "mass '" + s + "' is not a decimal number");
    }
    if (used != s.size()) throw Error(ErrorCode::ParseError, "mass '" + s + "' is not a decimal number");
    return v;
  }
  throw Error(ErrorCode::ParseError, "mass entries must be numbers or decimal strings");
}

}  // namespace detail

/// {"labels": [...], "edges": [["u","v"], ...]}
inline Graph graph_from_json(const json& j) {
  auto labels = detail::string_list(detail::require(j, "labels"), "labels");
  std::vector<LabelPair> edges;
  const auto& je = detail::require(j, "edges");
  if (!je.is_array()) throw Error(ErrorCode::ParseError, "edges must be an array");
  for (const auto& e : je) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw Error(ErrorCode::ParseError, "each edge must be a pair of labels");
    edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return build_graph(std::move(labels), edges);
}

/// Canonical form: endpoints and edges sorted lexicographically by label.
inline json graph_to_json(const Graph& g) {
  std::vector<LabelPair> edges = g.edge_labels();
  for (auto& [a, b] : edges)
    if (b < a) std::swap(a, b);
  std::sort(edges.begin(), edges.end());
  json je = json::array();
  for (const auto& [a, b] : edges) je.push_back(json::array({a, b}));
  return json{{"labels", g.labels()}, {"edges", je}};
}

/// {"labels": [...], "mass": [...]}; masses may be numbers or decimal strings.
inline Distribution distribution_from_json(const json& j) {
  auto labels = detail::string_list(detail::require(j, "labels"), "labels");
  const auto& jm = detail::require(j, "mass");
  if (!jm.is_array()) throw Error(ErrorCode::ParseError, "mass must be an array");
  std::vector<double> mass;
  for (const auto& e : jm) mass.push_back(detail::parse_mass(e));
  return Distribution::from_parsed(std::move(labels), std::move(mass));
}

inline json distribution_to_json(const Distribution& d) {
  return json{{"labels", d.labels()}, {"mass", d.mass()}};
}

inline json matrix_to_json(const Matrix<double>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

/// {"labels", "ordering", "p", "matrix"}: matrix rows and columns follow label order.
inline json kernel_to_json(const StochasticKernel& k) {
  json j;
  j["labels"] = k.labels();
  j["ordering"] = ordered_labels(k.base(), k.ordering());
  j["p"] = k.p() ? json(*k.p()) : json(nullptr);
  j["matrix"] = matrix_to_json(k.matrix());
  return j;
}

inline json case_to_json(const CaseClass& c) {
  json w;
  w["support"] = c.support;
  if (c.atom) w["atom"] = *c.atom;
  if (c.tag != CaseTag::Dirac) {
    w["support_components"] = c.support_components;
    w["support_by_graph_component"] = c.support_by_component;
  }
  if (!c.component.empty()) w["component"] = c.component;
  if (c.split_pair) w["split_pair"] = json::array({c.split_pair->first, c.split_pair->second});
  return json{{"case", std::string(to_string(c.tag))}, {"witness", w}};
}

inline json schedule_to_json(const Schedule& s, std::size_t table_rows = 20) {
  json j;
  j["kind"] = std::string(to_string(s.kind()));
  j["state_count"] = s.state_count();
  j["k_start"] = s.k_start();
  j["faithful"] = s.faithful();
  if (s.kind() == ScheduleKind::GrowthConstrained) j["c"] = s.c();
  if (s.kind() == ScheduleKind::Practical) j["blocks"] = s.blocks();
  json table = json::array();
  const auto bounds = s.boundaries(table_rows);
  for (std::size_t i = 0; i < bounds.size(); ++i)
    table.push_back(json{{"k", s.k_start() + i}, {"start", bounds[i].str()}});
  j["boundaries"] = table;
  return j;
}

inline json plan_to_json(const ChainPlan& p) {
  json j = case_to_json(p.case_class);
  j["mode"] = std::string(to_string(p.mode));
  j["faithful"] = p.faithful();
  j["state_labels"] = p.state_labels();
  if (p.mode == PlanMode::Infeasible) {
    j["reason"] = p.reason;
    return j;
  }
  j["initial"] = distribution_to_json(p.initial);
  if (p.k) j["k"] = *p.k;
  if (p.epsilon) j["epsilon"] = *p.epsilon;
  if (p.advertised_tv) j["advertised_tv"] = *p.advertised_tv;
  if (p.kernel) j["kernel"] = kernel_to_json(*p.kernel);
  if (p.schedule) j["schedule"] = schedule_to_json(*p.schedule);
  return j;
}

inline json report_to_json(const TrajectoryReport& r) {
  json j;
  j["seed"] = r.seed;
  j["replica"] = r.replica;
  j["steps"] = r.steps;
  j["mode"] = std::string(to_string(r.mode));
  j["faithful"] = r.faithful;
  j["labels"] = r.labels;
  j["visit_counts"] = r.visit_counts;
  j["empirical"] = r.empirical.mass();
  j["target"] = r.target.mass();
  j["final_tv"] = r.final_tv();
  json trace = json::array();
  for (auto [t, tv] : r.tv_trace) trace.push_back(json{{"t", t}, {"tv", tv}});
  j["tv_trace"] = trace;
  j["consistency_violations"] = r.consistency_violations;
  j["initial_state"] = r.initial_state;
  j["final_state"] = r.final_state;
  if (r.last_k) j["last_k"] = *r.last_k;
  return j;
}

inline json lemma_to_json(const LemmaReport& r) {
  return json{{"n", r.n}, {"k", r.k}, {"c_n", r.c_n}, {"delta", r.delta}, {"bound", r.bound}, {"holds", r.holds}};
}

inline json contraction_to_json(const ContractionReport& r) {
  return json{{"steps", r.steps}, {"tv", r.tv}, {"bound", r.bound}, {"holds", r.holds}};
}

inline json counterexample_to_json(const CounterexampleSummary& s) {
  return json{{"replicas", s.replicas},
              {"steps", s.steps},
              {"seed", s.seed},
              {"stuck_fraction", s.stuck_fraction},
              {"mean_final_tv", s.mean_final_tv},
              {"mean_s1_frequency", s.mean_s1_frequency},
              {"consistency_violations", s.consistency_violations}};
}

inline json product_report_to_json(const ProductReport& r, const ProductSpec& spec) {
  json j;
  j["seed"] = r.seed;
  j["steps"] = r.steps;
  j["factors"] = spec.factor_count();
  j["faithful"] = spec.faithful;
  j["joint_size"] = spec.joint_size;
  j["joint_violations"] = r.joint_violations;
  j["joint"] = r.joint ? report_to_json(*r.joint) : json(nullptr);
  if (r.factorization_defect) j["factorization_defect"] = *r.factorization_defect;
  json m = json::array();
  for (const auto& rep : r.marginals) m.push_back(report_to_json(rep));
  j["marginals"] = m;
  return j;
}

/// Schedule request: "paper", "growth:C", or a JSON file with
/// {"kind": "paper_poly" | "growth_constrained" | "practical", "c": ..., "blocks": [...],
///  "geometric": {"first": ..., "ratio": ..., "count": ...}}.
inline ScheduleSpec schedule_spec_from_json(const json& j) {
  ScheduleSpec s;
  const auto kind = detail::require(j, "kind").get<std::string>();
  if (kind == "paper_poly") {
    s.kind = ScheduleKind::PaperPoly;
  } else if (kind == "growth_constrained") {
    s.kind = ScheduleKind::GrowthConstrained;
    if (j.contains("c")) s.overrides.c = j.at("c").get<double>();
  } else if (kind == "practical") {
    s.kind = ScheduleKind::Practical;
    if (j.contains("blocks")) {
      for (const auto& b : j.at("blocks")) {
        if (!b.is_number_integer() || b.get<long long>() < 0)
          throw Error(ErrorCode::InvalidOverride, "block lengths must be non-negative integers");
        s.overrides.blocks.push_back(b.get<std::uint64_t>());
      }
    } else if (j.contains("geometric")) {
      const auto& gj = j.at("geometric");
      s.overrides.blocks = geometric_blocks(detail::require(gj, "first").get<std::uint64_t>(),
                                            detail::require(gj, "ratio").get<std::uint64_t>(),
                                            detail::require(gj, "count").get<std::size_t>());
    } else {
      throw Error(ErrorCode::InvalidOverride, "practical schedule needs 'blocks' or 'geometric'");
    }
  } else {
    throw Error(ErrorCode::ParseError, "unknown schedule kind '" + kind + "'");
  }
  return s;
}

inline ScheduleSpec parse_schedule_arg(const std::string& arg) {
  if (arg == "paper") return ScheduleSpec{ScheduleKind::PaperPoly, {}};
  if (arg.rfind("growth:", 0) == 0) {
    ScheduleSpec s{ScheduleKind::GrowthConstrained, {}};
    try {
      s.overrides.c = std::stod(arg.substr(7));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidOverride, "bad growth constant in '" + arg + "'");
    }
    if (!(*s.overrides.c > 0.0)) throw Error(ErrorCode::InvalidOverride, "growth constant c must be positive");
    return s;
  }
  if (arg == "growth") return ScheduleSpec{ScheduleKind::GrowthConstrained, {}};
  return schedule_spec_from_json(read_json_file(arg));
}

}  // namespace gcmc::io
