#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcmc/json_io.hpp"

namespace gcmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInfeasible = 3;

/// Maximum number of rows written by --trace.
inline constexpr std::uint64_t kMaxTraceRows = 10'000'000;

struct RunConfig {
  std::string command;
  std::string graph_path;
  std::string dist_path;
  std::string initial_path;
  std::string spec_path;
  std::string out_path;
  std::string trace_path;
  std::string format = "json";
  std::string mode = "auto";
  std::string schedule;
  std::string checkpoints;
  std::optional<double> epsilon;
  std::uint64_t k = 0;
  std::uint64_t contraction_steps = 0;
  std::uint64_t steps = 100000;
  std::uint64_t seed = 1;
  std::uint64_t replicas = 1;
  unsigned threads = 0;
};

namespace detail {

using io::json;

inline std::vector<std::uint64_t> parse_checkpoints(const std::string& s) {
  std::vector<std::uint64_t> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad checkpoint '" + item + "'");
    }
  }
  return out;
}

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream f(cfg.out_path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + cfg.out_path);
  f << text << '\n';
}

inline std::string counts_csv(const TrajectoryReport& r) {
  std::ostringstream os;
  os << "label,visit_count,empirical,target\n";
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    os << '"' << r.labels[i] << "\"," << r.visit_counts[i] << ',' << io::detail::format_double(r.empirical[i]) << ','
       << io::detail::format_double(r.target[i]) << '\n';
  std::string s = os.str();
  s.pop_back();
  return s;
}

inline void require_json_format(const RunConfig& cfg) {
  if (cfg.format != "json")
    throw Error(ErrorCode::InvalidArgument, "command '" + cfg.command + "' only supports --format json");
}

inline PlanOptions plan_options(const RunConfig& cfg, const Distribution& d) {
  PlanOptions opts;
  const bool has_eps = cfg.epsilon.has_value();
  const bool has_sched = !cfg.schedule.empty();
  if (cfg.mode == "auto") {
    if (has_eps && has_sched)
      throw Error(ErrorCode::ConflictingOptions, "--epsilon and --schedule are mutually exclusive");
  } else if (cfg.mode == "epsilon") {
    if (!has_eps) throw Error(ErrorCode::InvalidArgument, "--mode epsilon needs --epsilon");
    if (has_sched) throw Error(ErrorCode::ConflictingOptions, "--mode epsilon does not take --schedule");
  } else if (cfg.mode == "schedule") {
    if (!has_sched) throw Error(ErrorCode::InvalidArgument, "--mode schedule needs --schedule");
    if (has_eps) throw Error(ErrorCode::ConflictingOptions, "--mode schedule does not take --epsilon");
  } else if (cfg.mode == "homogeneous") {
    if (has_eps || has_sched)
      throw Error(ErrorCode::ConflictingOptions, "--mode homogeneous takes neither --epsilon nor --schedule");
    opts.exact_homogeneous = true;
  }
  if (has_eps) opts.epsilon = cfg.epsilon;
  if (has_sched) opts.schedule = io::parse_schedule_arg(cfg.schedule);
  if (!cfg.initial_path.empty()) {
    auto init = io::distribution_from_json(io::read_json_file(cfg.initial_path));
    require_same_labels(init, d);
    opts.initial = init;
  }
  return opts;
}

inline int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  require_json_format(cfg);
  auto g = io::graph_from_json(io::read_json_file(cfg.graph_path));
  auto d = io::distribution_from_json(io::read_json_file(cfg.dist_path));
  auto c = classify(d, g);
  emit(cfg, io::dump(io::case_to_json(c)), out);
  return c.tag == CaseTag::SupportSplit ? kExitInfeasible : kExitOk;
}

inline int cmd_plan(const RunConfig& cfg, std::ostream& out) {
  require_json_format(cfg);
  auto g = io::graph_from_json(io::read_json_file(cfg.graph_path));
  auto d = io::distribution_from_json(io::read_json_file(cfg.dist_path));
  auto p = plan(d, g, plan_options(cfg, d));
  emit(cfg, io::dump(io::plan_to_json(p)), out);
  return p.mode == PlanMode::Infeasible ? kExitInfeasible : kExitOk;
}

inline int cmd_kernel(const RunConfig& cfg, std::ostream& out) {
  require_json_format(cfg);
  auto g = io::graph_from_json(io::read_json_file(cfg.graph_path));
  auto d = io::distribution_from_json(io::read_json_file(cfg.dist_path));
  auto k = cfg.k ? build_kernel(mixture(d, cfg.k), g) : build_kernel(d, g);
  auto j = io::kernel_to_json(k);
  j["detailed_balance_residual"] = verify_reversible(k);
  j["stationary_residual"] = stationary_residual(k);
  emit(cfg, io::dump(j), out);
  return kExitOk;
}

inline int cmd_dobrushin(const RunConfig& cfg, std::ostream& out) {
  require_json_format(cfg);
  if (cfg.k == 0) throw Error(ErrorCode::InvalidArgument, "dobrushin needs --k");
  auto g = io::graph_from_json(io::read_json_file(cfg.graph_path));
  auto d = io::distribution_from_json(io::read_json_file(cfg.dist_path));
  auto j = io::lemma_to_json(lemma_bound_check(d, g, cfg.k));
  if (cfg.contraction_steps) {
    auto kernel = build_kernel(mixture(d, cfg.k), g);
    auto start = Distribution::dirac(d.labels(), ordered_labels(kernel.base(), kernel.ordering()).back());
    j["contraction"] = io::contraction_to_json(contraction_check(kernel, start, cfg.contraction_steps));
  }
  emit(cfg, io::dump(j), out);
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.format != "json" && cfg.format != "csv") throw Error(ErrorCode::InvalidArgument, "unknown format " + cfg.format);
  auto g = io::graph_from_json(io::read_json_file(cfg.graph_path));
  auto d = io::distribution_from_json(io::read_json_file(cfg.dist_path));
  auto p = plan(d, g, plan_options(cfg, d));
  if (p.mode == PlanMode::Infeasible) throw Error(ErrorCode::InfeasiblePlan, p.reason);
  if (cfg.replicas == 0) throw Error(ErrorCode::InvalidArgument, "--replicas must be at least 1");
  const auto cps = parse_checkpoints(cfg.checkpoints);

  std::vector<TrajectoryReport> reports;
  if (!cfg.trace_path.empty()) {
    std::ofstream trace(cfg.trace_path);
    if (!trace) throw Error(ErrorCode::InvalidArgument, "cannot write " + cfg.trace_path);
    trace << "time,state\n";
    RunOptions o;
    o.checkpoints = cps;
    std::uint64_t rows = 0;
    o.trace = [&](std::uint64_t t, std::size_t s) {
      if (rows++ < kMaxTraceRows) trace << t << ',' << g.label(s) << '\n';
    };
    reports.push_back(run(p, cfg.steps, cfg.seed, o));
    if (cfg.replicas > 1) {
      auto rest = run_replicas(p, cfg.steps, cfg.seed, cfg.replicas, cps, cfg.threads);
      for (std::size_t i = 1; i < rest.size(); ++i) reports.push_back(std::move(rest[i]));
    }
  } else {
    reports = run_replicas(p, cfg.steps, cfg.seed, cfg.replicas, cps, cfg.threads);
  }
  auto merged = merge_reports(reports);
  if (cfg.format == "csv") {
    emit(cfg, counts_csv(merged), out);
    return kExitOk;
  }
  json j = io::case_to_json(p.case_class);
  j["mode"] = std::string(to_string(p.mode));
  j["replica_count"] = reports.size();
  j["merged"] = io::report_to_json(merged);
  json per = json::array();
  for (const auto& r : reports) per.push_back(io::report_to_json(r));
  j["reports"] = per;
  emit(cfg, io::dump(j), out);
  return kExitOk;
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline json load_inline_or_file(const json& v, const std::filesystem::path& base) {
  if (v.is_string()) return io::read_json_file(resolve(base, v.get<std::string>()).string());
  return v;
}

/// {"factors": [{"graph": FILE|{...}, "dist": FILE|{...}, "schedule": "paper"|"growth:C"|FILE|{...}|null}]}
inline std::vector<ProductFactor> product_factors_from_json(const json& j, const std::filesystem::path& base) {
  if (!j.contains("factors") || !j.at("factors").is_array())
    throw Error(ErrorCode::ParseError, "product spec needs a 'factors' array");
  std::vector<ProductFactor> out;
  for (const auto& f : j.at("factors")) {
    ProductFactor pf{io::distribution_from_json(load_inline_or_file(io::detail::require(f, "dist"), base)),
                     io::graph_from_json(load_inline_or_file(io::detail::require(f, "graph"), base)),
                     std::nullopt};
    if (f.contains("schedule") && !f.at("schedule").is_null()) {
      const auto& s = f.at("schedule");
      if (s.is_object()) {
        pf.schedule = io::schedule_spec_from_json(s);
      } else {
        const auto arg = s.get<std::string>();
        pf.schedule = (arg == "paper" || arg.rfind("growth", 0) == 0) ? io::parse_schedule_arg(arg)
                                                                      : io::parse_schedule_arg(resolve(base, arg).string());
      }
    }
    out.push_back(std::move(pf));
  }
  return out;
}

inline int cmd_product(const RunConfig& cfg, std::ostream& out) {
  if (cfg.spec_path.empty()) throw Error(ErrorCode::InvalidArgument, "product needs --spec");
  const auto base = std::filesystem::path(cfg.spec_path).parent_path();
  auto factors = product_factors_from_json(io::read_json_file(cfg.spec_path), base);
  const ProductSpec spec = build_product_spec(factors);
  auto rep = run_product(spec, cfg.steps, cfg.seed, parse_checkpoints(cfg.checkpoints));
  if (cfg.format == "csv") {
    if (!rep.joint) throw Error(ErrorCode::InvalidArgument, "csv output needs a materialized joint space");
    emit(cfg, counts_csv(*rep.joint), out);
    return kExitOk;
  }
  require_json_format(cfg);
  emit(cfg, io::dump(io::product_report_to_json(rep, spec)), out);
  return kExitOk;
}

inline int cmd_counterexample(const RunConfig& cfg, std::ostream& out) {
  require_json_format(cfg);
  auto s = counterexample_scenario(cfg.replicas, cfg.steps, cfg.seed, cfg.threads);
  emit(cfg, io::dump(io::counterexample_to_json(s)), out);
  return kExitOk;
}

inline void print_error(std::ostream& err, std::string_view code, const std::string& detail) {
  err << io::dump(json{{"error", std::string(code)}, {"detail", detail}}, -1) << '\n';
}

}  // namespace detail

/// Parses argv-style arguments (without the program name) and runs the
/// command. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Graph-consistent Markov chain planner and simulator", "gcmc"};
  app.require_subcommand(1);

  auto add_shared = [&](CLI::App* sub, bool needs_graph) {
    if (needs_graph) {
      sub->add_option("--graph", cfg.graph_path, "graph JSON file")->required()->check(CLI::ExistingFile);
      sub->add_option("--dist", cfg.dist_path, "target distribution JSON file")->required()->check(CLI::ExistingFile);
    }
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out_path, "write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_plan_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", cfg.mode, "auto, homogeneous, epsilon or schedule")
        ->check(CLI::IsMember({"auto", "homogeneous", "epsilon", "schedule"}));
    sub->add_option("--epsilon", cfg.epsilon, "accepted TV error of a homogeneous approximation")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--schedule", cfg.schedule, "paper, growth:C, or a schedule JSON file");
    sub->add_option("--initial", cfg.initial_path, "initial distribution JSON file")->check(CLI::ExistingFile);
  };

  auto* classify_cmd = app.add_subcommand("classify", "classify the target/graph pair");
  add_shared(classify_cmd, true);
  auto* plan_cmd = app.add_subcommand("plan", "build a chain plan and print its schedule");
  add_shared(plan_cmd, true);
  add_plan_flags(plan_cmd);
  auto* kernel_cmd = app.add_subcommand("kernel", "dump the reversible kernel");
  add_shared(kernel_cmd, true);
  kernel_cmd->add_option("--k", cfg.k, "build from the k-th mixture instead of the target itself")
      ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 62));
  auto* dob_cmd = app.add_subcommand("dobrushin", "check the Dobrushin power bound");
  add_shared(dob_cmd, true);
  dob_cmd->add_option("--k", cfg.k, "mixture index")->required()->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 62));
  dob_cmd->add_option("--contraction-steps", cfg.contraction_steps, "also check TV contraction after n steps");
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a planned chain");
  add_shared(sim_cmd, true);
  add_plan_flags(sim_cmd);
  sim_cmd->add_option("--steps", cfg.steps, "trajectory length")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  sim_cmd->add_option("--replicas", cfg.replicas, "independent replicas")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 24));
  sim_cmd->add_option("--checkpoints", cfg.checkpoints, "comma-separated times for the TV trace");
  sim_cmd->add_option("--trace", cfg.trace_path, "write (time, state) rows of replica 0 as CSV");
  sim_cmd->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  auto* prod_cmd = app.add_subcommand("product", "run independent factor chains on a strong product");
  add_shared(prod_cmd, false);
  prod_cmd->add_option("--spec", cfg.spec_path, "product spec JSON file")->required()->check(CLI::ExistingFile);
  prod_cmd->add_option("--steps", cfg.steps, "trajectory length")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  prod_cmd->add_option("--checkpoints", cfg.checkpoints, "comma-separated times for the joint TV trace");
  auto* ce_cmd = app.add_subcommand("counterexample", "too-fast schedule non-convergence experiment");
  add_shared(ce_cmd, false);
  cfg.replicas = 1000;
  ce_cmd->add_option("--replicas", cfg.replicas, "replica count")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 24));
  ce_cmd->add_option("--steps", cfg.steps, "horizon")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  ce_cmd->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");

  std::vector<std::string> argv_store{"gcmc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    detail::print_error(err, "UsageError", e.what());
    return kExitInvalid;
  }
  // The counterexample defaults differ from simulate's.
  if (ce_cmd->parsed()) {
    if (ce_cmd->count("--steps") == 0) cfg.steps = 100000;
  } else if (sim_cmd->count("--replicas") == 0) {
    cfg.replicas = 1;
  }

  try {
    if (classify_cmd->parsed()) return (cfg.command = "classify", detail::cmd_classify(cfg, out));
    if (plan_cmd->parsed()) return (cfg.command = "plan", detail::cmd_plan(cfg, out));
    if (kernel_cmd->parsed()) return (cfg.command = "kernel", detail::cmd_kernel(cfg, out));
    if (dob_cmd->parsed()) return (cfg.command = "dobrushin", detail::cmd_dobrushin(cfg, out));
    if (sim_cmd->parsed()) return (cfg.command = "simulate", detail::cmd_simulate(cfg, out));
    if (prod_cmd->parsed()) return (cfg.command = "product", detail::cmd_product(cfg, out));
    if (ce_cmd->parsed()) return (cfg.command = "counterexample", detail::cmd_counterexample(cfg, out));
  } catch (const Error& e) {
    detail::print_error(err, to_string(e.code()), e.detail());
    const bool infeasible = e.code() == ErrorCode::InfeasiblePlan || e.code() == ErrorCode::InfeasibleFactor;
    return infeasible ? kExitInfeasible : kExitInvalid;
  } catch (const std::exception& e) {
    detail::print_error(err, "InternalError", e.what());
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace gcmc::cli
