#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "types.hpp"
#include "workload.hpp"

namespace socialcloud {

/// "LO:HI:STEP" -> the inclusive arithmetic sequence; a single value parses
/// to a one-element list.
inline std::vector<double> parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, ':')) parts.push_back(piece);
  try {
    if (parts.size() == 1) return {std::stod(parts[0])};
    if (parts.size() == 3) {
      const double lo = std::stod(parts[0]);
      const double hi = std::stod(parts[1]);
      const double step = std::stod(parts[2]);
      if (!(step > 0) || hi < lo)
        throw std::invalid_argument("range needs lo <= hi and step > 0: " + text);
      std::vector<double> vals;
      for (std::size_t i = 0;; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        if (v > hi + step * 1e-9) break;
        vals.push_back(v);
      }
      return vals;
    }
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("malformed range (want V or LO:HI:STEP): " + text);
  }
  throw std::invalid_argument("malformed range (want V or LO:HI:STEP): " + text);
}

/// Parse command-line arguments (program name excluded) into a plan.
/// Returns nullopt when --help was requested (help text goes to `out`).
/// Throws std::invalid_argument on malformed flags or semantic errors.
inline std::optional<experiment_plan> parse_config(std::vector<std::string> args,
                                                   std::ostream& out = std::cout) {
  CLI::App app{"SocialCloud simulator: outsource tasks over a social graph "
               "and measure normalized finishing times"};
  std::vector<std::string> graph_paths;
  std::string format = "edgelist";
  std::string p_spec = "0.1:0.5:0.1";
  std::string policy_spec = "all";
  std::string outliers_spec = "both";
  std::string task_spec_text;
  double theta = 1.0;
  double fail_rate = 0.0;
  std::uint64_t seed = 42;
  std::string grid_spec = "0:5:0.05";
  std::string overhead_spec;
  std::string out_dir = "results";
  unsigned jobs = 1;
  bool trace = false;
  std::string trigger_spec = "all-finished";

  app.add_option("--graph", graph_paths, "graph edge-list file (repeatable)")
      ->required();
  app.add_option("--format", format, "graph file format")->capture_default_str();
  app.add_option("--p", p_spec, "outsourcing probability, V or LO:HI:STEP")
      ->capture_default_str();
  app.add_option("--policy", policy_spec, "rr|sf|lf|all")->capture_default_str();
  app.add_option("--outliers", outliers_spec, "outlier handling: on|off|both")
      ->capture_default_str();
  app.add_option("--task", task_spec_text,
                 "task size model, const:T or uniform:LO:HI (default: both "
                 "const:1000 and uniform:500:1500)");
  app.add_option("--theta", theta, "re-split quantum in work units")
      ->capture_default_str();
  app.add_option("--fail-rate", fail_rate, "per-node failure probability")
      ->capture_default_str();
  app.add_option("--seed", seed, "master seed; cell seeds derive from it")
      ->capture_default_str();
  app.add_option("--grid", grid_spec, "ECDF grid LO:HI:STEP")->capture_default_str();
  app.add_option("--overhead", overhead_spec,
                 "emit control-overhead report: centralized|decentralized|both");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--jobs", jobs, "parallel cells")->capture_default_str();
  app.add_flag("--trace", trace, "emit per-cell event traces");
  app.add_option("--trigger", trigger_spec,
                 "straggler trigger reading: all-finished|any-idle")
      ->capture_default_str();
  app.set_config("--config", "", "read options from an INI file");

  try {
    std::reverse(args.begin(), args.end()); // CLI11 consumes from the back
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  if (format != "edgelist")
    throw std::invalid_argument("unsupported graph format: " + format);

  experiment_plan plan;
  plan.graph_paths = graph_paths;
  for (const auto& path : plan.graph_paths)
    if (!std::filesystem::exists(path))
      throw std::invalid_argument("graph file not found: " + path);

  plan.p_values = parse_range(p_spec);

  if (policy_spec == "all") {
    plan.policies = {policy_kind::rr, policy_kind::sf, policy_kind::lf};
  } else {
    plan.policies = {policy_from_string(policy_spec)};
  }

  if (outliers_spec == "both") {
    plan.outlier_flags = {true, false};
  } else if (outliers_spec == "on") {
    plan.outlier_flags = {true};
  } else if (outliers_spec == "off") {
    plan.outlier_flags = {false};
  } else {
    throw std::invalid_argument("outliers must be on|off|both, got: " + outliers_spec);
  }

  if (!task_spec_text.empty())
    plan.task_models = {task_size_model::parse(task_spec_text)};

  plan.theta_units = theta;
  plan.fail_rate = fail_rate;
  plan.master_seed = seed;

  const auto grid = parse_range(grid_spec);
  if (grid.size() < 2)
    throw std::invalid_argument("grid needs LO:HI:STEP form: " + grid_spec);
  {
    std::vector<std::string> parts;
    std::string piece;
    std::istringstream in(grid_spec);
    while (std::getline(in, piece, ':')) parts.push_back(piece);
    plan.grid_lo = std::stod(parts[0]);
    plan.grid_hi = std::stod(parts[1]);
    plan.grid_step = std::stod(parts[2]);
  }

  if (!overhead_spec.empty()) {
    if (overhead_spec == "both") {
      plan.overhead_modes = {overhead_mode::centralized, overhead_mode::decentralized};
    } else if (overhead_spec == "centralized") {
      plan.overhead_modes = {overhead_mode::centralized};
    } else if (overhead_spec == "decentralized") {
      plan.overhead_modes = {overhead_mode::decentralized};
    } else {
      throw std::invalid_argument("overhead must be centralized|decentralized|both");
    }
  }

  plan.out_dir = out_dir;
  plan.jobs = jobs;
  plan.trace = trace;

  if (trigger_spec == "all-finished") {
    plan.trigger = straggler_trigger::all_finished;
  } else if (trigger_spec == "any-idle") {
    plan.trigger = straggler_trigger::any_idle;
  } else {
    throw std::invalid_argument("trigger must be all-finished|any-idle");
  }

  plan.validate();
  return plan;
}

} // namespace socialcloud
