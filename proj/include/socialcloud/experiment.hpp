#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "types.hpp"
#include "workload.hpp"

namespace socialcloud {

/// The experiment grid: the Cartesian product of every axis is the run set.
/// Defaults reproduce the published sweep: p from 0.1 to 0.5 in 0.1 steps,
/// all three policies, outlier handling both ways, constant-1000 and
/// uniform-[500,1500] task sizes.
struct experiment_plan {
  std::vector<std::string> graph_paths;
  std::vector<double> p_values = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<policy_kind> policies = {policy_kind::rr, policy_kind::sf, policy_kind::lf};
  std::vector<bool> outlier_flags = {true, false};
  std::vector<task_size_model> task_models = {task_size_model::constant(1000),
                                              task_size_model::uniform(500, 1500)};
  double theta_units = 1.0;
  double fail_rate = 0.0;
  straggler_trigger trigger = straggler_trigger::all_finished;
  std::uint64_t master_seed = 42;
  double grid_lo = 0.0;
  double grid_hi = 5.0;
  double grid_step = 0.05;
  std::vector<overhead_mode> overhead_modes; // empty: no overhead report
  std::string out_dir = "results";
  unsigned jobs = 1;
  bool trace = false;

  void validate() const {
    if (graph_paths.empty()) throw std::invalid_argument("at least one graph required");
    if (p_values.empty() || policies.empty() || outlier_flags.empty() ||
        task_models.empty())
      throw std::invalid_argument("empty experiment axis");
    for (double p : p_values)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("p values must lie in [0, 1]");
    if (!(fail_rate >= 0.0 && fail_rate <= 1.0))
      throw std::invalid_argument("fail rate must lie in [0, 1]");
    if (theta_units < 0) throw std::invalid_argument("theta must be >= 0");
    make_grid(grid_lo, grid_hi, grid_step); // throws on a bad grid
  }
};

/// One point of the grid. `seed` is derived from (master seed, index), so a
/// sweep is reproducible as a whole and each cell independently.
struct plan_cell {
  std::size_t index = 0;
  std::size_t graph_index = 0;
  double p = 0.0;
  policy_kind policy = policy_kind::rr;
  bool outliers = true;
  task_size_model model;
  std::uint64_t seed = 0;
};

/// Axis nesting order (graph, p, policy, outliers, model) is part of the
/// reproducibility contract: it fixes cell indices and hence seeds.
inline std::vector<plan_cell> enumerate_cells(const experiment_plan& plan) {
  std::vector<plan_cell> cells;
  std::size_t index = 0;
  for (std::size_t gi = 0; gi < plan.graph_paths.size(); ++gi)
    for (double p : plan.p_values)
      for (policy_kind policy : plan.policies)
        for (bool outliers : plan.outlier_flags)
          for (const auto& model : plan.task_models) {
            plan_cell c;
            c.index = index;
            c.graph_index = gi;
            c.p = p;
            c.policy = policy;
            c.outliers = outliers;
            c.model = model;
            c.seed = derive_cell_seed(plan.master_seed, index);
            cells.push_back(c);
            ++index;
          }
  return cells;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

struct cell_output {
  std::string name; // file name within out_dir
  std::string checksum;
};

struct cell_result {
  bool ok = false;
  std::string error;
  std::vector<cell_output> outputs;
  run_summary summary;
};

struct plan_result {
  std::vector<cell_result> cells;
  std::string manifest_path;
  int exit_code = 0;
};

namespace detail {

inline std::string graph_id_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline std::string sanitize_for_filename(std::string s) {
  for (char& c : s)
    if (c == ':' || c == '/' || c == ' ') c = '-';
  return s;
}

inline std::string cell_stem(const plan_cell& cell, const std::string& graph_id) {
  return "c" + std::to_string(cell.index) + "_" + graph_id + "_" +
         socialcloud::to_string(cell.policy) + "_p" + fmt_double("%.6g", cell.p) +
         "_" + (cell.outliers ? "on" : "off") + "_" +
         sanitize_for_filename(cell.model.to_string());
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

inline cell_result run_cell(const graph& g, const std::string& graph_id,
                            const experiment_plan& plan, const plan_cell& cell) {
  cell_result res;
  split_mix64 rng(cell.seed);
  workload w = build_workload(g, cell.p, cell.model, rng);

  sim_config cfg;
  cfg.policy = cell.policy;
  cfg.handle_outliers = cell.outliers;
  cfg.theta_units = plan.theta_units;
  cfg.trigger = plan.trigger;
  if (plan.fail_rate > 0.0)
    cfg.failures = failure_spec{plan.fail_rate, micro_to_units(cell.model.mean)};
  cfg.seed = cell.seed;
  cfg.record_trace = plan.trace;

  sim_result sim = run_simulation(g, w.tasks, w.splits, cfg, &rng);

  config_echo echo;
  echo.graph_id = graph_id;
  echo.policy = cell.policy;
  echo.p = cell.p;
  echo.outliers = cell.outliers;
  echo.task_model = cell.model.to_string();
  echo.seed = cell.seed;

  const auto xs = normalized_times(sim.outcomes);
  const auto series = ecdf(xs, make_grid(plan.grid_lo, plan.grid_hi, plan.grid_step));
  res.summary = summarize(sim.outcomes, echo);

  std::ostringstream task_csv;
  emit_task_csv(task_csv, echo, g, sim.outcomes);
  std::ostringstream ecdf_csv;
  emit_ecdf_csv(ecdf_csv, series, res.summary);

  const std::string stem = cell_stem(cell, graph_id);
  const auto dir = std::filesystem::path(plan.out_dir);
  const std::string task_name = stem + ".tasks.csv";
  const std::string ecdf_name = stem + ".ecdf.csv";
  write_file(dir / task_name, task_csv.str());
  write_file(dir / ecdf_name, ecdf_csv.str());
  res.outputs.push_back({task_name, fnv1a64_hex(task_csv.str())});
  res.outputs.push_back({ecdf_name, fnv1a64_hex(ecdf_csv.str())});

  if (plan.trace) {
    std::string text;
    for (const auto& line : sim.trace) {
      text += line;
      text += '\n';
    }
    const std::string trace_name = stem + ".trace.txt";
    write_file(dir / trace_name, text);
    res.outputs.push_back({trace_name, fnv1a64_hex(text)});
  }
  res.ok = true;
  return res;
}

inline nlohmann::json plan_to_json(const experiment_plan& plan) {
  nlohmann::json j;
  j["graphs"] = plan.graph_paths;
  std::vector<std::string> ps;
  for (double p : plan.p_values) ps.push_back(fmt_double("%.6g", p));
  j["p_values"] = ps;
  std::vector<std::string> pols;
  for (auto pk : plan.policies) pols.push_back(socialcloud::to_string(pk));
  j["policies"] = pols;
  std::vector<std::string> outs;
  for (bool b : plan.outlier_flags) outs.push_back(b ? "on" : "off");
  j["outlier_flags"] = outs;
  std::vector<std::string> models;
  for (const auto& m : plan.task_models) models.push_back(m.to_string());
  j["task_models"] = models;
  j["theta"] = fmt_double("%.6g", plan.theta_units);
  j["fail_rate"] = fmt_double("%.6g", plan.fail_rate);
  j["trigger"] = plan.trigger == straggler_trigger::all_finished ? "all-finished"
                                                                 : "any-idle";
  j["master_seed"] = plan.master_seed;
  j["grid"] = fmt_double("%.6g", plan.grid_lo) + std::string(":") +
              fmt_double("%.6g", plan.grid_hi) + ":" +
              fmt_double("%.6g", plan.grid_step);
  std::vector<std::string> ohm;
  for (auto m : plan.overhead_modes) ohm.push_back(socialcloud::to_string(m));
  j["overhead_modes"] = ohm;
  j["jobs"] = plan.jobs;
  j["trace"] = plan.trace;
  return j;
}

} // namespace detail

/// Execute every cell (optionally in parallel), write per-cell CSVs, the
/// per-graph overhead reports, and a manifest listing every output with a
/// checksum. A failing cell is recorded and does not stop the others.
inline plan_result run_plan(const experiment_plan& plan) {
  plan.validate();
  std::filesystem::create_directories(plan.out_dir);
  const auto cells = enumerate_cells(plan);

  // Graph ids: file stem, disambiguated by position when stems repeat.
  std::vector<std::string> graph_ids;
  for (std::size_t i = 0; i < plan.graph_paths.size(); ++i) {
    std::string id = detail::graph_id_from_path(plan.graph_paths[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (detail::graph_id_from_path(plan.graph_paths[j]) == id) {
        id += "_" + std::to_string(i);
        break;
      }
    graph_ids.push_back(id);
  }

  std::vector<graph> graphs(plan.graph_paths.size());
  std::vector<std::string> graph_errors(plan.graph_paths.size());
  for (std::size_t i = 0; i < plan.graph_paths.size(); ++i) {
    try {
      graphs[i] = load_edge_list_file(plan.graph_paths[i]);
    } catch (const std::exception& e) {
      graph_errors[i] = e.what();
    }
  }

  plan_result result;
  result.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const unsigned jobs = std::max(plan.jobs, 1u);
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const auto& cell = cells[i];
      auto& slot = result.cells[i];
      if (!graph_errors[cell.graph_index].empty()) {
        slot.ok = false;
        slot.error = "graph load failed: " + graph_errors[cell.graph_index];
        continue;
      }
      try {
        slot = detail::run_cell(graphs[cell.graph_index], graph_ids[cell.graph_index],
                                plan, cell);
      } catch (const std::exception& e) {
        slot.ok = false;
        slot.error = e.what();
      }
    }
  };
  if (jobs == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }

  nlohmann::json manifest;
  manifest["plan"] = detail::plan_to_json(plan);

  nlohmann::json jgraphs = nlohmann::json::array();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    nlohmann::json jg;
    jg["id"] = graph_ids[i];
    jg["path"] = plan.graph_paths[i];
    if (!graph_errors[i].empty()) {
      jg["error"] = graph_errors[i];
    } else {
      const auto st = compute_stats(graphs[i]);
      jg["nodes"] = st.nodes;
      jg["edges"] = st.edges;
      jg["mean_degree"] = detail::fmt_double("%.6g", st.mean_degree);
      jg["isolated"] = st.isolated;
      nlohmann::json jo = nlohmann::json::array();
      for (auto mode : plan.overhead_modes) {
        const auto rep = total_control_overhead(graphs[i], mode);
        nlohmann::json jr;
        jr["mode"] = socialcloud::to_string(mode);
        jr["sync_rounds"] = rep.sync_rounds;
        jr["total_messages"] = rep.total_messages;
        jo.push_back(jr);
      }
      jg["overhead"] = jo;
      if (!plan.overhead_modes.empty()) {
        std::string text = "mode,sync_rounds,total_messages\n";
        overhead_report any;
        for (auto mode : plan.overhead_modes) {
          const auto rep = total_control_overhead(graphs[i], mode);
          any = rep;
          text += socialcloud::to_string(mode) + "," + std::to_string(rep.sync_rounds) +
                  "," + std::to_string(rep.total_messages) + "\n";
        }
        text += "# " + any.asymptotic_note + "\n";
        const std::string name = graph_ids[i] + ".overhead.csv";
        detail::write_file(std::filesystem::path(plan.out_dir) / name, text);
        jg["overhead_file"] = name;
        jg["overhead_checksum"] = fnv1a64_hex(text);
      }
    }
    jgraphs.push_back(jg);
  }
  manifest["graphs"] = jgraphs;

  nlohmann::json jcells = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    const auto& slot = result.cells[i];
    nlohmann::json jc;
    jc["index"] = cell.index;
    jc["graph"] = graph_ids[cell.graph_index];
    jc["policy"] = socialcloud::to_string(cell.policy);
    jc["p"] = detail::fmt_double("%.6g", cell.p);
    jc["outliers"] = cell.outliers ? "on" : "off";
    jc["task_model"] = cell.model.to_string();
    jc["seed"] = cell.seed;
    if (slot.ok) {
      jc["status"] = "ok";
      nlohmann::json jf = nlohmann::json::array();
      for (const auto& o : slot.outputs) {
        nlohmann::json jo;
        jo["name"] = o.name;
        jo["fnv1a64"] = o.checksum;
        jf.push_back(jo);
      }
      jc["files"] = jf;
      nlohmann::json js;
      js["completed"] = slot.summary.completed;
      js["incomplete"] = slot.summary.incomplete;
      js["resplits"] = slot.summary.resplits;
      if (slot.summary.completed > 0) {
        js["frac_at_1"] = detail::fmt_double("%.6f", slot.summary.frac_at_1);
        js["frac_at_2"] = detail::fmt_double("%.6f", slot.summary.frac_at_2);
        js["mean_x"] = detail::fmt_double("%.6f", slot.summary.mean_x);
        js["median_x"] = detail::fmt_double("%.6f", slot.summary.median_x);
      }
      jc["summary"] = js;
    } else {
      jc["status"] = "error";
      jc["error"] = slot.error;
      result.exit_code = 1;
    }
    jcells.push_back(jc);
  }
  manifest["cells"] = jcells;

  const auto manifest_path = std::filesystem::path(plan.out_dir) / "manifest.json";
  detail::write_file(manifest_path, manifest.dump(2) + "\n");
  result.manifest_path = manifest_path.string();
  return result;
}

} // namespace socialcloud
