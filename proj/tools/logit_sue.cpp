// logit_sue: solve, spectra and bench front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "logit_sue/equilibrium.hpp"
#include "logit_sue/error.hpp"
#include "logit_sue/kernels.hpp"
#include "logit_sue/operators.hpp"
#include "logit_sue/parallel.hpp"
#include "logit_sue/pathset.hpp"
#include "logit_sue/report.hpp"
#include "logit_sue/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;

struct RunConfig {
  std::string net_path;
  std::string trips_path;
  std::string paths_path;  // optional fixed path set
  double theta = 1.0;
  double demand_multiplier = 1.0;
  int k_paths = 20;
  std::string path_method = "yen";
  std::uint64_t seed = 1;
  std::string method = "bb-newton";
  double rgap_target = 1e-10;
  double time_budget_s = 600.0;
  int max_iterations = 0;
  int i_s = 10;
  double epsilon = 0.01;
  int q = 3;
  double eta_tol = 1e-2;
  double nu1 = 1e-4;
  double nu2 = 1e3;
  std::vector<double> thresholds{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  std::string output_dir = ".";
  bool deterministic = false;
};

json config_json(const RunConfig& c) {
  return {{"net", c.net_path},
          {"trips", c.trips_path},
          {"paths", c.paths_path},
          {"theta", c.theta},
          {"demand_multiplier", c.demand_multiplier},
          {"k_paths", c.k_paths},
          {"path_method", c.path_method},
          {"seed", c.seed},
          {"method", c.method},
          {"rgap_target", c.rgap_target},
          {"time_budget_s", c.time_budget_s},
          {"max_iterations", c.max_iterations},
          {"I_s", c.i_s},
          {"epsilon", c.epsilon},
          {"q", c.q},
          {"eta_tol", c.eta_tol},
          {"nu1", c.nu1},
          {"nu2", c.nu2},
          {"thresholds", c.thresholds},
          {"output_dir", c.output_dir},
          {"deterministic", c.deterministic}};
}

void add_model_options(CLI::App& app, RunConfig& c, bool need_files) {
  auto* net = app.add_option("--net", c.net_path, "TNTP network file");
  auto* trips = app.add_option("--trips", c.trips_path, "TNTP trip table");
  if (need_files) {
    net->required();
    trips->required();
  }
  app.add_option("--paths", c.paths_path, "Use this path set instead of generating one");
  app.add_option("--theta", c.theta, "Logit dispersion")->check(CLI::PositiveNumber);
  app.add_option("--demand-multiplier", c.demand_multiplier)->check(CLI::PositiveNumber);
  app.add_option("--k-paths", c.k_paths)->check(CLI::PositiveNumber);
  app.add_option("--path-method", c.path_method)->check(CLI::IsMember({"yen", "penalty"}));
  app.add_option("--seed", c.seed);
  app.add_option("--output-dir", c.output_dir);
  app.add_flag("--deterministic", c.deterministic,
               "Scalar kernels, one thread, zero wall column in the trace");
}

void add_solver_options(CLI::App& app, RunConfig& c) {
  app.add_option("--method", c.method)
      ->check(CLI::IsMember({"msa-hs", "msa-acs", "bb1", "bb2", "bb1-acs", "bb2-acs", "bb-newton"}));
  app.add_option("--rgap-target", c.rgap_target)->check(CLI::Range(0.0, 1.0));
  app.add_option("--time-budget-s,--time-budget", c.time_budget_s)->check(CLI::PositiveNumber);
  app.add_option("--max-iterations", c.max_iterations)->check(CLI::NonNegativeNumber);
  app.add_option("--i-s,--I-s", c.i_s)->check(CLI::PositiveNumber);
  app.add_option("--epsilon", c.epsilon)->check(CLI::Range(0.0, 1.0));
  app.add_option("--q", c.q)->check(CLI::Range(2, 1000));
  app.add_option("--eta-tol", c.eta_tol)->check(CLI::Range(0.0, 1.0));
  app.add_option("--nu1", c.nu1)->check(CLI::Range(0.0, 1.0));
  app.add_option("--nu2", c.nu2)->check(CLI::PositiveNumber);
  app.add_option("--thresholds", c.thresholds, "Decreasing RGAP thresholds for Newton attempts")
      ->delimiter(',');
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

sue::SolveOptions solve_options(const RunConfig& c) {
  sue::SolveOptions o;
  o.method = sue::parse_method(c.method);
  o.rgap_target = c.rgap_target;
  o.time_budget_s = c.time_budget_s;
  o.max_iterations = c.max_iterations;
  o.i_s = c.i_s;
  o.epsilon = c.epsilon;
  o.q = c.q;
  o.newton.eta_tol = c.eta_tol;
  o.newton.nu1 = c.nu1;
  o.newton.nu2 = c.nu2;
  o.thresholds = c.thresholds;
  return o;
}

struct Instance {
  std::unique_ptr<sue::SueProblem> problem;
  std::vector<std::string> warnings;
  sue::PathSetMetrics metrics;
  double path_seconds = 0.0;
};

Instance build_instance(const RunConfig& c) {
  Instance inst;
  const auto net = sue::load_tntp_net(c.net_path);
  auto demand = sue::load_tntp_trips(c.trips_path);
  inst.warnings = demand.warnings;
  if (c.demand_multiplier != 1.0) demand = demand.scaled(c.demand_multiplier);

  const auto t0 = std::chrono::steady_clock::now();
  sue::PathSet paths;
  if (!c.paths_path.empty()) {
    paths = sue::parse_paths_text(read_text(c.paths_path), demand);
  } else {
    sue::PathGenConfig pg;
    pg.method = sue::parse_path_method(c.path_method);
    pg.k = c.k_paths;
    pg.seed = c.seed;
    paths = sue::generate_paths(net, demand, pg, &inst.warnings);
  }
  const auto ff = sue::free_flow_link_costs(net);
  std::vector<double> path_ff(paths.path_links.size());
  for (std::size_t i = 0; i < path_ff.size(); ++i) path_ff[i] = sue::path_cost(paths.path_links[i], ff);
  try {
    inst.metrics = sue::pathset_metrics(paths, path_ff);
  } catch (const sue::DomainError& e) {
    inst.warnings.push_back(std::string("path-set metrics unavailable: ") + e.what());
  }
  inst.problem = std::make_unique<sue::SueProblem>(net, std::move(paths), c.theta);
  inst.path_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return inst;
}

void apply_determinism(const RunConfig& c) {
  if (c.deterministic) {
    sue::force_scalar_kernels(true);
    sue::set_thread_limit(1);
  }
}

int exit_code(const sue::SolveRun& run) {
  if (run.converged) return kExitConverged;
  if (run.termination == "budget" || run.termination == "max_iterations") return kExitBudget;
  return kExitError;
}

int cmd_solve(const RunConfig& c) {
  apply_determinism(c);
  auto inst = build_instance(c);
  for (const auto& w : inst.warnings) std::cerr << "warning: " << w << '\n';
  const auto& prob = *inst.problem;

  const fs::path out_dir(c.output_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "paths.txt", sue::write_paths_text(prob.paths()));
  json sidecar = {{"generator", c.paths_path.empty() ? c.path_method : "file"},
                  {"k", c.k_paths},
                  {"seed", c.seed},
                  {"paths", prob.n()},
                  {"od_pairs", prob.od_count()},
                  {"mean_cv", inst.metrics.mean_cv},
                  {"mean_jaccard", inst.metrics.mean_jaccard},
                  {"generation_seconds", c.deterministic ? 0.0 : inst.path_seconds}};
  write_text(out_dir / "paths.json", sidecar.dump(2) + "\n");

  const auto run = sue::solve(prob, sue::free_flow_loading(prob), solve_options(c));

  write_text(out_dir / "trace.csv", sue::trace_csv(run, c.deterministic));
  std::string timing = "iter,wall_s\n";
  for (const auto& r : run.trace) timing += std::to_string(r.iter) + ',' + sue::format_double(r.wall_s) + '\n';
  write_text(out_dir / "timing.csv", timing);
  write_text(out_dir / "flows.txt", sue::write_flows(run.final_h));

  json summary = sue::run_summary(run);
  summary["config"] = config_json(c);
  summary["seed"] = c.seed;
  summary["paths"] = prob.n();
  summary["od_pairs"] = prob.od_count();
  summary["kernels"] = std::string(sue::kernels().name);
  if (c.deterministic) summary["solve_seconds"] = 0.0;
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");

  std::cout << sue::method_name(run.method) << ": " << run.termination << " after "
            << run.iterations() << " iterations, rgap " << run.final_rgap() << '\n';
  if (run.termination == "numerical_failure") std::cerr << "error: " << run.failure_reason << '\n';
  return exit_code(run);
}

int cmd_spectra(const RunConfig& c, const std::string& flows_path, int dense_limit,
                const std::string& mode, const std::string& output) {
  apply_determinism(c);
  auto inst = build_instance(c);
  for (const auto& w : inst.warnings) std::cerr << "warning: " << w << '\n';
  const auto& prob = *inst.problem;
  if (prob.n() > dense_limit) {
    std::cerr << "error: " << prob.n() << " paths exceed the dense limit of " << dense_limit << '\n';
    return kExitError;
  }

  std::vector<double> h;
  if (!flows_path.empty()) {
    h = sue::parse_flows(read_text(flows_path));
    if (h.size() != static_cast<std::size_t>(prob.n())) {
      throw sue::DimensionError("flow file has " + std::to_string(h.size()) + " entries, path set has " +
                                std::to_string(prob.n()));
    }
  } else {
    sue::SolveOptions o = solve_options(c);
    o.method = sue::Method::BbNewton;
    o.rgap_target = 1e-10;
    auto run = sue::solve(prob, sue::free_flow_loading(prob), o);
    if (!run.converged) {
      std::cerr << "error: equilibrium solve stopped (" << run.termination << ") at rgap "
                << run.final_rgap() << '\n';
      return kExitError;
    }
    h = std::move(run.final_h);
  }

  const sue::FlowState state(prob, std::move(h));
  const sue::JOperator jop(state);
  const auto bound = sue::j_norm_upper_bound(prob);
  const double j_exact = sue::j_norm_exact(jop);

  const bool dense = mode == "dense" || (mode == "auto" && prob.n() <= 2000);
  sue::SpectralReport rep;
  if (dense) {
    const sue::SOperator sop(state);
    rep = sue::spectral_analysis(sue::dense_K(sop, jop, dense_limit), prob.theta(),
                                 prob.max_demand(), bound.bound);
  } else {
    rep = sue::spectral_analysis_link_space(state, bound.bound);
  }
  json j = sue::spectral_json(rep);
  j["d_norm"] = bound.d_norm;
  j["tprime_amax_norm"] = bound.tprime_amax_norm;
  j["j_norm_bound"] = bound.bound;
  j["j_norm"] = j_exact;
  j["s_conservative_exact"] = 2.0 / (2.0 + prob.theta() * prob.max_demand() * j_exact);
  j["paths"] = prob.n();
  j["rgap"] = state.h().empty() ? 0.0 : sue::rgap(state);

  const std::string text = j.dump(2) + "\n";
  if (!output.empty()) {
    const fs::path p(output);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text(p, text);
  }
  std::cout << "lambda_min " << rep.lambda_min << "  lambda_max " << rep.lambda_max << "  s_g "
            << rep.s_g << "  s_conservative " << rep.s_conservative << '\n';
  if (output.empty()) std::cout << text;
  return kExitConverged;
}

struct GridRow {
  std::string net, trips, method;
  double theta = 1.0;
  double multiplier = 1.0;
};

std::vector<GridRow> read_grid(const std::string& path) {
  const auto text = read_text(path);
  const fs::path base = fs::path(path).parent_path();
  std::istringstream in(text);
  std::string line;
  std::vector<GridRow> rows;
  int line_no = 0;
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    return (fp.is_absolute() || fs::exists(fp) ? fp : base / fp).string();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() == 5 && f[0] == "net") continue;  // header
    if (f.size() != 5) {
      throw sue::ParseError("grid rows are net,trips,method,theta,multiplier", line_no);
    }
    GridRow r;
    r.net = resolve(f[0]);
    r.trips = resolve(f[1]);
    r.method = f[2];
    try {
      r.theta = std::stod(f[3]);
      r.multiplier = std::stod(f[4]);
    } catch (const std::exception&) {
      throw sue::ParseError("non-numeric theta or multiplier", line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

int cmd_bench(const RunConfig& base, const std::string& grid_path, int jobs,
              const std::string& output) {
  apply_determinism(base);
  const auto grid = read_grid(grid_path);
  static const std::vector<double> gaps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5,
                                        1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  std::vector<std::string> lines(grid.size());
  // Path generation inside a job stays sequential; jobs provide the parallelism.
  if (jobs > 1) sue::set_thread_limit(1);

  auto run_one = [&](std::size_t i) {
    const auto& g = grid[i];
    RunConfig c = base;
    c.net_path = g.net;
    c.trips_path = g.trips;
    c.method = g.method;
    c.theta = g.theta;
    c.demand_multiplier = g.multiplier;
    std::string row = fs::path(g.net).filename().string() + ',' + g.method + ',' +
                      sue::format_double(g.theta) + ',' + sue::format_double(g.multiplier) + ',';
    try {
      auto inst = build_instance(c);
      const auto run =
          sue::solve(*inst.problem, sue::free_flow_loading(*inst.problem), solve_options(c));
      row += run.termination + ',' + std::to_string(run.iterations());
      for (const auto& m : sue::gap_milestones(run, gaps)) row += ',' + (m ? std::to_string(*m) : "");
      row += ',' + sue::format_double(base.deterministic ? 0.0 : run.solve_seconds);
      row += ',' + sue::format_double(run.final_rgap());
      row += ',' + (run.empirical_order ? sue::format_double(*run.empirical_order) : "");
      row += ',' + (run.observed_rate ? sue::format_double(*run.observed_rate) : "");
      row += ',' + std::to_string(run.newton_accepted) + ',' + sue::format_double(run.final_step) + ',';
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (auto& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      row += "error,";
      for (std::size_t k = 0; k < gaps.size() + 7; ++k) row += ',';
      row += msg;
    }
    lines[i] = row;
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) run_one(i);
  };
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::string out = "net,method,theta,multiplier,status,iterations";
  for (const char* g : {"1e-1", "1e-2", "1e-3", "1e-4", "1e-5", "1e-6", "1e-7", "1e-8", "1e-9", "1e-10"}) {
    out += std::string(",it_") + g;
  }
  out += ",wall_s,final_rgap,empirical_order,observed_rate,newton_accepted,final_step,error\n";
  for (const auto& l : lines) out += l + '\n';
  if (output.empty()) {
    std::cout << out;
  } else {
    const fs::path p(output);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text(p, out);
  }
  return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-based logit stochastic user equilibrium solver"};
  app.require_subcommand(1);

  RunConfig solve_cfg;
  auto* solve = app.add_subcommand("solve", "Solve one instance and write trace, summary and paths");
  add_model_options(*solve, solve_cfg, true);
  add_solver_options(*solve, solve_cfg);

  RunConfig spec_cfg;
  std::string flows_path, spec_mode = "auto", spec_out;
  int dense_limit = sue::kDefaultDenseLimit;
  auto* spectra = app.add_subcommand("spectra", "Eigenvalues of K and step-size bounds");
  add_model_options(*spectra, spec_cfg, true);
  add_solver_options(*spectra, spec_cfg);
  spectra->add_option("--flows", flows_path, "Path flows, one per line, in path-set order");
  spectra->add_option("--dense-limit", dense_limit)->check(CLI::PositiveNumber);
  spectra->add_option("--mode", spec_mode)->check(CLI::IsMember({"auto", "dense", "link-space"}));
  spectra->add_option("--output", spec_out, "Write the JSON report here");

  RunConfig bench_cfg;
  std::string grid_path, bench_out;
  int jobs = 1;
  auto* bench = app.add_subcommand("bench", "Run a grid of solves and tabulate milestones");
  add_model_options(*bench, bench_cfg, false);
  add_solver_options(*bench, bench_cfg);
  bench->add_option("--grid", grid_path, "CSV rows: net,trips,method,theta,multiplier")->required();
  bench->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  bench->add_option("--output", bench_out, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (*solve) return cmd_solve(solve_cfg);
    if (*spectra) return cmd_spectra(spec_cfg, flows_path, dense_limit, spec_mode, spec_out);
    if (*bench) return cmd_bench(bench_cfg, grid_path, jobs, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
