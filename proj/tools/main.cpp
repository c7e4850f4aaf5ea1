#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "lsecbf/cbf.hpp"
#include "lsecbf/config.hpp"
#include "lsecbf/corpus.hpp"
#include "lsecbf/errors.hpp"
#include "lsecbf/render.hpp"
#include "lsecbf/sensitivity.hpp"
#include "lsecbf/simulation.hpp"
#include "lsecbf/trace.hpp"
#include "lsecbf/version.hpp"

namespace {

using namespace lsecbf;

std::string vec(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += format_g9(v[k]);
  }
  return out;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<double> dt, tf, epsilon;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
  SimConfig cfg = load_config(args.config);
  if (args.dt) cfg.dt = *args.dt;
  if (args.tf) cfg.t_final = *args.tf;
  if (args.epsilon) cfg.epsilon = *args.epsilon;
  if (args.seed) cfg.seed = *args.seed;
  cfg.output_dir = args.out;
  cfg.validate();

  const SimTrace trace = run_simulation(cfg);
  const TracePaths paths = write_trace(trace, args.out);

  std::map<TickStatus, std::size_t> counts;
  for (const auto& row : trace.rows) ++counts[row.status];
  std::cout << "ticks: " << trace.num_ticks << " agents: " << trace.num_agents() << "\n";
  for (const auto& [status, n] : counts) std::cout << "  " << to_string(status) << ": " << n << "\n";
  std::cout << "min h: " << format_g9(trace.min_h()) << "\n";
  for (std::size_t a = 0; a < trace.num_agents(); ++a) {
    const auto& last = trace.at(trace.num_ticks - 1, a);
    const double err = (last.lambda.head<2>() - cfg.agents[a].goal).norm();
    std::cout << "agent " << last.agent_id << " goal error: " << format_g9(err) << "\n";
  }
  if (trace.envelope_fallbacks > 0) std::cout << "envelope fallbacks: " << trace.envelope_fallbacks << "\n";
  std::cout << "wall time: " << format_g9(trace.timing.total) << " s\n";
  std::cout << "trace: " << paths.csv.string() << "\n";
  return trace.clean() ? 0 : 1;
}

int run_distance(const std::string& config_path, int i, int j) {
  const SimConfig cfg = load_config(config_path);
  const AgentConfig* ego = nullptr;
  const AgentConfig* obstacle = nullptr;
  for (const auto& a : cfg.agents) {
    if (a.id == i) ego = &a;
    if (a.id == j) obstacle = &a;
  }
  if (!ego || !obstacle) throw ConfigError("--pair: no agent with id " + std::to_string(ego ? j : i));
  if (i == j) throw ConfigError("--pair: ids must differ");
  const DistanceProblem prob{agent_set(cfg, *ego), agent_set(cfg, *obstacle), ParamVector::rigid_pose(ego->initial),
                             ParamVector::rigid_pose(obstacle->initial)};
  const DistanceSolution sol = solve_distance(prob);
  std::cout << "pair: " << i << " " << j << "\n";
  std::cout << "status: " << to_string(sol.status) << "\n";
  std::cout << "value: " << format_g9(sol.value) << "\n";
  std::cout << "distance: " << format_g9(std::sqrt(2.0 * sol.value)) << "\n";
  std::cout << "z_ego: " << vec(sol.z_ego) << "\n";
  std::cout << "z_obstacle: " << vec(sol.z_obstacle) << "\n";
  std::cout << "mu: " << vec(sol.mu) << "\n";
  std::cout << "kkt_residual: " << format_g9(sol.kkt_residual) << "\n";
  std::cout << "constraint_residuals: " << vec(sol.constraint_residuals) << "\n";
  std::cout << "iterations: " << sol.iterations << "\n";
  if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::Intersecting)
    std::cout << "h: " << format_g9(barrier_value(sol, cfg.barrier)) << "\n";
  if (sol.status == SolveStatus::Optimal) {
    const KktSystem sys = assemble_kkt_system(prob, sol);
    try {
      const DistanceGradient g = solve_sensitivity(sys).gradient;
      std::cout << "grad_ego: " << vec(g.d_dlambda_ego) << "\n";
      std::cout << "grad_obstacle: " << vec(g.d_dlambda_obstacle) << "\n";
      std::cout << "condition_estimate: " << format_g9(g.condition_estimate) << "\n";
    } catch (const SingularJacobian& e) {
      const DistanceGradient g = envelope_gradient(sys);
      std::cout << "grad_ego: " << vec(g.d_dlambda_ego) << "\n";
      std::cout << "grad_obstacle: " << vec(g.d_dlambda_obstacle) << "\n";
      std::cout << "condition_estimate: singular (" << e.what() << "), gradient from the Lagrangian\n";
    }
  }
  return sol.status == SolveStatus::Optimal ? 0 : 1;
}

int run_grad_check(int seeds, std::uint64_t first, double epsilon) {
  std::printf("%6s %3s %3s %10s %10s %10s %10s %10s  %s\n", "seed", "qE", "qj", "exact", "dist_err", "dist_tol",
              "cond", "grad_rel", "result");
  int failed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < seeds; ++k) {
    const auto pc = oracles::random_disjoint_pair(first + static_cast<std::uint64_t>(k));
    const auto r = oracles::check_case(pc, epsilon);
    const bool ok = r.distance_ok && r.gradient_ok;
    failed += ok ? 0 : 1;
    std::printf("%6llu %3ld %3ld %10.6f %10.3e %10.3e %10.3e %10.3e  %s\n", static_cast<unsigned long long>(r.seed),
                static_cast<long>(pc.ego.num_constraints()), static_cast<long>(pc.obstacle.num_constraints()), r.exact,
                r.distance_error, r.distance_tol, r.condition_estimate, r.gradient.rel_error,
                ok ? "pass" : ("FAIL " + r.failure).c_str());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/%d passed in %.2f s\n", seeds - failed, seeds, secs);
  return failed == 0 ? 0 : 1;
}

int run_render(const std::string& trace_dir, std::size_t every, const std::string& out) {
  const SimTrace trace = read_trace(trace_dir);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(trace_dir) / "frames" : std::filesystem::path(out);
  const RenderOutput r = render_frames(trace, dir, every);
  std::cout << "frames: " << r.frames.size() << "\n";
  std::cout << "chart: " << r.chart.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed-distance control barrier function filter for convex polytope agents"};
  app.set_version_flag("--version", std::string(lsecbf::version()));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write trace.csv, pairs.json and metadata.json");
  simulate->add_option("--config", sim.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--dt", sim.dt, "Step size in seconds");
  simulate->add_option("--tf", sim.tf, "Final time in seconds");
  simulate->add_option("--epsilon", sim.epsilon, "Smoothing parameter for every agent without its own");
  simulate->add_option("--seed", sim.seed, "Seed for heading jitter");

  std::string dist_config;
  std::vector<int> pair;
  auto* distance = app.add_subcommand("distance", "Solve the smoothed distance between two agents at their initial poses");
  distance->add_option("--config", dist_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  distance->add_option("--pair", pair, "Ego and obstacle agent ids")->required()->expected(2);

  int seeds = 100;
  std::uint64_t first_seed = 0;
  double gc_epsilon = 400.0;
  auto* grad = app.add_subcommand("grad-check", "Compare KKT gradients with finite differences on random polytope pairs");
  grad->add_option("--seeds", seeds, "Number of random pairs")->check(CLI::PositiveNumber);
  grad->add_option("--first-seed", first_seed, "First corpus seed");
  grad->add_option("--epsilon", gc_epsilon, "Smoothing parameter")->check(CLI::PositiveNumber);

  std::string trace_dir, render_out;
  std::size_t every = 100;
  auto* render = app.add_subcommand("render", "Draw SVG frames and the h_min chart from a trace directory");
  render->add_option("--trace", trace_dir, "Trace directory written by simulate")->required()->check(CLI::ExistingDirectory);
  render->add_option("--every", every, "Frame spacing in ticks")->required()->check(CLI::PositiveNumber);
  render->add_option("--out", render_out, "Frame directory (default <trace>/frames)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim);
    if (*distance) return run_distance(dist_config, pair[0], pair[1]);
    if (*grad) return run_grad_check(seeds, first_seed, gc_epsilon);
    if (*render) return run_render(trace_dir, every, render_out);
  } catch (const lsecbf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
