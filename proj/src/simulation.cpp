#include "lsecbf/simulation.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <random>

#include "lsecbf/errors.hpp"

namespace lsecbf {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string_view to_string(TickStatus s) {
  switch (s) {
    case TickStatus::Optimal: return "Optimal";
    case TickStatus::Infeasible: return "Infeasible";
    case TickStatus::Unsafe: return "Unsafe";
    case TickStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

TickStatus parse_tick_status(std::string_view text) {
  for (auto s : {TickStatus::Optimal, TickStatus::Infeasible, TickStatus::Unsafe, TickStatus::NumericalFailure}) {
    if (to_string(s) == text) return s;
  }
  throw InvalidInput("unknown tick status \"" + std::string(text) + "\"");
}

bool SimTrace::clean() const {
  for (const auto& r : rows) {
    if (r.status != TickStatus::Optimal) return false;
  }
  return true;
}

double SimTrace::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.h_min);
  return m;
}

SetSpec agent_set(const SimConfig& config, const AgentConfig& agent) {
  return SetSpec(std::make_shared<RigidPolytope>(agent.body.build()), SmoothMaxParams{config.agent_epsilon(agent)});
}

SimTrace run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  const std::size_t na = cfg.agents.size();
  const std::size_t nt = cfg.num_ticks();

  std::vector<SetSpec> sets;
  std::vector<UnicycleAgent> dyn;
  std::vector<Eigen::VectorXd> lambda(na), prev_lambda(na);
  std::vector<Eigen::Vector2d> last_u(na, Eigen::Vector2d::Zero());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (const auto& a : cfg.agents) {
    sets.push_back(agent_set(cfg, a));
    dyn.emplace_back(a.b);
  }
  for (std::size_t i = 0; i < na; ++i) {
    lambda[i] = cfg.agents[i].initial;
    if (cfg.heading_jitter > 0.0) lambda[i][2] += cfg.heading_jitter * jitter(rng);
    prev_lambda[i] = lambda[i];
  }

  DistanceSolver solver;
  std::map<std::pair<std::size_t, std::size_t>, DistanceSolution> previous;

  // Disjointness at t0.
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = i + 1; j < na; ++j) {
      DistanceProblem p{sets[i], sets[j], ParamVector::rigid_pose(lambda[i]), ParamVector::rigid_pose(lambda[j])};
      if (solver.solve(p).status == SolveStatus::Intersecting) {
        throw ConfigError("agents: agents " + std::to_string(cfg.agents[i].id) + " and " +
                          std::to_string(cfg.agents[j].id) + " overlap at the initial time");
      }
    }
  }

  SimTrace trace;
  trace.config = cfg;
  trace.num_ticks = nt;
  trace.rows.reserve(nt * na);
  trace.max_input_rate.assign(na, 0.0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_index;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      if (i == j) continue;
      pair_index[{i, j}] = trace.pairs.size();
      trace.pairs.push_back({cfg.agents[i].id, cfg.agents[j].id, {}});
      trace.pairs.back().h.reserve(nt);
    }
  }

  for (std::size_t k = 0; k < nt; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    std::vector<ParamVector> poses;
    std::vector<Eigen::VectorXd> rates(na);
    for (std::size_t j = 0; j < na; ++j) {
      poses.push_back(ParamVector::rigid_pose(lambda[j]));
      if (cfg.rate_mode == RateMode::Oracle) {
        rates[j] = dyn[j].input_matrix(lambda[j]) * last_u[j];
      } else if (cfg.rate_mode == RateMode::Static) {
        rates[j] = Eigen::VectorXd::Zero(3);
      } else {
        rates[j] = k == 0 ? Eigen::VectorXd::Zero(3) : Eigen::VectorXd((lambda[j] - prev_lambda[j]) / cfg.dt);
      }
    }

    std::vector<Eigen::Vector2d> inputs(na);
    for (std::size_t i = 0; i < na; ++i) {
      const AgentConfig& ac = cfg.agents[i];
      AgentSample row;
      row.t = t;
      row.agent_id = ac.id;
      row.lambda = lambda[i];
      row.u_nom = -ac.k_u * (lambda[i].head<2>() - ac.goal);

      bool intersecting = false;
      bool failed = false;
      std::vector<ObstacleTerm> terms;
      for (std::size_t j = 0; j < na; ++j) {
        if (j == i) continue;
        DistanceProblem p{sets[i], sets[j], poses[i], poses[j]};
        SolverOptions opts;
        if (auto it = previous.find({i, j}); it != previous.end() && it->second.status == SolveStatus::Optimal) {
          opts.warm_start = WarmStart{it->second.z_ego, it->second.z_obstacle, it->second.mu};
        }
        double h = std::numeric_limits<double>::quiet_NaN();
        auto t0 = Clock::now();
        DistanceSolution sol;
        try {
          sol = solver.solve(p, opts);
        } catch (const Error&) {
          sol.status = SolveStatus::NumericalFailure;
        }
        trace.timing.distance += seconds_since(t0);
        previous[{i, j}] = sol;

        if (sol.status == SolveStatus::Intersecting) {
          intersecting = true;
          h = barrier_value(sol, cfg.barrier);
        } else if (sol.status != SolveStatus::Optimal) {
          failed = true;
        } else {
          h = barrier_value(sol, cfg.barrier);
          t0 = Clock::now();
          try {
            const KktSystem sys = assemble_kkt_system(p, sol);
            DistanceGradient grad;
            try {
              grad = solve_sensitivity(sys).gradient;
            } catch (const SingularJacobian&) {
              grad = envelope_gradient(sys);
              ++trace.envelope_fallbacks;
            }
            terms.push_back({cfg.agents[j].id, h, grad.d_dlambda_ego, grad.d_dlambda_obstacle, rates[j]});
          } catch (const Error&) {
            failed = true;
          }
          trace.timing.sensitivity += seconds_since(t0);
        }
        trace.pairs[pair_index.at({i, j})].h.push_back(h);
        row.h_min = (std::isnan(h) || std::isnan(row.h_min)) ? std::numeric_limits<double>::quiet_NaN()
                                                             : std::min(row.h_min, h);
      }

      Eigen::Vector2d u = Eigen::Vector2d::Zero();
      if (failed) {
        row.status = TickStatus::NumericalFailure;
      } else if (intersecting) {
        u = row.u_nom;
        row.status = TickStatus::Unsafe;
      } else {
        const auto t0 = Clock::now();
        try {
          const auto rows = assemble_rows(terms, dyn[i].drift(lambda[i]), dyn[i].input_matrix(lambda[i]), cfg.barrier);
          const FilteredInput fi = solve_filter_qp(row.u_nom, rows);
          if (fi.status == FilterStatus::Optimal) {
            u = fi.u;
          } else {
            row.status = TickStatus::Infeasible;
          }
        } catch (const Error&) {
          row.status = TickStatus::NumericalFailure;
        }
        trace.timing.filter += seconds_since(t0);
      }
      row.u = u;
      row.body_velocity = dyn[i].body_velocity(lambda[i], u);
      if (k > 0) trace.max_input_rate[i] = std::max(trace.max_input_rate[i], (u - last_u[i]).norm() / cfg.dt);
      inputs[i] = u;
      trace.rows.push_back(row);
    }

    if (k + 1 == nt) break;
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < na; ++i) {
      prev_lambda[i] = lambda[i];
      try {
        lambda[i] = integrate_step(dyn[i], lambda[i], inputs[i], cfg.dt, cfg.integrator);
      } catch (const NumericalFailure&) {
        trace.rows[k * na + i].status = TickStatus::NumericalFailure;
      }
      last_u[i] = inputs[i];
    }
    trace.timing.integrate += seconds_since(t0);
  }
  trace.timing.total = seconds_since(start);
  return trace;
}

}  // namespace lsecbf
