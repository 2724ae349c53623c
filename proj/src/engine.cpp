#include "dcopf/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

namespace dcopf {

using nlohmann::json;

std::string message_to_json(const NeighborMessage& m) {
  json doc{{"sender", m.sender},
           {"lambda", m.lambda},
           {"theta", m.theta},
           {"mu", m.mu_toward_receiver}};
  return doc.dump();
}

const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::converged: return "converged";
    case RunOutcome::max_iters: return "max_iters";
    case RunOutcome::diverged: return "diverged";
  }
  return "unknown";
}

Eigen::VectorXd stack_state(const SolverCase& sc, const SystemState& s) {
  Eigen::VectorXd x(sc.state_dim());
  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    const auto& ag = s.agents[static_cast<std::size_t>(i)];
    x(sc.off_lambda() + i) = ag.lambda;
    x(sc.off_theta() + i) = ag.theta;
    for (std::size_t e = 0; e < bl.lines.size(); ++e) {
      const auto& il = bl.lines[e];
      const int off = il.forward ? sc.off_mu_fwd() : sc.off_mu_rev();
      x(off + il.line) = ag.mu_out[e];
    }
    for (std::size_t gi = 0; gi < bl.gens.size(); ++gi)
      x(sc.off_pg() + bl.gens[gi].gen) = ag.pg[gi];
  }
  return x;
}

SystemState unstack_state(const SolverCase& sc, const Eigen::VectorXd& x, long k) {
  if (x.size() != sc.state_dim())
    throw std::invalid_argument("unstack_state: dimension mismatch");
  SystemState s;
  s.k = k;
  s.agents.resize(static_cast<std::size_t>(sc.n_bus));
  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    auto& ag = s.agents[static_cast<std::size_t>(i)];
    ag.lambda = x(sc.off_lambda() + i);
    ag.theta = x(sc.off_theta() + i);
    ag.mu_out.resize(bl.lines.size());
    for (std::size_t e = 0; e < bl.lines.size(); ++e) {
      const auto& il = bl.lines[e];
      const int off = il.forward ? sc.off_mu_fwd() : sc.off_mu_rev();
      ag.mu_out[e] = x(off + il.line);
    }
    ag.pg.resize(bl.gens.size());
    for (std::size_t gi = 0; gi < bl.gens.size(); ++gi)
      ag.pg[gi] = x(sc.off_pg() + bl.gens[gi].gen);
  }
  return s;
}

SystemState init_cold(const SolverCase& sc, double lambda0) {
  SystemState s;
  s.k = 0;
  s.agents.resize(static_cast<std::size_t>(sc.n_bus));
  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    auto& ag = s.agents[static_cast<std::size_t>(i)];
    ag.lambda = lambda0;
    ag.theta = 0.0;
    ag.mu_out.assign(bl.lines.size(), 0.0);
    ag.pg.assign(bl.gens.size(), 0.0);
  }
  return s;
}

SystemState init_from(const SolverCase& sc, const OracleSolution& sol) {
  SystemState s;
  s.k = 0;
  s.agents.resize(static_cast<std::size_t>(sc.n_bus));
  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    auto& ag = s.agents[static_cast<std::size_t>(i)];
    ag.lambda = sol.lambda[static_cast<std::size_t>(i)];
    ag.theta = sol.theta[static_cast<std::size_t>(i)];
    ag.mu_out.resize(bl.lines.size());
    for (std::size_t e = 0; e < bl.lines.size(); ++e) {
      const auto& il = bl.lines[e];
      ag.mu_out[e] = il.forward ? sol.mu_fwd[static_cast<std::size_t>(il.line)]
                                : sol.mu_rev[static_cast<std::size_t>(il.line)];
    }
    ag.pg.resize(bl.gens.size());
    for (std::size_t gi = 0; gi < bl.gens.size(); ++gi)
      ag.pg[gi] = sol.pg[static_cast<std::size_t>(bl.gens[gi].gen)];
  }
  return s;
}

std::vector<NeighborMessage> collect_messages(const SolverCase& sc, const SystemState& s,
                                              int bus) {
  const auto& bl = sc.buses[static_cast<std::size_t>(bus - 1)];
  std::vector<NeighborMessage> inbox;
  inbox.reserve(bl.lines.size());
  for (const auto& il : bl.lines) {
    const auto& nb = sc.buses[static_cast<std::size_t>(il.neighbor - 1)];
    const auto& ag = s.agents[static_cast<std::size_t>(il.neighbor - 1)];
    // The neighbor's multiplier for this line points toward us.
    double mu = 0.0;
    for (std::size_t e = 0; e < nb.lines.size(); ++e)
      if (nb.lines[e].line == il.line) mu = ag.mu_out[e];
    inbox.push_back({il.neighbor, ag.lambda, ag.theta, mu});
  }
  return inbox;
}

namespace {

void check_inbox(const SolverCase::BusLocal& bl, std::span<const NeighborMessage> inbox) {
  if (inbox.size() != bl.lines.size())
    throw std::invalid_argument("bus " + std::to_string(bl.bus) +
                                ": expected one message per incident line");
  for (std::size_t e = 0; e < inbox.size(); ++e)
    if (inbox[e].sender != bl.lines[e].neighbor)
      throw std::invalid_argument("bus " + std::to_string(bl.bus) +
                                  ": message sender does not match line neighbor");
}

double balance_innovation(const SolverCase::BusLocal& bl, const AgentState& own,
                          std::span<const NeighborMessage> inbox) {
  // g_i = -sum_n P_Gn + P_L_i + sum_j (theta_i - theta_j)/X_ij
  double g = bl.load;
  for (double p : own.pg) g -= p;
  for (std::size_t e = 0; e < bl.lines.size(); ++e)
    g += bl.lines[e].inv_x * (own.theta - inbox[e].theta);
  return g;
}

}  // namespace

double update_lambda(const SolverCase::BusLocal& bl, const AgentState& own,
                     std::span<const NeighborMessage> inbox, const TuningParams& p) {
  check_inbox(bl, inbox);
  // Coupling between neighboring prices and line multipliers.
  double coupling = 0.0;
  for (std::size_t e = 0; e < bl.lines.size(); ++e) {
    const auto& il = bl.lines[e];
    coupling += il.inv_x * (own.lambda - inbox[e].lambda);
    coupling += il.inv_x * (own.mu_out[e] - inbox[e].mu_toward_receiver);
  }
  const double g = balance_innovation(bl, own, inbox);
  // The imbalance enters as -alpha * (sum P - load - outflow) = +alpha*g.
  return own.lambda - p.beta * coupling + p.alpha * g;
}

double update_pg(const SolverCase::LocalGen& g, double lambda) {
  return std::clamp((lambda - g.b) / (2.0 * g.a), g.pmin, g.pmax);
}

double update_theta(const SolverCase::BusLocal& bl, const AgentState& own,
                    std::span<const NeighborMessage> inbox, const TuningParams& p) {
  if (bl.slack && p.pin_slack_angle) return 0.0;
  check_inbox(bl, inbox);
  return own.theta - p.gamma * balance_innovation(bl, own, inbox);
}

std::pair<double, double> update_mu(double mu_ij, double mu_ji, double theta_i,
                                    double theta_j, double inv_x, double limit,
                                    double delta) {
  const double flow = inv_x * (theta_i - theta_j);
  const double fwd = std::max(0.0, mu_ij - delta * (limit - flow));
  const double rev = std::max(0.0, mu_ji - delta * (limit + flow));
  return {fwd, rev};
}

namespace {

AgentState updated_agent(const SolverCase::BusLocal& bl, const AgentState& own,
                         std::span<const NeighborMessage> inbox, const TuningParams& p) {
  AgentState next = own;
  next.lambda = update_lambda(bl, own, inbox, p);
  for (std::size_t gi = 0; gi < bl.gens.size(); ++gi)
    next.pg[gi] = update_pg(bl.gens[gi], own.lambda);
  next.theta = update_theta(bl, own, inbox, p);
  for (std::size_t e = 0; e < bl.lines.size(); ++e) {
    const auto& il = bl.lines[e];
    // Own direction only: flow measured away from this bus.
    const double flow = il.inv_x * (own.theta - inbox[e].theta);
    next.mu_out[e] = std::max(0.0, own.mu_out[e] - p.delta * (il.limit - flow));
  }
  return next;
}

AgentState updated_agent_serial(const SolverCase::BusLocal& bl, const AgentState& own,
                                std::span<const NeighborMessage> inbox,
                                const TuningParams& p) {
  // Gauss-Seidel sweep within the bus: each rule sees the values the
  // previous rule just produced.
  AgentState cur = own;
  cur.lambda = update_lambda(bl, own, inbox, p);
  for (std::size_t gi = 0; gi < bl.gens.size(); ++gi)
    cur.pg[gi] = update_pg(bl.gens[gi], cur.lambda);
  cur.theta = update_theta(bl, cur, inbox, p);
  for (std::size_t e = 0; e < bl.lines.size(); ++e) {
    const auto& il = bl.lines[e];
    const double flow = il.inv_x * (cur.theta - inbox[e].theta);
    cur.mu_out[e] = std::max(0.0, cur.mu_out[e] - p.delta * (il.limit - flow));
  }
  return cur;
}

}  // namespace

SystemState step(const SolverCase& sc, const SystemState& s, const TuningParams& p) {
  SystemState next = s;
  if (p.mode == TuningParams::Mode::synchronous) {
    for (int i = 0; i < sc.n_bus; ++i) {
      const auto& bl = sc.buses[static_cast<std::size_t>(i)];
      const auto inbox = collect_messages(sc, s, i + 1);
      next.agents[static_cast<std::size_t>(i)] =
          updated_agent(bl, s.agents[static_cast<std::size_t>(i)], inbox, p);
    }
  } else {
    for (int i = 0; i < sc.n_bus; ++i) {
      const auto& bl = sc.buses[static_cast<std::size_t>(i)];
      const auto inbox = collect_messages(sc, next, i + 1);  // live values
      next.agents[static_cast<std::size_t>(i)] =
          updated_agent_serial(bl, next.agents[static_cast<std::size_t>(i)], inbox, p);
    }
  }
  next.k = s.k + 1;
  return next;
}

double balance_residual_l1(const SolverCase& sc, const SystemState& s) {
  double res = 0.0;
  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    const auto& ag = s.agents[static_cast<std::size_t>(i)];
    double g = bl.load;
    for (double p : ag.pg) g -= p;
    for (const auto& il : bl.lines)
      g += il.inv_x * (ag.theta - s.agents[static_cast<std::size_t>(il.neighbor - 1)].theta);
    res += std::abs(g);
  }
  return res;
}

RunTrace run(const GridCase& case_mw, const TuningParams& p, const SystemState& init,
             const StopRule& stop) {
  const auto t0 = std::chrono::steady_clock::now();
  const SolverCase sc = make_solver_case(case_mw);

  RunTrace trace;
  trace.params = p;

  auto record = [&](const SystemState& s) {
    IterationRecord rec;
    rec.k = s.k;
    rec.x = stack_state(sc, s);
    rec.res = balance_residual_l1(sc, s);
    if (stop.f_star) {
      std::vector<double> pg_mw(static_cast<std::size_t>(sc.n_gen));
      for (int g = 0; g < sc.n_gen; ++g)
        pg_mw[static_cast<std::size_t>(g)] = rec.x(sc.off_pg() + g) * sc.base_mva;
      const double f = objective(case_mw, pg_mw);
      rec.rel = std::abs(f - *stop.f_star) / *stop.f_star;
    }
    trace.iterations.push_back(std::move(rec));
  };

  SystemState state = init;
  record(state);
  trace.outcome = RunOutcome::max_iters;

  for (long k = 0; k < stop.max_iters; ++k) {
    SystemState next = step(sc, state, p);
    record(next);
    const auto& cur = trace.iterations.back();
    const auto& prev = trace.iterations[trace.iterations.size() - 2];

    if (cur.x.lpNorm<Eigen::Infinity>() > stop.divergence_bound) {
      trace.outcome = RunOutcome::diverged;
      state = std::move(next);
      break;
    }
    const double delta = (cur.x - prev.x).lpNorm<Eigen::Infinity>();
    const bool hit_delta = stop.eps_delta > 0.0 && delta <= stop.eps_delta;
    const bool hit_res = stop.eps_res > 0.0 && cur.res <= stop.eps_res;
    const bool hit_rel = stop.eps_rel > 0.0 && cur.rel && *cur.rel <= stop.eps_rel;
    state = std::move(next);
    if (hit_delta || hit_res || hit_rel) {
      trace.outcome = RunOutcome::converged;
      break;
    }
  }

  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

}  // namespace dcopf
