#ifndef DCOPF_ENGINE_HPP
#define DCOPF_ENGINE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcopf/network.hpp"
#include "dcopf/qp.hpp"

namespace dcopf {

/// Step sizes and run controls of the iteration.
struct TuningParams {
  double alpha = 0.0;  // balance innovation gain in the price update
  double beta = 0.0;   // price-coupling gain
  double gamma = 0.0;  // balance innovation gain in the angle update
  double delta = 0.0;  // line-limit innovation gain

  enum class Mode { synchronous, serial };
  Mode mode = Mode::synchronous;

  /// Keep the slack-bus angle at zero (the reference convention). When
  /// false the slack angle floats like any other bus.
  bool pin_slack_angle = true;
};

/// Variables owned by one bus: its price, angle, the flow multipliers of
/// its outgoing line directions and the dispatch of its local units.
/// mu_out and pg are aligned with BusLocal::lines / BusLocal::gens.
struct AgentState {
  double lambda = 0.0;  // $/MWh
  double theta = 0.0;   // rad
  std::vector<double> mu_out;  // >= 0 after every step
  std::vector<double> pg;      // pu, inside [pmin, pmax] after every step
};

/// The only data a bus shares with a neighbor each round: its price, its
/// angle and the multiplier it owns for the shared line. Nothing about
/// costs or dispatch crosses the bus boundary.
struct NeighborMessage {
  int sender = 0;
  double lambda = 0.0;
  double theta = 0.0;
  double mu_toward_receiver = 0.0;
};

/// Serialized wire form of a message, used by the locality audit.
std::string message_to_json(const NeighborMessage& m);

/// All bus states at one iteration.
struct SystemState {
  long k = 0;
  std::vector<AgentState> agents;  // index = bus id - 1
};

/// Stacks a state as [lambda; theta; mu_fwd; mu_rev; pg].
Eigen::VectorXd stack_state(const SolverCase& sc, const SystemState& s);
SystemState unstack_state(const SolverCase& sc, const Eigen::VectorXd& x, long k = 0);

/// Cold start: dispatch, angles and line multipliers at zero, every
/// price at `lambda0` $/MWh.
SystemState init_cold(const SolverCase& sc, double lambda0 = 10.0);

/// Warm start from a centralized solution (exact field copy).
SystemState init_from(const SolverCase& sc, const OracleSolution& sol);

/// Messages bus `bus` receives this round, one per incident line in
/// BusLocal::lines order.
std::vector<NeighborMessage> collect_messages(const SolverCase& sc, const SystemState& s,
                                              int bus);

// Per-bus update rules. Each reads only the bus's own round-k state and
// the round-k messages of its physical neighbors.

/// Price update: coupling innovation between neighboring prices and flow
/// multipliers plus the local supply/demand imbalance.
double update_lambda(const SolverCase::BusLocal& bl, const AgentState& own,
                     std::span<const NeighborMessage> inbox, const TuningParams& p);

/// Dispatch update: closed-form stationary point of the local cost at
/// the current price, clamped to the unit's limits.
double update_pg(const SolverCase::LocalGen& g, double lambda);

/// Angle update driven by the local power-balance residual. The slack
/// bus returns 0 when pinning is enabled.
double update_theta(const SolverCase::BusLocal& bl, const AgentState& own,
                    std::span<const NeighborMessage> inbox, const TuningParams& p);

/// Line-multiplier update for both directions of one line, given the
/// endpoint angles; each value is floored at zero. A bus only applies
/// the half it owns.
std::pair<double, double> update_mu(double mu_ij, double mu_ji, double theta_i,
                                    double theta_j, double inv_x, double limit,
                                    double delta);

/// One full round. Synchronous mode evaluates every bus against the
/// round-k snapshot; serial mode sweeps buses in ascending id, each
/// seeing already-updated lower-id neighbors, and sequences
/// lambda -> pg -> theta -> mu within the bus.
SystemState step(const SolverCase& sc, const SystemState& s, const TuningParams& p);

/// l1 norm of the per-bus power-balance residuals, in pu.
double balance_residual_l1(const SolverCase& sc, const SystemState& s);

/// Termination rules for run(); the first satisfied rule stops the run.
struct StopRule {
  long max_iters = 50000;
  double eps_delta = 1e-9;  // l-inf on the iterate change; <= 0 disables
  double eps_res = 0.0;     // on the pu balance residual; <= 0 disables
  double eps_rel = 0.0;     // on |f-f*|/f*; needs f_star; <= 0 disables
  std::optional<double> f_star;     // $/h, enables rel tracking
  double divergence_bound = 1e8;    // l-inf iterate guard
};

enum class RunOutcome { converged, max_iters, diverged };

const char* to_string(RunOutcome o);

struct IterationRecord {
  long k = 0;
  Eigen::VectorXd x;  // stacked projected state
  double res = 0.0;
  std::optional<double> rel;
};

struct RunTrace {
  RunOutcome outcome = RunOutcome::max_iters;
  double wall_time_s = 0.0;
  TuningParams params;
  std::vector<IterationRecord> iterations;  // k = 0 .. final

  const IterationRecord& final_record() const { return iterations.back(); }
};

/// Runs the iteration from `init` until a stop rule fires. The MW case
/// is used only to price dispatches for the rel metric; no centralized
/// data flows into the updates.
RunTrace run(const GridCase& case_mw, const TuningParams& p, const SystemState& init,
             const StopRule& stop);

}  // namespace dcopf

#endif  // DCOPF_ENGINE_HPP
