#ifndef DCOPF_NETWORK_HPP
#define DCOPF_NETWORK_HPP

#include <Eigen/Dense>
#include <vector>

#include "dcopf/grid.hpp"

namespace dcopf {

/// Dense network matrices of a validated case.
///
///   b          N_B x N_B susceptance Laplacian: b(i,i) = sum_j 1/X_ij,
///              b(i,j) = -1/X_ij for connected pairs, 0 otherwise.
///   incidence  N_B x N_L, +1 at the from-bus and -1 at the to-bus of
///              each line.
///   by         2N_L x N_B flow map: by * theta stacks the directed line
///              flows [f; -f] with f_l = (theta_from - theta_to)/X_l.
struct NetworkMatrices {
  Eigen::MatrixXd b;
  Eigen::MatrixXd incidence;
  Eigen::MatrixXd by;
};

NetworkMatrices build_matrices(const GridCase& c);

/// Preprocessed per-unit view of a case used by the solvers and the
/// iteration engine. Powers and flows are per-unit on base_mva; prices
/// (lambda, mu and the cost slopes) are $/MWh, so the generator cost
/// slope becomes lambda = 2*(a*base)*P_pu + b.
struct SolverCase {
  struct IncidentLine {
    int line = 0;      // 0-based line index
    int neighbor = 0;  // 1-based neighbor bus id
    double inv_x = 0.0;
    double limit = 0.0;    // pu
    bool forward = false;  // true when this bus is the from-end
  };
  struct LocalGen {
    int gen = 0;  // 0-based generator index
    double a = 0.0, b = 0.0;  // $/MWh per pu and $/MWh
    double pmin = 0.0, pmax = 0.0;  // pu
  };
  struct BusLocal {
    int bus = 0;  // 1-based id
    bool slack = false;
    double load = 0.0;  // pu
    std::vector<IncidentLine> lines;  // ordered by line index
    std::vector<LocalGen> gens;       // ordered by generator index
  };

  int n_bus = 0;
  int n_line = 0;
  int n_gen = 0;
  int slack = 1;  // 1-based
  double base_mva = 100.0;
  std::vector<BusLocal> buses;         // index = bus id - 1
  std::vector<double> line_limit;      // pu, per line
  std::vector<double> line_inv_x;      // per line
  std::vector<int> line_from, line_to; // 1-based ids
  std::vector<int> gen_bus;            // 1-based id per generator

  /// Stacked state dimension: 2*N_B + 2*N_L + N_G.
  int state_dim() const { return 2 * n_bus + 2 * n_line + n_gen; }

  // Offsets of the blocks in the stacked state [lambda; theta; mu; pg].
  int off_lambda() const { return 0; }
  int off_theta() const { return n_bus; }
  int off_mu_fwd() const { return 2 * n_bus; }
  int off_mu_rev() const { return 2 * n_bus + n_line; }
  int off_pg() const { return 2 * n_bus + 2 * n_line; }
};

/// Builds the solver view from a MW-units case.
SolverCase make_solver_case(const GridCase& c);

}  // namespace dcopf

#endif  // DCOPF_NETWORK_HPP
