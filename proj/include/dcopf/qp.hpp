#ifndef DCOPF_QP_HPP
#define DCOPF_QP_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcopf/network.hpp"

namespace dcopf {

/// Thrown when the dispatch problem has no feasible point (or the
/// active-set search exhausts without finding one).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Centralized optimum with all multipliers. Powers are per-unit on the
/// case base, angles rad, prices $/MWh, objective $/h.
struct OracleSolution {
  std::vector<double> pg;         // per generator, pu
  std::vector<double> theta;      // per bus, rad, theta[slack-1] = 0
  std::vector<double> lambda;     // per bus, $/MWh
  std::vector<double> mu_fwd;     // per line, from->to limit multiplier
  std::vector<double> mu_rev;     // per line, to->from limit multiplier
  std::vector<double> mu_gen_hi;  // per generator
  std::vector<double> mu_gen_lo;  // per generator
  double objective = 0.0;         // $/h
};

/// Residuals of the first-order optimality system, one field per
/// condition. All fields are >= 0 except dual_feas, which is the most
/// negative multiplier (<= 0 when dual feasibility is violated).
struct KKTReport {
  double stationarity_pg = 0.0;
  double stationarity_theta = 0.0;
  double balance = 0.0;
  double slack_angle = 0.0;
  double primal_feas = 0.0;
  double comp_slack = 0.0;
  double dual_feas = 0.0;

  bool pass(double tol) const {
    return stationarity_pg <= tol && stationarity_theta <= tol && balance <= tol &&
           slack_angle <= tol && primal_feas <= tol && comp_slack <= tol &&
           dual_feas >= -tol;
  }
  double worst() const;
};

/// Total generation cost of a dispatch, in the case's units (a MW-units
/// case expects pg in MW and yields $/h).
double objective(const GridCase& c, std::span<const double> pg);

/// Cost in $/h of a per-unit dispatch.
double objective_pu(const SolverCase& sc, const GridCase& c, std::span<const double> pg_pu);

/// Solves the dispatch problem exactly with a KKT active-set search:
/// keep a working set of binding limits, solve the equality-constrained
/// stationarity system, add the most violated limit or drop the most
/// negative multiplier until optimal. Throws InfeasibleError when no
/// feasible dispatch exists.
OracleSolution solve_centralized(const GridCase& c);

/// Independent second oracle for small cases: enumerates every
/// conflict-free working set, solves each candidate system and returns
/// the feasible KKT point with the lowest objective. Intended for
/// N_B <= 5; throws when the enumeration would be too large.
OracleSolution solve_enumeration(const GridCase& c);

/// Evaluates every first-order condition of a candidate solution from
/// scratch; judge the result with KKTReport::pass(tol).
KKTReport check_kkt(const GridCase& c, const OracleSolution& candidate);

/// Recovers the generator-limit multipliers from lambda and the cost
/// slope: mu+ - mu- = lambda - 2aP - b, with the sign fixed by which
/// bound is active. Off-bound generators get zero.
void recover_gen_duals(const SolverCase& sc, OracleSolution& sol, double bound_tol = 1e-7);

/// JSON export of a solution in MW / $-units; `import` is its inverse.
std::string solution_to_json(const GridCase& c, const OracleSolution& s);
OracleSolution solution_from_json(const GridCase& c, const std::string& text);

}  // namespace dcopf

#endif  // DCOPF_QP_HPP
