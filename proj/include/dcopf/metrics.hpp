#ifndef DCOPF_METRICS_HPP
#define DCOPF_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "dcopf/engine.hpp"
#include "dcopf/qp.hpp"

namespace dcopf {

/// Relative objective gap |f - f*| / f*.
double metric_rel(double f, double f_star);

/// Sum over buses of the absolute local power-balance residual, pu.
double metric_res(const SolverCase& sc, const SystemState& s);

/// Wraps an engine state as an oracle-shaped candidate so it can go
/// through check_kkt: generator-limit multipliers are recovered from the
/// price/cost identity, everything else is a field copy.
OracleSolution state_to_candidate(const SolverCase& sc, const SystemState& s);

struct BindingLine {
  int from = 0;
  int to = 0;
  bool forward = true;  // direction of the binding limit
  double mu = 0.0;      // $/MWh
};

/// Final-state comparison of a distributed run against the case (and the
/// centralized optimum when provided).
struct ComparisonReport {
  RunOutcome outcome = RunOutcome::max_iters;
  long iterations = 0;
  std::optional<double> rel_final;
  double res_final = 0.0;
  std::vector<double> lmp;  // $/MWh per bus
  double lmp_spread = 0.0;  // max lambda - min lambda
  std::vector<BindingLine> binding_lines;  // mu above mu_tol at the end
  KKTReport kkt;
  double wall_time_s = 0.0;
};

ComparisonReport make_comparison_report(const GridCase& case_mw, const RunTrace& trace,
                                        const std::optional<OracleSolution>& oracle,
                                        double mu_tol = 1e-6);

/// Binding lines of a centralized solution, same mu threshold.
std::vector<BindingLine> binding_lines_of(const GridCase& c, const OracleSolution& s,
                                          double mu_tol = 1e-6);

}  // namespace dcopf

#endif  // DCOPF_METRICS_HPP
