#include "dcopf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcopf {

double metric_rel(double f, double f_star) {
  if (!(f_star > 0.0)) throw std::invalid_argument("metric_rel: f_star must be > 0");
  return std::abs(f - f_star) / f_star;
}

double metric_res(const SolverCase& sc, const SystemState& s) {
  return balance_residual_l1(sc, s);
}

OracleSolution state_to_candidate(const SolverCase& sc, const SystemState& s) {
  OracleSolution cand;
  cand.lambda.resize(static_cast<std::size_t>(sc.n_bus));
  cand.theta.resize(static_cast<std::size_t>(sc.n_bus));
  cand.pg.assign(static_cast<std::size_t>(sc.n_gen), 0.0);
  cand.mu_fwd.assign(static_cast<std::size_t>(sc.n_line), 0.0);
  cand.mu_rev.assign(static_cast<std::size_t>(sc.n_line), 0.0);
  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    const auto& ag = s.agents[static_cast<std::size_t>(i)];
    cand.lambda[static_cast<std::size_t>(i)] = ag.lambda;
    cand.theta[static_cast<std::size_t>(i)] = ag.theta;
    for (std::size_t e = 0; e < bl.lines.size(); ++e) {
      const auto& il = bl.lines[e];
      (il.forward ? cand.mu_fwd : cand.mu_rev)[static_cast<std::size_t>(il.line)] =
          ag.mu_out[e];
    }
    for (std::size_t gi = 0; gi < bl.gens.size(); ++gi)
      cand.pg[static_cast<std::size_t>(bl.gens[gi].gen)] = ag.pg[gi];
  }
  recover_gen_duals(sc, cand);
  return cand;
}

std::vector<BindingLine> binding_lines_of(const GridCase& c, const OracleSolution& s,
                                          double mu_tol) {
  std::vector<BindingLine> out;
  for (std::size_t l = 0; l < s.mu_fwd.size(); ++l) {
    if (s.mu_fwd[l] > mu_tol)
      out.push_back({c.lines[l].from, c.lines[l].to, true, s.mu_fwd[l]});
    if (s.mu_rev[l] > mu_tol)
      out.push_back({c.lines[l].from, c.lines[l].to, false, s.mu_rev[l]});
  }
  return out;
}

ComparisonReport make_comparison_report(const GridCase& case_mw, const RunTrace& trace,
                                        const std::optional<OracleSolution>& oracle,
                                        double mu_tol) {
  const SolverCase sc = make_solver_case(case_mw);
  ComparisonReport rep;
  rep.outcome = trace.outcome;
  rep.iterations = trace.final_record().k;
  rep.wall_time_s = trace.wall_time_s;

  const SystemState final_state = unstack_state(sc, trace.final_record().x,
                                                trace.final_record().k);
  rep.res_final = metric_res(sc, final_state);

  const OracleSolution cand = state_to_candidate(sc, final_state);
  if (oracle) {
    const double f = objective_pu(sc, case_mw, cand.pg);
    rep.rel_final = metric_rel(f, oracle->objective);
  }
  rep.kkt = check_kkt(case_mw, cand);
  rep.lmp = cand.lambda;
  const auto [lo, hi] = std::minmax_element(rep.lmp.begin(), rep.lmp.end());
  rep.lmp_spread = rep.lmp.empty() ? 0.0 : *hi - *lo;
  rep.binding_lines = binding_lines_of(case_mw, cand, mu_tol);
  return rep;
}

}  // namespace dcopf
