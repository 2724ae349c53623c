#include "dcopf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace dcopf {

using nlohmann::json;

double KKTReport::worst() const {
  double w = std::max({stationarity_pg, stationarity_theta, balance, slack_angle,
                       primal_feas, comp_slack});
  return std::max(w, -dual_feas);
}

double objective(const GridCase& c, std::span<const double> pg) {
  if (pg.size() != static_cast<std::size_t>(c.n_generators()))
    throw std::invalid_argument("objective: dispatch size mismatch");
  double f = 0.0;
  for (std::size_t g = 0; g < pg.size(); ++g) {
    const Generator& gen = c.generators[g];
    f += gen.a * pg[g] * pg[g] + gen.b * pg[g] + gen.c;
  }
  return f;
}

double objective_pu(const SolverCase& sc, const GridCase& c, std::span<const double> pg_pu) {
  if (c.units != Units::mw) throw std::invalid_argument("objective_pu: expected MW case");
  std::vector<double> pg_mw(pg_pu.size());
  for (std::size_t g = 0; g < pg_pu.size(); ++g) pg_mw[g] = pg_pu[g] * sc.base_mva;
  return objective(c, pg_mw);
}

namespace {

// Inequality-constraint identifiers in a fixed canonical order (used for
// deterministic tie-breaking): generator lower bounds, generator upper
// bounds, then line limits in the from->to and to->from directions.
enum class ConKind { gen_lo, gen_hi, line_fwd, line_rev };

struct Constraint {
  ConKind kind;
  int item;  // 0-based generator or line index
};

int constraint_index(const SolverCase& sc, const Constraint& c) {
  switch (c.kind) {
    case ConKind::gen_lo: return c.item;
    case ConKind::gen_hi: return sc.n_gen + c.item;
    case ConKind::line_fwd: return 2 * sc.n_gen + c.item;
    case ConKind::line_rev: return 2 * sc.n_gen + sc.n_line + c.item;
  }
  return -1;
}

Constraint constraint_from_index(const SolverCase& sc, int idx) {
  if (idx < sc.n_gen) return {ConKind::gen_lo, idx};
  idx -= sc.n_gen;
  if (idx < sc.n_gen) return {ConKind::gen_hi, idx};
  idx -= sc.n_gen;
  if (idx < sc.n_line) return {ConKind::line_fwd, idx};
  idx -= sc.n_line;
  return {ConKind::line_rev, idx};
}

int opposite_index(const SolverCase& sc, int idx) {
  Constraint c = constraint_from_index(sc, idx);
  switch (c.kind) {
    case ConKind::gen_lo: return constraint_index(sc, {ConKind::gen_hi, c.item});
    case ConKind::gen_hi: return constraint_index(sc, {ConKind::gen_lo, c.item});
    case ConKind::line_fwd: return constraint_index(sc, {ConKind::line_rev, c.item});
    case ConKind::line_rev: return constraint_index(sc, {ConKind::line_fwd, c.item});
  }
  return -1;
}

// Primal point of an equality-constrained solve plus the multipliers of
// the working-set rows.
struct EqpPoint {
  Eigen::VectorXd pg;      // n_gen, pu
  Eigen::VectorXd theta;   // n_bus, rad (slack entry 0)
  Eigen::VectorXd lambda;  // n_bus, $/MWh
  Eigen::VectorXd nu;      // |W|
};

// Solves the stationarity + balance + slack-pin system with the working
// set W imposed as equalities. The slack angle is eliminated by
// substitution (its theta column and stationarity row are dropped).
// Returns nothing when the system is singular.
std::optional<EqpPoint> solve_eqp(const SolverCase& sc, const std::vector<int>& w_idx) {
  const int ng = sc.n_gen;
  const int nb = sc.n_bus;
  const int nw = static_cast<int>(w_idx.size());
  const int n = ng + (nb - 1) + nb + nw;

  // Column map for the reduced theta block.
  std::vector<int> theta_col(static_cast<std::size_t>(nb), -1);
  {
    int col = ng;
    for (int i = 0; i < nb; ++i)
      if (i + 1 != sc.slack) theta_col[static_cast<std::size_t>(i)] = col++;
  }
  const int lambda0 = ng + nb - 1;
  const int nu0 = lambda0 + nb;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  std::vector<Constraint> w_cons;
  w_cons.reserve(static_cast<std::size_t>(nw));
  for (int idx : w_idx) w_cons.push_back(constraint_from_index(sc, idx));

  // Generator stationarity: 2a P - lambda_bus (+/- nu of own bounds) = -b.
  for (int i = 0; i < nb; ++i) {
    for (const auto& lg : sc.buses[static_cast<std::size_t>(i)].gens) {
      const int row = lg.gen;
      m(row, lg.gen) = 2.0 * lg.a;
      m(row, lambda0 + i) = -1.0;
      rhs(row) = -lg.b;
    }
  }
  for (int k = 0; k < nw; ++k) {
    const Constraint& con = w_cons[static_cast<std::size_t>(k)];
    if (con.kind == ConKind::gen_hi) m(con.item, nu0 + k) = 1.0;
    if (con.kind == ConKind::gen_lo) m(con.item, nu0 + k) = -1.0;
  }

  // Angle stationarity at non-slack buses:
  //   sum_j (lambda_i - lambda_j)/X_ij + sum_j (mu_ij - mu_ji)/X_ij = 0,
  // where only working-set mu's are nonzero.
  for (int i = 0; i < nb; ++i) {
    if (i + 1 == sc.slack) continue;
    const int row = theta_col[static_cast<std::size_t>(i)];  // rows share the theta layout
    for (const auto& il : sc.buses[static_cast<std::size_t>(i)].lines) {
      m(row, lambda0 + i) += il.inv_x;
      m(row, lambda0 + il.neighbor - 1) -= il.inv_x;
    }
  }
  for (int k = 0; k < nw; ++k) {
    const Constraint& con = w_cons[static_cast<std::size_t>(k)];
    if (con.kind != ConKind::line_fwd && con.kind != ConKind::line_rev) continue;
    const int f = sc.line_from[static_cast<std::size_t>(con.item)] - 1;
    const int t = sc.line_to[static_cast<std::size_t>(con.item)] - 1;
    const double w = sc.line_inv_x[static_cast<std::size_t>(con.item)];
    const double sign = (con.kind == ConKind::line_fwd) ? 1.0 : -1.0;
    if (f + 1 != sc.slack) m(theta_col[static_cast<std::size_t>(f)], nu0 + k) += sign * w;
    if (t + 1 != sc.slack) m(theta_col[static_cast<std::size_t>(t)], nu0 + k) -= sign * w;
  }

  // Power balance at every bus: -sum_g P_g + (B theta)_i = -P_L_i.
  for (int i = 0; i < nb; ++i) {
    const int row = lambda0 + i;  // rows share the lambda layout
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];
    for (const auto& lg : bl.gens) m(row, lg.gen) = -1.0;
    for (const auto& il : bl.lines) {
      if (theta_col[static_cast<std::size_t>(i)] >= 0)
        m(row, theta_col[static_cast<std::size_t>(i)]) += il.inv_x;
      const int j = il.neighbor - 1;
      if (theta_col[static_cast<std::size_t>(j)] >= 0)
        m(row, theta_col[static_cast<std::size_t>(j)]) -= il.inv_x;
    }
    rhs(row) = -bl.load;
  }

  // Working-set rows as equalities.
  for (int k = 0; k < nw; ++k) {
    const Constraint& con = w_cons[static_cast<std::size_t>(k)];
    const int row = nu0 + k;
    switch (con.kind) {
      case ConKind::gen_lo: {
        m(row, con.item) = 1.0;
        int bus = sc.gen_bus[static_cast<std::size_t>(con.item)] - 1;
        for (const auto& lg : sc.buses[static_cast<std::size_t>(bus)].gens)
          if (lg.gen == con.item) rhs(row) = lg.pmin;
        break;
      }
      case ConKind::gen_hi: {
        m(row, con.item) = 1.0;
        int bus = sc.gen_bus[static_cast<std::size_t>(con.item)] - 1;
        for (const auto& lg : sc.buses[static_cast<std::size_t>(bus)].gens)
          if (lg.gen == con.item) rhs(row) = lg.pmax;
        break;
      }
      case ConKind::line_fwd:
      case ConKind::line_rev: {
        const int f = sc.line_from[static_cast<std::size_t>(con.item)] - 1;
        const int t = sc.line_to[static_cast<std::size_t>(con.item)] - 1;
        const double w = sc.line_inv_x[static_cast<std::size_t>(con.item)];
        const double sign = (con.kind == ConKind::line_fwd) ? 1.0 : -1.0;
        if (theta_col[static_cast<std::size_t>(f)] >= 0)
          m(row, theta_col[static_cast<std::size_t>(f)]) += sign * w;
        if (theta_col[static_cast<std::size_t>(t)] >= 0)
          m(row, theta_col[static_cast<std::size_t>(t)]) -= sign * w;
        rhs(row) = sc.line_limit[static_cast<std::size_t>(con.item)];
        break;
      }
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd z = lu.solve(rhs);
  // One round of iterative refinement tightens the residual enough for
  // the downstream 1e-10 fixed-point checks.
  z += lu.solve(rhs - m * z);

  EqpPoint p;
  p.pg = z.head(ng);
  p.theta = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < nb; ++i)
    if (theta_col[static_cast<std::size_t>(i)] >= 0)
      p.theta(i) = z(theta_col[static_cast<std::size_t>(i)]);
  p.lambda = z.segment(lambda0, nb);
  p.nu = z.segment(nu0, nw);
  return p;
}

double line_flow(const SolverCase& sc, const Eigen::VectorXd& theta, int l) {
  return sc.line_inv_x[static_cast<std::size_t>(l)] *
         (theta(sc.line_from[static_cast<std::size_t>(l)] - 1) -
          theta(sc.line_to[static_cast<std::size_t>(l)] - 1));
}

// Signed violation of one inequality constraint (positive = violated).
double violation(const SolverCase& sc, const EqpPoint& p, int idx) {
  const Constraint con = constraint_from_index(sc, idx);
  switch (con.kind) {
    case ConKind::gen_lo: {
      const int bus = sc.gen_bus[static_cast<std::size_t>(con.item)] - 1;
      for (const auto& lg : sc.buses[static_cast<std::size_t>(bus)].gens)
        if (lg.gen == con.item) return lg.pmin - p.pg(con.item);
      return 0.0;
    }
    case ConKind::gen_hi: {
      const int bus = sc.gen_bus[static_cast<std::size_t>(con.item)] - 1;
      for (const auto& lg : sc.buses[static_cast<std::size_t>(bus)].gens)
        if (lg.gen == con.item) return p.pg(con.item) - lg.pmax;
      return 0.0;
    }
    case ConKind::line_fwd:
      return line_flow(sc, p.theta, con.item) - sc.line_limit[static_cast<std::size_t>(con.item)];
    case ConKind::line_rev:
      return -line_flow(sc, p.theta, con.item) - sc.line_limit[static_cast<std::size_t>(con.item)];
  }
  return 0.0;
}

OracleSolution assemble_solution(const GridCase& c, const SolverCase& sc,
                                 const EqpPoint& p, const std::vector<int>& w_idx) {
  OracleSolution s;
  s.pg.assign(p.pg.data(), p.pg.data() + p.pg.size());
  s.theta.assign(p.theta.data(), p.theta.data() + p.theta.size());
  s.lambda.assign(p.lambda.data(), p.lambda.data() + p.lambda.size());
  s.mu_fwd.assign(static_cast<std::size_t>(sc.n_line), 0.0);
  s.mu_rev.assign(static_cast<std::size_t>(sc.n_line), 0.0);
  s.mu_gen_hi.assign(static_cast<std::size_t>(sc.n_gen), 0.0);
  s.mu_gen_lo.assign(static_cast<std::size_t>(sc.n_gen), 0.0);
  for (std::size_t k = 0; k < w_idx.size(); ++k) {
    const Constraint con = constraint_from_index(sc, w_idx[k]);
    const double v = std::max(0.0, p.nu(static_cast<Eigen::Index>(k)));
    switch (con.kind) {
      case ConKind::gen_lo: s.mu_gen_lo[static_cast<std::size_t>(con.item)] = v; break;
      case ConKind::gen_hi: s.mu_gen_hi[static_cast<std::size_t>(con.item)] = v; break;
      case ConKind::line_fwd: s.mu_fwd[static_cast<std::size_t>(con.item)] = v; break;
      case ConKind::line_rev: s.mu_rev[static_cast<std::size_t>(con.item)] = v; break;
    }
  }
  s.objective = objective_pu(sc, c, s.pg);
  return s;
}

void check_obvious_feasibility(const SolverCase& sc) {
  double load = 0.0, pmax = 0.0, pmin = 0.0;
  for (const auto& bl : sc.buses) {
    load += bl.load;
    for (const auto& lg : bl.gens) {
      pmax += lg.pmax;
      pmin += lg.pmin;
    }
  }
  if (pmax < load - 1e-9)
    throw InfeasibleError("infeasible: total generation capacity below total load");
  if (pmin > load + 1e-9)
    throw InfeasibleError("infeasible: total minimum generation above total load");
}

}  // namespace

OracleSolution solve_centralized(const GridCase& c) {
  const SolverCase sc = make_solver_case(c);
  check_obvious_feasibility(sc);

  constexpr double ptol = 1e-9;  // pu
  constexpr double dtol = 1e-9;
  constexpr double tie = 1e-12;
  const int n_con = 2 * sc.n_gen + 2 * sc.n_line;
  const int max_iter = 50 + 10 * n_con;

  std::vector<int> w_idx;
  std::set<std::vector<int>> visited;

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<int> key = w_idx;
    std::sort(key.begin(), key.end());
    if (!visited.insert(key).second)
      throw InfeasibleError("active-set search cycled; problem infeasible or degenerate");

    auto point = solve_eqp(sc, w_idx);
    if (!point)
      throw InfeasibleError("singular working-set system; problem infeasible or degenerate");

    // Violated inactive constraints, most violated first (lowest index on
    // ties). A candidate whose row is dependent on the current working
    // set yields a singular system; skip it and try the next one - it
    // becomes addable again once the blocking members drop out.
    std::vector<std::pair<double, int>> violated;
    for (int idx = 0; idx < n_con; ++idx) {
      if (std::find(w_idx.begin(), w_idx.end(), idx) != w_idx.end()) continue;
      if (std::find(w_idx.begin(), w_idx.end(), opposite_index(sc, idx)) != w_idx.end()) continue;
      const double v = violation(sc, *point, idx);
      if (v > ptol) violated.push_back({-v, idx});
    }
    std::sort(violated.begin(), violated.end());
    bool added = false;
    for (const auto& [neg_v, idx] : violated) {
      std::vector<int> trial = w_idx;
      trial.push_back(idx);
      if (solve_eqp(sc, trial)) {
        w_idx = std::move(trial);
        added = true;
        break;
      }
    }
    if (added) continue;
    if (!violated.empty()) {
      // Everything violated is dependent on the working set: see whether
      // a drop frees the way; with no droppable multiplier the limits
      // are mutually inconsistent.
      bool any_neg = false;
      for (Eigen::Index k = 0; k < point->nu.size(); ++k)
        if (point->nu(k) < -dtol) any_neg = true;
      if (!any_neg)
        throw InfeasibleError("line and generation limits are mutually inconsistent");
    }

    // No violation: drop the most negative multiplier, if any.
    int drop = -1;
    double most_neg = -dtol;
    for (std::size_t k = 0; k < w_idx.size(); ++k) {
      const double nu = point->nu(static_cast<Eigen::Index>(k));
      if (nu < most_neg - tie) {
        most_neg = nu;
        drop = static_cast<int>(k);
      } else if (drop >= 0 && nu < most_neg + tie &&
                 w_idx[k] < w_idx[static_cast<std::size_t>(drop)]) {
        drop = static_cast<int>(k);
      }
    }
    if (drop >= 0) {
      w_idx.erase(w_idx.begin() + drop);
      continue;
    }

    return assemble_solution(c, sc, *point, w_idx);
  }
  throw InfeasibleError("active-set search exhausted its iteration budget");
}

OracleSolution solve_enumeration(const GridCase& c) {
  const SolverCase sc = make_solver_case(c);
  check_obvious_feasibility(sc);

  const int items = sc.n_gen + sc.n_line;
  double combos = 1.0;
  for (int i = 0; i < items; ++i) combos *= 3.0;
  if (combos > 6.0e5)
    throw std::invalid_argument("enumeration oracle limited to small cases");

  constexpr double ptol = 1e-7;
  const long total = static_cast<long>(combos);
  bool found = false;
  double best_obj = 0.0;
  std::vector<int> best_w;
  EqpPoint best_point;

  for (long code = 0; code < total; ++code) {
    // Base-3 digits: one per generator (0 none, 1 lower, 2 upper) then
    // one per line (0 none, 1 forward, 2 reverse).
    long rest = code;
    std::vector<int> w_idx;
    for (int g = 0; g < sc.n_gen; ++g) {
      const int d = static_cast<int>(rest % 3);
      rest /= 3;
      if (d == 1) w_idx.push_back(constraint_index(sc, {ConKind::gen_lo, g}));
      if (d == 2) w_idx.push_back(constraint_index(sc, {ConKind::gen_hi, g}));
    }
    for (int l = 0; l < sc.n_line; ++l) {
      const int d = static_cast<int>(rest % 3);
      rest /= 3;
      if (d == 1) w_idx.push_back(constraint_index(sc, {ConKind::line_fwd, l}));
      if (d == 2) w_idx.push_back(constraint_index(sc, {ConKind::line_rev, l}));
    }

    auto point = solve_eqp(sc, w_idx);
    if (!point) continue;

    bool ok = true;
    for (int idx = 0; idx < 2 * sc.n_gen + 2 * sc.n_line && ok; ++idx)
      if (violation(sc, *point, idx) > ptol) ok = false;
    for (Eigen::Index k = 0; k < point->nu.size() && ok; ++k)
      if (point->nu(k) < -ptol) ok = false;
    if (!ok) continue;

    const double obj = objective_pu(sc, c, std::vector<double>(
        point->pg.data(), point->pg.data() + point->pg.size()));
    std::vector<int> key = w_idx;
    std::sort(key.begin(), key.end());
    const double tol = 1e-9 * std::max(1.0, std::abs(obj));
    if (!found || obj < best_obj - tol || (std::abs(obj - best_obj) <= tol && key < best_w)) {
      found = true;
      best_obj = obj;
      best_w = key;
      best_point = *point;
    }
  }
  if (!found) throw InfeasibleError("enumeration found no feasible KKT point");
  return assemble_solution(c, sc, best_point, best_w);
}

KKTReport check_kkt(const GridCase& c, const OracleSolution& s) {
  const SolverCase sc = make_solver_case(c);
  if (s.pg.size() != static_cast<std::size_t>(sc.n_gen) ||
      s.theta.size() != static_cast<std::size_t>(sc.n_bus) ||
      s.lambda.size() != static_cast<std::size_t>(sc.n_bus) ||
      s.mu_fwd.size() != static_cast<std::size_t>(sc.n_line) ||
      s.mu_rev.size() != static_cast<std::size_t>(sc.n_line) ||
      s.mu_gen_hi.size() != static_cast<std::size_t>(sc.n_gen) ||
      s.mu_gen_lo.size() != static_cast<std::size_t>(sc.n_gen))
    throw std::invalid_argument("check_kkt: candidate dimensions do not match the case");

  KKTReport r;
  r.slack_angle = std::abs(s.theta[static_cast<std::size_t>(sc.slack - 1)]);

  for (int i = 0; i < sc.n_bus; ++i) {
    const auto& bl = sc.buses[static_cast<std::size_t>(i)];

    for (const auto& lg : bl.gens) {
      const double p = s.pg[static_cast<std::size_t>(lg.gen)];
      const double st = 2.0 * lg.a * p + lg.b - s.lambda[static_cast<std::size_t>(i)] +
                        s.mu_gen_hi[static_cast<std::size_t>(lg.gen)] -
                        s.mu_gen_lo[static_cast<std::size_t>(lg.gen)];
      r.stationarity_pg = std::max(r.stationarity_pg, std::abs(st));
      r.primal_feas = std::max({r.primal_feas, p - lg.pmax, lg.pmin - p});
      r.comp_slack = std::max(
          {r.comp_slack,
           std::abs(s.mu_gen_hi[static_cast<std::size_t>(lg.gen)] * (p - lg.pmax)),
           std::abs(s.mu_gen_lo[static_cast<std::size_t>(lg.gen)] * (lg.pmin - p))});
      r.dual_feas = std::min({r.dual_feas, s.mu_gen_hi[static_cast<std::size_t>(lg.gen)],
                              s.mu_gen_lo[static_cast<std::size_t>(lg.gen)]});
    }

    double coupling = 0.0;
    double gen_sum = 0.0;
    for (const auto& lg : bl.gens) gen_sum += s.pg[static_cast<std::size_t>(lg.gen)];
    double flow_out = 0.0;
    for (const auto& il : bl.lines) {
      const int j = il.neighbor - 1;
      coupling += il.inv_x * (s.lambda[static_cast<std::size_t>(i)] -
                              s.lambda[static_cast<std::size_t>(j)]);
      const double mu_own = il.forward ? s.mu_fwd[static_cast<std::size_t>(il.line)]
                                       : s.mu_rev[static_cast<std::size_t>(il.line)];
      const double mu_other = il.forward ? s.mu_rev[static_cast<std::size_t>(il.line)]
                                         : s.mu_fwd[static_cast<std::size_t>(il.line)];
      coupling += il.inv_x * (mu_own - mu_other);
      flow_out += il.inv_x * (s.theta[static_cast<std::size_t>(i)] -
                              s.theta[static_cast<std::size_t>(j)]);
    }
    r.stationarity_theta = std::max(r.stationarity_theta, std::abs(coupling));
    r.balance = std::max(r.balance, std::abs(-gen_sum + bl.load + flow_out));
  }

  for (int l = 0; l < sc.n_line; ++l) {
    const double f = sc.line_inv_x[static_cast<std::size_t>(l)] *
                     (s.theta[static_cast<std::size_t>(sc.line_from[static_cast<std::size_t>(l)] - 1)] -
                      s.theta[static_cast<std::size_t>(sc.line_to[static_cast<std::size_t>(l)] - 1)]);
    const double lim = sc.line_limit[static_cast<std::size_t>(l)];
    r.primal_feas = std::max({r.primal_feas, f - lim, -f - lim});
    r.comp_slack = std::max({r.comp_slack,
                             std::abs(s.mu_fwd[static_cast<std::size_t>(l)] * (f - lim)),
                             std::abs(s.mu_rev[static_cast<std::size_t>(l)] * (-f - lim))});
    r.dual_feas = std::min({r.dual_feas, s.mu_fwd[static_cast<std::size_t>(l)],
                            s.mu_rev[static_cast<std::size_t>(l)]});
  }
  r.primal_feas = std::max(r.primal_feas, 0.0);
  r.dual_feas = std::min(r.dual_feas, 0.0);
  return r;
}

void recover_gen_duals(const SolverCase& sc, OracleSolution& sol, double bound_tol) {
  sol.mu_gen_hi.assign(static_cast<std::size_t>(sc.n_gen), 0.0);
  sol.mu_gen_lo.assign(static_cast<std::size_t>(sc.n_gen), 0.0);
  for (const auto& bl : sc.buses) {
    for (const auto& lg : bl.gens) {
      const double p = sol.pg[static_cast<std::size_t>(lg.gen)];
      const double slack = sol.lambda[static_cast<std::size_t>(bl.bus - 1)] -
                           2.0 * lg.a * p - lg.b;
      if (p >= lg.pmax - bound_tol)
        sol.mu_gen_hi[static_cast<std::size_t>(lg.gen)] = std::max(0.0, slack);
      if (p <= lg.pmin + bound_tol)
        sol.mu_gen_lo[static_cast<std::size_t>(lg.gen)] = std::max(0.0, -slack);
    }
  }
}

std::string solution_to_json(const GridCase& c, const OracleSolution& s) {
  const double base = c.base_mva;
  json doc;
  doc["objective"] = s.objective;
  doc["pg_mw"] = json::array();
  for (double p : s.pg) doc["pg_mw"].push_back(p * base);
  doc["theta_rad"] = s.theta;
  doc["lambda"] = s.lambda;
  json lines = json::array();
  for (std::size_t l = 0; l < s.mu_fwd.size(); ++l)
    lines.push_back({{"from", c.lines[l].from},
                     {"to", c.lines[l].to},
                     {"fwd", s.mu_fwd[l]},
                     {"rev", s.mu_rev[l]}});
  doc["mu"] = {{"line", lines}, {"gen_hi", s.mu_gen_hi}, {"gen_lo", s.mu_gen_lo}};
  return doc.dump(2);
}

OracleSolution solution_from_json(const GridCase& c, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid solution JSON: ") + e.what());
  }
  OracleSolution s;
  s.objective = doc.at("objective").get<double>();
  for (const auto& v : doc.at("pg_mw")) s.pg.push_back(v.get<double>() / c.base_mva);
  s.theta = doc.at("theta_rad").get<std::vector<double>>();
  s.lambda = doc.at("lambda").get<std::vector<double>>();
  for (const auto& jl : doc.at("mu").at("line")) {
    s.mu_fwd.push_back(jl.at("fwd").get<double>());
    s.mu_rev.push_back(jl.at("rev").get<double>());
  }
  s.mu_gen_hi = doc.at("mu").at("gen_hi").get<std::vector<double>>();
  s.mu_gen_lo = doc.at("mu").at("gen_lo").get<std::vector<double>>();
  if (s.pg.size() != static_cast<std::size_t>(c.n_generators()) ||
      s.theta.size() != static_cast<std::size_t>(c.n_buses()) ||
      s.mu_fwd.size() != static_cast<std::size_t>(c.n_lines()))
    throw ParseError("solution dimensions do not match the case");
  return s;
}

}  // namespace dcopf
