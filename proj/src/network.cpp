#include "dcopf/network.hpp"

namespace dcopf {

NetworkMatrices build_matrices(const GridCase& c) {
  const int nb = c.n_buses();
  const int nl = c.n_lines();
  NetworkMatrices m;
  m.b = Eigen::MatrixXd::Zero(nb, nb);
  m.incidence = Eigen::MatrixXd::Zero(nb, nl);
  m.by = Eigen::MatrixXd::Zero(2 * nl, nb);

  for (int l = 0; l < nl; ++l) {
    const Line& ln = c.lines[static_cast<std::size_t>(l)];
    const int i = ln.from - 1;
    const int j = ln.to - 1;
    const double w = 1.0 / ln.reactance;
    m.b(i, i) += w;
    m.b(j, j) += w;
    m.b(i, j) -= w;
    m.b(j, i) -= w;
    m.incidence(i, l) = 1.0;
    m.incidence(j, l) = -1.0;
    // Row l carries the from->to flow, row l + N_L its negative.
    m.by(l, i) = w;
    m.by(l, j) = -w;
    m.by(nl + l, i) = -w;
    m.by(nl + l, j) = w;
  }
  return m;
}

SolverCase make_solver_case(const GridCase& c) {
  const GridCase& mw = c;
  if (mw.units != Units::mw)
    throw ValidationError("units", "solver case expects a MW-units case");
  const double s = mw.base_mva;

  SolverCase sc;
  sc.n_bus = mw.n_buses();
  sc.n_line = mw.n_lines();
  sc.n_gen = mw.n_generators();
  sc.slack = mw.slack_bus();
  sc.base_mva = s;
  sc.buses.resize(static_cast<std::size_t>(sc.n_bus));

  for (int i = 0; i < sc.n_bus; ++i) {
    auto& bl = sc.buses[static_cast<std::size_t>(i)];
    const Bus& b = mw.buses[static_cast<std::size_t>(i)];
    bl.bus = b.id;
    bl.slack = b.is_slack;
    bl.load = b.load / s;
  }

  sc.line_limit.resize(static_cast<std::size_t>(sc.n_line));
  sc.line_inv_x.resize(static_cast<std::size_t>(sc.n_line));
  sc.line_from.resize(static_cast<std::size_t>(sc.n_line));
  sc.line_to.resize(static_cast<std::size_t>(sc.n_line));
  for (int l = 0; l < sc.n_line; ++l) {
    const Line& ln = mw.lines[static_cast<std::size_t>(l)];
    sc.line_limit[static_cast<std::size_t>(l)] = ln.limit / s;
    sc.line_inv_x[static_cast<std::size_t>(l)] = 1.0 / ln.reactance;
    sc.line_from[static_cast<std::size_t>(l)] = ln.from;
    sc.line_to[static_cast<std::size_t>(l)] = ln.to;
    SolverCase::IncidentLine fwd{l, ln.to, 1.0 / ln.reactance, ln.limit / s, true};
    SolverCase::IncidentLine rev{l, ln.from, 1.0 / ln.reactance, ln.limit / s, false};
    sc.buses[static_cast<std::size_t>(ln.from - 1)].lines.push_back(fwd);
    sc.buses[static_cast<std::size_t>(ln.to - 1)].lines.push_back(rev);
  }

  sc.gen_bus.resize(static_cast<std::size_t>(sc.n_gen));
  for (int g = 0; g < sc.n_gen; ++g) {
    const Generator& gen = mw.generators[static_cast<std::size_t>(g)];
    sc.gen_bus[static_cast<std::size_t>(g)] = gen.bus;
    SolverCase::LocalGen lg;
    lg.gen = g;
    lg.a = gen.a * s;  // lambda [$/MWh] = 2*(a*base)*P_pu + b
    lg.b = gen.b;
    lg.pmin = gen.pmin / s;
    lg.pmax = gen.pmax / s;
    sc.buses[static_cast<std::size_t>(gen.bus - 1)].gens.push_back(lg);
  }
  return sc;
}

}  // namespace dcopf
