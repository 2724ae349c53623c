#include "dcopf/cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcopf {

Eigen::VectorXd UpdateSystem::project(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd UpdateSystem::dense_step(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dense_step: dimension mismatch");
  Eigen::VectorXd next = x - a * x + c;
  return project(next);
}

UpdateSystem build_update_system(const SolverCase& sc, const TuningParams& p) {
  const int nb = sc.n_bus;
  const int nl = sc.n_line;
  const int ng = sc.n_gen;
  const int d = 2 * nb + 2 * nl + ng;

  UpdateSystem sys;
  sys.n_bus = nb;
  sys.n_line = nl;
  sys.n_gen = ng;
  sys.params = p;
  sys.a = Eigen::MatrixXd::Zero(d, d);
  sys.c = Eigen::VectorXd::Zero(d);

  // Susceptance Laplacian, incidence-weighted flow map and bus-generator
  // incidence, assembled in per-unit.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::MatrixXd by = Eigen::MatrixXd::Zero(2 * nl, nb);
  Eigen::MatrixXd gen_inc = Eigen::MatrixXd::Zero(nb, ng);
  for (int l = 0; l < nl; ++l) {
    const int f = sc.line_from[static_cast<std::size_t>(l)] - 1;
    const int t = sc.line_to[static_cast<std::size_t>(l)] - 1;
    const double w = sc.line_inv_x[static_cast<std::size_t>(l)];
    b(f, f) += w;
    b(t, t) += w;
    b(f, t) -= w;
    b(t, f) -= w;
    by(l, f) = w;
    by(l, t) = -w;
    by(nl + l, f) = -w;
    by(nl + l, t) = w;
  }
  for (int g = 0; g < ng; ++g) gen_inc(sc.gen_bus[static_cast<std::size_t>(g)] - 1, g) = 1.0;

  const int o_l = sys.off_lambda();
  const int o_t = sys.off_theta();
  const int o_m = sys.off_mu();
  const int o_p = sys.off_pg();

  sys.a.block(o_l, o_l, nb, nb) = p.beta * b;
  sys.a.block(o_l, o_t, nb, nb) = -p.alpha * b;
  sys.a.block(o_l, o_m, nb, 2 * nl) = p.beta * by.transpose();
  sys.a.block(o_l, o_p, nb, ng) = p.alpha * gen_inc;

  sys.a.block(o_t, o_t, nb, nb) = p.gamma * b;
  sys.a.block(o_t, o_p, nb, ng) = -p.gamma * gen_inc;

  sys.a.block(o_m, o_t, 2 * nl, nb) = -p.delta * by;

  sys.a.block(o_p, o_p, ng, ng) = Eigen::MatrixXd::Identity(ng, ng);

  Eigen::VectorXd load(nb);
  for (int i = 0; i < nb; ++i) load(i) = sc.buses[static_cast<std::size_t>(i)].load;
  sys.c.segment(o_l, nb) = p.alpha * load;
  sys.c.segment(o_t, nb) = -p.gamma * load;
  for (int l = 0; l < nl; ++l) {
    sys.c(o_m + l) = -p.delta * sc.line_limit[static_cast<std::size_t>(l)];
    sys.c(o_m + nl + l) = -p.delta * sc.line_limit[static_cast<std::size_t>(l)];
  }

  const double inf = std::numeric_limits<double>::infinity();
  sys.lo = Eigen::VectorXd::Constant(d, -inf);
  sys.hi = Eigen::VectorXd::Constant(d, inf);
  sys.lo.segment(o_m, 2 * nl).setZero();

  for (const auto& bl : sc.buses) {
    for (const auto& lg : bl.gens) {
      sys.a(o_p + lg.gen, o_l + bl.bus - 1) = -1.0 / (2.0 * lg.a);
      sys.c(o_p + lg.gen) = -lg.b / (2.0 * lg.a);
      sys.lo(o_p + lg.gen) = lg.pmin;
      sys.hi(o_p + lg.gen) = lg.pmax;
    }
  }

  if (p.pin_slack_angle) {
    // The slack angle row becomes theta_slack(k+1) = 0.
    const int row = o_t + sc.slack - 1;
    sys.a.row(row).setZero();
    sys.a(row, row) = 1.0;
    sys.c(row) = 0.0;
  }
  return sys;
}

UpdateSystem build_update_system(const GridCase& c, const TuningParams& p) {
  return build_update_system(make_solver_case(c), p);
}

double operator_norm(const Eigen::MatrixXd& m, NormP p) {
  switch (p) {
    case NormP::one:
      return m.cwiseAbs().colwise().sum().maxCoeff();
    case NormP::inf:
      return m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormP::two: {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      return svd.singularValues()(0);
    }
  }
  return 0.0;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue computation did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double Certificate::min_norm() const { return std::min({norm1, norm2, norm_inf}); }

Certificate evaluate_certificate(const UpdateSystem& sys) {
  Certificate cert;
  cert.params = sys.params;
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(sys.dim(), sys.dim()) - sys.a;
  cert.norm1 = operator_norm(m, NormP::one);
  cert.norm2 = operator_norm(m, NormP::two);
  cert.norm_inf = operator_norm(m, NormP::inf);
  cert.spectral_radius = spectral_radius(m);
  cert.certified = cert.min_norm() < 1.0;
  return cert;
}

ContractionReport verify_contraction_trace(const RunTrace& trace, const UpdateSystem& sys,
                                           NormP p, double rel_tol) {
  if (trace.params.mode != TuningParams::Mode::synchronous)
    throw std::invalid_argument("contraction bound applies to synchronous traces");
  if (!trace.iterations.empty() && trace.iterations.front().x.size() != sys.dim())
    throw std::invalid_argument("trace and update system disagree on dimensions");

  auto norm_of = [p](const Eigen::VectorXd& v) {
    switch (p) {
      case NormP::one: return v.lpNorm<1>();
      case NormP::two: return v.lpNorm<2>();
      case NormP::inf: return v.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
  };

  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(sys.dim(), sys.dim()) - sys.a;
  ContractionReport rep;
  rep.norm_value = operator_norm(m, p);

  std::vector<double> deltas;
  for (std::size_t k = 0; k + 1 < trace.iterations.size(); ++k)
    deltas.push_back(norm_of(trace.iterations[k + 1].x - trace.iterations[k].x));

  rep.stationary = std::all_of(deltas.begin(), deltas.end(),
                               [](double d) { return d == 0.0; });
  if (deltas.empty()) rep.stationary = true;
  if (rep.stationary || deltas.size() < 2) return rep;

  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    if (deltas[k] == 0.0) {
      // A zero step is a fixed point; everything after must stay put.
      if (deltas[k + 1] != 0.0) rep.holds = false;
      continue;
    }
    rep.max_ratio = std::max(rep.max_ratio, deltas[k + 1] / deltas[k]);
    const double bound = rep.norm_value * deltas[k] * (1.0 + rel_tol) + 1e-300;
    if (deltas[k + 1] > bound) rep.holds = false;
    ++rep.steps_checked;
  }
  return rep;
}

SweepResult tune_parameters(const SolverCase& sc, const std::vector<double>& alphas,
                            const std::vector<double>& betas,
                            const std::vector<double>& gammas,
                            const std::vector<double>& deltas,
                            SweepObjective objective) {
  if (alphas.empty() || betas.empty() || gammas.empty() || deltas.empty())
    throw std::invalid_argument("tune_parameters: empty grid");

  SweepResult result;
  bool have_best = false;
  for (double a : alphas)
    for (double b : betas)
      for (double g : gammas)
        for (double d : deltas) {
          TuningParams p;
          p.alpha = a;
          p.beta = b;
          p.gamma = g;
          p.delta = d;
          Certificate cert = evaluate_certificate(build_update_system(sc, p));
          result.table.push_back(cert);
          // Lexicographic grid order makes "first" deterministic.
          if (objective.kind == SweepObjective::Kind::first_certified) {
            if (!have_best && cert.certified) {
              result.best = cert;
              have_best = true;
            }
          } else {
            if (!have_best || cert.spectral_radius < result.best.spectral_radius) {
              result.best = cert;
              have_best = true;
            }
          }
        }
  if (!have_best) result.best = result.table.front();
  return result;
}

}  // namespace dcopf
