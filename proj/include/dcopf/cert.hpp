#ifndef DCOPF_CERT_HPP
#define DCOPF_CERT_HPP

#include <vector>

#include <Eigen/Dense>

#include "dcopf/engine.hpp"
#include "dcopf/network.hpp"

namespace dcopf {

/// Dense form of one synchronous round: X(k+1) = (I - A) Xp(k) + C, with
/// Xp the projected iterate. Blocks are ordered [lambda | theta | mu | pg];
/// mu stacks the forward directions of all lines, then the reverse ones.
/// The slack-angle row is replaced by a pinning row when the params pin it.
struct UpdateSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd c;
  Eigen::VectorXd lo, hi;  // componentwise projection bounds
  int n_bus = 0, n_line = 0, n_gen = 0;
  TuningParams params;

  int dim() const { return static_cast<int>(a.rows()); }
  int off_lambda() const { return 0; }
  int off_theta() const { return n_bus; }
  int off_mu() const { return 2 * n_bus; }
  int off_pg() const { return 2 * n_bus + 2 * n_line; }

  /// Componentwise projection onto the feasible box.
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// One dense round applied to a projected iterate.
  Eigen::VectorXd dense_step(const Eigen::VectorXd& x) const;
};

UpdateSystem build_update_system(const SolverCase& sc, const TuningParams& p);
UpdateSystem build_update_system(const GridCase& c, const TuningParams& p);

enum class NormP { one, two, inf };

double operator_norm(const Eigen::MatrixXd& m, NormP p);
double spectral_radius(const Eigen::MatrixXd& m);

/// Contraction certificate for one tuning point: the three operator
/// norms of I - A, its spectral radius, and whether any norm is < 1
/// (the sufficient convergence condition; its failure is only a warning).
struct Certificate {
  TuningParams params;
  double norm1 = 0.0;
  double norm2 = 0.0;
  double norm_inf = 0.0;
  double spectral_radius = 0.0;
  bool certified = false;

  double norm(NormP p) const {
    return p == NormP::one ? norm1 : (p == NormP::two ? norm2 : norm_inf);
  }
  double min_norm() const;
};

Certificate evaluate_certificate(const UpdateSystem& sys);

/// Numerical check of the per-step bound
///   ||Xp(k+1) - Xp(k)||_p <= ||I - A||_p ||Xp(k) - Xp(k-1)||_p
/// on a recorded synchronous trace.
struct ContractionReport {
  bool stationary = false;  // all steps zero: ratios undefined
  bool holds = true;
  long steps_checked = 0;
  double max_ratio = 0.0;  // max ||dX(k+1)|| / ||dX(k)|| over the trace
  double norm_value = 0.0;
};

ContractionReport verify_contraction_trace(const RunTrace& trace, const UpdateSystem& sys,
                                           NormP p, double rel_tol = 1e-9);

/// Exhaustive tuning-grid sweep. Objective first_certified keeps the
/// lexicographically first point with some norm < 1; min_spectral_radius
/// keeps the point with the smallest rho (lexicographic tie-break).
struct SweepObjective {
  enum class Kind { min_spectral_radius, first_certified } kind =
      Kind::min_spectral_radius;
};

struct SweepResult {
  Certificate best;
  std::vector<Certificate> table;  // in lexicographic grid order
};

SweepResult tune_parameters(const SolverCase& sc, const std::vector<double>& alphas,
                            const std::vector<double>& betas,
                            const std::vector<double>& gammas,
                            const std::vector<double>& deltas,
                            SweepObjective objective = {});

}  // namespace dcopf

#endif  // DCOPF_CERT_HPP
