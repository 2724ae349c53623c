#include <doctest.h>

#include <random>

#include "dcopf/metrics.hpp"
#include "dcopf/qp.hpp"
#include "test_util.hpp"

using namespace dcopf;

namespace {

GridCase one_bus_case(double load = 20.0, double pmax = 100.0) {
  GridCase c;
  c.buses = {{1, load, true}};
  c.generators = {{0, 1, 0.5, 10.0, 0.0, 0.0, pmax}};
  return validate(c);
}

// Two independent solver routes must agree (objective, primal, duals).
void check_agreement(const GridCase& c) {
  OracleSolution a = solve_centralized(c);
  OracleSolution e = solve_enumeration(c);
  CHECK(std::abs(a.objective - e.objective) < 1e-8 * std::max(1.0, std::abs(a.objective)));
  for (std::size_t g = 0; g < a.pg.size(); ++g)
    CHECK(a.pg[g] == doctest::Approx(e.pg[g]).epsilon(1e-6).scale(1.0));
  for (std::size_t i = 0; i < a.theta.size(); ++i)
    CHECK(a.theta[i] == doctest::Approx(e.theta[i]).epsilon(1e-6).scale(1.0));
  for (std::size_t i = 0; i < a.lambda.size(); ++i)
    CHECK(a.lambda[i] == doctest::Approx(e.lambda[i]).epsilon(1e-6).scale(1.0));
  CHECK(check_kkt(c, a).pass(1e-8));
  CHECK(check_kkt(c, e).pass(1e-8));
}

}  // namespace

TEST_CASE("single-bus stationarity") {
  GridCase c = one_bus_case();
  OracleSolution s = solve_centralized(c);
  CHECK(s.pg[0] * c.base_mva == doctest::Approx(20.0));
  CHECK(s.lambda[0] == doctest::Approx(30.0));  // 2*0.5*20 + 10
  CHECK(s.objective == doctest::Approx(400.0));
  CHECK(check_kkt(c, s).pass(1e-10));
}

TEST_CASE("uncongested two-bus case has equal prices") {
  GridCase c = test::load_data_case("case2.json");
  OracleSolution s = solve_centralized(c);
  CHECK(s.pg[0] * c.base_mva == doctest::Approx(50.0));
  CHECK(s.lambda[0] == doctest::Approx(60.0));
  CHECK(s.lambda[1] == doctest::Approx(60.0));
  CHECK(s.theta[1] == doctest::Approx(-0.05));
  CHECK(s.objective == doctest::Approx(1750.0));
  for (double m : s.mu_fwd) CHECK(m == 0.0);
  for (double m : s.mu_rev) CHECK(m == 0.0);
}

TEST_CASE("three-bus triangle, uncongested and congested") {
  GridCase c = test::load_data_case("case3.json");

  SUBCASE("uncongested optimum") {
    OracleSolution s = solve_enumeration(c);
    CHECK(s.pg[0] * c.base_mva == doctest::Approx(80.0));
    CHECK(s.pg[1] * c.base_mva == doctest::Approx(20.0));
    for (double l : s.lambda) CHECK(l == doctest::Approx(21.6));
    CHECK(s.theta[1] == doctest::Approx(-0.02));
    CHECK(s.theta[2] == doctest::Approx(-0.06));
    CHECK(s.objective == doctest::Approx(2090.0));
  }
  SUBCASE("tight line produces congestion duals and split prices") {
    GridCase cc = scale_line_limits(c, 0.55);
    OracleSolution s = solve_enumeration(cc);
    CHECK(s.pg[0] * c.base_mva == doctest::Approx(65.0));
    CHECK(s.pg[1] * c.base_mva == doctest::Approx(35.0));
    CHECK(s.lambda[0] == doctest::Approx(21.3));
    CHECK(s.lambda[1] == doctest::Approx(22.05));
    CHECK(s.lambda[2] == doctest::Approx(22.8));
    CHECK(s.objective == doctest::Approx(2095.625));
    // Only the 1->3 limit binds.
    CHECK(s.mu_fwd[1] == doctest::Approx(2.25));
    auto bind = binding_lines_of(cc, s);
    REQUIRE(bind.size() == 1);
    CHECK(bind[0].from == 1);
    CHECK(bind[0].to == 3);
    CHECK(bind[0].forward);
  }
}

TEST_CASE("active-set and enumeration agree on every shipped small case") {
  for (const char* name : {"case2.json", "case3.json", "case5.json"}) {
    CAPTURE(name);
    GridCase c = test::load_data_case(name);
    check_agreement(c);
    check_agreement(scale_line_limits(c, 0.55));
  }
}

TEST_CASE("active-set and enumeration agree on random cases") {
  std::mt19937 rng(3);
  int solved = 0;
  for (int trial = 0; trial < 30; ++trial) {
    GridCase c = test::random_case(rng, 2 + trial % 4);
    try {
      check_agreement(c);
      ++solved;
    } catch (const InfeasibleError&) {
      // random limits can make the case infeasible; that is fine here
    }
  }
  CHECK(solved >= 15);
}

TEST_CASE("check_kkt flags a perturbed slack angle") {
  GridCase c = test::load_data_case("case3.json");
  OracleSolution s = solve_centralized(c);
  s.theta[0] = 0.1;
  KKTReport r = check_kkt(c, s);
  CHECK(r.slack_angle == doctest::Approx(0.1));
  CHECK_FALSE(r.pass(1e-8));
}

TEST_CASE("check_kkt rejects dimension mismatches") {
  GridCase c = test::load_data_case("case3.json");
  OracleSolution s = solve_centralized(c);
  s.pg.pop_back();
  CHECK_THROWS_AS(check_kkt(c, s), std::invalid_argument);
}

TEST_CASE("objective evaluation") {
  SUBCASE("zero dispatch leaves the constant terms") {
    GridCase c = test::load_data_case("case5.json");
    std::vector<double> pg(static_cast<std::size_t>(c.n_generators()), 0.0);
    CHECK(objective(c, pg) == doctest::Approx(70.0));  // 50 + 20 + 0
  }
  SUBCASE("pure quadratic") {
    GridCase c;
    c.buses = {{1, 0.0, true}};
    c.generators = {{0, 1, 1.0, 0.0, 0.0, 0.0, 10.0}};
    c = validate(c);
    std::vector<double> pg{3.0};
    CHECK(objective(c, pg) == doctest::Approx(9.0));
  }
  SUBCASE("size mismatch throws") {
    GridCase c = test::load_data_case("case2.json");
    CHECK_THROWS_AS(objective(c, std::vector<double>{}), std::invalid_argument);
  }
}

TEST_CASE("feasible perturbations never improve the optimum") {
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  // One-generator cases have no feasible dispatch direction (balance pins
  // the output), so only the multi-generator cases are sampled.
  for (const char* name : {"case3.json", "case5.json"}) {
    CAPTURE(name);
    GridCase c = test::load_data_case(name);
    for (double scale : {1.0, 0.55}) {
      GridCase cs = scale_line_limits(c, scale);
      SolverCase sc = make_solver_case(cs);
      OracleSolution s = solve_centralized(cs);
      NetworkMatrices m = build_matrices(cs);

      // Reduced angle solve for a given injection vector.
      Eigen::MatrixXd bred = m.b.block(1, 1, sc.n_bus - 1, sc.n_bus - 1);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(bred);

      int accepted = 0;
      for (int trial = 0; trial < 400 && accepted < 200; ++trial) {
        // Random sum-zero dispatch direction of magnitude 1e-3 pu.
        Eigen::VectorXd d(sc.n_gen);
        for (int g = 0; g < sc.n_gen; ++g) d(g) = n(rng);
        d.array() -= d.mean();
        if (d.norm() < 1e-12) continue;
        d *= 1e-3 / d.norm();

        std::vector<double> pg = s.pg;
        bool ok = true;
        Eigen::VectorXd inj = Eigen::VectorXd::Zero(sc.n_bus);
        for (int g = 0; g < sc.n_gen; ++g) {
          pg[static_cast<std::size_t>(g)] += d(g);
          const auto& lg = cs.generators[static_cast<std::size_t>(g)];
          if (pg[static_cast<std::size_t>(g)] < lg.pmin / cs.base_mva - 1e-12 ||
              pg[static_cast<std::size_t>(g)] > lg.pmax / cs.base_mva + 1e-12)
            ok = false;
          inj(sc.gen_bus[static_cast<std::size_t>(g)] - 1) += pg[static_cast<std::size_t>(g)];
        }
        if (!ok) continue;
        for (int i = 0; i < sc.n_bus; ++i) inj(i) -= sc.buses[static_cast<std::size_t>(i)].load;
        Eigen::VectorXd th = Eigen::VectorXd::Zero(sc.n_bus);
        th.tail(sc.n_bus - 1) = lu.solve(inj.tail(sc.n_bus - 1));
        for (int l = 0; l < sc.n_line && ok; ++l) {
          const double flow = sc.line_inv_x[static_cast<std::size_t>(l)] *
                              (th(sc.line_from[static_cast<std::size_t>(l)] - 1) -
                               th(sc.line_to[static_cast<std::size_t>(l)] - 1));
          if (std::abs(flow) > sc.line_limit[static_cast<std::size_t>(l)] + 1e-12) ok = false;
        }
        if (!ok) continue;
        ++accepted;
        CHECK(objective_pu(sc, cs, pg) >= s.objective - 1e-9);
      }
      CHECK(accepted >= 50);
    }
  }
}

TEST_CASE("generator dual recovery matches the stationarity identity") {
  for (const char* name : {"case3.json", "case5.json"}) {
    GridCase c = scale_line_limits(test::load_data_case(name), 0.55);
    SolverCase sc = make_solver_case(c);
    OracleSolution s = solve_centralized(c);
    OracleSolution recovered = s;
    recover_gen_duals(sc, recovered);
    for (const auto& bl : sc.buses) {
      for (const auto& lg : bl.gens) {
        const std::size_t g = static_cast<std::size_t>(lg.gen);
        const double slack = s.lambda[static_cast<std::size_t>(bl.bus - 1)] -
                             2.0 * lg.a * s.pg[g] - lg.b;
        CHECK(recovered.mu_gen_hi[g] - recovered.mu_gen_lo[g] ==
              doctest::Approx(s.mu_gen_hi[g] - s.mu_gen_lo[g]).epsilon(1e-8).scale(1.0));
        if (s.pg[g] > lg.pmin + 1e-7 && s.pg[g] < lg.pmax - 1e-7) {
          CHECK(recovered.mu_gen_hi[g] == 0.0);
          CHECK(recovered.mu_gen_lo[g] == 0.0);
          CHECK(std::abs(slack) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("infeasible load is reported, not solved") {
  GridCase c = one_bus_case(/*load=*/500.0, /*pmax=*/100.0);
  CHECK_THROWS_AS(solve_centralized(c), InfeasibleError);
  CHECK_THROWS_AS(solve_enumeration(c), InfeasibleError);
}

TEST_CASE("exact bound with zero multiplier is treated as non-binding") {
  GridCase c = one_bus_case(/*load=*/100.0, /*pmax=*/100.0);
  OracleSolution s = solve_centralized(c);
  CHECK(s.pg[0] * c.base_mva == doctest::Approx(100.0));
  CHECK(s.mu_gen_hi[0] == 0.0);
  CHECK(check_kkt(c, s).pass(1e-8));
}

TEST_CASE("solution json export and import round-trip") {
  GridCase c = scale_line_limits(test::load_data_case("case3.json"), 0.55);
  OracleSolution s = solve_centralized(c);
  OracleSolution back = solution_from_json(c, solution_to_json(c, s));
  CHECK(back.objective == doctest::Approx(s.objective));
  for (std::size_t g = 0; g < s.pg.size(); ++g)
    CHECK(back.pg[g] == doctest::Approx(s.pg[g]).epsilon(1e-12));
  for (std::size_t l = 0; l < s.mu_fwd.size(); ++l)
    CHECK(back.mu_fwd[l] == doctest::Approx(s.mu_fwd[l]).epsilon(1e-12));
}
