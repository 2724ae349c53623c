// Command-line front end: centralized solve, distributed run, and
// convergence certification over JSON case files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dcopf/cert.hpp"
#include "dcopf/engine.hpp"
#include "dcopf/metrics.hpp"
#include "dcopf/qp.hpp"
#include "dcopf/trace_io.hpp"

namespace {

// Exit codes, also documented in the README.
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kParse = 2;
constexpr int kValidation = 3;
constexpr int kInfeasible = 4;
constexpr int kDiverged = 5;

using dcopf::GridCase;

GridCase load_scaled(const std::string& path, double limit_scale) {
  GridCase c = dcopf::load_case(path);
  if (limit_scale != 1.0) c = dcopf::scale_line_limits(c, limit_scale);
  return c;
}

std::string out_file(const std::string& dir, const char* name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

// A JSON config file may supply any long flag; explicit command-line
// flags win. The file is expanded into synthetic arguments up front.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::ifstream f(config_path);
  if (!f) throw dcopf::ParseError("cannot open config file: " + config_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw dcopf::ParseError(std::string("invalid config JSON: ") + e.what());
  }
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (given) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else {
      args.push_back(flag + "=" +
                     (value.is_string() ? value.get<std::string>() : value.dump()));
    }
  }
  return args;
}

int cmd_solve_central(const std::string& case_path, double limit_scale, bool enumerate,
                      const std::string& out_dir) {
  GridCase c = load_scaled(case_path, limit_scale);
  dcopf::OracleSolution sol =
      enumerate ? dcopf::solve_enumeration(c) : dcopf::solve_centralized(c);
  dcopf::KKTReport kkt = dcopf::check_kkt(c, sol);

  dcopf::write_text_file(out_file(out_dir, "solution.json"),
                         dcopf::solution_to_json(c, sol));
  const auto binding = dcopf::binding_lines_of(c, sol);
  nlohmann::json rep;
  rep["objective"] = sol.objective;
  rep["lmp"] = sol.lambda;
  rep["kkt_worst"] = kkt.worst();
  rep["binding_lines"] = nlohmann::json::array();
  for (const auto& b : binding)
    rep["binding_lines"].push_back({{"from", b.from},
                                    {"to", b.to},
                                    {"direction", b.forward ? "fwd" : "rev"},
                                    {"mu", b.mu}});
  dcopf::write_text_file(out_file(out_dir, "report.json"), rep.dump(2) + "\n");

  std::cout << "objective: " << sol.objective << " $/h\n";
  std::cout << "binding lines:";
  for (const auto& b : binding)
    std::cout << " " << b.from << (b.forward ? "->" : "<-") << b.to;
  if (binding.empty()) std::cout << " none";
  std::cout << "\nkkt worst residual: " << kkt.worst() << "\n";
  return kOk;
}

int cmd_solve_distributed(const std::string& case_path, dcopf::TuningParams params,
                          long iters, double limit_scale, double lambda0,
                          const std::string& oracle_path, const std::string& out_dir,
                          dcopf::StopRule stop, bool timestamps) {
  GridCase c = load_scaled(case_path, limit_scale);
  dcopf::SolverCase sc = dcopf::make_solver_case(c);

  std::optional<dcopf::OracleSolution> oracle;
  if (!oracle_path.empty()) {
    std::ifstream f(oracle_path);
    if (!f) throw dcopf::ParseError("cannot open oracle solution: " + oracle_path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    oracle = dcopf::solution_from_json(c, text);
    stop.f_star = oracle->objective;
  }
  stop.max_iters = iters;

  dcopf::RunTrace trace = dcopf::run(c, params, dcopf::init_cold(sc, lambda0), stop);
  dcopf::write_trace_csv(out_file(out_dir, "trace.csv"),
                         out_file(out_dir, "trace_manifest.json"), c, trace);
  dcopf::ComparisonReport rep = dcopf::make_comparison_report(c, trace, oracle);
  dcopf::write_text_file(out_file(out_dir, "report.json"),
                         dcopf::comparison_report_to_json(rep, timestamps));

  std::cout << "outcome: " << dcopf::to_string(trace.outcome) << " after "
            << trace.final_record().k << " iterations\n";
  std::cout << "res: " << trace.final_record().res << " pu";
  if (trace.final_record().rel) std::cout << ", rel: " << *trace.final_record().rel;
  std::cout << "\nlmp spread: " << rep.lmp_spread << " $/MWh\n";
  return trace.outcome == dcopf::RunOutcome::diverged ? kDiverged : kOk;
}

int cmd_certify(const std::string& case_path, double limit_scale,
                std::vector<double> alphas, std::vector<double> betas,
                std::vector<double> gammas, std::vector<double> deltas,
                const std::string& objective, const std::string& out_dir) {
  GridCase c = load_scaled(case_path, limit_scale);
  dcopf::SolverCase sc = dcopf::make_solver_case(c);

  dcopf::SweepObjective obj;
  if (objective == "certified")
    obj.kind = dcopf::SweepObjective::Kind::first_certified;

  dcopf::SweepResult sweep = dcopf::tune_parameters(sc, alphas, betas, gammas, deltas, obj);
  dcopf::write_text_file(
      out_file(out_dir, "certificate.json"),
      dcopf::certificate_to_json(sweep.best, sc.n_bus, sc.n_line, sc.n_gen));
  if (sweep.table.size() > 1)
    dcopf::write_text_file(out_file(out_dir, "sweep.csv"), dcopf::sweep_to_csv(sweep));

  const auto& b = sweep.best;
  std::cout << "best point: alpha=" << b.params.alpha << " beta=" << b.params.beta
            << " gamma=" << b.params.gamma << " delta=" << b.params.delta << "\n";
  std::cout << "norms: l1=" << b.norm1 << " l2=" << b.norm2 << " linf=" << b.norm_inf
            << "\nspectral radius: " << b.spectral_radius << "\n";
  std::cout << (b.certified ? "certified: some operator norm of I-A is below 1\n"
                            : "not certified: no operator norm below 1 (sufficient "
                              "condition only; run the engine to check empirically)\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed DC optimal power flow toolkit"};
  app.require_subcommand(1);

  std::string case_path, out_dir = ".", oracle_path, mode = "sync", objective = "rho";
  std::string config_path;
  double limit_scale = 1.0, lambda0 = 10.0;
  bool enumerate = false, no_timestamp = false, float_slack = false;
  long iters = 10000;
  // Defaults are the RTS-24 tuning of the reference experiments.
  std::vector<double> alphas{0.1485}, betas{0.0056}, gammas{0.005}, deltas{0.008};
  dcopf::StopRule stop;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("case", case_path, "case file (JSON)")->required();
    cmd->add_option("--limit-scale", limit_scale, "scale every line limit");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--config", config_path, "JSON file supplying any flag");
  };

  CLI::App* central = app.add_subcommand("solve-central", "centralized reference solve");
  add_common(central);
  central->add_flag("--enumerate", enumerate, "use the exhaustive working-set oracle");
  central->add_flag("--no-timestamp", no_timestamp, "reproducible output files");

  CLI::App* dist = app.add_subcommand("solve-distributed", "neighbor-exchange iteration");
  add_common(dist);
  dist->add_option("--alpha", alphas, "price balance gain")->expected(1);
  dist->add_option("--beta", betas, "price coupling gain")->expected(1);
  dist->add_option("--gamma", gammas, "angle balance gain")->expected(1);
  dist->add_option("--delta", deltas, "line dual gain")->expected(1);
  dist->add_option("--iters", iters, "maximum iterations");
  dist->add_option("--mode", mode, "sync | serial")
      ->check(CLI::IsMember({"sync", "serial"}));
  dist->add_option("--oracle", oracle_path, "solution.json for the rel metric");
  dist->add_option("--lambda0", lambda0, "initial price, $/MWh");
  dist->add_option("--eps-delta", stop.eps_delta, "stop on iterate change (l-inf)");
  dist->add_option("--eps-res", stop.eps_res, "stop on balance residual (pu)");
  dist->add_option("--eps-rel", stop.eps_rel, "stop on relative objective gap");
  dist->add_flag("--float-slack", float_slack, "let the slack angle float");
  dist->add_flag("--no-timestamp", no_timestamp, "reproducible output files");

  CLI::App* certify = app.add_subcommand("certify", "contraction certificate / sweep");
  add_common(certify);
  certify->add_option("--alpha", alphas, "value or sweep list");
  certify->add_option("--beta", betas, "value or sweep list");
  certify->add_option("--gamma", gammas, "value or sweep list");
  certify->add_option("--delta", deltas, "value or sweep list");
  certify->add_option("--objective", objective, "rho | certified")
      ->check(CLI::IsMember({"rho", "certified"}));

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const dcopf::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
  try {
    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (central->parsed())
      return cmd_solve_central(case_path, limit_scale, enumerate, out_dir);
    if (dist->parsed()) {
      dcopf::TuningParams p{alphas[0], betas[0], gammas[0], deltas[0]};
      p.mode = (mode == "serial") ? dcopf::TuningParams::Mode::serial
                                  : dcopf::TuningParams::Mode::synchronous;
      p.pin_slack_angle = !float_slack;
      return cmd_solve_distributed(case_path, p, iters, limit_scale, lambda0, oracle_path,
                                   out_dir, stop, !no_timestamp);
    }
    return cmd_certify(case_path, limit_scale, alphas, betas, gammas, deltas, objective,
                       out_dir);
  } catch (const dcopf::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const dcopf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const dcopf::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
