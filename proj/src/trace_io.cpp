#include "dcopf/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dcopf {

using nlohmann::json;

namespace {

// Shortest representation that round-trips a double exactly.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

void write_trace_csv(const std::string& csv_path, const std::string& manifest_path,
                     const GridCase& case_mw, const RunTrace& trace) {
  const SolverCase sc = make_solver_case(case_mw);

  std::vector<std::string> columns{"k", "res", "rel"};
  json manifest;
  manifest["columns"] = json::array();
  manifest["columns"].push_back({{"name", "k"}, {"unit", "iteration"}});
  manifest["columns"].push_back(
      {{"name", "res"}, {"unit", "pu"}, {"desc", "sum of |bus balance residual|"}});
  manifest["columns"].push_back(
      {{"name", "rel"}, {"unit", "1"}, {"desc", "|f - f*|/f*, blank without oracle"}});

  for (int i = 1; i <= sc.n_bus; ++i) {
    columns.push_back("lambda_" + std::to_string(i));
    manifest["columns"].push_back({{"name", columns.back()}, {"unit", "$/MWh"}});
  }
  for (int i = 1; i <= sc.n_bus; ++i) {
    columns.push_back("theta_" + std::to_string(i));
    manifest["columns"].push_back({{"name", columns.back()}, {"unit", "rad"}});
  }
  for (int g = 1; g <= sc.n_gen; ++g) {
    columns.push_back("pg_" + std::to_string(g));
    manifest["columns"].push_back({{"name", columns.back()}, {"unit", "MW"}});
  }
  for (int l = 0; l < sc.n_line; ++l) {
    columns.push_back("mu_" + std::to_string(sc.line_from[static_cast<std::size_t>(l)]) +
                      "_" + std::to_string(sc.line_to[static_cast<std::size_t>(l)]));
    manifest["columns"].push_back({{"name", columns.back()}, {"unit", "$/MWh"}});
  }
  for (int l = 0; l < sc.n_line; ++l) {
    columns.push_back("mu_" + std::to_string(sc.line_to[static_cast<std::size_t>(l)]) +
                      "_" + std::to_string(sc.line_from[static_cast<std::size_t>(l)]));
    manifest["columns"].push_back({{"name", columns.back()}, {"unit", "$/MWh"}});
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? "," : "\n");

  for (const auto& rec : trace.iterations) {
    out << rec.k << "," << fmt(rec.res) << ",";
    if (rec.rel) out << fmt(*rec.rel);
    for (int i = 0; i < sc.n_bus; ++i) out << "," << fmt(rec.x(sc.off_lambda() + i));
    for (int i = 0; i < sc.n_bus; ++i) out << "," << fmt(rec.x(sc.off_theta() + i));
    for (int g = 0; g < sc.n_gen; ++g)
      out << "," << fmt(rec.x(sc.off_pg() + g) * sc.base_mva);
    for (int l = 0; l < 2 * sc.n_line; ++l) out << "," << fmt(rec.x(sc.off_mu_fwd() + l));
    out << "\n";
  }
  write_text_file(csv_path, out.str());

  manifest["rows"] = trace.iterations.size();
  manifest["outcome"] = to_string(trace.outcome);
  write_text_file(manifest_path, manifest.dump(2) + "\n");
}

namespace {

json kkt_to_json(const KKTReport& k) {
  return json{{"stationarity_pg", k.stationarity_pg},
              {"stationarity_theta", k.stationarity_theta},
              {"balance", k.balance},
              {"slack_angle", k.slack_angle},
              {"primal_feas", k.primal_feas},
              {"comp_slack", k.comp_slack},
              {"dual_feas", k.dual_feas}};
}

}  // namespace

std::string comparison_report_to_json(const ComparisonReport& rep, bool include_timings) {
  json doc;
  doc["outcome"] = to_string(rep.outcome);
  doc["iterations"] = rep.iterations;
  if (rep.rel_final) doc["rel_final"] = *rep.rel_final;
  doc["res_final"] = rep.res_final;
  doc["lmp"] = rep.lmp;
  doc["lmp_spread"] = rep.lmp_spread;
  doc["binding_lines"] = json::array();
  for (const auto& b : rep.binding_lines)
    doc["binding_lines"].push_back({{"from", b.from},
                                    {"to", b.to},
                                    {"direction", b.forward ? "fwd" : "rev"},
                                    {"mu", b.mu}});
  doc["kkt"] = kkt_to_json(rep.kkt);
  if (include_timings) doc["wall_time_s"] = rep.wall_time_s;
  return doc.dump(2) + "\n";
}

std::string certificate_to_json(const Certificate& cert, int n_bus, int n_line, int n_gen) {
  json doc;
  doc["params"] = {{"alpha", cert.params.alpha},
                   {"beta", cert.params.beta},
                   {"gamma", cert.params.gamma},
                   {"delta", cert.params.delta}};
  doc["norms"] = {{"l1", cert.norm1}, {"l2", cert.norm2}, {"linf", cert.norm_inf}};
  doc["spectral_radius"] = cert.spectral_radius;
  doc["certified"] = cert.certified;
  doc["dims"] = {{"n_bus", n_bus},
                 {"n_line", n_line},
                 {"n_gen", n_gen},
                 {"dim", 2 * n_bus + 2 * n_line + n_gen}};
  return doc.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "alpha,beta,gamma,delta,norm1,norm2,norm_inf,spectral_radius,certified\n";
  for (const auto& c : sweep.table) {
    out << fmt(c.params.alpha) << "," << fmt(c.params.beta) << "," << fmt(c.params.gamma)
        << "," << fmt(c.params.delta) << "," << fmt(c.norm1) << "," << fmt(c.norm2) << ","
        << fmt(c.norm_inf) << "," << fmt(c.spectral_radius) << ","
        << (c.certified ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace dcopf
