#ifndef DCOPF_TRACE_IO_HPP
#define DCOPF_TRACE_IO_HPP

#include <string>

#include "dcopf/cert.hpp"
#include "dcopf/engine.hpp"
#include "dcopf/metrics.hpp"

namespace dcopf {

/// Writes the run trace as CSV, one row per iteration:
/// k, res, rel (blank without an oracle), lambda per bus, theta per bus,
/// pg per generator (MW), mu per directed line. A sidecar JSON manifest
/// describing every column is written next to it.
void write_trace_csv(const std::string& csv_path, const std::string& manifest_path,
                     const GridCase& case_mw, const RunTrace& trace);

/// Comparison report as JSON. Wall time is zeroed with
/// include_timings=false so reruns are byte-identical.
std::string comparison_report_to_json(const ComparisonReport& rep, bool include_timings);

std::string certificate_to_json(const Certificate& cert, int n_bus, int n_line, int n_gen);

/// Sweep table as CSV, one row per grid point.
std::string sweep_to_csv(const SweepResult& sweep);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dcopf

#endif  // DCOPF_TRACE_IO_HPP
