#ifndef DCOPF_GRID_HPP
#define DCOPF_GRID_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcopf {

/// Error thrown when a case document cannot be parsed at all.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Error thrown when a parsed case violates a model invariant.
/// `path()` identifies the offending field, e.g. "lines[0].x".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Network node. Ids are 1-based and contiguous after ingestion.
struct Bus {
  int id = 0;
  double load = 0.0;  // MW (or pu, see GridCase::units)
  bool is_slack = false;
};

/// Transmission line between two buses. At most one line per unordered
/// bus pair; parallel lines are merged at ingestion (1/x summed, limits
/// summed).
struct Line {
  int from = 0;
  int to = 0;
  double reactance = 0.0;  // pu, > 0
  double limit = 0.0;      // MW (or pu), > 0
};

/// Generating unit with quadratic cost a*P^2 + b*P + c.
struct Generator {
  int id = 0;
  int bus = 0;
  double a = 0.0;  // $/MW^2h, > 0
  double b = 0.0;  // $/MWh
  double c = 0.0;  // $/h
  double pmin = 0.0;  // MW (or pu)
  double pmax = 0.0;  // MW (or pu)
};

/// Unit system of the numeric fields of a GridCase. I/O is always in
/// megawatt units; per_unit is the normalized form used by computations.
enum class Units { mw, per_unit };

/// Immutable network description. Construct through load_case() or
/// validate() so the invariants (connected graph, unique contiguous ids,
/// positive reactances, one slack) are guaranteed to hold.
struct GridCase {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  double base_mva = 100.0;
  Units units = Units::mw;

  int n_buses() const { return static_cast<int>(buses.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }
  int n_generators() const { return static_cast<int>(generators.size()); }
  int slack_bus() const;  // 1-based id
  double total_load() const;
  double total_pmax() const;
};

/// Parses and validates a case document from a file path.
GridCase load_case(const std::string& path);

/// Parses and validates a case document from a stream.
GridCase load_case(std::istream& in);

/// Parses and validates a case document held in memory.
GridCase load_case_from_string(const std::string& text);

/// Validates a raw GridCase: normalizes bus ids to 1..N_B, merges
/// parallel lines, orders generators by id, checks every invariant.
/// Throws ValidationError naming the offending field.
GridCase validate(GridCase raw);

/// Serializes a case back to its JSON document form.
std::string case_to_json(const GridCase& c);

/// Returns a copy of the case with every line limit multiplied by
/// `factor` (> 0). Used to recreate congestion scenarios from one file.
GridCase scale_line_limits(const GridCase& c, double factor);

/// Converts a MW-units case to per-unit on base_mva: loads, limits and
/// generator bounds are divided by the base; cost a is multiplied by
/// base^2 and b by base, so any dispatch evaluates to the same $ value
/// in either system.
GridCase to_internal_units(const GridCase& c);

/// Inverse of to_internal_units.
GridCase from_internal_units(const GridCase& c);

}  // namespace dcopf

#endif  // DCOPF_GRID_HPP
