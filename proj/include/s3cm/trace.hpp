#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3cm/core.hpp"

namespace s3cm {

struct TraceRow {
  std::size_t n = 0;
  double gamma = 0.0;
  double objective = 0.0;
  std::optional<double> dist_sq;
  double u_norm = 0.0;
};

/// Per-run record stream. Row n describes the iterate after n steps and the
/// step gamma_n that the next step will use for its g-prox.
struct Trace {
  std::vector<TraceRow> rows;
  nlohmann::json meta = nlohmann::json::object();
  Vector final_iterate;
  /// Output iterate (x_g, or x_bar for the multi-term solver) per row; only
  /// filled when requested.
  std::vector<Vector> iterates;
  /// Full solver state per row; only filled when requested.
  std::vector<SolverState> states;
  double wall_seconds = 0.0;
};

/// Header `n,gamma,objective,dist_sq,u_norm`; shortest round-trip decimals;
/// an absent dist_sq is an empty field.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::string& path);

/// Parses the format written by write_trace_csv.
std::vector<TraceRow> read_trace_csv(std::istream& in);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace s3cm
