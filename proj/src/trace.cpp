#include "s3cm/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace s3cm {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "n,gamma,objective,dist_sq,u_norm\n";
  for (const TraceRow& row : trace.rows) {
    out << row.n << ',' << format_double(row.gamma) << ',' << format_double(row.objective) << ',';
    if (row.dist_sq) out << format_double(*row.dist_sq);
    out << ',' << format_double(row.u_norm) << '\n';
  }
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file '" + path + "' for writing");
  write_trace_csv(trace, out);
}

namespace {

double parse_field(const std::string& text, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("trace csv: bad number '" + text + "'", line);
  return v;
}

}  // namespace

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,gamma,objective,dist_sq,u_norm")
    throw ParseError("trace csv: missing header", 1);
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw ParseError("trace csv: expected 5 fields", line_no);
    TraceRow row;
    row.n = static_cast<std::size_t>(parse_field(fields[0], line_no));
    row.gamma = parse_field(fields[1], line_no);
    row.objective = parse_field(fields[2], line_no);
    if (!fields[3].empty()) row.dist_sq = parse_field(fields[3], line_no);
    row.u_norm = parse_field(fields[4], line_no);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace s3cm
