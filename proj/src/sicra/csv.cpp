#include "sicra/csv.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sicra/error.hpp"

namespace sicra::csv {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void write_sweep(std::ostream& os, std::span<const SweepPoint> points) {
  os << kSweepHeader << '\n';
  for (const auto& p : points) {
    const auto& m = p.metrics;
    os << format_number(p.lambda) << ',' << format_number(m.throughput) << ','
       << format_number(m.mean_delay) << ',' << format_number(m.collision_rate) << ','
       << format_number(m.idle_rate) << ',' << format_number(m.srp_fraction) << '\n';
  }
}

void write_backlog(std::ostream& os, std::span<const BacklogSample> samples) {
  os << kTraceHeader << '\n';
  for (const auto& s : samples)
    os << s.slot << ',' << s.true_backlog << ',' << format_number(s.estimated_nu) << '\n';
}

void write_trace(std::ostream& os, std::span<const TracePoint> points) {
  os << kTraceHeader << '\n';
  for (const auto& p : points)
    os << p.slot << ',' << format_number(p.true_backlog) << ','
       << format_number(p.estimated_nu) << '\n';
}

void write_events(std::ostream& os, std::span<const EventRecord> events) {
  os << kEventHeader << '\n';
  for (const auto& e : events)
    os << e.slot << ',' << e.event << ',' << format_number(e.nu) << ','
       << format_number(e.lambda_e) << ',' << format_number(e.p_star) << '\n';
}

void write_srp_trace(std::ostream& os, std::span<const SrpTraceRow> rows) {
  os << kSrpTraceHeader << '\n';
  for (const auto& r : rows)
    os << r.slot_offset << ',' << r.transmitters.to_string() << ','
       << r.decoded.to_string() << ',' << (r.repair ? 1 : 0) << '\n';
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  fail(ErrorKind::Io, "csv: no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Table read(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::Io, "csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != t.header.size())
      fail(ErrorKind::Io, "csv line " + std::to_string(line_no) + ": expected " +
                              std::to_string(t.header.size()) + " fields, got " +
                              std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return read(in);
  } catch (const Error& e) {
    fail(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace sicra::csv
