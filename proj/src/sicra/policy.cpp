#include "sicra/policy.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sicra/analysis.hpp"
#include "sicra/error.hpp"

namespace sicra {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ErrorKind::Config, "policy table: bad number '" + std::string(text) +
                                "' for key '" + std::string(key) + "'");
  return value;
}

std::vector<double> parse_vector(std::string_view text, std::string_view key) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_double(text.substr(start, comma - start), key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_vector(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(RetxMode mode) noexcept {
  return mode == RetxMode::Half ? "half" : "optimized";
}

RetxMode parse_retx_mode(std::string_view text) {
  if (text == "optimized") return RetxMode::Optimized;
  if (text == "half") return RetxMode::Half;
  fail(ErrorKind::Config, "unknown retransmission mode '" + std::string(text) + "'");
}

double PolicyTable::srp_mean_for(int k) const {
  if (k < 2 || k > capability)
    fail(ErrorKind::Domain, "no resolve procedure for group size " + std::to_string(k));
  return srp_mean[static_cast<std::size_t>(k - 2)];
}

double PolicyTable::retx_prob_for(int k) const {
  if (k < 2 || k > capability)
    fail(ErrorKind::Domain, "no resolve procedure for group size " + std::to_string(k));
  return retx_probs[static_cast<std::size_t>(k - 2)];
}

PolicyTable build_policy_table(int capability, double failure_prob, RetxMode mode) {
  if (capability < 1)
    fail(ErrorKind::Domain, "SIC capability must be >= 1");
  analysis::expected_repair_slots(failure_prob);  // domain check on p_e

  PolicyTable table;
  table.capability = capability;
  table.failure_prob = failure_prob;
  table.retx_mode = mode;
  if (capability >= 2) {
    if (mode == RetxMode::Optimized) {
      auto opt = analysis::optimize_retx_probs(capability, failure_prob);
      table.retx_probs = std::move(opt.probs);
      table.srp_mean = std::move(opt.durations);
    } else {
      table.retx_probs.assign(static_cast<std::size_t>(capability - 1), 0.5);
      table.srp_mean = analysis::expected_srp_durations(table.retx_probs, failure_prob);
    }
  }
  const auto rate = analysis::optimize_x(capability, table.srp_mean);
  table.x_star = rate.x_star;
  table.s_star = rate.s_star;
  table.c_m = analysis::collision_offset(table.x_star, capability);
  return table;
}

void validate(const PolicyTable& t) {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "policy table: " + what); };
  if (t.capability < 1) bad("M must be >= 1");
  if (!(t.failure_prob >= 0.0 && t.failure_prob < 1.0)) bad("p_e must lie in [0,1)");
  if (!(t.x_star > 0.0)) bad("x_star must be > 0");
  if (!(t.s_star > 0.0 && t.s_star < 1.0)) bad("s_star must lie in (0,1)");
  if (!(t.c_m > 0.0)) bad("c_m must be > 0");
  const auto expected = static_cast<std::size_t>(t.capability - 1);
  if (t.srp_mean.size() != expected || t.retx_probs.size() != expected)
    bad("srp_mean and retx_probs need M-1 entries");
  for (std::size_t i = 0; i < expected; ++i) {
    if (!(t.retx_probs[i] > 0.0 && t.retx_probs[i] < 1.0)) bad("retx_probs must lie in (0,1)");
    if (!(t.srp_mean[i] >= 1.0)) bad("srp_mean entries must be >= 1");
    if (i > 0 && t.srp_mean[i] < t.srp_mean[i - 1]) bad("srp_mean must be nondecreasing");
  }
}

std::string serialize(const PolicyTable& t) {
  std::ostringstream os;
  os << "# sicra policy table\n"
     << "M = " << t.capability << '\n'
     << "p_e = " << format_double(t.failure_prob) << '\n'
     << "retx_mode = " << to_string(t.retx_mode) << '\n'
     << "x_star = " << format_double(t.x_star) << '\n'
     << "s_star = " << format_double(t.s_star) << '\n'
     << "c_m = " << format_double(t.c_m) << '\n'
     << "srp_mean = " << format_vector(t.srp_mean) << '\n'
     << "retx_probs = " << format_vector(t.retx_probs) << '\n';
  return os.str();
}

PolicyTable parse_policy_table(std::string_view text) {
  std::map<std::string, std::string, std::less<>> entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Config, "policy table line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (!entries.emplace(key, std::string(trim(line.substr(eq + 1)))).second)
      fail(ErrorKind::Config, "policy table: duplicate key '" + key + "'");
  }
  auto take = [&](std::string_view key) -> std::string {
    const auto it = entries.find(key);
    if (it == entries.end())
      fail(ErrorKind::Config, "policy table: missing key '" + std::string(key) + "'");
    std::string value = it->second;
    entries.erase(it);
    return value;
  };

  PolicyTable t;
  const double m = parse_double(take("M"), "M");
  if (m != std::floor(m) || m < 1 || m > 64)
    fail(ErrorKind::Config, "policy table: M must be an integer in [1, 64]");
  t.capability = static_cast<int>(m);
  t.failure_prob = parse_double(take("p_e"), "p_e");
  t.retx_mode = parse_retx_mode(take("retx_mode"));
  t.x_star = parse_double(take("x_star"), "x_star");
  t.s_star = parse_double(take("s_star"), "s_star");
  t.c_m = parse_double(take("c_m"), "c_m");
  t.srp_mean = parse_vector(take("srp_mean"), "srp_mean");
  t.retx_probs = parse_vector(take("retx_probs"), "retx_probs");
  if (!entries.empty())
    fail(ErrorKind::Config, "policy table: unknown key '" + entries.begin()->first + "'");
  validate(t);
  return t;
}

void save_policy_table(const PolicyTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << serialize(table);
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

PolicyTable load_policy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_policy_table(buffer.str());
}

}  // namespace sicra
