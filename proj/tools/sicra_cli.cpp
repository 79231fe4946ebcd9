// sicra command-line front end. Talks to the library through the C interface
// only.
#include <sicra/sicra.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

constexpr int kExitStatistical = 1;
constexpr int kExitRuntime = 3;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(sicra_status st, const char* what) {
  if (st != SICRA_OK) {
    throw Failure(std::string(what) + ": " + sicra_status_name(st) + ": " + sicra_last_error());
  }
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using PolicyPtr = std::unique_ptr<sicra_policy, Deleter<sicra_policy, sicra_policy_free>>;
using ResultPtr =
    std::unique_ptr<sicra_sim_result, Deleter<sicra_sim_result, sicra_sim_result_free>>;
using SweepPtr = std::unique_ptr<sicra_sweep, Deleter<sicra_sweep, sicra_sweep_free>>;
using TracePtr = std::unique_ptr<sicra_trace, Deleter<sicra_trace, sicra_trace_free>>;

struct Options {
  std::vector<int> M;
  double pe = 0.0;
  std::vector<double> lambda;
  std::string arrivals = "poisson";
  std::uint64_t period = 100;
  std::uint64_t horizon = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
  double theta = 0.99;
  std::string controller = "adaptive";
  std::string retx = "optimized";
  int episodes = 100;
  std::string out;
  unsigned jobs = 0;
  // subcommand specific
  std::uint64_t trials = 1'000'000;
  std::string trace_out;
  std::string backlog_out;
  std::string events_out;
  bool step_schedule = true;
};

sicra_retx_mode retx_mode(const Options& o) {
  return o.retx == "half" ? SICRA_RETX_HALF : SICRA_RETX_OPTIMIZED;
}

int single_m(const Options& o, int fallback) {
  if (o.M.empty()) return fallback;
  if (o.M.size() != 1) throw CLI::ValidationError("--M", "expects a single value here");
  return o.M.front();
}

double single_lambda(const Options& o) {
  if (o.lambda.empty()) return 0.4;
  if (o.lambda.size() != 1) throw CLI::ValidationError("--lambda", "expects a single value here");
  return o.lambda.front();
}

sicra_sim_config make_config(const Options& o) {
  sicra_sim_config c;
  sicra_sim_config_default(&c);
  c.M = single_m(o, 2);
  c.p_e = o.pe;
  c.lambda = single_lambda(o);
  c.arrivals = o.arrivals == "onoff" ? SICRA_ARRIVALS_ONOFF : SICRA_ARRIVALS_POISSON;
  c.period = o.period;
  c.horizon = o.horizon;
  c.warmup = o.warmup;
  c.seed = o.seed;
  c.controller = o.controller == "genie" ? SICRA_CONTROLLER_GENIE : SICRA_CONTROLLER_ADAPTIVE;
  c.theta = o.theta;
  c.retx_mode = retx_mode(o);
  return c;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

void print_summary(double lambda, const sicra_sim_summary& s) {
  std::cout << "lambda=" << fmt(lambda) << " throughput=" << fmt(s.throughput)
            << " mean_delay=" << fmt(s.mean_delay, 3) << " mean_backlog=" << fmt(s.mean_backlog, 2)
            << " idle=" << fmt(s.idle_rate) << " success=" << fmt(s.success_rate)
            << " collision=" << fmt(s.collision_rate) << " srp=" << fmt(s.srp_fraction)
            << " arrivals=" << s.total_arrivals << " decoded=" << s.total_decoded
            << " backlog=" << s.final_backlog << '\n';
}

// ------------------------------------------------------------------ commands

int cmd_tables(const Options& o) {
  std::vector<int> ms = o.M.empty() ? std::vector<int>{1, 2, 3, 4, 5, 10} : o.M;
  std::vector<PolicyPtr> tables;
  for (int m : ms) {
    sicra_policy* p = nullptr;
    check(sicra_policy_build(m, o.pe, retx_mode(o), &p), "policy");
    tables.emplace_back(p);
  }

  std::cout << "p_e = " << o.pe << ", retransmission = " << o.retx << "\n\n";
  std::cout << std::setw(4) << "M" << std::setw(10) << "x*" << std::setw(10) << "S*"
            << std::setw(10) << "C_M" << '\n';
  for (const auto& t : tables) {
    sicra_policy_info info;
    check(sicra_policy_get_info(t.get(), &info), "policy");
    std::cout << std::setw(4) << info.M << std::setw(10) << fmt(info.x_star)
              << std::setw(10) << fmt(info.s_star) << std::setw(10) << fmt(info.c_m) << '\n';
  }

  // per group size, taken from the largest table (the recursion is shared)
  const sicra_policy* largest = nullptr;
  int max_m = 1;
  for (const auto& t : tables) {
    sicra_policy_info info;
    check(sicra_policy_get_info(t.get(), &info), "policy");
    if (info.M >= max_m) {
      max_m = info.M;
      largest = t.get();
    }
  }
  if (max_m >= 2) {
    std::cout << '\n' << std::setw(4) << "m" << std::setw(10) << "E[X_m]" << std::setw(10)
              << "p*_m" << '\n';
    for (int k = 2; k <= max_m; ++k) {
      double mean = 0, prob = 0;
      check(sicra_policy_srp_mean(largest, k, &mean), "policy");
      check(sicra_policy_retx_prob(largest, k, &prob), "policy");
      std::cout << std::setw(4) << k << std::setw(10) << fmt(mean) << std::setw(10)
                << fmt(prob) << '\n';
    }
  }

  if (!o.out.empty()) {
    std::ofstream os(o.out);
    if (!os) throw Failure("cannot open " + o.out);
    os << "M,p_e,x_star,s_star,c_m,srp_mean,retx_probs\n" << std::setprecision(10);
    for (const auto& t : tables) {
      sicra_policy_info info;
      check(sicra_policy_get_info(t.get(), &info), "policy");
      os << info.M << ',' << info.p_e << ',' << info.x_star << ',' << info.s_star << ','
         << info.c_m << ',';
      for (int k = 2; k <= info.M; ++k) {
        double v = 0;
        check(sicra_policy_srp_mean(t.get(), k, &v), "policy");
        os << (k > 2 ? ";" : "") << v;
      }
      os << ',';
      for (int k = 2; k <= info.M; ++k) {
        double v = 0;
        check(sicra_policy_retx_prob(t.get(), k, &v), "policy");
        os << (k > 2 ? ";" : "") << v;
      }
      os << '\n';
    }
    if (!os) throw Failure("write failed: " + o.out);
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  sicra_sim_config c = make_config(o);
  c.record_backlog = !o.backlog_out.empty();
  c.record_events = !o.events_out.empty();
  sicra_sim_result* raw = nullptr;
  check(sicra_simulate(&c, &raw), "simulate");
  ResultPtr res(raw);
  sicra_sim_summary s;
  check(sicra_sim_get_summary(res.get(), &s), "simulate");
  print_summary(c.lambda, s);

  if (!o.out.empty()) check(sicra_sim_write_summary_csv(res.get(), o.out.c_str()), "write");
  if (!o.backlog_out.empty())
    check(sicra_sim_write_backlog_csv(res.get(), o.backlog_out.c_str()), "write");
  if (!o.events_out.empty())
    check(sicra_sim_write_events_csv(res.get(), o.events_out.c_str()), "write");
  return 0;
}

int cmd_sweep(const Options& o) {
  Options base = o;
  base.lambda.clear();
  sicra_sim_config c = make_config(base);
  std::vector<double> grid = o.lambda;
  if (grid.empty()) {
    for (int i = 1; i <= 14; ++i) grid.push_back(0.05 * i);
  }
  sicra_sweep* raw = nullptr;
  check(sicra_sweep_run(&c, grid.data(), grid.size(), o.jobs, &raw), "sweep");
  SweepPtr sweep(raw);
  for (std::size_t i = 0; i < sicra_sweep_size(sweep.get()); ++i) {
    double lambda = 0;
    sicra_sim_summary s;
    check(sicra_sweep_point(sweep.get(), i, &lambda, &s), "sweep");
    print_summary(lambda, s);
  }
  if (!o.out.empty()) check(sicra_sweep_write_csv(sweep.get(), o.out.c_str()), "write");
  return 0;
}

int cmd_trace(const Options& o, bool horizon_set) {
  sicra_sim_config c = make_config(o);
  std::vector<sicra_rate_step> steps;
  if (o.step_schedule) {
    steps.resize(sicra_load_step_schedule(nullptr, 0));
    sicra_load_step_schedule(steps.data(), steps.size());
    c.schedule = steps.data();
    c.schedule_len = steps.size();
    if (!horizon_set) c.horizon = 100'000;
  }
  sicra_trace* raw = nullptr;
  check(sicra_trace_run(&c, o.episodes, o.jobs, &raw), "trace");
  TracePtr trace(raw);
  double err = 0;
  check(sicra_trace_tracking_error(trace.get(), &err), "trace");
  std::cout << "episodes=" << o.episodes << " slots=" << sicra_trace_size(trace.get())
            << " mean_abs_error=" << fmt(err, 3) << '\n';
  if (!o.out.empty()) check(sicra_trace_write_csv(trace.get(), o.out.c_str()), "write");
  return 0;
}

int cmd_validate_srp(const Options& o) {
  int m = single_m(o, 3);
  sicra_srp_report r;
  check(sicra_srp_validate(m, o.pe, retx_mode(o), o.trials, o.seed, &r), "validate-srp");
  std::cout << "m=" << r.m << " p_e=" << r.p_e << " trials=" << r.trials
            << " analytic=" << fmt(r.analytic_mean) << " empirical=" << fmt(r.empirical_mean)
            << " std_error=" << (std::isnan(r.std_error) ? "nan" : fmt(r.std_error, 5))
            << " z=" << (std::isnan(r.z_score) ? "nan" : fmt(r.z_score, 3)) << ' '
            << (r.passed ? "PASS" : "FAIL") << '\n';
  if (!o.trace_out.empty())
    check(sicra_srp_write_trace(m, o.pe, retx_mode(o), o.seed, o.trace_out.c_str()), "write");
  return r.passed ? 0 : kExitStatistical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random access with successive interference cancellation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sicra_version()));
  app.get_version_ptr()->configurable(false);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Flat key = value file; inline flags take precedence");
  auto* print_config =
      app.add_flag("--print-config", "Print the resolved configuration")->configurable(false);

  Options o;
  app.add_option("--M", o.M, "SIC capability (comma list for `tables`)")
      ->delimiter(',')
      ->check(CLI::Range(1, 64));
  app.add_option("--pe", o.pe, "SIC failure probability")->check(CLI::Range(0.0, 0.999999));
  app.add_option("--lambda", o.lambda, "Arrival rate (comma list for `sweep`)")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  app.add_option("--arrivals", o.arrivals)->check(CLI::IsMember({"poisson", "onoff"}));
  app.add_option("--period", o.period, "On-off phase length in slots")->check(CLI::PositiveNumber);
  auto* horizon = app.add_option("--horizon", o.horizon)->check(CLI::PositiveNumber);
  app.add_option("--warmup", o.warmup);
  app.add_option("--seed", o.seed);
  app.add_option("--theta", o.theta, "Estimator discount")->check(CLI::Range(0.0, 1.0));
  app.add_option("--controller", o.controller)->check(CLI::IsMember({"adaptive", "genie"}));
  app.add_option("--retx", o.retx, "Retransmission probabilities")
      ->check(CLI::IsMember({"optimized", "half"}));
  app.add_option("--episodes", o.episodes)->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "CSV output path");
  app.add_option("--jobs", o.jobs, "Worker threads (0 = hardware)");

  auto* tables = app.add_subcommand("tables", "Optimal parameters per capability");
  auto* simulate = app.add_subcommand("simulate", "Single simulation run");
  simulate->add_option("--backlog-out", o.backlog_out, "Per-slot backlog CSV");
  simulate->add_option("--events-out", o.events_out, "Per-update estimator CSV");
  auto* sweep = app.add_subcommand("sweep", "Simulation runs over a lambda grid");
  auto* trace = app.add_subcommand("trace", "Backlog-tracking experiment");
  bool constant_rate = false;
  trace->add_flag("--constant-rate", constant_rate, "Use --lambda instead of the load-step schedule");
  auto* validate = app.add_subcommand("validate-srp", "Monte-Carlo check of E[X_m]");
  validate->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  validate->add_option("--trace-out", o.trace_out, "Walkthrough CSV of one procedure");
  for (auto* sub : {tables, simulate, sweep, trace, validate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  o.step_schedule = !constant_rate;
  if (*print_config) std::cout << app.config_to_str(true, false);

  try {
    if (*tables) return cmd_tables(o);
    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*trace) return cmd_trace(o, horizon->count() > 0);
    if (*validate) return cmd_validate_srp(o);
  } catch (const CLI::ValidationError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
