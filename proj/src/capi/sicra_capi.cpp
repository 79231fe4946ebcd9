#include "sicra/sicra.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "sicra/analysis.hpp"
#include "sicra/csv.hpp"
#include "sicra/error.hpp"
#include "sicra/estimator.hpp"
#include "sicra/policy.hpp"
#include "sicra/random.hpp"
#include "sicra/resolver.hpp"
#include "sicra/simulator.hpp"
#include "sicra/validation.hpp"

struct sicra_policy {
  sicra::PolicyTable table;
};

struct sicra_estimator {
  sicra::Estimator estimator;
};

struct sicra_sim_result {
  sicra::SimMetrics metrics;
  double lambda = 0.0;
};

struct sicra_sweep {
  std::vector<sicra::SweepPoint> points;
};

struct sicra_trace {
  std::vector<sicra::TracePoint> points;
};

namespace {

thread_local std::string last_error;

sicra_status to_status(sicra::ErrorKind kind) {
  switch (kind) {
    case sicra::ErrorKind::Domain: return SICRA_ERR_DOMAIN;
    case sicra::ErrorKind::Config: return SICRA_ERR_CONFIG;
    case sicra::ErrorKind::Protocol: return SICRA_ERR_PROTOCOL;
    case sicra::ErrorKind::Numeric: return SICRA_ERR_NUMERIC;
    case sicra::ErrorKind::Io: return SICRA_ERR_IO;
  }
  return SICRA_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
sicra_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SICRA_OK;
  } catch (const sicra::Error& e) {
    last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SICRA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SICRA_ERR_INTERNAL;
  }
}

sicra_status null_arg(const char* name) {
  last_error = std::string("null argument: ") + name;
  return SICRA_ERR_NULL_ARG;
}

#define SICRA_REQUIRE(ptr) \
  do {                     \
    if (!(ptr)) return null_arg(#ptr); \
  } while (0)

std::span<const double> view(const double* data, std::size_t len) {
  if (!data && len > 0) sicra::fail(sicra::ErrorKind::Config, "null vector with nonzero length");
  return {data, len};
}

sicra::RetxMode to_mode(sicra_retx_mode mode) {
  switch (mode) {
    case SICRA_RETX_OPTIMIZED: return sicra::RetxMode::Optimized;
    case SICRA_RETX_HALF: return sicra::RetxMode::Half;
  }
  sicra::fail(sicra::ErrorKind::Config, "unknown retransmission mode");
}

sicra_retx_mode from_mode(sicra::RetxMode mode) {
  return mode == sicra::RetxMode::Half ? SICRA_RETX_HALF : SICRA_RETX_OPTIMIZED;
}

sicra::SimConfig to_config(const sicra_sim_config& c) {
  sicra::SimConfig out;
  out.capability = c.M;
  out.failure_prob = c.p_e;
  out.lambda = c.lambda;
  switch (c.arrivals) {
    case SICRA_ARRIVALS_POISSON: out.arrivals = sicra::ArrivalModel::Poisson; break;
    case SICRA_ARRIVALS_ONOFF: out.arrivals = sicra::ArrivalModel::OnOff; break;
    default: sicra::fail(sicra::ErrorKind::Config, "unknown arrival model");
  }
  out.period = c.period;
  out.horizon = c.horizon;
  out.warmup = c.warmup;
  out.seed = c.seed;
  switch (c.controller) {
    case SICRA_CONTROLLER_ADAPTIVE: out.controller = sicra::Controller::Adaptive; break;
    case SICRA_CONTROLLER_GENIE: out.controller = sicra::Controller::Genie; break;
    default: sicra::fail(sicra::ErrorKind::Config, "unknown controller");
  }
  out.theta = c.theta;
  out.retx_mode = to_mode(c.retx_mode);
  if (c.schedule_len > 0) {
    if (!c.schedule) sicra::fail(sicra::ErrorKind::Config, "null schedule with nonzero length");
    for (std::size_t i = 0; i < c.schedule_len; ++i)
      out.schedule.push_back({c.schedule[i].start, c.schedule[i].lambda});
  }
  out.record_backlog = c.record_backlog != 0;
  out.record_events = c.record_events != 0;
  return out;
}

sicra_sim_summary summarize(const sicra::SimMetrics& m) {
  sicra_sim_summary s{};
  s.throughput = m.throughput;
  s.mean_delay = m.mean_delay;
  s.mean_backlog = m.mean_backlog;
  s.idle_rate = m.idle_rate;
  s.success_rate = m.success_rate;
  s.collision_rate = m.collision_rate;
  s.srp_fraction = m.srp_fraction;
  s.measured_slots = m.measured_slots;
  s.decoded_in_window = m.decoded_in_window;
  s.total_arrivals = m.total_arrivals;
  s.total_decoded = m.total_decoded;
  s.final_backlog = m.final_backlog;
  s.embedded_points = m.embedded_points;
  s.estimator_updates = m.estimator_updates;
  s.srp_count = m.srp_count;
  return s;
}

}  // namespace

extern "C" {

const char* sicra_version(void) { return "1.0.0"; }

const char* sicra_status_name(sicra_status status) {
  switch (status) {
    case SICRA_OK: return "ok";
    case SICRA_ERR_DOMAIN: return "domain error";
    case SICRA_ERR_CONFIG: return "configuration error";
    case SICRA_ERR_PROTOCOL: return "protocol error";
    case SICRA_ERR_NUMERIC: return "numeric error";
    case SICRA_ERR_IO: return "i/o error";
    case SICRA_ERR_NULL_ARG: return "null argument";
    case SICRA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sicra_last_error(void) { return last_error.c_str(); }

// analysis

sicra_status sicra_binom_pmf(uint64_t n, uint64_t k, double p, double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] { *out = sicra::analysis::binom_pmf(n, k, p); });
}

sicra_status sicra_poisson_pmf(uint64_t k, double mu, double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] { *out = sicra::analysis::poisson_pmf(k, mu); });
}

sicra_status sicra_service_rate_known_n(uint64_t n, int M, double p, const double* srp_mean,
                                        size_t len, double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = sicra::analysis::service_rate_known_n(n, M, p, view(srp_mean, len));
  });
}

sicra_status sicra_service_rate_poisson(double x, int M, const double* srp_mean, size_t len,
                                        double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = sicra::analysis::service_rate_poisson(x, M, view(srp_mean, len));
  });
}

sicra_status sicra_optimize_x(int M, const double* srp_mean, size_t len, double* x_star,
                              double* s_star) {
  SICRA_REQUIRE(x_star);
  SICRA_REQUIRE(s_star);
  return guarded([&] {
    const auto r = sicra::analysis::optimize_x(M, view(srp_mean, len));
    *x_star = r.x_star;
    *s_star = r.s_star;
  });
}

sicra_status sicra_collision_offset(double x_star, int M, double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] { *out = sicra::analysis::collision_offset(x_star, M); });
}

sicra_status sicra_expected_delta(int m, double p, double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] { *out = sicra::analysis::expected_delta(m, p); });
}

sicra_status sicra_split_pmf(int m, int l, double p, double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] { *out = sicra::analysis::split_pmf(m, l, p); });
}

sicra_status sicra_expected_srp_duration(int m, const double* probs, size_t len, double p_e,
                                         double* clean_root, double* with_failure) {
  return guarded([&] {
    const auto d = sicra::analysis::expected_srp_duration_with_failure(m, view(probs, len), p_e);
    if (clean_root) *clean_root = d.clean_root;
    if (with_failure) *with_failure = d.with_failure;
  });
}

sicra_status sicra_optimal_p_known_n(uint64_t n, int M, const double* srp_mean, size_t len,
                                     double* out) {
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = sicra::analysis::optimal_p_known_n(n, M, view(srp_mean, len));
  });
}

// policy

sicra_status sicra_policy_build(int M, double p_e, sicra_retx_mode mode, sicra_policy** out) {
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = new sicra_policy{sicra::build_policy_table(M, p_e, to_mode(mode))};
  });
}

sicra_status sicra_policy_parse(const char* text, sicra_policy** out) {
  SICRA_REQUIRE(text);
  SICRA_REQUIRE(out);
  return guarded([&] { *out = new sicra_policy{sicra::parse_policy_table(text)}; });
}

sicra_status sicra_policy_load(const char* path, sicra_policy** out) {
  SICRA_REQUIRE(path);
  SICRA_REQUIRE(out);
  return guarded([&] { *out = new sicra_policy{sicra::load_policy_table(path)}; });
}

sicra_status sicra_policy_save(const sicra_policy* policy, const char* path) {
  SICRA_REQUIRE(policy);
  SICRA_REQUIRE(path);
  return guarded([&] { sicra::save_policy_table(policy->table, path); });
}

sicra_status sicra_policy_serialize(const sicra_policy* policy, char* buf, size_t cap,
                                    size_t* needed) {
  SICRA_REQUIRE(policy);
  SICRA_REQUIRE(needed);
  return guarded([&] {
    const std::string text = sicra::serialize(policy->table);
    *needed = text.size() + 1;
    if (buf && cap >= text.size() + 1) std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

sicra_status sicra_policy_get_info(const sicra_policy* policy, sicra_policy_info* out) {
  SICRA_REQUIRE(policy);
  SICRA_REQUIRE(out);
  const auto& t = policy->table;
  *out = {t.capability, t.failure_prob, from_mode(t.retx_mode), t.x_star, t.s_star, t.c_m};
  last_error.clear();
  return SICRA_OK;
}

sicra_status sicra_policy_srp_mean(const sicra_policy* policy, int k, double* out) {
  SICRA_REQUIRE(policy);
  SICRA_REQUIRE(out);
  return guarded([&] { *out = policy->table.srp_mean_for(k); });
}

sicra_status sicra_policy_retx_prob(const sicra_policy* policy, int k, double* out) {
  SICRA_REQUIRE(policy);
  SICRA_REQUIRE(out);
  return guarded([&] { *out = policy->table.retx_prob_for(k); });
}

void sicra_policy_free(sicra_policy* policy) { delete policy; }

// estimator

sicra_status sicra_estimator_create(const sicra_policy* policy, double theta,
                                    sicra_estimator** out) {
  SICRA_REQUIRE(policy);
  SICRA_REQUIRE(out);
  return guarded([&] { *out = new sicra_estimator{sicra::Estimator(policy->table, theta)}; });
}

sicra_status sicra_estimator_on_event(sicra_estimator* est, sicra_event_kind kind,
                                      int group_size, uint64_t duration) {
  SICRA_REQUIRE(est);
  return guarded([&] {
    switch (kind) {
      case SICRA_EVENT_IDLE: est->estimator.on_event(sicra::feedback::Idle{}); break;
      case SICRA_EVENT_SUCCESS: est->estimator.on_event(sicra::feedback::Success{}); break;
      case SICRA_EVENT_SRP_COMPLETE:
        est->estimator.on_event(sicra::feedback::SrpComplete{group_size, duration});
        break;
      case SICRA_EVENT_COLLISION: est->estimator.on_event(sicra::feedback::Collision{}); break;
      default: sicra::fail(sicra::ErrorKind::Protocol, "unknown feedback event");
    }
  });
}

sicra_status sicra_estimator_get_state(const sicra_estimator* est, sicra_estimator_state* out) {
  SICRA_REQUIRE(est);
  SICRA_REQUIRE(out);
  const auto& s = est->estimator.state();
  *out = {s.nu, s.lambda_e, s.p_star};
  last_error.clear();
  return SICRA_OK;
}

void sicra_estimator_free(sicra_estimator* est) { delete est; }

// resolver

sicra_status sicra_srp_run(int m, const double* probs, size_t len, double p_e, uint64_t seed,
                           uint64_t* duration, uint64_t* decode_slots) {
  SICRA_REQUIRE(duration);
  return guarded([&] {
    sicra::Rng rng = sicra::make_stream(seed, "srp");
    const auto outcome = sicra::run_srp(m, view(probs, len), p_e, rng);
    *duration = outcome.duration;
    if (decode_slots) std::copy(outcome.decode_slot.begin(), outcome.decode_slot.end(), decode_slots);
  });
}

sicra_status sicra_srp_validate(int m, double p_e, sicra_retx_mode mode, uint64_t trials,
                                uint64_t seed, sicra_srp_report* out) {
  SICRA_REQUIRE(out);
  return guarded([&] {
    const auto v = sicra::validate_srp(m, p_e, to_mode(mode), trials, seed);
    *out = {v.group_size, v.failure_prob, v.trials, v.analytic_mean, v.empirical_mean,
            v.std_error, v.z_score, v.passed ? 1 : 0};
  });
}

sicra_status sicra_srp_write_trace(int m, double p_e, sicra_retx_mode mode, uint64_t seed,
                                   const char* path) {
  SICRA_REQUIRE(path);
  return guarded([&] {
    const auto policy = sicra::build_policy_table(m, p_e, to_mode(mode));
    sicra::Rng rng = sicra::make_stream(seed, "srp");
    const auto outcome = sicra::run_srp(m, policy.retx_probs, p_e, rng, true);
    sicra::csv::write_file(path, [&](std::ostream& os) { sicra::csv::write_srp_trace(os, outcome.trace); });
  });
}

// simulator

void sicra_sim_config_default(sicra_sim_config* out) {
  if (!out) return;
  const sicra::SimConfig d;
  *out = sicra_sim_config{};
  out->M = d.capability;
  out->p_e = d.failure_prob;
  out->lambda = d.lambda;
  out->arrivals = SICRA_ARRIVALS_POISSON;
  out->period = d.period;
  out->horizon = d.horizon;
  out->warmup = d.warmup;
  out->seed = d.seed;
  out->controller = SICRA_CONTROLLER_ADAPTIVE;
  out->theta = d.theta;
  out->retx_mode = SICRA_RETX_OPTIMIZED;
  out->schedule = nullptr;
  out->schedule_len = 0;
  out->record_backlog = 0;
  out->record_events = 0;
}

size_t sicra_load_step_schedule(sicra_rate_step* out, size_t cap) {
  const auto steps = sicra::load_step_schedule();
  if (out) {
    for (std::size_t i = 0; i < std::min(cap, steps.size()); ++i)
      out[i] = {steps[i].start, steps[i].lambda};
  }
  return steps.size();
}

sicra_status sicra_simulate(const sicra_sim_config* config, sicra_sim_result** out) {
  SICRA_REQUIRE(config);
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = new sicra_sim_result{sicra::run(to_config(*config)), config->lambda};
  });
}

sicra_status sicra_sim_get_summary(const sicra_sim_result* result, sicra_sim_summary* out) {
  SICRA_REQUIRE(result);
  SICRA_REQUIRE(out);
  *out = summarize(result->metrics);
  last_error.clear();
  return SICRA_OK;
}

sicra_status sicra_sim_delay_histogram(const sicra_sim_result* result, uint64_t* counts,
                                       size_t cap, size_t* len) {
  SICRA_REQUIRE(result);
  SICRA_REQUIRE(len);
  const auto& h = result->metrics.delay_histogram;
  *len = h.size();
  if (counts) std::copy_n(h.begin(), std::min(cap, h.size()), counts);
  last_error.clear();
  return SICRA_OK;
}

sicra_status sicra_sim_write_backlog_csv(const sicra_sim_result* result, const char* path) {
  SICRA_REQUIRE(result);
  SICRA_REQUIRE(path);
  return guarded([&] {
    sicra::csv::write_file(path, [&](std::ostream& os) {
      sicra::csv::write_backlog(os, result->metrics.backlog_trace);
    });
  });
}

sicra_status sicra_sim_write_summary_csv(const sicra_sim_result* result, const char* path) {
  SICRA_REQUIRE(result);
  SICRA_REQUIRE(path);
  return guarded([&] {
    const sicra::SweepPoint point{result->lambda, result->metrics};
    sicra::csv::write_file(path, [&](std::ostream& os) {
      sicra::csv::write_sweep(os, std::span(&point, 1));
    });
  });
}

sicra_status sicra_sim_write_events_csv(const sicra_sim_result* result, const char* path) {
  SICRA_REQUIRE(result);
  SICRA_REQUIRE(path);
  return guarded([&] {
    sicra::csv::write_file(path, [&](std::ostream& os) {
      sicra::csv::write_events(os, result->metrics.events);
    });
  });
}

void sicra_sim_result_free(sicra_sim_result* result) { delete result; }

sicra_status sicra_sweep_run(const sicra_sim_config* base, const double* lambdas, size_t count,
                             unsigned jobs, sicra_sweep** out) {
  SICRA_REQUIRE(base);
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = new sicra_sweep{sicra::sweep(to_config(*base), view(lambdas, count), jobs)};
  });
}

size_t sicra_sweep_size(const sicra_sweep* sweep) { return sweep ? sweep->points.size() : 0; }

sicra_status sicra_sweep_point(const sicra_sweep* sweep, size_t index, double* lambda,
                               sicra_sim_summary* out) {
  SICRA_REQUIRE(sweep);
  return guarded([&] {
    if (index >= sweep->points.size())
      sicra::fail(sicra::ErrorKind::Domain, "sweep index out of range");
    const auto& p = sweep->points[index];
    if (lambda) *lambda = p.lambda;
    if (out) *out = summarize(p.metrics);
  });
}

sicra_status sicra_sweep_write_csv(const sicra_sweep* sweep, const char* path) {
  SICRA_REQUIRE(sweep);
  SICRA_REQUIRE(path);
  return guarded([&] {
    sicra::csv::write_file(path, [&](std::ostream& os) { sicra::csv::write_sweep(os, sweep->points); });
  });
}

void sicra_sweep_free(sicra_sweep* sweep) { delete sweep; }

sicra_status sicra_trace_run(const sicra_sim_config* config, int episodes, unsigned jobs,
                             sicra_trace** out) {
  SICRA_REQUIRE(config);
  SICRA_REQUIRE(out);
  return guarded([&] {
    *out = new sicra_trace{sicra::run_trace_experiment(to_config(*config), episodes, jobs)};
  });
}

size_t sicra_trace_size(const sicra_trace* trace) { return trace ? trace->points.size() : 0; }

sicra_status sicra_trace_point(const sicra_trace* trace, size_t index, uint64_t* slot,
                               double* true_backlog, double* estimated_nu) {
  SICRA_REQUIRE(trace);
  return guarded([&] {
    if (index >= trace->points.size())
      sicra::fail(sicra::ErrorKind::Domain, "trace index out of range");
    const auto& p = trace->points[index];
    if (slot) *slot = p.slot;
    if (true_backlog) *true_backlog = p.true_backlog;
    if (estimated_nu) *estimated_nu = p.estimated_nu;
  });
}

sicra_status sicra_trace_tracking_error(const sicra_trace* trace, double* out) {
  SICRA_REQUIRE(trace);
  SICRA_REQUIRE(out);
  *out = sicra::mean_tracking_error(trace->points);
  last_error.clear();
  return SICRA_OK;
}

sicra_status sicra_trace_write_csv(const sicra_trace* trace, const char* path) {
  SICRA_REQUIRE(trace);
  SICRA_REQUIRE(path);
  return guarded([&] {
    sicra::csv::write_file(path, [&](std::ostream& os) { sicra::csv::write_trace(os, trace->points); });
  });
}

void sicra_trace_free(sicra_trace* trace) { delete trace; }

}  // extern "C"
