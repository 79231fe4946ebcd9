/*
 * sicra: slotted random access with a SIC-capable access point.
 *
 * C interface over the analysis, estimator, resolver and simulator. Objects
 * are opaque handles created by *_build / *_create / *_run functions and
 * released by the matching *_free (which accepts NULL). Every fallible call
 * returns a sicra_status; on failure sicra_last_error() holds a message for
 * the calling thread and output arguments are left untouched.
 *
 * Vector arguments follow one convention: element [k - 2] belongs to group
 * size k, for k = 2..M.
 */
#ifndef SICRA_SICRA_H
#define SICRA_SICRA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SICRA_BUILDING_LIBRARY)
#    define SICRA_API __declspec(dllexport)
#  else
#    define SICRA_API __declspec(dllimport)
#  endif
#else
#  define SICRA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sicra_status {
  SICRA_OK = 0,
  SICRA_ERR_DOMAIN = 1,   /* argument outside its mathematical domain */
  SICRA_ERR_CONFIG = 2,   /* inconsistent configuration or malformed input */
  SICRA_ERR_PROTOCOL = 3, /* feedback impossible under the access protocol */
  SICRA_ERR_NUMERIC = 4,  /* optimizer could not bracket or converge */
  SICRA_ERR_IO = 5,       /* file could not be read or written */
  SICRA_ERR_NULL_ARG = 6,
  SICRA_ERR_INTERNAL = 7
} sicra_status;

SICRA_API const char* sicra_version(void);
SICRA_API const char* sicra_status_name(sicra_status status);
/* Message for the last failed call on this thread, "" if none. */
SICRA_API const char* sicra_last_error(void);

/* ---------------------------------------------------------------- analysis */

SICRA_API sicra_status sicra_binom_pmf(uint64_t n, uint64_t k, double p, double* out);
SICRA_API sicra_status sicra_poisson_pmf(uint64_t k, double mu, double* out);
SICRA_API sicra_status sicra_service_rate_known_n(uint64_t n, int M, double p,
                                                  const double* srp_mean, size_t len,
                                                  double* out);
SICRA_API sicra_status sicra_service_rate_poisson(double x, int M, const double* srp_mean,
                                                  size_t len, double* out);
SICRA_API sicra_status sicra_optimize_x(int M, const double* srp_mean, size_t len,
                                        double* x_star, double* s_star);
SICRA_API sicra_status sicra_collision_offset(double x_star, int M, double* out);
SICRA_API sicra_status sicra_expected_delta(int m, double p, double* out);
SICRA_API sicra_status sicra_split_pmf(int m, int l, double p, double* out);
/* E[X'_m] and E[X^(e)_m]; either output may be NULL. */
SICRA_API sicra_status sicra_expected_srp_duration(int m, const double* probs, size_t len,
                                                   double p_e, double* clean_root,
                                                   double* with_failure);
SICRA_API sicra_status sicra_optimal_p_known_n(uint64_t n, int M, const double* srp_mean,
                                               size_t len, double* out);

/* ------------------------------------------------------------ policy table */

typedef struct sicra_policy sicra_policy;

typedef enum sicra_retx_mode {
  SICRA_RETX_OPTIMIZED = 0,
  SICRA_RETX_HALF = 1
} sicra_retx_mode;

typedef struct sicra_policy_info {
  int M;
  double p_e;
  sicra_retx_mode retx_mode;
  double x_star;
  double s_star;
  double c_m;
} sicra_policy_info;

SICRA_API sicra_status sicra_policy_build(int M, double p_e, sicra_retx_mode mode,
                                          sicra_policy** out);
SICRA_API sicra_status sicra_policy_parse(const char* text, sicra_policy** out);
SICRA_API sicra_status sicra_policy_load(const char* path, sicra_policy** out);
SICRA_API sicra_status sicra_policy_save(const sicra_policy* policy, const char* path);
/* Copies the key-value text (NUL terminated) into buf when cap suffices.
 * *needed always receives the size including the NUL; buf may be NULL. */
SICRA_API sicra_status sicra_policy_serialize(const sicra_policy* policy, char* buf,
                                              size_t cap, size_t* needed);
SICRA_API sicra_status sicra_policy_get_info(const sicra_policy* policy,
                                             sicra_policy_info* out);
SICRA_API sicra_status sicra_policy_srp_mean(const sicra_policy* policy, int k, double* out);
SICRA_API sicra_status sicra_policy_retx_prob(const sicra_policy* policy, int k, double* out);
SICRA_API void sicra_policy_free(sicra_policy* policy);

/* --------------------------------------------------------------- estimator */

typedef struct sicra_estimator sicra_estimator;

typedef enum sicra_event_kind {
  SICRA_EVENT_IDLE = 0,
  SICRA_EVENT_SUCCESS = 1,
  SICRA_EVENT_SRP_COMPLETE = 2,
  SICRA_EVENT_COLLISION = 3
} sicra_event_kind;

typedef struct sicra_estimator_state {
  double nu;
  double lambda_e;
  double p_star;
} sicra_estimator_state;

SICRA_API sicra_status sicra_estimator_create(const sicra_policy* policy, double theta,
                                              sicra_estimator** out);
/* group_size and duration are read only for SICRA_EVENT_SRP_COMPLETE. */
SICRA_API sicra_status sicra_estimator_on_event(sicra_estimator* est, sicra_event_kind kind,
                                                int group_size, uint64_t duration);
SICRA_API sicra_status sicra_estimator_get_state(const sicra_estimator* est,
                                                 sicra_estimator_state* out);
SICRA_API void sicra_estimator_free(sicra_estimator* est);

/* ---------------------------------------------------------------- resolver */

typedef struct sicra_srp_report {
  int m;
  double p_e;
  uint64_t trials;
  double analytic_mean;
  double empirical_mean;
  double std_error; /* NaN below two trials */
  double z_score;
  int passed;       /* |z| <= 3 */
} sicra_srp_report;

/* One resolve procedure over m users seeded from `seed`. decode_slots, if not
 * NULL, receives m slot offsets. */
SICRA_API sicra_status sicra_srp_run(int m, const double* probs, size_t len, double p_e,
                                     uint64_t seed, uint64_t* duration,
                                     uint64_t* decode_slots);
SICRA_API sicra_status sicra_srp_validate(int m, double p_e, sicra_retx_mode mode,
                                          uint64_t trials, uint64_t seed,
                                          sicra_srp_report* out);
/* Per-slot walkthrough CSV: slot_offset,transmitters,decoded,repairs */
SICRA_API sicra_status sicra_srp_write_trace(int m, double p_e, sicra_retx_mode mode,
                                             uint64_t seed, const char* path);

/* --------------------------------------------------------------- simulator */

typedef enum sicra_arrival_model {
  SICRA_ARRIVALS_POISSON = 0,
  SICRA_ARRIVALS_ONOFF = 1
} sicra_arrival_model;

typedef enum sicra_controller {
  SICRA_CONTROLLER_ADAPTIVE = 0,
  SICRA_CONTROLLER_GENIE = 1
} sicra_controller;

typedef struct sicra_rate_step {
  uint64_t start; /* 1-based slot from which `lambda` applies */
  double lambda;
} sicra_rate_step;

typedef struct sicra_sim_config {
  int M;
  double p_e;
  double lambda;
  sicra_arrival_model arrivals;
  uint64_t period;
  uint64_t horizon;
  uint64_t warmup;
  uint64_t seed;
  sicra_controller controller;
  double theta;
  sicra_retx_mode retx_mode;
  const sicra_rate_step* schedule; /* optional, overrides lambda */
  size_t schedule_len;
  int record_backlog;
  int record_events;
} sicra_sim_config;

typedef struct sicra_sim_summary {
  double throughput;
  double mean_delay;
  double mean_backlog;
  double idle_rate;
  double success_rate;
  double collision_rate;
  double srp_fraction;
  uint64_t measured_slots;
  uint64_t decoded_in_window;
  uint64_t total_arrivals;
  uint64_t total_decoded;
  uint64_t final_backlog;
  uint64_t embedded_points;
  uint64_t estimator_updates;
  uint64_t srp_count;
} sicra_sim_summary;

/* M=2, p_e=0, lambda=0.4, Poisson, period 100, horizon 1e6, warmup 1e4,
 * seed 1, adaptive, theta 0.99, optimized retransmission, no recording. */
SICRA_API void sicra_sim_config_default(sicra_sim_config* out);
/* The 0.4 -> 0.5 -> 0.4 load-step schedule over 1e5 slots. */
SICRA_API size_t sicra_load_step_schedule(sicra_rate_step* out, size_t cap);

typedef struct sicra_sim_result sicra_sim_result;

SICRA_API sicra_status sicra_simulate(const sicra_sim_config* config, sicra_sim_result** out);
SICRA_API sicra_status sicra_sim_get_summary(const sicra_sim_result* result,
                                             sicra_sim_summary* out);
/* Copies up to cap bucket counts; *len receives the bucket count. */
SICRA_API sicra_status sicra_sim_delay_histogram(const sicra_sim_result* result,
                                                 uint64_t* counts, size_t cap, size_t* len);
/* slot,true_backlog,estimated_nu (needs record_backlog) */
SICRA_API sicra_status sicra_sim_write_backlog_csv(const sicra_sim_result* result,
                                                   const char* path);
/* One row in the sweep layout; lambda is the configured base rate. */
SICRA_API sicra_status sicra_sim_write_summary_csv(const sicra_sim_result* result,
                                                   const char* path);
/* slot,event,nu,lambda_e,p_star (needs record_events) */
SICRA_API sicra_status sicra_sim_write_events_csv(const sicra_sim_result* result,
                                                  const char* path);
SICRA_API void sicra_sim_result_free(sicra_sim_result* result);

typedef struct sicra_sweep sicra_sweep;

SICRA_API sicra_status sicra_sweep_run(const sicra_sim_config* base, const double* lambdas,
                                       size_t count, unsigned jobs, sicra_sweep** out);
SICRA_API size_t sicra_sweep_size(const sicra_sweep* sweep);
SICRA_API sicra_status sicra_sweep_point(const sicra_sweep* sweep, size_t index,
                                         double* lambda, sicra_sim_summary* out);
/* lambda,throughput,mean_delay,collision_rate,idle_rate,srp_fraction */
SICRA_API sicra_status sicra_sweep_write_csv(const sicra_sweep* sweep, const char* path);
SICRA_API void sicra_sweep_free(sicra_sweep* sweep);

typedef struct sicra_trace sicra_trace;

SICRA_API sicra_status sicra_trace_run(const sicra_sim_config* config, int episodes,
                                       unsigned jobs, sicra_trace** out);
SICRA_API size_t sicra_trace_size(const sicra_trace* trace);
SICRA_API sicra_status sicra_trace_point(const sicra_trace* trace, size_t index,
                                         uint64_t* slot, double* true_backlog,
                                         double* estimated_nu);
/* Time average of |nu - n| over the episode-averaged trace. */
SICRA_API sicra_status sicra_trace_tracking_error(const sicra_trace* trace, double* out);
/* slot,true_backlog,estimated_nu */
SICRA_API sicra_status sicra_trace_write_csv(const sicra_trace* trace, const char* path);
SICRA_API void sicra_trace_free(sicra_trace* trace);

#ifdef __cplusplus
}
#endif

#endif /* SICRA_SICRA_H */
