#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sicra/policy.hpp"
#include "sicra/random.hpp"

namespace sicra {

enum class ArrivalModel { Poisson, OnOff };
enum class Controller { Adaptive, Genie };

std::string_view to_string(ArrivalModel m) noexcept;
std::string_view to_string(Controller c) noexcept;
ArrivalModel parse_arrival_model(std::string_view text);
Controller parse_controller(std::string_view text);

/// From slot `start` (1-based) on, the mean arrival rate is `lambda`.
struct RateStep {
  std::uint64_t start = 1;
  double lambda = 0.0;
};

struct SimConfig {
  int capability = 2;
  double failure_prob = 0.0;
  double lambda = 0.4;
  ArrivalModel arrivals = ArrivalModel::Poisson;
  std::uint64_t period = 100;  // on-off phase length, slots
  std::uint64_t horizon = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
  Controller controller = Controller::Adaptive;
  double theta = 0.99;
  RetxMode retx_mode = RetxMode::Optimized;
  std::vector<RateStep> schedule;  // empty: constant `lambda`
  bool record_backlog = false;
  bool record_events = false;

  double lambda_at(std::uint64_t slot) const;
};

void validate(const SimConfig& config);

/// Arrival stream. Poisson draws Poisson(lambda) per slot; OnOff redraws its
/// phase at every slot index (0-based) divisible by `period`, on and off with
/// equal probability, and draws Poisson(2 lambda) while on.
class ArrivalProcess {
 public:
  ArrivalProcess(ArrivalModel model, std::uint64_t period, Rng rng);

  std::uint64_t next(std::uint64_t slot_index, double lambda);
  bool on() const noexcept { return on_; }

 private:
  ArrivalModel model_;
  std::uint64_t period_;
  Rng rng_;
  bool on_ = true;
};

struct BacklogSample {
  std::uint64_t slot = 0;
  std::uint64_t true_backlog = 0;  // waiting plus undecoded inside a resolve procedure
  double estimated_nu = 0.0;       // NaN under the genie controller
};

struct EventRecord {
  std::uint64_t slot = 0;
  std::string_view event;
  double nu = 0.0;
  double lambda_e = 0.0;
  double p_star = 0.0;
};

inline constexpr std::size_t kDelayBuckets = 1024;  // last bucket collects >= 1023

struct SimMetrics {
  double throughput = 0.0;     // decodes per slot over the measured window
  double mean_delay = 0.0;     // slots from arrival to decode
  double mean_backlog = 0.0;   // time-averaged true backlog over the window
  double idle_rate = 0.0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double srp_fraction = 0.0;   // initiating plus interior resolve slots

  std::uint64_t measured_slots = 0;
  std::uint64_t decoded_in_window = 0;
  std::uint64_t total_arrivals = 0;
  std::uint64_t total_decoded = 0;
  std::uint64_t final_backlog = 0;
  std::uint64_t embedded_points = 0;
  std::uint64_t estimator_updates = 0;
  std::uint64_t srp_count = 0;

  std::vector<std::uint64_t> delay_histogram;  // kDelayBuckets entries
  std::vector<BacklogSample> backlog_trace;
  std::vector<EventRecord> events;
};

SimMetrics run(const SimConfig& config);
SimMetrics run(const SimConfig& config, const PolicyTable& policy);

struct SweepPoint {
  double lambda = 0.0;
  SimMetrics metrics;
};

/// One run per lambda, point i seeded with derive_seed(seed, "sweep", i).
/// Runs on up to `jobs` threads; results come back in input order.
std::vector<SweepPoint> sweep(const SimConfig& base, std::span<const double> lambdas,
                              unsigned jobs = 1);

struct TracePoint {
  std::uint64_t slot = 0;
  double true_backlog = 0.0;
  double estimated_nu = 0.0;
};

/// The load-step schedule used for estimator tracking: 0.4 on [1, 3e4],
/// 0.5 on [3e4+1, 7e4], 0.4 afterwards, over 1e5 slots.
std::vector<RateStep> load_step_schedule();

/// Episode-averaged per-slot (true backlog, nu). Episode e is seeded with
/// derive_seed(seed, "episode", e); averaging order is fixed so the result
/// does not depend on `jobs`.
std::vector<TracePoint> run_trace_experiment(const SimConfig& config, int episodes,
                                             unsigned jobs = 1);

/// Time average of |nu - n| over a trace.
double mean_tracking_error(std::span<const TracePoint> trace);

}  // namespace sicra
