#include "sicra/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <unordered_map>

#include "sicra/analysis.hpp"
#include "sicra/error.hpp"
#include "sicra/estimator.hpp"
#include "sicra/resolver.hpp"

namespace sicra {

std::string_view to_string(ArrivalModel m) noexcept {
  return m == ArrivalModel::OnOff ? "onoff" : "poisson";
}

std::string_view to_string(Controller c) noexcept {
  return c == Controller::Genie ? "genie" : "adaptive";
}

ArrivalModel parse_arrival_model(std::string_view text) {
  if (text == "poisson") return ArrivalModel::Poisson;
  if (text == "onoff" || text == "on_off") return ArrivalModel::OnOff;
  fail(ErrorKind::Config, "unknown arrival model '" + std::string(text) + "'");
}

Controller parse_controller(std::string_view text) {
  if (text == "adaptive") return Controller::Adaptive;
  if (text == "genie") return Controller::Genie;
  fail(ErrorKind::Config, "unknown controller '" + std::string(text) + "'");
}

double SimConfig::lambda_at(std::uint64_t slot) const {
  double rate = lambda;
  for (const auto& step : schedule) {
    if (slot >= step.start) rate = step.lambda;
  }
  return rate;
}

void validate(const SimConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "simulation config: " + what); };
  if (c.capability < 1 || c.capability > kMaxGroupSize) bad("M must lie in [1, 64]");
  if (!(c.failure_prob >= 0.0 && c.failure_prob < 1.0)) bad("p_e must lie in [0,1)");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) bad("lambda must be finite and >= 0");
  if (c.period == 0) bad("on-off period must be >= 1");
  if (!(c.horizon > c.warmup)) bad("horizon must exceed warmup");
  if (!(c.theta > 0.0 && c.theta <= 1.0)) bad("theta must lie in (0,1]");
  for (const auto& step : c.schedule) {
    if (step.start < 1) bad("schedule slots are 1-based");
    if (!(step.lambda >= 0.0) || !std::isfinite(step.lambda)) bad("scheduled lambda must be >= 0");
  }
}

ArrivalProcess::ArrivalProcess(ArrivalModel model, std::uint64_t period, Rng rng)
    : model_(model), period_(period), rng_(std::move(rng)) {
  if (period_ == 0) fail(ErrorKind::Config, "on-off period must be >= 1");
}

std::uint64_t ArrivalProcess::next(std::uint64_t slot_index, double lambda) {
  double mean = lambda;
  if (model_ == ArrivalModel::OnOff) {
    if (slot_index % period_ == 0) on_ = std::bernoulli_distribution(0.5)(rng_);
    mean = on_ ? 2.0 * lambda : 0.0;
  }
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(rng_);
}

namespace {

class Simulation {
 public:
  Simulation(const SimConfig& config, const PolicyTable& policy)
      : cfg_(config),
        policy_(policy),
        estimator_(policy, config.theta),
        arrivals_(config.arrivals, config.period, make_stream(config.seed, "arrivals")),
        access_rng_(make_stream(config.seed, "access")),
        srp_rng_(make_stream(config.seed, "srp")) {
    m_.delay_histogram.assign(kDelayBuckets, 0);
    if (cfg_.record_backlog) m_.backlog_trace.reserve(cfg_.horizon);
  }

  SimMetrics run() {
    std::uint64_t t = 1;
    while (t <= cfg_.horizon) t = normal_slot(t);
    finish();
    return std::move(m_);
  }

 private:
  bool in_window(std::uint64_t slot) const { return slot > cfg_.warmup; }

  double transmit_probability(std::uint64_t n) {
    if (cfg_.controller == Controller::Adaptive) return estimator_.current_broadcast();
    if (n == 0) return 0.0;
    auto it = genie_cache_.find(n);
    if (it == genie_cache_.end()) {
      const double p = analysis::optimal_p_known_n(n, policy_.capability, policy_.srp_mean);
      it = genie_cache_.emplace(n, p).first;
    }
    return it->second;
  }

  std::uint64_t take_random_user() {
    std::uniform_int_distribution<std::size_t> pick(0, waiting_.size() - 1);
    const std::size_t i = pick(access_rng_);
    const std::uint64_t arrival = waiting_[i];
    waiting_[i] = waiting_.back();
    waiting_.pop_back();
    return arrival;
  }

  void arrive(std::uint64_t t) {
    const std::uint64_t count = arrivals_.next(t - 1, cfg_.lambda_at(t));
    m_.total_arrivals += count;
    waiting_.insert(waiting_.end(), count, t);
  }

  void deliver(std::uint64_t arrival, std::uint64_t t) {
    ++m_.total_decoded;
    if (!in_window(t)) return;
    ++m_.decoded_in_window;
    const std::uint64_t delay = t - arrival;
    delay_sum_ += static_cast<double>(delay);
    ++m_.delay_histogram[std::min<std::uint64_t>(delay, kDelayBuckets - 1)];
  }

  void end_of_slot(std::uint64_t t) {
    const std::uint64_t backlog = waiting_.size() + in_srp_;
    if (in_window(t)) backlog_sum_ += static_cast<double>(backlog);
    if (cfg_.record_backlog) {
      const double nu = cfg_.controller == Controller::Adaptive
                            ? estimator_.state().nu
                            : std::numeric_limits<double>::quiet_NaN();
      m_.backlog_trace.push_back({t, backlog, nu});
    }
  }

  void embedded_point(std::uint64_t t, const FeedbackEvent& ev) {
    ++m_.embedded_points;
    if (cfg_.controller != Controller::Adaptive) return;
    estimator_.on_event(ev);
    ++m_.estimator_updates;
    if (cfg_.record_events) {
      const auto& s = estimator_.state();
      m_.events.push_back({t, event_name(ev), s.nu, s.lambda_e, s.p_star});
    }
  }

  // Plays normal slot t and, if it starts one, the whole resolve procedure.
  // Returns the next normal slot.
  std::uint64_t normal_slot(std::uint64_t t) {
    const std::uint64_t n = waiting_.size();
    std::uint64_t k = 0;
    if (n > 0) {
      const double p = transmit_probability(n);
      k = std::binomial_distribution<std::uint64_t>(n, p)(access_rng_);
    }
    const bool counted = in_window(t);
    const auto capability = static_cast<std::uint64_t>(policy_.capability);

    if (k == 0) {
      idle_ += counted;
      arrive(t);
      end_of_slot(t);
      embedded_point(t, feedback::Idle{});
      return t + 1;
    }
    if (k == 1) {
      success_ += counted;
      deliver(take_random_user(), t);
      arrive(t);
      end_of_slot(t);
      embedded_point(t, feedback::Success{});
      return t + 1;
    }
    if (k > capability) {
      // Over capacity: the superposition is unusable and discarded.
      collision_ += counted;
      arrive(t);
      end_of_slot(t);
      embedded_point(t, feedback::Collision{});
      return t + 1;
    }

    srp_slots_ += counted;
    std::vector<std::uint64_t> group(k);
    for (auto& arrival : group) arrival = take_random_user();
    in_srp_ = k;
    arrive(t);
    end_of_slot(t);

    const auto outcome = run_srp(static_cast<int>(k), policy_.retx_probs, policy_.failure_prob, srp_rng_);
    ++m_.srp_count;
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return outcome.decode_slot[a] < outcome.decode_slot[b];
    });
    std::size_t next = 0;
    for (std::uint64_t offset = 1; offset <= outcome.duration; ++offset) {
      const std::uint64_t slot = t + offset;
      if (slot > cfg_.horizon) {
        // Truncated at the horizon: undecoded members stay in the backlog count.
        return slot;
      }
      srp_slots_ += in_window(slot);
      while (next < k && outcome.decode_slot[order[next]] == offset) {
        deliver(group[order[next]], slot);
        --in_srp_;
        ++next;
      }
      arrive(slot);
      end_of_slot(slot);
    }
    const std::uint64_t last = t + outcome.duration;
    embedded_point(last, feedback::SrpComplete{static_cast<int>(k), outcome.duration});
    return last + 1;
  }

  void finish() {
    const auto slots = cfg_.horizon - cfg_.warmup;
    m_.measured_slots = slots;
    const double denom = static_cast<double>(slots);
    m_.throughput = static_cast<double>(m_.decoded_in_window) / denom;
    m_.mean_delay = m_.decoded_in_window ? delay_sum_ / static_cast<double>(m_.decoded_in_window) : 0.0;
    m_.mean_backlog = backlog_sum_ / denom;
    m_.idle_rate = static_cast<double>(idle_) / denom;
    m_.success_rate = static_cast<double>(success_) / denom;
    m_.collision_rate = static_cast<double>(collision_) / denom;
    m_.srp_fraction = static_cast<double>(srp_slots_) / denom;
    m_.final_backlog = waiting_.size() + in_srp_;
  }

  const SimConfig& cfg_;
  const PolicyTable& policy_;
  Estimator estimator_;
  ArrivalProcess arrivals_;
  Rng access_rng_;
  Rng srp_rng_;
  std::vector<std::uint64_t> waiting_;  // arrival slot of each eligible user
  std::uint64_t in_srp_ = 0;
  std::unordered_map<std::uint64_t, double> genie_cache_;

  std::uint64_t idle_ = 0, success_ = 0, collision_ = 0, srp_slots_ = 0;
  double delay_sum_ = 0.0;
  double backlog_sum_ = 0.0;
  SimMetrics m_;
};

template <class Work>
void parallel_for(std::size_t count, unsigned jobs, Work&& work) {
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i = cursor++; i < count; i = cursor++) {
          try {
            work(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

SimMetrics run(const SimConfig& config, const PolicyTable& policy) {
  validate(config);
  if (policy.capability != config.capability || policy.failure_prob != config.failure_prob)
    fail(ErrorKind::Config, "policy table does not match the simulated M / p_e");
  return Simulation(config, policy).run();
}

SimMetrics run(const SimConfig& config) {
  validate(config);
  const auto policy = build_policy_table(config.capability, config.failure_prob, config.retx_mode);
  return run(config, policy);
}

std::vector<SweepPoint> sweep(const SimConfig& base, std::span<const double> lambdas,
                              unsigned jobs) {
  validate(base);
  const auto policy = build_policy_table(base.capability, base.failure_prob, base.retx_mode);
  std::vector<SweepPoint> out(lambdas.size());
  parallel_for(lambdas.size(), jobs, [&](std::size_t i) {
    SimConfig c = base;
    c.lambda = lambdas[i];
    c.schedule.clear();
    c.seed = derive_seed(base.seed, "sweep", i);
    c.record_backlog = false;
    c.record_events = false;
    out[i] = {lambdas[i], run(c, policy)};
  });
  return out;
}

std::vector<RateStep> load_step_schedule() {
  return {{1, 0.4}, {30'001, 0.5}, {70'001, 0.4}};
}

std::vector<TracePoint> run_trace_experiment(const SimConfig& config, int episodes,
                                             unsigned jobs) {
  if (episodes < 1) fail(ErrorKind::Config, "trace experiment needs at least one episode");
  validate(config);
  const auto policy = build_policy_table(config.capability, config.failure_prob, config.retx_mode);

  std::vector<TracePoint> sum(config.horizon);
  for (std::uint64_t i = 0; i < config.horizon; ++i) sum[i].slot = i + 1;

  // Episodes finish in any order but are folded in index order.
  std::mutex mutex;
  std::condition_variable turn;
  std::size_t next_to_merge = 0;
  parallel_for(static_cast<std::size_t>(episodes), jobs, [&](std::size_t e) {
    SimConfig c = config;
    c.seed = derive_seed(config.seed, "episode", e);
    c.record_backlog = true;
    c.record_events = false;
    std::optional<SimMetrics> metrics;
    std::exception_ptr error;
    try {
      metrics = run(c, policy);
    } catch (...) {
      error = std::current_exception();
    }
    std::unique_lock lock(mutex);
    turn.wait(lock, [&] { return next_to_merge == e; });
    if (metrics) {
      for (std::size_t i = 0; i < metrics->backlog_trace.size(); ++i) {
        sum[i].true_backlog += static_cast<double>(metrics->backlog_trace[i].true_backlog);
        sum[i].estimated_nu += metrics->backlog_trace[i].estimated_nu;
      }
    }
    ++next_to_merge;
    turn.notify_all();
    if (error) std::rethrow_exception(error);
  });

  const double scale = 1.0 / episodes;
  for (auto& point : sum) {
    point.true_backlog *= scale;
    point.estimated_nu *= scale;
  }
  return sum;
}

double mean_tracking_error(std::span<const TracePoint> trace) {
  if (trace.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : trace) total += std::abs(p.estimated_nu - p.true_backlog);
  return total / static_cast<double>(trace.size());
}

}  // namespace sicra
