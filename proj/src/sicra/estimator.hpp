#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "sicra/policy.hpp"

namespace sicra {

namespace feedback {
struct Idle {};
struct Success {};
/// A resolve procedure over `group_size` users ended after `duration` slots.
struct SrpComplete {
  int group_size = 2;
  std::uint64_t duration = 1;
};
struct Collision {};
}  // namespace feedback

using FeedbackEvent = std::variant<feedback::Idle, feedback::Success,
                                   feedback::SrpComplete, feedback::Collision>;

std::string_view event_name(const FeedbackEvent& ev) noexcept;

/// Constants the estimator needs from a policy table.
struct EstimatorParams {
  int capability = 1;
  double x_star = 1.0;
  double c_m = 0.0;
  double theta = 0.99;
  double nu_floor = 1e-2;

  static EstimatorParams from_policy(const PolicyTable& policy, double theta = 0.99);
};

struct EstimatorState {
  double nu = 10.0;       // Poisson mean of the backlog belief
  double lambda_e = 0.5;  // smoothed arrival-rate estimate, packets/slot
  double p_star = 1.0;    // probability broadcast for the next normal slot
};

/// Belief at start-up: nu = 10, lambda_e = 0.5, p* = x*_M / M.
EstimatorState initial_state(const EstimatorParams& params);

/// One update at an embedded point. Pure: identical inputs give identical
/// outputs bit for bit. Throws Protocol for an SRP outside [2, M].
EstimatorState advance(const EstimatorParams& params, const EstimatorState& state,
                       const FeedbackEvent& ev);

/// Convenience owner of params + state, as run by the access point.
class Estimator {
 public:
  Estimator(const PolicyTable& policy, double theta = 0.99);
  explicit Estimator(const EstimatorParams& params);

  void on_event(const FeedbackEvent& ev) { state_ = advance(params_, state_, ev); }

  double current_broadcast() const noexcept { return state_.p_star; }
  const EstimatorState& state() const noexcept { return state_; }
  const EstimatorParams& params() const noexcept { return params_; }

 private:
  EstimatorParams params_;
  EstimatorState state_;
};

}  // namespace sicra
