#include "sicra/estimator.hpp"

#include <algorithm>
#include <string>

#include "sicra/error.hpp"

namespace sicra {

std::string_view event_name(const FeedbackEvent& ev) noexcept {
  constexpr std::string_view names[] = {"idle", "success", "srp", "collision"};
  return names[ev.index()];
}

EstimatorParams EstimatorParams::from_policy(const PolicyTable& policy, double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    fail(ErrorKind::Config, "update weight theta must lie in (0,1]");
  EstimatorParams p;
  p.capability = policy.capability;
  p.x_star = policy.x_star;
  p.c_m = policy.c_m;
  p.theta = theta;
  return p;
}

EstimatorState initial_state(const EstimatorParams& params) {
  EstimatorState s;
  s.nu = 10.0;
  s.lambda_e = 0.5;
  s.p_star = std::min(1.0, params.x_star / params.capability);
  return s;
}

EstimatorState advance(const EstimatorParams& params, const EstimatorState& state,
                       const FeedbackEvent& ev) {
  const double theta = params.theta;
  EstimatorState next = state;
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, feedback::Idle>) {
          next.lambda_e = theta * state.lambda_e;
          next.nu = state.nu - params.x_star + next.lambda_e;
        } else if constexpr (std::is_same_v<E, feedback::Success>) {
          // +1 observed transmitter and -1 decoded packet cancel.
          next.lambda_e = theta * state.lambda_e + (1.0 - theta);
          next.nu = state.nu - params.x_star + next.lambda_e;
        } else if constexpr (std::is_same_v<E, feedback::SrpComplete>) {
          if (e.group_size < 2 || e.group_size > params.capability)
            fail(ErrorKind::Protocol, "resolve procedure over " + std::to_string(e.group_size) +
                                          " users with SIC capability " +
                                          std::to_string(params.capability));
          if (e.duration < 1)
            fail(ErrorKind::Protocol, "resolve procedure must last at least one slot");
          // Elapsed interval: the initiating slot plus the procedure.
          const double elapsed = 1.0 + static_cast<double>(e.duration);
          next.lambda_e = (theta * state.lambda_e + (1.0 - theta) * e.group_size) /
                          (theta + (1.0 - theta) * elapsed);
          next.nu = state.nu - params.x_star + next.lambda_e * elapsed;
        } else {
          next.lambda_e = theta * state.lambda_e;
          next.nu = state.nu + params.c_m + next.lambda_e;
        }
      },
      ev);
  next.nu = std::max(next.nu, params.nu_floor);
  next.p_star = std::min(1.0, params.x_star / next.nu);
  return next;
}

Estimator::Estimator(const PolicyTable& policy, double theta)
    : Estimator(EstimatorParams::from_policy(policy, theta)) {}

Estimator::Estimator(const EstimatorParams& params)
    : params_(params), state_(initial_state(params)) {}

}  // namespace sicra
