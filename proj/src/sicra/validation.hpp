#pragma once

#include <cstdint>

#include "sicra/policy.hpp"

namespace sicra {

/// Monte-Carlo check of the resolve procedure against the analytic mean.
struct SrpValidation {
  int group_size = 2;
  double failure_prob = 0.0;
  std::uint64_t trials = 0;
  double analytic_mean = 0.0;
  double empirical_mean = 0.0;
  double std_error = 0.0;  // of the empirical mean; NaN below two trials
  double z_score = 0.0;
  bool passed = false;     // |z| <= 3
};

/// Runs `trials` procedures over `group_size` users with the retransmission
/// probabilities of build_policy_table(group_size, p_e, mode). Trial stream:
/// make_stream(seed, "srp-validate").
SrpValidation validate_srp(int group_size, double failure_prob, RetxMode mode,
                           std::uint64_t trials, std::uint64_t seed);

}  // namespace sicra
