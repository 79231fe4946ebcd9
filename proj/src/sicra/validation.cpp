#include "sicra/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sicra/error.hpp"
#include "sicra/random.hpp"
#include "sicra/resolver.hpp"

namespace sicra {

SrpValidation validate_srp(int group_size, double failure_prob, RetxMode mode,
                           std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) fail(ErrorKind::Config, "validation needs at least one trial");
  if (group_size < 2) fail(ErrorKind::Domain, "resolve procedure needs at least two users");
  const auto policy = build_policy_table(group_size, failure_prob, mode);

  SrpValidation v;
  v.group_size = group_size;
  v.failure_prob = failure_prob;
  v.trials = trials;
  v.analytic_mean = policy.srp_mean_for(group_size);

  Rng rng = make_stream(seed, "srp-validate");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto d = static_cast<double>(
        run_srp(group_size, policy.retx_probs, failure_prob, rng).duration);
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(trials);
  v.empirical_mean = sum / n;
  if (trials < 2) {
    v.std_error = std::numeric_limits<double>::quiet_NaN();
    v.z_score = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  const double variance = std::max(0.0, (sum_sq - n * v.empirical_mean * v.empirical_mean) / (n - 1.0));
  v.std_error = std::sqrt(variance / n);
  v.z_score = v.std_error > 0.0 ? (v.empirical_mean - v.analytic_mean) / v.std_error
                                : (v.empirical_mean == v.analytic_mean ? 0.0 : INFINITY);
  v.passed = std::abs(v.z_score) <= 3.0;
  return v;
}

}  // namespace sicra
