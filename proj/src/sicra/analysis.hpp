#pragma once

// Closed-form and recursive performance quantities for slotted random access
// with a SIC-capable receiver, plus the numerical optimizers that turn them
// into control constants.
//
// Vector conventions used throughout:
//   srp_mean[k - 2] = E[X_k], the mean duration of a resolve procedure started
//                     by k colliding users (k = 2..M);
//   probs[k - 2]    = p_k, the per-user retransmission probability inside a
//                     resolve procedure over a group of k users.

#include <cstdint>
#include <span>
#include <vector>

namespace sicra::analysis {

/// C(n,k) p^k (1-p)^(n-k). Direct product for small n, log-space above.
double binom_pmf(std::uint64_t n, std::uint64_t k, double p);

/// mu^k e^-mu / k!, log-space for large k.
double poisson_pmf(std::uint64_t k, double mu);

/// Upper summation index used wherever a Poisson series must be truncated:
/// mu + 40 sqrt(mu) + 50. The neglected tail is below 1e-300 for every mu.
std::uint64_t poisson_truncation(double mu);

/// Renewal-reward service rate with exactly n backlogged users each
/// transmitting with probability p. Zero for n = 0.
double service_rate_known_n(std::uint64_t n, int capability, double p,
                            std::span<const double> srp_mean);

/// Service rate when the backlog is Poisson and x users transmit on average.
double service_rate_poisson(double x, int capability,
                            std::span<const double> srp_mean);

struct RateOptimum {
  double x_star = 0;
  double s_star = 0;
};

/// Maximizes service_rate_poisson over x in (0, 2M]: grid scan at 1e-2, then
/// Brent refinement. Throws Numeric if the maximizer sits on the upper edge.
RateOptimum optimize_x(int capability, std::span<const double> srp_mean);

/// Mean correction applied to the backlog belief after an unresolvable
/// collision, evaluated at the optimal load x_star.
double collision_offset(double x_star, int capability);

/// Slots until a group of m users produces a proper split (not nobody, not
/// everybody): 1 / (1 - B_m(0) - B_m(m)).
double expected_delta(int m, double p);

/// Pr(split size = l | proper split), l in [1, m-1].
double split_pmf(int m, int l, double p);

/// Mean repair slots needed to obtain a usable copy of a signal that fails
/// SIC with probability p_e: 1/(1-p_e) - 1.
double expected_repair_slots(double p_e);

/// E[X_m] from the group-split recursion. probs must cover k = 2..m.
double expected_srp_duration(int m, std::span<const double> probs);

struct SrpDurations {
  double clean_root = 0;    // E[X'_m]: the initiating signal is usable
  double with_failure = 0;  // E[X^(e)_m] = E[X'_m] + E[repair slots]
};

/// E[X'_m] and E[X^(e)_m] when every multi-user signal independently fails
/// SIC with probability p_e. Reduces to expected_srp_duration at p_e = 0.
SrpDurations expected_srp_duration_with_failure(int m,
                                                std::span<const double> probs,
                                                double p_e);

/// E[X^(e)_k] for every k = 2..probs.size()+1, computed bottom-up.
std::vector<double> expected_srp_durations(std::span<const double> probs,
                                           double p_e);

struct RetxOptimum {
  std::vector<double> probs;      // p*_k, k = 2..M
  std::vector<double> durations;  // E*[X^(e)_k], k = 2..M
};

/// Sequential minimization of the resolve durations: p_2 first, then p_3 with
/// the lower-order optima fixed, up to p_M. A constant 1/2 is preferred
/// whenever it is optimal to within rounding.
RetxOptimum optimize_retx_probs(int capability, double p_e);

/// argmax over p in (0, 1] of service_rate_known_n. Requires n >= 1.
double optimal_p_known_n(std::uint64_t n, int capability,
                         std::span<const double> srp_mean);

/// One realization of the splitting phase: slots spent until a proper split
/// and the number of users that transmitted in that slot.
struct GroupSplit {
  std::uint32_t delta = 0;
  int split_size = 0;
};

}  // namespace sicra::analysis
