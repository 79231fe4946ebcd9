#include "sicra/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "sicra/error.hpp"

namespace sicra::analysis {
namespace {

constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;
constexpr std::uint64_t kDirectBinomialLimit = 64;
constexpr std::uint64_t kDirectPoissonLimit = 30;

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    fail(ErrorKind::Domain, std::string(what) + " must lie in [0,1], got " +
                                std::to_string(p));
}

void require_open_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorKind::Domain, std::string(what) + " must lie in (0,1), got " +
                                std::to_string(p));
}

void require_capability(int capability) {
  if (capability < 1)
    fail(ErrorKind::Domain, "SIC capability must be >= 1, got " +
                                std::to_string(capability));
}

void require_srp_means(std::span<const double> srp_mean, int capability) {
  if (srp_mean.size() + 1 < static_cast<std::size_t>(capability))
    fail(ErrorKind::Config,
         "missing E[X_k] entries: need k = 2.." + std::to_string(capability) +
             ", have " + std::to_string(srp_mean.size()));
}

// argmin over a uniform grid, then Brent on the neighbouring cell. Ties on the
// grid keep the smallest abscissa.
template <class F>
std::pair<double, double> grid_then_brent(F f, double lo, double hi,
                                          double step, double clamp_lo,
                                          double clamp_hi,
                                          std::size_t* best_index = nullptr,
                                          std::size_t* grid_size = nullptr) {
  const auto points = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::size_t best = 0;
  double best_value = f(lo);
  for (std::size_t i = 1; i < points; ++i) {
    const double v = f(lo + step * static_cast<double>(i));
    if (v < best_value - 1e-14 * std::abs(best_value)) {
      best_value = v;
      best = i;
    }
  }
  if (best_index) *best_index = best;
  if (grid_size) *grid_size = points;
  const double centre = lo + step * static_cast<double>(best);
  const double a = std::max(clamp_lo, centre - step);
  const double b = std::min(clamp_hi, centre + step);
  auto [x, fx] = boost::math::tools::brent_find_minima(f, a, b, kBrentBits);
  if (best_value < fx) return {centre, best_value};
  return {x, fx};
}

}  // namespace

double binom_pmf(std::uint64_t n, std::uint64_t k, double p) {
  require_probability(p, "binomial probability");
  if (k > n)
    fail(ErrorKind::Domain, "binomial outcome " + std::to_string(k) +
                                " exceeds trials " + std::to_string(n));
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double q = 1.0 - p;
  if (n <= kDirectBinomialLimit) {
    const std::uint64_t r = std::min(k, n - k);
    double c = 1.0;
    for (std::uint64_t i = 1; i <= r; ++i)
      c = c * static_cast<double>(n - r + i) / static_cast<double>(i);
    return c * std::pow(p, static_cast<double>(k)) *
           std::pow(q, static_cast<double>(n - k));
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double log_c =
      std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
  return std::exp(log_c + kd * std::log(p) + (nd - kd) * std::log1p(-p));
}

double poisson_pmf(std::uint64_t k, double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    fail(ErrorKind::Domain, "Poisson mean must be finite and >= 0, got " +
                                std::to_string(mu));
  if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
  if (k <= kDirectPoissonLimit) {
    double term = std::exp(-mu);
    for (std::uint64_t i = 1; i <= k; ++i) term *= mu / static_cast<double>(i);
    return term;
  }
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mu) - mu - std::lgamma(kd + 1.0));
}

std::uint64_t poisson_truncation(double mu) {
  if (!(mu >= 0.0))
    fail(ErrorKind::Domain, "Poisson mean must be >= 0");
  return static_cast<std::uint64_t>(std::ceil(mu + 40.0 * std::sqrt(mu) + 50.0));
}

double service_rate_known_n(std::uint64_t n, int capability, double p,
                            std::span<const double> srp_mean) {
  require_capability(capability);
  require_probability(p, "transmission probability");
  require_srp_means(srp_mean, capability);
  if (n == 0) return 0.0;
  const auto top = std::min<std::uint64_t>(n, static_cast<std::uint64_t>(capability));
  double served = 0.0;
  double duration = 1.0;
  for (std::uint64_t k = 1; k <= top; ++k) {
    const double b = binom_pmf(n, k, p);
    served += static_cast<double>(k) * b;
    if (k >= 2) duration += b * srp_mean[k - 2];
  }
  return served / duration;
}

double service_rate_poisson(double x, int capability,
                            std::span<const double> srp_mean) {
  require_capability(capability);
  require_srp_means(srp_mean, capability);
  if (!(x >= 0.0))
    fail(ErrorKind::Domain, "mean transmissions per slot must be >= 0");
  double served = 0.0;
  double duration = 1.0;
  for (int k = 1; k <= capability; ++k) {
    const double phi = poisson_pmf(static_cast<std::uint64_t>(k), x);
    served += k * phi;
    if (k >= 2) duration += srp_mean[static_cast<std::size_t>(k - 2)] * phi;
  }
  return served / duration;
}

RateOptimum optimize_x(int capability, std::span<const double> srp_mean) {
  require_capability(capability);
  require_srp_means(srp_mean, capability);
  constexpr double step = 1e-2;
  const double hi = 2.0 * capability;
  auto negated = [&](double x) {
    return -service_rate_poisson(x, capability, srp_mean);
  };
  std::size_t best = 0;
  std::size_t points = 0;
  auto [x, fx] = grid_then_brent(negated, step, hi, step, 1e-12, hi, &best, &points);
  if (best + 1 == points)
    fail(ErrorKind::Numeric, "service-rate maximizer not bracketed by (0, 2M]");
  return {x, -fx};
}

double collision_offset(double x_star, int capability) {
  require_capability(capability);
  if (!(x_star > 0.0))
    fail(ErrorKind::Domain, "x_star must be > 0");
  // sum_{m<=M} (x - m) Phi_x(m) telescopes to x Phi_x(M), since
  // m Phi_x(m) = x Phi_x(m - 1).
  const double numerator =
      x_star * poisson_pmf(static_cast<std::uint64_t>(capability), x_star);
  // P(Poisson(x) > M) without the cancellation of 1 - CDF.
  const double tail = boost::math::gamma_p(static_cast<double>(capability) + 1.0, x_star);
  if (!(tail > 0.0))
    fail(ErrorKind::Numeric, "collision probability vanished at x_star");
  return numerator / tail;
}

double expected_delta(int m, double p) {
  if (m < 2) fail(ErrorKind::Domain, "group size must be >= 2");
  require_open_probability(p, "retransmission probability");
  const auto mu = static_cast<std::uint64_t>(m);
  return 1.0 / (1.0 - binom_pmf(mu, 0, p) - binom_pmf(mu, mu, p));
}

double split_pmf(int m, int l, double p) {
  if (m < 2) fail(ErrorKind::Domain, "group size must be >= 2");
  if (l < 1 || l > m - 1)
    fail(ErrorKind::Domain, "split size " + std::to_string(l) +
                                " outside [1, " + std::to_string(m - 1) + "]");
  require_open_probability(p, "retransmission probability");
  const auto mu = static_cast<std::uint64_t>(m);
  return binom_pmf(mu, static_cast<std::uint64_t>(l), p) /
         (1.0 - binom_pmf(mu, 0, p) - binom_pmf(mu, mu, p));
}

double expected_repair_slots(double p_e) {
  if (!(p_e >= 0.0 && p_e < 1.0))
    fail(ErrorKind::Domain, "SIC failure probability must lie in [0,1)");
  return 1.0 / (1.0 - p_e) - 1.0;
}

namespace {

// E[X'_m] given E[X'_l] for l = 2..m-1 (clean[l - 2]).
double clean_root_step(int m, double p, std::span<const double> clean,
                       double repair) {
  double value = expected_delta(m, p);
  for (int l = 2; l <= m - 1; ++l) {
    const double to_l = split_pmf(m, l, p);
    const double to_rest = split_pmf(m, m - l, p);
    value += (to_l + to_rest) * clean[static_cast<std::size_t>(l - 2)];
    value += to_l * repair;
  }
  return value;
}

void require_probs(int m, std::span<const double> probs) {
  if (m < 2) fail(ErrorKind::Domain, "group size must be >= 2");
  if (probs.size() + 1 < static_cast<std::size_t>(m))
    fail(ErrorKind::Config, "retransmission probabilities must cover k = 2.." +
                                std::to_string(m));
}

}  // namespace

SrpDurations expected_srp_duration_with_failure(int m,
                                                std::span<const double> probs,
                                                double p_e) {
  require_probs(m, probs);
  const double repair = expected_repair_slots(p_e);
  std::vector<double> clean;
  clean.reserve(static_cast<std::size_t>(m - 1));
  for (int k = 2; k <= m; ++k)
    clean.push_back(clean_root_step(k, probs[static_cast<std::size_t>(k - 2)], clean, repair));
  return {clean.back(), clean.back() + repair};
}

double expected_srp_duration(int m, std::span<const double> probs) {
  return expected_srp_duration_with_failure(m, probs, 0.0).clean_root;
}

std::vector<double> expected_srp_durations(std::span<const double> probs,
                                           double p_e) {
  const double repair = expected_repair_slots(p_e);
  std::vector<double> clean;
  clean.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    clean.push_back(clean_root_step(static_cast<int>(i) + 2, probs[i], clean, repair));
  for (double& v : clean) v += repair;
  return clean;
}

RetxOptimum optimize_retx_probs(int capability, double p_e) {
  if (capability < 2)
    fail(ErrorKind::Domain, "retransmission probabilities need M >= 2");
  const double repair = expected_repair_slots(p_e);
  RetxOptimum out;
  std::vector<double> clean;
  for (int m = 2; m <= capability; ++m) {
    auto objective = [&](double p) { return clean_root_step(m, p, clean, repair); };
    constexpr double step = 1e-2;
    auto [p, value] = grid_then_brent(objective, step, 1.0 - step, step, 1e-9, 1.0 - 1e-9);
    const double half = objective(0.5);
    if (half <= value + 1e-12 * std::abs(value)) {
      p = 0.5;
      value = half;
    }
    clean.push_back(value);
    out.probs.push_back(p);
    out.durations.push_back(value + repair);
  }
  return out;
}

double optimal_p_known_n(std::uint64_t n, int capability,
                         std::span<const double> srp_mean) {
  require_capability(capability);
  require_srp_means(srp_mean, capability);
  if (n == 0)
    fail(ErrorKind::Domain, "no transmission decision exists for an empty backlog");
  // Search in log p so that both p ~ 1 and p ~ x*/n are resolved.
  const double log_lo = std::log(std::min(1e-3, 0.01 / static_cast<double>(n)));
  constexpr double step = 0.02;
  auto negated = [&](double log_p) {
    return -service_rate_known_n(n, capability, std::min(1.0, std::exp(log_p)), srp_mean);
  };
  const double span_width = -log_lo;
  const double grid_step = span_width / std::ceil(span_width / step);
  std::size_t best = 0;
  std::size_t points = 0;
  auto [log_p, value] = grid_then_brent(negated, log_lo, 0.0, grid_step, log_lo, 0.0, &best, &points);
  // Service rate can be monotone up to p = 1 (e.g. n = 1).
  if (negated(0.0) <= value) return 1.0;
  return std::min(1.0, std::exp(log_p));
}

}  // namespace sicra::analysis
