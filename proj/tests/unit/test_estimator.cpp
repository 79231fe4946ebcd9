#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <random>

#include "sicra/analysis.hpp"
#include "sicra/error.hpp"
#include "sicra/estimator.hpp"
#include "sicra/random.hpp"

using namespace sicra;

namespace {

// Pearson statistic of `counts` (total n) against Poisson(mu), pooling bins
// until each expects at least 5. Returns {statistic, degrees of freedom}.
std::pair<double, int> poisson_chi_square(const std::map<std::uint64_t, std::uint64_t>& counts,
                                          double mu) {
  std::uint64_t n = 0, top = 0;
  for (auto [k, c] : counts) n += c, top = std::max(top, k);
  std::vector<double> obs, expct;
  double o = 0, e = 0, used = 0;
  for (std::uint64_t k = 0; k <= top; ++k) {
    o += counts.count(k) ? counts.at(k) : 0;
    const double p = analysis::poisson_pmf(k, mu);
    e += n * p;
    used += p;
    if (e >= 5 && n * (1 - used) >= 5) {
      obs.push_back(o), expct.push_back(e);
      o = e = 0;
    }
  }
  // remaining tail, including everything above `top`
  obs.push_back(o);
  expct.push_back(e + n * (1 - used));
  double stat = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) stat += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
  return {stat, static_cast<int>(obs.size()) - 1};
}

double critical_1pct(int dof) {
  return boost::math::quantile(boost::math::chi_squared(dof), 0.99);
}

}  // namespace

TEST_CASE("initial state") {
  const auto m2 = build_policy_table(2, 0.0);
  Estimator est(m2);
  CHECK(est.state().nu == 10.0);
  CHECK(est.state().lambda_e == 0.5);
  CHECK(est.current_broadcast() == doctest::Approx(m2.x_star / 2));
  CHECK(est.current_broadcast() == doctest::Approx(0.689).epsilon(0.005));

  CHECK(Estimator(build_policy_table(1, 0.0)).current_broadcast() == doctest::Approx(1.0).epsilon(1e-4));
  const auto m10 = build_policy_table(10, 0.0);
  CHECK(Estimator(m10).current_broadcast() == doctest::Approx(m10.x_star / 10));
  CHECK_THROWS_AS(Estimator(m2, 0.0), Error);
  CHECK_THROWS_AS(Estimator(m2, 1.5), Error);
}

TEST_CASE("hand-traced updates") {
  const auto m2 = build_policy_table(2, 0.0);
  const auto params = EstimatorParams::from_policy(m2, 0.99);
  const auto s0 = initial_state(params);

  const auto idle = advance(params, s0, feedback::Idle{});
  CHECK(idle.lambda_e == doctest::Approx(0.495).epsilon(1e-15));
  CHECK(idle.nu == doctest::Approx(10 - m2.x_star + 0.495).epsilon(1e-14));
  CHECK(idle.nu == doctest::Approx(9.117).epsilon(0.0005 / 9.117));
  CHECK(idle.p_star == doctest::Approx(m2.x_star / idle.nu).epsilon(1e-14));

  const auto coll = advance(params, s0, feedback::Collision{});
  CHECK(coll.nu == doctest::Approx(10 + m2.c_m + 0.495).epsilon(1e-14));
  CHECK(coll.nu == doctest::Approx(12.5408).epsilon(0.001 / 12.5408));

  const auto succ = advance(params, s0, feedback::Success{});
  CHECK(succ.lambda_e == doctest::Approx(0.505).epsilon(1e-14));
  CHECK(succ.nu == doctest::Approx(10 - m2.x_star + 0.505).epsilon(1e-14));

  const auto srp = advance(params, s0, feedback::SrpComplete{2, 3});
  const double lam = (0.99 * 0.5 + 0.01 * 2) / (0.99 + 0.01 * 4);
  CHECK(srp.lambda_e == doctest::Approx(lam).epsilon(1e-14));
  CHECK(srp.nu == doctest::Approx(10 - m2.x_star + 4 * lam).epsilon(1e-14));

  CHECK_THROWS_AS(advance(params, s0, feedback::SrpComplete{3, 3}), Error);
  CHECK_THROWS_AS(advance(params, s0, feedback::SrpComplete{1, 3}), Error);
  CHECK_THROWS_AS(advance(params, s0, feedback::SrpComplete{2, 0}), Error);
}

TEST_CASE("clamp boundary and broadcast cap") {
  const auto m2 = build_policy_table(2, 0.0);
  auto params = EstimatorParams::from_policy(m2, 1.0);
  EstimatorState s{m2.x_star, 0.0, 1.0};
  const auto next = advance(params, s, feedback::Success{});
  CHECK(next.nu == params.nu_floor);
  CHECK(next.p_star == 1.0);

  params.theta = 0.99;
  EstimatorState half{0.5, 0.5, 1.0};
  CHECK(advance(params, half, feedback::Idle{}).p_star == 1.0);
  EstimatorState at{10.0, 0.5, 0.1};
  const auto n = advance(params, at, feedback::Collision{});
  CHECK(n.p_star == doctest::Approx(m2.x_star / n.nu));
}

TEST_CASE("property: arrival estimate converges under constant success") {
  const auto params = EstimatorParams::from_policy(build_policy_table(2, 0.0), 0.99);
  auto s = initial_state(params);
  for (int i = 1; i <= 2000; ++i) {
    s = advance(params, s, feedback::Success{});
    CHECK(std::abs(1 - s.lambda_e) == doctest::Approx(0.5 * std::pow(0.99, i)).epsilon(1e-9));
  }
  CHECK(s.lambda_e == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("property: fuzzed event sequences stay finite and deterministic") {
  for (int M : {1, 2, 5}) {
    const auto params = EstimatorParams::from_policy(build_policy_table(M, 0.5), 0.99);
    Rng rng = make_stream(7, "fuzz", M);
    std::uniform_int_distribution<int> kind(0, M >= 2 ? 3 : 2);
    std::uniform_int_distribution<int> size(2, std::max(2, M));
    std::geometric_distribution<int> dur(0.05);
    std::vector<FeedbackEvent> events;
    events.reserve(1'000'000);
    for (int i = 0; i < 1'000'000; ++i) {
      int k = kind(rng);
      if (M == 1 && k == 2) k = 3;
      switch (k) {
        case 0: events.emplace_back(feedback::Idle{}); break;
        case 1: events.emplace_back(feedback::Success{}); break;
        case 2: events.emplace_back(feedback::SrpComplete{size(rng), 1 + static_cast<std::uint64_t>(dur(rng))}); break;
        default: events.emplace_back(feedback::Collision{}); break;
      }
    }
    Estimator a(params), b(params);
    bool ok = true;
    for (const auto& ev : events) {
      a.on_event(ev);
      b.on_event(ev);
      const auto& s = a.state();
      ok = ok && std::isfinite(s.nu) && s.nu >= params.nu_floor && s.p_star > 0 && s.p_star <= 1 &&
           s.lambda_e >= 0 && s.lambda_e <= std::max(1, M) &&
           s.nu == b.state().nu && s.lambda_e == b.state().lambda_e;
    }
    CHECK(ok);
  }
}

TEST_CASE("property: Poisson belief is conjugate to thinning") {
  // n ~ Poisson(nu), m ~ Binomial(n, p): n - m given m is Poisson((1-p) nu).
  for (auto [nu, p] : {std::pair{5.0, 0.2}, std::pair{20.0, 0.1}}) {
    Rng rng = make_stream(11, "conjugacy", static_cast<std::uint64_t>(nu));
    std::poisson_distribution<std::uint64_t> prior(nu);
    std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> by_m;
    for (int i = 0; i < 1'000'000; ++i) {
      const auto n = prior(rng);
      std::binomial_distribution<std::uint64_t> tx(n, p);
      const auto m = tx(rng);
      ++by_m[m][n - m];
    }
    for (std::uint64_t m : {0, 1, 2}) {
      const auto [stat, dof] = poisson_chi_square(by_m[m], (1 - p) * nu);
      INFO("nu=" << nu << " p=" << p << " m=" << m << " chi2=" << stat << " dof=" << dof);
      CHECK(stat < critical_1pct(dof));
    }
  }
}

TEST_CASE("property: collision correction is the conditional mean") {
  // E[n | more than M transmit] = nu + C_M when p nu = x*.
  for (int M : {1, 2, 3}) {
    const auto t = build_policy_table(M, 0.0);
    const double nu = 12.0, p = t.x_star / nu;
    Rng rng = make_stream(13, "collision", M);
    std::poisson_distribution<int> prior(nu);
    double sum = 0, sq = 0;
    std::uint64_t count = 0;
    for (int i = 0; i < 1'000'000; ++i) {
      const int n = prior(rng);
      std::binomial_distribution<int> tx(n, p);
      if (tx(rng) > M) {
        sum += n, sq += double(n) * n;
        ++count;
      }
    }
    const double mean = sum / count;
    const double se = std::sqrt((sq / count - mean * mean) / count);
    // binomial thinning of a Poisson prior is exact, so only sampling noise remains
    CHECK(std::abs(mean - (nu + t.c_m)) < 4 * se);
  }
}
