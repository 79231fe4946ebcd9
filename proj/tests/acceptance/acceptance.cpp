// Acceptance suite: one PASS/FAIL line per criterion, details indented above
// it. Exit status is nonzero when a criterion fails that is not listed in
// --known-red (criteria whose deviation is understood and documented).
#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sicra/analysis.hpp"
#include "sicra/policy.hpp"
#include "sicra/random.hpp"
#include "sicra/simulator.hpp"
#include "sicra/validation.hpp"

using namespace sicra;

namespace {

struct Verdict {
  bool pass = true;
  void require(bool ok, const char* fmt, auto... args) {
    std::printf("    %s ", ok ? "ok  " : "MISS");
    std::printf(fmt, args...);
    std::printf("\n");
    pass = pass && ok;
  }
};

// Every simulation run by the suite, checked by the conservation criterion.
std::vector<SimMetrics> g_runs;

SimMetrics simulate(const SimConfig& c) {
  auto m = run(c);
  m.delay_histogram.clear();
  g_runs.push_back(m);
  return m;
}

bool near(double got, double want, double tol) { return std::abs(got - want) <= tol; }

// --------------------------------------------------------------- criteria

Verdict table_one() {
  struct Row { int M; double x, s, c; };
  const Row rows[] = {{1, 1.0, 0.3678, 1.3922},   {2, 1.378, 0.5586, 2.0458},
                      {3, 1.739, 0.6352, 2.7020}, {4, 2.060, 0.6665, 3.3833},
                      {5, 2.3762, 0.6802, 4.0681}, {10, 3.8734, 0.6926, 7.5626}};
  Verdict v;
  for (const auto& r : rows) {
    const auto t = build_policy_table(r.M, 0.0);
    v.require(near(t.x_star, r.x, 0.005) && near(t.s_star, r.s, 0.005) && near(t.c_m, r.c, 0.005),
              "M=%-2d x*=%.4f (%.4f)  S*=%.4f (%.4f)  C=%.4f (%.4f)", r.M, t.x_star, r.x,
              t.s_star, r.s, t.c_m, r.c);
  }
  const auto half = build_policy_table(10, 0.0, RetxMode::Half);
  std::printf("    info M=10 with p_k=1/2: x*=%.4f S*=%.4f C=%.4f\n", half.x_star, half.s_star,
              half.c_m);
  return v;
}

Verdict table_two() {
  const std::map<int, double> printed{{2, 2.0}, {3, 3.333}, {4, 4.761}, {5, 6.210}, {10, 13.426}};
  const auto opt = build_policy_table(10, 0.0);
  const auto half = build_policy_table(10, 0.0, RetxMode::Half);
  Verdict v;
  for (auto [m, want] : printed) {
    const double got = opt.srp_mean_for(m), h = half.srp_mean_for(m);
    v.require(near(got, want, 0.005), "m=%-2d E*[X]=%.4f (%.3f)", m, got, want);
    v.require(h <= got * 1.005, "m=%-2d p=1/2 gives %.4f, +%.3f%%", m, h, 100 * (h / got - 1));
  }
  return v;
}

Verdict tables_three_four() {
  struct Srp { int m; double e, p; };
  const Srp t3[] = {{2, 3, 0.5}, {3, 4.788, 0.412}, {4, 6.633, 0.343}, {5, 8.486, 0.288},
                    {10, 17.802, 0.163}};
  struct Row { int M; double s, x, c; };
  const Row t4[] = {{1, 0.3678, 1, 1.3922},      {2, 0.4821, 1.2580, 2.1220},
                    {3, 0.5155, 1.4700, 2.8892}, {4, 0.5264, 1.6380, 3.6960},
                    {5, 0.5300, 1.760, 4.5461},  {10, 0.5316, 1.8840, 9.2964}};
  Verdict v;
  const auto big = build_policy_table(10, 0.5);
  for (const auto& r : t3) {
    const double e = big.srp_mean_for(r.m), p = big.retx_prob_for(r.m);
    v.require(near(e, r.e, 0.01) && near(p, r.p, 0.01), "m=%-2d E*[X^e]=%.4f (%.3f)  p*=%.4f (%.3f)",
              r.m, e, r.e, p, r.p);
  }
  for (const auto& r : t4) {
    const auto t = build_policy_table(r.M, 0.5);
    v.require(near(t.s_star, r.s, 0.005) && near(t.x_star, r.x, 0.005) && near(t.c_m, r.c, 0.005),
              "M=%-2d S*=%.4f (%.4f)  x*=%.4f (%.4f)  C=%.4f (%.4f)", r.M, t.s_star, r.s, t.x_star,
              r.x, t.c_m, r.c);
  }
  return v;
}

Verdict monte_carlo_srp() {
  Verdict v;
  for (double pe : {0.0, 0.5}) {
    for (int m = 2; m <= 5; ++m) {
      const auto r = validate_srp(m, pe, RetxMode::Optimized, 1'000'000, 20250101);
      v.require(r.passed, "m=%d p_e=%.1f analytic=%.4f empirical=%.4f se=%.4f z=%+.2f", m, pe,
                r.analytic_mean, r.empirical_mean, r.std_error, r.z_score);
    }
  }
  return v;
}

SimConfig base_config(int M, double pe, double lambda) {
  SimConfig c;
  c.capability = M;
  c.failure_prob = pe;
  c.lambda = lambda;
  c.horizon = 1'000'000;
  c.warmup = 10'000;
  c.seed = 42;
  return c;
}

Verdict saturation() {
  Verdict v;
  for (int M : {2, 3}) {
    for (double pe : {0.0, 0.5}) {
      const auto t0 = std::chrono::steady_clock::now();
      const double s_star = build_policy_table(M, pe).s_star;
      const auto m = simulate(base_config(M, pe, 1.0));
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      v.require(std::abs(m.throughput / s_star - 1) <= 0.02 && secs < 120,
                "M=%d p_e=%.1f throughput=%.4f S*=%.4f (%+.1f%%) %.1fs", M, pe, m.throughput,
                s_star, 100 * (m.throughput / s_star - 1), secs);
    }
  }
  return v;
}

Verdict stable_region() {
  Verdict v;
  for (int M : {1, 2, 3}) {
    const double s_star = build_policy_table(M, 0.0).s_star;
    for (double frac : {0.3, 0.5, 0.7, 0.9}) {
      auto c = base_config(M, 0.0, frac * s_star);
      const auto a = simulate(c);
      c.controller = Controller::Genie;
      const auto g = simulate(c);
      const double gap = a.mean_delay - g.mean_delay;
      if (frac == 0.9) {
        v.require(std::abs(a.throughput / c.lambda - 1) <= 0.02 && std::isfinite(a.mean_delay),
                  "M=%d lambda=%.4f throughput=%.4f delay=%.2f", M, c.lambda, a.throughput,
                  a.mean_delay);
      }
      v.require(gap <= 4.0, "M=%d lambda=%.2f*S* adaptive %.2f genie %.2f gap %.2f", M, frac,
                a.mean_delay, g.mean_delay, gap);
    }
  }
  return v;
}

Verdict conjugacy() {
  Verdict v;
  for (auto [nu, p] : {std::pair{5.0, 0.2}, std::pair{20.0, 0.1}}) {
    Rng rng = make_stream(7, "conjugacy", static_cast<std::uint64_t>(nu));
    std::poisson_distribution<std::uint64_t> prior(nu);
    std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> by_m;
    for (int i = 0; i < 1'000'000; ++i) {
      const auto n = prior(rng);
      const auto m = std::binomial_distribution<std::uint64_t>(n, p)(rng);
      ++by_m[m][n - m];
    }
    const double mu = (1 - p) * nu;
    for (std::uint64_t m : {0, 1, 2}) {
      const auto& counts = by_m[m];
      std::uint64_t total = 0, top = 0;
      for (auto [k, c] : counts) total += c, top = std::max(top, k);
      double stat = 0, o = 0, e = 0, used = 0;
      int bins = 0;
      for (std::uint64_t k = 0; k <= top; ++k) {
        o += counts.count(k) ? counts.at(k) : 0;
        const double pk = analysis::poisson_pmf(k, mu);
        e += total * pk;
        used += pk;
        if (e >= 5 && total * (1 - used) >= 5) {
          stat += (o - e) * (o - e) / e;
          ++bins;
          o = e = 0;
        }
      }
      e += total * (1 - used);
      stat += (o - e) * (o - e) / e;
      ++bins;
      const double crit = boost::math::quantile(boost::math::chi_squared(bins - 1), 0.99);
      v.require(stat < crit, "nu=%g p=%g m=%llu chi2=%.2f < %.2f (dof %d, n=%llu)", nu, p,
                static_cast<unsigned long long>(m), stat, crit, bins - 1,
                static_cast<unsigned long long>(total));
    }
  }
  return v;
}

Verdict on_off() {
  Verdict v;
  const double lambda = 0.8 * build_policy_table(2, 0.0).s_star;
  auto c = base_config(2, 0.0, lambda);
  c.arrivals = ArrivalModel::OnOff;
  const auto m = simulate(c);
  v.require(std::abs(m.throughput / lambda - 1) <= 0.02,
            "lambda=%.4f throughput=%.4f delay=%.2f mean backlog=%.2f final backlog=%llu", lambda,
            m.throughput, m.mean_delay, m.mean_backlog,
            static_cast<unsigned long long>(m.final_backlog));
  return v;
}

Verdict trace() {
  Verdict v;
  SimConfig c;
  c.capability = 2;
  c.schedule = load_step_schedule();
  c.horizon = 100'000;
  c.warmup = 0;
  c.seed = 42;
  const auto t0 = std::chrono::steady_clock::now();
  const auto tr = run_trace_experiment(c, 100, 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double err = mean_tracking_error(tr);
  v.require(err < 5.0 && secs < 300, "100 episodes, mean |nu - n| = %.3f, %.1fs", err, secs);
  return v;
}

Verdict conservation() {
  Verdict v;
  std::size_t bad = 0;
  for (const auto& m : g_runs)
    if (m.total_arrivals != m.total_decoded + m.final_backlog) ++bad;
  v.require(bad == 0 && !g_runs.empty(), "%zu runs, %zu violations", g_runs.size(), bad);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::vector<int> known_red;
  std::vector<int> only;
  app.add_option("--known-red", known_red, "Criteria expected to fail")->delimiter(',');
  app.add_option("--only", only, "Run a subset")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  struct Criterion { int id; const char* name; double limit_s; std::function<Verdict()> run; };
  const std::vector<Criterion> criteria{
      {1, "optimal parameters, no SIC failure", 5, table_one},
      {2, "minimum resolve durations", 5, table_two},
      {3, "parameters with SIC failure 0.5", 10, tables_three_four},
      {4, "resolve procedure Monte Carlo vs recursion", 60, monte_carlo_srp},
      {5, "saturation throughput", 4 * 120, saturation},
      {6, "stable-region throughput and delay gap", 1e9, stable_region},
      {7, "Bayes conjugacy", 1e9, conjugacy},
      {8, "on-off arrivals stability", 1e9, on_off},
      {9, "backlog tracking experiment", 300, trace},
      {10, "conservation in every run", 1e9, conservation},
  };

  const std::set<int> red(known_red.begin(), known_red.end());
  const std::set<int> selected(only.begin(), only.end());
  int passed = 0, failed = 0, unexpected = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    auto v = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      std::printf("    MISS runtime %.1fs over %.0fs\n", secs, c.limit_s);
      v.pass = false;
    }
    const char* note = "";
    if (!v.pass && red.count(c.id)) note = "  (known deviation)";
    if (v.pass && red.count(c.id)) note = "  (listed as known red but passing)";
    std::printf("%s  criterion %2d: %s [%.2fs]%s\n\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                note);
    std::fflush(stdout);
    (v.pass ? passed : failed)++;
    if (!v.pass && !red.count(c.id)) ++unexpected;
  }
  std::printf("%d passed, %d failed, %d unexpected\n", passed, failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
