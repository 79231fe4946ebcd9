// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sicra/sicra.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("status reporting") {
  CHECK(std::strlen(sicra_version()) > 0);
  CHECK(std::string(sicra_status_name(SICRA_ERR_CONFIG)) == "configuration error");
  double out = 0;
  CHECK(sicra_binom_pmf(10, 3, 0.3, nullptr) == SICRA_ERR_NULL_ARG);
  CHECK(std::strlen(sicra_last_error()) > 0);
  CHECK(sicra_binom_pmf(10, 3, 0.3, &out) == SICRA_OK);
  CHECK(std::string(sicra_last_error()).empty());
  CHECK(out == doctest::Approx(0.26682793).epsilon(1e-8));
  CHECK(sicra_binom_pmf(10, 3, 1.5, &out) == SICRA_ERR_DOMAIN);
  CHECK(sicra_optimal_p_known_n(0, 1, nullptr, 0, &out) == SICRA_ERR_DOMAIN);
}

TEST_CASE("analysis entry points") {
  double x = 0, s = 0, c = 0;
  const double d2[] = {2.0};
  REQUIRE(sicra_optimize_x(2, d2, 1, &x, &s) == SICRA_OK);
  CHECK(x == doctest::Approx(1.378).epsilon(0.004));
  CHECK(s == doctest::Approx(0.5586).epsilon(1e-4));
  REQUIRE(sicra_collision_offset(x, 2, &c) == SICRA_OK);
  CHECK(c == doctest::Approx(2.0458).epsilon(0.003));

  const double probs[] = {0.5};
  double clean = 0, failed = 0;
  REQUIRE(sicra_expected_srp_duration(2, probs, 1, 0.5, &clean, &failed) == SICRA_OK);
  CHECK(clean == doctest::Approx(2.0));
  CHECK(failed == doctest::Approx(3.0));
  CHECK(sicra_expected_srp_duration(3, probs, 1, 0.0, &clean, nullptr) == SICRA_ERR_CONFIG);
  CHECK(sicra_service_rate_poisson(1.0, 2, d2, 0, &s) == SICRA_ERR_CONFIG);
}

TEST_CASE("policy handles") {
  sicra_policy* p = nullptr;
  REQUIRE(sicra_policy_build(3, 0.5, SICRA_RETX_OPTIMIZED, &p) == SICRA_OK);
  sicra_policy_info info;
  REQUIRE(sicra_policy_get_info(p, &info) == SICRA_OK);
  CHECK(info.M == 3);
  CHECK(info.s_star == doctest::Approx(0.5155).epsilon(0.005 / 0.5155));
  double v = 0;
  CHECK(sicra_policy_srp_mean(p, 3, &v) == SICRA_OK);
  CHECK(v == doctest::Approx(4.788).epsilon(0.01 / 4.788));
  CHECK(sicra_policy_srp_mean(p, 4, &v) == SICRA_ERR_DOMAIN);

  std::size_t needed = 0;
  CHECK(sicra_policy_serialize(p, nullptr, 0, &needed) == SICRA_OK);
  std::vector<char> buf(needed);
  REQUIRE(sicra_policy_serialize(p, buf.data(), buf.size(), &needed) == SICRA_OK);
  sicra_policy* q = nullptr;
  REQUIRE(sicra_policy_parse(buf.data(), &q) == SICRA_OK);
  sicra_policy_info qi;
  sicra_policy_get_info(q, &qi);
  CHECK(qi.x_star == info.x_star);

  const auto path = tmp_path("sicra_capi_policy.txt");
  CHECK(sicra_policy_save(p, path.c_str()) == SICRA_OK);
  sicra_policy* r = nullptr;
  CHECK(sicra_policy_load(path.c_str(), &r) == SICRA_OK);
  CHECK(sicra_policy_load("/nonexistent/policy.txt", &r) == SICRA_ERR_IO);
  CHECK(sicra_policy_parse("M = 2\n", &r) == SICRA_ERR_CONFIG);
  std::remove(path.c_str());

  sicra_policy_free(r);
  sicra_policy_free(q);
  sicra_policy_free(p);
  sicra_policy_free(nullptr);
}

TEST_CASE("estimator handle") {
  sicra_policy* p = nullptr;
  REQUIRE(sicra_policy_build(2, 0.0, SICRA_RETX_OPTIMIZED, &p) == SICRA_OK);
  sicra_policy_info info;
  sicra_policy_get_info(p, &info);
  sicra_estimator* e = nullptr;
  REQUIRE(sicra_estimator_create(p, 0.99, &e) == SICRA_OK);
  CHECK(sicra_estimator_on_event(e, SICRA_EVENT_IDLE, 0, 0) == SICRA_OK);
  sicra_estimator_state st;
  REQUIRE(sicra_estimator_get_state(e, &st) == SICRA_OK);
  CHECK(st.nu == doctest::Approx(10 - info.x_star + 0.495));
  CHECK(sicra_estimator_on_event(e, SICRA_EVENT_SRP_COMPLETE, 3, 4) == SICRA_ERR_PROTOCOL);
  CHECK(sicra_estimator_on_event(e, static_cast<sicra_event_kind>(9), 0, 0) == SICRA_ERR_PROTOCOL);
  CHECK(sicra_estimator_create(p, 2.0, &e) == SICRA_ERR_CONFIG);
  sicra_estimator_free(e);
  sicra_policy_free(p);
}

TEST_CASE("resolve procedure") {
  const double probs[] = {0.5, 0.5, 0.5};
  std::uint64_t dur = 0, slots[4];
  REQUIRE(sicra_srp_run(4, probs, 3, 0.5, 9, &dur, slots) == SICRA_OK);
  for (auto s : slots) CHECK((s >= 1 && s <= dur));
  sicra_srp_report rep;
  REQUIRE(sicra_srp_validate(2, 0.5, SICRA_RETX_OPTIMIZED, 20000, 3, &rep) == SICRA_OK);
  CHECK(rep.analytic_mean == doctest::Approx(3.0));
  CHECK(rep.passed);
  const auto path = tmp_path("sicra_capi_srp.csv");
  CHECK(sicra_srp_write_trace(4, 0.5, SICRA_RETX_HALF, 1, path.c_str()) == SICRA_OK);
  CHECK(std::filesystem::file_size(path) > 0);
  std::remove(path.c_str());
}

TEST_CASE("simulation handles") {
  sicra_sim_config c;
  sicra_sim_config_default(&c);
  CHECK(c.M == 2);
  CHECK(c.horizon == 1000000);
  c.horizon = 50000;
  c.record_backlog = 1;
  sicra_sim_result* r = nullptr;
  REQUIRE(sicra_simulate(&c, &r) == SICRA_OK);
  sicra_sim_summary s;
  REQUIRE(sicra_sim_get_summary(r, &s) == SICRA_OK);
  CHECK(s.total_arrivals == s.total_decoded + s.final_backlog);
  std::size_t len = 0;
  CHECK(sicra_sim_delay_histogram(r, nullptr, 0, &len) == SICRA_OK);
  CHECK(len == 1024);
  const auto csv = tmp_path("sicra_capi_backlog.csv");
  CHECK(sicra_sim_write_backlog_csv(r, csv.c_str()) == SICRA_OK);
  CHECK(sicra_sim_write_summary_csv(r, csv.c_str()) == SICRA_OK);
  CHECK(sicra_sim_write_events_csv(r, "/nonexistent/dir/e.csv") == SICRA_ERR_IO);
  std::remove(csv.c_str());
  sicra_sim_result_free(r);

  c.warmup = c.horizon;
  CHECK(sicra_simulate(&c, &r) == SICRA_ERR_CONFIG);
  CHECK(std::string(sicra_last_error()).find("warmup") != std::string::npos);
}

TEST_CASE("sweep and trace handles") {
  sicra_sim_config c;
  sicra_sim_config_default(&c);
  c.horizon = 20000;
  c.warmup = 1000;
  const double grid[] = {0.1, 0.3};
  sicra_sweep* sw = nullptr;
  REQUIRE(sicra_sweep_run(&c, grid, 2, 2, &sw) == SICRA_OK);
  CHECK(sicra_sweep_size(sw) == 2);
  double lambda = 0;
  sicra_sim_summary s;
  CHECK(sicra_sweep_point(sw, 1, &lambda, &s) == SICRA_OK);
  CHECK(lambda == 0.3);
  CHECK(sicra_sweep_point(sw, 2, &lambda, &s) == SICRA_ERR_DOMAIN);
  sicra_sweep_free(sw);

  sicra_rate_step steps[4];
  const std::size_t n = sicra_load_step_schedule(steps, 4);
  REQUIRE(n == 3);
  CHECK(steps[1].start == 30001);
  c.schedule = steps;
  c.schedule_len = n;
  c.horizon = 100000;
  c.warmup = 0;
  sicra_trace* t = nullptr;
  REQUIRE(sicra_trace_run(&c, 4, 2, &t) == SICRA_OK);
  CHECK(sicra_trace_size(t) == 100000);
  double err = 0;
  CHECK(sicra_trace_tracking_error(t, &err) == SICRA_OK);
  CHECK(err < 5.0);
  std::uint64_t slot = 0;
  double n_true = 0, nu = 0;
  CHECK(sicra_trace_point(t, 0, &slot, &n_true, &nu) == SICRA_OK);
  CHECK(slot == 1);
  sicra_trace_free(t);
}
