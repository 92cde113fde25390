#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dsas/sim.hpp"

using namespace dsas;

namespace {

// Gains object that applies no assistance but is structurally valid for the
// simulator (identity Lyapunov matrix, zero feedback rows).
SynthesisResult passive_gains(const TsModel& ts) {
  SynthesisResult r;
  r.X = Mat6::Identity();
  r.tau1 = 0.1;
  r.tau2 = 0.05;
  r.gamma = 1.0;
  r.u_max = 15.0;
  for (int i = 0; i < TsModel::kRules; ++i) r.K[i] = Row6::Zero();
  r.ts_fingerprint = fingerprint(ts);
  return r;
}

TsModel default_model() {
  return build_ts_model(VehicleParams{}, DriverGains{}, SchedulingBounds{},
                        default_output_matrix());
}

}  // namespace

TEST_CASE("rk4 solves the exponential to 8 digits") {
  auto f = [](double, double x) { return -x; };
  double x = 1.0;
  const double h = 1e-3;
  for (int k = 0; k < 1000; ++k) x = rk4_step_scalar(f, k * h, x, h);
  CHECK(std::abs(x - std::exp(-1.0)) <= 1e-8);
}

TEST_CASE("rk4 shows fourth-order step scaling") {
  auto f = [](double t, double x) { return std::cos(t) * x; };
  auto err_at = [&](double h) {
    double x = 1.0;
    const int n = static_cast<int>(std::llround(1.0 / h));
    for (int k = 0; k < n; ++k) x = rk4_step_scalar(f, k * h, x, h);
    return std::abs(x - std::exp(std::sin(1.0)));
  };
  const double e1 = err_at(0.02);
  const double e2 = err_at(0.01);
  CHECK(e1 / e2 > 12.0);  // ~16 for order 4
  CHECK(e1 / e2 < 20.0);

  // Vector variant agrees with the scalar one on a diagonal system.
  auto fv = [](double, const Vec6& x) { return Vec6(-x); };
  Vec6 xv = Vec6::Ones();
  for (int k = 0; k < 1000; ++k) xv = rk4_step(fv, k * 1e-3, xv, 1e-3);
  CHECK(std::abs(xv(0) - std::exp(-1.0)) <= 1e-8);
}

TEST_CASE("profiles") {
  Profile p;
  p.mode = Profile::Mode::linear;
  p.points = {{0.0, 0.0}, {1.0, 2.0}, {3.0, 2.0}};
  CHECK(p(-1.0) == 0.0);
  CHECK(p(0.5) == doctest::Approx(1.0));
  CHECK(p(2.0) == doctest::Approx(2.0));
  CHECK(p(5.0) == 2.0);

  p.mode = Profile::Mode::hold;
  CHECK(p(0.5) == 0.0);
  CHECK(p(1.0) == 2.0);
  CHECK(p(2.9) == 2.0);

  CHECK(Profile::constant(4.0)(123.0) == 4.0);
}

TEST_CASE("scenario validation and presets") {
  CHECK_THROWS_AS(Scenario{}.validate(), std::domain_error);
  Scenario bad;
  bad.duration = 10.0;
  bad.step = 0.5;  // too coarse
  CHECK_THROWS_AS(bad.validate(), std::domain_error);

  const Scenario t1 = preset("test1");
  CHECK(t1.duration == 100.0);
  CHECK(t1.wind(69.9) == 0.0);
  CHECK(t1.wind(70.5) == 1200.0);
  CHECK(t1.wind(76.5) == 0.0);
  CHECK(t1.ds(50.0) == 1.0);

  const Scenario t3 = preset("test3");
  CHECK(t3.ds(10.0) == 0.0);
  CHECK(t3.ds(70.0) == 1.0);
  CHECK(t3.override_torque(30.0) == 0.0);
  CHECK(t3.override_torque(65.0) == doctest::Approx(6.0));

  CHECK_THROWS(preset("test9"));
}

TEST_CASE("closed-loop run with passive gains") {
  const TsModel ts = default_model();
  const SynthesisResult gains = passive_gains(ts);
  SimParams params;

  Scenario sc = preset("test1");
  sc.duration = 2.0;
  const SimTrace trace = run(sc, gains, ts, params);
  REQUIRE(trace.samples.size() == 2001);

  SUBCASE("logging honesty") {
    // Every logged derived quantity recomputes from the logged state.
    for (size_t k = 0; k < trace.samples.size(); k += 97) {
      const SimSample& s = trace.samples[k];
      CHECK(std::abs(s.T_c - s.mu * s.u_sat) < 1e-12);
      CHECK(std::abs(s.V - s.x.squaredNorm()) < 1e-12);  // X = I
      double sum = 0.0;
      for (double e : s.eta) sum += e;
      CHECK(std::abs(sum - 1.0) < 1e-12);
      CHECK(std::abs(s.u_sat) <= gains.u_max);
      CHECK(std::abs(s.theta_d -
                     driver_activity(s.T_d, s.DS, params.activity)) < 1e-12);
      CHECK(std::abs(s.mu - weighting_mu(s.theta_d, params.weighting)) <
            1e-12);
    }
  }

  SUBCASE("halving the step barely moves the endpoint") {
    Scenario half = sc;
    half.step = 5e-4;
    const SimTrace fine = run(half, gains, ts, params);
    const Vec6 a = trace.samples.back().x;
    const Vec6 b = fine.samples.back().x;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("fingerprint mismatch is rejected") {
    SynthesisResult stale = gains;
    stale.ts_fingerprint ^= 0xdeadbeef;
    CHECK_THROWS_AS(run(sc, stale, ts, params), std::runtime_error);
  }
}

TEST_CASE("constraint checker flags excursions") {
  SimTrace trace;
  SimSample s;
  s.x = Vec6::Zero();
  s.x(kYawRate) = 0.3;
  trace.samples.push_back(s);
  s.x(kYawRate) = 0.6;  // beyond 0.51
  trace.samples.push_back(s);

  const auto rows = state_constraint_rows(VehicleParams{});
  const auto report =
      check_constraints(trace, std::vector<Vec6>(rows.begin(), rows.end()));
  CHECK(report.any_violated);
  CHECK(report.rows[2].violated);          // +r row
  CHECK_FALSE(report.rows[3].violated);    // -r row never exceeded
  CHECK(report.rows[2].max_value == doctest::Approx(0.6 / 0.51));
}

TEST_CASE("csv output") {
  const TsModel ts = default_model();
  const SynthesisResult gains = passive_gains(ts);
  Scenario sc = preset("test1");
  sc.duration = 0.01;
  const SimTrace trace = run(sc, gains, ts, SimParams{});
  std::ostringstream out;
  write_csv(trace, out);
  const std::string text = out.str();
  CHECK(text.rfind(csv_header() + "\n", 0) == 0);
  // Rows: header + 11 samples.
  size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 12);
}

TEST_CASE("scenario config round trip") {
  Scenario sc = preset("test2");
  Config cfg;
  scenario_to_config(sc, cfg);
  const Scenario back = scenario_from_config(Config::parse(cfg.serialize()));
  CHECK(back.duration == sc.duration);
  CHECK(back.step == sc.step);
  CHECK(back.name == sc.name);
  for (double t : {0.0, 17.5, 18.5, 36.0, 41.0, 54.0}) {
    CHECK(back.override_torque(t) == sc.override_torque(t));
    CHECK(back.ds(t) == sc.ds(t));
    CHECK(back.curvature(t) == sc.curvature(t));
  }
}

TEST_CASE("lyapunov trace checker") {
  // Synthetic trace with exact exponential decay at rate 0.8, 1 ms steps.
  auto make = [](double rate, double f_w) {
    SimTrace trace;
    for (int k = 0; k <= 1000; ++k) {
      SimSample s;
      s.t = 1e-3 * k;
      s.V = 0.5 * std::exp(-rate * s.t);
      s.f_w = f_w;
      trace.samples.push_back(s);
    }
    return trace;
  };

  SUBCASE("decay at the claimed rate passes") {
    const auto report = lyapunov_trace(make(0.8, 0.0), 0.8);
    CHECK(report.decay_ok);
    CHECK(report.checked_samples == 1000);
    CHECK(report.worst_ratio < 1.0);
    CHECK(report.max_V == doctest::Approx(0.5));
  }

  SUBCASE("decay below the claimed rate fails") {
    const auto report = lyapunov_trace(make(0.4, 0.0), 0.8);
    CHECK_FALSE(report.decay_ok);
    CHECK(report.worst_ratio > 1.0);
  }

  SUBCASE("disturbed windows are skipped") {
    const auto report = lyapunov_trace(make(0.4, 1200.0), 0.8);
    CHECK(report.checked_samples == 0);
    CHECK(report.decay_ok);
  }
}
