#include "dsas/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dsas {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smooth (raised-cosine) transition sampled onto 50 ms piecewise-linear
// knots, so scenario files stay in the plain (t, value) pair format.
void append_smooth_ramp(Profile& p, double t0, double t1, double v0,
                        double v1) {
  const double dt = 0.05;
  const int n = std::max(1, static_cast<int>(std::round((t1 - t0) / dt)));
  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double v = v0 + (v1 - v0) * 0.5 * (1.0 - std::cos(kPi * s));
    p.points.emplace_back(t0 + s * (t1 - t0), v);
  }
}

struct LoopSignals {
  double v_x, T_d, theta_d, mu, u_raw, u_sat, T_c, f_w, rho_c, T_ov, DS;
  Membership eta;
};

}  // namespace

Profile Profile::constant(double v) {
  Profile p;
  p.mode = Mode::hold;
  p.points = {{0.0, v}};
  return p;
}

double Profile::operator()(double t) const {
  if (points.empty()) return 0.0;
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  // Points are sorted; find the knot interval containing t.
  size_t hi = 1;
  while (points[hi].first < t) ++hi;
  const auto& [t0, v0] = points[hi - 1];
  const auto& [t1, v1] = points[hi];
  if (mode == Mode::hold) return t == t1 ? v1 : v0;
  const double s = (t - t0) / (t1 - t0);
  return v0 + s * (v1 - v0);
}

void Scenario::validate() const {
  if (!(duration > 0.0))
    throw std::domain_error("scenario: duration must be positive");
  if (!(step > 0.0 && step <= 0.01))
    throw std::domain_error("scenario: step must lie in (0, 0.01]");
}

std::pair<double, double> pdc_control(const SynthesisResult& gains,
                                      const TsModel& ts, const Vec6& x,
                                      double v_x, double mu) {
  const Membership eta = memberships(v_x, mu, ts.bounds);
  double u_raw = 0.0;
  for (int i = 0; i < TsModel::kRules; ++i)
    u_raw += eta[i] * (gains.K[i] * x)(0);
  const double u_sat =
      std::copysign(std::min(std::abs(u_raw), gains.u_max), u_raw);
  return {u_raw, u_sat};
}

Vec6 rk4_step(const std::function<Vec6(double, const Vec6&)>& f, double t,
              const Vec6& x, double h) {
  const Vec6 k1 = f(t, x);
  const Vec6 k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Vec6 k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Vec6 k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double rk4_step_scalar(const std::function<double(double, double)>& f,
                       double t, double x, double h) {
  const double k1 = f(t, x);
  const double k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const double k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const double k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

SimTrace run(const Scenario& sc, const SynthesisResult& gains,
             const TsModel& ts, const SimParams& params) {
  sc.validate();
  if (gains.ts_fingerprint != fingerprint(ts))
    throw std::runtime_error(
        "simulate: gains fingerprint does not match the vehicle model");

  const Eigen::LLT<Mat6> lyap(gains.X);
  if (lyap.info() != Eigen::Success)
    throw std::runtime_error("simulate: certificate X is not positive "
                             "definite");

  auto signals = [&](double t, const Vec6& x) {
    LoopSignals s;
    s.v_x = std::clamp(sc.v_x(t), ts.bounds.v_min, ts.bounds.v_max);
    s.f_w = sc.wind(t);
    s.rho_c = sc.curvature(t);
    s.DS = sc.ds(t);
    s.T_ov = sc.override_torque(t);
    s.T_d = driver_torque(x, params.vehicle, params.driver, s.v_x) + s.T_ov;
    s.theta_d = driver_activity(s.T_d, s.DS, params.activity);
    s.mu = weighting_mu(s.theta_d, params.weighting);
    s.eta = memberships(s.v_x, s.mu, ts.bounds);
    std::tie(s.u_raw, s.u_sat) = pdc_control(gains, ts, x, s.v_x, s.mu);
    s.T_c = s.mu * s.u_sat;
    return s;
  };

  auto deriv = [&](double t, const Vec6& x) -> Vec6 {
    const LoopSignals s = signals(t, x);
    const PlantMatrices pm = build_plant_matrices(params.vehicle, s.v_x);
    Vec6 dx = pm.A * x + pm.B * (s.T_c + s.T_d) + pm.B_w * s.f_w;
    dx(kHeading) -= s.v_x * s.rho_c;  // exogenous road-curvature channel
    return dx;
  };

  const int n = static_cast<int>(std::llround(sc.duration / sc.step));
  SimTrace trace;
  trace.samples.reserve(n + 1);
  Vec6 x = sc.x0;
  for (int k = 0; k <= n; ++k) {
    const double t = k * sc.step;
    if (!x.allFinite())
      throw std::runtime_error("simulate: NaN state at t = " +
                               std::to_string(t));
    const LoopSignals s = signals(t, x);
    SimSample rec;
    rec.t = t;
    rec.x = x;
    rec.T_d = s.T_d;
    rec.theta_d = s.theta_d;
    rec.mu = s.mu;
    rec.u_raw = s.u_raw;
    rec.u_sat = s.u_sat;
    rec.T_c = s.T_c;
    rec.f_w = s.f_w;
    rec.rho_c = s.rho_c;
    rec.T_ov = s.T_ov;
    rec.DS = s.DS;
    rec.eta = s.eta;
    rec.V = x.dot(lyap.solve(x));
    trace.samples.push_back(rec);
    if (k < n) x = rk4_step(deriv, t, x, sc.step);
  }
  return trace;
}

Scenario preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.step = 1e-3;
  if (name == "test1") {
    // Straight road, 1200 N lateral wind step on [70, 76] s.
    sc.duration = 100.0;
    sc.wind.mode = Profile::Mode::hold;
    sc.wind.points = {{0.0, 0.0}, {70.0, 1200.0}, {76.0, 0.0}};
    sc.ds = Profile::constant(1.0);
  } else if (name == "test2") {
    // Four assistance phases on a gently curved road.
    sc.duration = 55.0;
    sc.ds.mode = Profile::Mode::hold;
    sc.ds.points = {{0.0, 1.0}, {40.0, 0.1}};
    sc.override_torque.mode = Profile::Mode::linear;
    sc.override_torque.points = {{0.0, 0.0}, {18.0, 0.0}};
    append_smooth_ramp(sc.override_torque, 18.0, 19.0, 0.0, 5.6);
    sc.override_torque.points.emplace_back(35.0, 5.6);
    append_smooth_ramp(sc.override_torque, 35.0, 36.0, 5.6, 11.4);
    sc.override_torque.points.emplace_back(40.0, 11.4);
    append_smooth_ramp(sc.override_torque, 40.0, 41.0, 11.4, 0.0);
    sc.curvature.mode = Profile::Mode::linear;
    sc.curvature.points = {{0.0, 0.0},   {10.0, 0.0},   {15.0, 0.002},
                           {45.0, 0.002}, {50.0, 0.0},  {55.0, 0.0}};
  } else if (name == "test3") {
    // Driver lane-change attempt: blocked while distracted (DS = 0),
    // released once attentive (DS = 1).
    sc.duration = 76.0;
    sc.ds.mode = Profile::Mode::hold;
    sc.ds.points = {{0.0, 0.0}, {65.0, 1.0}};
    sc.override_torque.mode = Profile::Mode::linear;
    sc.override_torque.points = {{0.0, 0.0}, {60.0, 0.0}};
    append_smooth_ramp(sc.override_torque, 60.0, 62.0, 0.0, 6.0);
    sc.override_torque.points.emplace_back(73.0, 6.0);
    append_smooth_ramp(sc.override_torque, 73.0, 75.0, 6.0, 0.0);
  } else {
    throw std::runtime_error("preset: unknown scenario " + name);
  }
  // Sorted-knot sanity after the ramp splicing.
  auto sorted = [](const Profile& p) {
    return std::is_sorted(p.points.begin(), p.points.end(),
                          [](const auto& a, const auto& b) {
                            return a.first < b.first;
                          });
  };
  if (!sorted(sc.override_torque) || !sorted(sc.wind) || !sorted(sc.ds))
    throw std::logic_error("preset: unsorted profile knots");
  return sc;
}

ConstraintReport check_constraints(const SimTrace& trace,
                                   const std::vector<Vec6>& h_rows) {
  ConstraintReport report;
  report.rows.resize(h_rows.size());
  for (const auto& s : trace.samples) {
    for (size_t k = 0; k < h_rows.size(); ++k) {
      const double v = h_rows[k].dot(s.x);
      report.rows[k].max_value = std::max(report.rows[k].max_value, v);
    }
  }
  for (auto& row : report.rows) {
    row.violated = row.max_value > 1.0;
    report.any_violated = report.any_violated || row.violated;
  }
  return report;
}

LyapunovReport lyapunov_trace(const SimTrace& trace, double tau1) {
  constexpr double kTol = 0.05;
  LyapunovReport report;
  report.decay_ok = true;
  for (size_t k = 0; k + 1 < trace.samples.size(); ++k) {
    const auto& a = trace.samples[k];
    const auto& b = trace.samples[k + 1];
    report.max_V = std::max(report.max_V, a.V);
    const bool free_window = a.f_w == 0.0 && b.f_w == 0.0 &&
                             a.rho_c == 0.0 && b.rho_c == 0.0 &&
                             a.T_ov == 0.0 && b.T_ov == 0.0;
    if (!free_window || a.V > 1.0 || a.V < 1e-12) continue;
    const double dt = b.t - a.t;
    const double bound = a.V * std::exp(-tau1 * dt * (1.0 - kTol));
    const double ratio = b.V / std::max(bound, 1e-300);
    report.worst_ratio = std::max(report.worst_ratio, ratio);
    if (b.V > bound + 1e-12) report.decay_ok = false;
    ++report.checked_samples;
  }
  if (!trace.samples.empty())
    report.max_V = std::max(report.max_V, trace.samples.back().V);
  return report;
}

std::string csv_header() {
  std::string h =
      "t,v_y,r,psi_l,y_l,delta,delta_dot,T_d,theta_d,mu,u_raw,u_sat,T_c,"
      "f_w,rho_c,DS";
  for (int i = 1; i <= TsModel::kRules; ++i)
    h += ",eta_" + std::to_string(i);
  h += ",V";
  return h;
}

void write_csv(const SimTrace& trace, std::ostream& out) {
  out << csv_header() << "\n";
  std::string line;
  for (const auto& s : trace.samples) {
    line.clear();
    auto push = [&line](double v) {
      if (!line.empty()) line += ',';
      line += format_double(v);
    };
    push(s.t);
    for (int k = 0; k < 6; ++k) push(s.x(k));
    push(s.T_d);
    push(s.theta_d);
    push(s.mu);
    push(s.u_raw);
    push(s.u_sat);
    push(s.T_c);
    push(s.f_w);
    push(s.rho_c);
    push(s.DS);
    for (double e : s.eta) push(e);
    push(s.V);
    out << line << "\n";
  }
}

namespace {

Profile profile_from_config(const Config& cfg, const std::string& section) {
  Profile p;
  const std::string mode = cfg.text_or(section, "mode", "hold");
  if (mode == "hold")
    p.mode = Profile::Mode::hold;
  else if (mode == "linear")
    p.mode = Profile::Mode::linear;
  else
    throw std::runtime_error("scenario: unknown profile mode " + mode);
  const std::vector<double> flat = cfg.numbers(section, "points");
  if (flat.size() % 2 != 0)
    throw std::runtime_error("scenario: odd (t, value) list in " + section);
  for (size_t k = 0; k + 1 < flat.size(); k += 2)
    p.points.emplace_back(flat[k], flat[k + 1]);
  if (p.points.empty())
    throw std::runtime_error("scenario: empty profile in " + section);
  return p;
}

void profile_to_config(const Profile& p, const std::string& section,
                       Config& cfg) {
  cfg.set_text(section, "mode",
               p.mode == Profile::Mode::hold ? "hold" : "linear");
  std::vector<double> flat;
  for (const auto& [t, v] : p.points) {
    flat.push_back(t);
    flat.push_back(v);
  }
  cfg.set_numbers(section, "points", flat);
}

}  // namespace

Scenario scenario_from_config(const Config& cfg) {
  Scenario sc;
  sc.name = cfg.text_or("scenario", "name", "custom");
  sc.duration = cfg.number("scenario", "duration");
  sc.step = cfg.number("scenario", "step");
  const std::vector<double> x0 = cfg.numbers("scenario", "x0");
  if (x0.size() != 6)
    throw std::runtime_error("scenario: x0 must have 6 entries");
  for (int k = 0; k < 6; ++k) sc.x0(k) = x0[k];
  sc.v_x = profile_from_config(cfg, "profile.v_x");
  sc.wind = profile_from_config(cfg, "profile.wind");
  sc.curvature = profile_from_config(cfg, "profile.curvature");
  sc.ds = profile_from_config(cfg, "profile.ds");
  sc.override_torque = profile_from_config(cfg, "profile.override");
  sc.validate();
  return sc;
}

void scenario_to_config(const Scenario& sc, Config& cfg) {
  cfg.set_text("scenario", "name", sc.name);
  cfg.set_number("scenario", "duration", sc.duration);
  cfg.set_number("scenario", "step", sc.step);
  std::vector<double> x0(sc.x0.data(), sc.x0.data() + 6);
  cfg.set_numbers("scenario", "x0", x0);
  profile_to_config(sc.v_x, "profile.v_x", cfg);
  profile_to_config(sc.wind, "profile.wind", cfg);
  profile_to_config(sc.curvature, "profile.curvature", cfg);
  profile_to_config(sc.ds, "profile.ds", cfg);
  profile_to_config(sc.override_torque, "profile.override", cfg);
}

}  // namespace dsas
