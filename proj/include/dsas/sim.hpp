#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dsas/interaction.hpp"
#include "dsas/synthesis.hpp"
#include "dsas/ts_model.hpp"
#include "dsas/vehicle.hpp"

namespace dsas {

// Time profile: sorted (t, value) knots with hold or linear interpolation.
// Evaluation clamps to the first/last knot outside the covered range.
struct Profile {
  enum class Mode { hold, linear };
  Mode mode = Mode::hold;
  std::vector<std::pair<double, double>> points;

  double operator()(double t) const;
  static Profile constant(double v);
};

struct Scenario {
  std::string name = "custom";
  double duration = 0.0;  // s
  double step = 1e-3;     // s
  Profile v_x = Profile::constant(15.0);
  Profile wind = Profile::constant(0.0);        // f_w(t), N
  Profile curvature = Profile::constant(0.0);   // rho_c(t), 1/m
  Profile ds = Profile::constant(1.0);          // driver state in [0,1]
  Profile override_torque = Profile::constant(0.0);  // added to model torque
  Vec6 x0 = Vec6::Zero();

  void validate() const;  // duration > 0, step in (0, 0.01]
};

struct SimParams {
  VehicleParams vehicle;
  DriverGains driver;
  WeightingParams weighting;
  ActivityParams activity;
};

struct SimSample {
  double t = 0.0;
  Vec6 x = Vec6::Zero();
  double T_d = 0.0;      // total measured driver torque (model + override)
  double theta_d = 0.0;
  double mu = 0.0;
  double u_raw = 0.0;
  double u_sat = 0.0;
  double T_c = 0.0;
  double f_w = 0.0;
  double rho_c = 0.0;
  double T_ov = 0.0;  // externally scripted torque component of T_d
  double DS = 0.0;
  Membership eta{};
  double V = 0.0;  // x^T X^{-1} x
};

struct SimTrace {
  std::vector<SimSample> samples;
};

// Blended PDC control torque before and after saturation.
std::pair<double, double> pdc_control(const SynthesisResult& gains,
                                      const TsModel& ts, const Vec6& x,
                                      double v_x, double mu);

// One classical RK4 step of a generic ODE x' = f(t, x).
Vec6 rk4_step(const std::function<Vec6(double, const Vec6&)>& f, double t,
              const Vec6& x, double h);
double rk4_step_scalar(const std::function<double(double, double)>& f,
                       double t, double x, double h);

// Full closed-loop run. Throws on NaN with the offending time in the
// message. The gains fingerprint must match the model.
SimTrace run(const Scenario& sc, const SynthesisResult& gains,
             const TsModel& ts, const SimParams& params);

Scenario preset(const std::string& name);  // test1, test2, test3

struct ConstraintReport {
  struct Row {
    double max_value = 0.0;  // max over time of h_k^T x
    bool violated = false;
  };
  std::vector<Row> rows;
  bool any_violated = false;
};

ConstraintReport check_constraints(const SimTrace& trace,
                                   const std::vector<Vec6>& h_rows);

struct LyapunovReport {
  double worst_ratio = 0.0;  // max over checked windows of V(t+dt)/bound
  double max_V = 0.0;        // max V anywhere on the trace
  int checked_samples = 0;
  bool decay_ok = false;
};

// Checks V(t+dt) <= V(t) exp(-tau1 dt (1 - tol)) over disturbance-free
// samples inside the invariant ellipsoid, tol = 0.05.
LyapunovReport lyapunov_trace(const SimTrace& trace, double tau1);

// CSV with a fixed header; 17 significant digits.
void write_csv(const SimTrace& trace, std::ostream& out);
std::string csv_header();

// Scenario file I/O in the layered key-value format.
Scenario scenario_from_config(const Config& cfg);
void scenario_to_config(const Scenario& sc, Config& cfg);

}  // namespace dsas
