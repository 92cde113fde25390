#include "dsas/vehicle.hpp"

#include <stdexcept>

namespace dsas {

namespace {

void require_speed(double v_x) {
  if (!(v_x > 0.0))
    throw std::domain_error("vehicle: longitudinal speed must be positive");
}

}  // namespace

void VehicleParams::validate() const {
  const std::pair<const char*, double> vals[] = {
      {"M", M},     {"l_f", l_f},     {"l_r", l_r}, {"l_w", l_w},
      {"l_s", l_s}, {"eta_t", eta_t}, {"I_z", I_z}, {"I_s", I_s},
      {"R_s", R_s}, {"B_s", B_s},     {"C_f", C_f}, {"C_r", C_r},
      {"C_x", C_x}, {"C_y", C_y},     {"tau_a", tau_a}, {"T_p", T_p}};
  for (const auto& [name, v] : vals)
    if (!(v > 0.0))
      throw std::domain_error(std::string("vehicle: parameter ") + name +
                              " must be strictly positive");
}

double steering_gain(const VehicleParams& p) { return 1.0 / (p.I_s * p.R_s); }

Mat6 driver_in_loop_affine(const VehicleParams& p, const DriverGains& g,
                           double z_v, double z_inv) {
  const double a11 = -(p.C_r + p.C_f) / p.M * z_inv;
  const double a12 = -z_v + (p.l_r * p.C_r - p.l_f * p.C_f) / p.M * z_inv;
  const double a21 = (p.l_r * p.C_r - p.l_f * p.C_f) / p.I_z * z_inv;
  const double a22 =
      -(p.l_r * p.l_r * p.C_r + p.l_f * p.l_f * p.C_f) / p.I_z * z_inv;
  const double b1 = p.C_f / p.M;
  const double b2 = p.l_f * p.C_f / p.I_z;
  const double col = p.C_f * p.eta_t / (p.I_s * p.R_s * p.R_s);
  const double Ts1 = col * z_inv;
  const double Ts2 = col * p.l_f * z_inv;
  const double Ts3 = -col;
  const double Ts4 = -p.B_s / p.I_s;
  const double rho = steering_gain(p);

  const double Td1 = g.K_d2 * p.tau_a * p.tau_a * a21;
  const double Td2 = g.K_d2 * (p.tau_a + p.tau_a * p.tau_a * a22);
  const double Td3 = g.K_d1 / p.T_p * z_inv;
  const double Td4 = g.K_d2 * p.tau_a * p.tau_a * b2 * p.R_s;

  Mat6 A = Mat6::Zero();
  A(0, 0) = a11;
  A(0, 1) = a12;
  A(0, 4) = b1;
  A(1, 0) = a21;
  A(1, 1) = a22;
  A(1, 4) = b2;
  A(2, 1) = 1.0;
  A(3, 0) = 1.0;
  A(3, 1) = p.l_s;
  A(3, 2) = z_v;
  A(4, 5) = 1.0;
  A(5, 0) = Ts1 + rho * Td1;
  A(5, 1) = Ts2 + rho * Td2;
  A(5, 2) = rho * g.K_d1;
  A(5, 3) = rho * Td3;
  A(5, 4) = Ts3 + rho * Td4;
  A(5, 5) = Ts4;
  return A;
}

PlantMatrices build_plant_matrices(const VehicleParams& p, double v_x) {
  require_speed(v_x);
  PlantMatrices m;
  m.A = driver_in_loop_affine(p, DriverGains{0.0, 0.0}, v_x, 1.0 / v_x);
  m.B = Vec6::Zero();
  m.B(5) = steering_gain(p);
  m.B_w = Vec6::Zero();
  m.B_w(0) = 1.0 / p.M;
  m.B_w(1) = p.l_w / p.I_z;
  return m;
}

DriverCoeffs build_driver_coeffs(const VehicleParams& p, const DriverGains& g,
                                 double v_x) {
  require_speed(v_x);
  const double a21 = (p.l_r * p.C_r - p.l_f * p.C_f) / (p.I_z * v_x);
  const double a22 =
      -(p.l_r * p.l_r * p.C_r + p.l_f * p.l_f * p.C_f) / (p.I_z * v_x);
  const double b2 = p.l_f * p.C_f / p.I_z;
  DriverCoeffs c;
  c.T_d1 = g.K_d2 * p.tau_a * p.tau_a * a21;
  c.T_d2 = g.K_d2 * (p.tau_a + p.tau_a * p.tau_a * a22);
  c.T_d3 = g.K_d1 / (v_x * p.T_p);
  c.T_d4 = g.K_d2 * p.tau_a * p.tau_a * b2 * p.R_s;
  c.K_d1 = g.K_d1;
  return c;
}

Mat6 build_driver_in_loop(const VehicleParams& p, const DriverGains& g,
                          double v_x) {
  require_speed(v_x);
  return driver_in_loop_affine(p, g, v_x, 1.0 / v_x);
}

double driver_torque(const Vec6& x, const VehicleParams& p,
                     const DriverGains& g, double v_x) {
  const DriverCoeffs c = build_driver_coeffs(p, g, v_x);
  return c.T_d1 * x(kVy) + c.T_d2 * x(kYawRate) + c.K_d1 * x(kHeading) +
         c.T_d3 * x(kLateralOffset) + c.T_d4 * x(kSteerAngle);
}

std::array<Vec6, 8> state_constraint_rows(const VehicleParams& p) {
  std::array<Vec6, 8> rows;
  for (auto& r : rows) r = Vec6::Zero();
  // |y_l + (l_f - l_s) psi_l| <= 1.75
  rows[0](kHeading) = (p.l_f - p.l_s) / 1.75;
  rows[0](kLateralOffset) = 1.0 / 1.75;
  rows[1] = -rows[0];
  // |r| <= 0.51
  rows[2](kYawRate) = 1.0 / 0.51;
  rows[3] = -rows[2];
  // |psi_l| <= 0.087
  rows[4](kHeading) = 1.0 / 0.087;
  rows[5] = -rows[4];
  // |delta_dot| <= 0.1047
  rows[6](kSteerRate) = 1.0 / 0.1047;
  rows[7] = -rows[6];
  return rows;
}

VehicleParams vehicle_params_from_config(const Config& cfg) {
  VehicleParams d;
  VehicleParams p;
  p.M = cfg.number_or("vehicle", "M", d.M);
  p.l_f = cfg.number_or("vehicle", "l_f", d.l_f);
  p.l_r = cfg.number_or("vehicle", "l_r", d.l_r);
  p.l_w = cfg.number_or("vehicle", "l_w", d.l_w);
  p.l_s = cfg.number_or("vehicle", "l_s", d.l_s);
  p.eta_t = cfg.number_or("vehicle", "eta_t", d.eta_t);
  p.I_z = cfg.number_or("vehicle", "I_z", d.I_z);
  p.I_s = cfg.number_or("vehicle", "I_s", d.I_s);
  p.R_s = cfg.number_or("vehicle", "R_s", d.R_s);
  p.B_s = cfg.number_or("vehicle", "B_s", d.B_s);
  p.C_f = cfg.number_or("vehicle", "C_f", d.C_f);
  p.C_r = cfg.number_or("vehicle", "C_r", d.C_r);
  p.C_x = cfg.number_or("vehicle", "C_x", d.C_x);
  p.C_y = cfg.number_or("vehicle", "C_y", d.C_y);
  p.tau_a = cfg.number_or("vehicle", "tau_a", d.tau_a);
  p.T_p = cfg.number_or("vehicle", "T_p", d.T_p);
  p.validate();
  return p;
}

DriverGains driver_gains_from_config(const Config& cfg) {
  DriverGains d;
  DriverGains g;
  g.K_d1 = cfg.number_or("driver", "K_d1", d.K_d1);
  g.K_d2 = cfg.number_or("driver", "K_d2", d.K_d2);
  return g;
}

void vehicle_params_to_config(const VehicleParams& p, Config& cfg) {
  cfg.set_number("vehicle", "M", p.M);
  cfg.set_number("vehicle", "l_f", p.l_f);
  cfg.set_number("vehicle", "l_r", p.l_r);
  cfg.set_number("vehicle", "l_w", p.l_w);
  cfg.set_number("vehicle", "l_s", p.l_s);
  cfg.set_number("vehicle", "eta_t", p.eta_t);
  cfg.set_number("vehicle", "I_z", p.I_z);
  cfg.set_number("vehicle", "I_s", p.I_s);
  cfg.set_number("vehicle", "R_s", p.R_s);
  cfg.set_number("vehicle", "B_s", p.B_s);
  cfg.set_number("vehicle", "C_f", p.C_f);
  cfg.set_number("vehicle", "C_r", p.C_r);
  cfg.set_number("vehicle", "C_x", p.C_x);
  cfg.set_number("vehicle", "C_y", p.C_y);
  cfg.set_number("vehicle", "tau_a", p.tau_a);
  cfg.set_number("vehicle", "T_p", p.T_p);
}

void driver_gains_to_config(const DriverGains& g, Config& cfg) {
  cfg.set_number("driver", "K_d1", g.K_d1);
  cfg.set_number("driver", "K_d2", g.K_d2);
}

}  // namespace dsas
