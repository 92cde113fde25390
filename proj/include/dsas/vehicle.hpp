#pragma once

#include <Eigen/Dense>
#include <array>

#include "dsas/config.hpp"

namespace dsas {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Row6 = Eigen::Matrix<double, 1, 6>;

// State ordering, fixed project-wide:
//   x = [v_y (m/s), r (rad/s), psi_l (rad), y_l (m), delta (rad), delta_dot]
enum LateralStateIndex {
  kVy = 0,
  kYawRate = 1,
  kHeading = 2,
  kLateralOffset = 3,
  kSteerAngle = 4,
  kSteerRate = 5,
};

// Physical constants of the lateral bicycle model with steering column,
// plus the driver preview constants. All SI.
struct VehicleParams {
  double M = 1500.0;       // total mass, kg
  double l_f = 1.0065;     // CG to front axle, m
  double l_r = 1.4625;     // CG to rear axle, m
  double l_w = 0.4;        // CG to wind-force impact center, m
  double l_s = 5.0;        // look-ahead distance, m
  double eta_t = 0.13;     // tire contact length, m
  double I_z = 2454.0;     // yaw inertia, kg m^2
  double I_s = 0.05;       // steering system inertia, kg m^2
  double R_s = 16.0;       // steering gear ratio
  double B_s = 15.0;       // steering damping, N m s/rad
  double C_f = 94270.0;    // front cornering stiffness, N/rad
  double C_r = 113272.0;   // rear cornering stiffness, N/rad
  double C_x = 0.35;       // longitudinal drag coefficient (stored, unused)
  double C_y = 0.45;       // lateral drag coefficient (stored, unused)
  double tau_a = 0.5;      // time to tangent point, s
  double T_p = 0.8;        // driver preview time, s

  void validate() const;  // all strictly positive
};

// Driver feedback gains of the two-angle preview model. The defaults were
// chosen by a bracketed search so that the driver-only loop (no assistance)
// has all eigenvalues in the open left half plane at v_x = 15 m/s; see
// test_vehicle.cpp for the committed stability fixture.
struct DriverGains {
  double K_d1 = -60.0;  // near-angle gain, N m / rad
  double K_d2 = -2.0;   // far-angle gain, N m / rad
};

struct PlantMatrices {
  Mat6 A;     // lateral dynamics + steering column
  Vec6 B;     // torque channel, single nonzero entry rho in row 6
  Vec6 B_w;   // lateral wind force channel
};

// Torque-per-state coefficients of the flattened driver model:
//   T_d = T_d1 v_y + T_d2 r + K_d1 psi_l + T_d3 y_l + T_d4 delta
struct DriverCoeffs {
  double T_d1 = 0.0;
  double T_d2 = 0.0;
  double T_d3 = 0.0;
  double T_d4 = 0.0;
  double K_d1 = 0.0;
};

// Torque gain of the steering column input channel, 1/(I_s R_s).
double steering_gain(const VehicleParams& p);

PlantMatrices build_plant_matrices(const VehicleParams& p, double v_x);

DriverCoeffs build_driver_coeffs(const VehicleParams& p, const DriverGains& g,
                                 double v_x);

// Plant matrix with the driver model folded into the steering-column row.
Mat6 build_driver_in_loop(const VehicleParams& p, const DriverGains& g,
                          double v_x);

double driver_torque(const Vec6& x, const VehicleParams& p,
                     const DriverGains& g, double v_x);

// Every entry of the driver-in-the-loop matrix is affine in (v_x, 1/v_x).
// The two arguments substitute those occurrences independently, which is
// what makes the sector-nonlinearity vertices exact.
Mat6 driver_in_loop_affine(const VehicleParams& p, const DriverGains& g,
                           double z_v, double z_inv);

// Normalized polyhedral constraint rows: each row h satisfies h^T x <= 1.
// Order: +/- combined lane bound, +/- yaw rate, +/- heading, +/- steer rate.
std::array<Vec6, 8> state_constraint_rows(const VehicleParams& p);

// Config I/O, sections [vehicle] and [driver]; keys named after the
// physical symbols.
VehicleParams vehicle_params_from_config(const Config& cfg);
DriverGains driver_gains_from_config(const Config& cfg);
void vehicle_params_to_config(const VehicleParams& p, Config& cfg);
void driver_gains_to_config(const DriverGains& g, Config& cfg);

}  // namespace dsas
