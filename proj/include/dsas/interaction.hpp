#pragma once

#include "dsas/config.hpp"

namespace dsas {

// Shape of the U-shaped assistance weighting (generalized bell).
struct WeightingParams {
  double omega_1 = 0.38;
  double omega_2 = -2.0;
  double omega_3 = 0.5;
  double mu_min = 0.25;

  void validate() const;  // omega_1 > 0, 0 < mu_min <= 1
};

// Driver-activity fusion of normalized torque and monitored driver state.
struct ActivityParams {
  double sigma_1 = 2.0;
  double sigma_2 = 3.0;
  double sigma_3 = 3.0;
  double T_d_max = 15.0;  // normalization torque, N m

  void validate() const;
};

// Assistance level mu(theta_d) in [mu_min, 1].
//
// At theta_d == omega_3 the raw bell expression divides by zero in its base
// (negative omega_2); the continuous one-sided limit mu_min is returned.
// The raw bell tops out at 1 + mu_min; the result is clamped to 1 so the
// synthesis bound mu <= 1 always holds.
double weighting_mu(double theta_d, const WeightingParams& w);

// Driver activity theta_d in [0, 1). DS outside [0,1] is a domain error;
// torques above T_d_max saturate the normalized torque at 1.
double driver_activity(double T_d, double DS, const ActivityParams& a);

// Applied assistance torque T_c = mu(theta_d) * u.
double assistance_torque(double u, double theta_d, const WeightingParams& w);

WeightingParams weighting_params_from_config(const Config& cfg);
ActivityParams activity_params_from_config(const Config& cfg);
void weighting_params_to_config(const WeightingParams& w, Config& cfg);
void activity_params_to_config(const ActivityParams& a, Config& cfg);

}  // namespace dsas
