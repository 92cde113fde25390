#include "dsas/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsas {

void WeightingParams::validate() const {
  if (!(omega_1 > 0.0))
    throw std::domain_error("weighting: omega_1 must be positive");
  if (!(mu_min > 0.0 && mu_min <= 1.0))
    throw std::domain_error("weighting: mu_min must be in (0, 1]");
}

void ActivityParams::validate() const {
  if (!(sigma_1 > 0.0 && sigma_2 > 0.0 && sigma_3 > 0.0))
    throw std::domain_error("activity: sigma parameters must be positive");
  if (!(T_d_max > 0.0))
    throw std::domain_error("activity: T_d_max must be positive");
}

double weighting_mu(double theta_d, const WeightingParams& w) {
  if (!std::isfinite(theta_d))
    throw std::domain_error("weighting: theta_d must be finite");
  double mu;
  const double base = std::abs((theta_d - w.omega_3) / w.omega_1);
  if (base == 0.0 && w.omega_2 < 0.0) {
    // |.|^{2 omega_2} -> +inf as base -> 0, so the bell term vanishes.
    mu = w.mu_min;
  } else {
    mu = 1.0 / (1.0 + std::pow(base, 2.0 * w.omega_2)) + w.mu_min;
  }
  return std::clamp(mu, w.mu_min, 1.0);
}

double driver_activity(double T_d, double DS, const ActivityParams& a) {
  if (!(DS >= 0.0 && DS <= 1.0))
    throw std::domain_error("activity: DS must lie in [0, 1]");
  const double T_dN = std::min(std::abs(T_d / a.T_d_max), 1.0);
  const double expo =
      std::pow(a.sigma_1 * T_dN, a.sigma_2) * std::pow(DS, a.sigma_3);
  return 1.0 - std::exp(-expo);
}

double assistance_torque(double u, double theta_d, const WeightingParams& w) {
  return weighting_mu(theta_d, w) * u;
}

WeightingParams weighting_params_from_config(const Config& cfg) {
  WeightingParams d;
  WeightingParams w;
  w.omega_1 = cfg.number_or("weighting", "omega_1", d.omega_1);
  w.omega_2 = cfg.number_or("weighting", "omega_2", d.omega_2);
  w.omega_3 = cfg.number_or("weighting", "omega_3", d.omega_3);
  w.mu_min = cfg.number_or("weighting", "mu_min", d.mu_min);
  w.validate();
  return w;
}

ActivityParams activity_params_from_config(const Config& cfg) {
  ActivityParams d;
  ActivityParams a;
  a.sigma_1 = cfg.number_or("activity", "sigma_1", d.sigma_1);
  a.sigma_2 = cfg.number_or("activity", "sigma_2", d.sigma_2);
  a.sigma_3 = cfg.number_or("activity", "sigma_3", d.sigma_3);
  a.T_d_max = cfg.number_or("activity", "T_d_max", d.T_d_max);
  a.validate();
  return a;
}

void weighting_params_to_config(const WeightingParams& w, Config& cfg) {
  cfg.set_number("weighting", "omega_1", w.omega_1);
  cfg.set_number("weighting", "omega_2", w.omega_2);
  cfg.set_number("weighting", "omega_3", w.omega_3);
  cfg.set_number("weighting", "mu_min", w.mu_min);
}

void activity_params_to_config(const ActivityParams& a, Config& cfg) {
  cfg.set_number("activity", "sigma_1", a.sigma_1);
  cfg.set_number("activity", "sigma_2", a.sigma_2);
  cfg.set_number("activity", "sigma_3", a.sigma_3);
  cfg.set_number("activity", "T_d_max", a.T_d_max);
}

}  // namespace dsas
