#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <utility>

#include "dsas/vehicle.hpp"

namespace dsas {

// Box bounds of the three scheduling variables z = (v_x, 1/v_x, mu).
struct SchedulingBounds {
  double v_min = 9.0;
  double v_max = 25.0;
  double mu_min = 0.25;
  double mu_max = 1.0;

  void validate() const;
  double z2_min() const { return 1.0 / v_max; }
  double z2_max() const { return 1.0 / v_min; }
};

struct TsVertex {
  Mat6 A;
  Vec6 Bu;
  Vec6 Bw;
  Mat6 C;
};

// 8-vertex polytopic model obtained by the sector nonlinearity approach.
// v_x and 1/v_x are treated as independent axes, which is what yields the
// 2^3 vertex count. Corner numbering is lexicographic: index bit 2 is the
// v_x axis, bit 1 the 1/v_x axis, bit 0 the mu axis (0 = low, 1 = high).
struct TsModel {
  static constexpr int kRules = 8;

  std::array<TsVertex, kRules> vertex;
  SchedulingBounds bounds;
  std::array<std::array<double, 3>, kRules> corner;  // (z1, z2, z3) per vertex

  VehicleParams params;
  DriverGains gains;
};

using Membership = std::array<double, TsModel::kRules>;

// Default performance output: diagonal selector penalizing psi_l and y_l.
Mat6 default_output_matrix();

TsModel build_ts_model(const VehicleParams& p, const DriverGains& g,
                       const SchedulingBounds& b, const Mat6& C);

// Triangular per-axis weights multiplied across the three axes. Inputs
// outside the box are clamped; each clamp increments the process-wide
// counter below.
Membership memberships(double v_x, double mu, const SchedulingBounds& b);

// Number of scheduling-input clamps since process start (or last reset).
std::uint64_t scheduling_clamp_count();
void reset_scheduling_clamp_count();

// Convex recombination of the vertex systems at an admissible point.
std::pair<Mat6, Vec6> reconstruct(const TsModel& ts, double v_x, double mu);

// Versioned structured-text serialization (row-major matrices, 17
// significant digits). Deterministic, so the fingerprint below is stable.
std::string serialize(const TsModel& ts);
TsModel deserialize_ts_model(const std::string& text);

// FNV-1a 64-bit hash of the serialized model; ties gains files to the
// exact model they were synthesized against.
std::uint64_t fingerprint(const TsModel& ts);

SchedulingBounds scheduling_bounds_from_config(const Config& cfg);
void scheduling_bounds_to_config(const SchedulingBounds& b, Config& cfg);

}  // namespace dsas
