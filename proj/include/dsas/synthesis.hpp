#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsas/sdp.hpp"
#include "dsas/ts_model.hpp"
#include "dsas/vehicle.hpp"

namespace dsas {

// Design data of the saturated PDC synthesis.
struct DesignSpec {
  double u_max = 15.0;                 // fictive torque bound, N m
  double tau_1 = 0.5;                  // decay rate, 1/s
  double rho = 1.0;                    // disturbance energy bound
  double R = 1.0 / (1200.0 * 1200.0);  // disturbance weighting
  std::vector<Vec6> h_rows;            // polyhedral constraint rows

  enum class Objective { feasibility, minimize_gamma, maximize_tau1 };
  Objective objective = Objective::maximize_tau1;

  void validate() const;
};

DesignSpec design_spec_from_config(const Config& cfg, const VehicleParams& p);
void design_spec_to_config(const DesignSpec& spec, Config& cfg);

// Synthesis certificate: Lyapunov matrix, per-rule slack data and gains.
struct SynthesisResult {
  Mat6 X = Mat6::Identity();
  std::array<double, TsModel::kRules> S{};
  std::array<Row6, TsModel::kRules> V{};
  std::array<Row6, TsModel::kRules> W{};
  std::array<Mat6, TsModel::kRules> X21{};
  std::array<Mat6, TsModel::kRules> X22{};
  std::array<Vec6, TsModel::kRules> X23{};
  std::array<Row6, TsModel::kRules> X31{};
  std::array<Row6, TsModel::kRules> X32{};
  std::array<double, TsModel::kRules> X33{};
  double tau1 = 0.0;
  double tau2 = 0.0;
  double gamma = 0.0;
  std::array<Row6, TsModel::kRules> K{};  // V_i X^{-1}
  double u_max = 15.0;
  std::uint64_t ts_fingerprint = 0;
};

struct VerificationItem {
  std::string name;
  double margin = 0.0;  // normalized minimum-eigenvalue style; >= -1e-6 passes
  bool pass = false;
};

struct VerificationReport {
  std::vector<VerificationItem> items;
  bool passed = false;

  const VerificationItem* first_failure() const;
};

// Flat decision-vector layout of the certificate variables.
struct VarLayout {
  static constexpr int nx = 6;
  static constexpr int rules = TsModel::kRules;
  static constexpr int per_rule = 1 + 6 + 6 + 36 + 36 + 6 + 6 + 6 + 1;

  int x(int a, int b) const;      // X upper triangle, a <= b
  int s(int i) const { return 21 + i * per_rule; }
  int v(int i, int k) const { return s(i) + 1 + k; }
  int w(int i, int k) const { return s(i) + 7 + k; }
  int x21(int i, int a, int b) const { return s(i) + 13 + a * 6 + b; }
  int x22(int i, int a, int b) const { return s(i) + 49 + a * 6 + b; }
  int x23(int i, int a) const { return s(i) + 85 + a; }
  int x31(int i, int k) const { return s(i) + 91 + k; }
  int x32(int i, int k) const { return s(i) + 97 + k; }
  int x33(int i) const { return s(i) + 103; }
  int tau2() const { return 21 + rules * per_rule; }
  int gamma() const { return tau2() + 1; }
  int total() const { return gamma() + 1; }
};

// Emit the full certificate LMI system (saturation, polyhedral containment,
// decay budget, performance bound, and the relaxed stabilization family)
// over the flat decision vector. Strict inequalities carry an epsilon-I
// margin; the disturbance block column is rescaled by 1/sqrt(R) (an exact
// congruence) to keep the system well conditioned.
SdpProblem assemble_problem(const TsModel& ts, const DesignSpec& spec);

// K_i = V_i X^{-1} through an SPD factorization. Throws when X is not
// numerically positive definite or its condition number exceeds 1e12.
std::array<Row6, TsModel::kRules> extract_gains(
    const Mat6& X, const std::array<Row6, TsModel::kRules>& V);

SynthesisResult result_from_solution(const TsModel& ts, const DesignSpec& spec,
                                     const SdpSolution& sol);

// Structured values back to the flat vector (inverse of result_from_solution
// up to the stored X taking precedence), used to re-check tampered files.
Eigen::VectorXd result_to_decision_vector(const SynthesisResult& r);

// Re-derives every LMI residual with the Jacobi eigenvalue path, checks
// gain consistency, polyhedral containment, the tau1-tau2 budget, and a
// 1000-sample ellipsoid-boundary decay probe of the saturated closed loop.
VerificationReport verify_certificate(const TsModel& ts,
                                      const DesignSpec& spec,
                                      const SynthesisResult& result);

// Thrown when the LMI system has no certificate anywhere on the bracket.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Largest feasible decay rate on [1e-3, 5] to 5% relative width.
// Throws InfeasibleError when the lower bracket end is already infeasible.
std::pair<double, SynthesisResult> bisect_tau1(
    const TsModel& ts, const DesignSpec& spec,
    const SdpOptions& options = SdpOptions{});

// Versioned gains file (row-major matrices, 17 significant digits, model
// fingerprint included).
std::string serialize_gains(const SynthesisResult& r);
SynthesisResult deserialize_gains(const std::string& text);
void save_gains(const SynthesisResult& r, const std::string& path);
SynthesisResult load_gains(const std::string& path);

}  // namespace dsas
