#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "dsas/config.hpp"

namespace dsas {

// One linear matrix inequality  F0 + sum_j y_j * Fj  >= 0.
// Coefficient matrices are stored only for variables that actually appear.
struct LmiBlock {
  std::string name;
  int dim = 0;
  Eigen::MatrixXd f0;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;  // (variable, coeff)
};

// Feasibility / linear-objective SDP over a flat decision vector.
struct SdpProblem {
  int num_vars = 0;
  std::vector<std::string> var_names;  // diagnostics; may be empty
  std::vector<LmiBlock> blocks;
  Eigen::VectorXd objective;  // size 0 => pure feasibility

  void validate() const;  // symmetric F, dim <= 64, num_vars <= 2000
};

enum class SdpStatus { feasible, optimal, infeasible, numerical_failure };

const char* to_string(SdpStatus s);

struct SdpSolution {
  Eigen::VectorXd y;
  SdpStatus status = SdpStatus::numerical_failure;
  std::vector<double> block_min_eig;  // at returned y, per block
  int iterations = 0;                 // total Newton steps
  double duality_gap = 0.0;           // barrier gap estimate at exit
  double phase1_margin = 0.0;         // optimized slack t of phase 1
};

struct SdpOptions {
  double phase1_eps = 1e-9;  // duality-gap resolution of the phase-1 optimum
  double gap_tol = 1e-7;     // relative duality-gap target with an objective
  double feas_tol = 1e-6;    // per-block normalized margin accepted as feasible
  int max_newton = 500;      // Newton budget per phase

  static SdpOptions from_config(const Config& cfg);
};

// Interior-point solve. Phase 1 maximizes the uniform slack t subject to
// F(y) >= t*I on every (per-block normalized) constraint; with an objective
// a log-det barrier central path follows with geometric mu reduction.
// A problem is reported feasible when the optimized slack clears -feas_tol
// in per-block normalized units: boundary certificates within tolerance are
// accepted, matching how interior-point solvers decide feasibility in
// practice. Infeasibility is certified only when t* falls below -feas_tol
// with the duality gap closed. Deterministic: identical problems yield
// identical solutions.
SdpSolution solve(const SdpProblem& problem,
                  const SdpOptions& options = SdpOptions{});

// Smallest eigenvalue by cyclic Jacobi rotations (input symmetrized first).
// Independent of the factorization path used inside solve(), so solutions
// can be re-verified against solver bugs.
double min_eigenvalue(const Eigen::MatrixXd& m_sym);

// All eigenvalues via the same Jacobi sweep, ascending.
Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXd& m_sym);

// Evaluate F0 + sum y_j Fj for one block.
Eigen::MatrixXd block_value(const LmiBlock& b, const Eigen::VectorXd& y);

// Largest absolute coefficient over F0 and all Fj of one block (floored away
// from zero). Eigenvalue margins divided by this scale are the normalized
// units that feas_tol is expressed in.
double block_scale(const LmiBlock& b);

// Sparse SDPA ".dat-s" text. Canonical: entries merged, zeros dropped,
// sorted by (matno, blkno, i, j), 17 significant digits. Round trips
// byte-identically through import_sdpa.
std::string export_sdpa(const SdpProblem& problem);
SdpProblem import_sdpa(const std::string& text);

}  // namespace dsas
