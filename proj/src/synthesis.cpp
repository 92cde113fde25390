#include "dsas/synthesis.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dsas {

namespace {

constexpr double kStrictEpsRel = 1e-8;   // strict LMIs: <= -eps*I
// Strict floor X >= eps*I. Large enough that a certificate within the
// boundary tolerance still leaves X safely positive definite for the gain
// extraction K_i = V_i X^{-1}, small against X's natural eigenvalues.
constexpr double kXposEps = 1e-5;
constexpr double kScalarEps = 1e-9;      // S_i, tau2, gamma > 0
// Verification acceptance threshold, matching SdpOptions::feas_tol: LMI
// margins are judged in per-block normalized units (min eigenvalue divided
// by the block's largest coefficient), the same units the solver's phase-1
// slack is expressed in.
constexpr double kMarginTol = -1e-6;

// Symmetric basis matrix of the X upper-triangle parametrization.
Mat6 sym_basis(int a, int b) {
  Mat6 e = Mat6::Zero();
  e(a, b) += 1.0;
  e(b, a) += 1.0;
  if (a == b) e(a, b) = 1.0;
  return e;
}

struct BlockBuilder {
  std::string name;
  int dim;
  Eigen::MatrixXd f0;
  std::map<int, Eigen::MatrixXd> coeff;
  bool he = false;  // emit -(M + M^T) - eps*I instead of M itself

  BlockBuilder(std::string n, int d, bool he_mode = false)
      : name(std::move(n)), dim(d), f0(Eigen::MatrixXd::Zero(d, d)),
        he(he_mode) {}

  Eigen::MatrixXd& at(int var) {
    auto it = coeff.find(var);
    if (it == coeff.end())
      it = coeff.emplace(var, Eigen::MatrixXd::Zero(dim, dim)).first;
    return it->second;
  }

  void emit(SdpProblem& p, double strict_eps_rel = 0.0) {
    LmiBlock b;
    b.name = name;
    b.dim = dim;
    if (he) {
      b.f0 = -(f0 + f0.transpose());
      for (auto& [var, m] : coeff)
        b.terms.emplace_back(var, Eigen::MatrixXd(-(m + m.transpose())));
    } else {
      b.f0 = f0;
      for (auto& [var, m] : coeff)
        b.terms.emplace_back(var, Eigen::MatrixXd(0.5 * (m + m.transpose())));
    }
    if (strict_eps_rel > 0.0) {
      const double scale = std::max(b.f0.cwiseAbs().maxCoeff(), 1e-3);
      b.f0.diagonal().array() -= strict_eps_rel * scale;
    }
    p.blocks.push_back(std::move(b));
  }
};

void name_variables(SdpProblem& p) {
  const VarLayout L;
  p.var_names.assign(L.total(), "");
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      p.var_names[L.x(a, b)] =
          "X(" + std::to_string(a) + "," + std::to_string(b) + ")";
  for (int i = 0; i < L.rules; ++i) {
    const std::string ri = "[" + std::to_string(i) + "]";
    p.var_names[L.s(i)] = "S" + ri;
    for (int k = 0; k < 6; ++k) {
      p.var_names[L.v(i, k)] = "V" + ri + "(" + std::to_string(k) + ")";
      p.var_names[L.w(i, k)] = "W" + ri + "(" + std::to_string(k) + ")";
      p.var_names[L.x23(i, k)] = "X23" + ri + "(" + std::to_string(k) + ")";
      p.var_names[L.x31(i, k)] = "X31" + ri + "(" + std::to_string(k) + ")";
      p.var_names[L.x32(i, k)] = "X32" + ri + "(" + std::to_string(k) + ")";
      for (int b = 0; b < 6; ++b) {
        p.var_names[L.x21(i, k, b)] = "X21" + ri;
        p.var_names[L.x22(i, k, b)] = "X22" + ri;
      }
    }
    p.var_names[L.x33(i)] = "X33" + ri;
  }
  p.var_names[L.tau2()] = "tau2";
  p.var_names[L.gamma()] = "gamma";
}

// Shared body of the Psi_{ij} block matrix (before He), with the
// disturbance column rescaled by s = 1/sqrt(R).
void add_psi(BlockBuilder& blk, const TsModel& ts, const DesignSpec& spec,
             int i, int j, double weight) {
  const VarLayout L;
  const Mat6& Ai = ts.vertex[i].A;
  const Vec6& Bu = ts.vertex[i].Bu;
  const Vec6& Bw = ts.vertex[i].Bw;
  const Mat6& Ci = ts.vertex[i].C;
  const double s = 1.0 / std::sqrt(spec.R);

  // Row/column offsets of the 5 block rows: (nx, nx, nu, nu, nw).
  constexpr int r1 = 0, r2 = 6, r3 = 12, r4 = 13, r5 = 14;

  for (int a = 0; a < 6; ++a) {
    for (int b = a; b < 6; ++b) {
      const Mat6 e = sym_basis(a, b);
      Eigen::MatrixXd& m = blk.at(L.x(a, b));
      // (1,1): A_i X + tau1 X / 2,  (2,1): C_i X
      m.block<6, 6>(r1, r1) += weight * (Ai * e + 0.5 * spec.tau_1 * e);
      m.block<6, 6>(r2, r1) += weight * (Ci * e);
    }
  }
  for (int b = 0; b < 6; ++b) {
    // (1,1): B_i^u X31_j ; (3,1): -X31_j
    blk.at(L.x31(j, b)).block<6, 1>(r1, b) += weight * Bu;
    blk.at(L.x31(j, b))(r3, b) += -weight;
    // (1,2): B_i^u X32_j ; (3,2): -X32_j
    blk.at(L.x32(j, b)).block<6, 1>(r1, r2 + b) += weight * Bu;
    blk.at(L.x32(j, b))(r3, r2 + b) += -weight;
    // (3,1): V_i ; (4,1): W_i
    blk.at(L.v(i, b))(r3, b) += weight;
    blk.at(L.w(i, b))(r4, b) += weight;
  }
  // (1,3): B_i^u X33_j ; (3,3): -X33_j
  blk.at(L.x33(j)).block<6, 1>(r1, r3) += weight * Bu;
  blk.at(L.x33(j))(r3, r3) += -weight;
  // (1,4): -B_i^u S_j ; (4,4): -S_j
  blk.at(L.s(j)).block<6, 1>(r1, r4) += -weight * Bu;
  blk.at(L.s(j))(r4, r4) += -weight;
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      // (2,1): -X21_j ; (2,2): -X22_j
      blk.at(L.x21(j, a, b))(r2 + a, b) += -weight;
      blk.at(L.x22(j, a, b))(r2 + a, r2 + b) += -weight;
    }
    // (2,3): -X23_j
    blk.at(L.x23(j, a))(r2 + a, r3) += -weight;
  }
  // (5,5): -tau2 R/2, rescaled by s^2 = 1/R
  blk.at(L.tau2())(r5, r5) += -0.5 * weight;
  // constant disturbance column (1,5): B_i^w, rescaled by s
  blk.f0.block<6, 1>(r1, r5) += weight * s * Bw;
}

}  // namespace

int VarLayout::x(int a, int b) const {
  // row-major upper triangle
  return a * 6 - a * (a - 1) / 2 + (b - a);
}

void DesignSpec::validate() const {
  if (!(u_max > 0.0)) throw std::domain_error("design: u_max must be > 0");
  if (!(tau_1 > 0.0)) throw std::domain_error("design: tau_1 must be > 0");
  if (!(rho > 0.0)) throw std::domain_error("design: rho must be > 0");
  if (!(R > 0.0)) throw std::domain_error("design: R must be > 0");
}

DesignSpec design_spec_from_config(const Config& cfg, const VehicleParams& p) {
  DesignSpec d;
  DesignSpec s;
  s.u_max = cfg.number_or("design", "u_max", d.u_max);
  s.tau_1 = cfg.number_or("design", "tau_1", d.tau_1);
  s.rho = cfg.number_or("design", "rho", d.rho);
  s.R = cfg.number_or("design", "R", d.R);
  const std::string obj =
      cfg.text_or("design", "objective", "maximize_tau1");
  if (obj == "feasibility")
    s.objective = DesignSpec::Objective::feasibility;
  else if (obj == "minimize_gamma")
    s.objective = DesignSpec::Objective::minimize_gamma;
  else if (obj == "maximize_tau1")
    s.objective = DesignSpec::Objective::maximize_tau1;
  else
    throw std::runtime_error("design: unknown objective " + obj);
  for (const Vec6& h : state_constraint_rows(p)) s.h_rows.push_back(h);
  s.validate();
  return s;
}

void design_spec_to_config(const DesignSpec& spec, Config& cfg) {
  cfg.set_number("design", "u_max", spec.u_max);
  cfg.set_number("design", "tau_1", spec.tau_1);
  cfg.set_number("design", "rho", spec.rho);
  cfg.set_number("design", "R", spec.R);
  const char* obj = "maximize_tau1";
  if (spec.objective == DesignSpec::Objective::feasibility)
    obj = "feasibility";
  else if (spec.objective == DesignSpec::Objective::minimize_gamma)
    obj = "minimize_gamma";
  cfg.set_text("design", "objective", obj);
}

SdpProblem assemble_problem(const TsModel& ts, const DesignSpec& spec) {
  spec.validate();
  for (const Vec6& h : spec.h_rows)
    if (!h.allFinite())
      throw std::invalid_argument("assemble: non-finite constraint row");

  const VarLayout L;
  constexpr int r = TsModel::kRules;
  SdpProblem p;
  p.num_vars = L.total();
  name_variables(p);

  // X positive definite.
  {
    BlockBuilder blk("Xpos", 6);
    for (int a = 0; a < 6; ++a)
      for (int b = a; b < 6; ++b) blk.at(L.x(a, b)) = sym_basis(a, b);
    blk.f0 = -kXposEps * Mat6::Identity();
    blk.emit(p);
  }
  // Saturation blocks (one input channel).
  for (int i = 0; i < r; ++i) {
    BlockBuilder blk("sat[" + std::to_string(i) + "]", 7);
    blk.f0(6, 6) = spec.u_max * spec.u_max;
    for (int a = 0; a < 6; ++a)
      for (int b = a; b < 6; ++b)
        blk.at(L.x(a, b)).block<6, 6>(0, 0) = sym_basis(a, b);
    for (int k = 0; k < 6; ++k) {
      Eigen::MatrixXd& mv = blk.at(L.v(i, k));
      mv(k, 6) += 1.0;
      mv(6, k) += 1.0;
      Eigen::MatrixXd& mw = blk.at(L.w(i, k));
      mw(k, 6) -= 1.0;
      mw(6, k) -= 1.0;
    }
    blk.emit(p);
  }
  // Polyhedral containment blocks.
  for (size_t k = 0; k < spec.h_rows.size(); ++k) {
    BlockBuilder blk("poly[" + std::to_string(k) + "]", 7);
    blk.f0(6, 6) = 1.0;
    const Vec6& h = spec.h_rows[k];
    for (int a = 0; a < 6; ++a) {
      for (int b = a; b < 6; ++b) {
        const Mat6 e = sym_basis(a, b);
        Eigen::MatrixXd& m = blk.at(L.x(a, b));
        m.block<6, 6>(0, 0) = e;
        const Vec6 col = e * h;
        m.block<6, 1>(0, 6) += col;
        m.block<1, 6>(6, 0) += col.transpose();
      }
    }
    blk.emit(p);
  }
  // Decay budget tau1 - tau2 rho > 0.
  {
    BlockBuilder blk("decay", 1);
    blk.f0(0, 0) = spec.tau_1;
    blk.at(L.tau2())(0, 0) = -spec.rho;
    blk.emit(p, kStrictEpsRel);
  }
  // Performance bound blocks.
  for (int i = 0; i < r; ++i) {
    BlockBuilder blk("perf[" + std::to_string(i) + "]", 12);
    const Mat6& Ci = ts.vertex[i].C;
    for (int a = 0; a < 6; ++a) {
      for (int b = a; b < 6; ++b) {
        const Mat6 e = sym_basis(a, b);
        Eigen::MatrixXd& m = blk.at(L.x(a, b));
        m.block<6, 6>(0, 0) = e;
        m.block<6, 6>(6, 0) += Ci * e;
        m.block<6, 6>(0, 6) += (Ci * e).transpose();
      }
    }
    blk.at(L.gamma()).block<6, 6>(6, 6) = Mat6::Identity();
    blk.emit(p);
  }
  // Relaxed stabilization family: Psi_ii and the i<j combinations.
  for (int i = 0; i < r; ++i) {
    BlockBuilder blk("Psi[" + std::to_string(i) + "]", 15, true);
    add_psi(blk, ts, spec, i, i, 1.0);
    blk.emit(p, kStrictEpsRel);
  }
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      BlockBuilder blk(
          "Psi[" + std::to_string(i) + "," + std::to_string(j) + "]", 15,
          true);
      add_psi(blk, ts, spec, i, i, 2.0 / (r - 1));
      add_psi(blk, ts, spec, i, j, 1.0);
      add_psi(blk, ts, spec, j, i, 1.0);
      blk.emit(p, kStrictEpsRel);
    }
  }
  // Scalar positivity.
  for (int i = 0; i < r; ++i) {
    BlockBuilder blk("Spos[" + std::to_string(i) + "]", 1);
    blk.f0(0, 0) = -kScalarEps;
    blk.at(L.s(i))(0, 0) = 1.0;
    blk.emit(p);
  }
  {
    BlockBuilder blk("tau2pos", 1);
    blk.f0(0, 0) = -kScalarEps;
    blk.at(L.tau2())(0, 0) = 1.0;
    blk.emit(p);
  }
  {
    BlockBuilder blk("gammapos", 1);
    blk.f0(0, 0) = -kScalarEps;
    blk.at(L.gamma())(0, 0) = 1.0;
    blk.emit(p);
  }

  if (spec.objective == DesignSpec::Objective::minimize_gamma) {
    p.objective = Eigen::VectorXd::Zero(p.num_vars);
    p.objective(L.gamma()) = 1.0;
  }
  return p;
}

std::array<Row6, TsModel::kRules> extract_gains(
    const Mat6& X, const std::array<Row6, TsModel::kRules>& V) {
  const Eigen::VectorXd ev = jacobi_eigenvalues(X);
  if (!(ev(0) > 0.0) || ev(5) / ev(0) > 1e12)
    throw std::runtime_error(
        "extract_gains: certificate rejected, X is numerically singular");
  Eigen::LLT<Mat6> llt(0.5 * (X + X.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "extract_gains: certificate rejected, X not positive definite");
  std::array<Row6, TsModel::kRules> K;
  for (int i = 0; i < TsModel::kRules; ++i)
    K[i] = llt.solve(V[i].transpose()).transpose();
  return K;
}

SynthesisResult result_from_solution(const TsModel& ts, const DesignSpec& spec,
                                     const SdpSolution& sol) {
  const VarLayout L;
  if (sol.y.size() != L.total())
    throw std::invalid_argument("result: decision vector size mismatch");
  SynthesisResult r;
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      r.X(a, b) = r.X(b, a) = sol.y(L.x(a, b));
  for (int i = 0; i < TsModel::kRules; ++i) {
    r.S[i] = sol.y(L.s(i));
    r.X33[i] = sol.y(L.x33(i));
    for (int k = 0; k < 6; ++k) {
      r.V[i](k) = sol.y(L.v(i, k));
      r.W[i](k) = sol.y(L.w(i, k));
      r.X23[i](k) = sol.y(L.x23(i, k));
      r.X31[i](k) = sol.y(L.x31(i, k));
      r.X32[i](k) = sol.y(L.x32(i, k));
      for (int b = 0; b < 6; ++b) {
        r.X21[i](k, b) = sol.y(L.x21(i, k, b));
        r.X22[i](k, b) = sol.y(L.x22(i, k, b));
      }
    }
  }
  r.tau1 = spec.tau_1;
  r.tau2 = sol.y(L.tau2());
  r.gamma = sol.y(L.gamma());
  r.u_max = spec.u_max;
  r.ts_fingerprint = fingerprint(ts);
  r.K = extract_gains(r.X, r.V);
  return r;
}

Eigen::VectorXd result_to_decision_vector(const SynthesisResult& r) {
  const VarLayout L;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(L.total());
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b) y(L.x(a, b)) = 0.5 * (r.X(a, b) + r.X(b, a));
  for (int i = 0; i < TsModel::kRules; ++i) {
    y(L.s(i)) = r.S[i];
    y(L.x33(i)) = r.X33[i];
    for (int k = 0; k < 6; ++k) {
      y(L.v(i, k)) = r.V[i](k);
      y(L.w(i, k)) = r.W[i](k);
      y(L.x23(i, k)) = r.X23[i](k);
      y(L.x31(i, k)) = r.X31[i](k);
      y(L.x32(i, k)) = r.X32[i](k);
      for (int b = 0; b < 6; ++b) {
        y(L.x21(i, k, b)) = r.X21[i](k, b);
        y(L.x22(i, k, b)) = r.X22[i](k, b);
      }
    }
  }
  y(L.tau2()) = r.tau2;
  y(L.gamma()) = r.gamma;
  return y;
}

const VerificationItem* VerificationReport::first_failure() const {
  for (const auto& it : items)
    if (!it.pass) return &it;
  return nullptr;
}

VerificationReport verify_certificate(const TsModel& ts,
                                      const DesignSpec& spec,
                                      const SynthesisResult& result) {
  VerificationReport report;
  auto add = [&](const std::string& name, double margin) {
    report.items.push_back({name, margin, margin >= kMarginTol});
  };

  DesignSpec s2 = spec;
  s2.tau_1 = result.tau1;
  if (result.tau1 <= 0.0) {
    report.passed = false;
    report.items.push_back({"tau1-positive", result.tau1, false});
    return report;
  }
  const SdpProblem problem = assemble_problem(ts, s2);
  const Eigen::VectorXd y = result_to_decision_vector(result);
  for (const auto& blk : problem.blocks)
    add("lmi:" + blk.name,
        min_eigenvalue(block_value(blk, y)) / block_scale(blk));

  // Gain consistency: V_i recovered from K_i X.
  double gain_margin = 0.0;
  for (int i = 0; i < TsModel::kRules; ++i) {
    const Row6 back = result.K[i] * result.X;
    const double rel = (back - result.V[i]).cwiseAbs().maxCoeff() /
                       std::max(result.V[i].cwiseAbs().maxCoeff(), 1e-300);
    gain_margin = std::max(gain_margin, rel);
  }
  add("gain-consistency", 1e-9 - gain_margin);

  // Decay budget.
  add("tau-budget", result.tau1 - result.tau2 * spec.rho);

  // Polyhedral containment read directly from X.
  for (size_t k = 0; k < spec.h_rows.size(); ++k) {
    const double q = spec.h_rows[k].dot(result.X * spec.h_rows[k]);
    add("containment[" + std::to_string(k) + "]", 1.0 - q);
  }

  // Sampled exponential-decay probe on the ellipsoid boundary, no wind. The
  // residual v̇ + τ1·v is judged in the same normalized units as the LMI
  // margins above: a certificate accepted with per-block slack down to
  // -kMarginTol implies the residual can reach that slack times the Ψ
  // coefficient scale, amplified by |X⁻¹x|². Dividing by that factor makes
  // the sampled check exactly as strict as the certificate itself, while a
  // tampered certificate still fails by orders of magnitude.
  double psi_scale = 1.0;
  for (const auto& blk : problem.blocks)
    if (blk.name.rfind("Psi", 0) == 0)
      psi_scale = std::max(psi_scale, block_scale(blk));
  Eigen::LLT<Mat6> llt(result.X);
  if (llt.info() != Eigen::Success) {
    report.items.push_back({"ellipsoid-factorization", -1.0, false});
    report.passed = false;
    return report;
  }
  const Mat6 chol_l = llt.matrixL();
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uv(ts.bounds.v_min, ts.bounds.v_max);
  std::uniform_real_distribution<double> um(ts.bounds.mu_min,
                                            ts.bounds.mu_max);
  double worst_decay = std::numeric_limits<double>::infinity();
  constexpr int kSamples = 1000;
  for (int s = 0; s < kSamples; ++s) {
    Vec6 u;
    for (int k = 0; k < 6; ++k) u(k) = gauss(rng);
    u.normalize();
    const Vec6 x = chol_l * u;  // x^T X^{-1} x = 1
    const double vx = uv(rng);
    const double mu = um(rng);
    const auto [A, Bu] = reconstruct(ts, vx, mu);
    const Membership eta = memberships(vx, mu, ts.bounds);
    double uc = 0.0;
    for (int i = 0; i < TsModel::kRules; ++i)
      uc += eta[i] * (result.K[i] * x)(0);
    const double us =
        std::copysign(std::min(std::abs(uc), result.u_max), uc);
    const Vec6 xdot = A * x + Bu * us;
    const Vec6 q = llt.solve(x);
    const double vdot = 2.0 * q.dot(xdot);
    const double denom = psi_scale * std::max(q.squaredNorm(), 1.0);
    worst_decay = std::min(worst_decay, -(vdot + result.tau1) / denom);
  }
  add("sampled-decay", worst_decay);

  report.passed = true;
  for (const auto& it : report.items) report.passed = report.passed && it.pass;
  return report;
}

std::pair<double, SynthesisResult> bisect_tau1(const TsModel& ts,
                                               const DesignSpec& spec,
                                               const SdpOptions& options) {
  auto trial = [&](double tau) -> std::optional<SynthesisResult> {
    DesignSpec s2 = spec;
    s2.tau_1 = tau;
    s2.objective = DesignSpec::Objective::feasibility;
    const SdpSolution sol = solve(assemble_problem(ts, s2), options);
    if (sol.status == SdpStatus::feasible || sol.status == SdpStatus::optimal)
      return result_from_solution(ts, s2, sol);
    return std::nullopt;
  };

  double lo = 1e-3, hi = 5.0;
  if (auto r = trial(hi)) return {hi, *r};
  auto best = trial(lo);
  if (!best)
    throw InfeasibleError(
        "bisect_tau1: infeasible on the bracket [0.001, 5]; the lower end "
        "tau_1 = 0.001 already has no certificate");
  while (hi - lo > 0.05 * hi) {
    const double mid = std::sqrt(lo * hi);
    if (auto r = trial(mid)) {
      lo = mid;
      best = std::move(r);
    } else {
      hi = mid;
    }
  }
  return {lo, *best};
}

std::string serialize_gains(const SynthesisResult& r) {
  std::ostringstream out;
  out << "dsas-gains v1\n";
  out << "fingerprint " << std::hex << r.ts_fingerprint << std::dec << "\n";
  out << "u_max " << format_double(r.u_max) << "\n";
  out << "tau1 " << format_double(r.tau1) << "\n";
  out << "tau2 " << format_double(r.tau2) << "\n";
  out << "gamma " << format_double(r.gamma) << "\n";
  auto mat = [&](const char* name, const Eigen::Ref<const Eigen::MatrixXd>& m,
                 int rule = -1) {
    out << name;
    if (rule >= 0) out << " " << rule;
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b)
        out << " " << format_double(m(a, b));
    out << "\n";
  };
  mat("X", r.X);
  for (int i = 0; i < TsModel::kRules; ++i) {
    out << "S " << i << " " << format_double(r.S[i]) << "\n";
    mat("V", r.V[i], i);
    mat("W", r.W[i], i);
    mat("X21", r.X21[i], i);
    mat("X22", r.X22[i], i);
    mat("X23", r.X23[i], i);
    mat("X31", r.X31[i], i);
    mat("X32", r.X32[i], i);
    out << "X33 " << i << " " << format_double(r.X33[i]) << "\n";
    mat("K", r.K[i], i);
  }
  return out.str();
}

SynthesisResult deserialize_gains(const std::string& text) {
  std::istringstream in(text);
  std::string tag, version, key;
  in >> tag >> version;
  if (tag != "dsas-gains" || version != "v1")
    throw std::runtime_error("gains: unrecognized header");
  SynthesisResult r;
  in >> key >> std::hex >> r.ts_fingerprint >> std::dec;
  if (key != "fingerprint")
    throw std::runtime_error("gains: missing fingerprint");
  auto scalar = [&](const char* name) {
    in >> key;
    if (key != name)
      throw std::runtime_error(std::string("gains: expected ") + name);
    double v;
    in >> v;
    return v;
  };
  r.u_max = scalar("u_max");
  r.tau1 = scalar("tau1");
  r.tau2 = scalar("tau2");
  r.gamma = scalar("gamma");
  auto mat = [&](const char* name, Eigen::Ref<Eigen::MatrixXd> m,
                 int rule = -1) {
    in >> key;
    if (key != name)
      throw std::runtime_error(std::string("gains: expected ") + name);
    if (rule >= 0) {
      int idx;
      in >> idx;
      if (idx != rule) throw std::runtime_error("gains: rule out of order");
    }
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b) in >> m(a, b);
  };
  Eigen::MatrixXd X(6, 6);
  mat("X", X);
  r.X = X;
  for (int i = 0; i < TsModel::kRules; ++i) {
    Eigen::MatrixXd row(1, 6), m66(6, 6), col(6, 1);
    int idx;
    in >> key >> idx >> r.S[i];
    if (key != "S" || idx != i) throw std::runtime_error("gains: bad S record");
    mat("V", row, i);
    r.V[i] = row;
    mat("W", row, i);
    r.W[i] = row;
    mat("X21", m66, i);
    r.X21[i] = m66;
    mat("X22", m66, i);
    r.X22[i] = m66;
    mat("X23", col, i);
    r.X23[i] = col;
    mat("X31", row, i);
    r.X31[i] = row;
    mat("X32", row, i);
    r.X32[i] = row;
    in >> key >> idx >> r.X33[i];
    if (key != "X33" || idx != i)
      throw std::runtime_error("gains: bad X33 record");
    mat("K", row, i);
    r.K[i] = row;
  }
  if (!in) throw std::runtime_error("gains: truncated file");
  return r;
}

void save_gains(const SynthesisResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("gains: cannot write " + path);
  out << serialize_gains(r);
}

SynthesisResult load_gains(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("gains: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_gains(buf.str());
}

}  // namespace dsas
