#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "dsas/sdp.hpp"

namespace dsas {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::feasible: return "feasible";
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (num_vars <= 0 || num_vars > 2000)
    throw std::invalid_argument("sdp: variable count out of range");
  if (objective.size() != 0 && objective.size() != num_vars)
    throw std::invalid_argument("sdp: objective dimension mismatch");
  for (const auto& b : blocks) {
    if (b.dim <= 0 || b.dim > 64)
      throw std::invalid_argument("sdp: block size out of range: " + b.name);
    auto check_sym = [&](const Eigen::MatrixXd& m) {
      if (m.rows() != b.dim || m.cols() != b.dim)
        throw std::invalid_argument("sdp: matrix dimension mismatch: " +
                                    b.name);
      if ((m - m.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("sdp: non-symmetric matrix in block " +
                                    b.name);
    };
    check_sym(b.f0);
    for (const auto& [j, f] : b.terms) {
      if (j < 0 || j >= num_vars)
        throw std::invalid_argument("sdp: variable index out of range in " +
                                    b.name);
      check_sym(f);
    }
  }
}

Eigen::MatrixXd block_value(const LmiBlock& b, const Eigen::VectorXd& y) {
  Eigen::MatrixXd m = b.f0;
  for (const auto& [j, f] : b.terms) m += y(j) * f;
  return m;
}

double block_scale(const LmiBlock& b) {
  double s = b.f0.cwiseAbs().maxCoeff();
  for (const auto& [j, f] : b.terms) s = std::max(s, f.cwiseAbs().maxCoeff());
  return std::max(s, 1e-12);
}

namespace {

// Internal box bound keeping the phase-1 feasible set bounded. Far outside
// any sensible value of the synthesis variables, so it never binds.
constexpr double kVarBound = 1e6;
constexpr double kCenterTol = 1e-8;   // Newton decrement^2 threshold
constexpr double kMuFactor = 5.0;     // geometric path reduction

struct Barrier {
  // Normalized blocks; phase-1 adds an implicit "- t * I" to each.
  std::vector<LmiBlock> blocks;
  int n = 0;           // decision variables, excluding t
  bool phase1 = false;
  double nu_real = 0;  // sum of block dimensions (gap estimate weight)

  int dim_z() const { return phase1 ? n + 1 : n; }

  bool value(const Eigen::VectorXd& z, double* barrier_out) const {
    double logdet = 0.0;
    const double t = phase1 ? z(n) : 0.0;
    for (const auto& b : blocks) {
      Eigen::MatrixXd m = b.f0;
      for (const auto& [j, f] : b.terms) m += z(j) * f;
      if (phase1) m.diagonal().array() -= t;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) return false;
      logdet += 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    for (int j = 0; j < dim_z(); ++j) {
      const double lo = kVarBound + z(j), hi = kVarBound - z(j);
      if (!(lo > 0.0 && hi > 0.0)) return false;
      logdet += std::log(lo) + std::log(hi);
    }
    if (barrier_out) *barrier_out = -logdet;
    return true;
  }

  void grad_hess(const Eigen::VectorXd& z, Eigen::VectorXd& g,
                 Eigen::MatrixXd& H) const {
    const int N = dim_z();
    g.setZero(N);
    H.setZero(N, N);
    const double t = phase1 ? z(n) : 0.0;
    for (const auto& b : blocks) {
      Eigen::MatrixXd m = b.f0;
      for (const auto& [j, f] : b.terms) m += z(j) * f;
      if (phase1) m.diagonal().array() -= t;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      const Eigen::MatrixXd finv =
          llt.solve(Eigen::MatrixXd::Identity(b.dim, b.dim));
      const int k = static_cast<int>(b.terms.size()) + (phase1 ? 1 : 0);
      Eigen::MatrixXd tflat(k, b.dim * b.dim);
      Eigen::MatrixXd tflat_t(k, b.dim * b.dim);
      std::vector<int> idx(k);
      for (int a = 0; a < static_cast<int>(b.terms.size()); ++a) {
        const auto& [j, f] = b.terms[a];
        const Eigen::MatrixXd tmat = finv * f;
        idx[a] = j;
        g(j) -= tmat.trace();
        tflat.row(a) = Eigen::Map<const Eigen::VectorXd>(tmat.data(),
                                                         tmat.size());
        const Eigen::MatrixXd tt = tmat.transpose();
        tflat_t.row(a) = Eigen::Map<const Eigen::VectorXd>(tt.data(),
                                                           tt.size());
      }
      if (phase1) {
        const int a = k - 1;  // coefficient of t is -I
        const Eigen::MatrixXd tmat = -finv;
        idx[a] = n;
        g(n) -= tmat.trace();
        tflat.row(a) = Eigen::Map<const Eigen::VectorXd>(tmat.data(),
                                                         tmat.size());
        tflat_t.row(a) = tflat.row(a);  // -finv is symmetric
      }
      const Eigen::MatrixXd hloc = tflat * tflat_t.transpose();
      for (int a = 0; a < k; ++a)
        for (int c = 0; c < k; ++c) H(idx[a], idx[c]) += hloc(a, c);
    }
    for (int j = 0; j < N; ++j) {
      const double d_hi = 1.0 / (kVarBound - z(j));
      const double d_lo = 1.0 / (kVarBound + z(j));
      g(j) += d_hi - d_lo;
      H(j, j) += d_hi * d_hi + d_lo * d_lo;
    }
    H = 0.5 * (H + H.transpose());
  }
};

struct CenterResult {
  bool centered = false;
  bool stalled = false;
};

// Damped Newton descent on  c^T z / mu - sum log det F(z)  until the Newton
// decrement is small. Consumes from the shared iteration budget.
CenterResult center(const Barrier& bar, const Eigen::VectorXd& c, double mu,
                    Eigen::VectorXd& z, int& iters, int max_newton) {
  CenterResult res;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  double fz;
  if (!bar.value(z, &fz)) return res;  // caller guarantees interior start
  fz += c.dot(z) / mu;
  while (iters < max_newton) {
    bar.grad_hess(z, g, H);
    Eigen::VectorXd gt = g + c / mu;
    Eigen::VectorXd d;
    double reg = 0.0;
    double lambda2 = -1.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(
          reg == 0.0 ? H
                     : Eigen::MatrixXd(
                           H + reg * Eigen::MatrixXd::Identity(H.rows(),
                                                               H.cols())));
      d = ldlt.solve(-gt);
      lambda2 = -gt.dot(d);
      if (d.allFinite() && lambda2 >= 0.0) break;
      reg = std::max(reg * 100.0, 1e-10);
    }
    if (!d.allFinite()) {
      res.stalled = true;
      return res;
    }
    if (lambda2 * 0.5 <= kCenterTol) {
      res.centered = true;
      return res;
    }
    ++iters;
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd zt = z + alpha * d;
      double ft;
      if (bar.value(zt, &ft)) {
        ft += c.dot(zt) / mu;
        if (ft <= fz - 0.25 * alpha * lambda2) {
          z = zt;
          fz = ft;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved) {
      res.stalled = true;
      res.centered = lambda2 * 0.5 <= 1e-4;  // close enough to proceed
      return res;
    }
  }
  return res;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  const int n = problem.num_vars;

  Barrier bar;
  bar.n = n;
  bar.phase1 = true;
  bar.blocks.reserve(problem.blocks.size());
  for (const auto& b : problem.blocks) {
    const double s = block_scale(b);
    LmiBlock nb;
    nb.name = b.name;
    nb.dim = b.dim;
    nb.f0 = b.f0 / s;
    nb.terms.reserve(b.terms.size());
    for (const auto& [j, f] : b.terms) nb.terms.emplace_back(j, f / s);
    bar.blocks.push_back(std::move(nb));
    bar.nu_real += b.dim;
  }

  SdpSolution sol;
  sol.y = Eigen::VectorXd::Zero(n);

  // ---- phase 1: maximize the uniform margin t ----
  double t0 = 0.0;
  for (const auto& b : bar.blocks)
    t0 = std::min(t0, min_eigenvalue(block_value(b, sol.y)));
  t0 -= 1.0;

  Eigen::VectorXd z(n + 1);
  z.head(n).setZero();
  z(n) = t0;
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + 1);
  c1(n) = -1.0;  // maximize t

  double mu = std::max(1.0, std::abs(t0));
  int iters = 0;
  bool phase1_done = false;
  bool phase1_feasible = false;
  const bool trace = std::getenv("DSAS_SDP_TRACE") != nullptr;
  double gap = mu * bar.nu_real;
  while (!phase1_done) {
    const CenterResult cr = center(bar, c1, mu, z, iters, options.max_newton);
    const double t = z(n);
    gap = mu * bar.nu_real;
    if (trace)
      std::fprintf(stderr,
                   "phase1 mu=%.3e t=%.6e gap=%.3e iters=%d centered=%d "
                   "stalled=%d\n",
                   mu, t, gap, iters, cr.centered, cr.stalled);
    if (t > 0.0 && gap <= 0.25 * t) {
      phase1_done = true;
      phase1_feasible = true;
    } else if (t > -options.feas_tol && gap <= 0.25 * options.feas_tol) {
      // Boundary certificate: the achieved slack clears -feas_tol even
      // though a strictly interior point was not found.
      phase1_done = true;
      phase1_feasible = true;
    } else if (t + gap < -options.feas_tol) {
      phase1_done = true;
      phase1_feasible = false;
    } else if ((!cr.centered && cr.stalled) || iters >= options.max_newton ||
               gap < 0.01 * options.phase1_eps) {
      phase1_done = true;
      phase1_feasible = t > -options.feas_tol;
      if (!cr.centered && !cr.stalled && iters >= options.max_newton) {
        sol.status = SdpStatus::numerical_failure;
        sol.y = z.head(n);
        sol.iterations = iters;
        sol.duality_gap = gap;
        sol.phase1_margin = t;
        for (const auto& b : problem.blocks)
          sol.block_min_eig.push_back(min_eigenvalue(block_value(b, sol.y)));
        return sol;
      }
    } else {
      mu /= kMuFactor;
    }
  }

  sol.phase1_margin = z(n);
  sol.y = z.head(n);
  sol.iterations = iters;
  sol.duality_gap = gap;

  if (!phase1_feasible) {
    sol.status = SdpStatus::infeasible;
    for (const auto& b : problem.blocks)
      sol.block_min_eig.push_back(min_eigenvalue(block_value(b, sol.y)));
    return sol;
  }
  sol.status = SdpStatus::feasible;

  // ---- phase 2: follow the central path for the linear objective ----
  // A boundary certificate (phase-1 slack in (-feas_tol, 0]) has no strictly
  // interior start, so the path is followed on the tolerance-relaxed cone:
  // every normalized block shifted by +feas_tol*I, whose points still satisfy
  // the original blocks to within -feas_tol. Without an objective the
  // phase-1 maximin point is returned as-is; it is the point that pins the
  // decision variables down hardest against the near-degenerate face.
  if (problem.objective.size() == n && problem.objective.norm() > 0.0) {
    if (sol.phase1_margin <= 0.0)
      for (auto& b : bar.blocks) b.f0.diagonal().array() += options.feas_tol;
    bar.phase1 = false;
    Eigen::VectorXd y = sol.y;
    const Eigen::VectorXd& c = problem.objective;
    mu = std::max(1.0, std::abs(c.dot(y)));
    int iters2 = 0;
    for (;;) {
      center(bar, c, mu, y, iters2, options.max_newton);
      gap = mu * bar.nu_real;
      if (gap < options.gap_tol * (1.0 + std::abs(c.dot(y)))) {
        sol.status = SdpStatus::optimal;
        break;
      }
      if (iters2 >= options.max_newton) {
        sol.status = SdpStatus::numerical_failure;
        break;
      }
      mu /= kMuFactor;
    }
    sol.y = y;
    sol.iterations = iters + iters2;
    sol.duality_gap = gap;
  }

  // ---- independent re-verification of the returned point ----
  // Margins are judged in the same per-block normalized units phase 1
  // optimizes, so the verdict is invariant to block scaling.
  double worst = 0.0;
  for (size_t i = 0; i < problem.blocks.size(); ++i) {
    const double me = min_eigenvalue(block_value(problem.blocks[i], sol.y));
    sol.block_min_eig.push_back(me);
    worst = std::min(worst, me / block_scale(problem.blocks[i]));
  }
  if ((sol.status == SdpStatus::feasible || sol.status == SdpStatus::optimal) &&
      worst < -options.feas_tol)
    sol.status = SdpStatus::numerical_failure;
  return sol;
}

SdpOptions SdpOptions::from_config(const Config& cfg) {
  SdpOptions d;
  SdpOptions o;
  o.phase1_eps = cfg.number_or("solver", "phase1_eps", d.phase1_eps);
  o.gap_tol = cfg.number_or("solver", "gap_tol", d.gap_tol);
  o.feas_tol = cfg.number_or("solver", "feas_tol", d.feas_tol);
  o.max_newton =
      static_cast<int>(cfg.number_or("solver", "max_newton", d.max_newton));
  return o;
}

}  // namespace dsas
