#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "dsas/sdp.hpp"

using namespace dsas;

namespace {

LmiBlock scalar_block(const std::string& name, double f0,
                      std::vector<std::pair<int, double>> coeffs) {
  LmiBlock b;
  b.name = name;
  b.dim = 1;
  b.f0 = Eigen::MatrixXd::Constant(1, 1, f0);
  for (auto [j, c] : coeffs)
    b.terms.emplace_back(j, Eigen::MatrixXd::Constant(1, 1, c));
  return b;
}

// Characteristic-polynomial sign-change oracle: locate eigenvalues of a
// symmetric matrix by bisection on det(M - lambda I), independent of the
// Jacobi path under test.
double smallest_eig_by_det_bisection(const Eigen::MatrixXd& m) {
  auto det = [&](double lam) {
    const Eigen::MatrixXd s =
        m - lam * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return s.fullPivLu().determinant();
  };
  const double bound = m.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  // The smallest eigenvalue is the first sign change from below.
  double lo = -bound, hi = bound;
  const int n = static_cast<int>(m.rows());
  const double s_lo = (n % 2 == 0) ? 1.0 : -1.0;  // sign of det at -inf side
  // Scan for the first interval where det changes sign from s_lo.
  const int grid = 4096;
  double a = lo, fa = det(a);
  double b = hi;
  for (int k = 1; k <= grid; ++k) {
    const double x = lo + k * (hi - lo) / grid;
    const double fx = det(x);
    if ((fa > 0) != (fx > 0) || fx == 0.0) {
      b = x;
      break;
    }
    a = x;
    fa = fx;
  }
  (void)s_lo;
  double fa2 = det(a);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = det(mid);
    if ((fa2 > 0) == (fm > 0)) {
      a = mid;
      fa2 = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

SdpProblem random_problem(std::mt19937& rng, bool with_objective) {
  std::uniform_int_distribution<int> dim_d(1, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SdpProblem p;
  p.num_vars = 2;
  std::uniform_int_distribution<int> nb(2, 4);
  const int blocks = nb(rng);
  for (int b = 0; b < blocks; ++b) {
    const int d = dim_d(rng);
    LmiBlock blk;
    blk.name = "b" + std::to_string(b);
    blk.dim = d;
    auto sym = [&] {
      Eigen::MatrixXd m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = u(rng);
      return Eigen::MatrixXd(0.5 * (m + m.transpose()));
    };
    blk.f0 = sym() + 2.0 * Eigen::MatrixXd::Identity(d, d);
    blk.terms.emplace_back(0, sym());
    blk.terms.emplace_back(1, sym());
    p.blocks.push_back(std::move(blk));
  }
  if (with_objective) {
    p.objective = Eigen::VectorXd(2);
    p.objective << u(rng), u(rng);
    if (p.objective.norm() < 0.1) p.objective << 1.0, 0.5;
  }
  // Keep the feasible region bounded inside the brute-force box.
  for (int j = 0; j < 2; ++j) {
    p.blocks.push_back(scalar_block("box+" + std::to_string(j), 3.0,
                                    {{j, -1.0}}));
    p.blocks.push_back(scalar_block("box-" + std::to_string(j), 3.0,
                                    {{j, 1.0}}));
  }
  return p;
}

// Dense lattice search over the two decision variables. Returns the best
// feasibility margin seen anywhere and the best objective over feasible
// lattice points.
std::pair<double, double> brute_force(const SdpProblem& p) {
  double best_margin = -1e300;
  double best = 1e300;
  const int grid = 140;
  for (int a = 0; a <= grid; ++a)
    for (int b = 0; b <= grid; ++b) {
      Eigen::VectorXd y(2);
      y << -3.0 + 6.0 * a / grid, -3.0 + 6.0 * b / grid;
      double mineig = 1e300;
      for (const auto& blk : p.blocks)
        mineig = std::min(mineig, min_eigenvalue(block_value(blk, y)));
      best_margin = std::max(best_margin, mineig);
      if (mineig >= 0.0 && p.objective.size() == 2)
        best = std::min(best, p.objective.dot(y));
    }
  return {best_margin, best};
}

}  // namespace

TEST_CASE("analytic problem: |y| <= 1") {
  SdpProblem p;
  p.num_vars = 1;
  LmiBlock b;
  b.name = "psd2";
  b.dim = 2;
  b.f0 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd f1 = Eigen::MatrixXd::Zero(2, 2);
  f1(0, 1) = f1(1, 0) = 1.0;
  b.terms.emplace_back(0, f1);
  p.blocks.push_back(b);
  p.objective = Eigen::VectorXd::Constant(1, -1.0);  // maximize y

  const SdpSolution sol = solve(p);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(std::abs(sol.y(0) - 1.0) < 1e-6);
}

TEST_CASE("analytic problem: interval [2, 5], minimize y") {
  SdpProblem p;
  p.num_vars = 1;
  p.blocks.push_back(scalar_block("lo", -2.0, {{0, 1.0}}));
  p.blocks.push_back(scalar_block("hi", 5.0, {{0, -1.0}}));
  p.objective = Eigen::VectorXd::Constant(1, 1.0);

  const SdpSolution sol = solve(p);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(std::abs(sol.y(0) - 2.0) < 1e-6);
}

TEST_CASE("infeasible interval is diagnosed") {
  SdpProblem p;
  p.num_vars = 1;
  p.blocks.push_back(scalar_block("lo", -5.0, {{0, 1.0}}));  // y >= 5
  p.blocks.push_back(scalar_block("hi", 2.0, {{0, -1.0}}));  // y <= 2
  const SdpSolution sol = solve(p);
  CHECK(sol.status == SdpStatus::infeasible);
}

TEST_CASE("random problems match the brute-force lattice oracle") {
  std::mt19937 rng(2024);
  int optimized = 0;
  for (int k = 0; k < 20; ++k) {
    const SdpProblem p = random_problem(rng, true);
    const SdpSolution sol = solve(p);
    const auto [lattice_margin, best] = brute_force(p);
    if (sol.status == SdpStatus::optimal) {
      REQUIRE(lattice_margin >= -1e-9);
      // The lattice optimum is attainable, so the solver must match or beat
      // it; conversely it cannot beat the true optimum by more than the
      // grid resolution allows.
      CHECK(p.objective.dot(sol.y) <= best + 1e-3);
      CHECK(p.objective.dot(sol.y) >= best - 0.15);  // grid coarseness
      ++optimized;
    } else {
      CHECK(sol.status == SdpStatus::infeasible);
      // No clearly interior lattice point may exist.
      CHECK(lattice_margin < 1e-3);
    }
  }
  CHECK(optimized >= 10);  // most random instances are feasible
}

TEST_CASE("feasible solutions satisfy every block") {
  std::mt19937 rng(7);
  for (int k = 0; k < 10; ++k) {
    const SdpProblem p = random_problem(rng, false);
    const SdpSolution sol = solve(p);
    if (sol.status == SdpStatus::feasible ||
        sol.status == SdpStatus::optimal) {
      for (const auto& b : p.blocks)
        CHECK(min_eigenvalue(block_value(b, sol.y)) >= -1e-7);
    }
  }
}

TEST_CASE("scale robustness") {
  std::mt19937 rng(99);
  SdpProblem p = random_problem(rng, false);
  const SdpSolution base = solve(p);
  for (auto& b : p.blocks) {
    b.f0 *= 1e3;
    for (auto& [j, f] : b.terms) f *= 1e3;
  }
  const SdpSolution scaled = solve(p);
  CHECK(scaled.status == base.status);
}

TEST_CASE("jacobi eigenvalues") {
  CHECK(min_eigenvalue(Eigen::MatrixXd::Identity(5, 5)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  Eigen::Vector3d d(3.0, -2.0, 7.0);
  CHECK(min_eigenvalue(d.asDiagonal().toDenseMatrix()) ==
        doctest::Approx(-2.0).epsilon(1e-12));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 5; ++k) {
    Eigen::MatrixXd m(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) m(i, j) = u(rng);
    m = Eigen::MatrixXd(0.5 * (m + m.transpose()));
    const double jac = min_eigenvalue(m);
    const double bis = smallest_eig_by_det_bisection(m);
    CHECK(std::abs(jac - bis) < 1e-9);

    // Full spectrum is sorted and consistent with the trace.
    const Eigen::VectorXd ev = jacobi_eigenvalues(m);
    for (int i = 1; i < ev.size(); ++i) CHECK(ev(i) >= ev(i - 1));
    CHECK(ev.sum() == doctest::Approx(m.trace()).epsilon(1e-10));
  }
}

TEST_CASE("sdpa export and import") {
  SUBCASE("interval problem body is tiny and exact") {
    SdpProblem p;
    p.num_vars = 1;
    p.blocks.push_back(scalar_block("lo", -2.0, {{0, 1.0}}));
    p.blocks.push_back(scalar_block("hi", 5.0, {{0, -1.0}}));
    p.objective = Eigen::VectorXd::Constant(1, 1.0);
    const std::string text = export_sdpa(p);
    const SdpProblem back = import_sdpa(text);
    CHECK(back.num_vars == 1);
    REQUIRE(back.blocks.size() == 2);
    CHECK(back.blocks[0].f0(0, 0) == -2.0);
    CHECK(export_sdpa(back) == text);
  }

  SUBCASE("round trip byte identity on random problems") {
    std::mt19937 rng(5);
    for (int k = 0; k < 20; ++k) {
      const SdpProblem p = random_problem(rng, k % 2 == 0);
      const std::string once = export_sdpa(p);
      const SdpProblem back = import_sdpa(once);
      CHECK(export_sdpa(back) == once);
      // Feasibility status survives the round trip.
      CHECK(solve(back).status == solve(p).status);
    }
  }

  SUBCASE("comments and junk are rejected or skipped correctly") {
    CHECK_THROWS(import_sdpa("definitely not sdpa"));
  }
}
