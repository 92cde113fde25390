#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <string>

#include "dsas/config.hpp"
#include "dsas/synthesis.hpp"
#include "dsas/ts_model.hpp"

using namespace dsas;

namespace {

TsModel default_model() {
  return build_ts_model(VehicleParams{}, DriverGains{}, SchedulingBounds{},
                        default_output_matrix());
}

DesignSpec default_spec() {
  return design_spec_from_config(Config{}, VehicleParams{});
}

}  // namespace

TEST_CASE("variable layout is a bijection onto [0, total)") {
  const VarLayout L;
  std::set<int> seen;
  auto mark = [&](int idx) {
    CHECK(idx >= 0);
    CHECK(idx < L.total());
    CHECK(seen.insert(idx).second);  // no index assigned twice
  };
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b) mark(L.x(a, b));
  for (int i = 0; i < VarLayout::rules; ++i) {
    mark(L.s(i));
    for (int k = 0; k < 6; ++k) {
      mark(L.v(i, k));
      mark(L.w(i, k));
      mark(L.x23(i, k));
      mark(L.x31(i, k));
      mark(L.x32(i, k));
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        mark(L.x21(i, a, b));
        mark(L.x22(i, a, b));
      }
    mark(L.x33(i));
  }
  mark(L.tau2());
  mark(L.gamma());
  CHECK(static_cast<int>(seen.size()) == L.total());
  CHECK(L.total() == 855);
}

TEST_CASE("assembled problem block inventory") {
  const SdpProblem p = assemble_problem(default_model(), default_spec());
  CHECK(p.num_vars == 855);
  CHECK(p.blocks.size() == 72);
  std::map<std::string, int> families;
  for (const auto& b : p.blocks)
    ++families[b.name.substr(0, b.name.find('['))];
  // 8 stabilization rules: 8 diagonal + 28 unordered-pair conditions.
  CHECK(families["Psi"] == 36);
  CHECK(families["sat"] == 8);
  CHECK(families["poly"] == 8);
  CHECK(families["perf"] == 8);
  CHECK(families["Spos"] == 8);
  CHECK(families["Xpos"] == 1);
  CHECK(families["decay"] == 1);
  CHECK(families["tau2pos"] == 1);
  CHECK(families["gammapos"] == 1);
}

TEST_CASE("extract_gains inverts V = K X and rejects a singular X") {
  Mat6 X = Mat6::Identity();
  X(0, 0) = 4.0;
  X(3, 3) = 0.25;
  X(1, 2) = X(2, 1) = 0.1;
  std::array<Row6, TsModel::kRules> K_ref{};
  std::array<Row6, TsModel::kRules> V{};
  for (int i = 0; i < TsModel::kRules; ++i) {
    for (int k = 0; k < 6; ++k) K_ref[i](k) = 0.5 * i - 0.3 * k;
    V[i] = K_ref[i] * X;
  }
  const auto K = extract_gains(X, V);
  for (int i = 0; i < TsModel::kRules; ++i)
    CHECK((K[i] - K_ref[i]).cwiseAbs().maxCoeff() < 1e-12);

  Mat6 bad = Mat6::Identity();
  bad(5, 5) = 1e-13;  // condition number 1e13
  CHECK_THROWS_AS(extract_gains(bad, V), std::runtime_error);
  bad(5, 5) = -1.0;
  CHECK_THROWS_AS(extract_gains(bad, V), std::runtime_error);
}

TEST_CASE("decision vector round trips through the structured result") {
  const TsModel ts = default_model();
  DesignSpec spec = default_spec();
  spec.tau_1 = 1.25;
  const VarLayout L;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(L.total());
  // Any structurally valid point: X = I plus distinct off-diagonal tags.
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      y(L.x(a, b)) = (a == b) ? 1.0 : 0.01 * (a + 2 * b);
  for (int i = 0; i < VarLayout::rules; ++i) {
    y(L.s(i)) = 1.0 + 0.1 * i;
    for (int k = 0; k < 6; ++k) {
      y(L.v(i, k)) = 0.2 * i - 0.1 * k;
      y(L.w(i, k)) = 0.05 * i + 0.02 * k;
      y(L.x23(i, k)) = 0.003 * (i + k);
      y(L.x31(i, k)) = 0.004 * (i - k);
      y(L.x32(i, k)) = 0.005 * (i + 2 * k);
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        y(L.x21(i, a, b)) = 0.001 * (a - b + i);
        y(L.x22(i, a, b)) = 0.002 * (a + b - i);
      }
    y(L.x33(i)) = 0.5 + 0.01 * i;
  }
  y(L.tau2()) = 0.75;
  y(L.gamma()) = 12.0;

  SdpSolution sol;
  sol.status = SdpStatus::feasible;
  sol.y = y;
  const SynthesisResult r = result_from_solution(ts, spec, sol);
  CHECK(r.tau1 == 1.25);
  CHECK(r.tau2 == 0.75);
  CHECK(r.gamma == 12.0);
  CHECK(r.ts_fingerprint == fingerprint(ts));
  const Eigen::VectorXd back = result_to_decision_vector(r);
  REQUIRE(back.size() == y.size());
  CHECK((back - y).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gains file round trips to the last bit") {
  const TsModel ts = default_model();
  SynthesisResult r;
  r.X = Mat6::Identity();
  r.X(0, 1) = r.X(1, 0) = 1.0 / 3.0;
  r.tau1 = 0.3;
  r.tau2 = 0.2;
  r.gamma = 7.5;
  r.u_max = 15.0;
  r.ts_fingerprint = fingerprint(ts);
  for (int i = 0; i < TsModel::kRules; ++i) {
    for (int k = 0; k < 6; ++k) {
      r.V[i](k) = std::sqrt(2.0) * (i + 1) - k;
      r.W[i](k) = 0.1 * i + 1e-17 * k;
      r.X23[i](k) = -0.4 * k;
      r.X31[i](k) = 0.7;
      r.X32[i](k) = -1.0 / 7.0;
    }
    r.S[i] = 1e-9 + i;
    r.X21[i].setConstant(0.25 * i);
    r.X22[i].setIdentity();
    r.X33[i] = 2.0;
  }
  r.K = extract_gains(r.X, r.V);
  const SynthesisResult back = deserialize_gains(serialize_gains(r));
  CHECK((back.X - r.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.tau1 == r.tau1);
  CHECK(back.gamma == r.gamma);
  CHECK(back.ts_fingerprint == r.ts_fingerprint);
  for (int i = 0; i < TsModel::kRules; ++i) {
    CHECK((back.V[i] - r.V[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.K[i] - r.K[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.S[i] == r.S[i]);
  }
}

TEST_CASE("fixed-rate synthesis yields a verifiable certificate") {
  const TsModel ts = default_model();
  DesignSpec spec = default_spec();
  spec.tau_1 = 5.0;
  spec.objective = DesignSpec::Objective::feasibility;
  const SdpSolution sol = solve(assemble_problem(ts, spec));
  REQUIRE((sol.status == SdpStatus::feasible ||
           sol.status == SdpStatus::optimal));
  const SynthesisResult r = result_from_solution(ts, spec, sol);
  CHECK(r.tau1 == 5.0);
  CHECK(r.tau2 < r.tau1);

  const VerificationReport rep = verify_certificate(ts, spec, r);
  CHECK(rep.passed);
  CHECK(rep.first_failure() == nullptr);

  // A 10% bump on one Lyapunov entry must be caught.
  SynthesisResult tampered = r;
  tampered.X(0, 0) *= 1.1;
  const VerificationReport bad = verify_certificate(ts, spec, tampered);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.first_failure() != nullptr);
  CHECK(bad.first_failure()->margin < -1e-6);
}

TEST_CASE("bisection reports infeasibility when the bracket is empty") {
  const TsModel ts = default_model();
  DesignSpec spec = default_spec();
  // A constraint row with |h|^2 = 1e6 caps h'Xh <= 1, so X(0,0) <= 1e-6,
  // which contradicts the positive-definiteness floor on X at every rate.
  spec.h_rows.push_back(1e3 * Vec6::Unit(0));
  CHECK_THROWS_AS(bisect_tau1(ts, spec), InfeasibleError);
}
