// Command-line front end: synthesize gains, run closed-loop scenarios,
// verify certificates, export the LMI system in SDPA format.
//
// Exit codes: 0 ok, 1 usage/IO error, 2 infeasible synthesis,
// 3 state-constraint violation during simulation, 4 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsas/interaction.hpp"
#include "dsas/sdp.hpp"
#include "dsas/sim.hpp"
#include "dsas/synthesis.hpp"
#include "dsas/ts_model.hpp"
#include "dsas/vehicle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitConstraint = 3;
constexpr int kExitVerification = 4;

dsas::Config load_config(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("DSAS_CONFIG")) path = env;
  }
  if (path.empty()) return dsas::Config{};
  return dsas::Config::load(path);
}

struct ModelBundle {
  dsas::VehicleParams vehicle;
  dsas::DriverGains driver;
  dsas::SchedulingBounds bounds;
  dsas::TsModel ts;
  dsas::DesignSpec design;
  dsas::SimParams sim;
};

ModelBundle build_bundle(const dsas::Config& cfg) {
  ModelBundle b;
  b.vehicle = dsas::vehicle_params_from_config(cfg);
  b.driver = dsas::driver_gains_from_config(cfg);
  b.bounds = dsas::scheduling_bounds_from_config(cfg);
  b.ts = dsas::build_ts_model(b.vehicle, b.driver, b.bounds,
                              dsas::default_output_matrix());
  b.design = dsas::design_spec_from_config(cfg, b.vehicle);
  b.sim.vehicle = b.vehicle;
  b.sim.driver = b.driver;
  b.sim.weighting = dsas::weighting_params_from_config(cfg);
  b.sim.activity = dsas::activity_params_from_config(cfg);
  return b;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const std::string& config_path, const std::string& out_path,
              double fixed_tau1) {
  const dsas::Config cfg = load_config(config_path);
  const ModelBundle b = build_bundle(cfg);
  const dsas::SdpOptions options = dsas::SdpOptions::from_config(cfg);

  dsas::SynthesisResult result;
  if (fixed_tau1 > 0.0) {
    dsas::DesignSpec spec = b.design;
    spec.tau_1 = fixed_tau1;
    const dsas::SdpProblem problem = dsas::assemble_problem(b.ts, spec);
    const dsas::SdpSolution sol = dsas::solve(problem, options);
    if (sol.status == dsas::SdpStatus::infeasible) {
      std::cerr << "synth: infeasible at tau_1 = " << fixed_tau1 << "\n";
      return kExitInfeasible;
    }
    if (sol.status == dsas::SdpStatus::numerical_failure)
      throw std::runtime_error("synth: solver failed numerically");
    result = dsas::result_from_solution(b.ts, spec, sol);
  } else {
    try {
      auto [tau1, best] = dsas::bisect_tau1(b.ts, b.design, options);
      result = std::move(best);
      result.tau1 = tau1;
    } catch (const dsas::InfeasibleError& e) {
      std::cerr << "synth: " << e.what() << "\n";
      return kExitInfeasible;
    }
  }

  dsas::save_gains(result, out_path);

  dsas::DesignSpec spec = b.design;
  spec.tau_1 = result.tau1;
  const dsas::VerificationReport report =
      dsas::verify_certificate(b.ts, spec, result);
  std::cout << "gains written to " << out_path << "\n"
            << "tau_1 = " << dsas::format_double(result.tau1) << "\n"
            << "tau_2 = " << dsas::format_double(result.tau2) << "\n"
            << "gamma = " << dsas::format_double(result.gamma) << "\n";
  double worst = 0.0;
  for (const auto& item : report.items) worst = std::min(worst, item.margin);
  std::cout << "worst verification margin = " << dsas::format_double(worst)
            << " (" << (report.passed ? "pass" : "FAIL") << ")\n";
  return report.passed ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// simulate

// Minimal self-contained SVG line chart of the quantities a reviewer wants
// to eyeball: lane offset, assistance torque, driver torque, weighting.
std::string render_svg(const dsas::SimTrace& trace) {
  struct Series {
    const char* label;
    const char* color;
    std::vector<double> v;
  };
  std::vector<Series> series = {{"y_l [m]", "#1f77b4", {}},
                                {"T_c [N m]", "#d62728", {}},
                                {"T_d [N m]", "#2ca02c", {}},
                                {"mu", "#9467bd", {}}};
  std::vector<double> ts;
  const size_t stride = std::max<size_t>(1, trace.samples.size() / 2000);
  for (size_t k = 0; k < trace.samples.size(); k += stride) {
    const auto& s = trace.samples[k];
    ts.push_back(s.t);
    series[0].v.push_back(s.x(dsas::kLateralOffset));
    series[1].v.push_back(s.T_c);
    series[2].v.push_back(s.T_d);
    series[3].v.push_back(s.mu);
  }
  const double width = 900, pane_h = 160, margin = 50;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << series.size() * pane_h + margin
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  const double t0 = ts.front(), t1 = ts.back();
  for (size_t p = 0; p < series.size(); ++p) {
    double lo = series[p].v[0], hi = lo;
    for (double v : series[p].v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < 1e-9) hi = lo + 1.0;
    const double top = p * pane_h + 20, bottom = top + pane_h - 40;
    auto xpix = [&](double t) {
      return margin + (t - t0) / (t1 - t0) * (width - 2 * margin);
    };
    auto ypix = [&](double v) {
      return bottom - (v - lo) / (hi - lo) * (bottom - top);
    };
    out << "<rect x=\"" << margin << "\" y=\"" << top << "\" width=\""
        << width - 2 * margin << "\" height=\"" << bottom - top
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    out << "<text x=\"" << margin << "\" y=\"" << top - 6 << "\">"
        << series[p].label << "  [" << lo << ", " << hi << "]</text>\n";
    out << "<polyline fill=\"none\" stroke=\"" << series[p].color
        << "\" stroke-width=\"1.2\" points=\"";
    for (size_t k = 0; k < ts.size(); ++k)
      out << xpix(ts[k]) << ',' << ypix(series[p].v[k]) << ' ';
    out << "\"/>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\""
      << series.size() * pane_h + margin - 15 << "\">t [s], " << t0 << " to "
      << t1 << "</text>\n</svg>\n";
  return out.str();
}

int run_one_scenario(const dsas::Scenario& sc, const ModelBundle& b,
                     const dsas::SynthesisResult& gains,
                     const std::string& csv_path, bool plot) {
  const dsas::SimTrace trace = dsas::run(sc, gains, b.ts, b.sim);
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  dsas::write_csv(trace, out);
  if (!out) throw std::runtime_error("write failed: " + csv_path);
  if (plot) {
    std::string svg_path = csv_path;
    const size_t dot = svg_path.find_last_of('.');
    svg_path = (dot == std::string::npos ? svg_path : svg_path.substr(0, dot))
               + ".svg";
    write_text(svg_path, render_svg(trace));
  }
  const auto rows = dsas::state_constraint_rows(b.vehicle);
  const dsas::ConstraintReport report = dsas::check_constraints(
      trace, std::vector<dsas::Vec6>(rows.begin(), rows.end()));
  for (size_t k = 0; k < report.rows.size(); ++k) {
    if (report.rows[k].violated)
      std::cerr << sc.name << ": constraint row " << k
                << " violated, max h^T x = "
                << dsas::format_double(report.rows[k].max_value) << "\n";
  }
  std::cout << sc.name << ": " << trace.samples.size() << " samples -> "
            << csv_path << (report.any_violated ? " (CONSTRAINT VIOLATION)"
                                                : "")
            << "\n";
  return report.any_violated ? kExitConstraint : kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& gains_path,
                 const std::string& preset_name,
                 const std::string& scenario_path, bool all_presets,
                 const std::string& out_path, const std::string& out_dir,
                 bool plot) {
  const dsas::Config cfg = load_config(config_path);
  const ModelBundle b = build_bundle(cfg);
  const dsas::SynthesisResult gains = dsas::load_gains(gains_path);

  if (all_presets) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create " << out_dir << ": " << ec.message()
                << "\n";
      return kExitUsage;
    }
    const std::vector<std::string> names = {"test1", "test2", "test3"};
    std::vector<std::future<int>> jobs;
    for (const auto& name : names)
      jobs.push_back(std::async(std::launch::async, [&, name] {
        return run_one_scenario(dsas::preset(name), b, gains,
                                out_dir + "/" + name + ".csv", plot);
      }));
    int code = kExitOk;
    for (auto& j : jobs) code = std::max(code, j.get());
    return code;
  }

  dsas::Scenario sc;
  if (!scenario_path.empty())
    sc = dsas::scenario_from_config(dsas::Config::load(scenario_path));
  else
    sc = dsas::preset(preset_name);
  return run_one_scenario(sc, b, gains, out_path, plot);
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& config_path, const std::string& gains_path) {
  const dsas::Config cfg = load_config(config_path);
  const ModelBundle b = build_bundle(cfg);
  const dsas::SynthesisResult gains = dsas::load_gains(gains_path);

  std::vector<dsas::VerificationItem> items;

  // Module invariant suite, then the certificate itself.
  {
    dsas::VerificationItem it{"model:fingerprint", 0.0, false};
    it.pass = gains.ts_fingerprint == dsas::fingerprint(b.ts);
    it.margin = it.pass ? 0.0 : -1.0;
    items.push_back(it);
  }
  {
    // Membership simplex and exact reconstruction on a coarse grid.
    double worst = 0.0;
    for (int a = 0; a <= 20; ++a)
      for (int c = 0; c <= 20; ++c) {
        const double vx = b.bounds.v_min +
                          a * (b.bounds.v_max - b.bounds.v_min) / 20.0;
        const double mu = b.bounds.mu_min +
                          c * (b.bounds.mu_max - b.bounds.mu_min) / 20.0;
        const auto eta = dsas::memberships(vx, mu, b.bounds);
        double sum = 0.0, neg = 0.0;
        for (double e : eta) {
          sum += e;
          neg = std::min(neg, e);
        }
        worst = std::max(worst, std::abs(sum - 1.0));
        worst = std::max(worst, -neg);
        const auto [A, Bu] = dsas::reconstruct(b.ts, vx, mu);
        const dsas::Mat6 Aref =
            dsas::driver_in_loop_affine(b.vehicle, b.driver, vx, 1.0 / vx);
        worst = std::max(worst, (A - Aref).cwiseAbs().maxCoeff());
        const dsas::PlantMatrices pm =
            dsas::build_plant_matrices(b.vehicle, vx);
        worst = std::max(worst, (Bu - mu * pm.B).cwiseAbs().maxCoeff());
      }
    items.push_back({"model:reconstruction", -worst, worst < 1e-10});
  }
  {
    // Weighting endpoints and range.
    double worst = 0.0;
    worst = std::max(worst, std::abs(dsas::weighting_mu(
                                b.sim.weighting.omega_3, b.sim.weighting) -
                            b.sim.weighting.mu_min));
    for (int k = 0; k <= 100; ++k) {
      const double mu = dsas::weighting_mu(k / 100.0, b.sim.weighting);
      if (mu < b.sim.weighting.mu_min - 1e-12 || mu > 1.0 + 1e-12)
        worst = std::max(worst, 1.0);
    }
    items.push_back({"interaction:weighting-range", -worst, worst < 1e-9});
  }

  dsas::DesignSpec spec = b.design;
  spec.tau_1 = gains.tau1;
  const dsas::VerificationReport cert =
      dsas::verify_certificate(b.ts, spec, gains);
  items.insert(items.end(), cert.items.begin(), cert.items.end());

  bool all_pass = true;
  for (const auto& it : items) {
    std::cout << (it.pass ? "PASS " : "FAIL ") << it.name
              << "  margin = " << dsas::format_double(it.margin) << "\n";
    all_pass = all_pass && it.pass;
  }
  std::cout << (all_pass ? "verification passed" : "verification FAILED")
            << " (" << items.size() << " items)\n";
  return all_pass ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// export-sdpa

int cmd_export_sdpa(const std::string& config_path,
                    const std::string& out_path, double tau1) {
  const dsas::Config cfg = load_config(config_path);
  ModelBundle b = build_bundle(cfg);
  if (tau1 > 0.0) b.design.tau_1 = tau1;
  const dsas::SdpProblem problem = dsas::assemble_problem(b.ts, b.design);
  write_text(out_path, dsas::export_sdpa(problem));
  std::cout << "wrote " << out_path << " (" << problem.num_vars
            << " variables, " << problem.blocks.size() << " blocks)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared lateral control toolkit: gain-scheduled synthesis "
               "with saturation handling, closed-loop simulation, and "
               "certificate verification"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "Configuration file (default: $DSAS_CONFIG if set)");

  auto* synth = app.add_subcommand("synth", "Synthesize feedback gains");
  std::string synth_out = "gains.txt";
  double synth_tau1 = 0.0;
  synth->add_option("-o,--output", synth_out, "Gains file to write");
  synth->add_option("--tau1", synth_tau1,
                    "Fix the decay rate instead of bisecting for the "
                    "largest feasible one");

  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  std::string sim_gains, sim_preset = "test1", sim_scenario;
  std::string sim_out = "trace.csv", sim_dir = ".";
  bool sim_all = false, sim_plot = false;
  sim->add_option("-g,--gains", sim_gains, "Gains file")->required();
  sim->add_option("--preset", sim_preset, "Built-in scenario: test1-test3");
  sim->add_option("--scenario", sim_scenario, "Scenario config file");
  sim->add_flag("--all-presets", sim_all, "Run test1..test3 in parallel");
  sim->add_option("-o,--output", sim_out, "Trace CSV path");
  sim->add_option("--out-dir", sim_dir, "Output directory (--all-presets)");
  sim->add_flag("--plot", sim_plot, "Also write an SVG line chart");

  auto* verify = app.add_subcommand("verify", "Re-check a gains file");
  std::string verify_gains;
  verify->add_option("-g,--gains", verify_gains, "Gains file")->required();

  auto* exp = app.add_subcommand("export-sdpa",
                                 "Write the LMI system in SDPA sparse format");
  std::string exp_out;
  double exp_tau1 = 0.0;
  exp->add_option("-o,--output", exp_out, "Output .dat-s path")->required();
  exp->add_option("--tau1", exp_tau1, "Decay rate to assemble at");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(config_path, synth_out, synth_tau1);
    if (sim->parsed())
      return cmd_simulate(config_path, sim_gains, sim_preset, sim_scenario,
                          sim_all, sim_out, sim_dir, sim_plot);
    if (verify->parsed()) return cmd_verify(config_path, verify_gains);
    if (exp->parsed()) return cmd_export_sdpa(config_path, exp_out, exp_tau1);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
