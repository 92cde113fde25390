#include "dsas/ts_model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dsas {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

double clamp_logged(double v, double lo, double hi) {
  if (v < lo || v > hi) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    return std::clamp(v, lo, hi);
  }
  return v;
}

void write_matrix(std::ostringstream& out, const char* name,
                  const Eigen::Ref<const Eigen::MatrixXd>& m) {
  out << name;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << " " << format_double(m(i, j));
  out << "\n";
}

}  // namespace

void SchedulingBounds::validate() const {
  if (!(v_min > 0.0))
    throw std::domain_error("bounds: v_min must be positive");
  if (!(v_min < v_max))
    throw std::domain_error("bounds: require v_min < v_max");
  if (!(mu_min < mu_max))
    throw std::domain_error("bounds: require mu_min < mu_max");
}

Mat6 default_output_matrix() {
  Mat6 C = Mat6::Zero();
  C(kHeading, kHeading) = 1.0;
  C(kLateralOffset, kLateralOffset) = 1.0;
  return C;
}

TsModel build_ts_model(const VehicleParams& p, const DriverGains& g,
                       const SchedulingBounds& b, const Mat6& C) {
  b.validate();
  p.validate();
  const double rho = steering_gain(p);
  Vec6 Bw = Vec6::Zero();
  Bw(0) = 1.0 / p.M;
  Bw(1) = p.l_w / p.I_z;

  TsModel ts;
  ts.bounds = b;
  ts.params = p;
  ts.gains = g;
  for (int i = 0; i < TsModel::kRules; ++i) {
    const double z1 = (i & 4) ? b.v_max : b.v_min;
    const double z2 = (i & 2) ? b.z2_max() : b.z2_min();
    const double z3 = (i & 1) ? b.mu_max : b.mu_min;
    ts.corner[i] = {z1, z2, z3};
    ts.vertex[i].A = driver_in_loop_affine(p, g, z1, z2);
    ts.vertex[i].Bu = Vec6::Zero();
    ts.vertex[i].Bu(5) = z3 * rho;
    ts.vertex[i].Bw = Bw;
    ts.vertex[i].C = C;
  }
  return ts;
}

Membership memberships(double v_x, double mu, const SchedulingBounds& b) {
  const double v = clamp_logged(v_x, b.v_min, b.v_max);
  const double m = clamp_logged(mu, b.mu_min, b.mu_max);
  const double z2 = 1.0 / v;
  const double w1 = (v - b.v_min) / (b.v_max - b.v_min);
  const double w2 = (z2 - b.z2_min()) / (b.z2_max() - b.z2_min());
  const double w3 = (m - b.mu_min) / (b.mu_max - b.mu_min);
  Membership eta;
  for (int i = 0; i < TsModel::kRules; ++i) {
    const double f1 = (i & 4) ? w1 : 1.0 - w1;
    const double f2 = (i & 2) ? w2 : 1.0 - w2;
    const double f3 = (i & 1) ? w3 : 1.0 - w3;
    eta[i] = f1 * f2 * f3;
  }
  return eta;
}

std::uint64_t scheduling_clamp_count() {
  return g_clamp_count.load(std::memory_order_relaxed);
}

void reset_scheduling_clamp_count() {
  g_clamp_count.store(0, std::memory_order_relaxed);
}

std::pair<Mat6, Vec6> reconstruct(const TsModel& ts, double v_x, double mu) {
  const Membership eta = memberships(v_x, mu, ts.bounds);
  Mat6 A = Mat6::Zero();
  Vec6 Bu = Vec6::Zero();
  for (int i = 0; i < TsModel::kRules; ++i) {
    A += eta[i] * ts.vertex[i].A;
    Bu += eta[i] * ts.vertex[i].Bu;
  }
  return {A, Bu};
}

std::string serialize(const TsModel& ts) {
  std::ostringstream out;
  out << "dsas-ts-model v1\n";
  out << "rules " << TsModel::kRules << "\n";
  out << "bounds " << format_double(ts.bounds.v_min) << " "
      << format_double(ts.bounds.v_max) << " "
      << format_double(ts.bounds.mu_min) << " "
      << format_double(ts.bounds.mu_max) << "\n";
  for (int i = 0; i < TsModel::kRules; ++i) {
    out << "corner " << i << " " << format_double(ts.corner[i][0]) << " "
        << format_double(ts.corner[i][1]) << " "
        << format_double(ts.corner[i][2]) << "\n";
    write_matrix(out, "A", ts.vertex[i].A);
    write_matrix(out, "Bu", ts.vertex[i].Bu);
    write_matrix(out, "Bw", ts.vertex[i].Bw);
    write_matrix(out, "C", ts.vertex[i].C);
  }
  return out.str();
}

TsModel deserialize_ts_model(const std::string& text) {
  std::istringstream in(text);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "dsas-ts-model" || version != "v1")
    throw std::runtime_error("ts model: unrecognized header");
  std::string key;
  int rules = 0;
  in >> key >> rules;
  if (key != "rules" || rules != TsModel::kRules)
    throw std::runtime_error("ts model: unexpected rule count");
  TsModel ts;
  in >> key >> ts.bounds.v_min >> ts.bounds.v_max >> ts.bounds.mu_min >>
      ts.bounds.mu_max;
  if (key != "bounds") throw std::runtime_error("ts model: missing bounds");
  auto read_matrix = [&](const char* name, Eigen::Ref<Eigen::MatrixXd> m) {
    in >> key;
    if (key != name)
      throw std::runtime_error(std::string("ts model: expected ") + name);
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b) in >> m(a, b);
  };
  for (int i = 0; i < TsModel::kRules; ++i) {
    int idx = -1;
    in >> key >> idx;
    if (key != "corner" || idx != i)
      throw std::runtime_error("ts model: corner records out of order");
    in >> ts.corner[i][0] >> ts.corner[i][1] >> ts.corner[i][2];
    Eigen::MatrixXd A(6, 6), Bu(6, 1), Bw(6, 1), C(6, 6);
    read_matrix("A", A);
    read_matrix("Bu", Bu);
    read_matrix("Bw", Bw);
    read_matrix("C", C);
    ts.vertex[i].A = A;
    ts.vertex[i].Bu = Bu;
    ts.vertex[i].Bw = Bw;
    ts.vertex[i].C = C;
  }
  if (!in) throw std::runtime_error("ts model: truncated file");
  return ts;
}

std::uint64_t fingerprint(const TsModel& ts) {
  const std::string text = serialize(ts);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SchedulingBounds scheduling_bounds_from_config(const Config& cfg) {
  SchedulingBounds d;
  SchedulingBounds b;
  b.v_min = cfg.number_or("bounds", "v_min", d.v_min);
  b.v_max = cfg.number_or("bounds", "v_max", d.v_max);
  b.mu_min = cfg.number_or("bounds", "mu_min", d.mu_min);
  b.mu_max = cfg.number_or("bounds", "mu_max", d.mu_max);
  b.validate();
  return b;
}

void scheduling_bounds_to_config(const SchedulingBounds& b, Config& cfg) {
  cfg.set_number("bounds", "v_min", b.v_min);
  cfg.set_number("bounds", "v_max", b.v_max);
  cfg.set_number("bounds", "mu_min", b.mu_min);
  cfg.set_number("bounds", "mu_max", b.mu_max);
}

}  // namespace dsas
