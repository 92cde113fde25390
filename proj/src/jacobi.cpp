#include <cmath>

#include "dsas/sdp.hpp"

namespace dsas {

// Cyclic Jacobi with rotations applied until the off-diagonal Frobenius
// norm drops below 1e-12 relative to the matrix scale.
Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXd& m_sym) {
  const Eigen::Index n = m_sym.rows();
  Eigen::MatrixXd a = 0.5 * (m_sym + m_sym.transpose());
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) < 1e-12 * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // Rotate rows/columns p and q.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  Eigen::VectorXd ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

double min_eigenvalue(const Eigen::MatrixXd& m_sym) {
  return jacobi_eigenvalues(m_sym)(0);
}

}  // namespace dsas
