#include "donormag/errors.hpp"
#include "donormag/spincore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace donormag {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index p = 0; p < a.rows(); ++p) {
    for (Eigen::Index q = 0; q < a.cols(); ++q) {
      if (p != q) sum += a(p, q) * a(p, q);
    }
  }
  return std::sqrt(sum);
}

// Zeroes a(p, q) with one rotation, accumulating it into v.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (r != p && r != q) {
      const double arp = a(r, p);
      const double arq = a(r, q);
      a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
      a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
    }
    const double vrp = v(r, p);
    const double vrq = v(r, q);
    v(r, p) = vrp - s * (vrq + tau * vrp);
    v(r, q) = vrq + s * (vrp - tau * vrq);
  }
}

// First basis index whose magnitude is within rounding of the column maximum.
Eigen::Index dominant_index(const Eigen::VectorXd& col) {
  const double peak = col.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < col.size(); ++k) {
    if (std::abs(col(k)) >= peak * (1.0 - 1e-10)) return k;
  }
  return 0;
}

}  // namespace

EigenSystem eigensystem(const Eigen::MatrixXd& H, const JacobiOptions& options) {
  if (H.rows() != H.cols()) throw std::invalid_argument("eigensystem: matrix is not square");
  const Eigen::Index n = H.rows();
  if (n == 0) return EigenSystem{{}, Eigen::MatrixXd(0, 0), 0};
  const double scale = H.cwiseAbs().maxCoeff();
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("eigensystem: matrix is not symmetric");
  }

  Eigen::MatrixXd a = 0.5 * (H + H.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double target = options.tolerance * a.norm();

  int sweep = 0;
  double off = off_diagonal_norm(a);
  while (off > target) {
    if (sweep == options.max_sweeps) {
      std::ostringstream msg;
      msg << "eigensystem: Jacobi did not converge after " << sweep
          << " sweeps, off-diagonal norm " << off << " (target " << target << ")";
      throw NumericalFailure(msg.str(), off);
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
    ++sweep;
    off = off_diagonal_norm(a);
  }

  // Ascending energies. Within a degenerate cluster the vectors are ordered by
  // dominant basis index while the energy list stays sorted.
  std::vector<Eigen::Index> dominant(n);
  for (Eigen::Index k = 0; k < n; ++k) dominant[k] = dominant_index(v.col(k));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) { return a(l, l) < a(r, r); });

  std::vector<double> sorted(n);
  for (Eigen::Index k = 0; k < n; ++k) sorted[k] = a(order[k], order[k]);

  const double cluster = 1e-9 * std::max(scale, 1.0);
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && a(order[stop], order[stop]) - a(order[stop - 1], order[stop - 1]) <= cluster) ++stop;
    std::stable_sort(order.begin() + start, order.begin() + stop,
                     [&](Eigen::Index l, Eigen::Index r) { return dominant[l] < dominant[r]; });
    start = stop;
  }

  EigenSystem es;
  es.dimension = static_cast<int>(n);
  es.energies.resize(n);
  es.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[k];
    es.energies[k] = sorted[k];
    Eigen::VectorXd col = v.col(src);
    if (col(dominant[src]) < 0.0) col = -col;
    es.vectors.col(k) = col;
  }
  return es;
}

}  // namespace donormag
