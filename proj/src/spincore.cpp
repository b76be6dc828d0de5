#include "donormag/spincore.hpp"

#include "donormag/constants.hpp"
#include "donormag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <unsupported/Eigen/KroneckerProduct>

namespace donormag {

namespace {

bool is_half_integer(double s) {
  const double twice = 2.0 * s;
  return s >= 0.0 && std::abs(twice - std::round(twice)) < 1e-12;
}

int multiplicity(double s) { return static_cast<int>(std::lround(2.0 * s)) + 1; }

}  // namespace

void SpinSpecies::validate() const {
  if (!is_half_integer(S) || !is_half_integer(I)) {
    throw std::invalid_argument("species '" + name + "': S and I must be non-negative half-integers");
  }
  if (std::abs(S - 0.5) > 1e-12) {
    throw std::invalid_argument("species '" + name + "': only S = 1/2 is supported");
  }
  if (!(g > 0.0)) throw std::invalid_argument("species '" + name + "': g must be positive");
  if (!(A_MHz >= 0.0)) throw std::invalid_argument("species '" + name + "': A must be >= 0");
}

int SpinSpecies::electron_dim() const { return multiplicity(S); }
int SpinSpecies::nuclear_dim() const { return multiplicity(I); }

SpinSpecies bismuth() { return {"Bi", 0.5, 4.5, 2.0003, 1475.4}; }

SpinSpecies bare_spin_half(double g) { return {"e12", 0.5, 0.0, g, 0.0}; }

SpinSpecies bundled_species(const std::string& name) {
  if (name == "Bi") return bismuth();
  if (name == "e12") return bare_spin_half();
  throw std::invalid_argument("unknown bundled species '" + name + "'");
}

SpinOperators spin_operators(double s) {
  if (!is_half_integer(s)) {
    throw std::invalid_argument("spin quantum number must be a non-negative half-integer");
  }
  const int d = multiplicity(s);
  SpinOperators ops;
  ops.z = Eigen::MatrixXd::Zero(d, d);
  ops.plus = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = s - k;
    ops.z(k, k) = m;
    // S_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; |m+1> sits at row k-1.
    if (k > 0) ops.plus(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  ops.minus = ops.plus.transpose();
  ops.x = 0.5 * (ops.plus + ops.minus);
  ops.y = std::complex<double>(0.0, -0.5) * (ops.plus - ops.minus).cast<std::complex<double>>();
  return ops;
}

Eigen::MatrixXd build_hamiltonian(const SpinSpecies& species, FieldPoint field) {
  species.validate();
  if (!(field.B_mT >= 0.0)) throw std::invalid_argument("field must be >= 0 mT");

  const SpinOperators s = spin_operators(species.S);
  const SpinOperators n = spin_operators(species.I);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(species.nuclear_dim(), species.nuclear_dim());

  const double zeeman = species.g * constants::kBohrMHzPerMilliTesla * field.B_mT;
  Eigen::MatrixXd H = zeeman * Eigen::kroneckerProduct(s.z, one).eval();
  if (species.A_MHz != 0.0) {
    Eigen::MatrixXd coupling = Eigen::kroneckerProduct(s.z, n.z).eval();
    coupling += 0.5 * Eigen::kroneckerProduct(s.plus, n.minus).eval();
    coupling += 0.5 * Eigen::kroneckerProduct(s.minus, n.plus).eval();
    H += species.A_MHz * coupling;
  }
  return H;
}

Eigen::MatrixXd electron_operator_x(const SpinSpecies& species) {
  const int nd = species.nuclear_dim();
  return Eigen::kroneckerProduct(spin_operators(species.S).x, Eigen::MatrixXd::Identity(nd, nd));
}

Eigen::MatrixXd electron_operator_z(const SpinSpecies& species) {
  const int nd = species.nuclear_dim();
  return Eigen::kroneckerProduct(spin_operators(species.S).z, Eigen::MatrixXd::Identity(nd, nd));
}

std::vector<double> breit_rabi_levels(const SpinSpecies& species, FieldPoint field) {
  species.validate();
  if (std::abs(species.S - 0.5) > 1e-12) {
    throw UnsupportedSpecies("Breit-Rabi levels require S = 1/2");
  }
  const double I = species.I;
  const double A = species.A_MHz;
  const double zeeman = species.g * constants::kBohrMHzPerMilliTesla * field.B_mT;
  const int nd = species.nuclear_dim();

  std::vector<double> levels;
  levels.reserve(2 * nd);
  if (A == 0.0) {
    for (int k = 0; k < nd; ++k) {
      levels.push_back(-0.5 * zeeman);
      levels.push_back(0.5 * zeeman);
    }
    std::sort(levels.begin(), levels.end());
    return levels;
  }

  const double half_split = 0.5 * A * (I + 0.5);
  const double xi = zeeman / (A * (I + 0.5));
  // Stretched states |+1/2, I> and |-1/2, -I> are exact product states.
  levels.push_back(-0.25 * A + half_split * (1.0 + xi));
  levels.push_back(-0.25 * A + half_split * (1.0 - xi));
  for (int k = 0; k + 1 < nd; ++k) {
    const double mF = -I + 0.5 + k;
    const double root = std::sqrt(1.0 + 4.0 * mF * xi / (2.0 * I + 1.0) + xi * xi);
    levels.push_back(-0.25 * A + half_split * root);
    levels.push_back(-0.25 * A - half_split * root);
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

TransitionTable transition_table(const EigenSystem& es, const SpinSpecies& species,
                                 double intensity_floor) {
  if (es.dimension != species.dimension() || es.vectors.rows() != es.dimension) {
    throw std::invalid_argument("eigensystem dimension does not match species");
  }
  const Eigen::MatrixXd sx = es.vectors.transpose() * electron_operator_x(species) * es.vectors;
  TransitionTable table;
  table.reserve(static_cast<std::size_t>(es.dimension * (es.dimension - 1) / 2));
  for (int i = 0; i < es.dimension; ++i) {
    for (int j = i + 1; j < es.dimension; ++j) {
      const double intensity = sx(i, j) * sx(i, j);
      table.push_back({i, j, es.energies[j] - es.energies[i], intensity, intensity >= intensity_floor});
    }
  }
  return table;
}

namespace {

double pair_frequency(const SpinSpecies& species, double B, int i, int j) {
  const EigenSystem es = eigensystem(build_hamiltonian(species, FieldPoint(B)));
  return es.energies[j] - es.energies[i];
}

}  // namespace

std::vector<ResonanceLine> resonance_fields(const SpinSpecies& species, double f_mw_GHz,
                                            const ResonanceSearch& search) {
  species.validate();
  if (!(f_mw_GHz > 0.0)) throw std::invalid_argument("microwave frequency must be positive");
  if (!(search.B_start_mT >= 0.0) || !(search.B_stop_mT > search.B_start_mT)) {
    throw std::invalid_argument("field range must be ascending and non-negative");
  }
  if (search.grid_points < 2) throw std::invalid_argument("resonance grid needs >= 2 points");

  const double f_mw = 1e3 * f_mw_GHz;
  const int n = search.grid_points;
  const int dim = species.dimension();
  const double step = (search.B_stop_mT - search.B_start_mT) / (n - 1);

  std::vector<std::vector<double>> energies(n);
  for (int k = 0; k < n; ++k) {
    const double B = search.B_start_mT + k * step;
    energies[k] = eigensystem(build_hamiltonian(species, FieldPoint(B))).energies;
  }

  const Eigen::MatrixXd sx_product = electron_operator_x(species);
  std::vector<ResonanceLine> lines;
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      for (int k = 0; k + 1 < n; ++k) {
        double lo = search.B_start_mT + k * step;
        double hi = (k + 2 == n) ? search.B_stop_mT : lo + step;
        const double d_lo = energies[k][j] - energies[k][i] - f_mw;
        const double d_hi = energies[k + 1][j] - energies[k + 1][i] - f_mw;
        double root;
        if (d_lo == 0.0) {
          root = lo;
        } else if (d_hi == 0.0) {
          // picked up as d_lo == 0 of the next interval, except at the end
          if (k + 2 != n) continue;
          root = hi;
        } else if ((d_lo < 0.0) != (d_hi < 0.0)) {
          double d_mid = d_lo;
          root = 0.5 * (lo + hi);
          for (int it = 0; it < 200; ++it) {
            root = 0.5 * (lo + hi);
            d_mid = pair_frequency(species, root, i, j) - f_mw;
            if (std::abs(d_mid) <= search.frequency_tolerance_MHz || hi - lo <= 1e-14 * hi) break;
            if ((d_mid < 0.0) == (d_lo < 0.0)) {
              lo = root;
            } else {
              hi = root;
            }
          }
        } else {
          continue;
        }
        const EigenSystem es = eigensystem(build_hamiltonian(species, FieldPoint(root)));
        const double element = es.vectors.col(i).dot(sx_product * es.vectors.col(j));
        const double intensity = element * element;
        if (intensity < search.intensity_floor) continue;
        const double g_eff = root > 0.0 ? f_mw / (constants::kBohrMHzPerMilliTesla * root) : 0.0;
        lines.push_back({root, i, j, intensity, g_eff});
      }
    }
  }
  std::sort(lines.begin(), lines.end(), [](const ResonanceLine& a, const ResonanceLine& b) {
    return std::tie(a.B_mT, a.i, a.j) < std::tie(b.B_mT, b.i, b.j);
  });
  return lines;
}

std::vector<ResonanceLine> strong_lines(const std::vector<ResonanceLine>& lines, double fraction) {
  double strongest = 0.0;
  for (const auto& line : lines) strongest = std::max(strongest, line.intensity);
  std::vector<ResonanceLine> out;
  for (const auto& line : lines) {
    if (line.intensity >= fraction * strongest) out.push_back(line);
  }
  return out;
}

std::vector<int> degeneracies(const std::vector<double>& energies, double tolerance) {
  std::vector<int> sizes;
  for (std::size_t k = 0; k < energies.size(); ++k) {
    if (k > 0 && energies[k] - energies[k - 1] <= tolerance) {
      ++sizes.back();
    } else {
      sizes.push_back(1);
    }
  }
  return sizes;
}

}  // namespace donormag
