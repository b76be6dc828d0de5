#include "donormag/thermo.hpp"

#include "donormag/constants.hpp"
#include "donormag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace donormag {

namespace {

void require_positive_temperature(double T_K) {
  if (!(T_K > 0.0)) throw std::invalid_argument("temperature must be positive");
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double zeeman_MHz(double g, double B_mT) { return g * constants::kBohrMHzPerMilliTesla * B_mT; }

}  // namespace

std::vector<double> populations(const EigenSystem& es, double T_K) {
  require_positive_temperature(T_K);
  std::vector<double> p(es.energies.size());
  if (p.empty()) return p;
  const double kT = constants::kBoltzmannMHzPerKelvin * T_K;
  const double ground = es.energies.front();
  double z = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp(-(es.energies[k] - ground) / kT);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

namespace {

double magnetization_from(const SpinSpecies& species, const EigenSystem& es, const std::vector<double>& p) {
  const Eigen::MatrixXd sz = electron_operator_z(species);
  double expectation = 0.0;
  for (int k = 0; k < es.dimension; ++k) {
    expectation += p[k] * es.vectors.col(k).dot(sz * es.vectors.col(k));
  }
  return -expectation / species.S;
}

}  // namespace

ThermalState thermal_state(const SpinSpecies& species, double B_mT, double T_K) {
  require_positive_temperature(T_K);
  const EigenSystem es = eigensystem(build_hamiltonian(species, FieldPoint(B_mT)));
  ThermalState state;
  state.T_K = T_K;
  state.B_mT = B_mT;
  state.energies = es.energies;
  state.populations = populations(es, T_K);
  state.m = magnetization_from(species, es, state.populations);
  return state;
}

double magnetization_exact(const SpinSpecies& species, double B_mT, double T_K) {
  return thermal_state(species, B_mT, T_K).m;
}

double reduced_inverse_temperature(const SpinSpecies& species, double T_K) {
  require_positive_temperature(T_K);
  return species.A_MHz / (constants::kBoltzmannMHzPerKelvin * T_K);
}

bool has_hyperfine_form(const SpinSpecies& species) {
  return std::abs(species.S - 0.5) < 1e-12 && species.A_MHz > 0.0 && species.I > 0.0;
}

ApproxMagnetization magnetization_closed_form(const SpinSpecies& species, double B_mT, double T_K) {
  species.validate();
  if (!has_hyperfine_form(species)) {
    throw UnsupportedSpecies("hyperfine closed form needs S = 1/2, I > 0 and A > 0; use the Curie form");
  }
  require_positive_temperature(T_K);
  const double I = species.I;
  const double x = reduced_inverse_temperature(species, T_K);
  const double zeeman = zeeman_MHz(species.g, B_mT);
  const double ratio = zeeman / species.A_MHz;

  const double low = ratio * (16.0 * (I + 1.0) + (2.0 * I + 1.0) * (2.0 * I - 1.0) * x) /
                     (6.0 * (2.0 * I + 1.0) * (2.0 * I + 1.0));
  const double high = ratio * 2.0 * (x - 4.0) / (3.0 * (2.0 * I + 1.0)) *
                      sigmoid(-(I + 0.5) * x + std::log((I + 1.0) / I));
  return {low + high, zeeman > 0.05 * species.A_MHz};
}

ApproxMagnetization magnetization_curie(double g, double B_mT, double T_K) {
  require_positive_temperature(T_K);
  const double linear = zeeman_MHz(g, B_mT) / (2.0 * constants::kBoltzmannMHzPerKelvin * T_K);
  return {std::min(linear, 1.0), linear > 0.1};
}

MagnetizationCurve magnetization_curve(const SpinSpecies& species, double B_mT, std::vector<double> T_grid) {
  species.validate();
  if (T_grid.empty()) throw std::invalid_argument("temperature grid is empty");
  for (double T : T_grid) require_positive_temperature(T);
  std::sort(T_grid.begin(), T_grid.end());

  MagnetizationCurve curve;
  curve.species = species;
  curve.B_mT = B_mT;
  curve.rows.reserve(T_grid.size());
  const bool hyperfine = has_hyperfine_form(species);
  for (double T : T_grid) {
    MagnetizationRow row;
    row.T_K = T;
    row.m_exact = magnetization_exact(species, B_mT, T);
    if (hyperfine) {
      const auto closed = magnetization_closed_form(species, B_mT, T);
      row.m_closed = closed.value;
      curve.closed_form_weak_field_warning |= closed.warning;
    }
    const auto curie = magnetization_curie(species.g, B_mT, T);
    row.m_curie = curie.value;
    curve.curie_saturation_warning |= curie.warning;
    curve.rows.push_back(row);
  }
  return curve;
}

MagnetizationSweep sweep_magnetization(const std::vector<WeightedSpecies>& species, double B_mT,
                                       std::vector<double> T_grid) {
  if (T_grid.empty()) throw std::invalid_argument("temperature grid is empty");
  std::sort(T_grid.begin(), T_grid.end());
  MagnetizationSweep sweep;
  sweep.T_K = T_grid;
  sweep.combined.assign(T_grid.size(), 0.0);
  for (const auto& entry : species) {
    sweep.curves.push_back(magnetization_curve(entry.species, B_mT, T_grid));
    const auto& rows = sweep.curves.back().rows;
    for (std::size_t k = 0; k < rows.size(); ++k) sweep.combined[k] += entry.weight * rows[k].m_exact;
  }
  return sweep;
}

KinkEstimate find_kink(const SpinSpecies& species, double B_mT, double T_lo_K, double T_hi_K, int points) {
  species.validate();
  if (!(species.A_MHz > 0.0)) throw UnsupportedSpecies("kink estimate needs a hyperfine species");
  if (!(T_lo_K > 0.0) || !(T_hi_K > T_lo_K)) throw std::invalid_argument("kink window must be ascending and positive");
  if (points < 5) throw std::invalid_argument("kink grid needs >= 5 points");

  const double x_lo = reduced_inverse_temperature(species, T_hi_K);
  const double x_hi = reduced_inverse_temperature(species, T_lo_K);
  const double dx = (x_hi - x_lo) / (points - 1);
  std::vector<double> m(points);
  for (int k = 0; k < points; ++k) {
    const double x = x_lo + k * dx;
    m[k] = magnetization_exact(species, B_mT, species.A_MHz / (constants::kBoltzmannMHzPerKelvin * x));
  }
  const auto [m_min, m_max] = std::minmax_element(m.begin(), m.end());
  const double m_span = *m_max - *m_min;
  if (!(m_span > 0.0)) throw std::invalid_argument("kink estimate needs a non-zero field");

  // u = (x - x_lo) / (x_hi - x_lo), v = (m - m_min) / m_span
  const double du = 1.0 / (points - 1);
  KinkEstimate best;
  best.curvature = -1.0;
  for (int k = 1; k + 1 < points; ++k) {
    const double d1 = (m[k + 1] - m[k - 1]) / (2.0 * du * m_span);
    const double d2 = (m[k + 1] - 2.0 * m[k] + m[k - 1]) / (du * du * m_span);
    const double curvature = std::abs(d2) / std::pow(1.0 + d1 * d1, 1.5);
    if (curvature > best.curvature) {
      best.curvature = curvature;
      best.x = x_lo + k * dx;
      best.T_K = species.A_MHz / (constants::kBoltzmannMHzPerKelvin * best.x);
    }
  }
  return best;
}

}  // namespace donormag
