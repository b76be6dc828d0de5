#pragma once

#include "donormag/spincore.hpp"

#include <optional>
#include <vector>

namespace donormag {

/// Boltzmann populations of an eigensystem at temperature T (K). Energies are
/// shifted by the ground level before exponentiation. Throws
/// std::invalid_argument for T <= 0.
std::vector<double> populations(const EigenSystem& es, double T_K);

struct ThermalState {
  double T_K = 0.0;
  double B_mT = 0.0;
  std::vector<double> energies;
  std::vector<double> populations;
  double m = 0.0;
};

ThermalState thermal_state(const SpinSpecies& species, double B_mT, double T_K);

/// Normalized magnetization m = -<S_z>/S from exact diagonalization;
/// m = tanh(g muB B / 2 kB T) for a bare spin-1/2 and saturates at 1.
double magnetization_exact(const SpinSpecies& species, double B_mT, double T_K);

/// A / kB T.
double reduced_inverse_temperature(const SpinSpecies& species, double T_K);

struct ApproxMagnetization {
  double value = 0.0;
  /// Set when the closed form is used outside its domain of validity
  /// (weak field for the hyperfine sigmoid form, linear regime for Curie).
  bool warning = false;
};

/// Weak-field closed form for S = 1/2 with hyperfine coupling:
///   m = m_L(x) + m_H(x), x = A/kB T,
///   m_L = (g muB B/A) [16(I+1) + (2I+1)(2I-1) x] / [6 (2I+1)^2]
///   m_H = (g muB B/A) 2(x-4)/[3(2I+1)] sigmoid(-(I+1/2) x + ln((I+1)/I))
/// warning is set when g muB B > 0.05 A. Throws UnsupportedSpecies when
/// A == 0, I == 0 or S != 1/2.
ApproxMagnetization magnetization_closed_form(const SpinSpecies& species, double B_mT, double T_K);

/// High-temperature Curie form m = g muB B / (2 kB T), capped at 1; warning
/// when the linear value exceeds 0.1.
ApproxMagnetization magnetization_curie(double g, double B_mT, double T_K);

/// Whether the hyperfine closed form applies to this species at all.
bool has_hyperfine_form(const SpinSpecies& species);

struct MagnetizationRow {
  double T_K = 0.0;
  double m_exact = 0.0;
  std::optional<double> m_closed;
  double m_curie = 0.0;
};

struct MagnetizationCurve {
  SpinSpecies species;
  double B_mT = 0.0;
  std::vector<MagnetizationRow> rows;  // ascending T
  bool closed_form_weak_field_warning = false;
  bool curie_saturation_warning = false;
};

struct WeightedSpecies {
  SpinSpecies species;
  double weight = 1.0;
};

struct MagnetizationSweep {
  std::vector<MagnetizationCurve> curves;  // input order
  std::vector<double> T_K;
  std::vector<double> combined;  // sum_k weight_k * m_exact_k
};

MagnetizationCurve magnetization_curve(const SpinSpecies& species, double B_mT,
                                       std::vector<double> T_grid);

/// Tabulates every species on the temperature grid (sorted ascending).
/// Throws std::invalid_argument for an empty grid or T <= 0.
MagnetizationSweep sweep_magnetization(const std::vector<WeightedSpecies>& species, double B_mT,
                                       std::vector<double> T_grid);

struct KinkEstimate {
  double T_K = 0.0;
  double x = 0.0;
  double curvature = 0.0;
};

/// Crossover kink of m versus x = A/kB T on [T_lo, T_hi]: the point of
/// maximum curvature of the curve drawn in range-normalized axes (both x and
/// m mapped to [0, 1]), from centered differences on a uniform-in-x grid.
KinkEstimate find_kink(const SpinSpecies& species, double B_mT, double T_lo_K, double T_hi_K,
                       int points = 801);

}  // namespace donormag
