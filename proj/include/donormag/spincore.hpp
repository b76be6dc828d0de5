#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace donormag {

/// One impurity type: electron spin S, nuclear spin I, g-factor and the
/// isotropic hyperfine constant A/h in MHz. A == 0 is a bare spin.
struct SpinSpecies {
  std::string name;
  double S = 0.5;
  double I = 0.0;
  double g = 2.0;
  double A_MHz = 0.0;

  /// Throws std::invalid_argument unless 2S, 2I are non-negative integers,
  /// S == 1/2, g > 0 and A >= 0.
  void validate() const;
  int electron_dim() const;
  int nuclear_dim() const;
  int dimension() const { return electron_dim() * nuclear_dim(); }
};

/// Bundled species: "Bi" (S=1/2, I=9/2, g=2.0003, A/h=1475.4 MHz) and
/// "e12" (bare spin-1/2, g=2).
SpinSpecies bismuth();
SpinSpecies bare_spin_half(double g = 2.0);
/// Looks up a bundled species by name; throws std::invalid_argument.
SpinSpecies bundled_species(const std::string& name);

/// Static field magnitude in mT, applied along z.
struct FieldPoint {
  double B_mT = 0.0;
  explicit FieldPoint(double b) : B_mT(b) {}
};

/// Angular momentum matrices in the |s, m> basis ordered m = s, s-1, ..., -s.
/// S_y is purely imaginary; `y` stores it as a complex matrix.
struct SpinOperators {
  Eigen::MatrixXd z;
  Eigen::MatrixXd plus;
  Eigen::MatrixXd minus;
  Eigen::MatrixXd x;
  Eigen::MatrixXcd y;
};

SpinOperators spin_operators(double s);

/// Hamiltonian (MHz) in the product basis |m_S, m_I>, electron index major:
///   g muB B S_z + A (S_z I_z + (S_+ I_- + S_- I_+)/2).
Eigen::MatrixXd build_hamiltonian(const SpinSpecies& species, FieldPoint field);

/// Electron S_x (or S_z) lifted to the product space, S_a (x) 1.
Eigen::MatrixXd electron_operator_x(const SpinSpecies& species);
Eigen::MatrixXd electron_operator_z(const SpinSpecies& species);

struct EigenSystem {
  std::vector<double> energies;  // MHz, ascending
  Eigen::MatrixXd vectors;       // columns are eigenvectors
  int dimension = 0;
};

/// Options for the cyclic Jacobi solver.
struct JacobiOptions {
  double tolerance = 1e-12;  // off-diagonal Frobenius norm relative to ||H||_F
  int max_sweeps = 100;
};

/// Full spectrum of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Energies come back ascending. Inside a degenerate cluster, vectors are
/// ordered by the basis index of their largest-magnitude component, and each
/// vector's sign makes that component positive.
///
/// Throws std::invalid_argument for non-square or non-symmetric input and
/// NumericalFailure (carrying the off-diagonal residual) if the sweep cap
/// is reached.
EigenSystem eigensystem(const Eigen::MatrixXd& H, const JacobiOptions& options = {});

/// Closed-form S = 1/2 energies, ascending. Throws UnsupportedSpecies when
/// S != 1/2.
std::vector<double> breit_rabi_levels(const SpinSpecies& species, FieldPoint field);

struct Transition {
  int i = 0;
  int j = 0;
  double frequency_MHz = 0.0;
  double intensity = 0.0;  // |<i|S_x (x) 1|j>|^2
  bool allowed = false;    // intensity >= floor
};

using TransitionTable = std::vector<Transition>;

/// All level pairs i < j. Throws std::invalid_argument if the eigensystem
/// dimension does not match the species.
TransitionTable transition_table(const EigenSystem& es, const SpinSpecies& species,
                                 double intensity_floor = 1e-6);

struct ResonanceLine {
  double B_mT = 0.0;
  int i = 0;
  int j = 0;
  double intensity = 0.0;
  double g_eff = 0.0;  // h f_mw = g_eff muB B_res
};

struct ResonanceSearch {
  double B_start_mT = 0.0;
  double B_stop_mT = 1000.0;
  int grid_points = 2000;
  double intensity_floor = 1e-6;
  double frequency_tolerance_MHz = 1e-6;  // 1 Hz
};

/// Fields where some level pair (i, j) is resonant with f_mw, found by sign
/// changes on a uniform grid and refined by bisection. Lines below the
/// intensity floor are dropped. Sorted by field, then by (i, j).
std::vector<ResonanceLine> resonance_fields(const SpinSpecies& species, double f_mw_GHz,
                                            const ResonanceSearch& search = {});

/// Lines with intensity >= fraction * (strongest intensity in the list).
std::vector<ResonanceLine> strong_lines(const std::vector<ResonanceLine>& lines,
                                        double fraction = 0.1);

/// Groups ascending energies into clusters whose neighbours differ by at most
/// `tolerance`; returns the cluster sizes in order.
std::vector<int> degeneracies(const std::vector<double>& energies, double tolerance = 1e-6);

}  // namespace donormag
