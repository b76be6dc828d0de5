#pragma once

// Physical constants in the unit system used throughout the library:
// energies as frequencies (MHz), fields in mT, temperatures in K.

namespace donormag::constants {

/// Bohr magneton over Planck constant, MHz per mT (13.996245 GHz/T).
inline constexpr double kBohrMHzPerMilliTesla = 13.996245;

/// Boltzmann constant over Planck constant, MHz per K (20.836619 GHz/K).
inline constexpr double kBoltzmannMHzPerKelvin = 20836.619;

/// Planck constant, J s (exact SI value).
inline constexpr double kPlanck = 6.62607015e-34;

/// Magnetic flux quantum h/2e, Wb.
inline constexpr double kFluxQuantum = 2.067834e-15;

}  // namespace donormag::constants
