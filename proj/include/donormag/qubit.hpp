#pragma once

#include <optional>

namespace donormag {

/// Flux-qubit magnetometer parameters. Detunings are measured from the
/// sweet spot Phi0/2 in units of mPhi0.
struct QubitParams {
  double Ip_nA = 459.0;
  double Delta_GHz = 1.91;
  double loop_area_um2 = 5.0;
  double effective_depth_um = 1.0;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

struct SensitivityInputs {
  double flux_noise_uPhi0_per_rtHz = 0.0;
  double per_spin_flux_uPhi0 = 0.0;
  double integration_cap_s = 1.0;
  // Spin count quoted for a detection volume. When absent the minimum
  // detectable number at the integration cap is used instead.
  std::optional<double> detectable_spins;

  void validate() const;
};

/// Asymptotic flux slope 2 Ip Phi0 / h in GHz per mPhi0.
double flux_slope(const QubitParams& q);

/// f = sqrt(eps^2 + Delta^2), eps = 2 Ip Phi0 delta / h.
double qubit_frequency(const QubitParams& q, double flux_detuning_mPhi0);

/// Non-negative detuning (mPhi0) at which the qubit sits at frequency f.
/// Throws OutOfBand for f < Delta.
double flux_from_frequency(const QubitParams& q, double f_GHz);

/// df/d(delta) in GHz per mPhi0. Odd in delta, zero at the sweet spot, and
/// strictly below flux_slope in magnitude.
double responsivity(const QubitParams& q, double flux_detuning_mPhi0);

/// Smallest non-negative detuning whose responsivity reaches `fraction` of
/// the asymptotic slope (0 < fraction < 1).
double operating_point(const QubitParams& q, double fraction = 0.99);

struct SensitivityReport {
  double spins_per_rtHz = 0.0;
  double min_detectable_spins = 0.0;  // at the integration cap
  double operating_point_mPhi0 = 0.0;
  double operating_frequency_GHz = 0.0;
  double operating_responsivity_GHz_per_mPhi0 = 0.0;
};

/// spins/rtHz = flux noise density / per-spin flux; the minimum detectable
/// number of spins is that value divided by sqrt(integration cap).
SensitivityReport spin_sensitivity(const QubitParams& q, const SensitivityInputs& s);

/// Loop area times effective interaction depth, um^3.
double detection_volume(const QubitParams& q);

/// Spins per um^3. Throws std::invalid_argument for volume <= 0.
double volume_sensitivity(double min_spins, double volume_um3);

}  // namespace donormag
