#include "donormag/qubit.hpp"

#include "donormag/constants.hpp"
#include "donormag/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace donormag {

void QubitParams::validate() const {
  if (!(Ip_nA > 0.0) || !(Delta_GHz > 0.0) || !(loop_area_um2 > 0.0) || !(effective_depth_um > 0.0)) {
    throw std::invalid_argument("qubit parameters must all be positive");
  }
}

void SensitivityInputs::validate() const {
  if (!(flux_noise_uPhi0_per_rtHz > 0.0) || !(per_spin_flux_uPhi0 > 0.0) || !(integration_cap_s > 0.0)) {
    throw std::invalid_argument("sensitivity inputs must all be positive");
  }
  if (detectable_spins && !(*detectable_spins >= 0.0)) {
    throw std::invalid_argument("detectable_spins must be non-negative");
  }
}

double flux_slope(const QubitParams& q) {
  q.validate();
  // Hz per Phi0 -> GHz per mPhi0
  return 2.0 * q.Ip_nA * 1e-9 * constants::kFluxQuantum / constants::kPlanck * 1e-12;
}

double qubit_frequency(const QubitParams& q, double flux_detuning_mPhi0) {
  const double eps = flux_slope(q) * flux_detuning_mPhi0;
  return std::hypot(eps, q.Delta_GHz);
}

double flux_from_frequency(const QubitParams& q, double f_GHz) {
  const double slope = flux_slope(q);
  if (f_GHz < q.Delta_GHz) {
    throw OutOfBand("qubit frequency below the gap has no flux solution");
  }
  // (f - D)(f + D) keeps the rounding of f as the only error source.
  return std::sqrt((f_GHz - q.Delta_GHz) * (f_GHz + q.Delta_GHz)) / slope;
}

double responsivity(const QubitParams& q, double flux_detuning_mPhi0) {
  const double slope = flux_slope(q);
  const double eps = slope * flux_detuning_mPhi0;
  return slope * eps / std::hypot(eps, q.Delta_GHz);
}

double operating_point(const QubitParams& q, double fraction) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) throw std::invalid_argument("fraction must lie in (0, 1)");
  // eps / f = fraction  =>  eps = Delta * fraction / sqrt(1 - fraction^2)
  const double eps = q.Delta_GHz * fraction / std::sqrt(1.0 - fraction * fraction);
  return eps / flux_slope(q);
}

SensitivityReport spin_sensitivity(const QubitParams& q, const SensitivityInputs& s) {
  q.validate();
  s.validate();
  SensitivityReport report;
  report.spins_per_rtHz = s.flux_noise_uPhi0_per_rtHz / s.per_spin_flux_uPhi0;
  report.min_detectable_spins = report.spins_per_rtHz / std::sqrt(s.integration_cap_s);
  report.operating_point_mPhi0 = operating_point(q);
  report.operating_frequency_GHz = qubit_frequency(q, report.operating_point_mPhi0);
  report.operating_responsivity_GHz_per_mPhi0 = responsivity(q, report.operating_point_mPhi0);
  return report;
}

double detection_volume(const QubitParams& q) {
  q.validate();
  return q.loop_area_um2 * q.effective_depth_um;
}

double volume_sensitivity(double min_spins, double volume_um3) {
  if (!(volume_um3 > 0.0)) throw std::invalid_argument("volume must be positive");
  return min_spins / volume_um3;
}

}  // namespace donormag
