#pragma once

#include <cmath>
#include <numbers>

#include "spps/errors.hpp"
#include "spps/scenario.hpp"
#include "spps/units.hpp"
#include "spps/wigner.hpp"

namespace spps {

/// The recoil expressions hold to first order in the rotation angle
/// Omega*tau; beyond this guard we refuse rather than extrapolate.
inline constexpr double kMaxRotationAngle = 0.3;

/// Recoil geometry of one pump-probe pulse pair in the co-rotating frame.
///
/// phi measures the beam's angular position from the point of tangential
/// light incidence. The pump recoil projects q1 = k (1 + cos phi) onto the
/// beam axis; during the delay tau the beam rotates by Omega*tau, leaving the
/// probe recoil mismatched by dq_long = -k Omega tau sin(phi) along the axis
/// and dq_trans = k Omega tau cos(phi) radially.
///
/// theta is the phase-space projection angle the pulse pair reads out,
/// tan(theta) = (m Omega sigma_x / sigma_p) sin(phi)/(1 + cos(phi));
/// it is independent of tau.
struct RecoilKinematics {
  double phi = 0.0;       // rad
  double tau = 0.0;       // s
  double q1 = 0.0;        // 1/m
  double dq_long = 0.0;   // 1/m
  double dq_trans = 0.0;  // 1/m
  double theta = 0.0;     // rad
};

inline RecoilKinematics recoil_geometry(const ScenarioConfig& cfg, double phi, double tau) {
  if (!std::isfinite(phi) || !(std::abs(phi) < std::numbers::pi))
    throw validation_error("recoil_geometry: |phi| must be below pi");
  if (!std::isfinite(tau)) throw validation_error("recoil_geometry: tau must be finite");
  const double omega = cfg.guide.orbital_freq;
  if (!(omega * std::abs(tau) < kMaxRotationAngle))
    throw validity_error("recoil_geometry: Omega*tau = " +
                         num::format_double(omega * std::abs(tau), 4) +
                         " outside the small-rotation region (< 0.3)");

  const double k = cfg.constants.wavenumber;
  RecoilKinematics kin;
  kin.phi = phi;
  kin.tau = tau;
  kin.q1 = k * (1.0 + std::cos(phi));
  kin.dq_long = -k * omega * tau * std::sin(phi);
  kin.dq_trans = k * omega * tau * std::cos(phi);

  const double chirp_ratio =
      cfg.constants.atom_mass * omega * cfg.beam.sigma_x() / cfg.beam.sigma_p();
  const double tan_theta = chirp_ratio * std::sin(phi) / (1.0 + std::cos(phi));
  kin.theta = std::atan(tan_theta);

  // The guide-specific angle must coincide with the generic form
  // tan(theta) = -(dq m / (q1 tau)) (sigma_x / sigma_p).
  if (tau != 0.0) {
    const double generic = -(kin.dq_long * cfg.constants.atom_mass / (kin.q1 * tau)) *
                           (cfg.beam.sigma_x() / cfg.beam.sigma_p());
    if (std::abs(generic - tan_theta) > 1e-12 * std::max(1.0, std::abs(tan_theta)))
      throw error("recoil_geometry: projection-angle forms disagree");
  }
  return kin;
}

/// Beam position at which the pulse pair reads the narrow axis of a
/// correlated state (theta = pi/4): phi_c = 2 atan(sigma_p / (m Omega sigma_x)).
inline double critical_angle(const ScenarioConfig& cfg) {
  const double chirp_ratio =
      cfg.constants.atom_mass * cfg.guide.orbital_freq * cfg.beam.sigma_x() / cfg.beam.sigma_p();
  return 2.0 * std::atan(1.0 / chirp_ratio);
}

/// Ballistic free propagation of the Gaussian state for dt >= 0:
///   sigma_x'^2 = sigma_x^2 + 2 eta sigma_x sigma_p dt/m + (sigma_p dt/m)^2
///   sigma_p'   = sigma_p
///   eta'       = (eta sigma_x sigma_p + sigma_p^2 dt/m) / (sigma_x' sigma_p)
/// The shear preserves the occupied phase-space area exactly.
inline CorrelatedGaussianState propagate(const CorrelatedGaussianState& state, double dt,
                                         double atom_mass) {
  if (!(dt >= 0.0) || !std::isfinite(dt))
    throw validation_error("propagate: dt must be non-negative");
  if (!(atom_mass > 0.0)) throw validation_error("propagate: atom mass must be positive");
  if (dt == 0.0) return state;
  return state.sheared(dt, atom_mass);
}

/// Scattered fraction inferred from the center-of-mass displacement of the
/// beam once scattered atoms have separated: f = dx_cm / (recoil velocity *
/// separation time). Values slightly above 1 are clamped; above 1.05 the
/// inputs are inconsistent.
struct ScatteredFraction {
  double fraction = 0.0;  // clamped to [0, 1]
  double raw = 0.0;
  bool clamped = false;
};

inline ScatteredFraction scattered_fraction(double delta_x_cm, double q_long,
                                            double separation_time, const Constants& constants) {
  if (!(separation_time > 0.0))
    throw validation_error("scattered_fraction: separation time must be positive");
  if (!(q_long > 0.0)) throw validation_error("scattered_fraction: q must be positive");
  if (!std::isfinite(delta_x_cm))
    throw validation_error("scattered_fraction: displacement must be finite");

  ScatteredFraction result;
  result.raw = delta_x_cm / (constants.recoil_velocity(q_long) * separation_time);
  if (result.raw > 1.05)
    throw validation_error("scattered_fraction: fraction " + num::format_double(result.raw, 4) +
                           " exceeds 1.05, inputs inconsistent");
  result.fraction = std::clamp(result.raw, 0.0, 1.0);
  result.clamped = result.fraction != result.raw;
  return result;
}

}  // namespace spps
