#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "spps/errors.hpp"
#include "spps/units.hpp"
#include "spps/wigner.hpp"

namespace spps {

/// Pump-probe pulse pair: beam angular position and the delay grid to scan.
struct PulsePair {
  double phi = 0.0;              // rad
  std::vector<double> tau_grid;  // s, strictly increasing, non-negative
};

/// Everything one run needs: atom/light constants, guide geometry, the initial
/// beam state, and the default pulse pair.
struct ScenarioConfig {
  Constants constants;
  GuideConfig guide;
  CorrelatedGaussianState beam;
  PulsePair pulse_pair;

  void validate() const {
    if (!(std::abs(pulse_pair.phi) < std::numbers::pi))
      throw validation_error("scenario: |phi| must be below pi");
    double prev = -1.0;
    for (double t : pulse_pair.tau_grid) {
      if (!(t >= 0.0) || !std::isfinite(t))
        throw validation_error("scenario: tau grid must be non-negative");
      if (!(t > prev)) throw validation_error("scenario: tau grid must be strictly increasing");
      prev = t;
    }
  }
};

/// Half-revolution configuration of the guided 87Rb beam: 3e5 atoms in a
/// 1.25 mm ring orbiting at 2pi*8.4 rad/s with 2pi*85 rad/s transverse
/// confinement, sigma_x = 120 um, sigma_p/m = 1.8 mm/s, eta = 1 - 4.9e-4.
inline ScenarioConfig half_revolution_scenario() {
  ScenarioConfig cfg{
      rubidium87_constants(),
      make_guide(1.25e-3, 2.0 * std::numbers::pi * 8.4, 2.0 * std::numbers::pi * 85.0),
      CorrelatedGaussianState(120e-6, kRb87Mass * 1.8e-3, 1.0 - 4.9e-4, 3e5),
      PulsePair{deg_to_rad(38.0), {}},
  };
  cfg.pulse_pair.tau_grid.reserve(60);
  for (int i = 0; i < 60; ++i) cfg.pulse_pair.tau_grid.push_back(i * (200e-6 / 59.0));
  cfg.validate();
  return cfg;
}

}  // namespace spps
