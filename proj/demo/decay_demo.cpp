// Simulates decay curves at two beam angles and prints the fitted coherence
// times together with the analytic estimates.

#include <cstdio>
#include <vector>

#include "spps/spps.hpp"

int main() {
  const spps::ScenarioConfig cfg = spps::half_revolution_scenario();
  const double phi_c = spps::critical_angle(cfg);
  std::printf("critical angle: %.2f deg\n", spps::rad_to_deg(phi_c));

  for (double phi_deg : {38.0, spps::rad_to_deg(phi_c)}) {
    const double phi = spps::deg_to_rad(phi_deg);
    const double tau_c = spps::closed_form_coherence_time(cfg, phi);
    std::vector<double> taus(48);
    for (int i = 0; i < 48; ++i) taus[i] = 2.5 * tau_c * i / 47.0;
    const auto curve = spps::simulate_decay(cfg, phi, taus, spps::Engine::closed_form);
    const auto fit = spps::fit_coherence_time(curve);
    std::printf("phi = %6.2f deg: tau_c fit %.4g us, closed form %.4g us\n", phi_deg,
                fit.tau_c * 1e6, tau_c * 1e6);
  }

  const auto rep = spps::infer_state_from_tau_c(cfg, phi_c, 1.1e-3);
  std::printf("inversion of tau_c = 1.1 ms at the critical angle:\n");
  std::printf("  1 - eta = %.3g, area = %.3g hbar, coherence length = %.3g um\n",
              rep.one_minus_eta, rep.area_hbar, rep.coherence_length * 1e6);
  return 0;
}
