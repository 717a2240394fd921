#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spps/engine.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using spps::RecoilKinematics;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

/// 1/e crossing of a sampled decay curve by linear interpolation (oracle).
double one_over_e_crossing(const spps::DecayCurve& curve) {
  const double target = std::exp(-1.0);
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    const double y0 = curve.samples[i - 1].gamma;
    const double y1 = curve.samples[i].gamma;
    if (y1 <= target) {
      const double f = (y0 - target) / (y0 - y1);
      return curve.samples[i - 1].tau + f * (curve.samples[i].tau - curve.samples[i - 1].tau);
    }
  }
  return -1.0;
}

}  // namespace

TEST_CASE("closed-form signal") {
  const auto cfg = spps::half_revolution_scenario();

  SECTION("no delay, no decay") {
    const auto kin = spps::recoil_geometry(cfg, spps::deg_to_rad(38.0), 0.0);
    REQUIRE(spps::gamma_closed_form(cfg.beam, kin, cfg.constants) == 1.0);
  }

  SECTION("near the critical angle the signal survives to the millisecond scale") {
    const double phi_c = spps::critical_angle(cfg);
    const auto kin = spps::recoil_geometry(cfg, phi_c, 1.19e-3);
    const double gamma = spps::gamma_closed_form(cfg.beam, kin, cfg.constants);
    REQUIRE_THAT(gamma, WithinRel(std::exp(-1.0), 0.02));
  }

  SECTION("monochromatic limit depends only on the Doppler rate") {
    const double q1 = 14398650.28214505;  // k (1 + cos 38 deg)
    const double tau = cfg.constants.atom_mass / (q1 * cfg.beam.sigma_p());
    const RecoilKinematics kin{spps::deg_to_rad(38.0), tau, q1, 0.0, 0.0, 0.0};
    REQUIRE_THAT(spps::gamma_closed_form(cfg.beam, kin, cfg.constants),
                 WithinRel(std::exp(-1.0), 1e-12));

    // Gamma is blind to sigma_x and eta once dq = 0 (fixed Doppler rate).
    const spps::CorrelatedGaussianState other(5.0 * cfg.beam.sigma_x(), cfg.beam.sigma_p(),
                                              -0.7, 42.0);
    REQUIRE(spps::gamma_closed_form(other, kin, cfg.constants) ==
            spps::gamma_closed_form(cfg.beam, kin, cfg.constants));
  }

  SECTION("even under a joint sign flip of tau and dq") {
    const RecoilKinematics fwd{0.5, 2e-5, 1.5e7, -9e3, 1.1e4, 0.4};
    const RecoilKinematics bwd{0.5, -2e-5, 1.5e7, 9e3, -1.1e4, 0.4};
    REQUIRE(spps::gamma_closed_form(cfg.beam, fwd, cfg.constants) ==
            spps::gamma_closed_form(cfg.beam, bwd, cfg.constants));
  }

  SECTION("signal stays within [0, 1] for random geometries") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 300; ++i) {
      const auto rs = testsup::random_scenario(rng);
      const auto kin = spps::recoil_geometry(rs.cfg, rs.phi, rs.tau);
      const double g = spps::gamma_closed_form(rs.cfg.beam, kin, rs.cfg.constants);
      REQUIRE(g >= 0.0);
      REQUIRE(g <= 1.0);
    }
  }
}

TEST_CASE("quadrature signal") {
  const auto cfg = spps::half_revolution_scenario();
  const double sx = cfg.beam.sigma_x();
  const double sp = cfg.beam.sigma_p();
  const double mass = cfg.constants.atom_mass;

  SECTION("pure Doppler point: Gamma = 1/e") {
    const spps::CorrelatedGaussianState s(sx, sp, 0.0, 1.0);
    const auto grid = spps::to_grid(s, 256, 256, 6.0);
    const double tau = 1e-4;
    const RecoilKinematics kin{0.0, tau, mass / (sp * tau), 0.0, 0.0, 0.0};
    REQUIRE_THAT(spps::gamma_quadrature(grid, kin, cfg.constants),
                 WithinRel(std::exp(-1.0), 1e-6));
  }

  SECTION("balanced bichromatic point on a correlated state: Gamma = exp(-0.2)") {
    const spps::CorrelatedGaussianState s(sx, sp, 0.9, 1.0);
    const auto grid = spps::to_grid(s, 256, 256, 6.0);
    const double tau = 1e-4;
    const RecoilKinematics kin{0.0, tau, mass / (sp * tau), -1.0 / sx, 0.0, 0.0};
    REQUIRE_THAT(spps::gamma_quadrature(grid, kin, cfg.constants),
                 WithinRel(std::exp(-0.2), 1e-6));
  }

  SECTION("zero point is exactly 1") {
    const auto grid = spps::to_grid(cfg.beam, 256, 256, 6.0);
    const RecoilKinematics kin{0.3, 0.0, 1.6e7, 0.0, 0.0, 0.0};
    REQUIRE_THAT(spps::gamma_quadrature(grid, kin, cfg.constants), WithinRel(1.0, 1e-12));
  }

  SECTION("under-resolved oscillation is refused with a size hint") {
    const auto grid = spps::to_grid(cfg.beam, 256, 256, 6.0);
    const double tau = 1e-4;
    const RecoilKinematics kin{0.0, tau, 60.0 * mass / (sp * tau), 0.0, 0.0, 0.0};
    REQUIRE_THROWS_WITH(spps::gamma_quadrature(grid, kin, cfg.constants),
                        Catch::Matchers::ContainsSubstring("samples per axis"));
  }
}

TEST_CASE("quadrature and closed form agree over randomized scenarios") {
  std::mt19937_64 rng(20240817ull);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto rs = testsup::random_scenario(rng);
    const auto kin = spps::recoil_geometry(rs.cfg, rs.phi, rs.tau);
    const int n = spps::detail::quadrature_grid_size(rs.cfg, rs.phi, rs.tau, 8.0);
    const auto grid = spps::to_grid(rs.cfg.beam, n, n, 8.0);
    const double closed = spps::gamma_closed_form(rs.cfg.beam, kin, rs.cfg.constants);
    const double quad = spps::gamma_quadrature(grid, kin, rs.cfg.constants);
    worst = std::max(worst, testsup::rel_err(quad, closed));
  }
  REQUIRE(worst < 1e-6);
}

TEST_CASE("decay simulation") {
  const auto cfg = spps::half_revolution_scenario();

  SECTION("38 degrees: monotone decay, 1/e time of 180 us") {
    const auto curve =
        spps::simulate_decay(cfg, spps::deg_to_rad(38.0), linspace(0.0, 400e-6, 81),
                             spps::Engine::closed_form);
    REQUIRE(curve.samples.front().gamma == 1.0);
    for (std::size_t i = 1; i < curve.samples.size(); ++i)
      REQUIRE(curve.samples[i].gamma < curve.samples[i - 1].gamma);
    REQUIRE_THAT(one_over_e_crossing(curve), WithinRel(0.00018001791232255337, 1e-3));
  }

  SECTION("critical angle: 1/e time of 1.19 ms") {
    const double phi_c = spps::critical_angle(cfg);
    const auto curve = spps::simulate_decay(cfg, phi_c, linspace(0.0, 3e-3, 60),
                                            spps::Engine::closed_form);
    REQUIRE_THAT(one_over_e_crossing(curve), WithinRel(0.0011908776400471049, 1e-3));
    const auto fit = spps::fit_coherence_time(curve);
    REQUIRE_THAT(fit.tau_c, WithinRel(0.0011908776400471049, 0.005));
  }

  SECTION("tangential beam decays as a pure Gaussian in the Doppler rate") {
    const auto curve =
        spps::simulate_decay(cfg, 0.0, linspace(0.0, 100e-6, 21), spps::Engine::closed_form);
    const double mono_rate =
        2.0 * cfg.constants.wavenumber * cfg.beam.sigma_p() / cfg.constants.atom_mass;
    for (const auto& s : curve.samples) {
      const double b = mono_rate * s.tau;
      REQUIRE_THAT(s.gamma, WithinRel(std::exp(-b * b), 1e-12));
    }
  }

  SECTION("quadrature engine reproduces the closed form sample by sample") {
    const auto taus = linspace(0.0, 200e-6, 21);
    const auto closed =
        spps::simulate_decay(cfg, spps::deg_to_rad(38.0), taus, spps::Engine::closed_form);
    const auto quad =
        spps::simulate_decay(cfg, spps::deg_to_rad(38.0), taus, spps::Engine::quadrature);
    REQUIRE(quad.source == spps::DecaySource::simulated_quadrature);
    for (std::size_t i = 0; i < taus.size(); ++i)
      REQUIRE_THAT(quad.samples[i].gamma, WithinAbs(closed.samples[i].gamma, 1e-6));
  }

  SECTION("delays beyond the rotation guard are refused") {
    REQUIRE_THROWS_AS(spps::simulate_decay(cfg, 0.5, linspace(0.0, 6e-3, 10),
                                           spps::Engine::closed_form),
                      spps::validity_error);
    REQUIRE_THROWS_AS(spps::simulate_decay(cfg, 0.5, std::vector<double>{0.0, 1e-5, 1e-5},
                                           spps::Engine::closed_form),
                      spps::validation_error);
  }
}

TEST_CASE("coherence-time fitting") {
  const auto cfg = spps::half_revolution_scenario();

  SECTION("noiseless curves are recovered within 0.5 percent") {
    for (double phi_deg : {10.0, 25.0, 38.0, 31.73085675744941}) {
      const double phi = spps::deg_to_rad(phi_deg);
      const double tau_c = spps::closed_form_coherence_time(cfg, phi);
      const auto curve = spps::simulate_decay(cfg, phi, linspace(0.0, 2.5 * tau_c, 40),
                                              spps::Engine::closed_form);
      const auto fit = spps::fit_coherence_time(curve);
      REQUIRE_THAT(fit.tau_c, WithinRel(tau_c, 0.005));
      REQUIRE(fit.residual_rms < 1e-10);
    }
  }

  SECTION("a scaled curve fits the same decay time") {
    const auto base = spps::simulate_decay(cfg, spps::deg_to_rad(38.0),
                                           linspace(0.0, 400e-6, 30), spps::Engine::closed_form);
    spps::DecayCurve scaled = base;
    scaled.source = spps::DecaySource::ingested;
    for (auto& s : scaled.samples) s.gamma *= 0.5;
    const auto f0 = spps::fit_coherence_time(base);
    const auto f1 = spps::fit_coherence_time(scaled);
    REQUIRE_THAT(f1.tau_c, WithinRel(f0.tau_c, 1e-9));
    REQUIRE_THAT(f1.amplitude, WithinRel(0.5 * f0.amplitude, 1e-9));
  }

  SECTION("per-sample uncertainties weight the fit") {
    spps::DecayCurve curve;
    curve.source = spps::DecaySource::ingested;
    for (int i = 0; i < 12; ++i) {
      const double tau = i * 20e-6;
      curve.samples.push_back({tau, std::exp(-std::pow(tau / 100e-6, 2)), 0.02});
    }
    const auto fit = spps::fit_coherence_time(curve);
    REQUIRE_THAT(fit.tau_c, WithinRel(100e-6, 1e-6));
  }

  SECTION("degenerate inputs are rejected") {
    spps::DecayCurve tiny;
    tiny.source = spps::DecaySource::ingested;
    tiny.samples = {{0.0, 1.0, {}}, {1e-5, 0.9, {}}, {2e-5, 0.6, {}}};
    REQUIRE_THROWS_AS(spps::fit_coherence_time(tiny), spps::validation_error);

    spps::DecayCurve negative;
    negative.source = spps::DecaySource::ingested;
    negative.samples = {{0.0, 1.0, {}}, {1e-5, 0.5, {}}, {2e-5, -0.1, {}}, {3e-5, 0.1, {}}};
    REQUIRE_THROWS_AS(spps::fit_coherence_time(negative), spps::validation_error);
  }

  SECTION("a curve that never decays is reported as unfittable") {
    const auto cfg2 = spps::half_revolution_scenario();
    const double tau_c = spps::closed_form_coherence_time(cfg2, spps::deg_to_rad(38.0));
    const auto flat = spps::simulate_decay(cfg2, spps::deg_to_rad(38.0),
                                           linspace(0.0, 0.2 * tau_c, 10),
                                           spps::Engine::closed_form);
    REQUIRE_THROWS_AS(spps::fit_coherence_time(flat), spps::fit_error);
  }

  SECTION("noisy curves: 1000 seeded trials stay within 10 percent") {
    std::mt19937_64 rng(424242);
    std::normal_distribution<double> noise(0.0, 0.05);
    const double true_tc = 50e-6;
    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      spps::DecayCurve curve;
      curve.source = spps::DecaySource::ingested;
      for (int i = 0; i < 20; ++i) {
        const double tau = 75e-6 * i / 19.0;
        const double clean = std::exp(-(tau * tau) / (true_tc * true_tc));
        curve.samples.push_back({tau, std::max(clean + noise(rng), 1e-3), {}});
      }
      try {
        const auto fit = spps::fit_coherence_time(curve);
        if (std::abs(fit.tau_c - true_tc) / true_tc <= 0.10) ++ok;
      } catch (const spps::error&) {
        // counted as a failure
      }
    }
    REQUIRE(ok >= 950);
  }
}

TEST_CASE("analytic estimates") {
  const auto cfg = spps::half_revolution_scenario();

  SECTION("grating dephasing time") {
    const double two_k = 2.0 * cfg.constants.wavenumber;
    REQUIRE_THAT(spps::dephasing_time_estimate(two_k, cfg.beam.sigma_p(), cfg.constants),
                 WithinRel(1.7247090666391725e-05, 1e-12));
    const double q38 = cfg.constants.wavenumber * (1.0 + std::cos(spps::deg_to_rad(38.0)));
    REQUIRE_THAT(spps::dephasing_time_estimate(q38, cfg.beam.sigma_p(), cfg.constants),
                 WithinRel(1.9291931697392097e-05, 1e-12));
    // Inverse proportionality in q.
    REQUIRE_THAT(spps::dephasing_time_estimate(two_k / 2.0, cfg.beam.sigma_p(), cfg.constants),
                 WithinRel(2.0 * 1.7247090666391725e-05, 1e-12));
    REQUIRE_THROWS_AS(spps::dephasing_time_estimate(0.0, cfg.beam.sigma_p(), cfg.constants),
                      spps::validation_error);
  }

  SECTION("monochromatic 1/e time is twice the dephasing estimate") {
    const double tau_mono = spps::closed_form_coherence_time(cfg, 0.0, 0.0);
    const double estimate =
        spps::dephasing_time_estimate(2.0 * cfg.constants.wavenumber, cfg.beam.sigma_p(),
                                      cfg.constants);
    REQUIRE_THAT(tau_mono, WithinRel(2.0 * estimate, 1e-12));
    REQUIRE_THAT(tau_mono, WithinRel(3.449418133278345e-05, 1e-12));
  }

  SECTION("transverse phase-matching bound") {
    REQUIRE_THAT(spps::transverse_bound(cfg, spps::deg_to_rad(4.0)),
                 WithinRel(0.0014257781631897178, 1e-12));
    REQUIRE_THROWS_AS(spps::transverse_bound(cfg, std::numbers::pi / 2.0),
                      spps::validation_error);

    auto stiff = cfg;
    stiff.guide.transverse_freq *= 4.0;  // sigma_T halves, bound doubles
    REQUIRE_THAT(spps::transverse_bound(stiff, spps::deg_to_rad(4.0)),
                 WithinRel(2.0 * 0.0014257781631897178, 1e-12));
  }

  SECTION("an uncorrelated ensemble has no interior coherence-time maximum") {
    auto flat = cfg;
    flat.beam = spps::CorrelatedGaussianState(cfg.beam.sigma_x(), cfg.beam.sigma_p(), 0.0,
                                              cfg.beam.atom_number());
    double prev = spps::closed_form_coherence_time(flat, spps::deg_to_rad(1.0));
    for (double phi_deg = 1.5; phi_deg <= 60.0; phi_deg += 0.5) {
      const double tau = spps::closed_form_coherence_time(flat, spps::deg_to_rad(phi_deg));
      REQUIRE(tau < prev);  // monotone decay of tau_c with angle
      prev = tau;
    }
  }

  SECTION("critical angle maximizes the coherence time as eta approaches 1") {
    auto nearly = cfg;
    nearly.beam = spps::CorrelatedGaussianState(cfg.beam.sigma_x(), cfg.beam.sigma_p(),
                                                1.0 - 1e-6, cfg.beam.atom_number());
    double best_phi = 0.0, best_tau = -1.0;
    for (double phi_deg = 0.5; phi_deg < 90.0; phi_deg += 0.5) {
      const double tau = spps::closed_form_coherence_time(nearly, spps::deg_to_rad(phi_deg));
      if (tau > best_tau) {
        best_tau = tau;
        best_phi = phi_deg;
      }
    }
    REQUIRE_THAT(best_phi, WithinAbs(spps::rad_to_deg(spps::critical_angle(nearly)), 0.5));
  }
}
