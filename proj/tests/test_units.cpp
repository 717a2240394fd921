#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spps/scenario.hpp"
#include "spps/units.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("constants derive the wavenumber from the wavelength") {
  const auto c = spps::rubidium87_constants();
  REQUIRE(c.hbar > 0.0);
  REQUIRE(c.atom_mass > 0.0);
  REQUIRE(c.wavelength > 0.0);
  REQUIRE_THAT(c.wavenumber * c.wavelength, WithinRel(2.0 * std::numbers::pi, 1e-12));
  REQUIRE_THAT(c.wavenumber, WithinRel(8052887.966753289, 1e-12));

  REQUIRE_THROWS_AS(spps::make_constants(-1.0, 780e-9), spps::validation_error);
  REQUIRE_THROWS_AS(spps::make_constants(1e-25, 0.0), spps::validation_error);
}

TEST_CASE("default scenario reproduces the half-revolution beam") {
  const auto cfg = spps::half_revolution_scenario();

  // sigma_x sigma_p / hbar, directly from the configured moments.
  const double area_max =
      cfg.beam.sigma_x() * cfg.beam.sigma_p() / cfg.constants.hbar;
  REQUIRE_THAT(area_max, WithinRel(295.59158985186497, 1e-9));
  REQUIRE(std::abs(area_max - 310.0) / 310.0 < 0.10);  // matches the rounded reference value

  const double sigma_t = cfg.guide.transverse_width(cfg.constants.atom_mass);
  REQUIRE_THAT(sigma_t, WithinRel(8.271160418493954e-07, 1e-9));
  REQUIRE_THAT(sigma_t, WithinAbs(0.83e-6, 0.01e-6));

  const double recoil = cfg.constants.recoil_velocity(2.0 * cfg.constants.wavenumber);
  REQUIRE_THAT(recoil, WithinRel(0.011769102102603249, 1e-12));
  REQUIRE_THAT(recoil, WithinAbs(11.8e-3, 0.05e-3));

  REQUIRE_THAT(cfg.beam.sigma_p() / cfg.constants.atom_mass, WithinRel(1.8e-3, 1e-12));
  REQUIRE_THAT(cfg.beam.eta(), WithinRel(1.0 - 4.9e-4, 1e-12));
  REQUIRE(cfg.beam.atom_number() == 3e5);
  REQUIRE_THAT(cfg.guide.orbital_freq, WithinRel(2.0 * std::numbers::pi * 8.4, 1e-12));
}

TEST_CASE("default scenario is deterministic") {
  const auto a = spps::half_revolution_scenario();
  const auto b = spps::half_revolution_scenario();
  REQUIRE(a.constants.wavenumber == b.constants.wavenumber);
  REQUIRE(a.beam.sigma_x() == b.beam.sigma_x());
  REQUIRE(a.beam.sigma_p() == b.beam.sigma_p());
  REQUIRE(a.beam.eta() == b.beam.eta());
  REQUIRE(a.guide.orbital_freq == b.guide.orbital_freq);
  REQUIRE(a.pulse_pair.phi == b.pulse_pair.phi);
  REQUIRE(a.pulse_pair.tau_grid == b.pulse_pair.tau_grid);
}

TEST_CASE("unit conversion scales exactly") {
  REQUIRE_THAT(spps::convert(1.25, spps::Unit::millimeter, spps::Unit::meter),
               WithinRel(0.00125, 1e-14));
  REQUIRE_THAT(spps::convert(std::numbers::pi / 4.0, spps::Unit::radian, spps::Unit::degree),
               WithinRel(45.0, 1e-14));
  REQUIRE_THAT(spps::convert(1.8, spps::Unit::millimeter_per_second,
                             spps::Unit::kilogram_meter_per_second, spps::kRb87Mass),
               WithinRel(2.597688e-28, 1e-12));

  REQUIRE_THROWS_AS(spps::convert(1.0, spps::Unit::meter, spps::Unit::second),
                    spps::unit_error);
  REQUIRE_THROWS_AS(spps::convert(1.0, spps::Unit::meter, spps::Unit::kilogram_meter_per_second,
                                  spps::kRb87Mass),
                    spps::unit_error);
}

TEST_CASE("unit conversions round-trip to 1e-14") {
  using spps::Unit;
  const Unit groups[][3] = {
      {Unit::meter, Unit::millimeter, Unit::micrometer},
      {Unit::second, Unit::millisecond, Unit::microsecond},
      {Unit::radian, Unit::degree, Unit::radian},
      {Unit::meter_per_second, Unit::millimeter_per_second, Unit::meter_per_second},
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-6.0, 6.0);
  for (const auto& group : groups) {
    for (Unit a : group) {
      for (Unit b : group) {
        for (int rep = 0; rep < 20; ++rep) {
          const double v = std::pow(10.0, mag(rng));
          const double back = spps::convert(spps::convert(v, a, b), b, a);
          REQUIRE_THAT(back, WithinRel(v, 1e-14));
        }
      }
    }
  }
  // Momentum bridge round trip needs the mass on both legs.
  std::uniform_real_distribution<double> vel(0.1, 10.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double v = vel(rng);
    const double p = spps::convert(v, Unit::millimeter_per_second,
                                   Unit::kilogram_meter_per_second, spps::kRb87Mass);
    const double back = spps::convert(p, Unit::kilogram_meter_per_second,
                                      Unit::millimeter_per_second, spps::kRb87Mass);
    REQUIRE_THAT(back, WithinRel(v, 1e-14));
  }
}

TEST_CASE("unit names parse") {
  REQUIRE(spps::unit_from_string("um") == spps::Unit::micrometer);
  REQUIRE(spps::unit_from_string("kg*m/s") == spps::Unit::kilogram_meter_per_second);
  REQUIRE_THROWS_AS(spps::unit_from_string("furlong"), spps::unit_error);
}

TEST_CASE("scenario validation rejects bad pulse grids") {
  auto cfg = spps::half_revolution_scenario();
  cfg.pulse_pair.tau_grid = {0.0, 1e-5, 1e-5};
  REQUIRE_THROWS_AS(cfg.validate(), spps::validation_error);
  cfg.pulse_pair.tau_grid = {-1e-6, 1e-5};
  REQUIRE_THROWS_AS(cfg.validate(), spps::validation_error);
  cfg.pulse_pair.tau_grid = {0.0, 1e-5};
  cfg.pulse_pair.phi = 3.2;
  REQUIRE_THROWS_AS(cfg.validate(), spps::validation_error);
}
