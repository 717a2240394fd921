#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "spps/errors.hpp"

namespace spps {

/// CODATA reduced Planck constant, J s.
inline constexpr double kHbar = 1.054571817e-34;

/// Mass of one 87Rb atom, kg.
inline constexpr double kRb87Mass = 1.44316e-25;

/// D2-line wavelength used for near-resonant scattering off 87Rb, m.
inline constexpr double kRb87D2Wavelength = 780.24e-9;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Fundamental constants of one experiment: the atom and the light driving it.
/// All quantities SI; the wavenumber is always derived from the wavelength.
struct Constants {
  double hbar = kHbar;       // J s
  double atom_mass = 0.0;    // kg
  double wavelength = 0.0;   // m
  double wavenumber = 0.0;   // 1/m, 2*pi/wavelength

  /// Recoil velocity hbar*q/m for a scattering wavevector q.
  double recoil_velocity(double q) const { return hbar * q / atom_mass; }
};

inline Constants make_constants(double atom_mass, double wavelength, double hbar = kHbar) {
  if (!(atom_mass > 0.0) || !std::isfinite(atom_mass))
    throw validation_error("constants: atom mass must be positive");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw validation_error("constants: wavelength must be positive");
  if (!(hbar > 0.0)) throw validation_error("constants: hbar must be positive");
  Constants c;
  c.hbar = hbar;
  c.atom_mass = atom_mass;
  c.wavelength = wavelength;
  c.wavenumber = 2.0 * std::numbers::pi / wavelength;
  return c;
}

inline Constants rubidium87_constants(double wavelength = kRb87D2Wavelength) {
  return make_constants(kRb87Mass, wavelength);
}

/// Circular-waveguide geometry: ring radius, orbital angular frequency of the
/// beam, and the transverse trapping frequency.
struct GuideConfig {
  double radius = 0.0;           // m
  double orbital_freq = 0.0;     // rad/s
  double transverse_freq = 0.0;  // rad/s

  /// Transverse ground-state width sqrt(hbar / 2 m omega_T).
  double transverse_width(double atom_mass, double hbar = kHbar) const {
    return std::sqrt(hbar / (2.0 * atom_mass * transverse_freq));
  }
};

inline GuideConfig make_guide(double radius, double orbital_freq, double transverse_freq) {
  if (!(radius > 0.0)) throw validation_error("guide: radius must be positive");
  if (!(orbital_freq > 0.0)) throw validation_error("guide: orbital frequency must be positive");
  if (!(transverse_freq > 0.0))
    throw validation_error("guide: transverse frequency must be positive");
  return GuideConfig{radius, orbital_freq, transverse_freq};
}

// ---------------------------------------------------------------------------
// Unit conversion. Internal representation is SI throughout; human units
// exist only at IO boundaries.

enum class Unit {
  meter,
  millimeter,
  micrometer,
  second,
  millisecond,
  microsecond,
  radian,
  degree,
  meter_per_second,
  millimeter_per_second,
  kilogram_meter_per_second,
};

enum class Dimension { length, time, angle, velocity, momentum };

inline Dimension dimension_of(Unit u) {
  switch (u) {
    case Unit::meter:
    case Unit::millimeter:
    case Unit::micrometer:
      return Dimension::length;
    case Unit::second:
    case Unit::millisecond:
    case Unit::microsecond:
      return Dimension::time;
    case Unit::radian:
    case Unit::degree:
      return Dimension::angle;
    case Unit::meter_per_second:
    case Unit::millimeter_per_second:
      return Dimension::velocity;
    case Unit::kilogram_meter_per_second:
      return Dimension::momentum;
  }
  throw validation_error("unknown unit");
}

/// Scale factor taking one of `u` to the SI base unit of its dimension.
inline double si_scale(Unit u) {
  switch (u) {
    case Unit::meter: return 1.0;
    case Unit::millimeter: return 1e-3;
    case Unit::micrometer: return 1e-6;
    case Unit::second: return 1.0;
    case Unit::millisecond: return 1e-3;
    case Unit::microsecond: return 1e-6;
    case Unit::radian: return 1.0;
    case Unit::degree: return std::numbers::pi / 180.0;
    case Unit::meter_per_second: return 1.0;
    case Unit::millimeter_per_second: return 1e-3;
    case Unit::kilogram_meter_per_second: return 1.0;
  }
  throw validation_error("unknown unit");
}

inline std::string_view unit_name(Unit u) {
  switch (u) {
    case Unit::meter: return "m";
    case Unit::millimeter: return "mm";
    case Unit::micrometer: return "um";
    case Unit::second: return "s";
    case Unit::millisecond: return "ms";
    case Unit::microsecond: return "us";
    case Unit::radian: return "rad";
    case Unit::degree: return "deg";
    case Unit::meter_per_second: return "m/s";
    case Unit::millimeter_per_second: return "mm/s";
    case Unit::kilogram_meter_per_second: return "kg*m/s";
  }
  return "?";
}

inline std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::angle: return "angle";
    case Dimension::velocity: return "velocity";
    case Dimension::momentum: return "momentum";
  }
  return "?";
}

inline Unit unit_from_string(std::string_view s) {
  if (s == "m") return Unit::meter;
  if (s == "mm") return Unit::millimeter;
  if (s == "um" || s == "µm") return Unit::micrometer;
  if (s == "s") return Unit::second;
  if (s == "ms") return Unit::millisecond;
  if (s == "us" || s == "µs") return Unit::microsecond;
  if (s == "rad") return Unit::radian;
  if (s == "deg") return Unit::degree;
  if (s == "m/s") return Unit::meter_per_second;
  if (s == "mm/s") return Unit::millimeter_per_second;
  if (s == "kg*m/s") return Unit::kilogram_meter_per_second;
  throw unit_error("unrecognized unit '" + std::string(s) + "'");
}

/// Exact scale conversion between units of the same dimension.
inline double convert(double value, Unit from, Unit to) {
  const Dimension df = dimension_of(from);
  const Dimension dt = dimension_of(to);
  if (df != dt) {
    throw unit_error("cannot convert " + std::string(unit_name(from)) + " (" +
                     std::string(dimension_name(df)) + ") to " + std::string(unit_name(to)) +
                     " (" + std::string(dimension_name(dt)) + ")");
  }
  return value * (si_scale(from) / si_scale(to));
}

/// Conversion that additionally bridges velocity and momentum through the
/// atomic mass (p = m v).
inline double convert(double value, Unit from, Unit to, double atom_mass) {
  const Dimension df = dimension_of(from);
  const Dimension dt = dimension_of(to);
  if (df == dt) return convert(value, from, to);
  if (!(atom_mass > 0.0)) throw validation_error("convert: atom mass must be positive");
  if (df == Dimension::velocity && dt == Dimension::momentum)
    return value * si_scale(from) * atom_mass / si_scale(to);
  if (df == Dimension::momentum && dt == Dimension::velocity)
    return value * si_scale(from) / atom_mass / si_scale(to);
  throw unit_error("cannot convert " + std::string(unit_name(from)) + " to " +
                   std::string(unit_name(to)) + " even with a mass factor");
}

}  // namespace spps
