#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

#include "spps/errors.hpp"

namespace spps::num {

/// Trapezoidal integral of uniformly sampled data.
inline double trapezoid(std::span<const double> y, double dx) {
  if (y.size() < 2) return 0.0;
  double sum = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) sum += y[i];
  return sum * dx;
}

/// Trapezoid weight for sample i of n (0.5 at the ends, 1 inside).
inline double trapezoid_weight(std::size_t i, std::size_t n) {
  return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
}

/// Linear interpolation into uniformly sampled data; zero outside the range.
inline double lerp_uniform(std::span<const double> y, double x0, double dx, double x) {
  const double idx = (x - x0) / dx;
  if (idx < 0.0 || idx > static_cast<double>(y.size() - 1)) return 0.0;
  const auto i0 = static_cast<std::size_t>(idx);
  if (i0 + 1 >= y.size()) return y.back();
  const double f = idx - static_cast<double>(i0);
  return y[i0] * (1.0 - f) + y[i0 + 1] * f;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/// Shortest round-trippable "%g" rendering with the given precision.
inline std::string format_double(double v, int precision = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return std::string(buf);
}

}  // namespace spps::num
