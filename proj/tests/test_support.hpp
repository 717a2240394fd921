#pragma once

// Shared helpers for the test suites. The oracles here are deliberately
// independent of the library's own numerics: plain loops, no spps::num.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "spps/scenario.hpp"
#include "spps/units.hpp"
#include "spps/wigner.hpp"

namespace testsup {

/// Independent trapezoidal rule.
inline double trapz(const std::vector<double>& y, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) s += 0.5 * (y[i] + y[i + 1]);
  return s * dx;
}

inline double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

/// Scenario with randomized beam moments and geometry (experiment-scale ranges).
struct RandomScenario {
  spps::ScenarioConfig cfg;
  double phi = 0.0;
  double tau = 0.0;
};

inline RandomScenario random_scenario(std::mt19937_64& rng, double max_exponent = 16.0) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double sigma_x = 20e-6 + 280e-6 * u01(rng);
  const double sigma_v = 0.5e-3 + 4.5e-3 * u01(rng);
  const double eta = -0.95 + 1.9 * u01(rng);
  const double omega = 2.0 * std::numbers::pi * (4.0 + 12.0 * u01(rng));

  spps::ScenarioConfig cfg{
      spps::rubidium87_constants(),
      spps::make_guide(1.25e-3, omega, 2.0 * std::numbers::pi * 85.0),
      spps::CorrelatedGaussianState(sigma_x, spps::kRb87Mass * sigma_v, eta, 1e5),
      spps::PulsePair{},
  };

  double phi = spps::deg_to_rad(-60.0 + 120.0 * u01(rng));
  if (std::abs(phi) < spps::deg_to_rad(1.0)) phi += spps::deg_to_rad(5.0);

  // Pick tau so the phase-matching exponent lands in a well-conditioned range.
  const double k = cfg.constants.wavenumber;
  const double chirp = k * omega * std::sin(phi) * sigma_x;
  const double mono = k * (1.0 + std::cos(phi)) * sigma_v;
  const double rate2 = chirp * chirp - 2.0 * eta * chirp * mono + mono * mono;
  const double target = 0.01 + max_exponent * u01(rng);
  double tau = std::sqrt(target / rate2);
  const double tau_cap = 0.29 / omega;
  if (tau > tau_cap) tau = tau_cap;

  return RandomScenario{std::move(cfg), phi, tau};
}

/// Unique scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("spps_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return all;
}

/// File content with '#' comment lines stripped (the determinism contract
/// covers only the body).
inline std::string body_of(const std::string& text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    if (end > start && text[start] != '#') out.append(text, start, end - start + 1);
    start = end + 1;
  }
  return out;
}

}  // namespace testsup
