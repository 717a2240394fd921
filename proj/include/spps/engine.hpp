#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "spps/errors.hpp"
#include "spps/kinematics.hpp"
#include "spps/scenario.hpp"
#include "spps/wigner.hpp"

namespace spps {

/// One sampled pump-probe decay signal Gamma(tau), normalized to 1 at tau = 0.
struct DecaySample {
  double tau = 0.0;
  double gamma = 0.0;
  std::optional<double> sigma_gamma;
};

enum class DecaySource { simulated_closed_form, simulated_quadrature, ingested };

struct DecayCurve {
  std::vector<DecaySample> samples;
  double phi = 0.0;
  DecaySource source = DecaySource::ingested;

  void validate() const {
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
      if (!(s.tau > prev)) throw validation_error("decay curve: taus must be strictly increasing");
      prev = s.tau;
      if (source != DecaySource::ingested && !(s.gamma >= 0.0 && s.gamma <= 1.0))
        throw validation_error("decay curve: simulated gamma must lie in [0, 1]");
    }
  }
};

/// Gaussian-fit result for a decay curve; tau_c is the 1/e time of the fitted
/// Gamma(tau) = amplitude * exp(-tau^2 / tau_c^2).
struct CoherenceFit {
  double tau_c = 0.0;
  double tau_c_err = 0.0;
  double amplitude = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Phase-matching functional.

/// Per-second decay rates entering the phase-matching exponent at beam
/// position phi: chirp = k Omega sin(phi) sigma_x (signed with phi) couples to
/// the position spread through the recoil mismatch, mono = q1 sigma_p / m is
/// the monochromatic Doppler rate. The clock rate of the signal is
///   1/tau_c^2 = chirp^2 - 2 eta chirp mono + mono^2.
struct PhaseMatchRates {
  double chirp = 0.0;  // 1/s
  double mono = 0.0;   // 1/s
};

inline PhaseMatchRates phase_match_rates(const ScenarioConfig& cfg, double phi) {
  if (!std::isfinite(phi) || !(std::abs(phi) < std::numbers::pi))
    throw validation_error("phase_match_rates: |phi| must be below pi");
  const double k = cfg.constants.wavenumber;
  PhaseMatchRates r;
  r.chirp = k * cfg.guide.orbital_freq * std::sin(phi) * cfg.beam.sigma_x();
  r.mono = k * (1.0 + std::cos(phi)) * cfg.beam.sigma_p() / cfg.constants.atom_mass;
  return r;
}

/// Closed-form 1/e decay time of the normalized signal at beam position phi,
/// optionally overriding the beam's correlation parameter.
inline double closed_form_coherence_time(const ScenarioConfig& cfg, double phi,
                                         std::optional<double> eta_override = std::nullopt) {
  const PhaseMatchRates r = phase_match_rates(cfg, phi);
  const double eta = eta_override.value_or(cfg.beam.eta());
  const double rate2 = r.chirp * r.chirp - 2.0 * eta * r.chirp * r.mono + r.mono * r.mono;
  if (!(rate2 > 0.0)) throw validity_error("coherence time diverges for these parameters");
  return 1.0 / std::sqrt(rate2);
}

/// Normalized probe superradiance Gamma(tau)/Gamma(0) for a Gaussian state:
/// the modulus-squared characteristic function of the state evaluated at the
/// phase-matching wavevector (dq_long, q1 tau / m),
///
///   Gamma = exp(-(a^2 + 2 eta a b + b^2)),  a = dq_long sigma_x,
///                                           b = q1 tau sigma_p / m.
///
/// For phi > 0 (dq_long < 0) this is exp(-(A^2 - 2 eta A B + B^2)) with
/// A = |dq_long| sigma_x; the chirp then cancels the Doppler dephasing and
/// the decay slows dramatically near eta = 1.
inline double gamma_closed_form(const CorrelatedGaussianState& state,
                                const RecoilKinematics& kin, const Constants& constants) {
  const double a = kin.dq_long * state.sigma_x();
  const double b = kin.q1 * kin.tau * state.sigma_p() / constants.atom_mass;
  const double exponent = a * a + 2.0 * state.eta() * a * b + b * b;
  return std::exp(-exponent);
}

/// Independent route to Gamma for arbitrary (gridded) Wigner functions:
/// trapezoidal quadrature of |∫∫ exp(i(q1 tau p / m + dq x)) W(x,p) dx dp|^2,
/// normalized by its tau = 0 value. In normalized grid coordinates the phase
/// is t_x x_tilde + t_p p_tilde with t_x = dq_long sigma_x and
/// t_p = q1 tau sigma_p / m.
///
/// Precondition: the oscillation must be resolved,
/// max(|t_x|, |t_p|) * grid step < pi/4; otherwise a resolution error names
/// the grid size that would satisfy it.
inline double gamma_quadrature(const WignerGrid& grid, const RecoilKinematics& kin,
                               const Constants& constants) {
  const double t_x = kin.dq_long * grid.sigma_x();
  const double t_p = kin.q1 * kin.tau * grid.sigma_p() / constants.atom_mass;
  const double step = std::max(grid.step_x(), grid.step_p());
  const double t_max = std::max(std::abs(t_x), std::abs(t_p));
  if (t_max * step >= std::numbers::pi / 4.0) {
    const int needed = static_cast<int>(
        std::ceil(2.0 * grid.half_width() * t_max / (std::numbers::pi / 4.0))) + 1;
    throw resolution_error("gamma_quadrature: oscillation under-resolved; need at least " +
                           std::to_string(needed) + " samples per axis");
  }

  // Separable phase: accumulate row sums against exp(i t_p p) first.
  const int nx = grid.n_x();
  const int np = grid.n_p();
  std::vector<std::complex<double>> row(nx);
  for (int i = 0; i < nx; ++i) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < np; ++j) {
      const double phase = t_p * grid.p_tilde(j);
      acc += num::trapezoid_weight(j, np) * grid.value(i, j) *
             std::complex<double>(std::cos(phase), std::sin(phase));
    }
    row[i] = acc;
  }
  std::complex<double> z(0.0, 0.0);
  double z0 = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double phase = t_x * grid.x_tilde(i);
    const double wi = num::trapezoid_weight(i, nx);
    z += wi * row[i] * std::complex<double>(std::cos(phase), std::sin(phase));
    double mass_row = 0.0;
    for (int j = 0; j < np; ++j)
      mass_row += num::trapezoid_weight(j, np) * grid.value(i, j);
    z0 += wi * mass_row;
  }
  if (!(z0 > 0.0)) throw validation_error("gamma_quadrature: grid integrates to zero");
  const double ratio = std::abs(z) / z0;
  return ratio * ratio;
}

enum class Engine { closed_form, quadrature };

namespace detail {

inline int quadrature_grid_size(const ScenarioConfig& cfg, double phi, double tau_max,
                                double half_width) {
  const double k = cfg.constants.wavenumber;
  const double t_x = k * cfg.guide.orbital_freq * tau_max * std::abs(std::sin(phi)) *
                     cfg.beam.sigma_x();
  const double t_p = k * (1.0 + std::cos(phi)) * tau_max * cfg.beam.sigma_p() /
                     cfg.constants.atom_mass;
  const double t_max = std::max(t_x, t_p);
  const double step_osc = 0.8 * (std::numbers::pi / 4.0) / std::max(t_max, 1e-300);
  // The lattice must also resolve the narrow principal axis of the state
  // (minor eigenvalue 1 - |eta| in normalized coordinates).
  const double step_ridge = std::sqrt(1.0 - std::abs(cfg.beam.eta())) / 2.5;
  const double target_step = std::min(step_osc, step_ridge);
  int n = static_cast<int>(std::ceil(2.0 * half_width / target_step)) + 1;
  n = std::clamp(n, 256, 4096);
  return n;
}

}  // namespace detail

/// Simulate the normalized decay signal over a delay grid with either engine.
/// The quadrature engine sizes its grid from the largest delay so the
/// resolution precondition holds (capped at 4096^2).
inline DecayCurve simulate_decay(const ScenarioConfig& cfg, double phi,
                                 std::span<const double> tau_grid, Engine engine) {
  if (tau_grid.empty()) throw validation_error("simulate_decay: empty tau grid");
  double prev = -1.0;
  for (double t : tau_grid) {
    if (!(t >= 0.0)) throw validation_error("simulate_decay: delays must be non-negative");
    if (!(t > prev)) throw validation_error("simulate_decay: delays must be strictly increasing");
    prev = t;
  }

  DecayCurve curve;
  curve.phi = phi;
  curve.samples.reserve(tau_grid.size());

  if (engine == Engine::closed_form) {
    curve.source = DecaySource::simulated_closed_form;
    for (double tau : tau_grid) {
      const RecoilKinematics kin = recoil_geometry(cfg, phi, tau);
      curve.samples.push_back({tau, gamma_closed_form(cfg.beam, kin, cfg.constants), {}});
    }
  } else {
    curve.source = DecaySource::simulated_quadrature;
    // Half width 8 keeps the truncated tails below the 1e-6 agreement target
    // even where the signal itself is small.
    const double half_width = 8.0;
    const int n = detail::quadrature_grid_size(cfg, phi, tau_grid.back(), half_width);
    const WignerGrid grid = to_grid(cfg.beam, n, n, half_width);
    for (double tau : tau_grid) {
      const RecoilKinematics kin = recoil_geometry(cfg, phi, tau);
      curve.samples.push_back({tau, gamma_quadrature(grid, kin, cfg.constants), {}});
    }
  }
  curve.validate();
  return curve;
}

// ---------------------------------------------------------------------------
// Decay-curve fitting.

namespace detail {

/// Levenberg-Marquardt for the two-parameter model a * exp(-(tau/T)^2).
/// Returns (a, T, covariance diag, residual ss, iterations).
struct GaussFitResult {
  double a = 0.0;
  double T = 0.0;
  double var_a = 0.0;
  double var_T = 0.0;
  double ss = 0.0;
  int iterations = 0;
};

inline GaussFitResult fit_gauss_decay(std::span<const double> tau, std::span<const double> y,
                                      std::span<const double> weight, double a0, double T0) {
  const std::size_t n = tau.size();
  auto cost_of = [&](double a, double T) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - a * std::exp(-(tau[i] * tau[i]) / (T * T));
      ss += weight[i] * r * r;
    }
    return ss;
  };

  double a = a0;
  double T = std::abs(T0);
  double cost = cost_of(a, T);
  double lambda = 1e-3;
  int iter = 0;
  const int max_iter = 200;
  bool converged = false;

  for (; iter < max_iter; ++iter) {
    // Normal equations.
    double jaa = 0.0, jat = 0.0, jtt = 0.0, ga = 0.0, gt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-(tau[i] * tau[i]) / (T * T));
      const double m = a * e;
      const double da = e;
      const double dT = m * 2.0 * tau[i] * tau[i] / (T * T * T);
      const double r = y[i] - m;
      jaa += weight[i] * da * da;
      jat += weight[i] * da * dT;
      jtt += weight[i] * dT * dT;
      ga += weight[i] * da * r;
      gt += weight[i] * dT * r;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double m00 = jaa * (1.0 + lambda);
      const double m11 = jtt * (1.0 + lambda);
      const double det = m00 * m11 - jat * jat;
      if (!(std::abs(det) > 1e-300)) {
        lambda *= 10.0;
        continue;
      }
      const double delta_a = (m11 * ga - jat * gt) / det;
      const double delta_T = (m00 * gt - jat * ga) / det;
      const double a_new = a + delta_a;
      const double T_new = std::abs(T + delta_T);
      if (!(T_new > 0.0) || !std::isfinite(a_new) || !std::isfinite(T_new)) {
        lambda *= 10.0;
        continue;
      }
      const double cost_new = cost_of(a_new, T_new);
      if (cost_new <= cost) {
        const double rel_step = std::max(std::abs(delta_a) / std::max(std::abs(a_new), 1e-300),
                                         std::abs(delta_T) / std::max(T_new, 1e-300));
        const double improvement = cost - cost_new;
        a = a_new;
        T = T_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel_step < 1e-13 || improvement <= 1e-15 * std::max(cost, 1e-300)) converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (converged) break;
    if (!stepped) {
      // No downhill step available: treat a tiny gradient as convergence.
      const double gnorm = std::sqrt(ga * ga + gt * gt);
      if (gnorm < 1e-12 * std::max(cost, 1.0)) {
        converged = true;
        break;
      }
      throw fit_error("decay fit did not converge; residual ss = " + num::format_double(cost, 6));
    }
  }
  if (!converged && iter == max_iter)
    throw fit_error("decay fit hit the iteration cap; residual ss = " +
                    num::format_double(cost, 6));

  // Covariance from the (unscaled) normal matrix at the solution.
  double jaa = 0.0, jat = 0.0, jtt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-(tau[i] * tau[i]) / (T * T));
    const double dT = a * e * 2.0 * tau[i] * tau[i] / (T * T * T);
    jaa += weight[i] * e * e;
    jat += weight[i] * e * dT;
    jtt += weight[i] * dT * dT;
  }
  const double det = jaa * jtt - jat * jat;
  GaussFitResult out;
  out.a = a;
  out.T = T;
  out.ss = cost;
  out.iterations = iter;
  if (det > 0.0) {
    out.var_a = jtt / det;
    out.var_T = jaa / det;
  }
  return out;
}

}  // namespace detail

/// Least-squares Gaussian fit Gamma(tau) = amplitude * exp(-tau^2/tau_c^2).
/// tau_c is the 1/e decay time of the fitted curve; its uncertainty comes
/// from the fit covariance (scaled by the residual variance when no
/// per-sample uncertainties are given).
inline CoherenceFit fit_coherence_time(const DecayCurve& curve) {
  curve.validate();
  const std::size_t n = curve.samples.size();
  if (n < 4) throw validation_error("fit: need at least 4 samples");

  std::vector<double> tau(n), y(n), weight(n, 1.0);
  bool weighted = true;
  for (std::size_t i = 0; i < n; ++i) {
    tau[i] = curve.samples[i].tau;
    y[i] = curve.samples[i].gamma;
    if (!(y[i] > 0.0)) throw validation_error("fit: gamma values must be positive");
    if (!curve.samples[i].sigma_gamma || !(*curve.samples[i].sigma_gamma > 0.0)) weighted = false;
  }
  if (weighted)
    for (std::size_t i = 0; i < n; ++i)
      weight[i] = 1.0 / (*curve.samples[i].sigma_gamma * *curve.samples[i].sigma_gamma);

  const double y0 = y.front();
  const double y_min = *std::min_element(y.begin(), y.end());
  if (y_min > 0.9 * y0)
    throw fit_error("fit: curve never decays below 0.9 of its initial value");

  // Initial tau_c from the first crossing of 1/e (linear interpolation);
  // fall back to matching the most-decayed sample when no crossing exists.
  const double target = y0 * std::exp(-1.0);
  double T0 = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i] <= target) {
      const double f = (y[i - 1] - target) / (y[i - 1] - y[i]);
      T0 = tau[i - 1] + f * (tau[i] - tau[i - 1]);
      break;
    }
  }
  if (!(T0 > 0.0)) {
    const auto i_min = std::distance(y.begin(), std::min_element(y.begin(), y.end()));
    T0 = tau[i_min] / std::sqrt(-std::log(y[i_min] / y0));
  }

  const auto r = detail::fit_gauss_decay(tau, y, weight, y0, T0);

  CoherenceFit fit;
  fit.tau_c = r.T;
  fit.amplitude = r.a;
  fit.iterations = r.iterations;
  fit.residual_rms = std::sqrt(r.ss / static_cast<double>(n));
  const double scale = weighted ? 1.0 : r.ss / static_cast<double>(n > 2 ? n - 2 : 1);
  fit.tau_c_err = std::sqrt(std::max(r.var_T * scale, 0.0));
  if (!(fit.tau_c > 0.0) || !std::isfinite(fit.tau_c))
    throw fit_error("fit: converged to a non-positive decay time");
  return fit;
}

// ---------------------------------------------------------------------------
// Analytic coherence estimates.

/// Grating dephasing timescale m / (2 q sigma_p) for recoil wavevector q and
/// momentum spread sigma_p.
inline double dephasing_time_estimate(double q_long, double sigma_p, const Constants& constants) {
  if (!(q_long > 0.0)) throw validation_error("dephasing_time_estimate: q must be positive");
  if (!(sigma_p > 0.0)) throw validation_error("dephasing_time_estimate: sigma_p must be positive");
  return constants.atom_mass / (2.0 * q_long * sigma_p);
}

/// Transverse phase-matching bound on the coherence time,
/// (2 Omega k sigma_T cos phi)^-1 with sigma_T the transverse ground-state
/// width. Diverges toward phi = pi/2; rejected there.
inline double transverse_bound(const ScenarioConfig& cfg, double phi) {
  if (!std::isfinite(phi) || !(std::abs(phi) < std::numbers::pi / 2.0))
    throw validation_error("transverse_bound: requires |phi| < pi/2");
  const double sigma_t =
      cfg.guide.transverse_width(cfg.constants.atom_mass, cfg.constants.hbar);
  return 1.0 / (2.0 * cfg.guide.orbital_freq * cfg.constants.wavenumber * sigma_t *
                std::cos(phi));
}

}  // namespace spps
