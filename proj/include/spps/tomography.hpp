#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spps/engine.hpp"
#include "spps/errors.hpp"
#include "spps/fft.hpp"
#include "spps/kinematics.hpp"
#include "spps/scenario.hpp"
#include "spps/wigner.hpp"

namespace spps {

/// A family of projection profiles at distinct angles sharing one s-grid.
class ProjectionSet {
 public:
  static ProjectionSet from_profiles(std::vector<ProjectionProfile> profiles) {
    if (profiles.size() < 2)
      throw validation_error("projection set: need at least 2 angles");
    std::sort(profiles.begin(), profiles.end(),
              [](const auto& a, const auto& b) { return a.theta < b.theta; });
    const auto& ref = profiles.front();
    if (ref.s.size() < 16) throw validation_error("projection set: s-grid too small");
    for (const auto& p : profiles) {
      if (!(p.theta >= 0.0 && p.theta < std::numbers::pi))
        throw validation_error("projection set: theta must lie in [0, pi)");
      if (p.s.size() != ref.s.size())
        throw validation_error("projection set: inconsistent s-grids");
      for (std::size_t i = 0; i < p.s.size(); ++i)
        if (std::abs(p.s[i] - ref.s[i]) > 1e-9 * std::max(1.0, std::abs(ref.s[i])))
          throw validation_error("projection set: inconsistent s-grids");
    }
    for (std::size_t i = 1; i < profiles.size(); ++i)
      if (!(profiles[i].theta > profiles[i - 1].theta + 1e-12))
        throw validation_error("projection set: angles must be distinct");

    ProjectionSet set;
    set.profiles_ = std::move(profiles);
    for (auto& p : set.profiles_) {
      const double total = p.integral();
      if (!(std::abs(total - 1.0) <= 0.05))
        throw validation_error("projection set: profile at theta = " +
                               num::format_double(rad_to_deg(p.theta), 5) +
                               " deg is not normalized (integral " +
                               num::format_double(total, 5) + ")");
      for (auto& d : p.density) d /= total;
    }
    return set;
  }

  const std::vector<ProjectionProfile>& profiles() const { return profiles_; }
  std::size_t n_angles() const { return profiles_.size(); }
  std::span<const double> s_grid() const { return profiles_.front().s; }

 private:
  ProjectionSet() = default;
  std::vector<ProjectionProfile> profiles_;
};

struct FbpResult {
  WignerGrid grid;
  std::vector<std::string> warnings;
};

namespace detail {

/// Frequency response of the band-limited discrete ramp kernel (Ram-Lak),
/// apodized by a raised cosine that reaches zero at the grid Nyquist.
inline std::vector<double> ramp_response(std::size_t n_fft, double ds) {
  std::vector<double> h(n_fft, 0.0);
  h[0] = 1.0 / (4.0 * ds * ds);
  for (std::size_t m = 1; m < n_fft / 2; ++m) {
    if (m % 2 == 1) {
      const double v = -1.0 / (std::numbers::pi * std::numbers::pi *
                               static_cast<double>(m) * static_cast<double>(m) * ds * ds);
      h[m] = v;
      h[n_fft - m] = v;
    }
  }
  std::vector<std::complex<double>> kernel(h.begin(), h.end());
  fft::transform(kernel, false);

  std::vector<double> response(n_fft);
  const double nyquist = std::numbers::pi / ds;
  for (std::size_t k = 0; k < n_fft; ++k) {
    const double cycles = (k <= n_fft / 2) ? static_cast<double>(k)
                                           : static_cast<double>(k) - static_cast<double>(n_fft);
    const double omega = 2.0 * std::numbers::pi * cycles / (static_cast<double>(n_fft) * ds);
    const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * omega / nyquist));
    response[k] = kernel[k].real() * window;
  }
  return response;
}

inline std::vector<double> filter_profile(std::span<const double> density, double ds,
                                          std::span<const double> response) {
  std::vector<std::complex<double>> buf(response.size(), {0.0, 0.0});
  for (std::size_t i = 0; i < density.size(); ++i) buf[i] = density[i];
  fft::transform(buf, false);
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= response[k];
  fft::transform(buf, true);
  std::vector<double> out(density.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real() * ds;
  return out;
}

}  // namespace detail

/// Filtered back-projection: ramp-filter each profile in the frequency domain
/// (raised-cosine apodization at the grid Nyquist), then smear back across
/// the normalized plane with linear interpolation along s. The output grid is
/// renormalized to unit integral; its half width is s_max/sqrt(2) so every
/// grid point stays inside the measured band at all angles.
///
/// Angles need not be equispaced; each profile is weighted by its angular
/// neighborhood (mod pi). Fewer than 16 angles still reconstructs but
/// attaches an accuracy warning.
inline FbpResult fbp_reconstruct(const ProjectionSet& projections, int n_x, int n_p) {
  if (n_x < 16 || n_p < 16)
    throw validation_error("fbp: need at least 16 output samples per axis");

  const auto s = projections.s_grid();
  const double s_max = s.back();
  const double ds = s[1] - s[0];
  if (!(s_max > 0.0) || !(ds > 0.0)) throw validation_error("fbp: malformed s-grid");
  const double half_width = std::clamp(s_max / std::numbers::sqrt2, 4.0, s_max);
  if (s_max < 4.0)
    throw validation_error("fbp: s range too small, need |s| coverage of at least 4");

  std::vector<std::string> warnings;
  if (projections.n_angles() < 16)
    warnings.push_back("only " + std::to_string(projections.n_angles()) +
                       " projection angles; quantitative accuracy not guaranteed");

  // Angular quadrature weights: half the span to each neighbor, periodic in pi.
  const auto& profs = projections.profiles();
  const std::size_t n_ang = profs.size();
  std::vector<double> dtheta(n_ang);
  if (n_ang == 2) {
    dtheta[0] = dtheta[1] = std::numbers::pi / 2.0;
  } else {
    for (std::size_t i = 0; i < n_ang; ++i) {
      const double next = (i + 1 < n_ang) ? profs[i + 1].theta : profs[0].theta + std::numbers::pi;
      const double prev = (i > 0) ? profs[i - 1].theta : profs[n_ang - 1].theta - std::numbers::pi;
      dtheta[i] = 0.5 * (next - prev);
    }
  }

  const std::size_t n_fft = fft::next_pow2(4 * s.size());
  const std::vector<double> response = detail::ramp_response(n_fft, ds);

  std::vector<double> values(static_cast<std::size_t>(n_x) * n_p, 0.0);
  const double dx = 2.0 * half_width / (n_x - 1);
  const double dp = 2.0 * half_width / (n_p - 1);

  for (std::size_t a = 0; a < n_ang; ++a) {
    const std::vector<double> q = detail::filter_profile(profs[a].density, ds, response);
    const double us = std::sin(profs[a].theta);
    const double uc = std::cos(profs[a].theta);
    const double w = dtheta[a];
    for (int i = 0; i < n_x; ++i) {
      const double xt = -half_width + i * dx;
      double* row_out = values.data() + static_cast<std::size_t>(i) * n_p;
      for (int j = 0; j < n_p; ++j) {
        const double pt = -half_width + j * dp;
        const double sval = xt * us + pt * uc;
        row_out[j] += w * num::lerp_uniform(q, s.front(), ds, sval);
      }
    }
  }

  // Renormalize to unit trapezoidal integral.
  double total = 0.0;
  for (int i = 0; i < n_x; ++i)
    for (int j = 0; j < n_p; ++j)
      total += num::trapezoid_weight(i, n_x) * num::trapezoid_weight(j, n_p) *
               values[static_cast<std::size_t>(i) * n_p + j];
  total *= dx * dp;
  if (!(std::abs(total) > 1e-12))
    throw validation_error("fbp: reconstruction integrates to zero");
  for (auto& v : values) v /= total;

  return FbpResult{WignerGrid(std::move(values), n_x, n_p, half_width), std::move(warnings)};
}

// ---------------------------------------------------------------------------
// Parameter inference.

struct EtaFit {
  double eta = 0.0;
  double eta_err = 0.0;
};

/// Least-squares estimate of eta from projection widths at several angles,
/// using the Gaussian width law width^2(theta) = 1 + eta sin(2 theta).
/// Angles confined to {0, pi/2} carry no correlation information (position
/// and momentum marginals cannot distinguish a homogeneous ensemble from a
/// correlated one) and are rejected as unidentifiable.
inline EtaFit eta_from_width_samples(std::span<const std::pair<double, double>> samples) {
  bool identifiable = false;
  for (const auto& [theta, width] : samples)
    if (std::abs(std::sin(2.0 * theta)) > 1e-9) identifiable = true;
  if (!identifiable)
    throw infeasible_error(
        "eta fit: all angles probe plain marginals; correlation unidentifiable");
  if (samples.size() < 3) throw validation_error("eta fit: need at least 3 samples");

  double sww = 0.0, swy = 0.0;
  for (const auto& [theta, width] : samples) {
    if (!(width > 0.0)) throw validation_error("eta fit: widths must be positive");
    const double w = std::sin(2.0 * theta);
    const double y = width * width - 1.0;
    sww += w * w;
    swy += w * y;
  }
  EtaFit fit;
  fit.eta = swy / sww;
  double ss = 0.0;
  for (const auto& [theta, width] : samples) {
    const double r = (width * width - 1.0) - fit.eta * std::sin(2.0 * theta);
    ss += r * r;
  }
  const double dof = static_cast<double>(samples.size() - 1);
  fit.eta_err = std::sqrt(ss / dof / sww);
  return fit;
}

/// Inferred beam parameters with provenance of the inputs that produced them.
struct AnalysisReport {
  double eta_hat = 0.0;
  double one_minus_eta = 0.0;   // reported separately: eta is close to 1
  double area_hbar = 0.0;       // occupied phase-space area, units of hbar
  double area_max_hbar = 0.0;   // sigma_x sigma_p / hbar
  double coherence_length = 0.0;  // m
  double transverse_bound = 0.0;  // s
  double cells = 0.0;             // sigma_x / coherence_length
  double phi = 0.0;               // rad used for the inversion
  double tau_c = 0.0;             // s
  bool infeasible = false;
  bool phi_defaulted = false;
  std::string note;
  std::string inputs_digest;
};

/// Invert a measured 1/e coherence time into the correlation parameter and
/// the derived state bounds. The decay-rate identity
///   1/tau_c^2 = chirp^2 - 2 eta chirp mono + mono^2
/// is linear in eta; 1 - eta is computed directly as
///   (1/tau_c^2 - (chirp - mono)^2) / (2 chirp mono)
/// to keep precision near eta = 1. A tau_c too long for the geometry (or a
/// geometry with zero chirp rate) has no admissible eta: the report then
/// carries eta at the cap and the infeasible flag.
///
/// The coherence length uses the probed recoil q1(phi):
/// L = (hbar q1 / m) tau_c.
inline AnalysisReport infer_state_from_tau_c(const ScenarioConfig& cfg, double phi, double tau_c,
                                             std::string inputs_digest = "") {
  if (!(tau_c > 0.0) || !std::isfinite(tau_c))
    throw validation_error("infer: tau_c must be positive");
  if (!std::isfinite(phi) || !(std::abs(phi) < std::numbers::pi / 2.0))
    throw validation_error("infer: requires |phi| < pi/2");

  const PhaseMatchRates r = phase_match_rates(cfg, phi);
  AnalysisReport rep;
  rep.phi = phi;
  rep.tau_c = tau_c;
  rep.inputs_digest = std::move(inputs_digest);

  constexpr double cap = CorrelatedGaussianState::kEtaCap;
  const double inv_tc2 = 1.0 / (tau_c * tau_c);
  if (std::abs(r.chirp) < 1e-12 * r.mono) {
    rep.infeasible = true;
    rep.one_minus_eta = 1.0 - cap;
    rep.eta_hat = cap;
    rep.note = "geometry is monochromatic (chirp rate ~ 0); only sigma_p is constrained";
  } else {
    const double diff = r.chirp - r.mono;
    const double one_minus = (inv_tc2 - diff * diff) / (2.0 * r.chirp * r.mono);
    const double eta = 1.0 - one_minus;
    if (eta > cap) {
      rep.infeasible = true;
      rep.eta_hat = cap;
      rep.one_minus_eta = 1.0 - cap;
      rep.note = "tau_c too long for this geometry; eta capped";
    } else if (eta < -cap) {
      rep.infeasible = true;
      rep.eta_hat = -cap;
      rep.one_minus_eta = 1.0 + cap;
      rep.note = "tau_c too short for this geometry; eta capped";
    } else {
      rep.eta_hat = eta;
      rep.one_minus_eta = one_minus;
    }
  }

  const double sx = cfg.beam.sigma_x();
  const double sp = cfg.beam.sigma_p();
  const double hbar = cfg.constants.hbar;
  rep.area_max_hbar = sx * sp / hbar;
  rep.area_hbar =
      rep.area_max_hbar * std::sqrt(std::max(rep.one_minus_eta * (2.0 - rep.one_minus_eta), 0.0));
  const double q1 = cfg.constants.wavenumber * (1.0 + std::cos(phi));
  rep.coherence_length = cfg.constants.recoil_velocity(q1) * tau_c;
  rep.transverse_bound = transverse_bound(cfg, phi);
  rep.cells = sx / rep.coherence_length;
  return rep;
}

}  // namespace spps
