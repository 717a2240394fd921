#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "spps/errors.hpp"
#include "spps/numerics.hpp"
#include "spps/units.hpp"

namespace spps {

/// Gaussian Wigner function of a 1D beam, specified by its second moments:
/// rms spatial width sigma_x, rms momentum width sigma_p, and the normalized
/// position-momentum correlation eta = <p x> / (sigma_p sigma_x).
///
/// The density is the normalized correlated Gaussian
///
///   W(x,p) = exp( -(u^2 - 2 eta u v + v^2) / (2 (1-eta^2)) )
///            / (2 pi sigma_x sigma_p sqrt(1-eta^2))
///
/// with u = (x-<x>)/sigma_x, v = (p-<p>)/sigma_p. It integrates to one over
/// phase space and has unit-variance marginals in normalized coordinates.
///
/// eta -> 1 describes a ballistically expanded (chirped) beam whose occupied
/// phase-space area sigma_x sigma_p sqrt(1-eta^2) is far below the naive
/// sigma_x sigma_p bound. |eta| is capped at 1 - 1e-9 on ingestion (inference
/// can return eta numerically at 1); the cap is flagged on the state.
class CorrelatedGaussianState {
 public:
  static constexpr double kEtaCap = 1.0 - 1e-9;

  CorrelatedGaussianState(double sigma_x, double sigma_p, double eta, double atom_number,
                          double mean_x = 0.0, double mean_p = 0.0, double timestamp = 0.0)
      : sigma_x_(sigma_x),
        sigma_p_(sigma_p),
        eta_(eta),
        atom_number_(atom_number),
        mean_x_(mean_x),
        mean_p_(mean_p),
        timestamp_(timestamp) {
    if (!std::isfinite(sigma_x) || !(sigma_x > 0.0))
      throw validation_error("state: sigma_x must be positive");
    if (!std::isfinite(sigma_p) || !(sigma_p > 0.0))
      throw validation_error("state: sigma_p must be positive");
    if (!std::isfinite(atom_number) || !(atom_number > 0.0))
      throw validation_error("state: atom number must be positive");
    if (!std::isfinite(eta)) throw validation_error("state: eta must be finite");
    if (!std::isfinite(mean_x) || !std::isfinite(mean_p) || !std::isfinite(timestamp))
      throw validation_error("state: means and timestamp must be finite");
    if (std::abs(eta_) > kEtaCap) {
      eta_ = std::copysign(kEtaCap, eta_);
      eta_capped_ = true;
    }
    one_minus_eta2_ = (1.0 - eta_) * (1.0 + eta_);
  }

  double sigma_x() const { return sigma_x_; }
  double sigma_p() const { return sigma_p_; }
  double eta() const { return eta_; }
  double atom_number() const { return atom_number_; }
  double mean_x() const { return mean_x_; }
  double mean_p() const { return mean_p_; }
  double timestamp() const { return timestamp_; }
  bool eta_capped() const { return eta_capped_; }

  /// 1 - eta^2, tracked exactly through shears (naive recomputation from a
  /// rounded eta near 1 would lose the occupied area).
  double one_minus_eta_sq() const { return one_minus_eta2_; }

  /// Ballistic shear x -> x + (p/m) dt of the second moments. Closed under
  /// composition; sigma_x' sqrt(1 - eta'^2) = sigma_x sqrt(1 - eta^2) holds
  /// by construction.
  CorrelatedGaussianState sheared(double dt, double atom_mass) const {
    const double drift = sigma_p_ * dt / atom_mass;
    const double sx2 = sigma_x_ * sigma_x_ + 2.0 * eta_ * sigma_x_ * drift + drift * drift;
    const double sx_new = std::sqrt(sx2);
    CorrelatedGaussianState out = *this;
    out.sigma_x_ = sx_new;
    out.eta_ = std::clamp((eta_ * sigma_x_ + drift) / sx_new, -kEtaCap, kEtaCap);
    out.one_minus_eta2_ = one_minus_eta2_ * (sigma_x_ * sigma_x_) / sx2;
    out.mean_x_ = mean_x_ + mean_p_ * dt / atom_mass;
    out.timestamp_ = timestamp_ + dt;
    return out;
  }

 private:
  double sigma_x_;
  double sigma_p_;
  double eta_;
  double atom_number_;
  double mean_x_;
  double mean_p_;
  double timestamp_;
  double one_minus_eta2_ = 1.0;
  bool eta_capped_ = false;
};

/// Wigner density of the state at phase-space point (x, p). Units 1/(m kg m/s).
inline double evaluate_gaussian(const CorrelatedGaussianState& state, double x, double p) {
  if (!std::isfinite(x) || !std::isfinite(p))
    throw validation_error("evaluate_gaussian: non-finite phase-space point");
  const double u = (x - state.mean_x()) / state.sigma_x();
  const double v = (p - state.mean_p()) / state.sigma_p();
  const double eta = state.eta();
  const double one_minus_eta2 = state.one_minus_eta_sq();
  const double q = (u * u - 2.0 * eta * u * v + v * v) / one_minus_eta2;
  const double prefactor =
      1.0 / (2.0 * std::numbers::pi * state.sigma_x() * state.sigma_p() *
             std::sqrt(one_minus_eta2));
  return prefactor * std::exp(-0.5 * q);
}

/// Occupied phase-space area sigma_x sigma_p sqrt(1-eta^2), in units of hbar.
inline double phase_space_area(const CorrelatedGaussianState& state, double hbar = kHbar) {
  return state.sigma_x() * state.sigma_p() * std::sqrt(state.one_minus_eta_sq()) / hbar;
}

/// Upper bound sigma_x sigma_p on the area (the eta = 0 value), in hbar.
inline double phase_space_area_max(const CorrelatedGaussianState& state, double hbar = kHbar) {
  return state.sigma_x() * state.sigma_p() / hbar;
}

/// Discretized Wigner function over normalized phase space
/// (x_tilde = x/sigma_x, p_tilde = p/sigma_p), sampled on a uniform
/// [-half_width, half_width]^2 lattice with inclusive endpoints.
/// Immutable after construction.
class WignerGrid {
 public:
  WignerGrid(std::vector<double> values, int n_x, int n_p, double half_width,
             double sigma_x = 1.0, double sigma_p = 1.0)
      : values_(std::move(values)),
        n_x_(n_x),
        n_p_(n_p),
        half_width_(half_width),
        sigma_x_(sigma_x),
        sigma_p_(sigma_p) {
    if (n_x_ < 16 || n_p_ < 16)
      throw validation_error("grid: need at least 16 samples per axis");
    if (!(half_width_ >= 4.0))
      throw validation_error("grid: half width must cover at least 4 sigma");
    if (values_.size() != static_cast<std::size_t>(n_x_) * static_cast<std::size_t>(n_p_))
      throw validation_error("grid: value buffer does not match the grid shape");
    for (double v : values_)
      if (!std::isfinite(v)) throw validation_error("grid: non-finite sample");
  }

  int n_x() const { return n_x_; }
  int n_p() const { return n_p_; }
  double half_width() const { return half_width_; }
  double sigma_x() const { return sigma_x_; }
  double sigma_p() const { return sigma_p_; }
  double step_x() const { return 2.0 * half_width_ / (n_x_ - 1); }
  double step_p() const { return 2.0 * half_width_ / (n_p_ - 1); }
  double x_tilde(int i) const { return -half_width_ + i * step_x(); }
  double p_tilde(int j) const { return -half_width_ + j * step_p(); }
  double value(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_p_ + j]; }
  const std::vector<double>& values() const { return values_; }

  /// Trapezoidal integral over the normalized plane.
  double integral() const {
    double sum = 0.0;
    for (int i = 0; i < n_x_; ++i) {
      const double wi = num::trapezoid_weight(i, n_x_);
      double row = 0.0;
      for (int j = 0; j < n_p_; ++j)
        row += num::trapezoid_weight(j, n_p_) * value(i, j);
      sum += wi * row;
    }
    return sum * step_x() * step_p();
  }

  /// Bilinear interpolation at (x_tilde, p_tilde); zero outside the lattice.
  double interpolate(double xt, double pt) const {
    const double fi = (xt + half_width_) / step_x();
    const double fj = (pt + half_width_) / step_p();
    if (fi < 0.0 || fj < 0.0 || fi > n_x_ - 1 || fj > n_p_ - 1) return 0.0;
    int i0 = static_cast<int>(fi);
    int j0 = static_cast<int>(fj);
    if (i0 >= n_x_ - 1) i0 = n_x_ - 2;
    if (j0 >= n_p_ - 1) j0 = n_p_ - 2;
    const double fx = fi - i0;
    const double fp = fj - j0;
    return value(i0, j0) * (1.0 - fx) * (1.0 - fp) + value(i0 + 1, j0) * fx * (1.0 - fp) +
           value(i0, j0 + 1) * (1.0 - fx) * fp + value(i0 + 1, j0 + 1) * fx * fp;
  }

 private:
  std::vector<double> values_;
  int n_x_;
  int n_p_;
  double half_width_;
  double sigma_x_;
  double sigma_p_;
};

/// Sample a Gaussian state onto a normalized grid centered on its means.
/// The sampled integral must reach 1 within 1e-3 or the grid is rejected as
/// unable to represent the state (this fires for eta so close to 1 that the
/// diagonal ridge falls between lattice lines).
inline WignerGrid to_grid(const CorrelatedGaussianState& state, int n_x = 256, int n_p = 256,
                          double half_width = 6.0) {
  if (n_x < 16 || n_p < 16)
    throw validation_error("to_grid: need at least 16 samples per axis");
  if (!(half_width >= 4.0))
    throw validation_error("to_grid: half width must cover at least 4 sigma");

  const double eta = state.eta();
  const double one_minus_eta2 = state.one_minus_eta_sq();
  const double prefactor = 1.0 / (2.0 * std::numbers::pi * std::sqrt(one_minus_eta2));
  const double dx = 2.0 * half_width / (n_x - 1);
  const double dp = 2.0 * half_width / (n_p - 1);

  std::vector<double> values(static_cast<std::size_t>(n_x) * n_p);
  for (int i = 0; i < n_x; ++i) {
    const double u = -half_width + i * dx;
    for (int j = 0; j < n_p; ++j) {
      const double v = -half_width + j * dp;
      const double q = (u * u - 2.0 * eta * u * v + v * v) / one_minus_eta2;
      values[static_cast<std::size_t>(i) * n_p + j] = prefactor * std::exp(-0.5 * q);
    }
  }

  WignerGrid grid(std::move(values), n_x, n_p, half_width, state.sigma_x(), state.sigma_p());
  const double total = grid.integral();
  if (std::abs(total - 1.0) > 1e-3) {
    throw validation_error("to_grid: grid cannot represent the state (integral " +
                           num::format_double(total, 6) +
                           "); increase resolution or extent");
  }
  return grid;
}

/// One tomographic projection of the Wigner function: the distribution of the
/// normalized coordinate s = x_tilde sin(theta) + p_tilde cos(theta).
///
/// theta = 0 is the momentum marginal, theta = pi/2 the spatial marginal;
/// for a Gaussian state the profile is Gaussian with
/// rms_width^2 = 1 + eta sin(2 theta).
struct ProjectionProfile {
  double theta = 0.0;
  std::vector<double> s;
  std::vector<double> density;
  double rms_width = 0.0;
  double mean_s = 0.0;

  double ds() const { return s.size() > 1 ? s[1] - s[0] : 0.0; }
  double integral() const { return num::trapezoid(density, ds()); }
};

namespace detail {

inline void finish_profile(ProjectionProfile& prof) {
  const double ds = prof.ds();
  const double total = num::trapezoid(prof.density, ds);
  if (!(total > 0.0))
    throw resolution_error("projection: profile carries no mass");
  double mean = 0.0;
  for (std::size_t i = 0; i < prof.s.size(); ++i)
    mean += num::trapezoid_weight(i, prof.s.size()) * prof.s[i] * prof.density[i];
  mean *= ds / total;
  double var = 0.0;
  for (std::size_t i = 0; i < prof.s.size(); ++i) {
    const double d = prof.s[i] - mean;
    var += num::trapezoid_weight(i, prof.s.size()) * d * d * prof.density[i];
  }
  var *= ds / total;
  prof.mean_s = mean;
  prof.rms_width = std::sqrt(var);
}

}  // namespace detail

/// Analytic projection of a Gaussian state at angle theta onto an explicit
/// uniform s-grid [-s_max, s_max] (used to assemble multi-angle sets that
/// share one grid).
inline ProjectionProfile project(const CorrelatedGaussianState& state, double theta,
                                 double s_max, int n_s) {
  if (!std::isfinite(theta)) throw validation_error("project: theta must be finite");
  if (n_s < 16) throw validation_error("project: need at least 16 samples");
  if (!(s_max > 0.0)) throw validation_error("project: s_max must be positive");

  const double eta = state.eta();
  const double w2 = std::max(1.0 + eta * std::sin(2.0 * theta), 1e-12);
  const double w = std::sqrt(w2);
  const double mean = (state.mean_x() / state.sigma_x()) * std::sin(theta) +
                      (state.mean_p() / state.sigma_p()) * std::cos(theta);

  ProjectionProfile prof;
  prof.theta = theta;
  prof.s.resize(n_s);
  prof.density.resize(n_s);
  const double ds = 2.0 * s_max / (n_s - 1);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * w);
  for (int i = 0; i < n_s; ++i) {
    const double si = -s_max + i * ds;
    const double d = (si - mean) / w;
    prof.s[i] = si;
    prof.density[i] = norm * std::exp(-0.5 * d * d);
  }
  detail::finish_profile(prof);
  return prof;
}

/// Analytic projection of a Gaussian state with an adaptive grid covering
/// mean +- 6 widths (513 samples).
inline ProjectionProfile project(const CorrelatedGaussianState& state, double theta) {
  const double eta = state.eta();
  const double w = std::sqrt(std::max(1.0 + eta * std::sin(2.0 * theta), 1e-12));
  const double mean = (state.mean_x() / state.sigma_x()) * std::sin(theta) +
                      (state.mean_p() / state.sigma_p()) * std::cos(theta);
  const double s_max = std::abs(mean) + 6.0 * w;
  return project(state, theta, s_max, 513);
}

/// Radon projection of a grid at angle theta: rotate-then-sum with bilinear
/// interpolation on the rotated sampling lattice. The s-grid spans
/// +-half_width*sqrt(2) so the whole lattice projects inside it at any angle.
inline ProjectionProfile project(const WignerGrid& grid, double theta) {
  if (!std::isfinite(theta)) throw validation_error("project: theta must be finite");
  const int n_s = std::max(grid.n_x(), grid.n_p());
  const double s_max = grid.half_width() * std::numbers::sqrt2;
  const double ds = 2.0 * s_max / (n_s - 1);
  const double us = std::sin(theta);
  const double uc = std::cos(theta);

  ProjectionProfile prof;
  prof.theta = theta;
  prof.s.resize(n_s);
  prof.density.resize(n_s);
  for (int i = 0; i < n_s; ++i) {
    const double si = -s_max + i * ds;
    prof.s[i] = si;
    double acc = 0.0;
    for (int j = 0; j < n_s; ++j) {
      const double tj = -s_max + j * ds;
      // point = s*u + t*u_perp with u = (sin, cos), u_perp = (cos, -sin)
      const double xt = si * us + tj * uc;
      const double pt = si * uc - tj * us;
      acc += num::trapezoid_weight(j, n_s) * grid.interpolate(xt, pt);
    }
    prof.density[i] = acc * ds;
  }

  const double mass = num::trapezoid(prof.density, ds);
  if (std::abs(mass - grid.integral()) > 1e-3 * std::max(1.0, std::abs(grid.integral())))
    throw resolution_error("projection: grid too coarse, projected mass deviates by more than 1e-3");
  detail::finish_profile(prof);
  return prof;
}

/// First and second trapezoidal moments of a normalized grid.
struct GridMoments {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double corr = 0.0;
};

inline GridMoments moments(const WignerGrid& grid) {
  const double dx = grid.step_x();
  const double dp = grid.step_p();
  double tot = 0.0, mx = 0.0, mp = 0.0;
  for (int i = 0; i < grid.n_x(); ++i) {
    const double wi = num::trapezoid_weight(i, grid.n_x());
    const double x = grid.x_tilde(i);
    for (int j = 0; j < grid.n_p(); ++j) {
      const double w = wi * num::trapezoid_weight(j, grid.n_p()) * grid.value(i, j);
      tot += w;
      mx += w * x;
      mp += w * grid.p_tilde(j);
    }
  }
  tot *= dx * dp;
  mx *= dx * dp;
  mp *= dx * dp;
  if (!(std::abs(tot) > 0.0)) throw validation_error("moments: grid integrates to zero");
  mx /= tot;
  mp /= tot;

  double vx = 0.0, vp = 0.0, cov = 0.0;
  for (int i = 0; i < grid.n_x(); ++i) {
    const double wi = num::trapezoid_weight(i, grid.n_x());
    const double x = grid.x_tilde(i) - mx;
    for (int j = 0; j < grid.n_p(); ++j) {
      const double w = wi * num::trapezoid_weight(j, grid.n_p()) * grid.value(i, j);
      const double p = grid.p_tilde(j) - mp;
      vx += w * x * x;
      vp += w * p * p;
      cov += w * x * p;
    }
  }
  vx *= dx * dp / tot;
  vp *= dx * dp / tot;
  cov *= dx * dp / tot;

  GridMoments m;
  m.mean_x = mx;
  m.mean_p = mp;
  m.var_x = vx;
  m.var_p = vp;
  m.corr = cov / std::sqrt(vx * vp);
  return m;
}

}  // namespace spps
