#include "bwave/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bwave/errors.hpp"

namespace bwave {
namespace {

constexpr double kTwoOverSqrtPi = std::numbers::inv_sqrtpi * 2.0;

void require_positive_speed(double c) {
  if (!(c > 0.0)) throw DomainError("wave speed must be positive, got " + std::to_string(c));
}

// Root of erf(t) = target (complement = false) or erfc(t) = target
// (complement = true). Newton with a bisection fallback
// whenever the step leaves the bracket.
double solve_scaled_profile(double target, bool complement) {
  double lo = 0.0;
  // erfc reaches the subnormal range near t = 27
  double hi = complement ? 27.5 : 10.0;
  double t = complement ? std::sqrt(std::max(-std::log(target), 0.0)) : target;
  t = std::clamp(t, lo, hi);
  for (int it = 0; it < 200; ++it) {
    // residual of the increasing map t -> erf(t)
    const double r = complement ? target - std::erfc(t) : std::erf(t) - target;
    if (r == 0.0) return t;
    if (r < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = kTwoOverSqrtPi * std::exp(-t * t);
    double next = slope > 0.0 ? t - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * (1.0 + t) || hi - lo <= 1e-16 * (1.0 + t)) return next;
    t = next;
  }
  return t;
}

}  // namespace

ClosedFormParams::ClosedFormParams(double delta, double speed) : delta_(delta), speed_(speed) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive, got " + std::to_string(delta));
  require_positive_speed(speed);
}

double ClosedFormParams::scaled_delta() const { return delta_ * std::sqrt(speed_); }

double harmonic_root(Point p) {
  const double rho = std::hypot(p.x, p.y);
  if (p.x >= 0.0) return std::sqrt(0.5 * (rho + p.x));
  // rho + x = y^2 / (rho - x) avoids cancellation on the left half
  return std::abs(p.y) / std::sqrt(2.0 * (rho - p.x));
}

Gradient harmonic_root_gradient(Point p) {
  const double rho = std::hypot(p.x, p.y);
  if (rho < 1e-12) throw DomainError("harmonic_root_gradient is singular at the origin");
  const double cos_half = std::sqrt(0.5 * (rho + p.x) / rho);
  const double sin_half = std::sqrt(0.5 * (rho - p.x) / rho);
  const double scale = 0.5 / std::sqrt(rho);
  return {scale * cos_half, scale * sin_half};
}

double shifted_root(Point p, double delta) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  return harmonic_root({p.x, p.y + delta * delta});
}

double wave_profile(double u) { return std::erf(u); }

double wave_profile(double u, double c) {
  require_positive_speed(c);
  return std::erf(std::sqrt(c) * u);
}

double wave_profile_complement(double u, double c) {
  require_positive_speed(c);
  return std::erfc(std::sqrt(c) * u);
}

double wave_profile_derivative(double u, double c) {
  require_positive_speed(c);
  return kTwoOverSqrtPi * std::sqrt(c) * std::exp(-c * u * u);
}

double wave_profile_inverse(double v, double c) {
  require_positive_speed(c);
  if (!(v >= 0.0) || v >= 1.0) throw DomainError("wave_profile_inverse needs 0 <= v < 1");
  if (v == 0.0) return 0.0;
  const double t = v > 0.5 ? solve_scaled_profile(1.0 - v, true) : solve_scaled_profile(v, false);
  return t / std::sqrt(c);
}

double wave_profile_inverse_complement(double w, double c) {
  require_positive_speed(c);
  if (!(w > 0.0) || w > 1.0) throw DomainError("wave_profile_inverse_complement needs 0 < w <= 1");
  if (w == 1.0) return 0.0;
  const double t = w < 0.5 ? solve_scaled_profile(w, true) : solve_scaled_profile(1.0 - w, false);
  return t / std::sqrt(c);
}

double beta(double u) {
  const double u2 = u * u;
  return u / (1.0 + 4.0 * u2 * u2);
}

double beta_derivative(double u) {
  const double u4 = u * u * u * u;
  const double d = 1.0 + 4.0 * u4;
  return (1.0 - 12.0 * u4) / (d * d);
}

double beta_delta(double u, double delta) { return beta(u / delta) / delta; }

double beta_delta_derivative(double u, double delta) {
  return beta_derivative(u / delta) / (delta * delta);
}

double beta_argmax() { return std::pow(12.0, -0.25); }

double beta_sup() { return beta(beta_argmax()); }

double g_nonlinearity(double v, const ClosedFormParams& params) {
  if (!(v >= 0.0)) throw DomainError("g_nonlinearity needs v >= 0");
  if (v >= 1.0) return 0.0;
  const double c = params.speed();
  const double u = wave_profile_inverse(v, c);
  return wave_profile_derivative(u, c) * beta_delta(u, params.delta());
}

double g_nonlinearity_derivative(double v, const ClosedFormParams& params) {
  if (!(v >= 0.0)) throw DomainError("g_nonlinearity_derivative needs v >= 0");
  if (v >= 1.0) return 0.0;
  const double c = params.speed();
  const double u = wave_profile_inverse(v, c);
  return beta_delta_derivative(u, params.delta()) - 2.0 * c * u * beta_delta(u, params.delta());
}

double explicit_wave(Point p, const ClosedFormParams& params) {
  return wave_profile(shifted_root(p, params.delta()), params.speed());
}

double explicit_wave_complement(Point p, const ClosedFormParams& params) {
  return wave_profile_complement(shifted_root(p, params.delta()), params.speed());
}

double free_boundary_wave(Point p, double c) { return wave_profile(harmonic_root(p), c); }

double bessel_k0(double s) {
  if (!(s > 0.0)) throw DomainError("bessel_k0 needs s > 0");
  return std::cyl_bessel_k(0.0, s);
}

}  // namespace bwave
