#pragma once

// Explicit solutions of the free-boundary and regularized traveling-wave
// problems on the upper half-plane, plus the special functions they need.
// Everything here is pure and thread-safe.

namespace bwave {

struct Point {
  double x = 0.0;
  double y = 0.0;  // >= 0 on the half-plane
};

struct Gradient {
  double dx = 0.0;
  double dy = 0.0;
};

/// The pair (delta, c) selecting one member of the regularized wave family.
class ClosedFormParams {
 public:
  /// Throws DomainError unless delta > 0 and speed > 0.
  ClosedFormParams(double delta, double speed);

  double delta() const { return delta_; }
  double speed() const { return speed_; }

  /// A = delta * sqrt(c). Note u^delta(0,0) = delta/sqrt(2), so
  /// explicit_wave at the origin is Phi(A/sqrt(2)), not Phi(A).
  double scaled_delta() const;

 private:
  double delta_;
  double speed_;
};

/// u(x,y) = Re sqrt(x + iy) = ((x^2+y^2)^{1/2} + x)^{1/2} / sqrt(2).
/// On the axis this is exactly sqrt(max(x,0)).
double harmonic_root(Point p);

/// (u_x, u_y) = rho^{-1/2}/2 * (cos(theta/2), sin(theta/2)).
/// Throws DomainError for rho < 1e-12.
Gradient harmonic_root_gradient(Point p);

/// u^delta(x,y) = u(x, y + delta^2).
double shifted_root(Point p, double delta);

/// Phi(u) = erf(u).
double wave_profile(double u);
/// Phi_c(u) = Phi(sqrt(c) u).
double wave_profile(double u, double c);
/// 1 - Phi_c(u), accurate in the tail.
double wave_profile_complement(double u, double c);
/// Phi_c'(u) = 2 sqrt(c/pi) exp(-c u^2).
double wave_profile_derivative(double u, double c);

/// Solves Phi_c(u) = v for 0 <= v < 1 by bracketed Newton.
double wave_profile_inverse(double v, double c);
/// Solves 1 - Phi_c(u) = w for 0 < w <= 1. Well conditioned for small w.
double wave_profile_inverse_complement(double w, double c);

double beta(double u);                         // u / (1 + 4u^4)
double beta_derivative(double u);              // (1 - 12u^4) / (1 + 4u^4)^2
double beta_delta(double u, double delta);     // beta(u/delta)/delta
double beta_delta_derivative(double u, double delta);

/// sup beta = beta(12^{-1/4}).
double beta_sup();
/// 12^{-1/4}, the maximizer of beta.
double beta_argmax();

/// g_{delta,c}(v) defined through g(Phi_c(u)) = Phi_c'(u) beta_delta(u).
/// Returns 0 for v >= 1 (continuous extension); throws for v < 0.
double g_nonlinearity(double v, const ClosedFormParams& params);
/// dg/dv = beta_delta'(u) - 2 c u beta_delta(u) with v = Phi_c(u).
double g_nonlinearity_derivative(double v, const ClosedFormParams& params);

/// phi_{delta,c}(x,y) = Phi_c(u^delta(x,y)).
double explicit_wave(Point p, const ClosedFormParams& params);
/// 1 - phi_{delta,c}(x,y).
double explicit_wave_complement(Point p, const ClosedFormParams& params);
/// phi_c(x,y) = Phi_c(u(x,y)), the free-boundary wave (delta = 0).
double free_boundary_wave(Point p, double c);

/// Modified Bessel function K_0. Throws DomainError for s <= 0.
double bessel_k0(double s);

}  // namespace bwave
