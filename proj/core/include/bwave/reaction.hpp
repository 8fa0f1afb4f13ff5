#pragma once

#include <optional>
#include <string>

#include "bwave/closed_forms.hpp"

namespace bwave {

enum class ReactionFamily {
  bump,         // lambda u (alpha - u) on [0, alpha]
  tent,         // piecewise-linear hat on [0, alpha], peak at alpha/2
  regularized,  // g_{delta,c} from the explicit regularized wave
  zero,         // f == 0, a solver stub rather than an ignition term
};

std::string to_string(ReactionFamily family);
/// Parses "bump" / "tent"; throws std::invalid_argument otherwise.
ReactionFamily parse_ignition_family(const std::string& tag);

/// Boundary nonlinearity f with its certified Lipschitz constant and mass.
///
/// Ignition families satisfy f > 0 on (0, alpha) and f = 0 elsewhere. The
/// regularized and zero families exist so the same solver can be driven by
/// manufactured data; they have no ignition threshold.
class ReactionTerm {
 public:
  double operator()(double u) const;
  /// Right derivative in u, used for Newton linearization.
  double derivative(double u) const;
  /// F(u) = int_0^u f, for 0 <= u <= 1.
  double antiderivative(double u) const;

  ReactionFamily family() const { return family_; }
  bool is_ignition() const { return family_ == ReactionFamily::bump || family_ == ReactionFamily::tent; }
  /// Ignition threshold; std::nullopt for the regularized and zero families.
  std::optional<double> threshold() const;
  /// Threshold for ignition families, throws otherwise.
  double alpha() const;
  double lipschitz() const { return lipschitz_; }
  double mass() const { return mass_; }
  /// Amplitude parameter: lambda for bump, peak height for tent.
  double amplitude() const { return amplitude_; }
  const std::optional<ClosedFormParams>& regularization() const { return params_; }

  /// e.g. "bump(alpha=0.25, mass=0.392699)".
  std::string describe() const;

 private:
  friend ReactionTerm make_bump(double, double);
  friend ReactionTerm make_tent(double, double);
  friend ReactionTerm make_regularized(const ClosedFormParams&);
  friend ReactionTerm make_zero_stub();

  ReactionTerm() = default;

  ReactionFamily family_ = ReactionFamily::zero;
  double alpha_ = 0.0;
  double amplitude_ = 0.0;
  double lipschitz_ = 0.0;
  double mass_ = 0.0;
  std::optional<ClosedFormParams> params_;
};

/// f(u) = lambda u (alpha - u) on [0, alpha] with lambda = 6 M / alpha^3.
ReactionTerm make_bump(double alpha, double target_mass);
/// Piecewise-linear hat on [0, alpha] with peak 2M/alpha at alpha/2.
ReactionTerm make_tent(double alpha, double target_mass);
/// g_{delta,c}; its mass int_0^1 g equals int_0^inf Phi_c'(u)^2 beta_delta(u) du.
ReactionTerm make_regularized(const ClosedFormParams& params);
ReactionTerm make_zero_stub();

/// F(u) = int_0^u f(s) ds.
double antiderivative(const ReactionTerm& f, double u);
/// Adaptive quadrature of f over [0, 1] to absolute tolerance 1e-12.
double mass(const ReactionTerm& f);

}  // namespace bwave
