#include "bwave/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bwave/errors.hpp"

namespace bwave {
namespace {

template <class F>
double integrate(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14, &error);
}

void check_ignition_params(double alpha, double target_mass) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(target_mass > 0.0)) throw DomainError("mass must be positive");
}

// Upper integration limit in u past which Phi_c'(u)^2 is below 1e-120.
double regularized_cutoff(const ClosedFormParams& p) { return 12.0 / std::sqrt(p.speed()); }

}  // namespace

std::string to_string(ReactionFamily family) {
  switch (family) {
    case ReactionFamily::bump: return "bump";
    case ReactionFamily::tent: return "tent";
    case ReactionFamily::regularized: return "regularized";
    case ReactionFamily::zero: return "zero";
  }
  return "unknown";
}

ReactionFamily parse_ignition_family(const std::string& tag) {
  if (tag == "bump") return ReactionFamily::bump;
  if (tag == "tent") return ReactionFamily::tent;
  throw std::invalid_argument("unknown reaction family '" + tag + "' (expected bump or tent)");
}

double ReactionTerm::operator()(double u) const {
  switch (family_) {
    case ReactionFamily::bump:
      if (u <= 0.0 || u >= alpha_) return 0.0;
      return amplitude_ * u * (alpha_ - u);
    case ReactionFamily::tent: {
      if (u <= 0.0 || u >= alpha_) return 0.0;
      const double half = 0.5 * alpha_;
      return u <= half ? amplitude_ * u / half : amplitude_ * (alpha_ - u) / half;
    }
    case ReactionFamily::regularized:
      if (u <= 0.0 || u >= 1.0) return 0.0;
      return g_nonlinearity(u, *params_);
    case ReactionFamily::zero:
      return 0.0;
  }
  return 0.0;
}

double ReactionTerm::derivative(double u) const {
  switch (family_) {
    case ReactionFamily::bump:
      if (u >= alpha_) return 0.0;
      return amplitude_ * (alpha_ - 2.0 * std::max(u, 0.0));
    case ReactionFamily::tent:
      if (u >= alpha_) return 0.0;
      return u < 0.5 * alpha_ ? 2.0 * amplitude_ / alpha_ : -2.0 * amplitude_ / alpha_;
    case ReactionFamily::regularized:
      if (u >= 1.0) return 0.0;
      return g_nonlinearity_derivative(std::max(u, 0.0), *params_);
    case ReactionFamily::zero:
      return 0.0;
  }
  return 0.0;
}

double ReactionTerm::antiderivative(double u) const {
  const double s = std::clamp(u, 0.0, 1.0);
  switch (family_) {
    case ReactionFamily::bump: {
      const double w = std::min(s, alpha_);
      return amplitude_ * (alpha_ * w * w / 2.0 - w * w * w / 3.0);
    }
    case ReactionFamily::tent: {
      const double half = 0.5 * alpha_;
      const double w = std::min(s, alpha_);
      if (w <= half) return amplitude_ * w * w / alpha_;
      const double slope = amplitude_ / half;
      return amplitude_ * half / 2.0 + slope * (alpha_ * (w - half) - (w * w - half * half) / 2.0);
    }
    case ReactionFamily::regularized: {
      if (s >= 1.0) return mass_;
      const ClosedFormParams& p = *params_;
      const double upper = wave_profile_inverse(s, p.speed());
      return integrate(
          [&p](double t) {
            const double d = wave_profile_derivative(t, p.speed());
            return d * d * beta_delta(t, p.delta());
          },
          0.0, upper);
    }
    case ReactionFamily::zero:
      return 0.0;
  }
  return 0.0;
}

std::optional<double> ReactionTerm::threshold() const {
  if (is_ignition()) return alpha_;
  return std::nullopt;
}

double ReactionTerm::alpha() const {
  if (!is_ignition()) throw std::logic_error(to_string(family_) + " reaction has no ignition threshold");
  return alpha_;
}

std::string ReactionTerm::describe() const {
  char buf[160];
  switch (family_) {
    case ReactionFamily::bump:
    case ReactionFamily::tent:
      std::snprintf(buf, sizeof buf, "%s(alpha=%.17g, mass=%.17g)", to_string(family_).c_str(), alpha_, mass_);
      break;
    case ReactionFamily::regularized:
      std::snprintf(buf, sizeof buf, "regularized(delta=%.17g, c=%.17g)", params_->delta(), params_->speed());
      break;
    case ReactionFamily::zero:
      std::snprintf(buf, sizeof buf, "zero");
      break;
  }
  return buf;
}

ReactionTerm make_bump(double alpha, double target_mass) {
  check_ignition_params(alpha, target_mass);
  ReactionTerm f;
  f.family_ = ReactionFamily::bump;
  f.alpha_ = alpha;
  f.amplitude_ = 6.0 * target_mass / (alpha * alpha * alpha);
  f.lipschitz_ = f.amplitude_ * alpha;
  f.mass_ = target_mass;
  return f;
}

ReactionTerm make_tent(double alpha, double target_mass) {
  check_ignition_params(alpha, target_mass);
  ReactionTerm f;
  f.family_ = ReactionFamily::tent;
  f.alpha_ = alpha;
  f.amplitude_ = 2.0 * target_mass / alpha;
  f.lipschitz_ = 2.0 * f.amplitude_ / alpha;
  f.mass_ = target_mass;
  return f;
}

ReactionTerm make_regularized(const ClosedFormParams& params) {
  ReactionTerm f;
  f.family_ = ReactionFamily::regularized;
  f.params_ = params;
  const double c = params.speed();
  const double delta = params.delta();
  const double cutoff = regularized_cutoff(params);
  // sup_u |beta_delta'(u) - 2 c u beta_delta(u)|, sampled densely then padded
  const int samples = 40000;
  double lip = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double u = cutoff * k / samples;
    lip = std::max(lip, std::abs(beta_delta_derivative(u, delta) - 2.0 * c * u * beta_delta(u, delta)));
  }
  f.lipschitz_ = 1.02 * lip;
  f.mass_ = integrate(
      [&params](double t) {
        const double d = wave_profile_derivative(t, params.speed());
        return d * d * beta_delta(t, params.delta());
      },
      0.0, cutoff);
  return f;
}

ReactionTerm make_zero_stub() { return ReactionTerm(); }

double antiderivative(const ReactionTerm& f, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("antiderivative needs 0 <= u <= 1");
  return f.antiderivative(u);
}

double mass(const ReactionTerm& f) {
  auto eval = [&f](double u) { return f(u); };
  switch (f.family()) {
    case ReactionFamily::bump:
      return integrate(eval, 0.0, f.alpha()) + integrate(eval, f.alpha(), 1.0);
    case ReactionFamily::tent: {
      const double a = f.alpha();
      return integrate(eval, 0.0, 0.5 * a) + integrate(eval, 0.5 * a, a) + integrate(eval, a, 1.0);
    }
    case ReactionFamily::regularized:
      return integrate(eval, 0.0, 0.5) + integrate(eval, 0.5, 1.0);
    case ReactionFamily::zero:
      return 0.0;
  }
  return 0.0;
}

}  // namespace bwave
