#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bwave/grid.hpp"
#include "bwave/reaction.hpp"

namespace bwave {

// Checks of a computed wave against the identities and asymptotics it should
// obey. All functions are pure over the field.

namespace tolerances {
inline constexpr double identity_gap_manufactured = 0.02;
inline constexpr double identity_gap_found = 0.05;
inline constexpr double identity_speed_rel = 0.05;
inline constexpr double monotonicity = 1e-9;
inline constexpr double tail_rate_rel = 0.03;
inline constexpr double mu0_rel = 0.10;
inline constexpr double helmholtz_rel = 0.10;
inline constexpr double envelope_const = 1e-8;  // plus 2 h^2
inline constexpr double tail_window_hi = 1e-2;
inline constexpr double tail_window_lo = 1e-12;
inline constexpr int tail_min_nodes = 20;
inline constexpr double right_margin = 0.75;  // fraction of R kept clear of the Dirichlet side
}  // namespace tolerances

/// Trapezoid quadrature of |dv/dx|^2 over the rectangle, centered
/// differences inside and second-order one-sided differences on x = +-R.
double x_gradient_energy(const Field& v);

/// |M - c Q| / M with Q = x_gradient_energy(v). Defined as 0 when both
/// sides vanish.
double integral_identity_gap(const Field& v, double c, const ReactionTerm& f);

/// M / Q. Throws DomainError if Q < 1e-14.
double speed_from_identity(const Field& v, const ReactionTerm& f);

/// max over bottom nodes with 1 <= x <= 0.75 R of (1 - v(x,0)) - erfc(sqrt(c x)).
/// Throws DomainError if that range holds no node.
double decay_envelope_violation(const Field& v, double c);

struct TailFit {
  double mu0_fit = 0.0;
  /// Filled in by compute_diagnostics; NaN from tail_fit alone.
  double mu0_formula = 0.0;
  double fitted_rate = 0.0;
  /// |fitted_rate - c| / c.
  double exponent_residual = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  int nodes = 0;
};

/// Fits 1 - v = mu0 e^{-c x} / sqrt(x) (1 + b/x) on the samples. mu0 comes
/// from the fit at the given rate, the rate from a second fit with the rate
/// free. Throws DomainError with fewer than tolerances::tail_min_nodes samples.
TailFit tail_fit_samples(std::span<const double> x, std::span<const double> one_minus_v, double c);

/// tail_fit_samples on the bottom trace restricted to x in (0, 0.75 R) and
/// 1 - v in (1e-12, 1e-2).
TailFit tail_fit(const Field& v, double c);

/// (1/sqrt(pi c)) int_0^R e^{-c x'} f(v(-x',0)) dx' by the trapezoid rule.
/// Throws DomainError if f(v(x,0)) > 1e-10 at some node with x > 0.
double mu0_from_formula(const Field& v, double c, const ReactionTerm& f);

/// w(x,0) = 2 int_0^R K0(c (x + x') / 2) / (2 pi) e^{-c x'/2} f(v(-x',0)) dx'.
/// Requires 1 < x < R.
double helmholtz_reconstruct(const Field& v, double c, const ReactionTerm& f, double x);

/// e^{c x/2} (1 - v(x,0)), linear interpolation between bottom nodes.
double direct_tail_weight(const Field& v, double c, double x);

/// Interior 5-point Laplacian and the ghost-consistent bottom flux
/// residual of the harmonic problem problem with flux beta_delta, evaluated on the
/// sampled shifted root. Returns max over both.
double stationary_residual(const GridSpec& grid, double delta);

struct MonotonicityViolation {
  double x = 0.0;  // max of v(i,j) - v(i+1,j), clipped at 0
  double y = 0.0;  // max of v(i,j) - v(i,j+1), clipped at 0
};

MonotonicityViolation monotonicity_violation(const Field& v);

struct ComparisonRow {
  double c = 0.0;
  double delta = 0.0;
  double worst_margin = 0.0;  // min over samples of g(u + eta) - f(u) (item 1) or eta - g(u) (item 2)
  bool holds = false;
};

struct ComparisonReport {
  double eta = 0.0;
  double A = 0.0;
  /// Item 1: g_{delta,c}(u + eta) >= f(u) on u in [0, 1 - eta], delta = A/sqrt(c).
  std::vector<ComparisonRow> item1;
  /// Smallest sampled c above which every sampled c passes item 1.
  std::optional<double> empirical_K;
  /// Item 2: g_{delta,c}(u) <= eta with delta = sqrt(c) |beta|_inf / eta,
  /// the edge of the hypothesis sqrt(c)/delta <= eta/|beta|_inf.
  std::vector<ComparisonRow> item2;
  std::size_t item2_samples = 0;
  std::size_t item2_passed = 0;
  /// Same check with the constant eta sqrt(pi) / (2 |beta|_inf), which
  /// accounts for sup Phi' = 2/sqrt(pi).
  std::vector<ComparisonRow> item2_sharp;
  std::size_t item2_sharp_passed = 0;
};

/// u samples outside [0, 1) are ignored. Throws DomainError unless eta > 0.
ComparisonReport comparison_scan(const ReactionTerm& f, double eta, double A, std::span<const double> c_samples,
                                 std::span<const double> u_samples);

struct HelmholtzProbe {
  double x = 0.0;
  double reconstructed = 0.0;
  double direct = 0.0;
  double relative_difference = 0.0;
};

/// Everything the wave diagnostics report. Entries that could not be
/// evaluated (for example mu0 on a non-ignition term) are left empty and the
/// reason is appended to notes.
struct DiagnosticsBundle {
  std::optional<double> identity_gap;
  std::optional<double> speed_from_identity;
  std::optional<double> envelope_violation;
  std::optional<double> mu0_fit;
  std::optional<double> mu0_formula;
  std::optional<double> exponent_residual;
  std::optional<double> fitted_rate;
  double mono_x = 0.0;
  double mono_y = 0.0;
  std::vector<HelmholtzProbe> helmholtz_probes;
  std::vector<std::string> notes;
};

inline constexpr double default_probes[] = {2.0, 4.0, 8.0};

DiagnosticsBundle compute_diagnostics(const Field& v, double c, const ReactionTerm& f,
                                      std::span<const double> probes = default_probes);

/// JSON object with keys identity_gap, speed_from_identity,
/// envelope_violation, mu0_fit, mu0_formula, exponent_residual, mono_x,
/// mono_y, helmholtz_probes (plus fitted_rate and notes). Missing values are null.
std::string to_json(const DiagnosticsBundle& bundle, int indent = 2);

}  // namespace bwave
