#include "bwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bwave/closed_forms.hpp"
#include "bwave/errors.hpp"

namespace bwave {

namespace {

double trapezoid_weight(int k, int n, double h) { return (k == 0 || k == n) ? 0.5 * h : h; }

double dvdx(const Field& v, int i, int j) {
  const GridSpec& g = v.grid();
  const double h = g.hx();
  const int n = g.nx();
  if (i == 0) return (-3.0 * v(0, j) + 4.0 * v(1, j) - v(2, j)) / (2.0 * h);
  if (i == n) return (3.0 * v(n, j) - 4.0 * v(n - 1, j) + v(n - 2, j)) / (2.0 * h);
  return (v(i + 1, j) - v(i - 1, j)) / (2.0 * h);
}

}  // namespace

double x_gradient_energy(const Field& v) {
  const GridSpec& g = v.grid();
  double total = 0.0;
  for (int j = 0; j <= g.ny(); ++j) {
    double row = 0.0;
    for (int i = 0; i <= g.nx(); ++i) {
      const double d = dvdx(v, i, j);
      row += trapezoid_weight(i, g.nx(), g.hx()) * d * d;
    }
    total += trapezoid_weight(j, g.ny(), g.hy()) * row;
  }
  return total;
}

double integral_identity_gap(const Field& v, double c, const ReactionTerm& f) {
  const double M = f.mass();
  const double rhs = c * x_gradient_energy(v);
  if (M == 0.0) return rhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(M - rhs) / M;
}

double speed_from_identity(const Field& v, const ReactionTerm& f) {
  const double Q = x_gradient_energy(v);
  if (Q < 1e-14) throw DomainError("speed_from_identity: x-gradient energy below 1e-14");
  return f.mass() / Q;
}

double decay_envelope_violation(const Field& v, double c) {
  if (!(c > 0.0)) throw DomainError("decay_envelope_violation needs c > 0");
  const GridSpec& g = v.grid();
  const double x_hi = tolerances::right_margin * g.R();
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= g.nx(); ++i) {
    const double x = g.x(i);
    if (x < 1.0 || x > x_hi) continue;
    worst = std::max(worst, (1.0 - v(i, 0)) - std::erfc(std::sqrt(c * x)));
  }
  if (worst == -std::numeric_limits<double>::infinity())
    throw DomainError("decay_envelope_violation: no bottom node with 1 <= x <= 0.75 R");
  return worst;
}

TailFit tail_fit_samples(std::span<const double> x, std::span<const double> one_minus_v, double c) {
  if (x.size() != one_minus_v.size()) throw DomainError("tail_fit: sample size mismatch");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < tolerances::tail_min_nodes)
    throw DomainError("tail_fit: window has " + std::to_string(n) + " nodes, need " +
                      std::to_string(tolerances::tail_min_nodes));
  Eigen::MatrixXd fixed(n, 2);
  Eigen::MatrixXd free(n, 3);
  Eigen::VectorXd t(n);
  Eigen::VectorXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xk = x[k];
    if (!(xk > 0.0) || !(one_minus_v[k] > 0.0)) throw DomainError("tail_fit: samples need x > 0 and 1 - v > 0");
    s[k] = std::log(one_minus_v[k]) + 0.5 * std::log(xk);
    t[k] = s[k] + c * xk;
    fixed(k, 0) = 1.0;
    fixed(k, 1) = 1.0 / xk;
    free(k, 0) = 1.0;
    free(k, 1) = -xk;
    free(k, 2) = 1.0 / xk;
  }
  const Eigen::VectorXd a = fixed.colPivHouseholderQr().solve(t);
  const Eigen::VectorXd b = free.colPivHouseholderQr().solve(s);

  TailFit fit;
  fit.mu0_fit = std::exp(a[0]);
  fit.mu0_formula = std::numeric_limits<double>::quiet_NaN();
  fit.fitted_rate = b[1];
  fit.exponent_residual = std::abs(b[1] - c) / c;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.x_min = *lo;
  fit.x_max = *hi;
  fit.nodes = static_cast<int>(n);
  return fit;
}

TailFit tail_fit(const Field& v, double c) {
  const GridSpec& g = v.grid();
  std::vector<double> xs;
  std::vector<double> ws;
  for (int i = g.center_index() + 1; i <= g.nx(); ++i) {
    const double x = g.x(i);
    if (x >= tolerances::right_margin * g.R()) break;
    const double w = 1.0 - v(i, 0);
    if (w > tolerances::tail_window_lo && w < tolerances::tail_window_hi) {
      xs.push_back(x);
      ws.push_back(w);
    }
  }
  return tail_fit_samples(xs, ws, c);
}

namespace {

void require_normalized_source(const Field& v, const ReactionTerm& f) {
  const GridSpec& g = v.grid();
  for (int i = g.center_index() + 1; i <= g.nx(); ++i) {
    const double s = f(v(i, 0));
    if (s > 1e-10)
      throw DomainError("reaction source f(v(x,0)) = " + std::to_string(s) + " at x = " + std::to_string(g.x(i)) +
                        " > 0; the wave is not normalized");
  }
}

// Trapezoid rule over the negative half of the bottom trace, x' = -x >= 0.
template <class Kernel>
double negative_trace_integral(const Field& v, const ReactionTerm& f, Kernel kernel) {
  const GridSpec& g = v.grid();
  const int ic = g.center_index();
  double total = 0.0;
  for (int i = 0; i <= ic; ++i) {
    const double xp = -g.x(i);
    const double w = (i == 0 || i == ic) ? 0.5 * g.hx() : g.hx();
    const double src = f(v(i, 0));
    if (src != 0.0) total += w * kernel(xp) * src;
  }
  return total;
}

}  // namespace

double mu0_from_formula(const Field& v, double c, const ReactionTerm& f) {
  if (!(c > 0.0)) throw DomainError("mu0_from_formula needs c > 0");
  require_normalized_source(v, f);
  const double integral = negative_trace_integral(v, f, [c](double xp) { return std::exp(-c * xp); });
  return integral / std::sqrt(std::numbers::pi * c);
}

double helmholtz_reconstruct(const Field& v, double c, const ReactionTerm& f, double x) {
  if (!(c > 0.0)) throw DomainError("helmholtz_reconstruct needs c > 0");
  if (!(x > 1.0) || !(x < v.grid().R()))
    throw DomainError("helmholtz_reconstruct: probe must satisfy 1 < x < R");
  return 2.0 * negative_trace_integral(v, f, [c, x](double xp) {
           return bessel_k0(0.5 * c * (x + xp)) / (2.0 * std::numbers::pi) * std::exp(-0.5 * c * xp);
         });
}

double direct_tail_weight(const Field& v, double c, double x) {
  const GridSpec& g = v.grid();
  if (!(x >= -g.R() && x <= g.R())) throw DomainError("direct_tail_weight: x outside the grid");
  const double s = (x + g.R()) / g.hx();
  const int i = std::min(static_cast<int>(std::floor(s)), g.nx() - 1);
  const double t = s - i;
  const double one_minus_v = (1.0 - t) * (1.0 - v(i, 0)) + t * (1.0 - v(i + 1, 0));
  return std::exp(0.5 * c * x) * one_minus_v;
}

double stationary_residual(const GridSpec& grid, double delta) {
  const Field u = Field::sample(grid, [delta](double x, double y) { return shifted_root({x, y}, delta); });
  const double hx = grid.hx(), hy = grid.hy();
  double worst = 0.0;
  for (int j = 1; j < grid.ny(); ++j)
    for (int i = 1; i < grid.nx(); ++i) {
      const double lap = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (hx * hx) +
                         (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (hy * hy);
      worst = std::max(worst, std::abs(lap));
    }
  for (int i = 1; i < grid.nx(); ++i) {
    const double uxx = (u(i + 1, 0) - 2.0 * u(i, 0) + u(i - 1, 0)) / (hx * hx);
    const double r = (u(i, 1) - u(i, 0)) / hy + 0.5 * hy * uxx - beta_delta(u(i, 0), delta);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

MonotonicityViolation monotonicity_violation(const Field& v) {
  const GridSpec& g = v.grid();
  MonotonicityViolation m;
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      if (i < g.nx()) m.x = std::max(m.x, v(i, j) - v(i + 1, j));
      if (j < g.ny()) m.y = std::max(m.y, v(i, j) - v(i, j + 1));
    }
  }
  return m;
}

ComparisonReport comparison_scan(const ReactionTerm& f, double eta, double A, std::span<const double> c_samples,
                                 std::span<const double> u_samples) {
  if (!(eta > 0.0) || !(eta < 1.0)) throw DomainError("comparison_scan needs 0 < eta < 1");
  if (!(A > 0.0)) throw DomainError("comparison_scan needs A > 0");
  ComparisonReport rep;
  rep.eta = eta;
  rep.A = A;

  std::vector<double> cs(c_samples.begin(), c_samples.end());
  std::sort(cs.begin(), cs.end());
  for (double c : cs)
    if (!(c > 0.0)) throw DomainError("comparison_scan: c samples must be positive");

  for (double c : cs) {
    const ClosedFormParams p(A / std::sqrt(c), c);
    ComparisonRow row{c, p.delta(), std::numeric_limits<double>::infinity(), true};
    for (double u : u_samples) {
      if (u < 0.0 || u > 1.0 - eta) continue;
      const double margin = g_nonlinearity(u + eta, p) - f(u);
      row.worst_margin = std::min(row.worst_margin, margin);
    }
    row.holds = row.worst_margin >= 0.0;
    rep.item1.push_back(row);
  }
  for (std::size_t k = rep.item1.size(); k-- > 0;) {
    if (!rep.item1[k].holds) break;
    rep.empirical_K = rep.item1[k].c;
  }

  auto item2 = [&](double c0, std::vector<ComparisonRow>& rows, std::size_t& passed) {
    std::size_t samples = 0;
    for (double c : cs) {
      const ClosedFormParams p(std::sqrt(c) / c0, c);
      ComparisonRow row{c, p.delta(), std::numeric_limits<double>::infinity(), true};
      for (double u : u_samples) {
        if (u < 0.0 || u >= 1.0) continue;
        const double margin = eta - g_nonlinearity(u, p);
        ++samples;
        if (margin >= 0.0) ++passed;
        row.worst_margin = std::min(row.worst_margin, margin);
      }
      row.holds = row.worst_margin >= 0.0;
      rows.push_back(row);
    }
    return samples;
  };
  rep.item2_samples = item2(eta / beta_sup(), rep.item2, rep.item2_passed);
  item2(eta * std::sqrt(std::numbers::pi) / (2.0 * beta_sup()), rep.item2_sharp, rep.item2_sharp_passed);
  return rep;
}

DiagnosticsBundle compute_diagnostics(const Field& v, double c, const ReactionTerm& f,
                                      std::span<const double> probes) {
  DiagnosticsBundle b;
  auto attempt = [&b](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      b.notes.push_back(std::string(what) + ": " + e.what());
    }
  };
  attempt("identity_gap", [&] { b.identity_gap = integral_identity_gap(v, c, f); });
  attempt("speed_from_identity", [&] { b.speed_from_identity = speed_from_identity(v, f); });
  attempt("envelope_violation", [&] { b.envelope_violation = decay_envelope_violation(v, c); });
  attempt("tail_fit", [&] {
    const TailFit t = tail_fit(v, c);
    b.mu0_fit = t.mu0_fit;
    b.exponent_residual = t.exponent_residual;
    b.fitted_rate = t.fitted_rate;
  });
  attempt("mu0_formula", [&] { b.mu0_formula = mu0_from_formula(v, c, f); });
  const MonotonicityViolation m = monotonicity_violation(v);
  b.mono_x = m.x;
  b.mono_y = m.y;
  for (double x : probes) {
    attempt("helmholtz", [&] {
      HelmholtzProbe p;
      p.x = x;
      p.reconstructed = helmholtz_reconstruct(v, c, f, x);
      p.direct = direct_tail_weight(v, c, x);
      p.relative_difference = std::abs(p.reconstructed - p.direct) / std::abs(p.direct);
      b.helmholtz_probes.push_back(p);
    });
  }
  return b;
}

std::string to_json(const DiagnosticsBundle& b, int indent) {
  auto opt = [](const std::optional<double>& x) -> nlohmann::json {
    if (x && std::isfinite(*x)) return *x;
    return nullptr;
  };
  nlohmann::json j;
  j["identity_gap"] = opt(b.identity_gap);
  j["speed_from_identity"] = opt(b.speed_from_identity);
  j["envelope_violation"] = opt(b.envelope_violation);
  j["mu0_fit"] = opt(b.mu0_fit);
  j["mu0_formula"] = opt(b.mu0_formula);
  j["exponent_residual"] = opt(b.exponent_residual);
  j["fitted_rate"] = opt(b.fitted_rate);
  j["mono_x"] = b.mono_x;
  j["mono_y"] = b.mono_y;
  j["helmholtz_probes"] = nlohmann::json::array();
  for (const auto& p : b.helmholtz_probes) {
    j["helmholtz_probes"].push_back(
        {{"x", p.x}, {"reconstructed", p.reconstructed}, {"direct", p.direct}, {"relative_difference", p.relative_difference}});
  }
  j["notes"] = b.notes;
  return j.dump(indent);
}

}  // namespace bwave
