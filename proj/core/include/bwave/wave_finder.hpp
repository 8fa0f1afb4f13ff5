#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bwave/diagnostics.hpp"
#include "bwave/grid.hpp"
#include "bwave/grid_solver.hpp"
#include "bwave/reaction.hpp"

namespace bwave {

/// Lateral/top data as a function of the candidate speed. The default is
/// dirichlet_data, rebuilt for each c.
using BoundaryProvider = std::function<BoundaryValues(double c, const GridSpec& grid)>;

/// h(c) = v_c(0,0) - alpha changes sign across [c_lo, c_hi].
struct SpeedBracket {
  double c_lo = 0.0;
  double c_hi = 0.0;
  double h_lo = 0.0;  // < 0
  double h_hi = 0.0;  // > 0
};

struct ScanSample {
  double c = 0.0;
  double h = 0.0;
};

/// Solver settings used by the speed search: the front in the monotone
/// sweeps can need thousands of steps to settle, so max_outer is raised.
inline SolverOptions default_search_solver() {
  SolverOptions o;
  o.max_outer = 50000;
  return o;
}

struct SpeedSearchOptions {
  double c_min = 1.0 / 256.0;
  double c_max = 64.0;
  double speed_tol = 1e-6;
  double width_tol = 1e-8;
  int max_refinements = 200;
  /// Keep scanning past the first sign change and report every bracket.
  bool full_scan = false;
  /// Start each solve from the converged field at the nearest smaller
  /// speed (kept only if it is a subsolution there).
  bool warm_start = true;
  bool compute_diagnostics = true;
  SolverOptions solver = default_search_solver();
  BoundaryProvider boundary;  // empty: dirichlet_data
};

struct WaveResult {
  double R = 0.0;
  double c_R = 0.0;
  double center = 0.0;
  Field field;
  SolveReport report;
  SpeedBracket bracket;
  /// Every upward sign change seen by the scan, ascending in c.
  std::vector<SpeedBracket> brackets;
  std::vector<ScanSample> scan;
  int evaluations = 0;
  std::vector<std::string> warnings;
  DiagnosticsBundle diagnostics;
};

/// v_c(0,0) for the truncated problem at speed c (sub start).
double center_value_of_speed(double c, const GridSpec& grid, const ReactionTerm& f,
                             const SolverOptions& options = {}, const BoundaryProvider& boundary = {});

/// Geometric scan c_min, 2 c_min, ... up to c_max (clipped to the Peclet
/// limit 1/hx), then Illinois regula falsi inside the first certified
/// bracket until |h| <= speed_tol or the bracket is narrower than
/// width_tol. A solve stops early once its sweeps push v(0,0) above alpha,
/// which already fixes the sign of h. The returned field is the converged
/// evaluation closest to alpha; on a grid c -> v_c(0,0) can jump across
/// alpha, in which case a warning says so. Throws BracketError if the scan
/// finds no sign change.
WaveResult find_speed(const GridSpec& grid, const ReactionTerm& f, double alpha, const SpeedSearchOptions& options = {});

/// How the grid follows R in a continuation run.
struct GridPolicy {
  double h = 1.0 / 32.0;         // target spacing in both directions
  std::optional<double> H;       // default R^{1/4}
  GridSpec make(double R) const { return GridSpec::with_spacing(R, h, H); }
};

struct ContinuationEntry {
  double R = 0.0;
  std::optional<WaveResult> wave;
  std::string error;  // non-empty when this R failed
};

struct ContinuationResult {
  std::vector<ContinuationEntry> entries;
  /// c_{k+1} - c_k over consecutive successful entries.
  std::vector<double> differences;
  std::optional<double> limit;
  std::optional<double> limit_error;
};

/// Runs find_speed for each R (strictly increasing) on up to `workers`
/// threads. Failures are recorded per entry. The limit is an Aitken
/// extrapolation of the last three speeds when the differences contract,
/// otherwise the last speed, with the size of the last correction as the
/// error bar.
ContinuationResult continuation(const std::vector<double>& schedule, const ReactionTerm& f, double alpha,
                                 const GridPolicy& policy, const SpeedSearchOptions& options = {}, int workers = 1);

/// R,c_R,center_value,outer_iterations,residual,identity_gap
void write_speed_table(std::ostream& out, const ContinuationResult& result,
                       const std::vector<std::string>& comments = {});

}  // namespace bwave
