#pragma once

#include <memory>
#include <optional>

#include "bwave/grid.hpp"
#include "bwave/reaction.hpp"

namespace bwave {

// Finite-difference solver for the truncated traveling-wave problem
//
//   v_xx + v_yy + c v_x = 0       in (-R, R) x (0, H)
//   v_y = f(v)                    on y = 0   (outward flux -f)
//   v = Psi                       on x = +-R and y = H
//
// 5-point Laplacian, centered drift (c hx <= 1), and a second-order ghost
// node v_{i,-1} = v_{i,1} - 2 hy f(v_{i,0}) on the bottom row.

enum class StartMode {
  sub,    // v = 0, iterates increase
  super,  // v = 1, iterates decrease
  warm,   // caller-supplied field if it is a subsolution, else 0
};

struct SolverOptions {
  double tol_outer = 1e-10;    // max-norm change between outer iterates
  int max_outer = 500;
  /// Monotone sweeps taken before Newton may be tried.
  int monotone_steps = 8;
  /// Newton polishing on the bottom trace once a sweep changes the iterate
  /// by less than newton_switch. When false the solver runs the plain
  /// monotone iteration to convergence.
  bool newton = true;
  double newton_switch = 1e-5;
  double residual_tol = 1e-7;  // on discrete_residual
  /// Sub and warm starts: return as soon as a sweep puts v(0,0) above this
  /// value. The iterates bound the smallest solution from below, so this
  /// certifies its center value without converging (report.stopped_above).
  std::optional<double> stop_above;
};

struct SolveReport {
  int outer_iterations = 0;
  int monotone_iterations = 0;
  int newton_iterations = 0;
  double final_residual = 0.0;
  /// max |v_sub - v_super|; NaN unless both starts were run.
  double sub_super_gap = 0.0;
  /// Largest step against the expected direction during monotone sweeps
  /// (decrease from a sub start, increase from a super start).
  double monotone_violation = 0.0;
  bool converged = false;
  bool stopped_above = false;
};

struct SolveResult {
  Field field;
  SolveReport report;
};

/// Psi_{c,R}: the free-boundary wave phi_c normalized by its values at
/// (-R, H) and (R, 0), then clamped to [0, 1]. Exactly 0 on x = -R and 1 on
/// x = R. Throws DomainError if the normalization gap is <= 1e-12.
BoundaryValues dirichlet_data(double c, const GridSpec& grid);

/// Bound from the normalization: sup |Psi - phi_c| <= 1/(phi_c(R,0) - phi_c(-R,H)) - 1.
double dirichlet_deviation_bound(double c, const GridSpec& grid);

/// Max-norm of the discrete equations: |v_xx + v_yy + c v_x| at interior
/// nodes, and at bottom nodes the ghost-consistent flux residual
/// (hy/2) * stencil = v_y(x,0) - f(v(x,0)) + O(h^2).
double discrete_residual(const Field& v, double c, const ReactionTerm& f);

/// v at the node (0, 0).
double center_value(const Field& v);

/// Reusable solver bound to one grid. The y eigenbasis, the tridiagonal
/// factors and the dense trace operator are cached per (c, L).
class TruncatedSolver {
 public:
  explicit TruncatedSolver(const GridSpec& grid);
  ~TruncatedSolver();
  TruncatedSolver(TruncatedSolver&&) noexcept;
  TruncatedSolver& operator=(TruncatedSolver&&) noexcept;

  const GridSpec& grid() const;

  /// Throws DomainError on c < 0 or c hx > 1, ConvergenceError when
  /// max_outer is exhausted.
  SolveResult solve(double c, const ReactionTerm& f, const BoundaryValues& data, StartMode start,
                    const SolverOptions& options = {}, const Field* initial = nullptr);

  /// Runs both the sub and the super start; returns the sub-start field and
  /// a report whose sub_super_gap is filled in.
  SolveResult solve_both(double c, const ReactionTerm& f, const BoundaryValues& data,
                         const SolverOptions& options = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult solve_truncated(double c, const GridSpec& grid, const ReactionTerm& f, const BoundaryValues& data,
                            StartMode start, const SolverOptions& options = {});

}  // namespace bwave
