#include "bwave/grid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "bwave/closed_forms.hpp"
#include "bwave/errors.hpp"

namespace bwave {

BoundaryValues dirichlet_data(double c, const GridSpec& grid) {
  if (!(c > 0.0)) throw DomainError("dirichlet_data needs c > 0");
  const double low = free_boundary_wave({-grid.R(), grid.H()}, c);
  const double high = free_boundary_wave({grid.R(), 0.0}, c);
  const double span = high - low;
  if (!(span > 1e-12)) throw DomainError("degenerate Dirichlet normalization: phi_c(R,0) - phi_c(-R,H) <= 1e-12");
  BoundaryValues b = sample_boundary(grid, [&](double x, double y) {
    return std::clamp((free_boundary_wave({x, y}, c) - low) / span, 0.0, 1.0);
  });
  std::fill(b.left.begin(), b.left.end(), 0.0);
  std::fill(b.right.begin(), b.right.end(), 1.0);
  b.top.front() = 0.0;
  b.top.back() = 1.0;
  return b;
}

double dirichlet_deviation_bound(double c, const GridSpec& grid) {
  const double low = free_boundary_wave({-grid.R(), grid.H()}, c);
  const double high = free_boundary_wave({grid.R(), 0.0}, c);
  return 1.0 / (high - low) - 1.0;
}

double discrete_residual(const Field& v, double c, const ReactionTerm& f) {
  const GridSpec& g = v.grid();
  const double ax = 1.0 / (g.hx() * g.hx());
  const double ay = 1.0 / (g.hy() * g.hy());
  const double bx = c / (2.0 * g.hx());
  double worst = 0.0;
  for (int i = 1; i < g.nx(); ++i) {
    const double lateral = ax * (v(i + 1, 0) - 2.0 * v(i, 0) + v(i - 1, 0)) + bx * (v(i + 1, 0) - v(i - 1, 0));
    const double stencil = lateral + 2.0 * ay * (v(i, 1) - v(i, 0)) - 2.0 * f(v(i, 0)) / g.hy();
    worst = std::max(worst, std::abs(0.5 * g.hy() * stencil));
    for (int j = 1; j < g.ny(); ++j) {
      const double r = ax * (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) +
                       ay * (v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1)) + bx * (v(i + 1, j) - v(i - 1, j));
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

double center_value(const Field& v) { return v(v.grid().center_index(), 0); }

// ---------------------------------------------------------------------------

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// The linear operator with a constant Robin shift sigma on the bottom row,
//   (A_x (x) I + I (x) A_y(sigma)) v = r,
// is separable. A_y is symmetric after weighting the bottom row by 1/2, so it
// has a well conditioned eigenbasis; each y-mode leaves a tridiagonal
// convection-diffusion system in x (diagonally dominant under c hx <= 1).
// Unknowns are stored as an (nx-1) x ny matrix, column j being the x-line
// at height y_j.
struct TruncatedSolver::Impl {
  explicit Impl(const GridSpec& g) : grid(g), ni(g.nx() - 1), nj(g.ny()) {}

  double ax() const { return 1.0 / (grid.hx() * grid.hx()); }
  double ay() const { return 1.0 / (grid.hy() * grid.hy()); }
  double flux() const { return 2.0 / grid.hy(); }

  void setup(double c, double sigma) {
    if (c == setup_c && sigma == setup_sigma) return;
    const double a = ay();
    Matrix B = Matrix::Zero(nj, nj);
    for (int j = 0; j < nj; ++j) {
      B(j, j) = 2.0 * a;
      if (j + 1 < nj) B(j, j + 1) = B(j + 1, j) = -a;
    }
    B(0, 0) += flux() * sigma;
    B(0, 1) = B(1, 0) = -std::sqrt(2.0) * a;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(B);
    if (eig.info() != Eigen::Success) throw ConvergenceError("eigendecomposition of the y operator failed");
    lambda = eig.eigenvalues();
    // A_y = P diag(lambda) P^{-1} with P = W^{-1/2} U, P^{-1} = U^T W^{1/2}.
    P = eig.eigenvectors();
    P.row(0) *= std::sqrt(2.0);
    Pinv = eig.eigenvectors().transpose();
    Pinv.col(0) /= std::sqrt(2.0);
    weight = eig.eigenvectors().row(0).transpose().array().square();

    const double lo = -(ax() - c / (2.0 * grid.hx()));
    const double up = -(ax() + c / (2.0 * grid.hx()));
    cprime.resize(ni, nj);
    inv_den.resize(ni, nj);
    for (int m = 0; m < nj; ++m) {
      const double d = 2.0 * ax() + lambda[m];
      double prev = 0.0;
      for (int i = 0; i < ni; ++i) {
        const double den = d - lo * prev;
        inv_den(i, m) = 1.0 / den;
        prev = up / den;
        cprime(i, m) = prev;
      }
    }
    lower = lo;
    setup_c = c;
    setup_sigma = sigma;
  }

  // In place: rhs -> (A_x + lambda_m)^{-1} rhs.
  void tridiagonal(int m, double* x) const {
    x[0] *= inv_den(0, m);
    for (int i = 1; i < ni; ++i) x[i] = (x[i] - lower * x[i - 1]) * inv_den(i, m);
    for (int i = ni - 2; i >= 0; --i) x[i] -= cprime(i, m) * x[i + 1];
  }

  Matrix full_solve(const Matrix& r) const {
    Matrix modal = r * Pinv.transpose();
    for (int m = 0; m < nj; ++m) tridiagonal(m, modal.col(m).data());
    return modal * P.transpose();
  }

  // Bottom trace of the solution whose right-hand side is g on the bottom
  // row and zero elsewhere. All modes share the right-hand side, so the
  // elimination runs across modes (rows of the row-major factors).
  Vector trace_solve(const Vector& g) const {
    RowMatrix& y = scratch;
    y.resize(ni, nj);
    y.row(0) = g[0] * inv_den.row(0);
    for (int i = 1; i < ni; ++i) y.row(i) = (g[i] - lower * y.row(i - 1).array()) * inv_den.row(i).array();
    for (int i = ni - 2; i >= 0; --i) y.row(i) -= cprime.row(i).cwiseProduct(y.row(i + 1));
    return y * weight;
  }

  // Dense bottom-to-bottom operator, i.e. trace_solve applied to every unit
  // vector. Columns of (A_x + lambda_m)^{-1} decay geometrically away from
  // the diagonal, quickly for the high modes, so each is computed only where
  // it exceeds ~1e-18 of its peak.
  const Matrix& dense_trace() {
    if (dense_c == setup_c && dense_sigma == setup_sigma) return dense;
    dense.setZero(ni, ni);
    Vector x(ni);
    for (int m = 0; m < nj; ++m) {
      const double d = 2.0 * ax() + lambda[m];
      const double up = -(ax() + setup_c / (2.0 * grid.hx()));
      const double disc = std::sqrt(d * d - 4.0 * lower * up);
      const double below = (d - disc) / (2.0 * std::abs(up));  // decay per row going down
      const double above = (2.0 * std::abs(up)) / (d + disc);   // decay per row going up
      auto reach = [this](double q) {
        return q <= 0.0 ? 1 : std::min(ni, static_cast<int>(std::ceil(-41.5 / std::log(q))) + 2);
      };
      const int down = reach(below);
      const int upw = reach(above);
      for (int j = 0; j < ni; ++j) {
        const int end = std::min(ni - 1, j + down);
        const int begin = std::max(0, j - upw);
        x[j] = inv_den(j, m);
        for (int i = j + 1; i <= end; ++i) x[i] = -lower * x[i - 1] * inv_den(i, m);
        for (int i = end - 1; i >= j; --i) x[i] -= cprime(i, m) * x[i + 1];
        for (int i = j - 1; i >= begin; --i) x[i] = -cprime(i, m) * x[i + 1];
        dense.col(j).segment(begin, end - begin + 1) += weight[m] * x.segment(begin, end - begin + 1);
      }
    }
    dense_c = setup_c;
    dense_sigma = setup_sigma;
    return dense;
  }

  Matrix dirichlet_rhs(double c, const BoundaryValues& data) const {
    const double bx = c / (2.0 * grid.hx());
    Matrix b = Matrix::Zero(ni, nj);
    for (int j = 0; j < nj; ++j) {
      b(0, j) += (ax() - bx) * data.left[j];
      b(ni - 1, j) += (ax() + bx) * data.right[j];
    }
    for (int i = 0; i < ni; ++i) b(i, nj - 1) += ay() * data.top[i + 1];
    return b;
  }

  Field to_field(const Matrix& v, const BoundaryValues& data) const {
    Field out(grid);
    for (int j = 0; j <= grid.ny(); ++j) {
      out(0, j) = data.left[j];
      out(grid.nx(), j) = data.right[j];
    }
    for (int i = 0; i <= grid.nx(); ++i) out(i, grid.ny()) = data.top[i];
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < nj; ++j) out(i + 1, j) = std::clamp(v(i, j), 0.0, 1.0);
    return out;
  }

  SolveResult solve(double c, const ReactionTerm& f, const BoundaryValues& data, StartMode start,
                    const SolverOptions& opt, const Field* initial);

  GridSpec grid;
  int ni;
  int nj;
  double setup_c = std::numeric_limits<double>::quiet_NaN();
  double setup_sigma = std::numeric_limits<double>::quiet_NaN();
  Vector lambda, weight;
  Matrix P, Pinv;
  RowMatrix cprime, inv_den;
  mutable RowMatrix scratch;
  double lower = 0.0;
  Matrix dense;
  double dense_c = std::numeric_limits<double>::quiet_NaN();
  double dense_sigma = std::numeric_limits<double>::quiet_NaN();
};

namespace {

void clamp_unit(Vector& x) {
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], 0.0, 1.0);
}

void check_boundary(const GridSpec& g, const BoundaryValues& data) {
  if (data.left.size() != static_cast<std::size_t>(g.ny() + 1) ||
      data.right.size() != static_cast<std::size_t>(g.ny() + 1) ||
      data.top.size() != static_cast<std::size_t>(g.nx() + 1))
    throw DomainError("boundary data does not match the grid");
}

}  // namespace

// Lipschitz-penalized monotone iteration on the bottom trace s:
//   s <- clamp(t_b + T (2/hy) (L s - f(s)))
// where T is the bottom-to-bottom solution operator with Robin shift L and
// t_b the trace of the Dirichlet lift. The map is order preserving, so the
// iterates from 0 increase and those from 1 decrease.
SolveResult TruncatedSolver::Impl::solve(double c, const ReactionTerm& f, const BoundaryValues& data,
                                         StartMode start, const SolverOptions& opt, const Field* initial) {
  if (!(c >= 0.0)) throw DomainError("solve_truncated needs c >= 0");
  if (c * grid.hx() > 1.0)
    throw DomainError("cell Peclet bound violated: c*hx = " + std::to_string(c * grid.hx()) + " > 1");
  check_boundary(grid, data);

  const double L = f.lipschitz();
  setup(c, L);
  const Matrix b = dirichlet_rhs(c, data);
  const Vector lift = full_solve(b).col(0);

  Vector s(ni);
  switch (start) {
    case StartMode::sub: s.setZero(); break;
    case StartMode::super: s.setOnes(); break;
    case StartMode::warm:
      if (initial == nullptr || !(initial->grid() == grid)) throw DomainError("warm start needs a field on the same grid");
      for (int i = 0; i < ni; ++i) s[i] = (*initial)(i + 1, 0);
      clamp_unit(s);
      break;
  }

  SolveReport report;
  Vector g(ni);
  auto sweep = [&](const Vector& u) {
    for (int i = 0; i < ni; ++i) g[i] = flux() * (L * u[i] - f(u[i]));
    Vector out = lift + trace_solve(g);
    clamp_unit(out);
    ++report.outer_iterations;
    return out;
  };
  auto finish = [&] {
    for (int i = 0; i < ni; ++i) g[i] = flux() * (L * s[i] - f(s[i]));
    Matrix r = b;
    r.col(0) += g;
    SolveResult out{to_field(full_solve(r), data), report};
    out.report.final_residual = discrete_residual(out.field, c, f);
    out.report.converged = out.report.final_residual <= opt.residual_tol;
    return out;
  };

  // Newton on s = G(s) once the sweeps are within newton_switch of
  // converging: each step solves
  //   (I - T (2/hy) diag(L - f'(u))) s' = lift + T (2/hy) (f'(u) u - f(u))
  // with the dense bottom-to-bottom operator T. Steps that fall behind the
  // last monotone iterate (below it from a sub start, above it from a super
  // start) or stop contracting are rejected and the sweeps resume.
  Eigen::PartialPivLU<Matrix> lu;
  auto polish = [&](Vector& u) {
    const Vector anchor = u;
    const Matrix& T = dense_trace();
    double last = std::numeric_limits<double>::infinity();
    Vector slope(ni);
    for (int it = 0; it < 12 && report.outer_iterations < opt.max_outer; ++it) {
      for (int i = 0; i < ni; ++i) {
        slope[i] = f.derivative(u[i]);
        g[i] = flux() * (slope[i] * u[i] - f(u[i]));
      }
      Matrix M = -T * (flux() * (L - slope.array())).matrix().asDiagonal();
      M.diagonal().array() += 1.0;
      lu.compute(M);
      Vector next = lu.solve(Vector(lift + T * g));
      clamp_unit(next);
      ++report.outer_iterations;
      ++report.newton_iterations;
      const double change = (next - u).lpNorm<Eigen::Infinity>();
      const double behind = start == StartMode::super ? (next - anchor).maxCoeff() : (anchor - next).maxCoeff();
      if (!next.allFinite() || behind > 1e-9 || (it > 0 && change > 0.5 * last)) {
        u = anchor;
        return false;
      }
      u.swap(next);
      if (change < opt.tol_outer) return true;
      last = change;
    }
    u = anchor;
    return false;
  };

  // A warm start is kept only if it is a subsolution, i.e. the first sweep
  // does not lower it; the iterates then increase to the smallest solution
  // above it. Otherwise the solve falls back to the zero start.
  if (start == StartMode::warm) {
    const Vector next = sweep(s);
    if ((s - next).maxCoeff() > 1e-9) s.setZero();
    start = StartMode::sub;
  }

  int retry_at = 0;
  while (report.outer_iterations < opt.max_outer) {
    Vector next = sweep(s);
    const Vector delta = next - s;
    if (start == StartMode::sub) report.monotone_violation = std::max(report.monotone_violation, -delta.minCoeff());
    if (start == StartMode::super) report.monotone_violation = std::max(report.monotone_violation, delta.maxCoeff());
    s.swap(next);
    ++report.monotone_iterations;
    const double change = delta.lpNorm<Eigen::Infinity>();
    if (change < opt.tol_outer) return finish();
    if (opt.stop_above && start == StartMode::sub && s[grid.center_index() - 1] > *opt.stop_above) {
      report.stopped_above = true;
      return finish();
    }
    if (opt.newton && change < opt.newton_switch && report.monotone_iterations >= opt.monotone_steps &&
        report.outer_iterations >= retry_at) {
      if (polish(s)) return finish();
      retry_at = report.outer_iterations + 8 * opt.monotone_steps;
    }
  }
  throw ConvergenceError("truncated solve did not converge in " + std::to_string(opt.max_outer) + " outer iterations");
}

TruncatedSolver::TruncatedSolver(const GridSpec& grid) : impl_(std::make_unique<Impl>(grid)) {}
TruncatedSolver::~TruncatedSolver() = default;
TruncatedSolver::TruncatedSolver(TruncatedSolver&&) noexcept = default;
TruncatedSolver& TruncatedSolver::operator=(TruncatedSolver&&) noexcept = default;

const GridSpec& TruncatedSolver::grid() const { return impl_->grid; }

SolveResult TruncatedSolver::solve(double c, const ReactionTerm& f, const BoundaryValues& data, StartMode start,
                                   const SolverOptions& options, const Field* initial) {
  SolveResult r = impl_->solve(c, f, data, start, options, initial);
  r.report.sub_super_gap = std::numeric_limits<double>::quiet_NaN();
  return r;
}

SolveResult TruncatedSolver::solve_both(double c, const ReactionTerm& f, const BoundaryValues& data,
                                        const SolverOptions& options) {
  SolveResult low = impl_->solve(c, f, data, StartMode::sub, options, nullptr);
  SolveResult high = impl_->solve(c, f, data, StartMode::super, options, nullptr);
  low.report.sub_super_gap = max_abs_difference(low.field, high.field);
  low.report.monotone_violation = std::max(low.report.monotone_violation, high.report.monotone_violation);
  low.report.outer_iterations += high.report.outer_iterations;
  low.report.monotone_iterations += high.report.monotone_iterations;
  low.report.newton_iterations += high.report.newton_iterations;
  low.report.converged = low.report.converged && high.report.converged;
  return low;
}

SolveResult solve_truncated(double c, const GridSpec& grid, const ReactionTerm& f, const BoundaryValues& data,
                            StartMode start, const SolverOptions& options) {
  TruncatedSolver solver(grid);
  return solver.solve(c, f, data, start, options);
}

}  // namespace bwave
