#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bwave/closed_forms.hpp"
#include "bwave/errors.hpp"
#include "bwave/grid_solver.hpp"

using namespace bwave;

namespace {

// v = (1 - e^{-c(x+R)}) / (1 - e^{-2cR}) solves v_xx + c v_x = 0 with v_y = 0
double drift_profile(double x, double c, double R) { return -std::expm1(-c * (x + R)) / -std::expm1(-2.0 * c * R); }

SolveResult manufactured(int nx, StartMode start = StartMode::sub) {
  const ClosedFormParams p(1.0, 1.0);
  const GridSpec grid = GridSpec::square_cells(4.0, nx, 2.0);
  const auto data = sample_boundary(grid, [&](double x, double y) { return explicit_wave({x, y}, p); });
  return solve_truncated(1.0, grid, make_regularized(p), data, start);
}

double manufactured_error(const Field& v) {
  const ClosedFormParams p(1.0, 1.0);
  return max_abs_difference(v, Field::sample(v.grid(), [&](double x, double y) { return explicit_wave({x, y}, p); }));
}

}  // namespace

TEST(GridSpec, Validation) {
  EXPECT_THROW(GridSpec(4.0, 15, 8), DomainError);
  EXPECT_THROW(GridSpec(4.0, 64, 4), DomainError);
  EXPECT_THROW(GridSpec(-1.0, 64, 8), DomainError);
  EXPECT_THROW(GridSpec(4.0, 64, 8, 0.0), DomainError);
  const GridSpec g(16.0, 64, 8);
  EXPECT_DOUBLE_EQ(g.H(), 2.0);
  EXPECT_DOUBLE_EQ(g.x(g.center_index()), 0.0);
  const GridSpec s = GridSpec::with_spacing(8.0, 1.0 / 16.0, 2.0);
  EXPECT_EQ(s.nx(), 256);
  EXPECT_EQ(s.ny(), 32);
  EXPECT_DOUBLE_EQ(GridSpec::square_cells(4.0, 128, 2.0).hy(), 1.0 / 16.0);
}

TEST(Field, CsvRoundTrip) {
  const GridSpec g(2.0, 16, 8, 1.0);
  const Field v = Field::sample(g, [](double x, double y) { return std::sin(x) * std::exp(-y) / 3.0; });
  std::stringstream buf;
  const std::string notes[] = {"c: 0.5", "hello"};
  write_field_csv(buf, v, notes);
  const FieldFile back = read_field_csv(buf);
  EXPECT_EQ(back.field.grid(), g);
  EXPECT_EQ(max_abs_difference(back.field, v), 0.0);
  ASSERT_EQ(back.comments.size(), 2u);
  EXPECT_EQ(back.comments[0], "c: 0.5");
}

TEST(DirichletData, NormalizedAndClamped) {
  const GridSpec g(8.0, 64, 16);
  for (double c : {0.1, 1.0, 5.0}) {
    const BoundaryValues b = dirichlet_data(c, g);
    for (double v : b.left) EXPECT_EQ(v, 0.0);
    for (double v : b.right) EXPECT_EQ(v, 1.0);
    for (std::size_t k = 0; k + 1 < b.top.size(); ++k) {
      EXPECT_GE(b.top[k], 0.0);
      EXPECT_LE(b.top[k], 1.0);
      EXPECT_LE(b.top[k], b.top[k + 1]);
    }
    const double low = std::erf(std::sqrt(c) * harmonic_root({-8.0, g.H()}));
    const double high = std::erf(std::sqrt(c * 8.0));
    EXPECT_NEAR(dirichlet_deviation_bound(c, g), 1.0 / (high - low) - 1.0, 1e-14);
  }
  EXPECT_THROW(dirichlet_data(0.0, g), DomainError);
  EXPECT_THROW(dirichlet_data(1e-40, g), DomainError);
}

TEST(TruncatedSolver, PecletAndSpeedGuards) {
  const GridSpec g(4.0, 32, 8, 1.0);
  const auto data = dirichlet_data(1.0, g);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  EXPECT_THROW(solve_truncated(-0.5, g, f, data, StartMode::sub), DomainError);
  EXPECT_THROW(solve_truncated(4.5, g, f, data, StartMode::sub), DomainError);
}

TEST(TruncatedSolver, ZeroReactionIsLinearDriftProblem) {
  // plumbing: f == 0 gives the harmonic-with-drift extension of the data
  const double c = 0.8, R = 4.0;
  double previous = 0.0;
  for (int nx : {64, 128, 256}) {
    const GridSpec g = GridSpec::square_cells(R, nx, 1.5);
    const auto data = sample_boundary(g, [&](double x, double) { return drift_profile(x, c, R); });
    const SolveResult r = solve_truncated(c, g, make_zero_stub(), data, StartMode::sub);
    EXPECT_TRUE(r.report.converged);
    const double err =
        max_abs_difference(r.field, Field::sample(g, [&](double x, double) { return drift_profile(x, c, R); }));
    if (previous > 0.0) EXPECT_GT(std::log2(previous / err), 1.8);
    previous = err;
  }
}

TEST(TruncatedSolver, ConstantDataIsFixed) {
  const GridSpec g(4.0, 32, 8, 1.0);
  BoundaryValues data = sample_boundary(g, [](double, double) { return 0.0; });
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  const SolveResult r = solve_truncated(0.5, g, f, data, StartMode::super);
  for (double v : r.field.values()) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(TruncatedSolver, ManufacturedWaveSecondOrder) {
  std::vector<double> err;
  for (int nx : {64, 128, 256}) {
    const SolveResult r = manufactured(nx);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.final_residual, 1e-7);
    err.push_back(manufactured_error(r.field));
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
  EXPECT_GT(std::log2(err[1] / err[2]), 1.8);
}

TEST(TruncatedSolver, ExactSampleResidualIsSecondOrder) {
  const ClosedFormParams p(1.0, 1.0);
  const ReactionTerm g = make_regularized(p);
  std::vector<double> res;
  for (int nx : {128, 256, 512}) {
    const GridSpec grid = GridSpec::square_cells(4.0, nx, 2.0);
    res.push_back(discrete_residual(Field::sample(grid, [&](double x, double y) { return explicit_wave({x, y}, p); }), 1.0, g));
  }
  EXPECT_GT(std::log2(res[0] / res[1]), 1.8);
  EXPECT_GT(std::log2(res[1] / res[2]), 1.8);
}

TEST(TruncatedSolver, ManufacturedSubSuperAgree) {
  const GridSpec grid = GridSpec::square_cells(4.0, 128, 2.0);
  const ClosedFormParams p(1.0, 1.0);
  const auto data = sample_boundary(grid, [&](double x, double y) { return explicit_wave({x, y}, p); });
  TruncatedSolver solver(grid);
  SolverOptions opt;
  const SolveResult r = solver.solve_both(1.0, make_regularized(p), data, opt);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.sub_super_gap, 10.0 * opt.tol_outer);
}

TEST(TruncatedSolver, MonotoneIterationInvariants) {
  const GridSpec grid(8.0, 128, 16);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  TruncatedSolver solver(grid);
  for (double c : {0.3, 1.0, 2.0}) {
    const auto data = dirichlet_data(c, grid);
    SolverOptions opt;
    opt.newton = false;
    opt.max_outer = 50000;
    const SolveResult low = solver.solve(c, f, data, StartMode::sub, opt);
    const SolveResult high = solver.solve(c, f, data, StartMode::super, opt);
    EXPECT_LE(low.report.monotone_violation, 1e-9);
    EXPECT_LE(high.report.monotone_violation, 1e-9);
    for (std::size_t k = 0; k < low.field.values().size(); ++k) {
      const double a = low.field.values()[k], b = high.field.values()[k];
      EXPECT_GE(a, 0.0);
      EXPECT_LE(b, 1.0);
      EXPECT_LE(a, b + 1e-8);
    }
  }
}

TEST(TruncatedSolver, NewtonPolishKeepsTheSubStartLimit) {
  const GridSpec grid(8.0, 128, 16);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  const auto data = dirichlet_data(1.0, grid);
  SolverOptions plain;
  plain.newton = false;
  plain.max_outer = 50000;
  SolverOptions fast = plain;
  fast.newton = true;
  const SolveResult a = solve_truncated(1.0, grid, f, data, StartMode::sub, plain);
  const SolveResult b = solve_truncated(1.0, grid, f, data, StartMode::sub, fast);
  EXPECT_LE(max_abs_difference(a.field, b.field), 1e-7);
  EXPECT_LE(b.report.outer_iterations, a.report.outer_iterations);
}

TEST(TruncatedSolver, WarmStartMatchesColdStart) {
  const GridSpec grid(8.0, 128, 16);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  TruncatedSolver solver(grid);
  SolverOptions opt;
  opt.max_outer = 50000;
  const SolveResult slow = solver.solve(0.5, f, dirichlet_data(0.5, grid), StartMode::sub, opt);
  const auto data = dirichlet_data(0.6, grid);
  const SolveResult cold = solver.solve(0.6, f, data, StartMode::sub, opt);
  const SolveResult warm = solver.solve(0.6, f, data, StartMode::warm, opt, &slow.field);
  EXPECT_LE(max_abs_difference(cold.field, warm.field), 1e-8);
  // a supersolution is refused and the solve falls back to zero
  const SolveResult from_top = solver.solve(0.6, f, data, StartMode::warm, opt, &cold.field);
  EXPECT_LE(max_abs_difference(cold.field, from_top.field), 1e-8);
}

TEST(TruncatedSolver, StopAboveCertifiesTheCenter) {
  const GridSpec grid(8.0, 128, 16);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  const auto data = dirichlet_data(2.0, grid);
  SolverOptions opt;
  opt.max_outer = 50000;
  const SolveResult full = solve_truncated(2.0, grid, f, data, StartMode::sub, opt);
  ASSERT_GT(center_value(full.field), 0.3);
  opt.stop_above = 0.3;
  const SolveResult early = solve_truncated(2.0, grid, f, data, StartMode::sub, opt);
  EXPECT_TRUE(early.report.stopped_above);
  EXPECT_FALSE(early.report.converged);
  EXPECT_GT(center_value(early.field), 0.3);
  EXPECT_LE(center_value(early.field), center_value(full.field) + 1e-12);
  EXPECT_LT(early.report.outer_iterations, full.report.outer_iterations);
}

TEST(TruncatedSolver, ExhaustedIterationsThrow) {
  const GridSpec grid(8.0, 128, 16);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  SolverOptions opt;
  opt.max_outer = 3;
  EXPECT_THROW(solve_truncated(1.0, grid, f, dirichlet_data(1.0, grid), StartMode::sub, opt), ConvergenceError);
}

TEST(TruncatedSolver, DeterministicAcrossRuns) {
  const SolveResult a = manufactured(64), b = manufactured(64);
  EXPECT_EQ(max_abs_difference(a.field, b.field), 0.0);
  EXPECT_EQ(a.report.outer_iterations, b.report.outer_iterations);
}
