#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bwave/closed_forms.hpp"
#include "bwave/errors.hpp"
#include "bwave/wave_finder.hpp"

using namespace bwave;

namespace {

const ClosedFormParams unit_params(1.0, 1.0);

// explicit_wave at the origin: Phi(delta sqrt(c) / sqrt(2))
double manufactured_alpha() { return std::erf(1.0 / std::sqrt(2.0)); }

SpeedSearchOptions manufactured_search() {
  SpeedSearchOptions o;
  o.boundary = [](double, const GridSpec& g) {
    return sample_boundary(g, [](double x, double y) { return explicit_wave({x, y}, unit_params); });
  };
  o.compute_diagnostics = false;
  o.speed_tol = 1e-9;
  return o;
}

}  // namespace

TEST(CenterValue, ZeroReactionIsTheLinearExtension) {
  const GridSpec g(8.0, 64, 16);
  const double c = 0.7;
  const double direct = center_value(solve_truncated(c, g, make_zero_stub(), dirichlet_data(c, g), StartMode::sub).field);
  EXPECT_DOUBLE_EQ(center_value_of_speed(c, g, make_zero_stub()), direct);
  EXPECT_THROW(center_value_of_speed(0.0, g, make_zero_stub()), DomainError);
}

TEST(CenterValue, LargeAndSmallSpeeds) {
  const GridSpec g = GridSpec::square_cells(8.0, 1024);
  const ReactionTerm f = make_bump(0.25, std::numbers::pi / 8.0);
  const SolverOptions opt = default_search_solver();
  EXPECT_GT(center_value_of_speed(50.0, g, f, opt), 0.25);
  EXPECT_LT(center_value_of_speed(1e-3, g, f, opt), 0.25);
}

TEST(FindSpeed, ManufacturedSpeed) {
  const ReactionTerm g = make_regularized(unit_params);
  double previous = 0.0;
  for (int nx : {128, 256}) {
    const GridSpec grid = GridSpec::square_cells(4.0, nx, 2.0);
    const WaveResult w = find_speed(grid, g, manufactured_alpha(), manufactured_search());
    const double err = std::abs(w.c_R - 1.0);
    EXPECT_LT(err, 0.05);
    EXPECT_LE(std::abs(w.center - manufactured_alpha()), 1e-9);
    if (previous > 0.0) EXPECT_GT(std::log2(previous / err), 1.5);
    previous = err;
  }
}

TEST(FindSpeed, BracketCertificateAndBounds) {
  const GridSpec grid = GridSpec::square_cells(4.0, 128, 2.0);
  SpeedSearchOptions o = manufactured_search();
  o.full_scan = true;
  const WaveResult w = find_speed(grid, make_regularized(unit_params), manufactured_alpha(), o);
  ASSERT_FALSE(w.brackets.empty());
  for (const auto& b : w.brackets) {
    EXPECT_LT(b.h_lo, 0.0);
    EXPECT_GT(b.h_hi, 0.0);
    EXPECT_LT(b.c_lo, b.c_hi);
  }
  EXPECT_GT(w.c_R, w.brackets.front().c_lo - 1e-15);
  EXPECT_LE(w.c_R, w.brackets.front().c_hi);
  EXPECT_GT(w.c_R, 0.0);
  EXPECT_LE(w.bracket.h_lo, 0.0);
  EXPECT_GE(w.bracket.h_hi, 0.0);
}

TEST(FindSpeed, NoSignChangeIsAnError) {
  const GridSpec grid = GridSpec::square_cells(4.0, 128, 2.0);
  SpeedSearchOptions o = manufactured_search();
  o.c_min = 1.0 / 256.0;
  o.c_max = 1.0 / 16.0;
  EXPECT_THROW(find_speed(grid, make_regularized(unit_params), manufactured_alpha(), o), BracketError);
}

TEST(FindSpeed, Deterministic) {
  const GridSpec grid = GridSpec::square_cells(4.0, 128, 2.0);
  const WaveResult a = find_speed(grid, make_regularized(unit_params), manufactured_alpha(), manufactured_search());
  const WaveResult b = find_speed(grid, make_regularized(unit_params), manufactured_alpha(), manufactured_search());
  EXPECT_EQ(a.c_R, b.c_R);
  EXPECT_EQ(max_abs_difference(a.field, b.field), 0.0);
}

TEST(FindSpeed, WarmStartDoesNotMoveTheRoot) {
  const GridSpec grid = GridSpec::square_cells(4.0, 128, 2.0);
  SpeedSearchOptions cold = manufactured_search();
  cold.warm_start = false;
  const WaveResult a = find_speed(grid, make_regularized(unit_params), manufactured_alpha(), cold);
  const WaveResult b = find_speed(grid, make_regularized(unit_params), manufactured_alpha(), manufactured_search());
  EXPECT_NEAR(a.c_R, b.c_R, 1e-8);
}

TEST(FindSpeed, BumpWaveOnCoarseGrid) {
  const GridSpec grid = GridSpec::square_cells(8.0, 256);
  SpeedSearchOptions o;
  o.width_tol = 1e-6;
  const WaveResult w = find_speed(grid, make_bump(0.25, std::numbers::pi / 8.0), 0.25, o);
  EXPECT_GT(w.c_R, 0.0);
  EXPECT_LE(w.c_R, w.brackets.front().c_hi);
  EXPECT_TRUE(w.report.converged);
  EXPECT_LE(w.bracket.c_hi - w.bracket.c_lo, 1e-6 * 1.0001);
}

TEST(Continuation, ManufacturedSchedule) {
  GridPolicy policy;
  policy.h = 1.0 / 16.0;
  policy.H = 2.0;
  const ContinuationResult r =
      continuation({4.0, 6.0, 8.0}, make_regularized(unit_params), manufactured_alpha(), policy, manufactured_search(), 2);
  ASSERT_EQ(r.entries.size(), 3u);
  for (const auto& e : r.entries) {
    ASSERT_TRUE(e.wave.has_value()) << e.error;
    EXPECT_NEAR(e.wave->c_R, 1.0, 0.05);
  }
  EXPECT_EQ(r.differences.size(), 2u);
  ASSERT_TRUE(r.limit.has_value());
  EXPECT_NEAR(*r.limit, 1.0, 0.05);

  std::ostringstream out;
  write_speed_table(out, r, {"note"});
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# note\nR,c_R,center_value,outer_iterations,residual,identity_gap\n", 0), 0u);
}

TEST(Continuation, FailuresAreRecorded) {
  GridPolicy policy;
  policy.h = 1.0 / 16.0;
  policy.H = 2.0;
  SpeedSearchOptions o = manufactured_search();
  o.c_max = 1.0 / 16.0;
  const ContinuationResult r = continuation({4.0, 5.0}, make_regularized(unit_params), manufactured_alpha(), policy, o);
  ASSERT_EQ(r.entries.size(), 2u);
  for (const auto& e : r.entries) {
    EXPECT_FALSE(e.wave.has_value());
    EXPECT_FALSE(e.error.empty());
  }
  EXPECT_THROW(continuation({4.0, 4.0}, make_regularized(unit_params), 0.5, policy, o), DomainError);
}

TEST(Continuation, ParallelMatchesSerial) {
  GridPolicy policy;
  policy.h = 1.0 / 16.0;
  policy.H = 2.0;
  const auto f = make_regularized(unit_params);
  const ContinuationResult a = continuation({4.0, 6.0}, f, manufactured_alpha(), policy, manufactured_search(), 1);
  const ContinuationResult b = continuation({4.0, 6.0}, f, manufactured_alpha(), policy, manufactured_search(), 2);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(a.entries[k].wave->c_R, b.entries[k].wave->c_R);
}
