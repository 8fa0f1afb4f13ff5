#include "bwave/wave_finder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "bwave/errors.hpp"

namespace bwave {

namespace {

BoundaryValues boundary_for(const BoundaryProvider& provider, double c, const GridSpec& grid) {
  return provider ? provider(c, grid) : dirichlet_data(c, grid);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Evaluation {
  double c;
  double h;
  SolveResult solve;
  // h is only a lower bound: the sweeps stopped once v(0,0) passed alpha
  bool bound() const { return solve.report.stopped_above; }
};

}  // namespace

double center_value_of_speed(double c, const GridSpec& grid, const ReactionTerm& f, const SolverOptions& options,
                             const BoundaryProvider& boundary) {
  if (!(c > 0.0)) throw DomainError("center_value_of_speed needs c > 0");
  TruncatedSolver solver(grid);
  return center_value(solver.solve(c, f, boundary_for(boundary, c, grid), StartMode::sub, options).field);
}

WaveResult find_speed(const GridSpec& grid, const ReactionTerm& f, double alpha, const SpeedSearchOptions& opt) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("find_speed needs 0 < alpha < 1");
  if (!(opt.c_min > 0.0) || !(opt.c_max > opt.c_min)) throw DomainError("find_speed needs 0 < c_min < c_max");

  TruncatedSolver solver(grid);
  int evaluations = 0;

  // below: a field at a smaller speed, tried as a warm start. Solves stop
  // as soon as a sweep certifies v(0,0) > alpha; only the sign matters there.
  SolverOptions certify = opt.solver;
  certify.stop_above = alpha;
  auto evaluate = [&](double c, const Field* below) {
    const BoundaryValues data = boundary_for(opt.boundary, c, grid);
    SolveResult r = opt.warm_start && below ? solver.solve(c, f, data, StartMode::warm, certify, below)
                                            : solver.solve(c, f, data, StartMode::sub, certify);
    ++evaluations;
    if (!r.report.converged && !r.report.stopped_above)
      throw ConvergenceError("solve at c = " + fmt(c) + " stopped with residual " + fmt(r.report.final_residual));
    const double h = center_value(r.field) - alpha;
    return Evaluation{c, h, std::move(r)};
  };

  std::vector<std::string> warnings;
  const double c_cap = std::min(opt.c_max, 1.0 / grid.hx());
  if (c_cap < opt.c_max)
    warnings.push_back("scan capped at c = " + fmt(c_cap) + " by the Peclet bound c hx <= 1");

  std::vector<ScanSample> scan;
  std::vector<SpeedBracket> brackets;
  std::optional<Evaluation> lo, hi, previous;
  std::optional<Evaluation> exact;
  for (double c = opt.c_min; c <= c_cap * (1.0 + 1e-12); c *= 2.0) {
    Evaluation e = evaluate(c, previous ? &previous->solve.field : nullptr);
    scan.push_back({e.c, e.h});
    if (e.h == 0.0 && !e.bound() && !exact) exact = e;
    if (previous && previous->h < 0.0 && e.h > 0.0) {
      brackets.push_back({previous->c, e.c, previous->h, e.h});
      if (!lo) {
        lo = std::move(previous);
        hi = e;
      }
      if (!opt.full_scan) break;
    }
    previous = std::move(e);
  }

  if (!lo && !exact) {
    std::ostringstream msg;
    msg << "no sign change of v_c(0,0) - alpha on [" << fmt(opt.c_min) << ", " << fmt(c_cap) << "]:";
    for (const auto& s : scan) msg << " h(" << fmt(s.c) << ")=" << fmt(s.h);
    throw BracketError(msg.str());
  }
  if (brackets.size() > 1)
    warnings.push_back(std::to_string(brackets.size()) + " sign changes found; the smallest root is selected");

  // best: the converged evaluation closest to alpha
  std::optional<Evaluation> best;
  auto consider = [&](const Evaluation& e) {
    if (!e.bound() && (!best || std::abs(e.h) < std::abs(best->h))) best = e;
  };
  if (exact) {
    best = exact;
  } else {
    consider(*lo);
    consider(*hi);
  }
  SpeedBracket bracket = exact ? SpeedBracket{exact->c, exact->c, 0.0, 0.0} : brackets.front();

  if (!exact && std::abs(best->h) > opt.speed_tol) {
    Field below = lo->solve.field;
    // Illinois regula falsi: after two updates on the same side, halve the
    // stale end. Plain bisection while an end only carries a bound on h.
    double c_lo = lo->c, c_hi = hi->c, h_lo = lo->h, h_hi = hi->h;
    bool hi_bound = hi->bound();
    int side = 0;
    double width_before = c_hi - c_lo;
    int slow = 0;
    for (int it = 0; it < opt.max_refinements; ++it) {
      if (c_hi - c_lo <= opt.width_tol) break;
      double c = (c_lo * h_hi - c_hi * h_lo) / (h_hi - h_lo);
      if (hi_bound || slow >= 2 || !(c > c_lo && c < c_hi)) {
        c = 0.5 * (c_lo + c_hi);
        slow = 0;
      }
      std::optional<Evaluation> attempt;
      try {
        attempt = evaluate(c, &below);
      } catch (const ConvergenceError&) {
        // Next to a jump of c -> v_c(0,0) the sweeps stall; a tight bracket
        // already pins the speed.
        if (c_hi - c_lo > 1e-4 * c_hi) throw;
        warnings.push_back("solve stalled at c = " + fmt(c) + " inside the bracket [" + fmt(c_lo) + ", " +
                           fmt(c_hi) + "]; refinement stopped");
        break;
      }
      Evaluation& e = *attempt;
      consider(e);
      if (!e.bound() && (std::abs(e.h) <= opt.speed_tol || e.h == 0.0)) break;
      if (e.h < 0.0) {
        c_lo = c;
        h_lo = e.h;
        below = e.solve.field;
        if (side == -1) h_hi *= 0.5;
        side = -1;
      } else {
        c_hi = c;
        h_hi = e.h;
        hi_bound = e.bound();
        if (side == 1) h_lo *= 0.5;
        side = 1;
      }
      bracket = {c_lo, c_hi, e.h < 0.0 ? e.h : bracket.h_lo, e.h > 0.0 ? e.h : bracket.h_hi};
      const double width = c_hi - c_lo;
      slow = width > 0.5 * width_before ? slow + 1 : 0;
      width_before = width;
    }
    if (std::abs(best->h) > opt.speed_tol)
      warnings.push_back("bracket width limit reached with |v(0,0) - alpha| = " + fmt(std::abs(best->h)) +
                         "; v_c(0,0) jumps across alpha inside [" + fmt(c_lo) + ", " + fmt(c_hi) + "]");
  }

  WaveResult out{grid.R(), best->c, best->h + alpha, std::move(best->solve.field), best->solve.report, bracket,
                 std::move(brackets), std::move(scan), evaluations, std::move(warnings), {}};
  if (opt.compute_diagnostics) out.diagnostics = compute_diagnostics(out.field, out.c_R, f);
  return out;
}

ContinuationResult continuation(const std::vector<double>& schedule, const ReactionTerm& f, double alpha,
                                const GridPolicy& policy, const SpeedSearchOptions& options, int workers) {
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw DomainError("continuation: radii must be positive");
    if (k > 0 && !(schedule[k] > schedule[k - 1])) throw DomainError("continuation: schedule must be strictly increasing");
  }
  ContinuationResult result;
  result.entries.resize(schedule.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < schedule.size(); k = next++) {
      ContinuationEntry& e = result.entries[k];
      e.R = schedule[k];
      try {
        e.wave = find_speed(policy.make(schedule[k]), f, alpha, options);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(schedule.size(), 1)));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
  }

  std::vector<double> speeds;
  for (const auto& e : result.entries)
    if (e.wave) speeds.push_back(e.wave->c_R);
  for (std::size_t k = 1; k < speeds.size(); ++k) result.differences.push_back(speeds[k] - speeds[k - 1]);

  if (!speeds.empty()) {
    result.limit = speeds.back();
    if (!result.differences.empty()) result.limit_error = std::abs(result.differences.back());
  }
  if (result.differences.size() >= 2) {
    const double d1 = result.differences[result.differences.size() - 2];
    const double d2 = result.differences.back();
    if (d1 != 0.0) {
      const double r = d2 / d1;
      if (std::abs(r) < 1.0) {
        result.limit = speeds.back() + d2 * r / (1.0 - r);
        result.limit_error = std::abs(d2) * std::abs(r) / (1.0 - std::abs(r));
      }
    }
  }
  return result;
}

void write_speed_table(std::ostream& out, const ContinuationResult& result, const std::vector<std::string>& comments) {
  for (const auto& line : comments) out << "# " << line << '\n';
  out << "R,c_R,center_value,outer_iterations,residual,identity_gap\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : result.entries) {
    if (!e.wave) {
      out << fmt(e.R) << ",nan,nan,0,nan,nan\n";
      continue;
    }
    const WaveResult& w = *e.wave;
    out << fmt(e.R) << ',' << fmt(w.c_R) << ',' << fmt(w.center) << ',' << w.report.outer_iterations << ','
        << fmt(w.report.final_residual) << ',' << fmt(w.diagnostics.identity_gap.value_or(nan)) << '\n';
  }
}

}  // namespace bwave
