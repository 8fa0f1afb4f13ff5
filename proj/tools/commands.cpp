#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "bwave/closed_forms.hpp"
#include "bwave/diagnostics.hpp"
#include "bwave/errors.hpp"
#include "bwave/grid_solver.hpp"
#include "bwave/wave_finder.hpp"

namespace bwave::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json opt_json(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

json envelope(const ExperimentConfig& config) {
  json j;
  j["format_version"] = format_version;
  j["command"] = to_string(config.command);
  j["config"] = to_json(config);
  return j;
}

std::vector<std::string> csv_header(const ExperimentConfig& config) {
  return {"format_version: " + std::to_string(format_version), "command: " + to_string(config.command),
          "config: " + to_json(config).dump()};
}

std::string with_comments(const std::vector<std::string>& comments, const std::string& body) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  return out + body;
}

SolverOptions solver_options(const SolverBlock& b) {
  SolverOptions o;
  o.tol_outer = b.tol_outer;
  o.max_outer = b.max_outer;
  o.residual_tol = b.residual_tol;
  o.newton = b.newton;
  return o;
}

SpeedSearchOptions search_options(const ExperimentConfig& c) {
  SpeedSearchOptions o;
  o.c_min = c.speed.c_min;
  o.c_max = c.speed.c_max;
  o.speed_tol = c.speed.speed_tol;
  o.width_tol = c.speed.width_tol;
  o.full_scan = c.speed.full_scan;
  o.warm_start = c.speed.warm_start;
  o.solver = solver_options(c.solver);
  return o;
}

json report_json(const SolveReport& r) {
  return {{"outer_iterations", r.outer_iterations}, {"monotone_iterations", r.monotone_iterations},
          {"newton_iterations", r.newton_iterations}, {"final_residual", opt_json(r.final_residual)},
          {"sub_super_gap", opt_json(r.sub_super_gap)}, {"monotone_violation", r.monotone_violation},
          {"converged", r.converged}};
}

json bracket_json(const SpeedBracket& b) {
  return {{"c_lo", b.c_lo}, {"c_hi", b.c_hi}, {"h_lo", b.h_lo}, {"h_hi", b.h_hi}};
}

json wave_json(const WaveResult& w) {
  json j;
  j["R"] = w.R;
  j["c_R"] = w.c_R;
  j["center_value"] = w.center;
  j["evaluations"] = w.evaluations;
  j["report"] = report_json(w.report);
  j["bracket"] = bracket_json(w.bracket);
  j["brackets"] = json::array();
  for (const auto& b : w.brackets) j["brackets"].push_back(bracket_json(b));
  j["warnings"] = w.warnings;
  j["diagnostics"] = json::parse(to_json(w.diagnostics));
  return j;
}

std::string scan_csv(const std::vector<ScanSample>& scan) {
  std::string out = "c,h\n";
  for (const auto& s : scan) out += num(s.c) + "," + num(s.h) + "\n";
  return out;
}

std::string field_csv(const Field& v, const std::vector<std::string>& comments) {
  std::ostringstream out;
  write_field_csv(out, v, comments);
  return out.str();
}

// log-log slope between consecutive levels
std::vector<double> orders(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<double> p;
  for (std::size_t k = 1; k < h.size(); ++k) p.push_back(std::log(err[k - 1] / err[k]) / std::log(h[k - 1] / h[k]));
  return p;
}

struct Checks {
  json list = json::array();
  bool all = true;
  void add(const std::string& name, double value, double tolerance, bool pass) {
    list.push_back({{"name", name}, {"value", opt_json(value)}, {"tolerance", tolerance}, {"pass", pass}});
    all = all && pass;
  }
  void at_most(const std::string& name, double value, double tolerance) {
    add(name, value, tolerance, value <= tolerance);
  }
  void at_least(const std::string& name, double value, double tolerance) {
    add(name, value, tolerance, value >= tolerance);
  }
};

int cmd_validate(const ExperimentConfig& config, const fs::path& dir, const std::string& stem, std::ostream& log) {
  const auto& vb = config.validate;
  Checks checks;
  json j = envelope(config);

  // closed forms
  {
    double worst = 0.0;
    const int n = vb.samples;
    for (int k = 0; k < n; ++k) {
      const double x = -10.0 + 20.0 * (k + 0.5) / n;
      worst = std::max(worst, std::abs(harmonic_root({x, 0.0}) - std::sqrt(std::max(x, 0.0))));
    }
    checks.add("harmonic_root_trace", worst, 0.0, worst == 0.0);

    double round_trip = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double v = k / 200.0;
      round_trip = std::max(round_trip, std::abs(wave_profile(wave_profile_inverse(v, 1.0), 1.0) - v));
    }
    checks.at_most("wave_profile_round_trip", round_trip, 1e-12);

    const double root = std::pow(1.0 / 12.0, 0.25);
    checks.at_most("beta_sup_at_derivative_root", std::abs(beta_sup() - beta(root)), 1e-12);

    const double s = 20.0;
    const double lead = std::sqrt(std::numbers::pi / (2.0 * s)) * std::exp(-s);
    const double corrected = lead * (1.0 - 1.0 / (8.0 * s) + 9.0 / (128.0 * s * s));
    checks.at_most("k0_leading_asymptotic", std::abs(bessel_k0(s) - lead) / bessel_k0(s), 0.05);
    checks.at_most("k0_corrected_asymptotic", std::abs(bessel_k0(s) - corrected) / bessel_k0(s), 0.005);

    const ClosedFormParams p(config.closed_form.delta, config.closed_form.c);
    const double origin = explicit_wave({0.0, 0.0}, p);
    const double expected = wave_profile(config.closed_form.delta / std::sqrt(2.0), config.closed_form.c);
    checks.at_most("explicit_wave_origin", std::abs(origin - expected), 1e-14);
  }

  // stationary residual and manufactured wave on the same levels
  std::vector<double> hs, stat, err;
  const ClosedFormParams p(config.closed_form.delta, config.closed_form.c);
  const ReactionTerm g = make_regularized(p);
  const double c = config.closed_form.c;
  json levels = json::array();
  for (int nx : vb.levels) {
    const GridSpec grid = GridSpec::square_cells(vb.R, nx, vb.H);
    const BoundaryValues data = sample_boundary(grid, [&](double x, double y) { return explicit_wave({x, y}, p); });
    log << "validate: nx = " << nx << "\n" << std::flush;
    const SolveResult r = solve_truncated(c, grid, g, data, StartMode::sub, solver_options(config.solver));
    const Field exact = Field::sample(grid, [&](double x, double y) { return explicit_wave({x, y}, p); });
    hs.push_back(grid.hx());
    stat.push_back(stationary_residual(grid, config.closed_form.delta));
    err.push_back(max_abs_difference(r.field, exact));
    levels.push_back({{"nx", nx}, {"ny", grid.ny()}, {"h", grid.hx()}, {"stationary_residual", stat.back()},
                      {"wave_error", err.back()}, {"report", report_json(r.report)}});
  }
  const auto stat_orders = orders(hs, stat);
  const auto wave_orders = orders(hs, err);
  for (std::size_t k = 0; k < stat_orders.size(); ++k) {
    checks.at_least("stationary_order_" + std::to_string(k + 1), stat_orders[k], 1.8);
    checks.at_least("manufactured_order_" + std::to_string(k + 1), wave_orders[k], 1.8);
  }
  j["levels"] = levels;
  j["stationary_orders"] = stat_orders;
  j["manufactured_orders"] = wave_orders;
  j["checks"] = checks.list;
  j["pass"] = checks.all;
  write_atomically(dir / (stem + ".json"), j.dump(2) + "\n");
  for (const auto& ch : checks.list)
    log << (ch["pass"].get<bool>() ? "PASS " : "FAIL ") << ch["name"].get<std::string>() << " = " << ch["value"] << "\n";
  return checks.all ? exit_ok : exit_validation_failure;
}

int cmd_solve(const ExperimentConfig& config, const fs::path& dir, const std::string& stem, std::ostream& log) {
  const GridSpec grid = make_grid(config.grid);
  const ReactionTerm f = make_reaction(config.reaction);
  const double c = config.solve.c;
  const BoundaryValues data = dirichlet_data(c, grid);
  TruncatedSolver solver(grid);
  const SolverOptions opt = solver_options(config.solver);
  SolveResult r = [&] {
    if (config.solve.start == "both") return solver.solve_both(c, f, data, opt);
    return solver.solve(c, f, data, config.solve.start == "super" ? StartMode::super : StartMode::sub, opt);
  }();
  json j = envelope(config);
  j["c"] = c;
  j["center_value"] = center_value(r.field);
  j["report"] = report_json(r.report);
  j["dirichlet_deviation_bound"] = opt_json(dirichlet_deviation_bound(c, grid));
  auto comments = csv_header(config);
  comments.push_back("c: " + num(c));
  write_atomically(dir / (stem + "_field.csv"), field_csv(r.field, comments));
  write_atomically(dir / (stem + ".json"), j.dump(2) + "\n");
  log << "solve: c = " << c << ", v(0,0) = " << center_value(r.field) << ", outer iterations "
      << r.report.outer_iterations << "\n";
  return exit_ok;
}

int cmd_wave(const ExperimentConfig& config, const fs::path& dir, const std::string& stem, std::ostream& log) {
  const GridSpec grid = make_grid(config.grid);
  const ReactionTerm f = make_reaction(config.reaction);
  const WaveResult w = find_speed(grid, f, f.alpha(), search_options(config));
  json j = envelope(config);
  j["wave"] = wave_json(w);
  auto comments = csv_header(config);
  comments.push_back("c: " + num(w.c_R));
  write_atomically(dir / (stem + "_field.csv"), field_csv(w.field, comments));
  write_atomically(dir / (stem + "_scan.csv"), with_comments(csv_header(config), scan_csv(w.scan)));
  write_atomically(dir / (stem + ".json"), j.dump(2) + "\n");
  log << "wave: c_R = " << num(w.c_R) << " after " << w.evaluations << " solves\n";
  for (const auto& warning : w.warnings) log << "warning: " << warning << "\n";
  return exit_ok;
}

int cmd_continue(const ExperimentConfig& config, const fs::path& dir, const std::string& stem, int workers,
                 std::ostream& log) {
  const ReactionTerm f = make_reaction(config.reaction);
  GridPolicy policy;
  policy.h = config.grid.h;
  if (config.grid.H_policy == "fixed") policy.H = config.grid.H;
  const ContinuationResult res = continuation(config.cont.schedule, f, f.alpha(), policy, search_options(config), workers);
  json j = envelope(config);
  j["entries"] = json::array();
  bool any = false;
  for (const auto& e : res.entries) {
    json row{{"R", e.R}};
    if (e.wave) {
      row["wave"] = wave_json(*e.wave);
      any = true;
    } else {
      row["error"] = e.error;
      log << "continue: R = " << e.R << " failed: " << e.error << "\n";
    }
    j["entries"].push_back(row);
  }
  j["differences"] = res.differences;
  j["limit"] = res.limit ? json(*res.limit) : json(nullptr);
  j["limit_error"] = res.limit_error ? json(*res.limit_error) : json(nullptr);
  std::ostringstream table;
  write_speed_table(table, res, csv_header(config));
  write_atomically(dir / (stem + "_speeds.csv"), table.str());
  write_atomically(dir / (stem + ".json"), j.dump(2) + "\n");
  if (res.limit) log << "continue: limit " << num(*res.limit) << " +- " << num(res.limit_error.value_or(0.0)) << "\n";
  return any ? exit_ok : exit_nonconvergence;
}

int cmd_tail(const ExperimentConfig& config, const fs::path& dir, const std::string& stem, std::ostream& log) {
  std::ifstream in(config.tail.field);
  if (!in) throw ConfigError("config key 'tail.field': cannot read '" + config.tail.field + "'");
  FieldFile file = [&] {
    try {
      return read_field_csv(in);
    } catch (const std::exception& e) {
      throw ConfigError("config key 'tail.field': " + std::string(e.what()));
    }
  }();
  double c = config.tail.c;
  if (c == 0.0) {
    for (const auto& line : file.comments)
      if (line.rfind("c: ", 0) == 0) c = std::stod(line.substr(3));
    if (!(c > 0.0)) throw ConfigError("config key 'tail.c' is required: the field file records no speed");
  }
  const ReactionTerm f = make_reaction(config.reaction);
  const Field& v = file.field;
  json j = envelope(config);
  j["c"] = c;
  j["field_comments"] = file.comments;
  const TailFit t = tail_fit(v, c);
  j["tail_fit"] = {{"mu0_fit", t.mu0_fit}, {"fitted_rate", t.fitted_rate}, {"exponent_residual", t.exponent_residual},
                   {"x_min", t.x_min}, {"x_max", t.x_max}, {"nodes", t.nodes}};
  const double mu0 = mu0_from_formula(v, c, f);
  j["mu0_formula"] = mu0;
  j["mu0_relative_difference"] = std::abs(t.mu0_fit - mu0) / mu0;
  j["helmholtz_probes"] = json::array();
  for (double x : default_probes) {
    if (!(x < v.grid().R())) continue;
    const double rec = helmholtz_reconstruct(v, c, f, x);
    const double direct = direct_tail_weight(v, c, x);
    j["helmholtz_probes"].push_back({{"x", x}, {"reconstructed", rec}, {"direct", direct},
                                     {"relative_difference", std::abs(rec - direct) / std::abs(direct)}});
  }
  std::string csv = "x,one_minus_v,w_direct,fit\n";
  const GridSpec& grid = v.grid();
  for (int i = grid.center_index(); i <= grid.nx(); ++i) {
    const double x = grid.x(i);
    const double w = 1.0 - v(i, 0);
    const double fit = x > 0.0 ? t.mu0_fit * std::exp(-c * x) / std::sqrt(x) : std::numeric_limits<double>::quiet_NaN();
    csv += num(x) + "," + num(w) + "," + num(std::exp(0.5 * c * x) * w) + "," + num(fit) + "\n";
  }
  write_atomically(dir / (stem + "_tail.csv"), with_comments(csv_header(config), csv));
  write_atomically(dir / (stem + ".json"), j.dump(2) + "\n");
  log << "tail: mu0_fit = " << num(t.mu0_fit) << ", mu0_formula = " << num(mu0) << "\n";
  return exit_ok;
}

int cmd_scan(const ExperimentConfig& config, const fs::path& dir, const std::string& stem, std::ostream& log) {
  const auto& sb = config.scan;
  const ReactionTerm f = make_reaction(config.reaction);
  std::vector<double> cs, us;
  for (int k = 0; k < sb.c_samples; ++k)
    cs.push_back(sb.c_lo * std::pow(sb.c_hi / sb.c_lo, static_cast<double>(k) / (sb.c_samples - 1)));
  for (int k = 0; k < sb.u_samples; ++k) us.push_back(static_cast<double>(k) / sb.u_samples);
  const ComparisonReport rep = comparison_scan(f, sb.eta, sb.A, cs, us);

  auto rows = [](const std::vector<ComparisonRow>& rs) {
    json a = json::array();
    for (const auto& r : rs)
      a.push_back({{"c", r.c}, {"delta", r.delta}, {"worst_margin", opt_json(r.worst_margin)}, {"holds", r.holds}});
    return a;
  };
  json j = envelope(config);
  j["eta"] = rep.eta;
  j["A"] = rep.A;
  j["phi_A_minus_eta"] = wave_profile(sb.A) - sb.eta;
  j["alpha"] = f.alpha();
  j["empirical_K"] = rep.empirical_K ? json(*rep.empirical_K) : json(nullptr);
  j["item1"] = rows(rep.item1);
  j["item2"] = {{"samples", rep.item2_samples}, {"passed", rep.item2_passed}, {"rows", rows(rep.item2)}};
  j["item2_sharp"] = {{"samples", rep.item2_samples}, {"passed", rep.item2_sharp_passed}, {"rows", rows(rep.item2_sharp)}};

  std::string csv = "c,delta,item1_margin,item2_margin,item2_sharp_margin\n";
  for (std::size_t k = 0; k < rep.item1.size(); ++k)
    csv += num(rep.item1[k].c) + "," + num(rep.item1[k].delta) + "," + num(rep.item1[k].worst_margin) + "," +
           num(rep.item2[k].worst_margin) + "," + num(rep.item2_sharp[k].worst_margin) + "\n";
  write_atomically(dir / (stem + "_margins.csv"), with_comments(csv_header(config), csv));
  write_atomically(dir / (stem + ".json"), j.dump(2) + "\n");
  log << "scan: item 2 passed " << rep.item2_passed << "/" << rep.item2_samples << ", empirical K "
      << (rep.empirical_K ? num(*rep.empirical_K) : std::string("none")) << "\n";
  return exit_ok;
}

}  // namespace

ReactionTerm make_reaction(const ReactionBlock& block) {
  try {
    if (block.family == "bump") return make_bump(block.alpha, block.mass);
    if (block.family == "tent") return make_tent(block.alpha, block.mass);
  } catch (const DomainError& e) {
    throw ConfigError("config block 'reaction': " + std::string(e.what()));
  }
  throw ConfigError("config key 'reaction.family' must be bump or tent");
}

GridSpec make_grid(const GridBlock& block) {
  std::optional<double> H;
  if (block.H_policy == "fixed") H = block.H;
  try {
    if (block.ny == 0) return GridSpec::square_cells(block.R, block.nx, H);
    return GridSpec(block.R, block.nx, block.ny, H);
  } catch (const DomainError& e) {
    throw ConfigError("config block 'grid': " + std::string(e.what()));
  }
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

int run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  check(config);
  const fs::path dir = options.out_dir.empty() ? fs::path(config.output.dir) : options.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ConfigError("output directory '" + dir.string() + "' cannot be created");
  const std::string stem = config.output.stem.empty() ? to_string(config.command) : config.output.stem;
  const int workers = options.serial ? 1 : std::max(1, options.workers);

  try {
    switch (config.command) {
      case Command::validate: return cmd_validate(config, dir, stem, log);
      case Command::solve: return cmd_solve(config, dir, stem, log);
      case Command::wave: return cmd_wave(config, dir, stem, log);
      case Command::continuation: return cmd_continue(config, dir, stem, workers, log);
      case Command::tail: return cmd_tail(config, dir, stem, log);
      case Command::scan: return cmd_scan(config, dir, stem, log);
    }
  } catch (const ConvergenceError& e) {
    log << "error: " << e.what() << "\n";
    return exit_nonconvergence;
  } catch (const BracketError& e) {
    log << "error: " << e.what() << "\n";
    return exit_nonconvergence;
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return exit_ok;
}

}  // namespace bwave::cli
