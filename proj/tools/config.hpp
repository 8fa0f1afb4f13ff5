#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bwave::cli {

/// Bad or unknown configuration; exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { validate, solve, wave, continuation, tail, scan };

std::string to_string(Command c);

struct ReactionBlock {
  std::string family = "bump";
  double alpha = 0.25;
  double mass = 0.39269908169872414;  // pi/8
};

struct GridBlock {
  double R = 16.0;
  std::string H_policy = "quarter_root";  // quarter_root | fixed
  double H = 0.0;                         // used when H_policy = fixed
  int nx = 1024;
  int ny = 0;        // 0: square cells
  double h = 1.0 / 32.0;  // spacing for the continuation schedule
};

struct SpeedBlock {
  double c_min = 1.0 / 256.0;
  double c_max = 64.0;
  double speed_tol = 1e-6;
  double width_tol = 1e-8;
  bool full_scan = false;
  bool warm_start = true;
};

struct SolverBlock {
  double tol_outer = 1e-10;
  int max_outer = 50000;
  double residual_tol = 1e-7;
  bool newton = true;
};

struct ClosedFormBlock {
  double delta = 1.0;
  double c = 1.0;
};

struct SolveBlock {
  double c = 1.0;
  std::string start = "sub";  // sub | super | both
};

struct ContinueBlock {
  std::vector<double> schedule{8.0, 16.0, 32.0};
};

struct TailBlock {
  std::string field;  // CSV written by `solve` or `wave`
  double c = 0.0;     // 0: read from the field file comments
};

struct ScanBlock {
  double eta = 0.1;
  double A = 2.0;
  int c_samples = 100;
  int u_samples = 100;
  double c_lo = 1.0 / 16.0;
  double c_hi = 4096.0;
};

struct ValidateBlock {
  double R = 4.0;
  double H = 2.0;
  std::vector<int> levels{256, 512, 1024};
  int samples = 10000;
};

struct OutputBlock {
  std::string dir = ".";
  std::string stem;  // default: the command name
};

struct ExperimentConfig {
  Command command = Command::validate;
  ReactionBlock reaction;
  GridBlock grid;
  SpeedBlock speed;
  SolverBlock solver;
  ClosedFormBlock closed_form;
  SolveBlock solve;
  ContinueBlock cont;
  TailBlock tail;
  ScanBlock scan;
  ValidateBlock validate;
  OutputBlock output;
  bool deterministic = true;
};

/// key = value lines, '#' comments, [section] headers or dotted keys.
/// Lists are comma separated.
nlohmann::json parse_key_value(const std::string& text);

/// Builds a config from a nested JSON object. Unknown keys and values of
/// the wrong type throw ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// JSON when the first non-blank character is '{', key=value otherwise.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every field, resolved, as nested JSON (the inverse of config_from_json).
nlohmann::json to_json(const ExperimentConfig& config);

/// Throws ConfigError if a numeric parameter violates its precondition.
void check(const ExperimentConfig& config);

}  // namespace bwave::cli
