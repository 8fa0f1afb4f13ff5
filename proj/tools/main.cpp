#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bwave: traveling waves for a boundary reaction-diffusion problem"};
  std::string config_path;
  std::string out_dir;
  bool serial = false;
  int workers = 1;
  app.add_option("--config", config_path, "experiment config (key = value or JSON)")->required();
  app.add_option("--out", out_dir, "output directory, overrides output.dir");
  app.add_flag("--serial", serial, "run everything on one thread");
  app.add_option("--workers", workers, "worker threads for continue")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bwave::cli::exit_config_error;
  }

  try {
    const auto config = bwave::cli::load_config(config_path);
    bwave::cli::RunOptions options;
    options.out_dir = out_dir;
    options.serial = serial;
    options.workers = workers;
    return bwave::cli::run(config, options, std::cerr);
  } catch (const bwave::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bwave::cli::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bwave::cli::exit_config_error;
  }
}
