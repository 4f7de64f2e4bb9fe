#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "obstacle/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite element solver for the membrane obstacle problem"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  for (const auto& [name, help] : {std::pair{"solve", "single solve on the initial mesh"},
                                   std::pair{"converge", "uniform refinement study"},
                                   std::pair{"adapt", "adaptive refinement study"},
                                   std::pair{"check", "property checks and diagnostics"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default: config output_dir or out/<hash>)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : obstacle::exit_code::config_error;
  }

  obstacle::RunConfig config;
  try {
    config = obstacle::load_config(config_path);
  } catch (const obstacle::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return obstacle::exit_code::config_error;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::filesystem::path> cli_out;
  if (!out_dir.empty()) cli_out = out_dir;
  return obstacle::run_command(command, config, obstacle::resolve_output_dir(config, cli_out), std::cout);
}
