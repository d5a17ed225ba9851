#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gaugelink/cli.hpp"

namespace gc = gaugelink::cli;

namespace {

int run_subcommand(const std::string& name, const std::string& config_path, const std::string& output, bool print) {
  const auto sub = gc::subcommand_from(name);
  if (print) {
    std::cout << gc::defaults(sub).dump(2) << "\n";
    return 0;
  }
  gc::RunConfig cfg;
  if (config_path.empty()) {
    cfg = gc::config_from_json({{"subcommand", name}});
  } else {
    cfg = gc::parse_config(config_path);
    if (cfg.subcommand != sub) {
      throw gaugelink::ConfigError(
          fmt::format("config subcommand '{}' does not match '{}'", gc::to_string(cfg.subcommand), name));
    }
  }
  if (!output.empty()) cfg.output_dir = output;
  return gc::execute(cfg, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaugelink: double-well gauge-link simulations"};
  app.require_subcommand(1);
  std::string config_path, output;
  bool print_defaults = false;

  for (const auto& [sub, name] : gc::subcommand_names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " module");
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--output", output, "output directory (overrides output_dir)");
    cmd->add_flag("--print-defaults", print_defaults, "print default parameters and exit");
  }

  auto* rec = app.add_subcommand("recipes", "list bundled recipes");
  auto* run = app.add_subcommand("run", "run a bundled recipe");
  std::string recipe;
  run->add_option("recipe", recipe, "recipe name")->required();
  run->add_option("--output", output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rec->parsed()) {
      for (const auto& r : gc::recipes()) std::cout << fmt::format("{:<18} {}\n", r.name, r.target);
      return 0;
    }
    if (run->parsed()) {
      return gc::execute(gc::recipe_config(recipe, output.empty() ? "out/" + recipe : output), std::cerr);
    }
    for (const auto& [sub, name] : gc::subcommand_names()) {
      if (app.got_subcommand(name)) return run_subcommand(name, config_path, output, print_defaults);
    }
  } catch (const gaugelink::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
