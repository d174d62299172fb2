#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fsd/config.hpp"

namespace {

int run(const std::string& subcommand, const std::string& config_path,
        std::optional<std::uint64_t> seed, std::optional<int> parallelism,
        std::optional<int> trials, const std::string& out_dir,
        const std::string& format) {
  std::string text = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config file \"" << config_path << "\"\n";
      return 1;
    }
    text.assign(std::istreambuf_iterator<char>(in),
                std::istreambuf_iterator<char>());
  }

  fsd::ExperimentConfig config;
  try {
    config = fsd::parse_config(text);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  if (seed) config.master_seed = *seed;
  if (parallelism) config.parallelism = *parallelism;
  if (trials) config.trials = *trials;

  fsd::RunReport report;
  try {
    report = fsd::run_command(subcommand, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (format == "csv") {
    for (const auto& [name, contents] : report.csv_files) std::cout << contents;
  } else {
    std::cout << report.report.dump(2) << "\n";
  }

  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory \"" << out_dir
                << "\"\n";
      return 1;
    }
    {
      std::ofstream out(std::filesystem::path(out_dir) / "report.json");
      out << report.report.dump(2) << "\n";
    }
    for (const auto& [name, contents] : report.csv_files) {
      std::ofstream out(std::filesystem::path(out_dir) / name);
      out << contents;
    }
  }
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral regularization estimators and their excess-risk "
               "rate predictions"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<int> trials;

  app.add_option("--config", config_path, "Path to a JSON config file")
      ->expected(1);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--parallelism", parallelism,
                 "Worker threads for replicated runs (overrides the config)");
  app.add_option("--trials", trials,
                 "Replication count (overrides the config)");
  app.add_option("--out", out_dir,
                 "Directory for report.json and CSV outputs");
  app.add_option("--format", format, "Stdout payload")
      ->check(CLI::IsMember({"json", "csv"}));

  for (const auto& name : fsd::known_subcommands()) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();
  return run(subcommand, config_path, seed, parallelism, trials, out_dir,
             format);
}
