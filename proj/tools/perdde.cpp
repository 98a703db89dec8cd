#include <CLI11.hpp>
#include <iostream>

#include "perdde/commands.hpp"
#include "perdde/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Periodic solutions of forced delay differential equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", perdde::kVersion);

  std::string config_path;
  perdde::CommandOptions opts;
  std::uint64_t seed = 0;
  int threads = 1;
  bool print_report = false;

  for (const auto& name : perdde::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opts.out_dir, "Directory for report.json and CSV files");
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--threads", threads, "Override the config thread count")->check(CLI::Range(1, 1024));
    sub->add_flag("--force", opts.force, "Solve even when the linearisation is resonant");
    sub->add_flag("--print", print_report, "Print the report JSON to stdout");
  }
  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--threads")) opts.threads = threads;

  nlohmann::json config;
  try {
    std::ifstream is(config_path);
    config = nlohmann::json::parse(is);
  } catch (const std::exception& e) {
    std::cerr << "config-invalid: " << config_path << ": " << e.what() << '\n';
    return 1;
  }

  const perdde::CommandResult result = perdde::run_command(sub->get_name(), config, opts);
  if (print_report) std::cout << result.report.dump(2) << '\n';
  (result.exit_code == 0 ? std::cout : std::cerr) << sub->get_name() << ": " << result.headline << '\n';
  for (const auto& f : result.files) std::cerr << "wrote " << f << '\n';
  return result.exit_code;
}
