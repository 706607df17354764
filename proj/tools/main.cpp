#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "qdual/campaign.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qdual - lattice verification campaigns for free-field duality"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "qdual-out";
  int jobs = 1;
  long long seed_override = -1;

  auto* run = app.add_subcommand("run", "run a campaign config");
  run->add_option("config", config_path, "path to a campaign JSON config")->required();
  run->add_option("--jobs", jobs, "number of concurrent jobs");
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--out", out_dir, "output directory");

  auto* list = app.add_subcommand("list-suites", "print the built-in canned campaigns");
  auto* schema = app.add_subcommand("schema", "print the JSON schema of campaign configs");

  CLI11_PARSE(app, argc, argv);

  // Environment override for the output directory only.
  if (const char* env = std::getenv("QDUAL_OUT_DIR")) out_dir = env;

  try {
    if (run->parsed()) {
      qdual::campaign::Campaign c;
      bool canned = false;
      if (!std::filesystem::exists(config_path)) {
        for (const auto& [name, cfg] : qdual::campaign::canned_suites()) {
          if (name == config_path) {
            c = qdual::campaign::parse_campaign(cfg);
            canned = true;
            break;
          }
        }
      }
      if (!canned) c = qdual::campaign::load_campaign(config_path);
      if (seed_override >= 0) c.seed = static_cast<std::uint64_t>(seed_override);
      int code = qdual::campaign::run(c, out_dir, jobs);
      std::cout << (code == 0 ? "all jobs passed" : "failures reported") << "\n";
      return code;
    }
    if (list->parsed()) {
      for (const auto& [name, cfg] : qdual::campaign::canned_suites()) {
        std::cout << name << "  (" << cfg.at("jobs").size() << " jobs)\n";
      }
      return 0;
    }
    if (schema->parsed()) {
      std::cout << qdual::campaign::config_schema().dump(2) << "\n";
      return 0;
    }
  } catch (const qdual::campaign::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
