#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qdual/report.hpp"

namespace qdual::campaign {

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

struct Job {
  std::string module;
  std::string operation;
  report::json params;  // object; operation-specific with documented defaults
};

struct Campaign {
  std::string name;
  std::uint64_t seed = 1;
  std::vector<Job> jobs;
};

struct JobResult {
  std::string name;
  bool pass = false;
  bool budget_refused = false;
  report::json details;
  // series name -> (header, rows); written as CSV next to the job report
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<double>>>>
      series;
};

struct Summary {
  int total = 0;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failed_jobs;
  bool budget_refused = false;
};

/// Validates and parses a config object. Throws SchemaError on violations.
Campaign parse_campaign(const report::json& j);
Campaign load_campaign(const std::filesystem::path& path);

/// The JSON schema of campaign configs (printed by the `schema` subcommand).
report::json config_schema();

/// Built-in canned campaigns: name -> config.
const std::vector<std::pair<std::string, report::json>>& canned_suites();

/// Runs all jobs (optionally with `parallel_jobs` worker threads), writes one
/// JSON report per job plus a campaign summary and CSV series under `outdir`.
/// Exit code: 0 all passed, 1 some assertion failed, 3 budget refusal.
int run(const Campaign& campaign, const std::filesystem::path& outdir, int parallel_jobs = 1);

/// Executes one job in isolation (used by `run` and by tests).
JobResult run_job(const Job& job, std::uint64_t seed);

}  // namespace qdual::campaign
