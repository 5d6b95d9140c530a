#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cruxlite/compose.hpp"
#include "cruxlite/error.hpp"
#include "cruxlite/exec.hpp"

namespace cruxlite {

/// Discovery rejected the program: bad enable_spec target or cyclic enablement.
struct DiscoveryError : Error {
  using Error::Error;
};

enum class JobKind : std::uint8_t { Test, Spec };

struct Job {
  std::string function;
  JobKind kind = JobKind::Test;
  std::vector<std::string> requires_specs;  // spec jobs that must succeed first
};

/// Jobs in dependency order: every spec precedes the jobs enabling it.
struct RunPlan {
  std::vector<Job> jobs;
};

/// Plan every test and spec of `p`. When `only` is non-empty, just those
/// functions and the specs they need.
RunPlan discover(const Program& p, const std::vector<std::string>& only = {});

struct HarnessConfig {
  ExecConfig exec;
  unsigned jobs = 1;
  bool allow_vacuous = false;
  bool trust_specs = false;  // extract summaries without re-verifying specs
};

struct JobReport {
  std::string file;
  Job job;
  TestOutcome outcome;
  std::shared_ptr<const SpecSummary> summary;
  bool trusted = false;
  double seconds = 0;  // wall time, human report only
};

struct TestReport {
  std::vector<JobReport> jobs;
  int exit_status = 0;
};

/// Execute a plan over one program. Independent jobs may run in parallel;
/// the report lists jobs in plan order whatever the schedule.
std::vector<JobReport> run_plan(const Program& p, const std::string& file, const RunPlan& plan,
                                const HarnessConfig& cfg);

/// 0 all passed; 2 any engine error; 1 otherwise.
int exit_status(const std::vector<JobReport>& jobs, bool allow_vacuous);

TestReport run(const Program& p, const std::string& file, const RunPlan& plan, const HarnessConfig& cfg);

enum class ReportFormat : std::uint8_t { Human, Json };

nlohmann::ordered_json report_json(const TestReport& r);
std::string render_report(const TestReport& r, ReportFormat fmt, bool trace = false);

}  // namespace cruxlite
