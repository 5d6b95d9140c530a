#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cruxlite/frontend.hpp"
#include "cruxlite/harness.hpp"

using namespace cruxlite;

namespace {

constexpr int kUsage = 3;

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cruxlite: symbolic unit tests and compositional specs over a textual IR"};
  app.require_subcommand(1);
  auto* verify = app.add_subcommand("verify", "run every test and spec in the given files");

  std::vector<std::string> files;
  std::vector<std::string> tests;
  unsigned max_unroll = ExecConfig{}.max_unroll;
  std::string backend = "internal";
  std::string solver_cmd;
  std::string dump_dir;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool allow_vacuous = false;
  bool trust_specs = false;
  std::string report = "human";
  bool trace = false;

  verify->add_option("files", files, "IR files")->required()->check(CLI::ExistingFile);
  verify->add_option("--test", tests, "run only this test or spec (repeatable)");
  verify->add_option("--max-unroll", max_unroll, "loop and recursion bound")->check(CLI::PositiveNumber);
  verify->add_option("--backend", backend, "solver backend")->check(CLI::IsMember({"internal", "external"}));
  verify->add_option("--solver-cmd", solver_cmd, "external SMT solver command, {file} for a script path")
      ->envname("CRUXLITE_SOLVER");
  verify->add_option("--dump-smt", dump_dir, "write every solver query as SMT-LIB into this directory");
  verify->add_option("--seed", seed, "solver seed");
  verify->add_option("--jobs", jobs, "parallel jobs")->check(CLI::PositiveNumber);
  verify->add_flag("--allow-vacuous", allow_vacuous, "do not fail on vacuous tests");
  verify->add_flag("--trust-specs", trust_specs, "use spec summaries without re-verifying the specs");
  verify->add_option("--report", report, "report format")->check(CLI::IsMember({"human", "json"}));
  verify->add_flag("--trace", trace, "print the concrete trace of each counterexample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  if (backend == "external" && solver_cmd.empty()) {
    std::cerr << "error: --backend external needs --solver-cmd or CRUXLITE_SOLVER\n";
    return kUsage;
  }
  if (!dump_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dump_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create " << dump_dir << ": " << ec.message() << "\n";
      return kUsage;
    }
  }

  HarnessConfig cfg;
  cfg.exec.max_unroll = max_unroll;
  cfg.exec.trace = trace;
  cfg.exec.solver.backend = backend == "external" ? Backend::External : Backend::Internal;
  cfg.exec.solver.solver_cmd = solver_cmd;
  cfg.exec.solver.dump_dir = dump_dir;
  cfg.exec.solver.seed = seed;
  cfg.jobs = jobs;
  cfg.allow_vacuous = allow_vacuous;
  cfg.trust_specs = trust_specs;

  std::vector<std::pair<std::string, Program>> programs;
  for (const auto& path : files) {
    auto text = slurp(path);
    if (!text) {
      std::cerr << "error: cannot read " << path << "\n";
      return kUsage;
    }
    auto r = parse(*text, path);
    if (!r.ok()) {
      for (const auto& d : r.diagnostics) std::cerr << d.str() << "\n";
      return kUsage;
    }
    auto diags = sort_check(*r.program);
    if (!diags.empty()) {
      for (const auto& d : diags) std::cerr << d.str() << "\n";
      return kUsage;
    }
    programs.emplace_back(path, std::move(*r.program));
  }

  std::set<std::string> unmatched(tests.begin(), tests.end());
  TestReport rep;
  for (const auto& [path, prog] : programs) {
    std::vector<std::string> only;
    for (const auto& t : tests) {
      const Function* f = prog.find_function(t);
      if (f && (f->is_test || f->spec_for)) {
        only.push_back(t);
        unmatched.erase(t);
      }
    }
    if (!tests.empty() && only.empty()) continue;
    RunPlan plan;
    try {
      plan = discover(prog, only);
    } catch (const DiscoveryError& e) {
      std::cerr << path << ": " << e.what() << "\n";
      return kUsage;
    }
    auto part = run_plan(prog, path, plan, cfg);
    for (auto& j : part) rep.jobs.push_back(std::move(j));
  }
  if (!unmatched.empty()) {
    std::cerr << "error: no test or spec named " << *unmatched.begin() << "\n";
    return kUsage;
  }
  rep.exit_status = exit_status(rep.jobs, allow_vacuous);
  std::cout << render_report(rep, report == "json" ? ReportFormat::Json : ReportFormat::Human, trace);
  return rep.exit_status;
}
