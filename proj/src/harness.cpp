#include "cruxlite/harness.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cruxlite {

namespace {

bool is_job(const Function& f) { return f.is_test || f.spec_for.has_value(); }

void check_enables(const Program& p) {
  for (const auto& f : p.functions) {
    for (const auto& b : f.blocks) {
      for (const auto& st : b.statements) {
        if (st.kind != Statement::Kind::EnableSpec) continue;
        const Function* g = p.find_function(st.text);
        if (!g) throw DiscoveryError(st.span.str() + ": enable_spec " + st.text + ": no such function");
        if (!g->spec_for) throw DiscoveryError(st.span.str() + ": enable_spec " + st.text + ": not a spec function");
      }
    }
  }
}

}  // namespace

RunPlan discover(const Program& p, const std::vector<std::string>& only) {
  check_enables(p);
  auto cyc = find_spec_cycle(p);
  if (!cyc.empty()) {
    std::string path;
    for (const auto& n : cyc) path += (path.empty() ? "" : " -> ") + n;
    throw DiscoveryError("cyclic spec enablement: " + path);
  }
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < p.functions.size(); ++i) order[p.functions[i].name] = i;

  std::vector<const Function*> roots;
  if (only.empty()) {
    for (const auto& f : p.functions) {
      if (is_job(f)) roots.push_back(&f);
    }
  } else {
    for (const auto& n : only) {
      const Function* f = p.find_function(n);
      if (!f || !is_job(*f)) throw DiscoveryError("no test or spec named " + n);
      roots.push_back(f);
    }
    std::sort(roots.begin(), roots.end(), [&](auto* a, auto* b) { return order[a->name] < order[b->name]; });
  }

  RunPlan plan;
  std::set<std::string> placed;
  std::function<void(const Function&)> place = [&](const Function& f) {
    if (placed.count(f.name)) return;
    placed.insert(f.name);
    auto deps = enabled_spec_names(p, f);
    std::sort(deps.begin(), deps.end(), [&](auto& a, auto& b) { return order[a] < order[b]; });
    for (const auto& d : deps) place(*p.find_function(d));
    plan.jobs.push_back({f.name, f.spec_for ? JobKind::Spec : JobKind::Test, deps});
  };
  for (auto* f : roots) place(*f);
  return plan;
}

namespace {

JobReport run_job(const Program& p, const std::string& file, const Job& job, const SummaryMap& summaries,
                  const std::vector<std::string>& blocked, const HarnessConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  JobReport r;
  r.file = file;
  r.job = job;
  r.outcome.name = job.function;
  const Function& f = *p.find_function(job.function);

  ExecConfig ec = cfg.exec;
  if (!ec.solver.dump_dir.empty()) {
    ec.solver.dump_prefix = std::filesystem::path(file).stem().string() + "." + job.function;
  }

  if (!blocked.empty()) {
    r.outcome.verdict = Verdict::Skipped;
    std::string names;
    for (const auto& b : blocked) names += (names.empty() ? "" : ", ") + b;
    r.outcome.reason = "requires spec " + names + ", which did not verify";
  } else if (job.kind == JobKind::Test) {
    r.outcome = run_with_summaries(p, f, summaries, ec);
  } else {
    if (cfg.trust_specs) {
      r.trusted = true;
      r.outcome.verdict = Verdict::Proven;
    } else {
      r.outcome = verify_spec(p, f, summaries, ec);
    }
    if (r.outcome.verdict == Verdict::Proven) {
      try {
        r.summary = std::make_shared<SpecSummary>(extract_summary(p, f, summaries, ec, r.outcome));
      } catch (const Error& e) {
        r.outcome.verdict = Verdict::EngineError;
        r.outcome.reason = std::string("summary extraction: ") + e.what();
      }
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<JobReport> run_plan(const Program& p, const std::string& file, const RunPlan& plan,
                                const HarnessConfig& cfg) {
  const std::size_t n = plan.jobs.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[plan.jobs[i].function] = i;

  // every spec a job may reach, directly or through the specs it requires
  std::vector<std::vector<std::size_t>> closure(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> seen;
    std::vector<std::size_t> work;
    for (const auto& d : plan.jobs[i].requires_specs) work.push_back(index.at(d));
    while (!work.empty()) {
      auto j = work.back();
      work.pop_back();
      if (!seen.insert(j).second) continue;
      for (const auto& d : plan.jobs[j].requires_specs) work.push_back(index.at(d));
    }
    closure[i].assign(seen.begin(), seen.end());
  }

  std::vector<std::optional<JobReport>> done(n);
  std::vector<bool> started(n, false);
  std::mutex mu;
  std::condition_variable cv;

  auto ready = [&](std::size_t i) {
    for (auto j : closure[i]) {
      if (!done[j]) return false;
    }
    return true;
  };

  auto worker = [&] {
    std::unique_lock lock(mu);
    for (;;) {
      std::optional<std::size_t> pick;
      bool pending = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (started[i]) continue;
        pending = true;
        if (ready(i)) {
          pick = i;
          break;
        }
      }
      if (!pending) return;
      if (!pick) {
        cv.wait(lock);
        continue;
      }
      started[*pick] = true;
      SummaryMap summaries;
      std::vector<std::string> blocked;
      for (auto j : closure[*pick]) {
        if (done[j]->summary) {
          summaries[plan.jobs[j].function] = done[j]->summary;
        } else {
          blocked.push_back(plan.jobs[j].function);
        }
      }
      lock.unlock();
      JobReport r = run_job(p, file, plan.jobs[*pick], summaries, blocked, cfg);
      lock.lock();
      done[*pick] = std::move(r);
      cv.notify_all();
    }
  };

  unsigned threads = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<JobReport> out;
  for (auto& d : done) out.push_back(std::move(*d));
  return out;
}

int exit_status(const std::vector<JobReport>& jobs, bool allow_vacuous) {
  int status = 0;
  for (const auto& j : jobs) {
    switch (j.outcome.verdict) {
      case Verdict::Proven: break;
      case Verdict::Vacuous:
        if (!allow_vacuous) status = std::max(status, 1);
        break;
      case Verdict::EngineError: status = 2; break;
      default: status = std::max(status, 1);
    }
  }
  return status;
}

TestReport run(const Program& p, const std::string& file, const RunPlan& plan, const HarnessConfig& cfg) {
  TestReport r;
  r.jobs = run_plan(p, file, plan, cfg);
  r.exit_status = exit_status(r.jobs, cfg.allow_vacuous);
  return r;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson span_json(const SourceSpan& s) { return {{"file", s.file}, {"line", s.line}, {"col", s.col}}; }

const char* kind_label(JobKind k) { return k == JobKind::Spec ? "spec" : "test"; }

std::map<std::string, unsigned> tally(const TestReport& r) {
  std::map<std::string, unsigned> t{{"proven", 0}, {"refuted", 0}, {"vacuous", 0}, {"engine_error", 0}, {"skipped", 0}};
  for (const auto& j : r.jobs) {
    switch (j.outcome.verdict) {
      case Verdict::Proven: ++t["proven"]; break;
      case Verdict::Refuted: ++t["refuted"]; break;
      case Verdict::Vacuous: ++t["vacuous"]; break;
      case Verdict::EngineError: ++t["engine_error"]; break;
      case Verdict::Skipped: ++t["skipped"]; break;
    }
  }
  return t;
}

// names shown in the human report; repeated names get their ordinal
std::vector<std::string> display_names(const Model& m) {
  std::map<std::string, unsigned> count;
  for (const auto& e : m.entries) ++count[e.name];
  std::vector<std::string> out;
  for (const auto& e : m.entries) {
    out.push_back(count[e.name] > 1 ? e.name + "!" + std::to_string(e.ordinal) : e.name);
  }
  return out;
}

}  // namespace

nlohmann::ordered_json report_json(const TestReport& r) {
  ojson j;
  j["tool"] = "cruxlite";
  j["format_version"] = 1;
  j["exit_status"] = r.exit_status;
  ojson totals;
  totals["jobs"] = r.jobs.size();
  for (const auto& [k, v] : tally(r)) totals[k] = v;
  j["totals"] = totals;
  j["jobs"] = ojson::array();
  for (const auto& jr : r.jobs) {
    const TestOutcome& o = jr.outcome;
    ojson job;
    job["file"] = jr.file;
    job["name"] = jr.job.function;
    job["kind"] = kind_label(jr.job.kind);
    job["verdict"] = std::string(verdict_name(o.verdict));
    job["reason"] = o.reason;
    job["trusted"] = jr.trusted;
    job["requires"] = jr.job.requires_specs;
    job["obligations"] = ojson::array();
    for (const auto& res : o.obligations) {
      job["obligations"].push_back({{"location", span_json(res.ob.location)},
                                    {"kind", std::string(kind_name(res.ob.kind))},
                                    {"function", res.ob.function},
                                    {"message", res.ob.message},
                                    {"verdict", res.valid ? "valid" : "refuted"},
                                    {"fast_path", res.fast_path}});
    }
    if (o.failing) {
      ojson cex;
      cex["obligation"] = *o.failing;
      cex["model"] = ojson::array();
      for (const auto& e : o.model.entries) {
        cex["model"].push_back({{"name", e.name}, {"ordinal", e.ordinal}, {"value", e.value.str()}});
      }
      if (o.replay) {
        ojson rp;
        rp["confirmed"] = o.replay->confirmed;
        rp["model_inconsistent"] = o.replay->model_inconsistent;
        rp["error"] = o.replay->error;
        rp["failures"] = ojson::array();
        for (const auto& f : o.replay->failures) {
          rp["failures"].push_back({{"kind", std::string(kind_name(f.kind))},
                                    {"location", span_json(f.location)},
                                    {"function", f.function},
                                    {"message", f.message}});
        }
        cex["replay"] = rp;
      }
      job["counterexample"] = cex;
    }
    if (jr.summary) job["summary"] = summary_json(*jr.summary);
    const auto& s = o.stats;
    ojson body = ojson::object();
    for (const auto& [fn, k] : s.body_runs) body[fn] = k;
    job["stats"] = {{"terms", s.terms},
                    {"obligations", s.obligations},
                    {"assumptions", s.assumptions},
                    {"queries", s.solver.queries},
                    {"fast_path", s.solver.fast_path},
                    {"solver_calls", s.solver.solver_calls},
                    {"vars", s.solver.vars},
                    {"clauses", s.solver.clauses},
                    {"conflicts", s.solver.conflicts},
                    {"decisions", s.solver.decisions},
                    {"propagations", s.solver.propagations},
                    {"body_runs", body}};
    j["jobs"].push_back(job);
  }
  return j;
}

std::string render_report(const TestReport& r, ReportFormat fmt, bool trace) {
  if (fmt == ReportFormat::Json) return report_json(r).dump(2) + "\n";
  std::ostringstream os;
  char secs[32];
  for (const auto& jr : r.jobs) {
    const TestOutcome& o = jr.outcome;
    const char* tag = "FAIL";
    switch (o.verdict) {
      case Verdict::Proven: tag = "PASS"; break;
      case Verdict::Vacuous: tag = "VACUOUS"; break;
      case Verdict::EngineError: tag = "ERROR"; break;
      case Verdict::Skipped: tag = "SKIP"; break;
      default: break;
    }
    std::snprintf(secs, sizeof secs, "%.2fs", jr.seconds);
    os << tag << " " << jr.file << "::" << jr.job.function << " (" << kind_label(jr.job.kind);
    if (jr.trusted) os << ", trusted";
    os << ") " << o.obligations.size() << " obligations, " << o.stats.solver.clauses << " clauses, " << secs << "\n";
    if (jr.summary) {
      os << "  summary: " << jr.summary->target << " "
         << (jr.summary->mode == SummaryMode::Substitution ? "substituted by " + jr.summary->reference
                                                           : std::string("general contract"));
      if (jr.summary->call_under_branch) os << " (call under a branch)";
      os << "\n";
    }
    if (!o.reason.empty()) os << "  " << o.reason << "\n";
    if (o.verdict == Verdict::Vacuous) os << "  assumptions are unsatisfiable\n";
    if (o.failing) {
      const Obligation& ob = o.obligations[*o.failing].ob;
      os << "  " << kind_name(ob.kind) << " at " << ob.location.str() << " in " << ob.function;
      if (!ob.message.empty()) os << ": " << ob.message;
      os << "\n  counterexample:\n";
      auto names = display_names(o.model);
      for (std::size_t i = 0; i < o.model.entries.size(); ++i) {
        os << "    " << names[i] << " = " << o.model.entries[i].value.str() << "\n";
      }
      if (o.replay) {
        if (o.replay->confirmed) {
          os << "  replay: confirmed\n";
        } else if (o.replay->model_inconsistent) {
          os << "  replay: model inconsistent with assumptions\n";
        } else {
          os << "  replay: not reproduced" << (o.replay->error.empty() ? "" : " (" + o.replay->error + ")") << "\n";
        }
        if (trace) {
          for (const auto& line : o.replay->trace) os << "    | " << line << "\n";
        }
      }
    }
  }
  auto t = tally(r);
  os << "\n" << r.jobs.size() << " jobs: " << t["proven"] << " proven, " << t["refuted"] << " refuted, " << t["vacuous"]
     << " vacuous, " << t["engine_error"] << " errors, " << t["skipped"] << " skipped\n";
  return os.str();
}

}  // namespace cruxlite
