#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cruxlite/exec.hpp"

namespace cruxlite {

enum class SummaryMode : std::uint8_t { General, Substitution };

/// Contract extracted from a verified spec. Terms live in `table`.
struct SpecSummary {
  std::string target;
  std::string spec;  // provenance: the spec function
  Verdict verdict = Verdict::Proven;
  std::shared_ptr<TermTable> table;
  std::vector<TermId> formals;  // one aggregate of fresh symbols per parameter
  TermId result;                // fresh symbol of the target's return sort
  TermId precondition;          // over formals
  TermId post;                  // over formals and result
  SummaryMode mode = SummaryMode::General;
  std::string reference;        // Substitution: the equivalent function
  bool call_under_branch = false;
};

using SummaryMap = std::map<std::string, std::shared_ptr<const SpecSummary>>;  // keyed by spec name

/// Interception of calls to functions whose spec is enabled.
class SummaryHook : public CallHook {
 public:
  explicit SummaryHook(const SummaryMap& summaries) : summaries_(summaries) {}
  std::optional<SymVal> on_call(Executor& ex, ExecState& s, const Function& callee, const std::vector<SymVal>& args,
                                const SourceSpan& where) override;
  void on_enable(Executor& ex, const std::string& spec, const SourceSpan& where) override;

 protected:
  const SummaryMap& summaries_;
  std::map<std::string, const SpecSummary*> active_;  // by target
};

SymVal apply_summary(Executor& ex, ExecState& s, const SpecSummary& sum, const std::vector<SymVal>& args,
                     const SourceSpan& where);

/// Replay hooks: symbolic inputs from the model; summarized calls replayed
/// the way they were applied.
ReplayHookFactory summary_replay(const SummaryMap& summaries);

/// Run a test with the given verified summaries available to enable_spec.
TestOutcome run_with_summaries(const Program& p, const Function& test, const SummaryMap& summaries,
                               const ExecConfig& cfg);

/// Spec functions named by enable_spec in f and the functions it calls.
std::vector<std::string> enabled_spec_names(const Program& p, const Function& f);
/// A cycle in the spec enablement graph (first name repeated last), or empty.
std::vector<std::string> find_spec_cycle(const Program& p);

TestOutcome verify_spec(const Program& p, const Function& spec, const SummaryMap& summaries, const ExecConfig& cfg);
/// Re-execute a spec, whose verification outcome is `verified`, with its
/// single target call intercepted. Refuses anything but Proven.
SpecSummary extract_summary(const Program& p, const Function& spec, const SummaryMap& summaries,
                            const ExecConfig& cfg, const TestOutcome& verified);

nlohmann::ordered_json summary_json(const SpecSummary& s);

}  // namespace cruxlite
