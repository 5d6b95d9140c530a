#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cruxlite/error.hpp"
#include "cruxlite/exec.hpp"
#include "cruxlite/interp.hpp"

namespace cruxlite {

/// The instance is too large to enumerate.
struct OracleError : Error {
  using Error::Error;
};

inline constexpr std::uint64_t kOracleLimit = std::uint64_t{1} << 20;

struct OracleInput {
  std::string key;  // dynamic occurrence of the symbolic statement
  std::string name;
  Value value;
};

/// Exhaustive concrete verdict of one test. Uses the interpreter only.
struct OracleResult {
  std::string test;
  Verdict verdict = Verdict::Proven;  // Proven, Refuted, Vacuous or EngineError
  std::uint64_t combinations = 0;
  std::uint64_t satisfying = 0;  // assignments that pass every assumption
  std::vector<OracleInput> witness;  // Refuted: the first violating assignment
  std::vector<ConcreteFailure> failures;
  std::string error;
};

/// Enumerate every assignment of the test's symbolic inputs. Refuses with
/// the combination count when it exceeds `limit`.
OracleResult brute_force(const Program& p, const Function& test, std::uint64_t limit = kOracleLimit);

struct CorpusVariant {
  std::string file;  // relative to the manifest
  std::map<std::string, std::string> expected;  // job -> verdict name
};

struct CorpusEntry {
  std::string name;
  CorpusVariant program;
  CorpusVariant oracle;  // reduced-width twin
  unsigned oracle_width = 0;
  std::vector<CorpusVariant> mutants;
  std::vector<CorpusVariant> mutant_oracles;
};

struct Manifest {
  std::string dir;
  std::vector<CorpusEntry> entries;
};

Manifest load_manifest(const std::string& path);

/// Read, parse and sort-check one program; throws Error with the first
/// diagnostic.
Program load_program(const std::string& path);

}  // namespace cruxlite
