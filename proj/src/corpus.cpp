#include "cruxlite/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cruxlite/frontend.hpp"

namespace cruxlite {

namespace {

struct InputSlot {
  std::string key;
  std::string name;
  Sort sort;
  std::uint64_t count = 0;
};

double domain_log2(const Sort& s) {
  switch (s.kind()) {
    case SortKind::Bool: return 1;
    case SortKind::BitVec: return s.width();
    case SortKind::Array: return s.length() * domain_log2(s.elem());
    case SortKind::Tuple:
    case SortKind::Record: {
      double d = 0;
      for (const auto& m : s.members()) d += domain_log2(m);
      return d;
    }
    case SortKind::Variant: {
      double sum = 0;
      for (const auto& m : s.members()) sum += std::exp2(domain_log2(m));
      return std::log2(sum);
    }
    default: return 0;
  }
}

// thrown out of a run when the program asks for an input not yet enumerated
struct NewInput {};

}  // namespace

OracleResult brute_force(const Program& p, const Function& test, std::uint64_t limit) {
  OracleResult out;
  out.test = test.name;
  std::vector<InputSlot> slots;
  std::map<std::string, std::size_t> by_key;

  for (;;) {
    // saturating product of the input domains
    std::uint64_t total = 1;
    for (const auto& s : slots) {
      if (s.count > limit || total > limit / s.count) {
        total = limit + 1;
        break;
      }
      total *= s.count;
    }
    if (total > limit) {
      double log2 = 0;
      for (const auto& s : slots) log2 += domain_log2(s.sort);
      char buf[64];
      std::snprintf(buf, sizeof buf, "2^%.1f", log2);
      throw OracleError(test.name + ": " + buf + " input combinations exceed the oracle bound of " +
                        std::to_string(limit));
    }
    out.combinations = total;
    out.satisfying = 0;
    bool grew = false;
    std::vector<std::uint64_t> digits(slots.size(), 0);

    for (std::uint64_t n = 0; n < total && !grew; ++n) {
      std::uint64_t rest = n;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        digits[i] = rest % slots[i].count;
        rest /= slots[i].count;
      }
      InterpHooks hooks;
      std::vector<OracleInput> used;
      hooks.symbolic = [&](const std::string& key, const std::string& name, const Sort& sort) {
        auto it = by_key.find(key);
        if (it == by_key.end()) {
          by_key[key] = slots.size();
          slots.push_back({key, name, sort, value_count(sort, limit + 1)});
          throw NewInput{};
        }
        Value v = value_at(sort, digits[it->second]);
        used.push_back({key, name, v});
        return v;
      };
      Interpreter in(p, hooks);
      InterpResult r;
      try {
        r = in.run(test);
      } catch (const NewInput&) {
        grew = true;
        break;
      }
      if (r.status == InterpResult::Status::AssumptionFailed) continue;
      if (r.status == InterpResult::Status::Error) {
        out.verdict = Verdict::EngineError;
        out.error = r.error;
        return out;
      }
      ++out.satisfying;
      if (!r.failures.empty()) {
        out.verdict = Verdict::Refuted;
        out.witness = std::move(used);
        out.failures = std::move(r.failures);
        return out;
      }
    }
    if (grew) continue;
    out.verdict = out.satisfying == 0 ? Verdict::Vacuous : Verdict::Proven;
    return out;
  }
}

namespace {

CorpusVariant variant(const nlohmann::json& j) {
  CorpusVariant v;
  v.file = j.at("file").get<std::string>();
  for (const auto& [k, x] : j.at("expected").items()) v.expected[k] = x.get<std::string>();
  return v;
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  Manifest m;
  m.dir = std::filesystem::path(path).parent_path().string();
  for (const auto& e : j.at("entries")) {
    CorpusEntry c;
    c.name = e.at("name").get<std::string>();
    c.program = variant(e);
    c.oracle = variant(e.at("oracle"));
    c.oracle_width = e.at("oracle").at("width").get<unsigned>();
    for (const auto& mu : e.value("mutants", nlohmann::json::array())) {
      c.mutants.push_back(variant(mu));
      c.mutant_oracles.push_back(variant(mu.at("oracle")));
    }
    m.entries.push_back(std::move(c));
  }
  return m;
}

Program load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto r = parse(ss.str(), path);
  if (!r.ok()) throw Error(r.diagnostics.at(0).str());
  auto d = sort_check(*r.program);
  if (!d.empty()) throw Error(d[0].str());
  return std::move(*r.program);
}

}  // namespace cruxlite
