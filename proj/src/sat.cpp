#include "cruxlite/sat.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>

namespace cruxlite {

namespace {

using Lit = std::uint32_t;  // 2*var + negated, var 0-based
constexpr std::uint32_t kNone = UINT32_MAX;

Lit from_dimacs(int d) { return 2 * static_cast<Lit>(std::abs(d) - 1) + (d < 0 ? 1 : 0); }
int to_dimacs(Lit l) { int v = static_cast<int>(l >> 1) + 1; return (l & 1) ? -v : v; }
Lit neg(Lit l) { return l ^ 1; }
std::uint32_t var_of(Lit l) { return l >> 1; }

struct Clause {
  std::vector<Lit> lits;
  bool learnt = false;
  bool deleted = false;
  std::uint32_t lbd = 0;
  double activity = 0;
};

struct Watch {
  std::uint32_t cref;
  Lit blocker;
};

class Solver {
 public:
  Solver(const Cnf& cnf, const SatOptions& opts) : opts_(opts) {
    n_ = static_cast<std::uint32_t>(cnf.num_vars);
    assign_.assign(n_, 0);
    level_.assign(n_, 0);
    reason_.assign(n_, kNone);
    polarity_.assign(n_, 1);
    activity_.assign(n_, 0.0);
    seen_.assign(n_, 0);
    heap_pos_.assign(n_, kNone);
    lbd_mark_.assign(n_ + 1, 0);
    watches_.resize(2 * static_cast<std::size_t>(n_));
    if (opts.seed != 0) {
      std::mt19937_64 rng(opts.seed);
      std::uniform_real_distribution<double> d(0.0, 1e-5);
      for (auto& a : activity_) a = d(rng);
    }
    for (std::uint32_t v = 0; v < n_; ++v) heap_insert(v);
    for (const auto& c : cnf.clauses) {
      if (!ok_) break;
      add_input(c);
    }
  }

  SatResult solve() {
    SatResult res;
    res.sat = ok_ && search();
    if (res.sat) {
      res.model.assign(n_ + 1, false);
      for (std::uint32_t v = 0; v < n_; ++v) res.model[v + 1] = assign_[v] > 0;
    }
    res.stats = stats_;
    res.learned = std::move(learned_out_);
    return res;
  }

 private:
  int value(Lit l) const {
    int a = assign_[var_of(l)];
    return (l & 1) ? -a : a;
  }
  std::uint32_t decision_level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

  void add_input(const std::vector<int>& c) {
    std::vector<Lit> lits;
    for (int d : c) lits.push_back(from_dimacs(d));
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<Lit> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == neg(lits[i])) return;  // tautology
      int v = value(lits[i]);
      if (v > 0) return;  // satisfied at level 0
      if (v == 0) kept.push_back(lits[i]);
    }
    if (kept.empty()) {
      ok_ = false;
      return;
    }
    if (kept.size() == 1) {
      enqueue(kept[0], kNone);
      if (propagate() != kNone) ok_ = false;
      return;
    }
    attach(std::move(kept), false, 0);
  }

  std::uint32_t attach(std::vector<Lit> lits, bool learnt, std::uint32_t lbd) {
    auto cref = static_cast<std::uint32_t>(clauses_.size());
    watches_[lits[0]].push_back({cref, lits[1]});
    watches_[lits[1]].push_back({cref, lits[0]});
    clauses_.push_back(Clause{std::move(lits), learnt, false, lbd, 0});
    if (learnt) ++num_learnts_;
    return cref;
  }

  void enqueue(Lit l, std::uint32_t reason) {
    std::uint32_t v = var_of(l);
    assign_[v] = (l & 1) ? -1 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  std::uint32_t propagate() {
    std::uint32_t confl = kNone;
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];
      Lit false_lit = neg(p);
      auto& ws = watches_[false_lit];
      ++stats_.propagations;
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        Watch w = ws[i];
        if (value(w.blocker) > 0) {
          ws[j++] = ws[i++];
          continue;
        }
        Clause& c = clauses_[w.cref];
        if (c.deleted) {
          ++i;
          continue;
        }
        if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
        ++i;
        Lit first = c.lits[0];
        if (first != w.blocker && value(first) > 0) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.lits.size(); ++k) {
          if (value(c.lits[k]) >= 0) {
            std::swap(c.lits[1], c.lits[k]);
            watches_[c.lits[1]].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (value(first) < 0) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNone) break;
    }
    return confl;
  }

  void bump_var(std::uint32_t v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] != kNone) heap_up(heap_pos_[v]);
  }

  void bump_clause(Clause& c) {
    if ((c.activity += cla_inc_) > 1e20) {
      for (auto& cl : clauses_) {
        if (cl.learnt) cl.activity *= 1e-20;
      }
      cla_inc_ *= 1e-20;
    }
  }

  bool redundant(Lit l) const {
    std::uint32_t r = reason_[var_of(l)];
    if (r == kNone) return false;
    const Clause& c = clauses_[r];
    for (std::size_t k = 1; k < c.lits.size(); ++k) {
      std::uint32_t v = var_of(c.lits[k]);
      if (!seen_[v] && level_[v] > 0) return false;
    }
    return true;
  }

  void analyze(std::uint32_t confl, std::vector<Lit>& out, std::uint32_t& bt_level) {
    int path = 0;
    Lit p = kNone;
    out.assign(1, 0);
    std::size_t idx = trail_.size();
    do {
      Clause& c = clauses_[confl];
      if (c.learnt) bump_clause(c);
      for (std::size_t k = (p == kNone ? 0 : 1); k < c.lits.size(); ++k) {
        Lit q = c.lits[k];
        std::uint32_t v = var_of(q);
        if (seen_[v] || level_[v] == 0) continue;
        bump_var(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level()) {
          ++path;
        } else {
          out.push_back(q);
        }
      }
      while (!seen_[var_of(trail_[--idx])]) {
      }
      p = trail_[idx];
      confl = reason_[var_of(p)];
      seen_[var_of(p)] = 0;
      --path;
    } while (path > 0);
    out[0] = neg(p);

    std::vector<Lit> all = out;
    std::size_t j = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (!redundant(out[i])) out[j++] = out[i];
    }
    out.resize(j);
    for (Lit l : all) seen_[var_of(l)] = 0;

    bt_level = 0;
    if (out.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < out.size(); ++i) {
        if (level_[var_of(out[i])] > level_[var_of(out[max_i])]) max_i = i;
      }
      std::swap(out[1], out[max_i]);
      bt_level = level_[var_of(out[1])];
    }
  }

  std::uint32_t lbd_of(const std::vector<Lit>& lits) {
    ++lbd_stamp_;
    std::uint32_t n = 0;
    for (Lit l : lits) {
      std::uint32_t lv = level_[var_of(l)];
      if (lbd_mark_[lv] != lbd_stamp_) {
        lbd_mark_[lv] = lbd_stamp_;
        ++n;
      }
    }
    return n;
  }

  void backtrack(std::uint32_t lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail_.size(); i-- > trail_lim_[lvl];) {
      std::uint32_t v = var_of(trail_[i]);
      polarity_[v] = static_cast<std::uint8_t>(trail_[i] & 1);
      assign_[v] = 0;
      reason_[v] = kNone;
      if (heap_pos_[v] == kNone) heap_insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
    qhead_ = trail_.size();
  }

  bool locked(std::uint32_t cref) const {
    const Clause& c = clauses_[cref];
    std::uint32_t v = var_of(c.lits[0]);
    return reason_[v] == cref && value(c.lits[0]) > 0;
  }

  void reduce_db() {
    std::vector<std::uint32_t> cand;
    for (std::uint32_t i = 0; i < clauses_.size(); ++i) {
      const Clause& c = clauses_[i];
      if (c.learnt && !c.deleted && c.lbd > 2 && !locked(i)) cand.push_back(i);
    }
    std::sort(cand.begin(), cand.end(), [&](std::uint32_t a, std::uint32_t b) {
      const Clause& x = clauses_[a];
      const Clause& y = clauses_[b];
      if (x.lbd != y.lbd) return x.lbd > y.lbd;
      if (x.activity != y.activity) return x.activity < y.activity;
      return a < b;
    });
    for (std::size_t i = 0; i < cand.size() / 2; ++i) {
      Clause& c = clauses_[cand[i]];
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
      --num_learnts_;
    }
  }

  // Max-heap on activity, ties broken towards the lower variable index.
  bool heap_less(std::uint32_t a, std::uint32_t b) const {
    if (activity_[a] != activity_[b]) return activity_[a] > activity_[b];
    return a < b;
  }
  void heap_up(std::uint32_t i) {
    std::uint32_t v = heap_[i];
    while (i > 0) {
      std::uint32_t parent = (i - 1) / 2;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_pos_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }
  void heap_down(std::uint32_t i) {
    std::uint32_t v = heap_[i];
    auto n = static_cast<std::uint32_t>(heap_.size());
    while (true) {
      std::uint32_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
      if (!heap_less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      heap_pos_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }
  void heap_insert(std::uint32_t v) {
    heap_pos_[v] = static_cast<std::uint32_t>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_pos_[v]);
  }
  std::uint32_t heap_pop() {
    std::uint32_t top = heap_[0];
    heap_pos_[top] = kNone;
    std::uint32_t last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_pos_[last] = 0;
      heap_down(0);
    }
    return top;
  }

  Lit pick_branch() {
    while (!heap_.empty()) {
      std::uint32_t v = heap_pop();
      if (assign_[v] == 0) return 2 * v + polarity_[v];
    }
    return kNone;
  }

  bool search() {
    if (propagate() != kNone) return false;
    double restart_limit = 100;
    std::uint64_t conflicts_here = 0;
    double max_learnts = std::max<double>(static_cast<double>(clauses_.size()) / 3.0, 2000.0);
    std::vector<Lit> learnt;
    while (true) {
      std::uint32_t confl = propagate();
      if (confl != kNone) {
        ++stats_.conflicts;
        ++conflicts_here;
        if (decision_level() == 0) return false;
        std::uint32_t bt = 0;
        analyze(confl, learnt, bt);
        backtrack(bt);
        ++stats_.learned;
        if (opts_.record_learned) {
          std::vector<int> d;
          for (Lit l : learnt) d.push_back(to_dimacs(l));
          learned_out_.push_back(std::move(d));
        }
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNone);
        } else {
          std::uint32_t lbd = lbd_of(learnt);
          std::uint32_t cref = attach(learnt, true, lbd);
          bump_clause(clauses_[cref]);
          enqueue(learnt[0], cref);
        }
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
        continue;
      }
      if (static_cast<double>(conflicts_here) >= restart_limit) {
        ++stats_.restarts;
        conflicts_here = 0;
        restart_limit *= 1.5;
        backtrack(0);
        continue;
      }
      if (static_cast<double>(num_learnts_) >= max_learnts + static_cast<double>(trail_.size())) {
        reduce_db();
        max_learnts *= 1.1;
      }
      Lit next = pick_branch();
      if (next == kNone) return true;
      ++stats_.decisions;
      trail_lim_.push_back(static_cast<std::uint32_t>(trail_.size()));
      enqueue(next, kNone);
    }
  }

  SatOptions opts_;
  std::uint32_t n_ = 0;
  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<Watch>> watches_;
  std::vector<int> assign_;
  std::vector<std::uint32_t> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<std::uint8_t> polarity_;
  std::vector<double> activity_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint32_t> heap_;
  std::vector<std::uint32_t> heap_pos_;
  std::vector<Lit> trail_;
  std::vector<std::uint32_t> trail_lim_;
  std::size_t qhead_ = 0;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  std::size_t num_learnts_ = 0;
  std::vector<std::uint64_t> lbd_mark_;
  std::uint64_t lbd_stamp_ = 0;
  SatStats stats_;
  std::vector<std::vector<int>> learned_out_;
};

}  // namespace

SatResult cdcl_solve(const Cnf& cnf, const SatOptions& opts) {
  Solver s(cnf, opts);
  return s.solve();
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& model) {
  for (const auto& c : cnf.clauses) {
    bool ok = false;
    for (int l : c) {
      auto v = static_cast<std::size_t>(std::abs(l));
      if (v < model.size() && model[v] == (l > 0)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace cruxlite
