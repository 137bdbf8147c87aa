#include "sat.hpp"

#include <algorithm>
#include <cstdlib>

namespace sublock {

const char *to_string(SatStatus s) {
  switch (s) {
  case SatStatus::Sat: return "SAT";
  case SatStatus::Unsat: return "UNSAT";
  case SatStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

void CnfFormula::add_clause(std::span<const int> lits) {
  if (lits.empty())
    throw Error(ErrorCode::InvalidArgument, "empty clause");
  for (int l : lits)
    if (l == 0 || std::abs(l) > num_vars_)
      throw Error(ErrorCode::InvalidArgument, "literal " + std::to_string(l) + " references an undeclared variable");
  clauses_.emplace_back(lits.begin(), lits.end());
}

bool CnfFormula::satisfied_by(const std::vector<bool> &model) const {
  for (const auto &c : clauses_) {
    bool sat = false;
    for (int l : c) {
      bool v = model.at(static_cast<std::size_t>(std::abs(l) - 1));
      if ((l > 0) == v) {
        sat = true;
        break;
      }
    }
    if (!sat)
      return false;
  }
  return true;
}

std::string CnfFormula::to_dimacs() const {
  std::string s = "p cnf " + std::to_string(num_vars_) + " " + std::to_string(clauses_.size()) + "\n";
  for (const auto &c : clauses_) {
    for (int l : c) {
      s += std::to_string(l);
      s += ' ';
    }
    s += "0\n";
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i)
    r *= y;
  return r;
}

} // namespace

Solver::Solver(Branching branching) : branching_(branching) {}

Solver::Lit Solver::make_lit(int dimacs) {
  auto v = static_cast<std::uint32_t>(std::abs(dimacs) - 1);
  return (v << 1) | (dimacs < 0 ? 1U : 0U);
}

int Solver::new_var() {
  auto v = static_cast<std::uint32_t>(assigns_.size());
  assigns_.push_back(0);
  level_.push_back(0);
  reason_.push_back(no_reason);
  seen_.push_back(0);
  activity_.push_back(0);
  phase_.push_back(false);
  heap_index_.push_back(-1);
  watches_.emplace_back();
  watches_.emplace_back();
  if (branching_ == Branching::Activity)
    heap_insert(v);
  return static_cast<int>(v) + 1;
}

void Solver::add_clause(std::span<const int> in) {
  if (!ok_)
    return;
  if (decision_level() != 0)
    backtrack(0);
  std::vector<Lit> lits;
  lits.reserve(in.size());
  for (int l : in) {
    if (l == 0 || std::abs(l) > num_vars())
      throw Error(ErrorCode::InvalidArgument, "literal " + std::to_string(l) + " references an undeclared variable");
    lits.push_back(make_lit(l));
  }
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  std::size_t j = 0;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i + 1 < lits.size() && (lits[i] ^ 1U) == lits[i + 1])
      return; // tautology
    std::int8_t v = value(lits[i]);
    if (v > 0)
      return;
    if (v == 0)
      lits[j++] = lits[i];
  }
  lits.resize(j);
  if (lits.empty()) {
    ok_ = false;
    return;
  }
  if (lits.size() == 1) {
    enqueue(lits[0], no_reason);
    if (propagate() != no_reason)
      ok_ = false;
    return;
  }
  attach(std::move(lits), false);
}

std::uint32_t Solver::attach(std::vector<Lit> lits, bool learnt) {
  auto cref = static_cast<std::uint32_t>(clauses_.size());
  watches_[lits[0]].push_back({cref, lits[1]});
  watches_[lits[1]].push_back({cref, lits[0]});
  Clause c;
  c.lits = std::move(lits);
  c.learnt = learnt;
  clauses_.push_back(std::move(c));
  if (learnt)
    ++num_learnts_;
  return cref;
}

void Solver::enqueue(Lit l, std::uint32_t reason) {
  std::uint32_t v = var_of(l);
  assigns_[v] = (l & 1U) ? -1 : 1;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

std::uint32_t Solver::propagate() {
  std::uint32_t confl = no_reason;
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit false_lit = p ^ 1U;
    std::vector<Watcher> &ws = watches_[false_lit];
    std::size_t i = 0, j = 0;
    const std::size_t n = ws.size();
    while (i < n) {
      Watcher w = ws[i++];
      if (value(w.blocker) > 0) {
        ws[j++] = w;
        continue;
      }
      Clause &c = clauses_[w.cref];
      if (c.deleted)
        continue;
      if (c.lits[0] == false_lit)
        std::swap(c.lits[0], c.lits[1]);
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
      if (moved)
        continue;
      ws[j++] = {w.cref, first};
      if (value(first) < 0) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < n)
          ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl != no_reason)
      break;
  }
  return confl;
}

void Solver::analyze(std::uint32_t confl, std::vector<Lit> &learnt, int &bt_level, std::uint32_t &lbd) {
  learnt.clear();
  learnt.push_back(0);
  int path = 0;
  Lit p = 0;
  bool have_p = false;
  std::size_t idx = trail_.size();
  std::vector<std::uint32_t> to_clear;
  do {
    Clause &c = clauses_[confl];
    if (c.learnt) {
      c.activity += clause_inc_;
      if (c.activity > 1e20) {
        for (auto &cl : clauses_)
          if (cl.learnt)
            cl.activity *= 1e-20;
        clause_inc_ *= 1e-20;
      }
    }
    for (std::size_t j = have_p ? 1 : 0; j < c.lits.size(); ++j) {
      Lit q = c.lits[j];
      std::uint32_t v = var_of(q);
      if (seen_[v] || level_[v] == 0)
        continue;
      seen_[v] = 1;
      to_clear.push_back(v);
      bump_var(v);
      if (level_[v] >= decision_level())
        ++path;
      else
        learnt.push_back(q);
    }
    do {
      --idx;
    } while (!seen_[var_of(trail_[idx])]);
    p = trail_[idx];
    have_p = true;
    confl = reason_[var_of(p)];
    seen_[var_of(p)] = 0;
    --path;
  } while (path > 0);
  learnt[0] = p ^ 1U;

  // drop literals implied by the rest of the clause through their reasons
  for (std::size_t i = 1; i < learnt.size(); ++i)
    seen_[var_of(learnt[i])] = 1;
  std::size_t j = 1;
  for (std::size_t i = 1; i < learnt.size(); ++i) {
    std::uint32_t r = reason_[var_of(learnt[i])];
    bool redundant = r != no_reason;
    if (redundant) {
      const Clause &c = clauses_[r];
      for (std::size_t k = 1; k < c.lits.size() && redundant; ++k) {
        std::uint32_t v = var_of(c.lits[k]);
        redundant = seen_[v] || level_[v] == 0;
      }
    }
    if (!redundant)
      learnt[j++] = learnt[i];
  }
  for (std::size_t i = 1; i < learnt.size(); ++i)
    seen_[var_of(learnt[i])] = 0;
  learnt.resize(j);
  for (std::uint32_t v : to_clear)
    seen_[v] = 0;

  bt_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t i = 2; i < learnt.size(); ++i)
      if (level_[var_of(learnt[i])] > level_[var_of(learnt[max_i])])
        max_i = i;
    std::swap(learnt[1], learnt[max_i]);
    bt_level = level_[var_of(learnt[1])];
  }
  std::vector<int> levels;
  for (Lit l : learnt)
    levels.push_back(level_[var_of(l)]);
  std::sort(levels.begin(), levels.end());
  lbd = static_cast<std::uint32_t>(std::unique(levels.begin(), levels.end()) - levels.begin());
}

void Solver::backtrack(int level) {
  if (decision_level() <= level)
    return;
  for (std::size_t i = trail_.size(); i-- > trail_lim_[static_cast<std::size_t>(level)];) {
    std::uint32_t v = var_of(trail_[i]);
    phase_[v] = (trail_[i] & 1U) == 0;
    assigns_[v] = 0;
    reason_[v] = no_reason;
    if (branching_ == Branching::Activity)
      heap_insert(v);
    else
      next_var_ = std::min(next_var_, v);
  }
  trail_.resize(trail_lim_[static_cast<std::size_t>(level)]);
  trail_lim_.resize(static_cast<std::size_t>(level));
  qhead_ = trail_.size();
}

std::optional<Solver::Lit> Solver::pick_branch() {
  if (branching_ == Branching::LowestIndex) {
    while (next_var_ < assigns_.size() && assigns_[next_var_] != 0)
      ++next_var_;
    if (next_var_ == assigns_.size())
      return std::nullopt;
    return (next_var_ << 1) | 1U; // false first
  }
  while (!heap_.empty()) {
    std::uint32_t v = heap_pop();
    if (assigns_[v] == 0)
      return (v << 1) | (phase_[v] ? 0U : 1U);
  }
  return std::nullopt;
}

void Solver::bump_var(std::uint32_t v) {
  if (branching_ != Branching::Activity)
    return;
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (auto &a : activity_)
      a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_index_[v] >= 0)
    heap_up(static_cast<std::size_t>(heap_index_[v]));
}

void Solver::heap_insert(std::uint32_t v) {
  if (heap_index_[v] >= 0)
    return;
  heap_index_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

// Higher activity first; ties go to the lower variable index.
void Solver::heap_up(std::size_t i) {
  std::uint32_t v = heap_[i];
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
  };
  while (i > 0) {
    std::size_t parent = (i - 1) / 2;
    if (!better(v, heap_[parent]))
      break;
    heap_[i] = heap_[parent];
    heap_index_[heap_[i]] = static_cast<int>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_index_[v] = static_cast<int>(i);
}

void Solver::heap_down(std::size_t i) {
  std::uint32_t v = heap_[i];
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
  };
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size())
      break;
    if (child + 1 < heap_.size() && better(heap_[child + 1], heap_[child]))
      ++child;
    if (!better(heap_[child], v))
      break;
    heap_[i] = heap_[child];
    heap_index_[heap_[i]] = static_cast<int>(i);
    i = child;
  }
  heap_[i] = v;
  heap_index_[v] = static_cast<int>(i);
}

std::uint32_t Solver::heap_pop() {
  std::uint32_t top = heap_[0];
  heap_index_[top] = -1;
  std::uint32_t last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_index_[last] = 0;
    heap_down(0);
  }
  return top;
}

void Solver::reduce_learnts() {
  std::vector<std::uint32_t> cands;
  for (std::uint32_t i = 0; i < clauses_.size(); ++i) {
    const Clause &c = clauses_[i];
    if (!c.learnt || c.deleted || c.lbd <= 2)
      continue;
    Lit first = c.lits[0];
    if (value(first) > 0 && reason_[var_of(first)] == i)
      continue; // currently a reason
    cands.push_back(i);
  }
  std::sort(cands.begin(), cands.end(), [&](std::uint32_t a, std::uint32_t b) {
    const Clause &x = clauses_[a], &y = clauses_[b];
    if (x.lbd != y.lbd)
      return x.lbd > y.lbd;
    if (x.activity != y.activity)
      return x.activity < y.activity;
    return a < b;
  });
  for (std::size_t i = 0; i < cands.size() / 2; ++i) {
    Clause &c = clauses_[cands[i]];
    c.deleted = true;
    c.lits.clear();
    c.lits.shrink_to_fit();
    --num_learnts_;
  }
  for (auto &ws : watches_)
    ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher &w) { return clauses_[w.cref].deleted; }),
             ws.end());
}

bool Solver::check_model() const {
  for (const Clause &c : clauses_) {
    if (c.learnt || c.deleted)
      continue;
    bool sat = false;
    for (Lit l : c.lits)
      if (model_[var_of(l)] == ((l & 1U) == 0)) {
        sat = true;
        break;
      }
    if (!sat)
      return false;
  }
  // level-0 units are not stored as clauses; they are part of the trail
  return true;
}

SatStatus Solver::solve(std::span<const int> assumptions_in, std::int64_t conflict_budget) {
  model_.clear();
  if (!ok_)
    return SatStatus::Unsat;
  backtrack(0);
  std::vector<Lit> assumptions;
  for (int a : assumptions_in) {
    if (a == 0 || std::abs(a) > num_vars())
      throw Error(ErrorCode::InvalidArgument, "assumption " + std::to_string(a) + " references an undeclared variable");
    assumptions.push_back(make_lit(a));
  }
  if (propagate() != no_reason) {
    ok_ = false;
    return SatStatus::Unsat;
  }

  std::vector<Lit> learnt;
  std::uint64_t call_conflicts = 0;
  int restarts = 0;
  for (;;) {
    const double limit = luby(2, restarts++) * 100;
    std::uint64_t restart_conflicts = 0;
    for (;;) {
      std::uint32_t confl = propagate();
      if (confl != no_reason) {
        ++stats_conflicts_;
        ++call_conflicts;
        ++restart_conflicts;
        if (decision_level() == 0) {
          ok_ = false;
          return SatStatus::Unsat;
        }
        int bt = 0;
        std::uint32_t lbd = 0;
        analyze(confl, learnt, bt, lbd);
        backtrack(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], no_reason);
        } else {
          std::uint32_t cref = attach(learnt, true);
          clauses_[cref].lbd = lbd;
          clauses_[cref].activity = clause_inc_;
          enqueue(learnt[0], cref);
        }
        var_inc_ /= 0.95;
        clause_inc_ /= 0.999;
        continue;
      }
      if (conflict_budget >= 0 && call_conflicts > static_cast<std::uint64_t>(conflict_budget)) {
        backtrack(0);
        return SatStatus::Unknown;
      }
      if (static_cast<double>(restart_conflicts) >= limit) {
        backtrack(0);
        break;
      }
      if (static_cast<double>(num_learnts_) >= max_learnts_ + static_cast<double>(trail_.size())) {
        reduce_learnts();
        max_learnts_ *= 1.1;
      }

      std::optional<Lit> next;
      while (static_cast<std::size_t>(decision_level()) < assumptions.size()) {
        Lit a = assumptions[static_cast<std::size_t>(decision_level())];
        if (value(a) > 0) {
          trail_lim_.push_back(trail_.size()); // already true: empty level
        } else if (value(a) < 0) {
          backtrack(0);
          return SatStatus::Unsat;
        } else {
          next = a;
          break;
        }
      }
      if (!next) {
        next = pick_branch();
        if (!next) {
          model_.assign(assigns_.size(), false);
          for (std::size_t v = 0; v < assigns_.size(); ++v)
            model_[v] = assigns_[v] > 0;
          if (!check_model())
            throw Error(ErrorCode::Internal, "solver model violates a clause");
          backtrack(0);
          return SatStatus::Sat;
        }
        ++stats_decisions_;
      }
      trail_lim_.push_back(trail_.size());
      enqueue(*next, no_reason);
    }
  }
}

bool Solver::model_value(int lit) const {
  bool v = model_.at(static_cast<std::size_t>(std::abs(lit) - 1));
  return lit > 0 ? v : !v;
}

SatResult solve(const CnfFormula &f, std::span<const int> assumptions, Solver::Branching branching) {
  Solver s(branching);
  for (int v = 0; v < f.num_vars(); ++v)
    s.new_var();
  for (const auto &c : f.clauses())
    s.add_clause(c);
  SatResult r;
  r.status = s.solve(assumptions);
  if (r.status == SatStatus::Sat) {
    r.model = s.model();
    if (!f.satisfied_by(r.model))
      throw Error(ErrorCode::Internal, "model does not satisfy the formula");
  }
  return r;
}

} // namespace sublock
