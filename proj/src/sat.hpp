#pragma once

#include "common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sublock {

/// Anything clauses can be written to. Literals are DIMACS-style nonzero
/// integers; variables are numbered from 1.
class ClauseSink {
public:
  virtual ~ClauseSink() = default;
  virtual int new_var() = 0;
  virtual void add_clause(std::span<const int> lits) = 0;
  void add_clause(std::initializer_list<int> lits) { add_clause(std::span<const int>(lits.begin(), lits.size())); }
};

class CnfFormula : public ClauseSink {
public:
  int new_var() override { return ++num_vars_; }
  using ClauseSink::add_clause;
  void add_clause(std::span<const int> lits) override;

  int num_vars() const { return num_vars_; }
  const std::vector<std::vector<int>> &clauses() const { return clauses_; }
  /// True if every clause has a literal made true by `model` (index var-1).
  bool satisfied_by(const std::vector<bool> &model) const;
  std::string to_dimacs() const;

private:
  int num_vars_ = 0;
  std::vector<std::vector<int>> clauses_;
};

enum class SatStatus { Sat, Unsat, Unknown };
const char *to_string(SatStatus s);

struct SatResult {
  SatStatus status = SatStatus::Unknown;
  /// Total assignment indexed by var-1 when status is Sat.
  std::vector<bool> model;
};

/// Incremental CDCL solver: two watched literals, first-UIP learning,
/// Luby restarts and learnt-clause reduction. Every model is checked against
/// the problem clauses before it is reported.
class Solver : public ClauseSink {
public:
  enum class Branching {
    /// Lowest-numbered unassigned variable, false first.
    LowestIndex,
    /// Activity-ordered (VSIDS) with phase saving; still deterministic.
    Activity,
  };

  explicit Solver(Branching branching = Branching::LowestIndex);

  int new_var() override;
  using ClauseSink::add_clause;
  void add_clause(std::span<const int> lits) override;
  int num_vars() const { return static_cast<int>(assigns_.size()); }

  /// A negative budget means unlimited; Unknown is returned when exhausted.
  SatStatus solve(std::span<const int> assumptions = {}, std::int64_t conflict_budget = -1);
  SatStatus solve(std::initializer_list<int> assumptions, std::int64_t conflict_budget = -1) {
    return solve(std::span<const int>(assumptions.begin(), assumptions.size()), conflict_budget);
  }

  /// Value of a literal in the last model.
  bool model_value(int lit) const;
  const std::vector<bool> &model() const { return model_; }
  /// False once the clause set is unsatisfiable without assumptions.
  bool okay() const { return ok_; }

  std::uint64_t conflicts() const { return stats_conflicts_; }
  std::uint64_t decisions() const { return stats_decisions_; }

private:
  using Lit = std::uint32_t;
  static constexpr std::uint32_t no_reason = ~0U;

  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    std::uint32_t lbd = 0;
    double activity = 0;
  };
  struct Watcher {
    std::uint32_t cref;
    Lit blocker;
  };

  static Lit make_lit(int dimacs);
  static std::uint32_t var_of(Lit l) { return l >> 1; }
  std::int8_t value(Lit l) const {
    std::int8_t a = assigns_[l >> 1];
    return (l & 1U) ? static_cast<std::int8_t>(-a) : a;
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit l, std::uint32_t reason);
  std::uint32_t propagate();
  void analyze(std::uint32_t confl, std::vector<Lit> &learnt, int &bt_level, std::uint32_t &lbd);
  void backtrack(int level);
  std::optional<Lit> pick_branch();
  std::uint32_t attach(std::vector<Lit> lits, bool learnt);
  void reduce_learnts();
  bool check_model() const;

  void bump_var(std::uint32_t v);
  void heap_insert(std::uint32_t v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  std::uint32_t heap_pop();

  Branching branching_;
  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<std::uint8_t> seen_;
  std::uint32_t next_var_ = 0;

  std::vector<double> activity_;
  std::vector<bool> phase_;
  std::vector<std::uint32_t> heap_;
  std::vector<int> heap_index_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;

  std::size_t num_learnts_ = 0;
  double max_learnts_ = 4000;
  std::vector<bool> model_;

  std::uint64_t stats_conflicts_ = 0;
  std::uint64_t stats_decisions_ = 0;
};

/// One-shot solve of a formula.
SatResult solve(const CnfFormula &f, std::span<const int> assumptions = {},
                Solver::Branching branching = Solver::Branching::LowestIndex);

} // namespace sublock
