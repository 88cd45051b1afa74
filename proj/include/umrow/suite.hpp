#pragma once

#include <future>
#include <map>
#include <mutex>

#include "cache.hpp"
#include "excision_maps.hpp"
#include "report.hpp"
#include "srange.hpp"

namespace umrow {

struct SuiteBudgets {
  RingBudget ring;
  GroupBudget group;
  RowBudget rows;
};

// Memoized shared artifacts for one verification job. Thread-safe:
// builders run behind shared futures, completed values are immutable.
class Artifacts {
public:
  explicit Artifacts(SuiteBudgets budgets, GroupCache* cache = nullptr)
      : budgets_(budgets), cache_(cache) {}

  const SuiteBudgets& budgets() const { return budgets_; }

  RingPtr ring(const RingSpec& spec);
  // Shared structured-ring constructions; one instance per (base, ideal)
  // so ring pointer identity holds across checks.
  std::shared_ptr<const ExcisionResult> excision(RingPtr base, const Ideal& ideal);
  std::shared_ptr<const ZModelResult> zmodel(const Ideal& ideal, unsigned k);
  std::shared_ptr<const QuotientResult> quotient(RingPtr base, const Ideal& ideal);
  std::shared_ptr<const MatGroup> elementary(RingPtr ring, int n);
  // method: CrossValidated for corpus pairs, NormalClosure for the rest
  std::shared_ptr<const MatGroup> relative(RingPtr ring, const Ideal& ideal, int n,
                                           RelativeMethod method);
  // generators-only Vaserstein set (no materialization)
  std::shared_ptr<const MatGroup> relative_acting(RingPtr ring, const Ideal& ideal,
                                                  int n);
  std::shared_ptr<const OrbitSpace> absolute_space(RingPtr ring, int n);
  // materialized=true acts by (and stores) the materialized relative
  // group; false acts by the generators-only set
  std::shared_ptr<const OrbitSpace> relative_space(RingPtr ring, const Ideal& ideal,
                                                   int n, bool materialized);
  std::shared_ptr<const GroupTable> table(std::shared_ptr<const OrbitSpace> space);

  std::size_t cache_hits() const { return cache_ ? cache_->hits() : 0; }
  std::size_t cache_misses() const { return cache_ ? cache_->misses() : 0; }

private:
  template <class T>
  using Memo = std::map<std::string, std::shared_future<std::shared_ptr<const T>>>;

  template <class T, class Builder>
  std::shared_ptr<const T> get(Memo<T>& memo, const std::string& key, Builder build);

  SuiteBudgets budgets_;
  GroupCache* cache_;
  std::mutex mu_;
  Memo<FiniteRing> rings_;
  Memo<ExcisionResult> excisions_;
  Memo<ZModelResult> zmodels_;
  Memo<QuotientResult> quotients_;
  Memo<MatGroup> groups_;
  Memo<OrbitSpace> spaces_;
  Memo<GroupTable> tables_;
};

struct JobContext {
  RingSpec ring_spec;
  std::vector<std::string> ideal_gens;  // element literals
  bool ideal_is_unit = false;           // selector "R"
  int n = 3;
  unsigned k = 0;  // 0 -> char(R)
  SuiteBudgets budgets;
};

struct CheckOutcome {
  VerdictReport report;
  double elapsed_ms = 0;
};

struct SuiteResult {
  std::vector<CheckOutcome> checks;
  std::size_t passed = 0, failed = 0, skipped = 0;
  bool budget_partial = false;
};

// Check names of a suite, in execution/report order.
std::vector<std::string> suite_check_names(const std::string& suite);

// Runs the named suite for one (ring, ideal, n, k) job. `jobs` bounds the
// number of concurrently running checkers; reports are assembled in the
// fixed suite order regardless.
SuiteResult run_suite(const std::string& suite, const JobContext& job,
                      Artifacts& artifacts, int jobs = 1);

// The verification corpus: every listed base ring with all of its ideals.
struct CorpusEntry {
  std::string name;
  RingSpec spec;
};
std::vector<CorpusEntry> corpus_rings();

}  // namespace umrow
