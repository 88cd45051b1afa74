#pragma once

#include "rows.hpp"

namespace umrow {

struct SrVerdict {
  int n = 0;
  bool holds = false;
  std::size_t rows_checked = 0;
  std::optional<RowVec> counterexample;
};

struct StableRangeReport {
  RingPtr ring;
  Ideal ideal;
  std::vector<SrVerdict> per_n;  // n = 1..probe_limit
  int sr = 0;                    // least n with Sr_n; probe_limit+1 if none held
  int sd = -1;                   // sr - 1
  bool sr_exact = false;         // false when no probed n held
};

// Sr_n(I): every row of Um_{n+1}(R,I) shortens to Um_n(R,I) by adding
// c_i * a_{n+1}, c_i in I. Exhaustive search in index order.
SrVerdict sr_condition(RingPtr ring, const Ideal& ideal, int n,
                       const RowBudget& budget = {});

StableRangeReport stable_range(RingPtr ring, const Ideal& ideal, int probe_limit = 4,
                               const RowBudget& budget = {});

// Every ideal of the ring: principal ideals closed under pairwise sums to
// a fixpoint (complete, since every ideal of a finite ring is a finite sum
// of principal ideals). Requires |R| <= 16.
std::vector<Ideal> all_ideals(RingPtr ring);

struct SrLawsResult {
  bool monotonic = true;       // I c J => Sr(I) <= Sr(J)
  bool quotient_law = true;    // Sr(J/I) <= Sr(J)
  bool induction_law = true;   // Sr_n => Sr_{n+1}, n = 1..3
  std::size_t pairs_checked = 0;
  std::size_t ideals_found = 0;
  std::vector<std::string> failures;
  bool pass() const { return monotonic && quotient_law && induction_law; }
};

SrLawsResult sr_laws_check(RingPtr ring, int probe_limit = 4,
                           const RowBudget& budget = {});

}  // namespace umrow
