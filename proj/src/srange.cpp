#include "umrow/srange.hpp"

#include "umrow/calculus.hpp"

#include <algorithm>
#include <map>

namespace umrow {

SrVerdict sr_condition(RingPtr ring, const Ideal& ideal, int n,
                       const RowBudget& budget) {
  if (n < 1 || n + 1 > kMaxMatDim) throw row_error("sr_condition: n out of range");
  SrVerdict verdict;
  verdict.n = n;
  verdict.holds = true;

  std::vector<UmRow> rows = enumerate_um(ring, n + 1, ideal, budget);
  const FiniteRing& r = *ring;
  std::vector<Elem> allR(r.size());
  for (Elem x = 0; x < r.size(); x++) allR[x] = x;

  // unimodularity mask, memoized by sorted entry multiset
  std::map<std::vector<Elem>, bool> memo;
  auto shortened_unimodular = [&](const RowVec& s) {
    std::vector<Elem> key(s.e.begin(), s.e.begin() + s.n);
    std::sort(key.begin(), key.end());
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool um = span_mask(r, key, allR)[r.one()] != 0;
    memo.emplace(std::move(key), um);
    return um;
  };

  for (const UmRow& row : rows) {
    verdict.rows_checked++;
    const RowVec& v = row.entries;
    Elem last = v.e[n];
    bool found = false;
    std::vector<std::size_t> digit(n, 0);
    while (!found) {
      RowVec s;
      s.ring = &r;
      s.n = std::uint8_t(n);
      for (int i = 0; i < n; i++)
        s.e[i] = r.add(v.e[i], r.mul(ideal.members[digit[i]], last));
      if (shortened_unimodular(s)) {
        found = true;
        break;
      }
      int k = 0;
      while (k < n) {
        digit[k]++;
        if (digit[k] < ideal.members.size()) break;
        digit[k] = 0;
        k++;
      }
      if (k == n) break;
    }
    if (!found) {
      verdict.holds = false;
      verdict.counterexample = v;
      break;
    }
  }
  return verdict;
}

StableRangeReport stable_range(RingPtr ring, const Ideal& ideal, int probe_limit,
                               const RowBudget& budget) {
  StableRangeReport rep;
  rep.ring = ring;
  rep.ideal = ideal;
  rep.sr = probe_limit + 1;
  rep.sr_exact = false;
  for (int n = 1; n <= probe_limit; n++) {
    rep.per_n.push_back(sr_condition(ring, ideal, n, budget));
    if (rep.per_n.back().holds && !rep.sr_exact) {
      rep.sr = n;
      rep.sr_exact = true;
    }
  }
  rep.sd = rep.sr - 1;
  return rep;
}

std::vector<Ideal> all_ideals(RingPtr ring) {
  if (ring->size() > 16)
    throw budget_error("ideal lattice enumeration capped at |R| <= 16");
  std::map<std::vector<char>, Ideal> seen;
  auto add = [&](Ideal id) {
    seen.emplace(id.mask, std::move(id));
  };
  add(zero_ideal(ring));
  for (Elem x = 0; x < ring->size(); x++) add(ideal_generate(ring, {x}));
  // close the lattice under sums; every ideal is a finite sum of
  // principal ideals, so the fixpoint is the complete lattice
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<Ideal> current;
    current.reserve(seen.size());
    for (auto& [mask, id] : seen) current.push_back(id);
    for (std::size_t i = 0; i < current.size(); i++)
      for (std::size_t j = i + 1; j < current.size(); j++) {
        std::vector<Elem> gens = current[i].gens;
        gens.insert(gens.end(), current[j].gens.begin(), current[j].gens.end());
        Ideal sum = ideal_generate(ring, gens);
        if (!seen.count(sum.mask)) {
          add(sum);
          grew = true;
        }
      }
  }
  std::vector<Ideal> out;
  for (auto& [mask, id] : seen) out.push_back(id);
  std::sort(out.begin(), out.end(), [](const Ideal& a, const Ideal& b) {
    if (a.members.size() != b.members.size())
      return a.members.size() < b.members.size();
    return a.members < b.members;
  });
  return out;
}

SrLawsResult sr_laws_check(RingPtr ring, int probe_limit, const RowBudget& budget) {
  SrLawsResult res;
  std::vector<Ideal> ideals = all_ideals(ring);
  res.ideals_found = ideals.size();

  std::vector<StableRangeReport> reports;
  for (const Ideal& id : ideals)
    reports.push_back(stable_range(ring, id, probe_limit, budget));

  auto subset = [&](const Ideal& a, const Ideal& b) {
    for (Elem m : a.members)
      if (!b.contains(m)) return false;
    return true;
  };

  for (std::size_t i = 0; i < ideals.size(); i++) {
    for (std::size_t j = 0; j < ideals.size(); j++) {
      if (i == j || !subset(ideals[i], ideals[j])) continue;
      res.pairs_checked++;
      if (reports[i].sr > reports[j].sr) {
        res.monotonic = false;
        res.failures.push_back("Sr(" + ideals[i].describe() + ") > Sr(" +
                               ideals[j].describe() + ")");
      }
      // Sr(J/I) <= Sr(J), computed in R/I
      QuotientResult q = quotient_ring(ring, ideals[i]);
      Ideal jq = ideal_image(q.proj, ideals[j]);
      StableRangeReport rq = stable_range(q.ring, jq, probe_limit, budget);
      if (rq.sr > reports[j].sr) {
        res.quotient_law = false;
        res.failures.push_back("Sr(J/I) > Sr(J) for I=" + ideals[i].describe() +
                               " J=" + ideals[j].describe());
      }
    }
  }

  for (std::size_t i = 0; i < ideals.size(); i++)
    for (int n = 1; n < probe_limit; n++) {
      if (reports[i].per_n[n - 1].holds && !reports[i].per_n[n].holds) {
        res.induction_law = false;
        res.failures.push_back("Sr_" + std::to_string(n) + " holds but Sr_" +
                               std::to_string(n + 1) + " fails for " +
                               ideals[i].describe());
      }
    }
  return res;
}

}  // namespace umrow
