#pragma once

#include "calculus.hpp"

namespace umrow {

// Class-level map between orbit spaces induced by a ring hom on entries
// (or by row identity when hom is null, for inclusions relative ->
// absolute over the same ring). Well-definedness is checked exhaustively
// over every member of every source class.
struct OrbitMapReport {
  std::vector<std::uint32_t> class_map;
  bool well_defined = true;
  bool total = true;  // every image row landed in the target row set
  bool injective = false;
  bool surjective = false;
  std::vector<std::string> issues;

  bool bijective() const { return well_defined && total && injective && surjective; }
};

OrbitMapReport induced_orbit_map(const OrbitSpace& src, const OrbitSpace& dst,
                                 const RingHom* hom);

// pi o section == identity on the target of pi.
bool verify_retract(const RingHom& pi, const RingHom& section);

// Searches for a ring hom s : Q -> R with proj o s = id_Q (backtracking
// over the fibers of proj in index order). Q = proj.dst.
std::optional<RingHom> find_section(const RingHom& proj);

// E_n(B,J) == E_n(B) cap SL_n(B,J), with SL_n(B,J) enumerated on the fly
// from the congruence pattern and E_n(B)-membership decided by the
// materialized relative group plus elementary-reduction certificates for
// anything outside it.
struct SuslinCheckOutcome {
  bool equal = false;
  std::size_t sl_count = 0;
  std::size_t rel_count = 0;
  std::size_t undecided = 0;  // SL elements with no reduction certificate
  std::vector<std::string> issues;
};
SuslinCheckOutcome suslin_equality_check(RingPtr B, const Ideal& J, int n,
                                         const MatGroup& e_rel,
                                         const GroupBudget& budget = {});

// Lemma "trivial absolute => trivial relative" under a retract section of
// the quotient map: for every relative row whose absolute class is
// trivial, its relative class must be trivial.
struct LemmaLOutcome {
  bool applicable = false;  // a section was found
  bool holds = true;
  std::size_t rows_checked = 0;
  std::vector<std::string> issues;
};
LemmaLOutcome lemma_l_check(const OrbitSpace& relative_space,
                            const OrbitSpace& absolute_space, const RingHom& proj);

}  // namespace umrow
