#include "umrow/excision_maps.hpp"

#include <algorithm>

namespace umrow {

OrbitMapReport induced_orbit_map(const OrbitSpace& src, const OrbitSpace& dst,
                                 const RingHom* hom) {
  if (hom) {
    if (hom->src.get() != src.ring.get() || hom->dst.get() != dst.ring.get())
      throw row_error("orbit map: hom endpoints do not match the spaces");
  } else if (src.ring.get() != dst.ring.get()) {
    throw row_error("orbit map: inclusion needs both spaces over one ring");
  }

  OrbitMapReport rep;
  rep.class_map.assign(src.classes.size(), 0xffffffffu);

  for (std::uint32_t id = 0; id < src.rows.size(); id++) {
    RowVec img = src.rows[id].entries;
    if (hom)
      for (int k = 0; k < img.n; k++) img.e[k] = (*hom)(img.e[k]);
    img.ring = dst.ring.get();
    if (!dst.has_row(img)) {
      rep.total = false;
      rep.well_defined = false;
      if (rep.issues.size() < 5)
        rep.issues.push_back("image row " + format_row(img) +
                             " is not in the target space");
      continue;
    }
    std::uint32_t target_cls = dst.class_of_row(img);
    std::uint32_t src_cls = src.class_ids[id];
    if (rep.class_map[src_cls] == 0xffffffffu) {
      rep.class_map[src_cls] = target_cls;
    } else if (rep.class_map[src_cls] != target_cls) {
      rep.well_defined = false;
      if (rep.issues.size() < 5)
        rep.issues.push_back("class " + std::to_string(src_cls) +
                             " maps to two different target classes");
    }
  }

  std::vector<char> hit(dst.classes.size(), 0);
  bool inj = true;
  for (std::uint32_t c : rep.class_map) {
    if (c == 0xffffffffu) continue;
    if (hit[c]) inj = false;
    hit[c] = 1;
  }
  rep.injective = inj;
  rep.surjective =
      std::all_of(hit.begin(), hit.end(), [](char h) { return h != 0; });
  return rep;
}

bool verify_retract(const RingHom& pi, const RingHom& section) {
  if (pi.dst.get() != section.src.get() || pi.src.get() != section.dst.get())
    return false;
  for (Elem x = 0; x < section.src->size(); x++)
    if (pi(section(x)) != x) return false;
  return true;
}

namespace {

bool extend_section(const RingHom& proj, const std::vector<std::vector<Elem>>& fibers,
                    std::vector<Elem>& img, std::vector<char>& assigned, Elem next) {
  const FiniteRing& Q = *proj.dst;
  const FiniteRing& R = *proj.src;
  if (next == Q.size()) return true;
  if (assigned[next])
    return extend_section(proj, fibers, img, assigned, Elem(next + 1));
  for (Elem cand : fibers[next]) {
    bool ok = true;
    // consistency with everything already assigned
    for (Elem other = 0; other < Q.size() && ok; other++) {
      if (!assigned[other]) continue;
      Elem s = Q.add(next, other);
      if (assigned[s] && img[s] != R.add(cand, img[other])) ok = false;
      Elem p = Q.mul(next, other);
      if (ok && assigned[p] && img[p] != R.mul(cand, img[other])) ok = false;
    }
    if (!ok) continue;
    img[next] = cand;
    assigned[next] = 1;
    if (extend_section(proj, fibers, img, assigned, Elem(next + 1))) return true;
    assigned[next] = 0;
  }
  return false;
}

}  // namespace

std::optional<RingHom> find_section(const RingHom& proj) {
  const FiniteRing& Q = *proj.dst;
  const FiniteRing& R = *proj.src;
  std::vector<std::vector<Elem>> fibers(Q.size());
  for (Elem x = 0; x < R.size(); x++) fibers[proj(x)].push_back(x);
  std::vector<Elem> img(Q.size(), 0);
  std::vector<char> assigned(Q.size(), 0);
  // pin 0 and 1 to the ring constants
  img[Q.zero()] = R.zero();
  assigned[Q.zero()] = 1;
  if (Q.one() != Q.zero()) {
    img[Q.one()] = R.one();
    assigned[Q.one()] = 1;
  }
  if (proj(R.zero()) != Q.zero() || proj(R.one()) != Q.one()) return std::nullopt;
  if (!extend_section(proj, fibers, img, assigned, 0)) return std::nullopt;
  try {
    RingHom s = make_hom(proj.dst, proj.src, img);
    if (!verify_retract(proj, s)) return std::nullopt;
    return s;
  } catch (const ring_error&) {
    return std::nullopt;
  }
}

SuslinCheckOutcome suslin_equality_check(RingPtr B, const Ideal& J, int n,
                                         const MatGroup& e_rel,
                                         const GroupBudget& budget) {
  SuslinCheckOutcome out;
  const FiniteRing& r = *B;
  out.rel_count = e_rel.size();

  // E_n(B,J) c E_n(B) cap SL_n(B,J): every member must be congruent with
  // determinant one (membership in E_n(B) holds by construction).
  for (std::size_t i = 0; i < e_rel.size(); i++) {
    Mat g = e_rel.element(i);
    if (determinant(g) != r.one() || !congruent_identity(g, J)) {
      out.issues.push_back("relative group member escapes SL_n(B,J)");
      out.equal = false;
      return out;
    }
  }

  // enumerate SL_n(B,J) from the congruence pattern; every element must
  // lie in the materialized relative group (or fail to be in E_n(B))
  const std::size_t cells = std::size_t(n) * n;
  const std::size_t isize = J.members.size();
  double total = 1;
  for (std::size_t c = 0; c < cells; c++) total *= double(isize);
  if (total > double(budget.max_enumeration))
    throw group_error("suslin check: congruence enumeration over budget");

  std::vector<std::size_t> digit(cells, 0);
  Mat m = mat_identity(r, n);
  auto entry_of = [&](std::size_t cell, std::size_t d) {
    Elem shift = J.members[d];
    return cell / n == cell % n ? r.add(r.one(), shift) : shift;
  };
  for (std::size_t cell = 0; cell < cells; cell++) m.e[cell] = entry_of(cell, 0);
  bool equal = true;
  while (true) {
    if (determinant(m) == r.one()) {
      out.sl_count++;
      if (!e_rel.contains(m)) {
        if (elementary_reduction(m)) {
          equal = false;
          if (out.issues.size() < 5)
            out.issues.push_back("SL element in E_n(B) but outside E_n(B,J)");
        } else {
          out.undecided++;
        }
      }
    }
    std::size_t cell = 0;
    while (cell < cells) {
      digit[cell]++;
      if (digit[cell] < isize) {
        m.e[cell] = entry_of(cell, digit[cell]);
        break;
      }
      digit[cell] = 0;
      m.e[cell] = entry_of(cell, 0);
      cell++;
    }
    if (cell == cells) break;
  }

  // exact equality: counts match and no SL element provably escaped
  out.equal = equal && out.undecided == 0 && out.sl_count == out.rel_count;
  if (out.sl_count != out.rel_count && out.issues.size() < 5)
    out.issues.push_back("|SL_n(B,J)| = " + std::to_string(out.sl_count) +
                         " vs |E_n(B,J)| = " + std::to_string(out.rel_count));
  return out;
}

LemmaLOutcome lemma_l_check(const OrbitSpace& relative_space,
                            const OrbitSpace& absolute_space, const RingHom& proj) {
  LemmaLOutcome out;
  auto section = find_section(proj);
  if (!section) return out;  // not applicable, reported as skip
  out.applicable = true;

  const FiniteRing& r = *relative_space.ring;
  RowVec e1 = unit_row(r, relative_space.n);
  std::uint32_t abs_trivial = absolute_space.class_of_row(e1);
  std::uint32_t rel_trivial = relative_space.class_of_row(e1);
  for (const UmRow& row : relative_space.rows) {
    if (absolute_space.class_of_row(row.entries) != abs_trivial) continue;
    out.rows_checked++;
    if (relative_space.class_of_row(row.entries) != rel_trivial) {
      out.holds = false;
      if (out.issues.size() < 5)
        out.issues.push_back("row " + format_row(row.entries) +
                             " trivial absolutely but not relatively");
    }
  }
  return out;
}

}  // namespace umrow
