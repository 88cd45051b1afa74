#include "umrow/calculus.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace umrow {

namespace {

std::vector<Elem> all_elements(const FiniteRing& r) {
  std::vector<Elem> out(r.size());
  for (Elem x = 0; x < r.size(); x++) out[x] = x;
  return out;
}

std::string pair_text(const RowVec& v, const RowVec& w) {
  return format_row(v) + " / " + format_row(w);
}

}  // namespace

std::vector<char> span_mask(const FiniteRing& ring, const std::vector<Elem>& sources,
                            const std::vector<Elem>& coeffs) {
  std::vector<char> mask(ring.size(), 0);
  std::vector<Elem> work;
  auto push = [&](Elem x) {
    if (!mask[x]) {
      mask[x] = 1;
      work.push_back(x);
    }
  };
  push(ring.zero());
  for (Elem s : sources)
    for (Elem c : coeffs) push(ring.mul(s, c));
  for (std::size_t h = 0; h < work.size(); h++)
    for (std::size_t j = 0; j <= h; j++) push(ring.add(work[h], work[j]));
  return mask;
}

std::optional<std::vector<Elem>> decompose_linear(const FiniteRing& ring, Elem target,
                                                  const std::vector<Elem>& sources,
                                                  const std::vector<Elem>& coeff_set) {
  const std::size_t m = sources.size();
  std::vector<std::vector<char>> suffix(m + 1);
  suffix[m].assign(ring.size(), 0);
  suffix[m][ring.zero()] = 1;
  for (std::size_t k = m; k-- > 0;) {
    std::vector<Elem> tail(sources.begin() + k, sources.end());
    suffix[k] = span_mask(ring, tail, coeff_set);
  }
  if (!suffix[0][target]) return std::nullopt;
  std::vector<Elem> out(m, ring.zero());
  std::vector<int> choice(m, -1);
  std::vector<Elem> rest(m + 1);
  rest[0] = target;
  std::size_t k = 0;
  while (k < m) {
    bool advanced = false;
    for (int ci = choice[k] + 1; ci < int(coeff_set.size()); ci++) {
      Elem c = coeff_set[ci];
      Elem nrest = ring.sub(rest[k], ring.mul(c, sources[k]));
      if (suffix[k + 1][nrest]) {
        choice[k] = ci;
        out[k] = c;
        rest[k + 1] = nrest;
        k++;
        advanced = true;
        break;
      }
    }
    if (!advanced) {
      choice[k] = -1;
      if (k == 0) return std::nullopt;
      k--;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// p chooser and Vv product

namespace {

std::vector<Elem> p_candidates(const OrbitSpace& space) {
  const FiniteRing& r = *space.ring;
  if (!space.relative()) return all_elements(r);
  std::vector<Elem> out;
  for (Elem i : space.ideal->members) out.push_back(r.add(r.one(), i));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<char> tail_ideal_mask(const OrbitSpace& space, const RowVec& v, int from) {
  const FiniteRing& r = *space.ring;
  std::vector<Elem> tail;
  for (int k = from; k < v.n; k++) tail.push_back(v.e[k]);
  return span_mask(r, tail, all_elements(r));
}

}  // namespace

Elem choose_p(const OrbitSpace& space, const RowVec& v) {
  auto ps = valid_ps(space, v, 1);
  if (ps.empty()) throw calculus_error("no valid p for row " + format_row(v));
  return ps[0];
}

std::vector<Elem> valid_ps(const OrbitSpace& space, const RowVec& v, std::size_t limit) {
  const FiniteRing& r = *space.ring;
  std::vector<char> mask = tail_ideal_mask(space, v, 1);
  std::vector<Elem> out;
  for (Elem p : p_candidates(space)) {
    if (mask[r.sub(r.mul(v.e[0], p), r.one())]) {
      out.push_back(p);
      if (out.size() >= limit) break;
    }
  }
  return out;
}

VvOutcome vv_product(const OrbitSpace& space, const RowVec& w, const RowVec& v,
                     std::optional<Elem> p_override) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  if (n < 3) throw calculus_error("Vv product requires n >= 3");
  for (int k = 1; k < n; k++)
    if (v.e[k] != w.e[k])
      throw calculus_error("Vv product requires a common tail: " + pair_text(v, w));
  if (!space.has_row(v) || !space.has_row(w))
    throw calculus_error("Vv operands are not rows of the space");

  const Elem a = v.e[0];
  const Elem b = w.e[0];
  const Elem p = p_override ? *p_override : choose_p(space, v);
  const Elem bp = r.add(b, p);

  VvOutcome out;
  out.p = p;

  RowVec f1 = v;
  f1.e[0] = r.sub(r.mul(a, bp), r.one());
  f1.e[1] = r.mul(v.e[1], bp);
  if (!space.has_row(f1))
    throw calculus_error("Vv form-1 row " + format_row(f1) +
                         " left the space (not unimodular/congruent)");
  out.form1_row = f1;

  // form 2: alpha = [[a, a2],[x, y]] with det invertible mod (a3..an)
  std::vector<char> mod_mask = tail_ideal_mask(space, v, 2);
  bool found = false;
  RowVec f2 = v;
  for (Elem x = 0; x < r.size() && !found; x++)
    for (Elem y = 0; y < r.size() && !found; y++) {
      Elem det = r.sub(r.mul(a, y), r.mul(v.e[1], x));
      bool unit_mod = false;
      for (Elem u = 0; u < r.size(); u++)
        if (mod_mask[r.sub(r.one(), r.mul(det, u))]) {
          unit_mod = true;
          break;
        }
      if (!unit_mod) continue;
      f2.e[0] = r.add(r.mul(b, a), r.mul(v.e[1], x));
      f2.e[1] = r.add(r.mul(b, v.e[1]), r.mul(v.e[1], y));
      found = true;
    }
  if (!found)
    throw calculus_error("Vv form-2: no GL_2 completion for " + format_row(v));
  if (!space.has_row(f2))
    throw calculus_error("Vv form-2 row " + format_row(f2) + " left the space");
  out.form2_row = f2;

  std::uint32_t c1 = space.class_of_row(f1);
  std::uint32_t c2 = space.class_of_row(f2);
  if (c1 != c2)
    throw calculus_error("Vv forms disagree on " + pair_text(v, w) + ": " +
                         format_row(f1) + " vs " + format_row(f2));
  out.cls = c1;
  return out;
}

// ---------------------------------------------------------------------------
// Mennicke-Newman

namespace {

struct Mover {
  const FiniteRing& ring;
  int n;
  RowVec row;
  Mat eps;

  Mover(const OrbitSpace& space, const RowVec& start)
      : ring(*space.ring), n(space.n), row(start), eps(mat_identity(ring, space.n)) {}

  void apply(int i, int j, Elem lam) {
    if (lam == ring.zero()) return;
    row = row_action_elementary(row, i, j, lam);
    eps = mat_mul(eps, elementary(ring, n, i, j, lam));
  }
};

// u * E_n1(1) realized by relative moves: the explicit word
// E_12(i_n) E_n2(-i_1) E_21(1) E_12(-i_n) E_n2(i_1+i_2+i_n) E_21(-1)
// (paper positions, 1-based). Adds the last coordinate to the first.
void apply_shift_word(Mover& m) {
  const FiniteRing& r = m.ring;
  const int last = m.n - 1;
  RowVec before = m.row;
  Elem i1 = r.sub(before.e[0], r.one());
  Elem i2 = before.e[1];
  Elem in = before.e[last];
  m.apply(0, 1, in);
  m.apply(last, 1, r.neg(i1));
  m.apply(1, 0, r.one());
  m.apply(0, 1, r.neg(in));
  m.apply(last, 1, r.add(r.add(i1, i2), in));
  m.apply(1, 0, r.neg(r.one()));
  RowVec expect = before;
  expect.e[0] = r.add(before.e[0], before.e[last]);
  if (m.row != expect)
    throw calculus_error("shift word identity failed on " + format_row(before));
}

bool mask_has_one(const FiniteRing& r, const std::vector<char>& mask) {
  return mask[r.one()] != 0;
}

// Finds shift multipliers making the two head blocks comaximal after
// adding c_i * vprod to v_i and d_i * wprod to w_i. Index-order odometer.
bool head_comaximal_search(const FiniteRing& r, Mover& V, Mover& W, int heads,
                           Elem vprod, Elem wprod, std::vector<Elem>& vc,
                           std::vector<Elem>& wc) {
  std::vector<Elem> all = all_elements(r);
  const std::size_t digits = std::size_t(heads) * 2;
  std::vector<std::size_t> d(digits, 0);
  while (true) {
    std::vector<Elem> gens;
    for (int i = 0; i < heads; i++)
      gens.push_back(r.add(V.row.e[i], r.mul(Elem(d[i]), vprod)));
    for (int i = 0; i < heads; i++)
      gens.push_back(r.add(W.row.e[i], r.mul(Elem(d[heads + i]), wprod)));
    if (mask_has_one(r, span_mask(r, gens, all))) {
      vc.assign(heads, 0);
      wc.assign(heads, 0);
      for (int i = 0; i < heads; i++) {
        vc[i] = Elem(d[i]);
        wc[i] = Elem(d[heads + i]);
      }
      return true;
    }
    std::size_t k = 0;
    while (k < digits) {
      d[k]++;
      if (d[k] < r.size()) break;
      d[k] = 0;
      k++;
    }
    if (k == digits) return false;
  }
}

void mn_absolute(const OrbitSpace& space, Mover& V, Mover& W) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  std::vector<Elem> allR = all_elements(r);

  for (int c = n - 1; c >= 1; c--) {
    // shared tail: coordinates c+1..n-1
    std::vector<Elem> tails;
    for (int t = c + 1; t < n; t++) tails.push_back(V.row.e[t]);

    // 1) make the two head blocks comaximal, adjusting coordinate 0 of
    //    each row by elements of (v_c, tails) resp. (w_c, tails)
    std::vector<Elem> vsrc{V.row.e[c]};
    std::vector<Elem> wsrc{W.row.e[c]};
    for (Elem t : tails) {
      vsrc.push_back(t);
      wsrc.push_back(t);
    }
    auto members_of = [&](const std::vector<char>& mask) {
      std::vector<Elem> out;
      for (Elem x = 0; x < r.size(); x++)
        if (mask[x]) out.push_back(x);
      return out;
    };
    std::vector<Elem> vadj = members_of(span_mask(r, vsrc, allR));
    std::vector<Elem> wadj = members_of(span_mask(r, wsrc, allR));
    bool done = false;
    for (Elem zv : vadj) {
      for (Elem zw : wadj) {
        std::vector<Elem> gens;
        gens.push_back(r.add(V.row.e[0], zv));
        for (int i = 1; i < c; i++) gens.push_back(V.row.e[i]);
        gens.push_back(r.add(W.row.e[0], zw));
        for (int i = 1; i < c; i++) gens.push_back(W.row.e[i]);
        if (!mask_has_one(r, span_mask(r, gens, allR))) continue;
        auto dv = decompose_linear(r, zv, vsrc, allR);
        auto dw = decompose_linear(r, zw, wsrc, allR);
        if (!dv || !dw) continue;
        V.apply(c, 0, (*dv)[0]);
        for (std::size_t t = 1; t < vsrc.size(); t++) V.apply(c + int(t), 0, (*dv)[t]);
        W.apply(c, 0, (*dw)[0]);
        for (std::size_t t = 1; t < wsrc.size(); t++) W.apply(c + int(t), 0, (*dw)[t]);
        done = true;
        break;
      }
      if (done) break;
    }
    if (!done)
      throw calculus_error("mennicke-newman absolute: comaximality search exhausted at " +
                           pair_text(V.row, W.row));

    // 2) equalize coordinate c using head (+ tail) multiples on each side
    Elem d = r.sub(W.row.e[c], V.row.e[c]);
    std::vector<Elem> sources;
    std::vector<std::pair<char, int>> where;
    for (int i = 0; i < c; i++) {
      sources.push_back(V.row.e[i]);
      where.push_back({'v', i});
    }
    for (int t = c + 1; t < n; t++) {
      sources.push_back(V.row.e[t]);
      where.push_back({'v', t});
    }
    for (int i = 0; i < c; i++) {
      sources.push_back(W.row.e[i]);
      where.push_back({'w', i});
    }
    auto dec = decompose_linear(r, d, sources, allR);
    if (!dec)
      throw calculus_error("mennicke-newman absolute: equalization search exhausted at " +
                           pair_text(V.row, W.row));
    for (std::size_t t = 0; t < sources.size(); t++) {
      if ((*dec)[t] == r.zero()) continue;
      if (where[t].first == 'v')
        V.apply(where[t].second, c, (*dec)[t]);
      else
        W.apply(where[t].second, c, r.neg((*dec)[t]));
    }
    if (V.row.e[c] != W.row.e[c])
      throw calculus_error("mennicke-newman absolute: equalization failed");
  }

  // final: arrange x + y = 1 with the common tail kept
  std::vector<Elem> tails;
  for (int t = 1; t < n; t++) tails.push_back(V.row.e[t]);
  Elem need = r.sub(r.one(), r.add(V.row.e[0], W.row.e[0]));
  if (auto dec = decompose_linear(r, need, tails, allR)) {
    for (std::size_t t = 0; t < tails.size(); t++) V.apply(1 + int(t), 0, (*dec)[t]);
  } else {
    Elem xp = V.row.e[0], yp = W.row.e[0];
    Elem t1 = V.row.e[1];
    Elem target = r.sub(r.sub(r.sub(r.one(), xp), yp), r.add(t1, t1));
    auto lam = decompose_linear(r, target, {xp, yp}, allR);
    if (!lam)
      throw calculus_error("mennicke-newman absolute: x+y=1 search exhausted at " +
                           pair_text(V.row, W.row));
    V.apply(0, 1, (*lam)[0]);
    W.apply(0, 1, (*lam)[1]);
    V.apply(1, 0, r.one());
    W.apply(1, 0, r.one());
    Elem X = V.row.e[0], Y = W.row.e[0];
    Elem diff = r.sub(W.row.e[1], V.row.e[1]);
    auto fix = decompose_linear(r, diff, {X, Y}, allR);
    if (!fix)
      throw calculus_error("mennicke-newman absolute: tail re-equalization exhausted");
    V.apply(0, 1, (*fix)[0]);
    W.apply(0, 1, r.neg((*fix)[1]));
    if (V.row.e[1] != W.row.e[1])
      throw calculus_error("mennicke-newman absolute: tail re-equalization failed");
  }
  if (r.add(V.row.e[0], W.row.e[0]) != r.one())
    throw calculus_error("mennicke-newman absolute: x+y=1 postcondition failed");
}

void mn_relative_last(const OrbitSpace& space, Mover& V, Mover& W) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  const int last = n - 1;
  const Ideal& ideal = *space.ideal;
  const std::vector<Elem>& Imem = ideal.members;

  // 1) head comaximality by adding multiples of a_n*b_n
  {
    Elem prod = r.mul(V.row.e[last], W.row.e[last]);
    std::vector<Elem> vc, wc;
    if (!head_comaximal_search(r, V, W, last, prod, prod, vc, wc))
      throw calculus_error("relative mennicke-newman: comaximality search exhausted at " +
                           pair_text(V.row, W.row));
    for (int i = 0; i < last; i++) {
      V.apply(last, i, r.mul(vc[i], W.row.e[last]));
      W.apply(last, i, r.mul(wc[i], V.row.e[last]));
    }
  }

  // 2) arrange b_n - a_n = a_1 - b_1 by I-combinations of heads into lasts
  {
    Elem z = r.add(r.sub(V.row.e[0], W.row.e[0]), r.sub(V.row.e[last], W.row.e[last]));
    if (!ideal.contains(z))
      throw calculus_error("relative mennicke-newman: difference escaped the ideal");
    std::vector<Elem> sources;
    for (int i = 0; i < last; i++) sources.push_back(W.row.e[i]);
    for (int i = 0; i < last; i++) sources.push_back(V.row.e[i]);
    auto dec = decompose_linear(r, z, sources, Imem);
    if (!dec)
      throw calculus_error("relative mennicke-newman: step-2 search exhausted at " +
                           pair_text(V.row, W.row));
    for (int i = 0; i < last; i++) W.apply(i, last, (*dec)[i]);
    for (int i = 0; i < last; i++) V.apply(i, last, r.neg((*dec)[last + i]));
    if (r.sub(W.row.e[last], V.row.e[last]) != r.sub(V.row.e[0], W.row.e[0]))
      throw calculus_error("relative mennicke-newman: step-2 postcondition failed");
  }

  // 3) add last coordinates into the first by the explicit relative word
  apply_shift_word(V);
  apply_shift_word(W);
  if (V.row.e[0] != W.row.e[0])
    throw calculus_error("relative mennicke-newman: first coordinates differ after shift");

  // 4) scale coordinates 1..n-1 by lambda^2, lambda = 1 - a_1
  Elem lambda = r.sub(r.one(), V.row.e[0]);
  if (!ideal.contains(lambda))
    throw calculus_error("relative mennicke-newman: lambda not in the ideal");
  Elem lam2 = r.mul(lambda, lambda);
  for (Mover* m : {&V, &W})
    for (int i = 1; i < n; i++) {
      Elem old = m->row.e[i];
      m->apply(0, i, r.neg(r.mul(r.add(r.one(), lambda), old)));
      if (m->row.e[i] != r.mul(lam2, old))
        throw calculus_error("relative mennicke-newman: lambda^2 scaling failed");
    }

  // 5) comaximality again, with multiples of lambda^4 * a_n * b_n
  {
    Elem prod = r.mul(V.row.e[last], W.row.e[last]);
    std::vector<Elem> vc, wc;
    if (!head_comaximal_search(r, V, W, last, prod, prod, vc, wc))
      throw calculus_error("relative mennicke-newman: step-5 search exhausted at " +
                           pair_text(V.row, W.row));
    for (int i = 0; i < last; i++) {
      V.apply(last, i, r.mul(vc[i], W.row.e[last]));
      W.apply(last, i, r.mul(wc[i], V.row.e[last]));
    }
  }

  // 6) make a'_n + b'_n = lambda via I-combinations of the heads
  {
    Elem z = r.sub(lambda, r.add(V.row.e[last], W.row.e[last]));
    std::vector<Elem> sources;
    for (int i = 0; i < last; i++) sources.push_back(V.row.e[i]);
    for (int i = 0; i < last; i++) sources.push_back(W.row.e[i]);
    auto dec = decompose_linear(r, z, sources, Imem);
    if (!dec)
      throw calculus_error("relative mennicke-newman: step-6 search exhausted at " +
                           pair_text(V.row, W.row));
    for (int i = 0; i < last; i++) V.apply(i, last, (*dec)[i]);
    for (int i = 0; i < last; i++) W.apply(i, last, (*dec)[last + i]);
    if (r.add(V.row.e[last], W.row.e[last]) != lambda)
      throw calculus_error("relative mennicke-newman: step-6 postcondition failed");
  }

  // 7) equalize the heads using lambda-multiples of the last coordinates
  for (int i = 0; i < last; i++) {
    Elem delta = r.sub(V.row.e[i], W.row.e[i]);
    Elem ci = 0;
    bool found = false;
    for (Elem c = 0; c < r.size(); c++)
      if (r.mul(c, lam2) == delta) {
        ci = c;
        found = true;
        break;
      }
    if (!found)
      throw calculus_error("relative mennicke-newman: head difference not in (lambda^2)");
    V.apply(last, i, r.neg(r.mul(ci, lambda)));
    W.apply(last, i, r.mul(ci, lambda));
    if (V.row.e[i] != W.row.e[i])
      throw calculus_error("relative mennicke-newman: head equalization failed");
  }
}

bool unit_modulo(const FiniteRing& r, Elem x, const std::vector<Elem>& gens) {
  std::vector<char> mask = span_mask(r, gens, all_elements(r));
  for (Elem p = 0; p < r.size(); p++)
    if (mask[r.sub(r.one(), r.mul(x, p))]) return true;
  return false;
}

void mn_relative_first(const OrbitSpace& space, Mover& V, Mover& W) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  const int last = n - 1;
  const Ideal& ideal = *space.ideal;

  mn_relative_last(space, V, W);

  // move the differing last coordinate into the first on both rows
  apply_shift_word(V);
  apply_shift_word(W);

  // equalize the last coordinates by I-multiples of the first and the
  // (shared) middle coordinates
  Elem z = r.sub(W.row.e[last], V.row.e[last]);
  std::vector<Elem> sources{V.row.e[0], W.row.e[0]};
  for (int i = 1; i < last; i++) sources.push_back(V.row.e[i]);
  auto dec = decompose_linear(r, z, sources, ideal.members);
  if (!dec)
    throw calculus_error("relative mennicke-newman (first): tail search exhausted at " +
                         pair_text(V.row, W.row));
  V.apply(0, last, (*dec)[0]);
  W.apply(0, last, r.neg((*dec)[1]));
  for (int i = 1; i < last; i++) V.apply(i, last, (*dec)[1 + i]);
  if (V.row.e[last] != W.row.e[last])
    throw calculus_error("relative mennicke-newman (first): equalization failed");
}

}  // namespace

MnResult mennicke_newman(const OrbitSpace& space, const RowVec& v, const RowVec& w,
                         MnMode mode, const MatGroup* ambient) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  if (!space.has_row(v) || !space.has_row(w))
    throw calculus_error("mennicke-newman operands are not rows of the space");
  if (mode != MnMode::Absolute && !space.relative())
    throw calculus_error("relative normalization needs a relative space");
  if (mode != MnMode::Absolute && n < 3)
    throw calculus_error("relative normalization requires n >= 3");

  Mover V(space, v), W(space, w);
  switch (mode) {
    case MnMode::Absolute:
      mn_absolute(space, V, W);
      break;
    case MnMode::RelativeLast:
      mn_relative_last(space, V, W);
      break;
    case MnMode::RelativeFirst:
      mn_relative_first(space, V, W);
      break;
  }

  switch (mode) {
    case MnMode::Absolute: {
      for (int k = 1; k < n; k++)
        if (V.row.e[k] != W.row.e[k])
          throw calculus_error("postcondition: common tail missing");
      if (r.add(V.row.e[0], W.row.e[0]) != r.one())
        throw calculus_error("postcondition: x + y = 1 missing");
      break;
    }
    case MnMode::RelativeLast: {
      std::vector<Elem> heads;
      for (int k = 0; k < n - 1; k++) {
        if (V.row.e[k] != W.row.e[k])
          throw calculus_error("postcondition: common head missing");
        heads.push_back(V.row.e[k]);
      }
      if (!unit_modulo(r, r.add(V.row.e[n - 1], W.row.e[n - 1]), heads))
        throw calculus_error("postcondition: a+b not a unit modulo the head ideal");
      break;
    }
    case MnMode::RelativeFirst: {
      for (int k = 1; k < n; k++)
        if (V.row.e[k] != W.row.e[k])
          throw calculus_error("postcondition: common tail missing");
      break;
    }
  }

  if (row_action(v, V.eps) != V.row || row_action(w, W.eps) != W.row)
    throw calculus_error("epsilon accumulation mismatch");
  if (!space.has_row(V.row) || !space.has_row(W.row))
    throw calculus_error("normalized rows left the space");

  MnResult out{V.eps, W.eps, V.row, W.row, false, ""};
  if (mode == MnMode::Absolute) {
    if (ambient && !ambient->budget_exceeded) {
      if (!ambient->contains(V.eps) || !ambient->contains(W.eps))
        throw calculus_error("epsilon not in E_n(R)");
      out.membership_mode = "group-lookup";
    } else {
      if (!elementary_reduction(V.eps) || !elementary_reduction(W.eps))
        throw calculus_error("epsilon lacks an elementary reduction certificate");
      out.membership_mode = "reduction-certificate";
    }
    out.membership_certified = true;
  } else {
    if (!space.acting) throw calculus_error("relative space lacks its acting group");
    if (space.acting->size() > 0) {
      if (!space.acting->contains(V.eps) || !space.acting->contains(W.eps))
        throw calculus_error("epsilon not in E_n(R,I)");
      out.membership_mode = "group-lookup";
    } else {
      // generators-only acting set: certify via congruence plus an
      // elementary reduction (E_n(B) cap SL_n(B,J), which equals
      // E_n(B,J) in the retract situations where this path is used)
      const Ideal& ideal = *space.ideal;
      for (const Mat* e : {&V.eps, &W.eps}) {
        if (!congruent_identity(*e, ideal))
          throw calculus_error("epsilon not congruent to the identity mod I");
        if (!elementary_reduction(*e))
          throw calculus_error("epsilon lacks an elementary reduction certificate");
      }
      out.membership_mode = "reduction-certificate";
    }
    out.membership_certified = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Group table

GroupTable group_table(const OrbitSpace& space, const MatGroup* ambient) {
  const int n = space.n;
  if (n < 3) throw calculus_error("group tables require n >= 3");
  GroupTable gt;
  gt.space = &space;
  const std::size_t C = space.classes.size();
  gt.table.assign(C, std::vector<std::uint32_t>(C, 0));
  gt.identity_class = space.class_of_row(unit_row(*space.ring, n));
  MnMode mode = space.relative() ? MnMode::RelativeFirst : MnMode::Absolute;
  AxiomReport& ax = gt.axioms;

  auto note = [&](const std::string& s) {
    if (ax.witnesses.size() < 20) ax.witnesses.push_back(s);
  };

  for (std::uint32_t i = 0; i < C; i++) {
    for (std::uint32_t j = 0; j < C; j++) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> reps;
      const auto& mi = space.classes[i].members;
      const auto& mj = space.classes[j].members;
      for (std::size_t t = 0; t < 3; t++)
        reps.push_back({mi[std::min(t, mi.size() - 1)], mj[std::min(t, mj.size() - 1)]});
      std::optional<std::uint32_t> agreed;
      for (auto [wi, vi] : reps) {
        const RowVec& wrow = space.rows[wi].entries;
        const RowVec& vrow = space.rows[vi].entries;
        MnResult mn = mennicke_newman(space, vrow, wrow, mode, ambient);
        std::vector<Elem> ps = valid_ps(space, mn.v_out, 3);
        std::optional<std::uint32_t> local;
        for (Elem p : ps) {
          VvOutcome vo = vv_product(space, mn.w_out, mn.v_out, p);
          ax.products_computed++;
          if (!local)
            local = vo.cls;
          else if (*local != vo.cls) {
            ax.p_independent = false;
            note("p-dependence at classes (" + std::to_string(i) + "," +
                 std::to_string(j) + ")");
          }
        }
        if (!agreed)
          agreed = local;
        else if (local && *agreed != *local) {
          ax.rep_independent = false;
          note("representative dependence at classes (" + std::to_string(i) + "," +
               std::to_string(j) + ")");
        }
      }
      gt.table[i][j] = agreed.value();
    }
  }

  for (std::uint32_t j = 0; j < C; j++) {
    if (gt.table[gt.identity_class][j] != j || gt.table[j][gt.identity_class] != j) {
      ax.identity_ok = false;
      note("identity fails at class " + std::to_string(j));
    }
  }
  for (std::uint32_t i = 0; i < C; i++)
    for (std::uint32_t j = 0; j < C; j++)
      if (gt.table[i][j] != gt.table[j][i]) {
        ax.commutative = false;
        note("commutativity fails at (" + std::to_string(i) + "," + std::to_string(j) +
             ")");
      }
  for (std::uint32_t i = 0; i < C; i++)
    for (std::uint32_t j = 0; j < C; j++)
      for (std::uint32_t k = 0; k < C; k++)
        if (gt.table[gt.table[i][j]][k] != gt.table[i][gt.table[j][k]]) {
          ax.associative = false;
          note("associativity fails at (" + std::to_string(i) + "," + std::to_string(j) +
               "," + std::to_string(k) + ")");
        }
  gt.inverse.assign(C, 0);
  for (std::uint32_t i = 0; i < C; i++) {
    bool found = false;
    for (std::uint32_t j = 0; j < C; j++)
      if (gt.table[i][j] == gt.identity_class) {
        gt.inverse[i] = j;
        found = true;
        break;
      }
    if (!found) {
      ax.inverses_ok = false;
      note("no inverse for class " + std::to_string(i));
    }
  }
  return gt;
}

// ---------------------------------------------------------------------------
// Niceness and WMS relation checks

NicenessResult niceness_check(const OrbitSpace& space, const GroupTable& table,
                              int coordinate) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  if (coordinate < 0 || coordinate >= n)
    throw calculus_error("bad niceness coordinate");
  NicenessResult res;
  res.coordinate = coordinate;

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  for (std::uint32_t id = 0; id < space.rows.size(); id++) {
    RowVec masked = space.rows[id].entries;
    masked.e[coordinate] = 0;
    buckets[space.packer.pack_row(masked)].push_back(id);
  }
  for (auto& [key, ids] : buckets) {
    (void)key;
    for (std::uint32_t wi : ids)
      for (std::uint32_t vi : ids) {
        const RowVec& wrow = space.rows[wi].entries;
        const RowVec& vrow = space.rows[vi].entries;
        RowVec prod = vrow;
        prod.e[coordinate] = r.mul(wrow.e[coordinate], vrow.e[coordinate]);
        if (!space.has_row(prod)) continue;
        res.instances++;
        std::uint32_t expect = table.product(space.class_ids[wi], space.class_ids[vi]);
        std::uint32_t got = space.class_of_row(prod);
        if (expect != got) {
          res.nice = false;
          if (res.failures.size() < 5)
            res.failures.push_back(pair_text(wrow, vrow) + " -> " + format_row(prod));
        }
      }
  }
  return res;
}

WmsCheckResult wms_relation_check(const OrbitSpace& space, const GroupTable& table) {
  const FiniteRing& r = *space.ring;
  const int n = space.n;
  WmsCheckResult res;
  std::vector<Elem> allR = all_elements(r);

  // relation 2: wms(q,t) = wms(r,t)*wms(1+q,t) when r(1+q) == q mod (t)
  double tails = 1;
  for (int k = 1; k < n; k++) tails *= double(r.size());
  std::size_t stride = 1;
  if (tails * double(r.size()) * double(r.size()) > 4e6) {
    stride = std::size_t((tails * double(r.size()) * double(r.size())) / 4e6) + 1;
    res.sampled = true;
  }
  std::vector<std::size_t> digit(n - 1, 0);
  RowVec t;
  t.ring = &r;
  t.n = std::uint8_t(n);
  t.e[0] = 0;
  for (int k = 1; k < n; k++) t.e[k] = 0;
  std::size_t tail_counter = 0;
  while (true) {
    if (tail_counter++ % stride == 0) {
      std::vector<Elem> tail_elems;
      for (int k = 1; k < n; k++) tail_elems.push_back(t.e[k]);
      std::vector<char> mask = span_mask(r, tail_elems, allR);
      for (Elem q = 0; q < r.size(); q++) {
        RowVec rq = t, r1q = t;
        rq.e[0] = q;
        r1q.e[0] = r.add(r.one(), q);
        if (!space.has_row(rq) || !space.has_row(r1q)) continue;
        for (Elem rr = 0; rr < r.size(); rr++) {
          if (!mask[r.sub(r.mul(rr, r.add(r.one(), q)), q)]) continue;
          RowVec rrow = t;
          rrow.e[0] = rr;
          if (!space.has_row(rrow)) {
            res.holds = false;
            if (res.failures.size() < 5)
              res.failures.push_back("r-row " + format_row(rrow) + " not unimodular");
            continue;
          }
          res.relation_instances++;
          std::uint32_t lhs = space.class_of_row(rq);
          std::uint32_t rhs =
              table.product(space.class_of_row(rrow), space.class_of_row(r1q));
          if (lhs != rhs) {
            res.holds = false;
            if (res.failures.size() < 5)
              res.failures.push_back("relation fails at q=" + r.format_element(q) +
                                     " tail " + format_row(t));
          }
        }
      }
    }
    int k = 1;
    while (k < n) {
      digit[k - 1]++;
      if (digit[k - 1] < r.size()) {
        t.e[k] = Elem(digit[k - 1]);
        break;
      }
      digit[k - 1] = 0;
      t.e[k] = 0;
      k++;
    }
    if (k == n) break;
  }

  // van der Kallen's product identity against the table
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  for (std::uint32_t id = 0; id < space.rows.size(); id++) {
    RowVec masked = space.rows[id].entries;
    masked.e[0] = 0;
    buckets[space.packer.pack_row(masked)].push_back(id);
  }
  double pair_total = 0;
  for (auto& [key, ids] : buckets) {
    (void)key;
    pair_total += double(ids.size()) * double(ids.size());
  }
  std::size_t pstride = 1;
  if (pair_total > 2e6) {
    pstride = std::size_t(pair_total / 2e6) + 1;
    res.sampled = true;
  }
  std::size_t pc = 0;
  for (auto& [key, ids] : buckets) {
    (void)key;
    for (std::uint32_t wi : ids)
      for (std::uint32_t vi : ids) {
        if (pc++ % pstride != 0) continue;
        const RowVec& wrow = space.rows[wi].entries;
        const RowVec& vrow = space.rows[vi].entries;
        VvOutcome vo = vv_product(space, wrow, vrow);
        res.product_identity_instances++;
        if (vo.cls != table.product(space.class_ids[wi], space.class_ids[vi])) {
          res.holds = false;
          if (res.failures.size() < 5)
            res.failures.push_back("product identity fails at " + pair_text(wrow, vrow));
        }
      }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Theta descent

Mat theta(const RowVec& u, const RowVec& w) {
  if (u.n != 3 || w.n != 3) throw calculus_error("theta needs length-3 rows");
  const FiniteRing& r = *u.ring;
  Mat m;
  m.ring = u.ring;
  m.n = 4;
  Elem z = r.zero();
  auto set_row = [&](int i, Elem a, Elem b, Elem c, Elem d) {
    m.at(i, 0) = a;
    m.at(i, 1) = b;
    m.at(i, 2) = c;
    m.at(i, 3) = d;
  };
  set_row(0, z, r.neg(u.e[0]), r.neg(u.e[1]), r.neg(u.e[2]));
  set_row(1, u.e[0], z, r.neg(w.e[2]), w.e[1]);
  set_row(2, u.e[1], w.e[2], z, r.neg(w.e[0]));
  set_row(3, u.e[2], r.neg(w.e[1]), w.e[0], z);
  return m;
}

bool is_alternating(const Mat& m) {
  const FiniteRing& r = *m.ring;
  for (int i = 0; i < m.n; i++) {
    if (m.at(i, i) != r.zero()) return false;
    for (int j = 0; j < m.n; j++)
      if (m.at(i, j) != r.neg(m.at(j, i))) return false;
  }
  return true;
}

RowVec theta_u_part(const Mat& th) {
  RowVec u;
  u.ring = th.ring;
  u.n = 3;
  u.e[0] = th.at(1, 0);
  u.e[1] = th.at(2, 0);
  u.e[2] = th.at(3, 0);
  return u;
}

RowVec theta_w_part(const Mat& th) {
  RowVec w;
  w.ring = th.ring;
  w.n = 3;
  w.e[0] = th.at(3, 2);
  w.e[1] = th.at(1, 3);
  w.e[2] = th.at(2, 1);
  return w;
}

namespace {

std::tuple<int, int, Elem> classify_elementary(const Mat& m) {
  const FiniteRing& r = *m.ring;
  int pi = -1, pj = -1;
  Elem lam = r.zero();
  for (int i = 0; i < m.n; i++)
    for (int j = 0; j < m.n; j++) {
      Elem expect = i == j ? r.one() : r.zero();
      if (m.at(i, j) != expect) {
        if (i == j || pi >= 0)
          throw calculus_error("matrix is not a single transvection");
        pi = i;
        pj = j;
        lam = m.at(i, j);
      }
    }
  if (pi < 0) return {0, 1, r.zero()};
  return {pi, pj, lam};
}

}  // namespace

std::vector<Mat> e4_letters_from_words(const MatGroup& e4_form, const Mat& m) {
  Word word = factorize(e4_form, m);
  std::vector<Mat> letters;
  for (const WordLetter& l : word) {
    const Mat& g = e4_form.generators.at(l.gen);
    letters.push_back(l.inverse ? mat_inverse(g) : g);
  }
  return letters;
}

std::optional<std::vector<Mat>> e4_letters_via_reduction(const Mat& m,
                                                         const Ideal& ideal) {
  if (!ideal.is_full()) return std::nullopt;  // E_i4 letters need I = R
  const FiniteRing& r = *m.ring;
  auto ops = elementary_reduction(m);
  if (!ops) return std::nullopt;
  // ops applied left to right give ops_k ... ops_1 * m = I, so
  // m = inv(ops_1) inv(ops_2) ... inv(ops_k)
  std::vector<Mat> letters;
  auto emit = [&](int i, int j, Elem lam) {
    if (lam == r.zero()) return;
    if (i == 3 || j == 3) {
      letters.push_back(elementary(r, 4, i, j, lam));
      return;
    }
    // E_ij(lam) = E_i4(lam) E_4j(1) E_i4(-lam) E_4j(-1)
    letters.push_back(elementary(r, 4, i, 3, lam));
    letters.push_back(elementary(r, 4, 3, j, r.one()));
    letters.push_back(elementary(r, 4, i, 3, r.neg(lam)));
    letters.push_back(elementary(r, 4, 3, j, r.neg(r.one())));
  };
  for (const Mat& op : *ops) {
    int pi = -1, pj = -1;
    Elem lam = r.zero();
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++)
        if (i != j && op.at(i, j) != r.zero()) {
          pi = i;
          pj = j;
          lam = op.at(i, j);
        }
    if (pi < 0) continue;
    emit(pi, pj, r.neg(lam));  // the inverse letter
  }
  Mat check = mat_identity(r, 4);
  for (const Mat& l : letters) check = mat_mul(check, l);
  if (check != m) return std::nullopt;
  return letters;
}

DescentResult lemma_a_descend(const OrbitSpace& space3, const UmRow& u, const Mat& alpha,
                              const std::vector<Mat>& letters, const MatGroup& e3_rel) {
  const FiniteRing& r = *space3.ring;
  if (!space3.relative() || space3.n != 3)
    throw calculus_error("descent needs the relative length-3 space");
  const Ideal& ideal = *space3.ideal;
  if (alpha.n != 3) throw calculus_error("alpha must be 3x3");
  if (determinant(alpha) != r.one() || !congruent_identity(alpha, ideal))
    throw calculus_error("alpha is not in SL_3(R,I)");

  Mat oneplus = mat_identity(r, 4);
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) oneplus.at(i + 1, j + 1) = alpha.at(i, j);
  Mat a_t = mat_transpose(oneplus);
  {
    Mat check = mat_identity(r, 4);
    for (const Mat& l : letters) check = mat_mul(check, l);
    if (check != a_t)
      throw calculus_error("letters do not multiply to (1(+)alpha)^t");
  }

  Mat th = theta(u.entries, u.certificate);
  RowVec ucur = u.entries;
  RowVec wcur = u.certificate;
  Mat eps = mat_identity(r, 3);

  for (std::size_t t = letters.size(); t-- > 0;) {
    const Mat& beta = letters[t];
    auto [i, j, lam] = classify_elementary(beta);
    Mat hat = mat_identity(r, 3);
    if (lam == r.zero()) {
      // identity letter
    } else if (i == 3 && j == 0) {
      // E_41(a): hat stays I_3
    } else if ((i == 3 && (j == 1 || j == 2)) || (j == 3 && (i == 1 || i == 2))) {
      Mat gamma;
      gamma.ring = &r;
      gamma.n = 3;
      for (int a = 0; a < 3; a++)
        for (int b = 0; b < 3; b++) gamma.at(a, b) = beta.at(a + 1, b + 1);
      hat = mat_transpose(gamma);
    } else if (i == 0 && j == 3) {
      Elem x = lam;
      if (!ideal.contains(x))
        throw calculus_error("E_14 letter coefficient escaped the ideal");
      Elem w1 = wcur.e[0], w2 = wcur.e[1], w3 = wcur.e[2];
      hat.at(0, 0) = r.add(r.one(), r.mul(x, r.mul(w1, w2)));
      hat.at(0, 1) = r.neg(r.mul(x, r.mul(w1, w1)));
      hat.at(1, 0) = r.mul(x, r.mul(w2, w2));
      hat.at(1, 1) = r.sub(r.one(), r.mul(x, r.mul(w1, w2)));
      hat.at(2, 0) = r.mul(x, r.mul(w2, w3));
      hat.at(2, 1) = r.neg(r.mul(x, r.mul(w1, w3)));
    } else {
      throw calculus_error("letter is not of E^4 form");
    }

    th = mat_mul(mat_mul(beta, th), mat_transpose(beta));
    RowVec unext = row_action(ucur, hat);
    if (theta_u_part(th) != unext)
      throw calculus_error("hat-beta table mismatch during descent");
    wcur = theta_w_part(th);
    if (dot(unext, wcur) != r.one())
      throw calculus_error("certificate pairing lost during descent");
    ucur = unext;
    eps = mat_mul(eps, hat);
  }

  if (row_action(u.entries, alpha) != row_action(u.entries, eps))
    throw calculus_error("descent postcondition u*alpha = u*eps failed");
  if (!e3_rel.contains(eps))
    throw calculus_error("descent epsilon is not in E_3(R,I)");
  return DescentResult{eps, letters.size()};
}

}  // namespace umrow
