#include "umrow/groups.hpp"

#include <algorithm>
#include <unordered_set>

namespace umrow {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Open-addressing u64 set; keys use at most 63 bits so ~0 marks empty slots.
class OpenSet64 {
public:
  explicit OpenSet64(std::size_t expected = 64) {
    std::size_t cap = 64;
    while (cap * 3 < expected * 5) cap <<= 1;
    slots_.assign(cap, kEmpty);
    mask_ = cap - 1;
  }
  bool insert(std::uint64_t k) {
    if ((count_ + 1) * 5 > slots_.size() * 3) grow();
    std::size_t i = mix64(k) & mask_;
    while (slots_[i] != kEmpty) {
      if (slots_[i] == k) return false;
      i = (i + 1) & mask_;
    }
    slots_[i] = k;
    count_++;
    return true;
  }
  bool contains(std::uint64_t k) const {
    std::size_t i = mix64(k) & mask_;
    while (slots_[i] != kEmpty) {
      if (slots_[i] == k) return true;
      i = (i + 1) & mask_;
    }
    return false;
  }
  std::size_t size() const { return count_; }

private:
  static constexpr std::uint64_t kEmpty = ~0ull;
  void grow() {
    std::vector<std::uint64_t> old = std::move(slots_);
    slots_.assign(old.size() * 2, kEmpty);
    mask_ = slots_.size() - 1;
    for (std::uint64_t k : old)
      if (k != kEmpty) {
        std::size_t i = mix64(k) & mask_;
        while (slots_[i] != kEmpty) i = (i + 1) & mask_;
        slots_[i] = k;
      }
  }
  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
};

struct Traits64 {
  using Key = std::uint64_t;
  struct Set {
    OpenSet64 s;
    explicit Set(std::size_t n) : s(n) {}
    bool insert(Key k) { return s.insert(k); }
    bool contains(Key k) const { return s.contains(k); }
  };
  static Key pack(const MatPacker& p, const Mat& m) { return p.pack(m); }
  static Mat unpack(const MatPacker& p, Key k) { return p.unpack(k); }
};

struct TraitsWide {
  using Key = Key128;
  struct Set {
    std::unordered_set<Key128, Key128Hash> s;
    explicit Set(std::size_t n) { s.reserve(n); }
    bool insert(Key k) { return s.insert(k).second; }
    bool contains(Key k) const { return s.count(k) != 0; }
  };
  static Key pack(const MatPacker& p, const Mat& m) { return pack_wide(p, m); }
  static Mat unpack(const MatPacker& p, Key k) { return unpack_wide(p, k); }
};

// Incremental subgroup closure. Elements carry how many moves they have
// been expanded against, so generators can be appended later (normal
// closure) at total cost |H| x |moves| rather than per-round rebuilds.
template <class T>
class Engine {
public:
  Engine(RingPtr ring, int n, std::size_t max_elements, bool record_words)
      : ring_(std::move(ring)),
        n_(n),
        packer_(*ring_, n),
        max_(max_elements),
        words_(record_words),
        set_(1024) {
    Mat id = mat_identity(*ring_, n_);
    typename T::Key k = T::pack(packer_, id);
    set_.insert(k);
    order_.push_back(k);
    upto_.push_back(0);
  }

  // Returns false on a non-invertible generator.
  void add_generator(const Mat& g) {
    if (is_identity(g)) return;
    typename T::Key k = T::pack(packer_, g);
    for (const Mat& have : gens_)
      if (T::pack(packer_, have) == k) return;
    gens_.push_back(g);
    Mat gi = mat_inverse(g);
    moves_.push_back(g);
    moves_.push_back(gi);
  }

  // Expand to fixpoint. Returns false iff the element budget was hit.
  bool run() {
    for (std::size_t head = 0; head < order_.size(); head++) {
      std::uint32_t from = upto_[head];
      std::uint32_t to = std::uint32_t(moves_.size());
      if (from == to) continue;
      Mat m = T::unpack(packer_, order_[head]);
      for (std::uint32_t mi = from; mi < to; mi++) {
        Mat nm = mat_mul(m, moves_[mi]);
        typename T::Key nk = T::pack(packer_, nm);
        if (set_.insert(nk)) {
          if (order_.size() >= max_) {
            exceeded_ = true;
            return false;
          }
          order_.push_back(nk);
          upto_.push_back(0);
          if (words_)
            parents_.emplace(key64(nk),
                             MatGroup::Parent{key64(order_[head]), mi / 2,
                                              std::uint8_t(mi % 2)});
        }
      }
      upto_[head] = to;
    }
    return true;
  }

  bool contains(const Mat& m) const { return set_.contains(T::pack(packer_, m)); }
  bool exceeded() const { return exceeded_; }
  std::size_t size() const { return order_.size(); }

  MatGroup finish() {
    MatGroup g;
    g.ring = ring_;
    g.n = n_;
    g.generators = gens_;
    g.packer = packer_;
    g.budget_exceeded = exceeded_;
    g.frontier_reached = order_.size();
    g.has_words = words_;
    if constexpr (std::is_same_v<T, Traits64>) {
      g.wide = false;
      g.elements = std::move(order_);
      std::sort(g.elements.begin(), g.elements.end());
      g.parents = std::move(parents_);
    } else {
      g.wide = true;
      g.elements128 = std::move(order_);
      std::sort(g.elements128.begin(), g.elements128.end());
    }
    return g;
  }

private:
  static std::uint64_t key64(std::uint64_t k) { return k; }
  static std::uint64_t key64(Key128) { return 0; }  // words are 64-bit only

  RingPtr ring_;
  int n_;
  MatPacker packer_;
  std::size_t max_;
  bool words_;
  typename T::Set set_;
  std::vector<Mat> gens_;
  std::vector<Mat> moves_;  // gen, gen^-1 pairs
  std::vector<typename T::Key> order_;
  std::vector<std::uint32_t> upto_;
  std::unordered_map<std::uint64_t, MatGroup::Parent> parents_;
  bool exceeded_ = false;
};

bool fits64(const MatPacker& p) { return p.fits_mat(); }

template <class Body>
MatGroup with_engine(RingPtr ring, int n, const GroupBudget& budget, bool record_words,
                     Body body) {
  MatPacker p(*ring, n);
  if (fits64(p)) {
    Engine<Traits64> eng(ring, n, budget.max_elements, record_words);
    body(eng);
    return eng.finish();
  }
  if (std::size_t(n) * n * p.bits > 126)
    throw group_error("matrix group too wide to pack (n and ring size too large)");
  if (record_words) throw group_error("word recording requires 64-bit packing");
  Engine<TraitsWide> eng(ring, n, budget.max_elements, record_words);
  body(eng);
  return eng.finish();
}

}  // namespace

Key128 pack_wide(const MatPacker& p, const Mat& m) {
  Key128 k;
  for (int idx = m.n * m.n - 1; idx >= 0; idx--) {
    k.hi = (k.hi << p.bits) | (k.lo >> (64 - p.bits));
    k.lo = (k.lo << p.bits) | m.e[idx];
  }
  return k;
}

Mat unpack_wide(const MatPacker& p, Key128 k) {
  Mat m;
  m.ring = p.ring;
  m.n = p.n;
  const std::uint64_t mask = (1ull << p.bits) - 1;
  for (int idx = 0; idx < p.n * p.n; idx++) {
    m.e[idx] = Elem(k.lo & mask);
    k.lo = (k.lo >> p.bits) | (k.hi << (64 - p.bits));
    k.hi >>= p.bits;
  }
  return m;
}

bool MatGroup::contains(const Mat& m) const {
  if (wide) {
    Key128 k = pack_wide(packer, m);
    return std::binary_search(elements128.begin(), elements128.end(), k);
  }
  return std::binary_search(elements.begin(), elements.end(), packer.pack(m));
}

Mat MatGroup::element(std::size_t idx) const {
  return wide ? unpack_wide(packer, elements128[idx]) : packer.unpack(elements[idx]);
}

std::uint64_t MatGroup::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull ^ (std::uint64_t(n) << 32);
  auto mixin = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ull;
  };
  if (wide)
    for (const Key128& k : elements128) {
      mixin(k.lo);
      mixin(k.hi);
    }
  else
    for (std::uint64_t k : elements) mixin(k);
  return h;
}

MatGroup closure(RingPtr ring, int n, std::vector<Mat> generators, bool record_words,
                 const GroupBudget& budget) {
  for (const Mat& g : generators)
    if (!ring->is_unit(determinant(g)))
      throw group_error("closure generator is not invertible");
  return with_engine(ring, n, budget, record_words, [&](auto& eng) {
    for (const Mat& g : generators) eng.add_generator(g);
    eng.run();
  });
}

std::vector<Mat> elementary_generators(RingPtr ring, int n) {
  std::vector<Mat> gens;
  for (int i = 0; i < n; i++)
    for (int j = 0; j < n; j++) {
      if (i == j) continue;
      for (Elem lam = 0; lam < ring->size(); lam++) {
        if (lam == ring->zero()) continue;
        gens.push_back(elementary(*ring, n, i, j, lam));
      }
    }
  return gens;
}

MatGroup elementary_group(RingPtr ring, int n, const GroupBudget& budget) {
  return closure(ring, n, elementary_generators(ring, n), false, budget);
}

namespace {

MatGroup relative_normal_closure(RingPtr ring, const Ideal& ideal, int n,
                                 const GroupBudget& budget) {
  std::vector<Mat> ambient;
  for (const Mat& g : elementary_generators(ring, n)) {
    ambient.push_back(g);
    ambient.push_back(mat_inverse(g));
  }
  return with_engine(ring, n, budget, false, [&](auto& eng) {
    std::vector<Mat> pool;
    for (Elem x : ideal.members) {
      if (x == ring->zero()) continue;
      pool.push_back(elementary(*ring, n, 1, 0, x));  // E_21(x)
      eng.add_generator(pool.back());
    }
    if (n >= 3) {
      // E_ij(x), x in I, are conjugates of E_21 elements for n >= 3;
      // seeding them shortens the conjugation rounds without changing
      // the closure (checked against the unseeded run in the tests).
      for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++) {
          if (i == j || (i == 1 && j == 0)) continue;
          for (Elem x : ideal.members) {
            if (x == ring->zero()) continue;
            pool.push_back(elementary(*ring, n, i, j, x));
            eng.add_generator(pool.back());
          }
        }
    }
    if (!eng.run()) return;
    // close the generator list under conjugation by E_n(R) generators
    for (std::size_t head = 0; head < pool.size(); head++) {
      Mat t = pool[head];
      for (const Mat& a : ambient) {
        Mat c = mat_mul(mat_mul(a, t), mat_inverse(a));
        if (!eng.contains(c)) {
          pool.push_back(c);
          eng.add_generator(c);
          if (!eng.run()) return;
        }
      }
    }
  });
}

MatGroup relative_intersection(RingPtr ring, const Ideal& ideal, int n,
                               const GroupBudget& budget) {
  if (n < 3)
    throw group_error("intersection method for E_n(R,I) is stated for n >= 3");
  std::vector<Mat> gens;
  for (int i = 1; i < n; i++) {
    for (Elem a = 0; a < ring->size(); a++)
      if (a != ring->zero()) gens.push_back(elementary(*ring, n, 0, i, a));
    for (Elem x : ideal.members)
      if (x != ring->zero()) gens.push_back(elementary(*ring, n, i, 0, x));
  }
  MatGroup e1 = closure(ring, n, std::move(gens), false, budget);
  MatGroup out;
  out.ring = ring;
  out.n = n;
  out.packer = e1.packer;
  out.wide = e1.wide;
  out.budget_exceeded = e1.budget_exceeded;
  out.frontier_reached = e1.frontier_reached;
  if (e1.wide) {
    for (const Key128& k : e1.elements128)
      if (congruent_identity(unpack_wide(e1.packer, k), ideal))
        out.elements128.push_back(k);
  } else {
    for (std::uint64_t k : e1.elements)
      if (congruent_identity(e1.packer.unpack(k), ideal)) out.elements.push_back(k);
  }
  return out;
}

}  // namespace

MatGroup relative_elementary_group(RingPtr ring, const Ideal& ideal, int n,
                                   RelativeMethod method, const GroupBudget& budget) {
  if (ideal.ring.get() != ring.get())
    throw group_error("ideal does not live in the given ring");
  switch (method) {
    case RelativeMethod::NormalClosure:
      return relative_normal_closure(ring, ideal, n, budget);
    case RelativeMethod::Intersection:
      return relative_intersection(ring, ideal, n, budget);
    case RelativeMethod::CrossValidated: {
      MatGroup nc = relative_normal_closure(ring, ideal, n, budget);
      MatGroup is = relative_intersection(ring, ideal, n, budget);
      if (nc.budget_exceeded || is.budget_exceeded) {
        nc.budget_exceeded = true;
        return nc;
      }
      bool equal = nc.wide == is.wide &&
                   (nc.wide ? nc.elements128 == is.elements128
                            : nc.elements == is.elements);
      if (!equal)
        throw group_error(
            "relative elementary group: normal-closure and intersection methods "
            "disagree (|nc|=" +
            std::to_string(nc.size()) + ", |e1 cap gl|=" + std::to_string(is.size()) +
            ")");
      return nc;
    }
  }
  throw group_error("bad relative method");
}

std::vector<Mat> relative_generators(RingPtr ring, const Ideal& ideal, int n) {
  if (n < 3) throw group_error("relative generator set is stated for n >= 3");
  MatPacker packer(*ring, n);
  std::vector<Mat> out;
  std::unordered_set<std::uint64_t> seen;
  std::unordered_set<Key128, Key128Hash> seen_wide;
  bool use64 = packer.fits_mat();
  auto push = [&](const Mat& g) {
    if (is_identity(g)) return;
    if (use64) {
      if (seen.insert(packer.pack(g)).second) out.push_back(g);
    } else {
      if (seen_wide.insert(pack_wide(packer, g)).second) out.push_back(g);
    }
  };
  for (int i = 0; i < n; i++)
    for (int j = 0; j < n; j++) {
      if (i == j) continue;
      for (Elem a = 0; a < ring->size(); a++)
        for (Elem x : ideal.members) {
          if (x == ring->zero()) continue;
          Mat g = mat_mul(mat_mul(elementary(*ring, n, i, j, a),
                                  elementary(*ring, n, j, i, x)),
                          elementary(*ring, n, i, j, ring->neg(a)));
          push(g);
        }
    }
  return out;
}

MatGroup generators_only_group(RingPtr ring, int n, std::vector<Mat> gens) {
  MatGroup g;
  g.ring = ring;
  g.n = n;
  g.packer = MatPacker(*ring, n);
  g.wide = !g.packer.fits_mat();
  g.generators = std::move(gens);
  return g;
}

namespace {

MatGroup congruence_enum(RingPtr ring, const Ideal& ideal, int n, bool det_one,
                         const GroupBudget& budget) {
  MatPacker packer(*ring, n);
  MatGroup out;
  out.ring = ring;
  out.n = n;
  out.packer = packer;
  out.wide = !packer.fits_mat();
  if (out.wide && std::size_t(n) * n * packer.bits > 126)
    throw group_error("congruence set too wide to pack");

  const std::size_t cells = std::size_t(n) * n;
  const std::size_t isize = ideal.members.size();
  double total = 1;
  for (std::size_t c = 0; c < cells; c++) total *= double(isize);
  if (total > double(budget.max_enumeration)) {
    out.budget_exceeded = true;
    return out;
  }

  std::vector<std::size_t> digit(cells, 0);
  Mat m = mat_identity(*ring, n);
  const Elem one = ring->one();
  auto entry_of = [&](std::size_t cell, std::size_t d) {
    Elem shift = ideal.members[d];
    bool diag = cell / n == cell % n;
    return diag ? ring->add(one, shift) : shift;
  };
  for (std::size_t cell = 0; cell < cells; cell++) m.e[cell] = entry_of(cell, 0);

  while (true) {
    Elem d = determinant(m);
    bool ok = det_one ? d == one : ring->is_unit(d);
    if (ok) {
      if (out.size() >= budget.max_elements) {
        out.budget_exceeded = true;
        return out;
      }
      if (out.wide)
        out.elements128.push_back(pack_wide(packer, m));
      else
        out.elements.push_back(packer.pack(m));
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
  if (out.wide)
    std::sort(out.elements128.begin(), out.elements128.end());
  else
    std::sort(out.elements.begin(), out.elements.end());
  return out;
}

}  // namespace

MatGroup congruence_sl(RingPtr ring, const Ideal& ideal, int n,
                       const GroupBudget& budget) {
  return congruence_enum(ring, ideal, n, true, budget);
}

MatGroup congruence_gl(RingPtr ring, const Ideal& ideal, int n,
                       const GroupBudget& budget) {
  return congruence_enum(ring, ideal, n, false, budget);
}

Word factorize(const MatGroup& group, const Mat& g) {
  if (!group.has_words) throw group_error("group was built without word recording");
  if (!group.contains(g)) throw group_error("element not in group");
  Word w;
  std::uint64_t cur = group.packer.pack(g);
  std::uint64_t id = group.packer.pack(mat_identity(*group.ring, group.n));
  while (cur != id) {
    auto it = group.parents.find(cur);
    if (it == group.parents.end()) throw group_error("broken word table");
    w.push_back(WordLetter{it->second.gen, it->second.inverse != 0});
    cur = it->second.prev;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

Mat evaluate_word(const MatGroup& group, const Word& w) {
  Mat acc = mat_identity(*group.ring, group.n);
  for (const WordLetter& l : w) {
    const Mat& g = group.generators.at(l.gen);
    acc = mat_mul(acc, l.inverse ? mat_inverse(g) : g);
  }
  return acc;
}

namespace {

// Searches coefficients c over the rows below the pivot making
// pivot + sum c_r * col[r] a unit; brute force in index order.
bool unit_pivot_coeffs(const FiniteRing& r, const std::vector<Elem>& col,
                       std::vector<Elem>& coeffs) {
  std::size_t m = col.size() - 1;  // rows available to add
  coeffs.assign(m, r.zero());
  if (m == 0) return r.is_unit(col[0]);
  std::vector<std::size_t> digit(m, 0);
  while (true) {
    Elem acc = col[0];
    for (std::size_t i = 0; i < m; i++)
      acc = r.add(acc, r.mul(Elem(digit[i]), col[i + 1]));
    if (r.is_unit(acc)) {
      for (std::size_t i = 0; i < m; i++) coeffs[i] = Elem(digit[i]);
      return true;
    }
    std::size_t i = 0;
    while (i < m) {
      digit[i]++;
      if (digit[i] < r.size()) break;
      digit[i] = 0;
      i++;
    }
    if (i == m) return false;
  }
}

}  // namespace

std::optional<std::vector<Mat>> elementary_reduction(const Mat& g) {
  const FiniteRing& r = *g.ring;
  const int n = g.n;
  if (determinant(g) != r.one()) return std::nullopt;
  std::vector<Mat> ops;
  Mat m = g;
  auto apply = [&](int i, int j, Elem lam) {
    // left-multiply by E_ij(lam): row i += lam * row j
    for (int c = 0; c < n; c++)
      m.at(i, c) = r.add(m.at(i, c), r.mul(lam, m.at(j, c)));
    ops.push_back(elementary(r, n, i, j, lam));
  };

  // phase 1: unit pivots on the diagonal, clear below
  for (int k = 0; k < n; k++) {
    std::vector<Elem> col;
    for (int i = k; i < n; i++) col.push_back(m.at(i, k));
    std::vector<Elem> coeffs;
    if (!unit_pivot_coeffs(r, col, coeffs)) return std::nullopt;
    for (std::size_t t = 0; t < coeffs.size(); t++)
      if (coeffs[t] != r.zero()) apply(k, k + 1 + int(t), coeffs[t]);
    Elem pivot = m.at(k, k);
    Elem pinv = *r.inv(pivot);
    for (int i = k + 1; i < n; i++) {
      Elem v = m.at(i, k);
      if (v != r.zero()) apply(i, k, r.neg(r.mul(v, pinv)));
    }
  }
  // phase 2: clear above the diagonal, right to left
  for (int j = n - 1; j >= 1; j--) {
    Elem pinv = *r.inv(m.at(j, j));
    for (int i = 0; i < j; i++) {
      Elem v = m.at(i, j);
      if (v != r.zero()) apply(i, j, r.neg(r.mul(v, pinv)));
    }
  }
  // phase 3: fold diag(u, v) -> diag(1, uv) pairwise
  for (int k = 0; k + 1 < n; k++) {
    Elem u = m.at(k, k);
    if (u == r.one()) continue;
    Elem v = m.at(k + 1, k + 1);
    Elem uinv = *r.inv(u), vinv = *r.inv(v);
    apply(k, k + 1, r.mul(r.sub(r.one(), u), vinv));
    apply(k + 1, k, r.one());
    apply(k, k + 1, r.sub(uinv, r.one()));
    apply(k + 1, k, r.neg(u));
    Elem x = m.at(k, k + 1);
    Elem z = m.at(k + 1, k + 1);
    if (!r.is_unit(z)) return std::nullopt;
    if (x != r.zero()) apply(k, k + 1, r.neg(r.mul(x, *r.inv(z))));
  }
  if (!is_identity(m)) return std::nullopt;
  return ops;
}

}  // namespace umrow
