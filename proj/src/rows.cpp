#include "umrow/rows.hpp"

#include <algorithm>
#include <deque>

namespace umrow {

namespace {

// Additive closure of a set of ring elements (a subgroup of (R,+)).
std::vector<char> additive_closure(const FiniteRing& r, std::vector<Elem> seed) {
  std::vector<char> mask(r.size(), 0);
  std::vector<Elem> work;
  auto push = [&](Elem x) {
    if (!mask[x]) {
      mask[x] = 1;
      work.push_back(x);
    }
  };
  push(r.zero());
  for (Elem s : seed) push(s);
  for (std::size_t h = 0; h < work.size(); h++)
    for (std::size_t j = 0; j <= h; j++) push(r.add(work[h], work[j]));
  return mask;
}

// Per-space helper: membership masks of the reachable-sum sets
// S_k = v_k*A + v_{k+1}*A + ... where A is the allowed coefficient set
// (R for absolute, I for relative certificates). Memoized on the sorted
// suffix so enumeration over many rows shares the work.
class SuffixSets {
public:
  SuffixSets(const FiniteRing& ring, std::vector<Elem> coeff_set)
      : ring_(ring), coeffs_(std::move(coeff_set)) {}

  const std::vector<char>& mask_of(const Elem* suffix, int len) {
    std::uint64_t key = 1;
    std::array<Elem, kMaxMatDim> sorted{};
    std::copy(suffix, suffix + len, sorted.begin());
    std::sort(sorted.begin(), sorted.begin() + len);
    for (int i = 0; i < len; i++) key = key * 4099 + sorted[i] + 1;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<Elem> seed;
    for (int i = 0; i < len; i++)
      for (Elem c : coeffs_) seed.push_back(ring_.mul(suffix[i], c));
    return memo_.emplace(key, additive_closure(ring_, std::move(seed))).first->second;
  }

private:
  const FiniteRing& ring_;
  std::vector<Elem> coeffs_;
  std::unordered_map<std::uint64_t, std::vector<char>> memo_;
};

}  // namespace

bool row_unimodular(const FiniteRing& ring, const RowVec& v) {
  std::vector<Elem> all(ring.size());
  for (Elem x = 0; x < ring.size(); x++) all[x] = x;
  SuffixSets sets(ring, all);
  return sets.mask_of(v.e.data(), v.n)[ring.one()];
}

namespace {

std::optional<RowVec> guided_certificate(const FiniteRing& ring, const RowVec& v,
                                         const std::vector<std::vector<Elem>>& allowed,
                                         SuffixSets& sets) {
  const int n = v.n;
  RowVec w;
  w.ring = &ring;
  w.n = std::uint8_t(n);
  // choose w_k so that the remaining target stays reachable by the suffix
  std::vector<Elem> target(n + 1);
  target[0] = ring.one();
  std::vector<int> choice(n, -1);
  int k = 0;
  while (k >= 0 && k < n) {
    bool advanced = false;
    for (int ci = choice[k] + 1; ci < int(allowed[k].size()); ci++) {
      Elem wk = allowed[k][ci];
      Elem rest = ring.sub(target[k], ring.mul(v.e[k], wk));
      bool feasible;
      if (k + 1 < n)
        feasible = sets.mask_of(v.e.data() + k + 1, n - k - 1)[rest] != 0;
      else
        feasible = rest == ring.zero();
      if (feasible) {
        choice[k] = ci;
        w.e[k] = wk;
        target[k + 1] = rest;
        k++;
        advanced = true;
        break;
      }
    }
    if (!advanced) {
      choice[k] = -1;
      k--;  // backtrack
    }
  }
  if (k < 0) return std::nullopt;
  return w;
}

}  // namespace

std::optional<RowVec> find_certificate(const FiniteRing& ring, const RowVec& v,
                                       const Ideal* ideal) {
  std::vector<std::vector<Elem>> allowed(v.n);
  std::vector<Elem> coeffs;
  if (ideal) {
    coeffs = ideal->members;
    for (int k = 0; k < v.n; k++) {
      if (k == 0)
        for (Elem i : ideal->members) allowed[k].push_back(ring.add(ring.one(), i));
      else
        allowed[k] = ideal->members;
    }
    std::sort(allowed[0].begin(), allowed[0].end());
    allowed[0].erase(std::unique(allowed[0].begin(), allowed[0].end()),
                     allowed[0].end());
  } else {
    coeffs.resize(ring.size());
    for (Elem x = 0; x < ring.size(); x++) coeffs[x] = x;
    for (int k = 0; k < v.n; k++) allowed[k] = coeffs;
  }
  SuffixSets sets(ring, coeffs);
  return guided_certificate(ring, v, allowed, sets);
}

std::vector<UmRow> enumerate_um(RingPtr ring, int n, const std::optional<Ideal>& ideal,
                                const RowBudget& budget) {
  if (n < 1 || n > kMaxMatDim) throw row_error("row length out of range");
  if (ideal && ideal->ring.get() != ring.get())
    throw row_error("ideal does not live in the given ring");

  std::vector<std::vector<Elem>> values(n);
  if (ideal) {
    for (Elem i : ideal->members) values[0].push_back(ring->add(ring->one(), i));
    std::sort(values[0].begin(), values[0].end());
    values[0].erase(std::unique(values[0].begin(), values[0].end()), values[0].end());
    for (int k = 1; k < n; k++) values[k] = ideal->members;
  } else {
    std::vector<Elem> all(ring->size());
    for (Elem x = 0; x < ring->size(); x++) all[x] = x;
    for (int k = 0; k < n; k++) values[k] = all;
  }

  double total = 1;
  for (int k = 0; k < n; k++) total *= double(values[k].size());
  if (total > double(budget.max_candidates))
    throw budget_error("unimodular row enumeration exceeds candidate budget");

  std::vector<Elem> all(ring->size());
  for (Elem x = 0; x < ring->size(); x++) all[x] = x;
  SuffixSets um_sets(*ring, all);

  std::vector<Elem> cert_coeffs;
  if (ideal)
    cert_coeffs = ideal->members;
  else
    cert_coeffs = all;
  SuffixSets cert_sets(*ring, cert_coeffs);
  std::vector<std::vector<Elem>> cert_allowed(n);
  for (int k = 0; k < n; k++) cert_allowed[k] = values[k];

  std::vector<UmRow> out;
  std::vector<std::size_t> digit(n, 0);
  RowVec v;
  v.ring = ring.get();
  v.n = std::uint8_t(n);
  for (int k = 0; k < n; k++) v.e[k] = values[k][0];
  while (true) {
    if (um_sets.mask_of(v.e.data(), n)[ring->one()]) {
      auto cert = guided_certificate(*ring, v, cert_allowed, cert_sets);
      if (!cert)
        throw row_error("no " + std::string(ideal ? "relative " : "") +
                        "certificate found for unimodular row " + format_row(v) +
                        " (inconsistency)");
      out.push_back(UmRow{v, *cert});
    }
    // lex odometer: last coordinate fastest, so rows come out lex-sorted
    int k = n - 1;
    while (k >= 0) {
      digit[k]++;
      if (digit[k] < values[k].size()) {
        v.e[k] = values[k][digit[k]];
        break;
      }
      digit[k] = 0;
      v.e[k] = values[k][0];
      k--;
    }
    if (k < 0) break;
  }
  return out;
}

bool OrbitSpace::has_row(const RowVec& v) const {
  return index.count(packer.pack_row(v)) != 0;
}

std::uint32_t OrbitSpace::row_id(const RowVec& v) const {
  auto it = index.find(packer.pack_row(v));
  if (it == index.end())
    throw row_error("row " + format_row(v) + " is not in the enumerated set");
  return it->second;
}

std::uint32_t OrbitSpace::class_of_row(const RowVec& v) const {
  return class_ids[row_id(v)];
}

OrbitSpace orbit_space(RingPtr ring, int n, std::optional<Ideal> ideal,
                       std::shared_ptr<const MatGroup> acting, const RowBudget& budget) {
  if (ideal && n < 3)
    throw row_error("relative orbit spaces require n >= 3");
  OrbitSpace space;
  space.ring = ring;
  space.n = n;
  space.ideal = ideal;
  space.packer = MatPacker(*ring, n);
  if (!space.packer.fits_row()) throw row_error("rows too wide to pack");
  space.rows = enumerate_um(ring, n, ideal, budget);
  space.index.reserve(space.rows.size() * 2);
  for (std::uint32_t id = 0; id < space.rows.size(); id++)
    space.index.emplace(space.packer.pack_row(space.rows[id].entries), id);

  // Acting set: explicit override wins; otherwise single elementary moves
  // (absolute) or the relative group's generator list (relative).
  std::vector<Mat> movers;
  bool single_steps = false;
  if (acting) {
    space.acting = acting;
    if (!acting->generators.empty()) {
      for (const Mat& g : acting->generators) {
        movers.push_back(g);
        movers.push_back(mat_inverse(g));
      }
    } else {
      for (std::size_t i = 0; i < acting->size(); i++) movers.push_back(acting->element(i));
    }
  } else if (ideal) {
    throw row_error("relative orbit space needs the acting relative group");
  } else {
    single_steps = true;
  }

  space.class_ids.assign(space.rows.size(), 0xffffffffu);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t start = 0; start < space.rows.size(); start++) {
    if (space.class_ids[start] != 0xffffffffu) continue;
    std::uint32_t cls = std::uint32_t(space.classes.size());
    space.classes.push_back(OrbitSpace::ClassInfo{start, {}});
    space.class_ids[start] = cls;
    queue.clear();
    queue.push_back(start);
    while (!queue.empty()) {
      std::uint32_t cur = queue.front();
      queue.pop_front();
      space.classes[cls].members.push_back(cur);
      const RowVec& v = space.rows[cur].entries;
      auto visit = [&](const RowVec& w) {
        auto it = space.index.find(space.packer.pack_row(w));
        if (it == space.index.end()) {
          // acting set must preserve the row set; anything else is a bug
          throw row_error("orbit action left the enumerated row set at " +
                          format_row(w));
        }
        if (space.class_ids[it->second] == 0xffffffffu) {
          space.class_ids[it->second] = cls;
          queue.push_back(it->second);
        }
      };
      if (single_steps) {
        for (int i = 0; i < n; i++)
          for (int j = 0; j < n; j++) {
            if (i == j) continue;
            for (Elem lam = 0; lam < ring->size(); lam++) {
              if (lam == ring->zero()) continue;
              visit(row_action_elementary(v, i, j, lam));
            }
          }
      } else {
        for (const Mat& g : movers) visit(row_action(v, g));
      }
    }
    std::sort(space.classes[cls].members.begin(), space.classes[cls].members.end());
  }
  return space;
}

std::uint32_t class_of(const OrbitSpace& space, const RowVec& v) {
  return space.class_of_row(v);
}

}  // namespace umrow
