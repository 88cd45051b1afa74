#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "matrix.hpp"

namespace umrow {

class group_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GroupBudget {
  std::size_t max_elements = 2'000'000;
  // iteration cap for congruence-set enumeration (|I|^(n^2) candidates)
  std::size_t max_enumeration = 400'000'000;
};

struct WordLetter {
  std::uint32_t gen = 0;
  bool inverse = false;
};
using Word = std::vector<WordLetter>;

struct Key128 {
  std::uint64_t lo = 0, hi = 0;
  friend bool operator==(const Key128& a, const Key128& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
  friend bool operator<(const Key128& a, const Key128& b) {
    return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo;
  }
};

struct Key128Hash {
  std::size_t operator()(const Key128& k) const {
    std::uint64_t h = k.lo * 0x9e3779b97f4a7c15ull;
    h ^= (k.hi + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 32;
    return std::size_t(h);
  }
};

// A BFS-closed set of n x n matrices. Elements are stored as sorted packed
// keys: 64-bit when n^2*bits <= 63, 128-bit otherwise. Immutable once built.
struct MatGroup {
  RingPtr ring;
  int n = 0;
  std::vector<Mat> generators;
  MatPacker packer;
  bool wide = false;  // true -> elements128 is the store

  std::vector<std::uint64_t> elements;  // sorted
  std::vector<Key128> elements128;      // sorted

  bool budget_exceeded = false;
  std::size_t frontier_reached = 0;

  bool has_words = false;
  struct Parent {
    std::uint64_t prev;
    std::uint32_t gen;
    std::uint8_t inverse;
  };
  std::unordered_map<std::uint64_t, Parent> parents;

  std::size_t size() const { return wide ? elements128.size() : elements.size(); }
  bool contains(const Mat& m) const;
  Mat element(std::size_t idx) const;
  std::uint64_t content_hash() const;
};

Key128 pack_wide(const MatPacker& p, const Mat& m);
Mat unpack_wide(const MatPacker& p, Key128 k);

// BFS fixpoint of the subgroup generated by `generators` (right
// multiplication by generators and their inverses, level order, generator
// index order). With record_words, keeps a shortest-word parent table.
MatGroup closure(RingPtr ring, int n, std::vector<Mat> generators, bool record_words,
                 const GroupBudget& budget = {});

// E_n(R): all E_ij(lambda), lambda != 0.
MatGroup elementary_group(RingPtr ring, int n, const GroupBudget& budget = {});
std::vector<Mat> elementary_generators(RingPtr ring, int n);

enum class RelativeMethod { NormalClosure, Intersection, CrossValidated };

// E_n(R, I) by the chosen construction. NormalClosure: smallest normal
// subgroup of E_n(R) containing E_21(x), x in I (incremental conjugation
// closure; the generator list it reports generates the group). Intersection
// (n >= 3 only): closure of the E^1 generators {E_1i(a), a in R} u
// {E_i1(x), x in I} filtered by the congruence condition g == I mod I.
// CrossValidated runs both and throws group_error on disagreement.
MatGroup relative_elementary_group(RingPtr ring, const Ideal& ideal, int n,
                                   RelativeMethod method,
                                   const GroupBudget& budget = {});

// Explicit generating set {E_ij(a) E_ji(x) E_ij(-a) : a in R, x in I} of
// E_n(R,I) for n >= 3, deduplicated. Lets orbit computations act by
// generators without materializing the group; validated against the
// materialized constructions in the test suite.
std::vector<Mat> relative_generators(RingPtr ring, const Ideal& ideal, int n);

// Wraps a generator list as an element-less MatGroup (generators-only;
// contains() is always false, so membership must be certified separately).
MatGroup generators_only_group(RingPtr ring, int n, std::vector<Mat> gens);

// {g : g == I mod I, det g = 1} and {g : g == I mod I, det g a unit},
// enumerated directly from the congruence pattern.
MatGroup congruence_sl(RingPtr ring, const Ideal& ideal, int n,
                       const GroupBudget& budget = {});
MatGroup congruence_gl(RingPtr ring, const Ideal& ideal, int n,
                       const GroupBudget& budget = {});

// Shortest word over the group's generators evaluating to g.
// Requires the group to have been built with record_words.
Word factorize(const MatGroup& group, const Mat& g);
Mat evaluate_word(const MatGroup& group, const Word& w);

// Constructive membership certificate for E_n(R): a sequence of left
// row operations (recorded as matrices) reducing g to the identity.
// Success proves membership; nullopt means the greedy unit-pivot search
// failed (cannot happen for det-1 matrices over the semilocal rings in
// scope, but callers must treat it as undecided, not as a disproof).
std::optional<std::vector<Mat>> elementary_reduction(const Mat& g);

}  // namespace umrow
