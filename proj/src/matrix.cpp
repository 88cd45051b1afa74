#include "umrow/matrix.hpp"

#include <algorithm>
#include <sstream>

namespace umrow {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw matrix_error(msg);
}

struct Perm {
  std::array<std::uint8_t, kMaxMatDim> p;
  bool even;
};

// All permutations of {0..n-1} with parity, built once per n.
const std::vector<Perm>& perms_of(int n) {
  static std::vector<Perm> cache[kMaxMatDim + 1];
  std::vector<Perm>& out = cache[n];
  if (!out.empty()) return out;
  std::array<std::uint8_t, kMaxMatDim> idx{};
  for (int i = 0; i < n; i++) idx[i] = std::uint8_t(i);
  std::vector<std::uint8_t> v(idx.begin(), idx.begin() + n);
  do {
    Perm q{};
    int inversions = 0;
    for (int i = 0; i < n; i++) {
      q.p[i] = v[i];
      for (int j = i + 1; j < n; j++)
        if (v[j] < v[i]) inversions++;
    }
    q.even = inversions % 2 == 0;
    out.push_back(q);
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

}  // namespace

Mat mat_identity(const FiniteRing& ring, int n) {
  require(n >= 1 && n <= kMaxMatDim, "matrix dimension out of range");
  Mat m;
  m.ring = &ring;
  m.n = std::uint8_t(n);
  for (int i = 0; i < n; i++)
    for (int j = 0; j < n; j++) m.at(i, j) = i == j ? ring.one() : ring.zero();
  return m;
}

Mat elementary(const FiniteRing& ring, int n, int i, int j, Elem lambda) {
  require(i != j && i >= 0 && j >= 0 && i < n && j < n, "bad transvection position");
  Mat m = mat_identity(ring, n);
  m.at(i, j) = lambda;
  return m;
}

Mat realize(const FiniteRing& ring, int n, const ElemGen& g) {
  return elementary(ring, n, g.i, g.j, g.lambda);
}

Mat mat_mul(const Mat& a, const Mat& b) {
  require(a.ring == b.ring && a.n == b.n, "matrix ring/size mismatch");
  const FiniteRing& r = *a.ring;
  Mat out;
  out.ring = a.ring;
  out.n = a.n;
  for (int i = 0; i < a.n; i++)
    for (int j = 0; j < a.n; j++) {
      Elem acc = r.zero();
      for (int k = 0; k < a.n; k++) acc = r.add(acc, r.mul(a.at(i, k), b.at(k, j)));
      out.at(i, j) = acc;
    }
  return out;
}

Mat mat_transpose(const Mat& a) {
  Mat out;
  out.ring = a.ring;
  out.n = a.n;
  for (int i = 0; i < a.n; i++)
    for (int j = 0; j < a.n; j++) out.at(i, j) = a.at(j, i);
  return out;
}

Mat mat_neg(const Mat& a) {
  Mat out = a;
  for (int k = 0; k < a.n * a.n; k++) out.e[k] = a.ring->neg(a.e[k]);
  return out;
}

// Leibniz permutation sum; valid over any commutative ring (no division).
Elem determinant(const Mat& a) {
  const FiniteRing& r = *a.ring;
  Elem pos = r.zero(), neg = r.zero();
  for (const Perm& q : perms_of(a.n)) {
    Elem term = r.one();
    for (int i = 0; i < a.n; i++) term = r.mul(term, a.at(i, q.p[i]));
    if (q.even)
      pos = r.add(pos, term);
    else
      neg = r.add(neg, term);
  }
  return r.sub(pos, neg);
}

namespace {

Elem minor_det(const Mat& a, int skip_row, int skip_col) {
  Mat sub;
  sub.ring = a.ring;
  sub.n = std::uint8_t(a.n - 1);
  int si = 0;
  for (int i = 0; i < a.n; i++) {
    if (i == skip_row) continue;
    int sj = 0;
    for (int j = 0; j < a.n; j++) {
      if (j == skip_col) continue;
      sub.at(si, sj) = a.at(i, j);
      sj++;
    }
    si++;
  }
  return determinant(sub);
}

}  // namespace

Mat mat_inverse(const Mat& a) {
  const FiniteRing& r = *a.ring;
  Elem d = determinant(a);
  auto dinv = r.inv(d);
  require(dinv.has_value(), "matrix not invertible (det not a unit)");
  if (a.n == 1) {
    Mat out = a;
    out.at(0, 0) = *dinv;
    return out;
  }
  Mat out;
  out.ring = a.ring;
  out.n = a.n;
  for (int i = 0; i < a.n; i++)
    for (int j = 0; j < a.n; j++) {
      Elem c = minor_det(a, j, i);  // adjugate transposes the cofactors
      if ((i + j) % 2 != 0) c = r.neg(c);
      out.at(i, j) = r.mul(c, *dinv);
    }
  return out;
}

bool is_identity(const Mat& a) {
  const FiniteRing& r = *a.ring;
  for (int i = 0; i < a.n; i++)
    for (int j = 0; j < a.n; j++)
      if (a.at(i, j) != (i == j ? r.one() : r.zero())) return false;
  return true;
}

bool congruent_identity(const Mat& a, const Ideal& ideal) {
  const FiniteRing& r = *a.ring;
  for (int i = 0; i < a.n; i++)
    for (int j = 0; j < a.n; j++) {
      Elem expect = i == j ? r.one() : r.zero();
      if (!ideal.contains(r.sub(a.at(i, j), expect))) return false;
    }
  return true;
}

RowVec make_row(const FiniteRing& ring, std::initializer_list<Elem> entries) {
  require(entries.size() >= 1 && entries.size() <= kMaxMatDim, "bad row length");
  RowVec v;
  v.ring = &ring;
  v.n = std::uint8_t(entries.size());
  int k = 0;
  for (Elem x : entries) v.e[k++] = x;
  return v;
}

RowVec unit_row(const FiniteRing& ring, int n) {
  require(n >= 1 && n <= kMaxMatDim, "bad row length");
  RowVec v;
  v.ring = &ring;
  v.n = std::uint8_t(n);
  v.e[0] = ring.one();
  for (int k = 1; k < n; k++) v.e[k] = ring.zero();
  return v;
}

RowVec row_action(const RowVec& v, const Mat& g) {
  require(v.ring == g.ring && v.n == g.n, "row/matrix mismatch");
  const FiniteRing& r = *v.ring;
  RowVec out;
  out.ring = v.ring;
  out.n = v.n;
  for (int j = 0; j < v.n; j++) {
    Elem acc = r.zero();
    for (int i = 0; i < v.n; i++) acc = r.add(acc, r.mul(v.e[i], g.at(i, j)));
    out.e[j] = acc;
  }
  return out;
}

Elem dot(const RowVec& v, const RowVec& w) {
  require(v.ring == w.ring && v.n == w.n, "row length mismatch");
  const FiniteRing& r = *v.ring;
  Elem acc = r.zero();
  for (int k = 0; k < v.n; k++) acc = r.add(acc, r.mul(v.e[k], w.e[k]));
  return acc;
}

std::string format_row(const RowVec& v) {
  std::ostringstream os;
  os << "[";
  for (int k = 0; k < v.n; k++) {
    if (k) os << ",";
    os << v.ring->format_element(v.e[k]);
  }
  os << "]";
  return os.str();
}

MatPacker::MatPacker(const FiniteRing& r, int dim) {
  ring = &r;
  n = std::uint8_t(dim);
  bits = 1;
  while ((1u << bits) < r.size()) bits++;
}

}  // namespace umrow
