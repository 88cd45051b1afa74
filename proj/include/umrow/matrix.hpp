#pragma once

#include <array>
#include <cstdint>

#include "ring.hpp"

namespace umrow {

inline constexpr int kMaxMatDim = 6;

// Dense n x n matrix over a realized finite ring, 2 <= n <= 6.
// Value type; rows/columns are 0-based throughout the code base.
struct Mat {
  const FiniteRing* ring = nullptr;
  std::uint8_t n = 0;
  std::array<Elem, kMaxMatDim * kMaxMatDim> e{};

  Elem& at(int i, int j) { return e[std::size_t(i) * n + j]; }
  Elem at(int i, int j) const { return e[std::size_t(i) * n + j]; }

  friend bool operator==(const Mat& a, const Mat& b) {
    if (a.ring != b.ring || a.n != b.n) return false;
    for (int k = 0; k < a.n * a.n; k++)
      if (a.e[k] != b.e[k]) return false;
    return true;
  }
  friend bool operator!=(const Mat& a, const Mat& b) { return !(a == b); }
};

// Transvection E_ij(lambda) = I + lambda*e_ij, i != j.
struct ElemGen {
  std::uint8_t i = 0;
  std::uint8_t j = 1;
  Elem lambda = 0;
};

Mat mat_identity(const FiniteRing& ring, int n);
Mat elementary(const FiniteRing& ring, int n, int i, int j, Elem lambda);
Mat realize(const FiniteRing& ring, int n, const ElemGen& g);

Mat mat_mul(const Mat& a, const Mat& b);
Mat mat_transpose(const Mat& a);
Elem determinant(const Mat& a);
// Adjugate-based inverse; throws matrix_error unless det is a unit.
Mat mat_inverse(const Mat& a);
Mat mat_neg(const Mat& a);

bool is_identity(const Mat& a);
// a == I mod I (diagonal - 1 and off-diagonal entries in the ideal).
bool congruent_identity(const Mat& a, const Ideal& ideal);

// Length-n row vector over a ring.
struct RowVec {
  const FiniteRing* ring = nullptr;
  std::uint8_t n = 0;
  std::array<Elem, kMaxMatDim> e{};

  Elem& operator[](int i) { return e[i]; }
  Elem operator[](int i) const { return e[i]; }

  friend bool operator==(const RowVec& a, const RowVec& b) {
    if (a.ring != b.ring || a.n != b.n) return false;
    for (int k = 0; k < a.n; k++)
      if (a.e[k] != b.e[k]) return false;
    return true;
  }
  friend bool operator!=(const RowVec& a, const RowVec& b) { return !(a == b); }
  friend bool operator<(const RowVec& a, const RowVec& b) {
    for (int k = 0; k < a.n; k++) {
      if (a.e[k] != b.e[k]) return a.e[k] < b.e[k];
    }
    return false;
  }
};

RowVec make_row(const FiniteRing& ring, std::initializer_list<Elem> entries);
RowVec unit_row(const FiniteRing& ring, int n);  // e1
RowVec row_action(const RowVec& v, const Mat& g);
Elem dot(const RowVec& v, const RowVec& w);
std::string format_row(const RowVec& v);

// v * E_ij(lambda) without materializing the matrix (only entry j changes).
inline RowVec row_action_elementary(RowVec v, int i, int j, Elem lambda) {
  v.e[j] = v.ring->add(v.e[j], v.ring->mul(v.e[i], lambda));
  return v;
}

class matrix_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Fixed-width bit packing of matrices/rows over a given ring into u64 keys.
// Usable whenever n*n*bits (resp. n*bits) <= 63.
struct MatPacker {
  const FiniteRing* ring = nullptr;
  std::uint8_t n = 0;
  std::uint8_t bits = 0;

  MatPacker() = default;
  MatPacker(const FiniteRing& r, int dim);

  bool fits_mat() const { return std::size_t(n) * n * bits <= 63; }
  bool fits_row() const { return std::size_t(n) * bits <= 63; }

  std::uint64_t pack(const Mat& m) const {
    std::uint64_t key = 0;
    for (int k = m.n * m.n - 1; k >= 0; k--) key = (key << bits) | m.e[k];
    return key;
  }
  Mat unpack(std::uint64_t key) const {
    Mat m;
    m.ring = ring;
    m.n = n;
    const std::uint64_t mask = (1ull << bits) - 1;
    for (int k = 0; k < n * n; k++) {
      m.e[k] = Elem(key & mask);
      key >>= bits;
    }
    return m;
  }
  std::uint64_t pack_row(const RowVec& v) const {
    std::uint64_t key = 0;
    for (int k = v.n - 1; k >= 0; k--) key = (key << bits) | v.e[k];
    return key;
  }
  RowVec unpack_row(std::uint64_t key) const {
    RowVec v;
    v.ring = ring;
    v.n = n;
    const std::uint64_t mask = (1ull << bits) - 1;
    for (int k = 0; k < n; k++) {
      v.e[k] = Elem(key & mask);
      key >>= bits;
    }
    return v;
  }
};

}  // namespace umrow
