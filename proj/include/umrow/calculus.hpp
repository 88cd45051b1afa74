#pragma once

#include "rows.hpp"

namespace umrow {

class calculus_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Guided search for coefficients c_i in coeff_set with
// sum_i c_i * sources[i] = target. Full backtracking in index order.
std::optional<std::vector<Elem>> decompose_linear(const FiniteRing& ring, Elem target,
                                                  const std::vector<Elem>& sources,
                                                  const std::vector<Elem>& coeff_set);

// Additive closure of {s*c : s in sources, c in coeffs} as a membership mask.
std::vector<char> span_mask(const FiniteRing& ring, const std::vector<Elem>& sources,
                            const std::vector<Elem>& coeffs);

// Lowest-index p with v[0]*p == 1 mod (v[1],...,v[n-1]); relative spaces
// restrict p to 1 + I so product rows stay congruent.
Elem choose_p(const OrbitSpace& space, const RowVec& v);
// Valid p alternates (up to `limit`), lowest indices first.
std::vector<Elem> valid_ps(const OrbitSpace& space, const RowVec& v, std::size_t limit);

// The Vv product [w] * [v] for rows sharing every coordinate but the
// first. form 1 is the p-formula row, form 2 the GL_2 route; both are
// computed and must land in the same class.
struct VvOutcome {
  std::uint32_t cls = 0;
  RowVec form1_row;
  RowVec form2_row;
  Elem p = 0;
};
VvOutcome vv_product(const OrbitSpace& space, const RowVec& w, const RowVec& v,
                     std::optional<Elem> p_override = std::nullopt);

enum class MnMode { Absolute, RelativeFirst, RelativeLast };

struct MnResult {
  Mat eps1, eps2;      // v * eps1 = v_out, w * eps2 = w_out
  RowVec v_out, w_out;
  bool membership_certified = false;
  std::string membership_mode;  // "group-lookup" or "reduction-certificate"
};

// Mennicke-Newman normalization of a row pair, by the constructive paths
// of the proofs (stable-range coefficient searches in index order, the
// comaximality adjustments, and the explicit relative word for adding the
// last coordinate to the first). Throws calculus_error with the offending
// pair on search exhaustion. `ambient` (E_n(R)) verifies memberships for
// the absolute mode; when null a constructive elementary-reduction
// certificate is required instead. Relative modes verify against
// space.acting.
MnResult mennicke_newman(const OrbitSpace& space, const RowVec& v, const RowVec& w,
                         MnMode mode, const MatGroup* ambient = nullptr);

struct AxiomReport {
  bool closed = true;
  bool associative = true;
  bool commutative = true;
  bool identity_ok = true;
  bool inverses_ok = true;
  bool forms_agree = true;
  bool p_independent = true;
  bool rep_independent = true;
  std::size_t products_computed = 0;
  std::vector<std::string> witnesses;
  bool pass() const {
    return closed && associative && commutative && identity_ok && inverses_ok &&
           forms_agree && p_independent && rep_independent;
  }
};

struct GroupTable {
  const OrbitSpace* space = nullptr;
  std::vector<std::vector<std::uint32_t>> table;
  std::uint32_t identity_class = 0;
  std::vector<std::uint32_t> inverse;
  AxiomReport axioms;

  std::uint32_t product(std::uint32_t a, std::uint32_t b) const { return table[a][b]; }
};

// Full product table via mennicke_newman + vv_product, with axiom
// verification and well-definedness checks (>= 3 representative pairs and
// >= 3 valid p's per product where available).
GroupTable group_table(const OrbitSpace& space, const MatGroup* ambient = nullptr);

struct NicenessResult {
  int coordinate = 0;  // 0-based designated coordinate
  bool nice = true;
  std::size_t instances = 0;
  std::vector<std::string> failures;
};

// Coordinate-wise multiplication check in the designated coordinate, over
// every pair of space rows differing only there whose product row stays in
// the space.
NicenessResult niceness_check(const OrbitSpace& space, const GroupTable& table,
                              int coordinate);

struct WmsCheckResult {
  bool holds = true;
  std::size_t relation_instances = 0;
  std::size_t product_identity_instances = 0;
  bool sampled = false;
  std::vector<std::string> failures;
};

// Verifies the weak-Mennicke-symbol relation r(1+q) == q mod (v2..vn) =>
// [q-row] = [r-row] * [1+q-row], and van der Kallen's product identity
// against the table. Exhaustive when the instance count is small,
// deterministic striding otherwise (flagged `sampled`).
WmsCheckResult wms_relation_check(const OrbitSpace& space, const GroupTable& table);

// The 4x4 alternating matrix of the descent lemma.
Mat theta(const RowVec& u, const RowVec& w);
bool is_alternating(const Mat& m);
// u-part (rows 1..3 of column 0) and w-part of a theta-shaped matrix.
RowVec theta_u_part(const Mat& th);
RowVec theta_w_part(const Mat& th);

struct DescentResult {
  Mat eps;                 // in E_3(R, I), with u*alpha = u*eps
  std::size_t word_length = 0;
};

// Factorization of a 4x4 matrix into E^4-form letters (E_4i(a), a in R,
// and E_i4(x), x in I), for the descent.
// Word-table route: factorize() on the word-recorded closure of the
// E^4-form generators. Reduction route (full ideal only): factor by
// elementary reduction and rewrite inner E_ij letters as commutators
// E_i4(c) E_4j(1) E_i4(-c) E_4j(-1). Both verify the letter product.
std::vector<Mat> e4_letters_from_words(const MatGroup& e4_form, const Mat& m);
std::optional<std::vector<Mat>> e4_letters_via_reduction(const Mat& m,
                                                         const Ideal& ideal);

// Lemma-a descent: alpha in SL_3(R,I), with 1(+)alpha in E_4(R,I)
// (membership checked by the caller against the groups module), acts on u
// like a relative elementary matrix. eps is built from the hat-beta table
// along the E^4-form letters of (1(+)alpha)^t and postconditions
// u*alpha = u*eps and eps in E_3(R,I) are verified.
DescentResult lemma_a_descend(const OrbitSpace& space3, const UmRow& u, const Mat& alpha,
                              const std::vector<Mat>& letters, const MatGroup& e3_rel);

}  // namespace umrow
