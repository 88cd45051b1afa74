#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace umrow {

// Element of a realized finite ring, identified by its index in the
// canonical enumeration. Ring sizes are capped by RingBudget (<= 4096),
// so 16 bits always suffice.
using Elem = std::uint16_t;

class ring_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class budget_error : public ring_error {
public:
  using ring_error::ring_error;
};

struct RingBudget {
  std::size_t max_elements = 4096;
};

// Constructor tree for a finite commutative ring with identity.
// Element literals inside the tree (ideal generators, polynomial
// coefficients) use the per-constructor syntax documented in the README:
// integers for zmod, "(a,b,...)" tuples for product/excision/double/zmodel,
// "[c0,c1,...]" coefficient lists for polyquotient, base syntax for quotient.
struct RingSpec {
  enum class Kind { ZMod, Product, PolyQuotient, Quotient, Excision, Double, ZModel };

  Kind kind = Kind::ZMod;
  unsigned modulus = 0;                    // ZMod modulus, ZModel k
  std::vector<RingSpec> factors;           // Product
  std::shared_ptr<const RingSpec> base;    // all derived constructors
  std::vector<std::string> poly;           // PolyQuotient: c0..cd, cd must be 1
  std::vector<std::string> ideal_gens;     // Quotient/Excision/Double/ZModel

  static RingSpec zmod(unsigned m);
  static RingSpec product(std::vector<RingSpec> fs);
  static RingSpec poly_quotient(RingSpec base, std::vector<std::string> coeffs);
  static RingSpec quotient(RingSpec base, std::vector<std::string> gens);
  static RingSpec excision(RingSpec base, std::vector<std::string> gens);
  static RingSpec double_of(RingSpec base, std::vector<std::string> gens);
  static RingSpec zmodel(RingSpec base, std::vector<std::string> gens, unsigned k);

  static RingSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string canonical_string() const;
  std::uint64_t hash() const;
};

namespace detail {
class RingKernel;
}

// A realized finite commutative ring. Immutable after construction and
// safe to share across threads. Operations go through dense tables when
// size() <= 256 and through the constructor kernel above that; both paths
// must agree (add_direct/mul_direct expose the kernel path for tests).
class FiniteRing {
public:
  ~FiniteRing();

  std::size_t size() const { return size_; }
  Elem zero() const { return zero_; }
  Elem one() const { return one_; }
  unsigned characteristic() const { return char_; }

  Elem add(Elem a, Elem b) const {
    return dense() ? add_tab_[std::size_t(a) * size_ + b] : add_direct(a, b);
  }
  Elem mul(Elem a, Elem b) const {
    return dense() ? mul_tab_[std::size_t(a) * size_ + b] : mul_direct(a, b);
  }
  Elem neg(Elem a) const { return neg_tab_[a]; }
  Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }

  bool is_unit(Elem a) const { return inv_tab_[a] != kNoInverse; }
  std::optional<Elem> inv(Elem a) const {
    if (inv_tab_[a] == kNoInverse) return std::nullopt;
    return Elem(inv_tab_[a]);
  }
  const std::vector<Elem>& units() const { return units_; }

  // m * 1 for any integer m (negative allowed).
  Elem of_int(long long m) const;

  bool dense() const { return !add_tab_.empty(); }
  // Kernel-path operations, bypassing the dense tables.
  Elem add_direct(Elem a, Elem b) const;
  Elem mul_direct(Elem a, Elem b) const;

  const RingSpec& spec() const { return spec_; }
  std::uint64_t spec_hash() const { return spec_hash_; }
  std::string describe() const;

  std::string format_element(Elem a) const;
  // Returns nullopt on a syntactically or semantically invalid literal.
  std::optional<Elem> parse_element(const std::string& text) const;

  // Constructor kernel; used internally by the structured-ring helpers.
  const detail::RingKernel& kernel() const { return *kernel_; }

private:
  friend std::shared_ptr<const FiniteRing> realize_ring(const RingSpec&, const RingBudget&);
  FiniteRing() = default;

  static constexpr std::uint32_t kNoInverse = 0xffffffffu;

  RingSpec spec_;
  std::uint64_t spec_hash_ = 0;
  std::size_t size_ = 0;
  Elem zero_ = 0, one_ = 0;
  unsigned char_ = 1;
  std::unique_ptr<detail::RingKernel> kernel_;
  std::vector<Elem> add_tab_, mul_tab_;
  std::vector<Elem> neg_tab_;
  std::vector<std::uint32_t> inv_tab_;
  std::vector<Elem> units_;
};

using RingPtr = std::shared_ptr<const FiniteRing>;

// Ideal of a realized ring: generator list plus the full member set
// (closure of the generators under addition and ring multiplication).
struct Ideal {
  RingPtr ring;
  std::vector<Elem> gens;
  std::vector<Elem> members;  // sorted ascending
  std::vector<char> mask;     // size ring->size()

  bool contains(Elem x) const { return mask[x] != 0; }
  bool is_zero() const { return members.size() == 1; }
  bool is_full() const { return members.size() == ring->size(); }
  bool is_proper() const { return !is_full(); }
  std::uint64_t hash() const;
  std::string describe() const;
};

// Verified homomorphism of realized rings (checked on construction:
// 1 -> 1 and additivity/multiplicativity on all pairs).
struct RingHom {
  RingPtr src;
  RingPtr dst;
  std::vector<Elem> map;

  Elem operator()(Elem x) const { return map[x]; }
  bool is_injective() const;
  bool is_surjective() const;
};

RingHom make_hom(RingPtr src, RingPtr dst, std::vector<Elem> map);
RingHom compose(const RingHom& second, const RingHom& first);  // second o first
RingHom identity_hom(RingPtr r);

RingPtr make_ring(const RingSpec& spec, const RingBudget& budget = {});

Ideal ideal_generate(RingPtr ring, std::vector<Elem> gens);
Ideal zero_ideal(RingPtr ring);
Ideal unit_ideal(RingPtr ring);
// Image of an ideal under a hom, as an ideal of the target.
Ideal ideal_image(const RingHom& h, const Ideal& ideal);

struct ExcisionResult {
  RingPtr ring;   // R (+) I
  Ideal ideal;    // 0 (+) I
  RingHom pi2;    // (a,i) -> a+i
};
ExcisionResult excision_ring(RingPtr base, const Ideal& ideal,
                             const RingBudget& budget = {});
// First projection R (+) I -> R and its section a -> (a,0).
RingHom excision_proj1(const ExcisionResult& ex);
RingHom excision_section(const ExcisionResult& ex);

struct DoubleResult {
  RingPtr ring;  // C = {(a,b) : a-b in I}
  RingHom proj1;
  RingHom proj2;
};
DoubleResult double_ring(RingPtr base, const Ideal& ideal,
                         const RingBudget& budget = {});

// Verified isomorphism R (+) I -> C, (a,i) -> (a, a+i).
RingHom iso_double_excision(RingPtr base, const Ideal& ideal,
                            const RingBudget& budget = {});

// The unique maximal ideal (= set of non-units) if the ring is local.
std::optional<Ideal> local_structure(RingPtr ring);

struct ZModelResult {
  RingPtr ring;  // (Z/k) (+) I
  Ideal ideal;   // 0 (+) I
  RingHom f;     // (m,i) -> m*1 + i  into the base ring of I
};
ZModelResult zmodel_excision(const Ideal& ideal, unsigned k,
                             const RingBudget& budget = {});

struct QuotientResult {
  RingPtr ring;  // R/I
  RingHom proj;  // R -> R/I
};
QuotientResult quotient_ring(RingPtr base, const Ideal& ideal,
                             const RingBudget& budget = {});

// Excision-ring element helpers (valid for Excision and ZModel rings).
Elem excision_pair(const FiniteRing& ring, Elem first, Elem second_in_ideal);
std::pair<Elem, Elem> excision_split(const FiniteRing& ring, Elem x);

}  // namespace umrow
