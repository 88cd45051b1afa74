#pragma once

#include <memory>
#include <optional>
#include <unordered_map>

#include "groups.hpp"

namespace umrow {

class row_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RowBudget {
  std::size_t max_candidates = 10'000'000;
};

// Unimodular row with a certificate: dot(entries, certificate) = 1.
// Relative rows additionally have entries == certificate == e1 mod I.
struct UmRow {
  RowVec entries;
  RowVec certificate;
};

// Partition of Um_n(R) or Um_n(R,I) into orbits under the (relative)
// elementary action. Rows are enumerated in lexicographic entry order, so
// row ids are lex-ordered and each class's canonical representative is its
// minimal row id. Immutable once built.
struct OrbitSpace {
  RingPtr ring;
  int n = 0;
  std::optional<Ideal> ideal;  // nullopt -> absolute flavor
  std::shared_ptr<const MatGroup> acting;  // relative flavor: E_n(R,I)
  std::string label;           // memo/cache identity, set by the owner

  std::vector<UmRow> rows;
  MatPacker packer;
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  std::vector<std::uint32_t> class_ids;  // row id -> class id

  struct ClassInfo {
    std::uint32_t rep;                    // row id of the lex-min member
    std::vector<std::uint32_t> members;   // ascending row ids
  };
  std::vector<ClassInfo> classes;

  bool relative() const { return ideal.has_value(); }
  bool has_row(const RowVec& v) const;
  std::uint32_t row_id(const RowVec& v) const;
  std::uint32_t class_of_row(const RowVec& v) const;
  const RowVec& rep_row(std::uint32_t cls) const {
    return rows[classes[cls].rep].entries;
  }
};

// All unimodular rows of length n (relative to the ideal when given),
// each with a found certificate. Fails loudly if a relative certificate
// cannot be found for an enumerated relative row.
std::vector<UmRow> enumerate_um(RingPtr ring, int n, const std::optional<Ideal>& ideal,
                                const RowBudget& budget = {});

// Orbit partition. Absolute flavor acts by single elementary moves
// v -> v*E_ij(lambda); relative flavor acts by the generators of
// `acting` (pass the cross-validated E_n(R,I)). An override group may be
// supplied for either flavor; with no generators its full element list is
// used as the acting set.
OrbitSpace orbit_space(RingPtr ring, int n, std::optional<Ideal> ideal,
                       std::shared_ptr<const MatGroup> acting = nullptr,
                       const RowBudget& budget = {});

std::uint32_t class_of(const OrbitSpace& space, const RowVec& v);

// True iff 1 lies in the ideal generated by the entries.
bool row_unimodular(const FiniteRing& ring, const RowVec& v);
// Certificate search (exhaustive, suffix-set guided). Relative flavor
// restricts the certificate to e1 + I-congruent candidates.
std::optional<RowVec> find_certificate(const FiniteRing& ring, const RowVec& v,
                                       const Ideal* ideal);

}  // namespace umrow
