#include "umrow/ring.hpp"

#include <algorithm>
#include <cassert>
#include <random>
#include <sstream>

using nlohmann::json;

namespace umrow {
namespace detail {

class RingKernel {
public:
  virtual ~RingKernel() = default;
  virtual std::size_t size() const = 0;
  virtual Elem zero() const = 0;
  virtual Elem one() const = 0;
  virtual Elem add(Elem a, Elem b) const = 0;
  virtual Elem mul(Elem a, Elem b) const = 0;
  virtual std::string format(Elem a) const = 0;
  virtual std::optional<Elem> parse(const std::string& s) const = 0;
};

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits "a,b,c" at top-level commas, respecting () and [] nesting.
std::optional<std::vector<std::string>> split_tuple(const std::string& s, char open,
                                                    char close) {
  std::string t = trim(s);
  if (t.size() < 2 || t.front() != open || t.back() != close) return std::nullopt;
  std::string inner = t.substr(1, t.size() - 2);
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : inner) {
    if (c == '(' || c == '[') depth++;
    if (c == ')' || c == ']') depth--;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

class ZModKernel final : public RingKernel {
public:
  explicit ZModKernel(unsigned m) : m_(m) {}
  std::size_t size() const override { return m_; }
  Elem zero() const override { return 0; }
  Elem one() const override { return Elem(m_ == 1 ? 0 : 1); }
  Elem add(Elem a, Elem b) const override { return Elem((a + b) % m_); }
  Elem mul(Elem a, Elem b) const override {
    return Elem((std::uint32_t(a) * b) % m_);
  }
  std::string format(Elem a) const override { return std::to_string(a); }
  std::optional<Elem> parse(const std::string& s) const override {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) return std::nullopt;
    long long r = v % (long long)m_;
    if (r < 0) r += m_;
    return Elem(r);
  }

private:
  unsigned m_;
};

class ProductKernel final : public RingKernel {
public:
  explicit ProductKernel(std::vector<RingPtr> factors) : factors_(std::move(factors)) {
    size_ = 1;
    for (const auto& f : factors_) size_ *= f->size();
  }
  std::size_t size() const override { return size_; }
  Elem zero() const override { return encode_each([](const FiniteRing& r) { return r.zero(); }); }
  Elem one() const override { return encode_each([](const FiniteRing& r) { return r.one(); }); }
  Elem add(Elem a, Elem b) const override { return zip(a, b, /*mul=*/false); }
  Elem mul(Elem a, Elem b) const override { return zip(a, b, /*mul=*/true); }

  std::vector<Elem> decode(Elem x) const {
    std::vector<Elem> out(factors_.size());
    for (std::size_t i = factors_.size(); i-- > 0;) {
      std::size_t n = factors_[i]->size();
      out[i] = Elem(x % n);
      x = Elem(x / n);
    }
    return out;
  }
  Elem encode(const std::vector<Elem>& parts) const {
    std::size_t x = 0;
    for (std::size_t i = 0; i < factors_.size(); i++)
      x = x * factors_[i]->size() + parts[i];
    return Elem(x);
  }

  std::string format(Elem a) const override {
    auto parts = decode(a);
    std::string out = "(";
    for (std::size_t i = 0; i < parts.size(); i++) {
      if (i) out += ",";
      out += factors_[i]->format_element(parts[i]);
    }
    return out + ")";
  }
  std::optional<Elem> parse(const std::string& s) const override {
    auto parts = split_tuple(s, '(', ')');
    if (!parts || parts->size() != factors_.size()) return std::nullopt;
    std::vector<Elem> vals(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); i++) {
      auto v = factors_[i]->parse_element((*parts)[i]);
      if (!v) return std::nullopt;
      vals[i] = *v;
    }
    return encode(vals);
  }

private:
  template <class F>
  Elem encode_each(F f) const {
    std::vector<Elem> parts(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); i++) parts[i] = f(*factors_[i]);
    return encode(parts);
  }
  Elem zip(Elem a, Elem b, bool mul) const {
    auto pa = decode(a), pb = decode(b);
    std::vector<Elem> out(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); i++)
      out[i] = mul ? factors_[i]->mul(pa[i], pb[i]) : factors_[i]->add(pa[i], pb[i]);
    return encode(out);
  }

  std::vector<RingPtr> factors_;
  std::size_t size_;
};

// R[x]/(f) for monic f of degree d >= 1; elements are coefficient tuples
// (c0..c_{d-1}), index = c0 + c1*|R| + ... (constant term least significant).
class PolyQuotientKernel final : public RingKernel {
public:
  PolyQuotientKernel(RingPtr base, std::vector<Elem> coeffs)
      : base_(std::move(base)), f_(std::move(coeffs)), d_(f_.size() - 1) {
    size_ = 1;
    for (unsigned i = 0; i < d_; i++) size_ *= base_->size();
    // x^j mod f for j = d .. 2d-2
    xpow_.assign(d_ >= 1 ? d_ - 1 : 0, std::vector<Elem>(d_, base_->zero()));
    std::vector<Elem> cur(d_, base_->zero());
    // x^d = -(c0 + c1 x + ... + c_{d-1} x^{d-1})
    for (unsigned i = 0; i < d_; i++) cur[i] = base_->neg(f_[i]);
    for (std::size_t j = 0; j < xpow_.size(); j++) {
      xpow_[j] = cur;
      std::vector<Elem> next(d_, base_->zero());
      Elem top = cur[d_ - 1];
      for (unsigned i = d_ - 1; i > 0; i--) next[i] = cur[i - 1];
      for (unsigned i = 0; i < d_; i++)
        next[i] = base_->add(next[i], base_->mul(top, base_->neg(f_[i])));
      cur = next;
    }
  }

  std::size_t size() const override { return size_; }
  Elem zero() const override { return 0; }
  Elem one() const override { return Elem(base_->one()); }
  Elem add(Elem a, Elem b) const override {
    auto pa = decode(a), pb = decode(b);
    for (unsigned i = 0; i < d_; i++) pa[i] = base_->add(pa[i], pb[i]);
    return encode(pa);
  }
  Elem mul(Elem a, Elem b) const override {
    auto pa = decode(a), pb = decode(b);
    std::vector<Elem> conv(2 * d_ - 1, base_->zero());
    for (unsigned i = 0; i < d_; i++)
      for (unsigned j = 0; j < d_; j++)
        conv[i + j] = base_->add(conv[i + j], base_->mul(pa[i], pb[j]));
    std::vector<Elem> out(conv.begin(), conv.begin() + d_);
    for (unsigned j = d_; j < 2 * d_ - 1; j++) {
      Elem c = conv[j];
      if (c == base_->zero()) continue;
      const auto& rep = xpow_[j - d_];
      for (unsigned i = 0; i < d_; i++)
        out[i] = base_->add(out[i], base_->mul(c, rep[i]));
    }
    return encode(out);
  }

  std::vector<Elem> decode(Elem x) const {
    std::vector<Elem> out(d_);
    std::size_t n = base_->size();
    std::size_t v = x;
    for (unsigned i = 0; i < d_; i++) {
      out[i] = Elem(v % n);
      v /= n;
    }
    return out;
  }
  Elem encode(const std::vector<Elem>& c) const {
    std::size_t x = 0;
    for (unsigned i = d_; i-- > 0;) x = x * base_->size() + c[i];
    return Elem(x);
  }

  std::string format(Elem a) const override {
    auto c = decode(a);
    std::string out = "[";
    for (unsigned i = 0; i < d_; i++) {
      if (i) out += ",";
      out += base_->format_element(c[i]);
    }
    return out + "]";
  }
  std::optional<Elem> parse(const std::string& s) const override {
    auto parts = split_tuple(s, '[', ']');
    if (!parts || parts->size() > d_) return std::nullopt;
    std::vector<Elem> c(d_, base_->zero());
    for (std::size_t i = 0; i < parts->size(); i++) {
      auto v = base_->parse_element((*parts)[i]);
      if (!v) return std::nullopt;
      c[i] = *v;
    }
    return encode(c);
  }

private:
  RingPtr base_;
  std::vector<Elem> f_;  // c0..cd, cd = 1
  unsigned d_;
  std::size_t size_;
  std::vector<std::vector<Elem>> xpow_;
};

// R/I realized on canonical coset representatives (least element index).
class QuotientKernel final : public RingKernel {
public:
  QuotientKernel(RingPtr base, const std::vector<Elem>& ideal_members)
      : base_(std::move(base)) {
    coset_.assign(base_->size(), Elem(0xffff));
    for (Elem x = 0; x < base_->size(); x++) {
      if (coset_[x] != 0xffff) continue;
      Elem id = Elem(reps_.size());
      reps_.push_back(x);
      for (Elem i : ideal_members) coset_[base_->add(x, i)] = id;
    }
  }
  std::size_t size() const override { return reps_.size(); }
  Elem zero() const override { return coset_[base_->zero()]; }
  Elem one() const override { return coset_[base_->one()]; }
  Elem add(Elem a, Elem b) const override {
    return coset_[base_->add(reps_[a], reps_[b])];
  }
  Elem mul(Elem a, Elem b) const override {
    return coset_[base_->mul(reps_[a], reps_[b])];
  }
  std::string format(Elem a) const override { return base_->format_element(reps_[a]); }
  std::optional<Elem> parse(const std::string& s) const override {
    auto v = base_->parse_element(s);
    if (!v) return std::nullopt;
    return coset_[*v];
  }
  Elem coset_of(Elem base_elem) const { return coset_[base_elem]; }

private:
  RingPtr base_;
  std::vector<Elem> reps_;
  std::vector<Elem> coset_;
};

// Pair-indexed kernel shared by the excision ring R (+) I and its
// finite Z-model (Z/k) (+) I. first_size is |R| or k; the second
// component runs over the members of I in ascending order.
class PairKernel : public RingKernel {
public:
  PairKernel(std::size_t first_size, RingPtr iring, std::vector<Elem> members)
      : first_size_(first_size), iring_(std::move(iring)), members_(std::move(members)) {
    pos_.assign(iring_->size(), -1);
    for (std::size_t p = 0; p < members_.size(); p++) pos_[members_[p]] = int(p);
  }
  std::size_t size() const override { return first_size_ * members_.size(); }
  Elem pair(std::size_t a, Elem i) const {
    int p = pos_[i];
    if (p < 0) throw ring_error("element not in the distinguished ideal");
    return Elem(a * members_.size() + p);
  }
  std::pair<std::size_t, Elem> split(Elem x) const {
    return {x / members_.size(), members_[x % members_.size()]};
  }
  const std::vector<Elem>& members() const { return members_; }

protected:
  std::size_t first_size_;
  RingPtr iring_;  // ring the ideal lives in
  std::vector<Elem> members_;
  std::vector<int> pos_;
};

class ExcisionKernel final : public PairKernel {
public:
  ExcisionKernel(RingPtr base, std::vector<Elem> members)
      : PairKernel(base->size(), base, std::move(members)), base_(std::move(base)) {}
  Elem zero() const override { return pair(base_->zero(), base_->zero()); }
  Elem one() const override { return pair(base_->one(), base_->zero()); }
  Elem add(Elem x, Elem y) const override {
    auto [a, i] = split(x);
    auto [b, j] = split(y);
    return pair(base_->add(Elem(a), Elem(b)), base_->add(i, j));
  }
  Elem mul(Elem x, Elem y) const override {
    auto [a, i] = split(x);
    auto [b, j] = split(y);
    Elem second = base_->add(base_->add(base_->mul(Elem(a), j), base_->mul(Elem(b), i)),
                             base_->mul(i, j));
    return pair(base_->mul(Elem(a), Elem(b)), second);
  }
  std::string format(Elem x) const override {
    auto [a, i] = split(x);
    return "(" + base_->format_element(Elem(a)) + "," + base_->format_element(i) + ")";
  }
  std::optional<Elem> parse(const std::string& s) const override {
    auto parts = split_tuple(s, '(', ')');
    if (!parts || parts->size() != 2) return std::nullopt;
    auto a = base_->parse_element((*parts)[0]);
    auto i = base_->parse_element((*parts)[1]);
    if (!a || !i || pos_[*i] < 0) return std::nullopt;
    return pair(*a, *i);
  }

private:
  RingPtr base_;
};

class ZModelKernel final : public PairKernel {
public:
  ZModelKernel(unsigned k, RingPtr iring, std::vector<Elem> members)
      : PairKernel(k, iring, std::move(members)), k_(k) {
    n1_.resize(k_);
    Elem cur = iring_->zero();
    for (unsigned m = 0; m < k_; m++) {
      n1_[m] = cur;
      cur = iring_->add(cur, iring_->one());
    }
  }
  Elem zero() const override { return pair(0, iring_->zero()); }
  Elem one() const override { return pair(1 % k_, iring_->zero()); }
  Elem add(Elem x, Elem y) const override {
    auto [m, i] = split(x);
    auto [n, j] = split(y);
    return pair((m + n) % k_, iring_->add(i, j));
  }
  Elem mul(Elem x, Elem y) const override {
    auto [m, i] = split(x);
    auto [n, j] = split(y);
    Elem second = iring_->add(
        iring_->add(iring_->mul(n1_[m], j), iring_->mul(n1_[n], i)), iring_->mul(i, j));
    return pair((m * n) % k_, second);
  }
  std::string format(Elem x) const override {
    auto [m, i] = split(x);
    return "(" + std::to_string(m) + "," + iring_->format_element(i) + ")";
  }
  std::optional<Elem> parse(const std::string& s) const override {
    auto parts = split_tuple(s, '(', ')');
    if (!parts || parts->size() != 2) return std::nullopt;
    std::string ms = trim((*parts)[0]);
    char* end = nullptr;
    long long m = std::strtoll(ms.c_str(), &end, 10);
    if (end != ms.c_str() + ms.size()) return std::nullopt;
    long long mr = m % (long long)k_;
    if (mr < 0) mr += k_;
    auto i = iring_->parse_element((*parts)[1]);
    if (!i || pos_[*i] < 0) return std::nullopt;
    return pair(std::size_t(mr), *i);
  }
  Elem scalar_one(unsigned m) const { return n1_[m % k_]; }

private:
  unsigned k_;
  std::vector<Elem> n1_;  // m * 1 in the ideal's ring
};

// {(a,b) in R x R : a-b in I} with componentwise operations.
class DoubleKernel final : public RingKernel {
public:
  DoubleKernel(RingPtr base, const std::vector<char>& ideal_mask) : base_(std::move(base)) {
    index_.assign(base_->size() * base_->size(), -1);
    for (Elem a = 0; a < base_->size(); a++)
      for (Elem b = 0; b < base_->size(); b++)
        if (ideal_mask[base_->sub(a, b)]) {
          index_[std::size_t(a) * base_->size() + b] = int(pairs_.size());
          pairs_.emplace_back(a, b);
        }
  }
  std::size_t size() const override { return pairs_.size(); }
  Elem encode(Elem a, Elem b) const {
    int p = index_[std::size_t(a) * base_->size() + b];
    if (p < 0) throw ring_error("pair not congruent mod I");
    return Elem(p);
  }
  std::pair<Elem, Elem> decode(Elem x) const { return pairs_[x]; }
  Elem zero() const override { return encode(base_->zero(), base_->zero()); }
  Elem one() const override { return encode(base_->one(), base_->one()); }
  Elem add(Elem x, Elem y) const override {
    auto [a, b] = pairs_[x];
    auto [c, d] = pairs_[y];
    return encode(base_->add(a, c), base_->add(b, d));
  }
  Elem mul(Elem x, Elem y) const override {
    auto [a, b] = pairs_[x];
    auto [c, d] = pairs_[y];
    return encode(base_->mul(a, c), base_->mul(b, d));
  }
  std::string format(Elem x) const override {
    auto [a, b] = pairs_[x];
    return "(" + base_->format_element(a) + "," + base_->format_element(b) + ")";
  }
  std::optional<Elem> parse(const std::string& s) const override {
    auto parts = split_tuple(s, '(', ')');
    if (!parts || parts->size() != 2) return std::nullopt;
    auto a = base_->parse_element((*parts)[0]);
    auto b = base_->parse_element((*parts)[1]);
    if (!a || !b) return std::nullopt;
    if (index_[std::size_t(*a) * base_->size() + *b] < 0) return std::nullopt;
    return encode(*a, *b);
  }

private:
  RingPtr base_;
  std::vector<std::pair<Elem, Elem>> pairs_;
  std::vector<int> index_;
};

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------------------
// RingSpec

RingSpec RingSpec::zmod(unsigned m) {
  RingSpec s;
  s.kind = Kind::ZMod;
  s.modulus = m;
  return s;
}
RingSpec RingSpec::product(std::vector<RingSpec> fs) {
  RingSpec s;
  s.kind = Kind::Product;
  s.factors = std::move(fs);
  return s;
}
RingSpec RingSpec::poly_quotient(RingSpec base, std::vector<std::string> coeffs) {
  RingSpec s;
  s.kind = Kind::PolyQuotient;
  s.base = std::make_shared<RingSpec>(std::move(base));
  s.poly = std::move(coeffs);
  return s;
}
RingSpec RingSpec::quotient(RingSpec base, std::vector<std::string> gens) {
  RingSpec s;
  s.kind = Kind::Quotient;
  s.base = std::make_shared<RingSpec>(std::move(base));
  s.ideal_gens = std::move(gens);
  return s;
}
RingSpec RingSpec::excision(RingSpec base, std::vector<std::string> gens) {
  RingSpec s;
  s.kind = Kind::Excision;
  s.base = std::make_shared<RingSpec>(std::move(base));
  s.ideal_gens = std::move(gens);
  return s;
}
RingSpec RingSpec::double_of(RingSpec base, std::vector<std::string> gens) {
  RingSpec s;
  s.kind = Kind::Double;
  s.base = std::make_shared<RingSpec>(std::move(base));
  s.ideal_gens = std::move(gens);
  return s;
}
RingSpec RingSpec::zmodel(RingSpec base, std::vector<std::string> gens, unsigned k) {
  RingSpec s;
  s.kind = Kind::ZModel;
  s.base = std::make_shared<RingSpec>(std::move(base));
  s.ideal_gens = std::move(gens);
  s.modulus = k;
  return s;
}

namespace {
const char* kind_name(RingSpec::Kind k) {
  switch (k) {
    case RingSpec::Kind::ZMod: return "zmod";
    case RingSpec::Kind::Product: return "product";
    case RingSpec::Kind::PolyQuotient: return "polyquotient";
    case RingSpec::Kind::Quotient: return "quotient";
    case RingSpec::Kind::Excision: return "excision";
    case RingSpec::Kind::Double: return "double";
    case RingSpec::Kind::ZModel: return "zmodel";
  }
  return "?";
}
}  // namespace

RingSpec RingSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ring_error("ring spec: expected object with a \"type\" string");
  std::string type = j["type"].get<std::string>();
  auto gens_of = [&](const json& jj) {
    std::vector<std::string> gens;
    if (jj.contains("ideal")) {
      if (!jj["ideal"].is_array()) throw ring_error("ring spec: \"ideal\" must be an array");
      for (const auto& g : jj["ideal"]) {
        if (g.is_string()) gens.push_back(g.get<std::string>());
        else if (g.is_number_integer()) gens.push_back(std::to_string(g.get<long long>()));
        else throw ring_error("ring spec: ideal generators must be strings");
      }
    }
    return gens;
  };
  if (type == "zmod") {
    if (!j.contains("n") || !j["n"].is_number_unsigned() || j["n"].get<unsigned>() == 0)
      throw ring_error("ring spec: zmod requires a positive \"n\"");
    return zmod(j["n"].get<unsigned>());
  }
  if (type == "product") {
    if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].empty())
      throw ring_error("ring spec: product requires a non-empty \"factors\" array");
    std::vector<RingSpec> fs;
    for (const auto& f : j["factors"]) fs.push_back(from_json(f));
    return product(std::move(fs));
  }
  if (!j.contains("base")) throw ring_error("ring spec: \"" + type + "\" requires \"base\"");
  RingSpec base = from_json(j["base"]);
  if (type == "polyquotient") {
    if (!j.contains("poly") || !j["poly"].is_array() || j["poly"].size() < 2)
      throw ring_error("ring spec: polyquotient requires \"poly\" with degree >= 1");
    std::vector<std::string> coeffs;
    for (const auto& c : j["poly"]) {
      if (c.is_string()) coeffs.push_back(c.get<std::string>());
      else if (c.is_number_integer()) coeffs.push_back(std::to_string(c.get<long long>()));
      else throw ring_error("ring spec: poly coefficients must be strings");
    }
    return poly_quotient(std::move(base), std::move(coeffs));
  }
  if (type == "quotient") return quotient(std::move(base), gens_of(j));
  if (type == "excision") return excision(std::move(base), gens_of(j));
  if (type == "double") return double_of(std::move(base), gens_of(j));
  if (type == "zmodel") {
    if (!j.contains("k") || !j["k"].is_number_unsigned() || j["k"].get<unsigned>() == 0)
      throw ring_error("ring spec: zmodel requires a positive \"k\"");
    return zmodel(std::move(base), gens_of(j), j["k"].get<unsigned>());
  }
  throw ring_error("ring spec: unknown type \"" + type + "\"");
}

json RingSpec::to_json() const {
  json j;
  j["type"] = kind_name(kind);
  switch (kind) {
    case Kind::ZMod:
      j["n"] = modulus;
      break;
    case Kind::Product: {
      json fs = json::array();
      for (const auto& f : factors) fs.push_back(f.to_json());
      j["factors"] = fs;
      break;
    }
    case Kind::PolyQuotient:
      j["base"] = base->to_json();
      j["poly"] = poly;
      break;
    case Kind::ZModel:
      j["base"] = base->to_json();
      j["ideal"] = ideal_gens;
      j["k"] = modulus;
      break;
    default:
      j["base"] = base->to_json();
      j["ideal"] = ideal_gens;
      break;
  }
  return j;
}

std::string RingSpec::canonical_string() const {
  std::ostringstream os;
  os << kind_name(kind);
  switch (kind) {
    case Kind::ZMod:
      os << ":" << modulus;
      break;
    case Kind::Product:
      os << "(";
      for (std::size_t i = 0; i < factors.size(); i++) {
        if (i) os << ",";
        os << factors[i].canonical_string();
      }
      os << ")";
      break;
    case Kind::PolyQuotient:
      os << "(" << base->canonical_string() << ";";
      for (std::size_t i = 0; i < poly.size(); i++) {
        if (i) os << "|";
        os << poly[i];
      }
      os << ")";
      break;
    default:
      os << "(" << base->canonical_string() << ";";
      for (std::size_t i = 0; i < ideal_gens.size(); i++) {
        if (i) os << "|";
        os << ideal_gens[i];
      }
      if (kind == Kind::ZModel) os << ";k=" << modulus;
      os << ")";
      break;
  }
  return os.str();
}

std::uint64_t RingSpec::hash() const {
  std::string s = canonical_string();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// FiniteRing

FiniteRing::~FiniteRing() = default;

Elem FiniteRing::add_direct(Elem a, Elem b) const { return kernel_->add(a, b); }
Elem FiniteRing::mul_direct(Elem a, Elem b) const { return kernel_->mul(a, b); }

Elem FiniteRing::of_int(long long m) const {
  long long r = m % (long long)char_;
  if (r < 0) r += char_;
  Elem acc = zero_;
  for (long long i = 0; i < r; i++) acc = add(acc, one_);
  return acc;
}

std::string FiniteRing::format_element(Elem a) const { return kernel_->format(a); }
std::optional<Elem> FiniteRing::parse_element(const std::string& text) const {
  return kernel_->parse(text);
}

std::string FiniteRing::describe() const {
  switch (spec_.kind) {
    case RingSpec::Kind::ZMod:
      return "Z/" + std::to_string(spec_.modulus);
    case RingSpec::Kind::Product: {
      std::string s;
      for (std::size_t i = 0; i < spec_.factors.size(); i++) {
        if (i) s += " x ";
        RingSpec f = spec_.factors[i];
        s += f.kind == RingSpec::Kind::ZMod ? "Z/" + std::to_string(f.modulus)
                                            : f.canonical_string();
      }
      return s;
    }
    default:
      return spec_.canonical_string();
  }
}

namespace {

void verify_ring_axioms(const FiniteRing& r) {
  const std::size_t n = r.size();
  auto check3 = [&](Elem a, Elem b, Elem c) {
    if (r.add(a, b) != r.add(b, a)) throw ring_error("add not commutative");
    if (r.mul(a, b) != r.mul(b, a)) throw ring_error("mul not commutative");
    if (r.add(r.add(a, b), c) != r.add(a, r.add(b, c)))
      throw ring_error("add not associative");
    if (r.mul(r.mul(a, b), c) != r.mul(a, r.mul(b, c)))
      throw ring_error("mul not associative");
    if (r.mul(a, r.add(b, c)) != r.add(r.mul(a, b), r.mul(a, c)))
      throw ring_error("mul not distributive");
  };
  if (n <= 64) {
    for (Elem a = 0; a < n; a++)
      for (Elem b = 0; b < n; b++)
        for (Elem c = 0; c < n; c++) check3(a, b, c);
  } else {
    std::mt19937_64 rng(0x5eedUL);
    for (int t = 0; t < 100000; t++)
      check3(Elem(rng() % n), Elem(rng() % n), Elem(rng() % n));
  }
  for (Elem a = 0; a < n; a++) {
    if (r.add(a, r.zero()) != a) throw ring_error("additive identity fails");
    if (r.mul(a, r.one()) != a) throw ring_error("multiplicative identity fails");
  }
}

std::vector<Elem> closure_members(const FiniteRing& ring, const std::vector<Elem>& gens,
                                  std::vector<char>& mask) {
  mask.assign(ring.size(), 0);
  std::vector<Elem> members;
  auto insert = [&](Elem x) {
    if (!mask[x]) {
      mask[x] = 1;
      members.push_back(x);
    }
  };
  insert(ring.zero());
  for (Elem g : gens) {
    if (g >= ring.size()) throw ring_error("ideal generator index out of range");
    insert(g);
  }
  // fixpoint under ring multiples and pairwise sums
  for (std::size_t head = 0; head < members.size(); head++) {
    Elem x = members[head];
    for (Elem r = 0; r < ring.size(); r++) insert(ring.mul(r, x));
    for (std::size_t j = 0; j <= head; j++) insert(ring.add(x, members[j]));
  }
  std::sort(members.begin(), members.end());
  return members;
}

}  // namespace

RingPtr realize_ring(const RingSpec& spec, const RingBudget& budget) {
  using K = RingSpec::Kind;
  std::unique_ptr<detail::RingKernel> kernel;
  auto parse_gens = [&](const RingPtr& base) {
    std::vector<Elem> gens;
    for (const auto& g : spec.ideal_gens) {
      auto v = base->parse_element(g);
      if (!v) throw ring_error("bad ideal generator literal \"" + g + "\"");
      gens.push_back(*v);
    }
    return gens;
  };

  switch (spec.kind) {
    case K::ZMod: {
      if (spec.modulus == 0) throw ring_error("zmod modulus must be positive");
      kernel = std::make_unique<detail::ZModKernel>(spec.modulus);
      break;
    }
    case K::Product: {
      if (spec.factors.empty()) throw ring_error("product needs at least one factor");
      std::vector<RingPtr> fs;
      std::size_t total = 1;
      for (const auto& f : spec.factors) {
        fs.push_back(realize_ring(f, budget));
        total *= fs.back()->size();
        if (total > budget.max_elements)
          throw budget_error("product ring exceeds element budget");
      }
      kernel = std::make_unique<detail::ProductKernel>(std::move(fs));
      break;
    }
    case K::PolyQuotient: {
      RingPtr base = realize_ring(*spec.base, budget);
      if (spec.poly.size() < 2)
        throw ring_error("polyquotient polynomial must have degree >= 1");
      std::vector<Elem> coeffs;
      for (const auto& c : spec.poly) {
        auto v = base->parse_element(c);
        if (!v) throw ring_error("polyquotient: bad coefficient literal \"" + c + "\"");
        coeffs.push_back(*v);
      }
      if (coeffs.back() != base->one())
        throw ring_error("polyquotient polynomial must be monic");
      std::size_t total = 1;
      for (std::size_t i = 0; i + 1 < coeffs.size(); i++) {
        total *= base->size();
        if (total > budget.max_elements)
          throw budget_error("polyquotient ring exceeds element budget");
      }
      kernel = std::make_unique<detail::PolyQuotientKernel>(base, std::move(coeffs));
      break;
    }
    case K::Quotient: {
      RingPtr base = realize_ring(*spec.base, budget);
      std::vector<char> mask;
      auto members = closure_members(*base, parse_gens(base), mask);
      kernel = std::make_unique<detail::QuotientKernel>(base, members);
      break;
    }
    case K::Excision: {
      RingPtr base = realize_ring(*spec.base, budget);
      std::vector<char> mask;
      auto members = closure_members(*base, parse_gens(base), mask);
      if (base->size() * members.size() > budget.max_elements)
        throw budget_error("excision ring exceeds element budget");
      kernel = std::make_unique<detail::ExcisionKernel>(base, std::move(members));
      break;
    }
    case K::Double: {
      RingPtr base = realize_ring(*spec.base, budget);
      std::vector<char> mask;
      auto members = closure_members(*base, parse_gens(base), mask);
      if (base->size() * members.size() > budget.max_elements)
        throw budget_error("double ring exceeds element budget");
      kernel = std::make_unique<detail::DoubleKernel>(base, mask);
      break;
    }
    case K::ZModel: {
      RingPtr base = realize_ring(*spec.base, budget);
      if (spec.modulus == 0 || spec.modulus % base->characteristic() != 0)
        throw ring_error("zmodel k must be a positive multiple of char(base)");
      std::vector<char> mask;
      auto members = closure_members(*base, parse_gens(base), mask);
      if (std::size_t(spec.modulus) * members.size() > budget.max_elements)
        throw budget_error("zmodel ring exceeds element budget");
      kernel =
          std::make_unique<detail::ZModelKernel>(spec.modulus, base, std::move(members));
      break;
    }
  }

  if (!kernel) throw ring_error("unreachable ring constructor");
  if (kernel->size() == 0) throw ring_error("realized ring is empty");
  if (kernel->size() > budget.max_elements)
    throw budget_error("ring size " + std::to_string(kernel->size()) +
                       " exceeds element budget " + std::to_string(budget.max_elements));

  auto ring = std::shared_ptr<FiniteRing>(new FiniteRing());
  ring->spec_ = spec;
  ring->spec_hash_ = spec.hash();
  ring->kernel_ = std::move(kernel);
  const std::size_t n = ring->kernel_->size();
  ring->size_ = n;
  ring->zero_ = ring->kernel_->zero();
  ring->one_ = ring->kernel_->one();

  if (n <= 256) {
    ring->add_tab_.resize(n * n);
    ring->mul_tab_.resize(n * n);
    for (Elem a = 0; a < n; a++)
      for (Elem b = 0; b < n; b++) {
        ring->add_tab_[std::size_t(a) * n + b] = ring->kernel_->add(a, b);
        ring->mul_tab_[std::size_t(a) * n + b] = ring->kernel_->mul(a, b);
      }
  }

  ring->neg_tab_.assign(n, 0);
  for (Elem a = 0; a < n; a++) {
    bool found = false;
    for (Elem b = 0; b < n; b++)
      if (ring->add(a, b) == ring->zero()) {
        ring->neg_tab_[a] = b;
        found = true;
        break;
      }
    if (!found) throw ring_error("element without additive inverse");
  }

  ring->inv_tab_.assign(n, FiniteRing::kNoInverse);
  for (Elem a = 0; a < n; a++) {
    for (Elem b = 0; b < n; b++)
      if (ring->mul(a, b) == ring->one()) {
        ring->inv_tab_[a] = b;
        break;
      }
    if (ring->inv_tab_[a] != FiniteRing::kNoInverse) ring->units_.push_back(a);
  }

  {
    Elem acc = ring->one();
    unsigned c = 1;
    while (acc != ring->zero()) {
      acc = ring->add(acc, ring->one());
      c++;
      if (c > n + 1) throw ring_error("characteristic exceeds ring size");
    }
    ring->char_ = c;
  }

  verify_ring_axioms(*ring);
  return ring;
}

RingPtr make_ring(const RingSpec& spec, const RingBudget& budget) {
  return realize_ring(spec, budget);
}

// ---------------------------------------------------------------------------
// Ideals

Ideal ideal_generate(RingPtr ring, std::vector<Elem> gens) {
  Ideal ideal;
  ideal.ring = ring;
  ideal.gens = gens;
  ideal.members = closure_members(*ring, gens, ideal.mask);
  return ideal;
}

Ideal zero_ideal(RingPtr ring) { return ideal_generate(ring, {}); }
Ideal unit_ideal(RingPtr ring) { return ideal_generate(ring, {ring->one()}); }

Ideal ideal_image(const RingHom& h, const Ideal& ideal) {
  std::vector<Elem> gens;
  for (Elem g : ideal.gens) gens.push_back(h(g));
  if (gens.empty())
    for (Elem m : ideal.members) gens.push_back(h(m));
  return ideal_generate(h.dst, gens);
}

std::uint64_t Ideal::hash() const {
  std::uint64_t h = ring->spec_hash();
  for (Elem m : members) {
    h ^= m + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::string Ideal::describe() const {
  std::string s = "(";
  for (std::size_t i = 0; i < gens.size(); i++) {
    if (i) s += ",";
    s += ring->format_element(gens[i]);
  }
  return s + ")";
}

// ---------------------------------------------------------------------------
// Homomorphisms

RingHom make_hom(RingPtr src, RingPtr dst, std::vector<Elem> map) {
  if (map.size() != src->size()) throw ring_error("hom table has wrong size");
  RingHom h{src, dst, std::move(map)};
  if (h.map[src->one()] != dst->one()) throw ring_error("hom does not preserve 1");
  for (Elem a = 0; a < src->size(); a++)
    for (Elem b = 0; b < src->size(); b++) {
      if (h.map[src->add(a, b)] != dst->add(h.map[a], h.map[b]))
        throw ring_error("hom does not preserve addition");
      if (h.map[src->mul(a, b)] != dst->mul(h.map[a], h.map[b]))
        throw ring_error("hom does not preserve multiplication");
    }
  return h;
}

bool RingHom::is_injective() const {
  std::vector<char> seen(dst->size(), 0);
  for (Elem v : map) {
    if (seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

bool RingHom::is_surjective() const {
  std::vector<char> seen(dst->size(), 0);
  std::size_t count = 0;
  for (Elem v : map)
    if (!seen[v]) {
      seen[v] = 1;
      count++;
    }
  return count == dst->size();
}

RingHom compose(const RingHom& second, const RingHom& first) {
  if (first.dst.get() != second.src.get())
    throw ring_error("hom composition mismatch");
  std::vector<Elem> map(first.src->size());
  for (Elem a = 0; a < first.src->size(); a++) map[a] = second(first(a));
  return make_hom(first.src, second.dst, std::move(map));
}

RingHom identity_hom(RingPtr r) {
  std::vector<Elem> map(r->size());
  for (Elem a = 0; a < r->size(); a++) map[a] = a;
  return make_hom(r, r, std::move(map));
}

// ---------------------------------------------------------------------------
// Excision / double / local / zmodel constructions

Elem excision_pair(const FiniteRing& ring, Elem first, Elem second_in_ideal) {
  // Valid for Excision and ZModel rings, whose kernels are PairKernels.
  const auto* pk = dynamic_cast<const detail::PairKernel*>(&ring.kernel());
  if (!pk) throw ring_error("excision_pair: not a pair-structured ring");
  return pk->pair(first, second_in_ideal);
}

std::pair<Elem, Elem> excision_split(const FiniteRing& ring, Elem x) {
  const auto* pk = dynamic_cast<const detail::PairKernel*>(&ring.kernel());
  if (!pk) throw ring_error("excision_split: not a pair-structured ring");
  auto [a, i] = pk->split(x);
  return {Elem(a), i};
}

ExcisionResult excision_ring(RingPtr base, const Ideal& ideal, const RingBudget& budget) {
  if (ideal.ring.get() != base.get()) throw ring_error("ideal not over the given base");
  std::vector<std::string> gen_lits;
  for (Elem g : ideal.gens) gen_lits.push_back(base->format_element(g));
  RingPtr ring = make_ring(RingSpec::excision(base->spec(), gen_lits), budget);

  std::vector<Elem> pair_gens;
  for (Elem g : ideal.gens) pair_gens.push_back(excision_pair(*ring, base->zero(), g));
  Ideal zi = ideal_generate(ring, pair_gens);
  if (zi.members.size() != ideal.members.size())
    throw ring_error("internal: 0(+)I closure mismatch");

  std::vector<Elem> map(ring->size());
  for (Elem x = 0; x < ring->size(); x++) {
    auto [a, i] = excision_split(*ring, x);
    map[x] = base->add(a, i);
  }
  RingHom pi2 = make_hom(ring, base, std::move(map));
  return ExcisionResult{ring, std::move(zi), std::move(pi2)};
}

RingHom excision_proj1(const ExcisionResult& ex) {
  RingPtr base =
      ex.pi2.dst;  // pi2 maps into the base ring
  std::vector<Elem> map(ex.ring->size());
  for (Elem x = 0; x < ex.ring->size(); x++) map[x] = excision_split(*ex.ring, x).first;
  return make_hom(ex.ring, base, std::move(map));
}

RingHom excision_section(const ExcisionResult& ex) {
  RingPtr base = ex.pi2.dst;
  std::vector<Elem> map(base->size());
  for (Elem a = 0; a < base->size(); a++)
    map[a] = excision_pair(*ex.ring, a, base->zero());
  return make_hom(base, ex.ring, std::move(map));
}

DoubleResult double_ring(RingPtr base, const Ideal& ideal, const RingBudget& budget) {
  if (ideal.ring.get() != base.get()) throw ring_error("ideal not over the given base");
  std::vector<std::string> gen_lits;
  for (Elem g : ideal.gens) gen_lits.push_back(base->format_element(g));
  RingPtr ring = make_ring(RingSpec::double_of(base->spec(), gen_lits), budget);

  const auto* dk = dynamic_cast<const detail::DoubleKernel*>(&ring->kernel());
  std::vector<Elem> m1(ring->size()), m2(ring->size());
  for (Elem x = 0; x < ring->size(); x++) {
    auto [a, b] = dk->decode(x);
    m1[x] = a;
    m2[x] = b;
  }
  RingHom p1 = make_hom(ring, base, std::move(m1));
  RingHom p2 = make_hom(ring, base, std::move(m2));
  return DoubleResult{ring, std::move(p1), std::move(p2)};
}

RingHom iso_double_excision(RingPtr base, const Ideal& ideal, const RingBudget& budget) {
  ExcisionResult ex = excision_ring(base, ideal, budget);
  DoubleResult db = double_ring(base, ideal, budget);
  const auto* dk = dynamic_cast<const detail::DoubleKernel*>(&db.ring->kernel());
  std::vector<Elem> map(ex.ring->size());
  for (Elem x = 0; x < ex.ring->size(); x++) {
    auto [a, i] = excision_split(*ex.ring, x);
    map[x] = dk->encode(a, base->add(a, i));
  }
  RingHom h = make_hom(ex.ring, db.ring, std::move(map));
  if (!h.is_injective() || !h.is_surjective())
    throw ring_error("double/excision isomorphism failed bijectivity");
  return h;
}

std::optional<Ideal> local_structure(RingPtr ring) {
  std::vector<Elem> nonunits;
  std::vector<char> mask(ring->size(), 0);
  for (Elem a = 0; a < ring->size(); a++)
    if (!ring->is_unit(a)) {
      nonunits.push_back(a);
      mask[a] = 1;
    }
  for (Elem a : nonunits)
    for (Elem b : nonunits)
      if (!mask[ring->add(a, b)]) return std::nullopt;
  Ideal m;
  m.ring = ring;
  m.gens = nonunits;
  m.members = nonunits;
  m.mask = std::move(mask);
  return m;
}

ZModelResult zmodel_excision(const Ideal& ideal, unsigned k, const RingBudget& budget) {
  RingPtr base = ideal.ring;
  if (k == 0 || k % base->characteristic() != 0)
    throw ring_error("zmodel k must be a positive multiple of char(base)");
  std::vector<std::string> gen_lits;
  for (Elem g : ideal.gens) gen_lits.push_back(base->format_element(g));
  RingPtr ring = make_ring(RingSpec::zmodel(base->spec(), gen_lits, k), budget);

  // 0 (+) I; generated by all of {(0,i)} so the handle invariant holds even
  // when Z*1 + I multiples of the generators fall short of I.
  std::vector<Elem> pair_gens;
  for (Elem i : ideal.members) pair_gens.push_back(excision_pair(*ring, 0, i));
  Ideal zi = ideal_generate(ring, pair_gens);
  if (zi.members.size() != ideal.members.size())
    throw ring_error("internal: zmodel 0(+)I closure mismatch");

  std::vector<Elem> map(ring->size());
  for (Elem x = 0; x < ring->size(); x++) {
    auto [m, i] = excision_split(*ring, x);
    map[x] = base->add(base->of_int(m), i);
  }
  RingHom f = make_hom(ring, base, std::move(map));
  return ZModelResult{ring, std::move(zi), std::move(f)};
}

QuotientResult quotient_ring(RingPtr base, const Ideal& ideal, const RingBudget& budget) {
  if (ideal.ring.get() != base.get()) throw ring_error("ideal not over the given base");
  std::vector<std::string> gen_lits;
  for (Elem g : ideal.gens) gen_lits.push_back(base->format_element(g));
  RingPtr ring = make_ring(RingSpec::quotient(base->spec(), gen_lits), budget);
  const auto* qk = dynamic_cast<const detail::QuotientKernel*>(&ring->kernel());
  std::vector<Elem> map(base->size());
  for (Elem a = 0; a < base->size(); a++) map[a] = qk->coset_of(a);
  RingHom proj = make_hom(base, ring, std::move(map));
  return QuotientResult{ring, std::move(proj)};
}

}  // namespace umrow
