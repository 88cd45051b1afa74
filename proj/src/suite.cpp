#include "umrow/suite.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <atomic>
#include <thread>

using nlohmann::ordered_json;

namespace umrow {

// ---------------------------------------------------------------------------
// Artifacts

template <class T, class Builder>
std::shared_ptr<const T> Artifacts::get(Memo<T>& memo, const std::string& key,
                                        Builder build) {
  std::shared_future<std::shared_ptr<const T>> fut;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo.find(key);
    if (it == memo.end()) {
      auto task = std::async(std::launch::deferred,
                             [build]() -> std::shared_ptr<const T> { return build(); });
      it = memo.emplace(key, task.share()).first;
    }
    fut = it->second;
  }
  return fut.get();
}

namespace {

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace

RingPtr Artifacts::ring(const RingSpec& spec) {
  auto shared = get(rings_, "R:" + hex64(spec.hash()), [&]() -> std::shared_ptr<const FiniteRing> {
    return make_ring(spec, budgets_.ring);
  });
  return shared;
}

std::shared_ptr<const ExcisionResult> Artifacts::excision(RingPtr base,
                                                          const Ideal& ideal) {
  std::string key = "X:" + hex64(base->spec_hash()) + ":" + hex64(ideal.hash());
  return get(excisions_, key, [&]() -> std::shared_ptr<const ExcisionResult> {
    return std::make_shared<ExcisionResult>(excision_ring(base, ideal, budgets_.ring));
  });
}

std::shared_ptr<const ZModelResult> Artifacts::zmodel(const Ideal& ideal, unsigned k) {
  std::string key = "Z:" + hex64(ideal.ring->spec_hash()) + ":" + hex64(ideal.hash()) +
                    ":" + std::to_string(k);
  return get(zmodels_, key, [&]() -> std::shared_ptr<const ZModelResult> {
    return std::make_shared<ZModelResult>(zmodel_excision(ideal, k, budgets_.ring));
  });
}

std::shared_ptr<const QuotientResult> Artifacts::quotient(RingPtr base,
                                                          const Ideal& ideal) {
  std::string key = "Q:" + hex64(base->spec_hash()) + ":" + hex64(ideal.hash());
  return get(quotients_, key, [&]() -> std::shared_ptr<const QuotientResult> {
    return std::make_shared<QuotientResult>(quotient_ring(base, ideal, budgets_.ring));
  });
}

std::shared_ptr<const MatGroup> Artifacts::elementary(RingPtr ring, int n) {
  std::string key = "E:" + hex64(ring->spec_hash()) + ":" + std::to_string(n);
  return get(groups_, key, [&]() -> std::shared_ptr<const MatGroup> {
    std::string tag = "elementary";
    if (cache_) {
      if (auto g = cache_->load(ring, n, tag))
        return std::make_shared<MatGroup>(std::move(*g));
    }
    auto g = std::make_shared<MatGroup>(elementary_group(ring, n, budgets_.group));
    if (cache_) cache_->store(*g, tag);
    return g;
  });
}

std::shared_ptr<const MatGroup> Artifacts::relative(RingPtr ring, const Ideal& ideal,
                                                    int n, RelativeMethod method) {
  const char* mname = method == RelativeMethod::CrossValidated  ? "relx"
                      : method == RelativeMethod::NormalClosure ? "reln"
                                                                : "reli";
  std::string tag = std::string(mname) + "_" + hex64(ideal.hash());
  std::string key = "G:" + hex64(ring->spec_hash()) + ":" + tag + ":" + std::to_string(n);
  return get(groups_, key, [&]() -> std::shared_ptr<const MatGroup> {
    if (cache_) {
      if (auto g = cache_->load(ring, n, tag))
        return std::make_shared<MatGroup>(std::move(*g));
    }
    auto g = std::make_shared<MatGroup>(
        relative_elementary_group(ring, ideal, n, method, budgets_.group));
    if (cache_) cache_->store(*g, tag);
    return g;
  });
}

std::shared_ptr<const MatGroup> Artifacts::relative_acting(RingPtr ring,
                                                           const Ideal& ideal, int n) {
  std::string key =
      "A:" + hex64(ring->spec_hash()) + ":" + hex64(ideal.hash()) + ":" + std::to_string(n);
  return get(groups_, key, [&]() -> std::shared_ptr<const MatGroup> {
    return std::make_shared<MatGroup>(
        generators_only_group(ring, n, relative_generators(ring, ideal, n)));
  });
}

std::shared_ptr<const OrbitSpace> Artifacts::absolute_space(RingPtr ring, int n) {
  std::string key = "SA:" + hex64(ring->spec_hash()) + ":" + std::to_string(n);
  return get(spaces_, key, [&]() -> std::shared_ptr<const OrbitSpace> {
    auto sp = std::make_shared<OrbitSpace>(
        orbit_space(ring, n, std::nullopt, nullptr, budgets_.rows));
    sp->label = key;
    return sp;
  });
}

std::shared_ptr<const OrbitSpace> Artifacts::relative_space(RingPtr ring,
                                                            const Ideal& ideal, int n,
                                                            bool materialized) {
  std::string key = "SR:" + hex64(ring->spec_hash()) + ":" + hex64(ideal.hash()) + ":" +
                    std::to_string(n) + (materialized ? ":m" : ":g");
  return get(spaces_, key, [&]() -> std::shared_ptr<const OrbitSpace> {
    std::shared_ptr<const MatGroup> acting =
        materialized ? relative(ring, ideal, n, RelativeMethod::CrossValidated)
                     : relative_acting(ring, ideal, n);
    auto sp = std::make_shared<OrbitSpace>(
        orbit_space(ring, n, ideal, acting, budgets_.rows));
    sp->label = key;
    return sp;
  });
}

std::shared_ptr<const GroupTable> Artifacts::table(
    std::shared_ptr<const OrbitSpace> space) {
  std::string key = "T:" + space->label;
  return get(tables_, key, [&]() -> std::shared_ptr<const GroupTable> {
    const MatGroup* ambient = nullptr;
    std::shared_ptr<const MatGroup> amb_keep;
    if (!space->relative() && space->ring->size() <= 4) {
      amb_keep = elementary(space->ring, space->n);
      ambient = amb_keep.get();
    }
    auto t = std::make_shared<GroupTable>(group_table(*space, ambient));
    return t;
  });
}

// ---------------------------------------------------------------------------
// Check machinery

namespace {

struct Resolved {
  RingPtr ring;
  Ideal ideal;
  int n;
  unsigned k;
  ordered_json params;
};

Resolved resolve(Artifacts& art, const JobContext& job) {
  Resolved r;
  r.ring = art.ring(job.ring_spec);
  if (job.ideal_is_unit) {
    r.ideal = unit_ideal(r.ring);
  } else {
    std::vector<Elem> gens;
    for (const std::string& lit : job.ideal_gens) {
      auto v = r.ring->parse_element(lit);
      if (!v) throw ring_error("bad ideal generator literal \"" + lit + "\"");
      gens.push_back(*v);
    }
    r.ideal = ideal_generate(r.ring, gens);
  }
  r.n = job.n;
  r.k = job.k ? job.k : r.ring->characteristic();
  if (r.k % r.ring->characteristic() != 0)
    throw ring_error("k must be a multiple of char(R)");
  r.params["ring"] = r.ring->describe();
  r.params["ring_spec_hash"] = hex64(r.ring->spec_hash());
  r.params["ideal"] = r.ideal.describe();
  r.params["ideal_size"] = r.ideal.members.size();
  r.params["n"] = r.n;
  r.params["k"] = r.k;
  r.params["budget_elements"] = job.budgets.rows.max_candidates;
  r.params["budget_group"] = job.budgets.group.max_elements;
  return r;
}

using CheckFn = VerdictReport (*)(Artifacts&, const Resolved&);

VerdictReport guard(const std::string& name, const Resolved& rv,
                    const std::function<VerdictReport()>& body) {
  try {
    return body();
  } catch (const budget_error& e) {
    return make_skip(name, rv.params, std::string("budget: ") + e.what());
  } catch (const std::exception& e) {
    return make_fail(name, rv.params,
                     ordered_json::array({std::string("exception: ") + e.what()}));
  }
}

// ---- ring-core checks ----

VerdictReport check_ring_axioms(Artifacts&, const Resolved& rv) {
  const FiniteRing& r = *rv.ring;
  VerdictReport rep = make_pass("ring-axioms", rv.params);
  rep.parameters["size"] = r.size();
  rep.parameters["char"] = r.characteristic();
  rep.parameters["units"] = r.units().size();
  // construction already verified the axioms; re-verify a deterministic
  // sample through the public interface plus the dual-path agreement
  std::mt19937_64 rng(1);
  std::size_t checks = std::min<std::size_t>(r.size() * r.size(), 20000);
  for (std::size_t t = 0; t < checks; t++) {
    Elem a = Elem(rng() % r.size());
    Elem b = Elem(rng() % r.size());
    Elem c = Elem(rng() % r.size());
    bool ok = r.add(a, b) == r.add(b, a) && r.mul(a, b) == r.mul(b, a) &&
              r.mul(a, r.add(b, c)) == r.add(r.mul(a, b), r.mul(a, c)) &&
              r.add(a, b) == r.add_direct(a, b) && r.mul(a, b) == r.mul_direct(a, b);
    if (!ok)
      return make_fail("ring-axioms", rv.params,
                       ordered_json::array({"axiom/path mismatch at (" +
                                            r.format_element(a) + "," +
                                            r.format_element(b) + ")"}));
  }
  return rep;
}

VerdictReport check_ideal_closure(Artifacts&, const Resolved& rv) {
  const FiniteRing& r = *rv.ring;
  const Ideal& I = rv.ideal;
  VerdictReport rep = make_pass("ideal-closure", rv.params);
  rep.parameters["members"] = I.members.size();
  for (Elem x : I.members) {
    for (Elem y : I.members)
      if (!I.contains(r.add(x, y)))
        return make_fail("ideal-closure", rv.params,
                         ordered_json::array({"not closed under addition"}));
    for (Elem s = 0; s < r.size(); s++)
      if (!I.contains(r.mul(s, x)))
        return make_fail("ideal-closure", rv.params,
                         ordered_json::array({"not closed under ring multiples"}));
  }
  // minimality: the closure of the generators is exactly the member set
  Ideal again = ideal_generate(rv.ring, I.gens);
  if (again.members != I.members)
    return make_fail("ideal-closure", rv.params,
                     ordered_json::array({"closure is not reproducible"}));
  return rep;
}

VerdictReport check_excision_ring(Artifacts& art, const Resolved& rv) {
  const FiniteRing& r = *rv.ring;
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  VerdictReport rep = make_pass("excision-ring", rv.params);
  rep.parameters["excision_size"] = ex.ring->size();
  rep.parameters["excision_units"] = ex.ring->units().size();
  ordered_json bad = ordered_json::array();
  if (ex.ring->size() != r.size() * rv.ideal.members.size())
    bad.push_back("|R(+)I| != |R|*|I|");
  // (1,0) is the multiplicative identity
  if (ex.ring->one() != excision_pair(*ex.ring, r.one(), r.zero()))
    bad.push_back("identity is not (1,0)");
  // pi2 is a surjective hom with kernel of size |I|
  if (!ex.pi2.is_surjective()) bad.push_back("pi2 not surjective");
  std::size_t ker = 0;
  for (Elem x = 0; x < ex.ring->size(); x++)
    if (ex.pi2(x) == r.zero()) ker++;
  if (ker != rv.ideal.members.size()) bad.push_back("kernel of pi2 has wrong size");
  // pi2 o section = id
  RingHom section = excision_section(ex);
  if (!verify_retract(ex.pi2, section)) bad.push_back("pi2 o section != id");
  // quotient by 0(+)I is isomorphic to R via the first projection
  const QuotientResult& q = *art.quotient(ex.ring, ex.ideal);
  RingHom p1 = excision_proj1(ex);
  if (q.ring->size() != r.size()) {
    bad.push_back("|B/(0(+)I)| != |R|");
  } else {
    std::vector<Elem> map(q.ring->size(), 0);
    std::vector<char> set(q.ring->size(), 0);
    bool single_valued = true;
    for (Elem x = 0; x < ex.ring->size(); x++) {
      Elem cls = q.proj(x);
      if (!set[cls]) {
        map[cls] = p1(x);
        set[cls] = 1;
      } else if (map[cls] != p1(x)) {
        single_valued = false;
      }
    }
    if (!single_valued) {
      bad.push_back("first projection does not factor through B/(0(+)I)");
    } else {
      try {
        RingHom iso = make_hom(q.ring, rv.ring, map);
        if (!iso.is_injective() || !iso.is_surjective())
          bad.push_back("B/(0(+)I) -> R not bijective");
      } catch (const ring_error& e) {
        bad.push_back(std::string("B/(0(+)I) -> R not a hom: ") + e.what());
      }
    }
  }
  if (!bad.empty()) return make_fail("excision-ring", rv.params, bad);
  return rep;
}

VerdictReport check_double_ring(Artifacts& art, const Resolved& rv) {
  DoubleResult db = double_ring(rv.ring, rv.ideal, art.budgets().ring);
  VerdictReport rep = make_pass("double-ring", rv.params);
  rep.parameters["double_size"] = db.ring->size();
  ordered_json bad = ordered_json::array();
  if (db.ring->size() != rv.ring->size() * rv.ideal.members.size())
    bad.push_back("|C| != |R|*|I|");
  if (!db.proj1.is_surjective() || !db.proj2.is_surjective())
    bad.push_back("projections not surjective");
  for (Elem x = 0; x < db.ring->size(); x++)
    if (!rv.ideal.contains(rv.ring->sub(db.proj1(x), db.proj2(x)))) {
      bad.push_back("pair not congruent mod I");
      break;
    }
  if (!bad.empty()) return make_fail("double-ring", rv.params, bad);
  return rep;
}

VerdictReport check_iso_double_excision(Artifacts& art, const Resolved& rv) {
  RingHom iso = iso_double_excision(rv.ring, rv.ideal, art.budgets().ring);
  VerdictReport rep = make_pass("iso-double-excision", rv.params);
  ordered_json bad = ordered_json::array();
  // composing with the first projection of C recovers the first-coordinate
  // projection of R(+)I
  ExcisionResult ex = excision_ring(rv.ring, rv.ideal, art.budgets().ring);
  DoubleResult db = double_ring(rv.ring, rv.ideal, art.budgets().ring);
  for (Elem x = 0; x < ex.ring->size(); x++) {
    auto [a, i] = excision_split(*ex.ring, x);
    (void)i;
    if (db.proj1(iso(x)) != a) {
      bad.push_back("proj1 o iso != first coordinate");
      break;
    }
  }
  if (iso.src->size() != ex.ring->size()) bad.push_back("iso domain mismatch");
  if (!bad.empty()) return make_fail("iso-double-excision", rv.params, bad);
  return rep;
}

VerdictReport check_local_structure(Artifacts& art, const Resolved& rv) {
  VerdictReport rep = make_pass("local-structure", rv.params);
  auto base_local = local_structure(rv.ring);
  rep.parameters["base_local"] = base_local.has_value();
  if (!base_local || !rv.ideal.is_proper()) {
    rep.model_caveats.push_back(
        "hypothesis not applicable (base not local or ideal not proper)");
    return rep;
  }
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  auto exc_local = local_structure(ex.ring);
  if (!exc_local)
    return make_fail("local-structure", rv.params,
                     ordered_json::array({"R(+)I is not local although R is"}));
  // maximal ideal must be exactly m (+) I
  std::size_t expect = base_local->members.size() * rv.ideal.members.size();
  if (exc_local->members.size() != expect)
    return make_fail("local-structure", rv.params,
                     ordered_json::array({"maximal ideal is not m(+)I (size)"}));
  for (Elem x : exc_local->members) {
    auto [a, i] = excision_split(*ex.ring, x);
    (void)i;
    if (!base_local->contains(a))
      return make_fail("local-structure", rv.params,
                       ordered_json::array({"maximal ideal member outside m(+)I"}));
  }
  rep.parameters["maximal_ideal_size"] = exc_local->members.size();
  return rep;
}

VerdictReport check_zmodel(Artifacts& art, const Resolved& rv) {
  const ZModelResult& zm = *art.zmodel(rv.ideal, rv.k);
  VerdictReport rep = make_pass("zmodel-excision", rv.params);
  rep.parameters["model_size"] = zm.ring->size();
  rep.model_caveats.push_back("finite model (Z/" + std::to_string(rv.k) +
                              ")(+)I stands in for Z(+)I");
  ordered_json bad = ordered_json::array();
  const FiniteRing& r = *rv.ring;
  // image of f equals the subring Z*1 + I
  std::vector<char> image(r.size(), 0);
  for (Elem x = 0; x < zm.ring->size(); x++) image[zm.f(x)] = 1;
  std::vector<char> expect(r.size(), 0);
  for (unsigned m = 0; m < r.characteristic(); m++)
    for (Elem i : rv.ideal.members) expect[r.add(r.of_int(m), i)] = 1;
  if (image != expect) bad.push_back("image of f is not Z*1 + I");
  // k annihilates the model: k * (1,0) = 0
  Elem acc = zm.ring->zero();
  for (unsigned t = 0; t < rv.k; t++) acc = zm.ring->add(acc, zm.ring->one());
  if (acc != zm.ring->zero()) bad.push_back("k does not annihilate (1,0)");
  if (!bad.empty()) return make_fail("zmodel-excision", rv.params, bad);
  return rep;
}

// ---- group checks ----

VerdictReport check_elementary_group(Artifacts& art, const Resolved& rv) {
  if (rv.ring->size() > 4)
    return make_skip("elementary-group", rv.params,
                     "materialization scoped to |R| <= 4 (the I = R relative runs "
                     "cover larger rings)");
  auto e = art.elementary(rv.ring, rv.n);
  VerdictReport rep = make_pass("elementary-group", rv.params);
  rep.parameters["order"] = e->size();
  if (e->budget_exceeded)
    return make_skip("elementary-group", rv.params,
                     "budget: closure reached " + std::to_string(e->frontier_reached));
  // every element has determinant one
  for (std::size_t i = 0; i < e->size(); i++)
    if (determinant(e->element(i)) != rv.ring->one())
      return make_fail("elementary-group", rv.params,
                       ordered_json::array({"element with det != 1"}));
  return rep;
}

VerdictReport check_relative_cross_validation(Artifacts& art, const Resolved& rv) {
  auto g = art.relative(rv.ring, rv.ideal, rv.n, RelativeMethod::CrossValidated);
  VerdictReport rep = make_pass("relative-group-cross-validation", rv.params);
  if (g->budget_exceeded)
    return make_skip("relative-group-cross-validation", rv.params,
                     "budget: closure reached " + std::to_string(g->frontier_reached));
  rep.parameters["order"] = g->size();
  rep.parameters["generators"] = g->generators.size();
  return rep;
}

VerdictReport check_relative_n2(Artifacts& art, const Resolved& rv) {
  VerdictReport rep = make_pass("relative-group-n2-record", rv.params);
  rep.model_caveats.push_back(
      "n=2 outcome recorded only; the E^1-intersection identity is cited for n >= 3");
  MatGroup g =
      relative_elementary_group(rv.ring, rv.ideal, 2, RelativeMethod::NormalClosure,
                                art.budgets().group);
  if (g.budget_exceeded)
    return make_skip("relative-group-n2-record", rv.params, "budget");
  rep.parameters["order_n2"] = g.size();
  return rep;
}

VerdictReport check_congruence_groups(Artifacts& art, const Resolved& rv) {
  VerdictReport rep = make_pass("congruence-groups", rv.params);
  MatGroup sl = congruence_sl(rv.ring, rv.ideal, rv.n, art.budgets().group);
  if (sl.budget_exceeded)
    return make_skip("congruence-groups", rv.params, "budget: SL congruence set");
  rep.parameters["sl_order"] = sl.size();
  MatGroup gl = congruence_gl(rv.ring, rv.ideal, rv.n, art.budgets().group);
  if (gl.budget_exceeded) {
    rep.parameters["gl_order"] = "budget-skipped";
    rep.model_caveats.push_back("GL congruence set exceeded the element budget");
  } else {
    rep.parameters["gl_order"] = gl.size();
    if (gl.size() < sl.size())
      return make_fail("congruence-groups", rv.params,
                       ordered_json::array({"|GL(R,I)| < |SL(R,I)|"}));
  }
  auto rel = art.relative(rv.ring, rv.ideal, rv.n, RelativeMethod::CrossValidated);
  if (!rel->budget_exceeded) {
    for (std::size_t i = 0; i < rel->size(); i++)
      if (!sl.contains(rel->element(i)))
        return make_fail("congruence-groups", rv.params,
                         ordered_json::array({"E_n(R,I) escapes SL_n(R,I)"}));
    rep.parameters["relative_in_sl"] = true;
  }
  return rep;
}

VerdictReport check_relative_normality(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative(rv.ring, rv.ideal, rv.n, RelativeMethod::CrossValidated);
  if (rel->budget_exceeded)
    return make_skip("relative-normality", rv.params, "budget");
  VerdictReport rep = make_pass("relative-normality", rv.params);
  std::mt19937_64 rng(2);
  auto egens = elementary_generators(rv.ring, rv.n);
  std::size_t samples = 1000;
  for (std::size_t t = 0; t < samples; t++) {
    Mat g = mat_identity(*rv.ring, rv.n);
    int len = 1 + int(rng() % 5);
    for (int s = 0; s < len; s++) g = mat_mul(g, egens[rng() % egens.size()]);
    Mat h = rel->element(rng() % rel->size());
    Mat c = mat_mul(mat_mul(g, h), mat_inverse(g));
    if (!rel->contains(c))
      return make_fail("relative-normality", rv.params,
                       ordered_json::array({"conjugate escaped E_n(R,I)"}));
  }
  rep.parameters["samples"] = samples;
  return rep;
}

VerdictReport check_relative_in_congruence(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative(rv.ring, rv.ideal, rv.n, RelativeMethod::CrossValidated);
  if (rel->budget_exceeded)
    return make_skip("relative-in-congruence", rv.params, "budget");
  VerdictReport rep = make_pass("relative-in-congruence", rv.params);
  for (std::size_t i = 0; i < rel->size(); i++) {
    Mat g = rel->element(i);
    if (determinant(g) != rv.ring->one() || !congruent_identity(g, rv.ideal))
      return make_fail(
          "relative-in-congruence", rv.params,
          ordered_json::array({"member outside E_n(R) cap SL_n(R,I) pattern"}));
  }
  rep.parameters["members_checked"] = rel->size();
  return rep;
}

VerdictReport check_factorize(Artifacts&, const Resolved& rv) {
  if (rv.ring->size() > 4)
    return make_skip("factorize-roundtrip", rv.params,
                     "word tables exercised on |R| <= 4 here and in the descent");
  auto grp = closure(rv.ring, rv.n, elementary_generators(rv.ring, rv.n), true);
  VerdictReport rep = make_pass("factorize-roundtrip", rv.params);
  for (std::size_t i = 0; i < grp.size(); i++) {
    Mat g = grp.element(i);
    Word w = factorize(grp, g);
    if (evaluate_word(grp, w) != g)
      return make_fail("factorize-roundtrip", rv.params,
                       ordered_json::array({"word does not evaluate to its element"}));
  }
  rep.parameters["elements"] = grp.size();
  return rep;
}

// ---- row checks ----

VerdictReport check_um_enumeration(Artifacts& art, const Resolved& rv) {
  auto abs = art.absolute_space(rv.ring, rv.n);
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  VerdictReport rep = make_pass("um-enumeration", rv.params);
  rep.parameters["absolute_rows"] = abs->rows.size();
  rep.parameters["relative_rows"] = rel->rows.size();
  const FiniteRing& r = *rv.ring;
  for (const OrbitSpace* sp : {abs.get(), rel.get()}) {
    for (const UmRow& row : sp->rows) {
      if (dot(row.entries, row.certificate) != r.one())
        return make_fail("um-enumeration", rv.params,
                         ordered_json::array({"certificate does not pair to 1"}));
      if (sp->relative()) {
        const Ideal& I = *sp->ideal;
        for (int kk = 0; kk < sp->n; kk++) {
          Elem expect_zero_entries = kk == 0 ? r.sub(row.entries.e[kk], r.one())
                                             : row.entries.e[kk];
          Elem expect_zero_cert = kk == 0 ? r.sub(row.certificate.e[kk], r.one())
                                          : row.certificate.e[kk];
          if (!I.contains(expect_zero_entries) || !I.contains(expect_zero_cert))
            return make_fail("um-enumeration", rv.params,
                             ordered_json::array({"relative congruence violated"}));
        }
      }
    }
  }
  return rep;
}

VerdictReport check_orbit_absolute(Artifacts& art, const Resolved& rv) {
  auto abs = art.absolute_space(rv.ring, rv.n);
  VerdictReport rep = make_pass("orbit-absolute", rv.params);
  rep.parameters["classes"] = abs->classes.size();
  // partition sanity: reps are lex-min members, classes partition the rows
  std::size_t total = 0;
  for (std::size_t c = 0; c < abs->classes.size(); c++) {
    const auto& cls = abs->classes[c];
    total += cls.members.size();
    if (cls.members.empty() || cls.members.front() != cls.rep)
      return make_fail("orbit-absolute", rv.params,
                       ordered_json::array({"canonical rep is not the lex-min member"}));
  }
  if (total != abs->rows.size())
    return make_fail("orbit-absolute", rv.params,
                     ordered_json::array({"classes do not partition the rows"}));
  return rep;
}

VerdictReport check_orbit_absolute_oracle(Artifacts& art, const Resolved& rv) {
  if (rv.ring->size() > 4)
    return make_skip("orbit-absolute-oracle", rv.params,
                     "oracle equivalence scoped to |R| <= 4");
  auto abs = art.absolute_space(rv.ring, rv.n);
  auto em = art.elementary(rv.ring, rv.n);
  OrbitSpace oracle = orbit_space(rv.ring, rv.n, std::nullopt,
                                  em, art.budgets().rows);
  VerdictReport rep = make_pass("orbit-absolute-oracle", rv.params);
  if (oracle.classes.size() != abs->classes.size())
    return make_fail("orbit-absolute-oracle", rv.params,
                     ordered_json::array({"class counts differ"}));
  for (std::uint32_t id = 0; id < abs->rows.size(); id++)
    if (abs->class_ids[id] != oracle.class_ids[id])
      return make_fail("orbit-absolute-oracle", rv.params,
                       ordered_json::array({"partition differs from materialized action"}));
  rep.parameters["classes"] = abs->classes.size();
  return rep;
}

VerdictReport check_orbit_relative(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  VerdictReport rep = make_pass("orbit-relative", rv.params);
  rep.parameters["classes"] = rel->classes.size();
  // validate the generator action against the generators-only set
  auto rel_gen = art.relative_space(rv.ring, rv.ideal, rv.n, false);
  if (rel_gen->classes.size() != rel->classes.size())
    return make_fail("orbit-relative", rv.params,
                     ordered_json::array({"generator-set partition differs"}));
  for (std::uint32_t id = 0; id < rel->rows.size(); id++)
    if (rel->class_ids[id] != rel_gen->class_ids[id])
      return make_fail("orbit-relative", rv.params,
                       ordered_json::array({"generator-set partition differs"}));
  return rep;
}

VerdictReport check_orbit_triviality(Artifacts& art, const Resolved& rv) {
  auto abs = art.absolute_space(rv.ring, rv.n);
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  VerdictReport rep = make_pass("orbit-triviality", rv.params);
  rep.parameters["absolute_classes"] = abs->classes.size();
  rep.parameters["relative_classes"] = rel->classes.size();
  rep.model_caveats.push_back(
      "finite rings are semilocal, so every orbit space here must be a "
      "singleton; all group-structure checks are consistency checks on "
      "trivial groups plus formula-level identities");
  if (abs->classes.size() != 1 || rel->classes.size() != 1)
    return make_fail("orbit-triviality", rv.params,
                     ordered_json::array({"orbit space is not a singleton"}));
  return rep;
}

VerdictReport check_class_of_invariance(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  VerdictReport rep = make_pass("class-of-invariance", rv.params);
  std::mt19937_64 rng(3);
  std::size_t samples = 100;
  const MatGroup& acting = *rel->acting;
  for (std::size_t t = 0; t < samples; t++) {
    const RowVec& v = rel->rows[rng() % rel->rows.size()].entries;
    Mat g = acting.size() ? acting.element(rng() % acting.size())
                          : acting.generators[rng() % acting.generators.size()];
    RowVec w = row_action(v, g);
    if (class_of(*rel, w) != class_of(*rel, v))
      return make_fail("class-of-invariance", rv.params,
                       ordered_json::array({"class changed under the action"}));
  }
  rep.parameters["samples"] = samples;
  return rep;
}

// ---- calculus checks ----

VerdictReport table_report(const std::string& name, const Resolved& rv,
                           const GroupTable& t, int sd) {
  VerdictReport rep = make_pass(name, rv.params);
  rep.parameters["classes"] = t.table.size();
  rep.parameters["products_computed"] = t.axioms.products_computed;
  rep.parameters["sd"] = sd;
  rep.parameters["sd_within_wms_bound"] = sd <= 2 * rv.n - 4;
  if (sd > 2 * rv.n - 4)
    rep.model_caveats.push_back("Sd exceeds the 2n-4 hypothesis; table computed anyway");
  if (!t.axioms.pass()) {
    ordered_json w = ordered_json::array();
    for (const std::string& s : t.axioms.witnesses) w.push_back(s);
    VerdictReport f = make_fail(name, rv.params, w);
    f.parameters = rep.parameters;
    f.model_caveats = rep.model_caveats;
    return f;
  }
  return rep;
}

int stable_dim_of_ring(Artifacts& art, RingPtr ring) {
  StableRangeReport sr = stable_range(ring, unit_ideal(ring), 4, art.budgets().rows);
  return sr.sd;
}

VerdictReport check_group_table_absolute(Artifacts& art, const Resolved& rv) {
  auto abs = art.absolute_space(rv.ring, rv.n);
  auto t = art.table(abs);
  return table_report("group-table-absolute", rv, *t, stable_dim_of_ring(art, rv.ring));
}

VerdictReport check_group_table_relative(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  auto t = art.table(rel);
  return table_report("group-table-relative", rv, *t, stable_dim_of_ring(art, rv.ring));
}

VerdictReport niceness_report(const std::string& name, const Resolved& rv,
                              Artifacts& art, std::shared_ptr<const OrbitSpace> sp) {
  auto t = art.table(sp);
  VerdictReport rep = make_pass(name, rv.params);
  ordered_json verdicts = ordered_json::array();
  bool all_nice = true;
  bool coherent = true;
  std::optional<bool> first;
  for (int c = 0; c < sp->n; c++) {
    NicenessResult nr = niceness_check(*sp, *t, c);
    verdicts.push_back(ordered_json{{"coordinate", c},
                                    {"nice", nr.nice},
                                    {"instances", nr.instances}});
    if (!nr.nice) all_nice = false;
    if (!first)
      first = nr.nice;
    else if (*first != nr.nice)
      coherent = false;
  }
  rep.parameters["coordinates"] = verdicts;
  rep.parameters["coherent"] = coherent;
  if (!all_nice || !coherent)
    return make_fail(name, rv.params,
                     ordered_json::array({"niceness failed or verdicts disagree",
                                          verdicts}));
  return rep;
}

VerdictReport check_niceness_absolute(Artifacts& art, const Resolved& rv) {
  return niceness_report("niceness-absolute", rv, art,
                         art.absolute_space(rv.ring, rv.n));
}

VerdictReport check_niceness_relative(Artifacts& art, const Resolved& rv) {
  return niceness_report("niceness-relative", rv, art,
                         art.relative_space(rv.ring, rv.ideal, rv.n, true));
}

VerdictReport check_niceness_coherence(Artifacts& art, const Resolved& rv) {
  // verdicts must agree across coordinates on both spaces; the per-space
  // reports carry the detail, this one asserts the cross-space summary
  VerdictReport a = check_niceness_absolute(art, rv);
  VerdictReport b = check_niceness_relative(art, rv);
  VerdictReport rep = make_pass("niceness-coherence", rv.params);
  rep.parameters["absolute"] = a.verdict == VerdictReport::Verdict::Pass;
  rep.parameters["relative"] = b.verdict == VerdictReport::Verdict::Pass;
  if (a.failed() || b.failed())
    return make_fail("niceness-coherence", rv.params,
                     ordered_json::array({"a coordinate variant disagreed"}));
  return rep;
}

VerdictReport check_relative_niceness_criterion(Artifacts& art, const Resolved& rv) {
  // if MSE_n(R(+)I) is nice then MSE_n(R, I) must be nice
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  auto bspace = art.absolute_space(ex.ring, rv.n);
  auto btable = art.table(bspace);
  bool b_nice = true;
  for (int c = 0; c < rv.n; c++)
    if (!niceness_check(*bspace, *btable, c).nice) b_nice = false;
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  auto rtable = art.table(rel);
  bool r_nice = true;
  for (int c = 0; c < rv.n; c++)
    if (!niceness_check(*rel, *rtable, c).nice) r_nice = false;
  VerdictReport rep = make_pass("relative-niceness-criterion", rv.params);
  rep.parameters["excision_nice"] = b_nice;
  rep.parameters["relative_nice"] = r_nice;
  if (b_nice && !r_nice)
    return make_fail("relative-niceness-criterion", rv.params,
                     ordered_json::array({"criterion implication fails"}));
  return rep;
}

VerdictReport wms_report(const std::string& name, const Resolved& rv, Artifacts& art,
                         std::shared_ptr<const OrbitSpace> sp) {
  auto t = art.table(sp);
  WmsCheckResult res = wms_relation_check(*sp, *t);
  VerdictReport rep = make_pass(name, rv.params);
  rep.parameters["relation_instances"] = res.relation_instances;
  rep.parameters["product_identity_instances"] = res.product_identity_instances;
  rep.parameters["sampled"] = res.sampled;
  if (sp->relative() && sp->ideal->is_proper())
    rep.model_caveats.push_back(
        "r(1+q)=q instances need q and 1+q both congruent to 1 mod I, which is "
        "impossible for a proper ideal; the relation part is vacuous here");
  if (!res.holds) {
    ordered_json w = ordered_json::array();
    for (const std::string& s : res.failures) w.push_back(s);
    return make_fail(name, rv.params, w);
  }
  return rep;
}

VerdictReport check_wms_absolute(Artifacts& art, const Resolved& rv) {
  return wms_report("wms-relations-absolute", rv, art,
                    art.absolute_space(rv.ring, rv.n));
}

VerdictReport check_wms_relative(Artifacts& art, const Resolved& rv) {
  return wms_report("wms-relations-relative", rv, art,
                    art.relative_space(rv.ring, rv.ideal, rv.n, true));
}

VerdictReport check_mennicke_newman(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  auto abs = art.absolute_space(rv.ring, rv.n);
  std::shared_ptr<const MatGroup> ambient;
  if (rv.ring->size() <= 4) ambient = art.elementary(rv.ring, rv.n);
  VerdictReport rep = make_pass("mennicke-newman", rv.params);
  std::size_t pairs = 0;
  for (const UmRow& a : rel->rows)
    for (const UmRow& b : rel->rows) {
      mennicke_newman(*rel, a.entries, b.entries, MnMode::RelativeLast);
      mennicke_newman(*rel, a.entries, b.entries, MnMode::RelativeFirst);
      mennicke_newman(*abs, a.entries, b.entries, MnMode::Absolute,
                      ambient ? ambient.get() : nullptr);
      pairs++;
    }
  rep.parameters["pairs"] = pairs;
  rep.parameters["modes"] = 3;
  rep.parameters["membership"] = ambient ? "group-lookup" : "reduction-certificate";
  return rep;
}

VerdictReport check_theta(Artifacts& art, const Resolved& rv) {
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  if (rv.n != 3)
    return make_skip("theta-conjugation", rv.params, "theta is a length-3 construction");
  const FiniteRing& r = *rv.ring;
  VerdictReport rep = make_pass("theta-conjugation", rv.params);
  std::mt19937_64 rng(4);
  auto relgens = relative_generators(rv.ring, rv.ideal, 3);
  std::size_t samples = 1000;
  for (std::size_t t = 0; t < samples; t++) {
    const UmRow& row = rel->rows[t % rel->rows.size()];
    Mat alpha = mat_identity(r, 3);
    int len = relgens.empty() ? 0 : int(rng() % 5);
    for (int s = 0; s < len; s++)
      alpha = mat_mul(alpha, relgens[rng() % relgens.size()]);
    Mat th = theta(row.entries, row.certificate);
    if (!is_alternating(th))
      return make_fail("theta-conjugation", rv.params,
                       ordered_json::array({"theta not alternating"}));
    Mat oneplus = mat_identity(r, 4);
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) oneplus.at(i + 1, j + 1) = alpha.at(i, j);
    Mat conj = mat_mul(mat_mul(mat_transpose(oneplus), th), oneplus);
    if (!is_alternating(conj))
      return make_fail("theta-conjugation", rv.params,
                       ordered_json::array({"conjugate not alternating"}));
    RowVec expect = row_action(row.entries, alpha);
    if (theta_u_part(conj) != expect)
      return make_fail("theta-conjugation", rv.params,
                       ordered_json::array({"u part is not u*alpha"}));
    if (dot(theta_u_part(conj), theta_w_part(conj)) != r.one())
      return make_fail("theta-conjugation", rv.params,
                       ordered_json::array({"w' does not pair with u*alpha"}));
  }
  rep.parameters["samples"] = samples;
  return rep;
}

VerdictReport check_descent(Artifacts& art, const Resolved& rv) {
  if (rv.n != 3)
    return make_skip("lemma-a-descent", rv.params, "descent is a length-3 statement");
  if (rv.ring->size() > 4)
    return make_skip("lemma-a-descent", rv.params,
                     "descent sampling scoped to |R| <= 4");
  const FiniteRing& r = *rv.ring;
  auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
  auto e3rel = art.relative(rv.ring, rv.ideal, 3, RelativeMethod::CrossValidated);

  VerdictReport rep = make_pass("lemma-a-descent", rv.params);
  std::size_t done = 0, wanted = 50;
  std::size_t word_total = 0;

  if (rv.ideal.is_full()) {
    // E_4(R,R) = E_4(R) is far beyond materialization here; memberships
    // use reduction certificates and the E^4-form letters come from the
    // commutator rewrite of a certified elementary factorization
    rep.parameters["letters"] = "reduction-rewrite";
    std::mt19937_64 rng(7);
    std::vector<Mat> relgens3 = relative_generators(rv.ring, rv.ideal, 3);
    while (done < wanted) {
      Mat alpha = mat_identity(r, 3);
      int len = relgens3.empty() ? 0 : 1 + int(rng() % 6);
      for (int s = 0; s < len; s++)
        alpha = mat_mul(alpha, relgens3[rng() % relgens3.size()]);
      Mat oneplus = mat_identity(r, 4);
      for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) oneplus.at(i + 1, j + 1) = alpha.at(i, j);
      // membership precondition: certify 1(+)alpha in E_4(R,R)
      if (!elementary_reduction(oneplus))
        return make_fail("lemma-a-descent", rv.params,
                         ordered_json::array({"sampled 1(+)alpha lacks a certificate"}));
      auto letters = e4_letters_via_reduction(mat_transpose(oneplus), rv.ideal);
      if (!letters)
        return make_fail("lemma-a-descent", rv.params,
                         ordered_json::array({"E^4-form rewrite failed"}));
      const UmRow& u = rel->rows[done % rel->rows.size()];
      DescentResult dr = lemma_a_descend(*rel, u, alpha, *letters, *e3rel);
      word_total += dr.word_length;
      done++;
    }
  } else {
    auto e4rel = art.relative(rv.ring, rv.ideal, 4, RelativeMethod::NormalClosure);
    if (e4rel->budget_exceeded)
      return make_skip("lemma-a-descent", rv.params, "budget: E_4(R,I)");
    std::vector<Mat> gens;
    for (int i = 0; i < 3; i++) {
      for (Elem a = 0; a < r.size(); a++)
        if (a != r.zero()) gens.push_back(elementary(r, 4, 3, i, a));
      for (Elem x : rv.ideal.members)
        if (x != r.zero()) gens.push_back(elementary(r, 4, i, 3, x));
    }
    MatGroup e4form = closure(rv.ring, 4, gens, true, art.budgets().group);
    if (e4form.budget_exceeded)
      return make_skip("lemma-a-descent", rv.params, "budget: E^4-form group");
    rep.parameters["letters"] = "word-table";
    for (std::size_t idx = 0; idx < e4rel->size() && done < wanted; idx++) {
      Mat g = e4rel->element(idx);
      bool block = g.at(0, 0) == r.one();
      for (int kk = 1; kk < 4 && block; kk++)
        if (g.at(0, kk) != r.zero() || g.at(kk, 0) != r.zero()) block = false;
      if (!block) continue;
      Mat alpha;
      alpha.ring = &r;
      alpha.n = 3;
      for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) alpha.at(i, j) = g.at(i + 1, j + 1);
      if (determinant(alpha) != r.one() || !congruent_identity(alpha, rv.ideal))
        continue;
      // membership precondition holds by construction (g is an element of
      // the materialized E_4(R,I)); the letters come from its word table
      std::vector<Mat> letters = e4_letters_from_words(e4form, mat_transpose(g));
      const UmRow& u = rel->rows[done % rel->rows.size()];
      DescentResult dr = lemma_a_descend(*rel, u, alpha, letters, *e3rel);
      word_total += dr.word_length;
      done++;
    }
  }
  rep.parameters["samples"] = done;
  rep.parameters["mean_word_length"] = done ? double(word_total) / double(done) : 0.0;
  if (done == 0)
    return make_skip("lemma-a-descent", rv.params, "no admissible alpha found");
  return rep;
}

// ---- excision checks ----

VerdictReport check_retract_structure(Artifacts& art, const Resolved& rv) {
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  RingHom p1 = excision_proj1(ex);
  RingHom section = excision_section(ex);
  VerdictReport rep = make_pass("retract-structure", rv.params);
  if (!verify_retract(p1, section))
    return make_fail("retract-structure", rv.params,
                     ordered_json::array({"proj1 o section != id"}));
  if (!verify_retract(ex.pi2, section))
    return make_fail("retract-structure", rv.params,
                     ordered_json::array({"pi2 o section != id"}));
  // kernel of proj1 is exactly 0(+)I
  std::size_t ker = 0;
  for (Elem x = 0; x < ex.ring->size(); x++)
    if (p1(x) == rv.ring->zero()) ker++;
  if (ker != rv.ideal.members.size())
    return make_fail("retract-structure", rv.params,
                     ordered_json::array({"ker(proj1) != 0(+)I"}));
  return rep;
}

VerdictReport check_suslin(Artifacts& art, const Resolved& rv) {
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  auto e3relB = art.relative(ex.ring, ex.ideal, rv.n, RelativeMethod::NormalClosure);
  if (e3relB->budget_exceeded)
    return make_skip("suslin-retract", rv.params,
                     "budget: E_n(B,J) reached " +
                         std::to_string(e3relB->frontier_reached));
  SuslinCheckOutcome out =
      suslin_equality_check(ex.ring, ex.ideal, rv.n, *e3relB, art.budgets().group);
  VerdictReport rep = make_pass("suslin-retract", rv.params);
  rep.parameters["sl_order"] = out.sl_count;
  rep.parameters["relative_order"] = out.rel_count;
  rep.parameters["undecided"] = out.undecided;
  if (!out.equal) {
    ordered_json w = ordered_json::array();
    for (const std::string& s : out.issues) w.push_back(s);
    if (out.undecided)
      w.push_back("membership undecided for " + std::to_string(out.undecided) +
                  " elements");
    return make_fail("suslin-retract", rv.params, w);
  }
  return rep;
}

VerdictReport check_lemma_l(Artifacts& art, const Resolved& rv) {
  VerdictReport rep = make_pass("lemma-l", rv.params);
  ordered_json bad = ordered_json::array();

  // the canonical retract situation: B = R(+)I with B -> B/(0(+)I)
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  {
    const QuotientResult& q = *art.quotient(ex.ring, ex.ideal);
    auto relB = art.relative_space(ex.ring, ex.ideal, rv.n, false);
    auto absB = art.absolute_space(ex.ring, rv.n);
    LemmaLOutcome out = lemma_l_check(*relB, *absB, q.proj);
    rep.parameters["excision_applicable"] = out.applicable;
    rep.parameters["excision_rows_checked"] = out.rows_checked;
    if (out.applicable && !out.holds)
      for (const std::string& s : out.issues) bad.push_back("B: " + s);
  }

  // the job pair itself, when R -> R/I happens to admit a section
  const QuotientResult& q = *art.quotient(rv.ring, rv.ideal);
  if (q.ring->size() <= 8) {
    auto rel = art.relative_space(rv.ring, rv.ideal, rv.n, true);
    auto abs = art.absolute_space(rv.ring, rv.n);
    LemmaLOutcome out = lemma_l_check(*rel, *abs, q.proj);
    rep.parameters["base_applicable"] = out.applicable;
    if (out.applicable) rep.parameters["base_rows_checked"] = out.rows_checked;
    if (out.applicable && !out.holds)
      for (const std::string& s : out.issues) bad.push_back("R: " + s);
  } else {
    rep.parameters["base_applicable"] = "section search capped at |R/I| <= 8";
  }

  if (!bad.empty()) return make_fail("lemma-l", rv.params, bad);
  return rep;
}

VerdictReport check_inclusion_injectivity(Artifacts& art, const Resolved& rv) {
  // MSE_n(R(+)I, 0(+)I) -> MSE_n(R(+)I) is injective (trivial-class lemma)
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  auto relB = art.relative_space(ex.ring, ex.ideal, rv.n, false);
  auto absB = art.absolute_space(ex.ring, rv.n);
  OrbitMapReport map = induced_orbit_map(*relB, *absB, nullptr);
  VerdictReport rep = make_pass("inclusion-injectivity", rv.params);
  rep.parameters["src_classes"] = relB->classes.size();
  rep.parameters["dst_classes"] = absB->classes.size();
  rep.parameters["injective"] = map.injective;
  if (!map.well_defined || !map.total)
    return make_fail("inclusion-injectivity", rv.params,
                     ordered_json::array({"inclusion map ill-defined"}));
  if (!map.injective)
    return make_fail("inclusion-injectivity", rv.params,
                     ordered_json::array({"inclusion not injective on classes"}));
  return rep;
}

VerdictReport check_double_excision(Artifacts& art, const Resolved& rv) {
  const unsigned k = rv.k;
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  const ZModelResult& zk1 = *art.zmodel(ex.ideal, k);  // (Z/k)(+)(0(+)I)
  const ZModelResult& zk2 = *art.zmodel(rv.ideal, k);  // (Z/k)(+)I

  auto S1 = art.relative_space(ex.ring, ex.ideal, rv.n, false);
  auto S2 = art.relative_space(zk1.ring, zk1.ideal, rv.n, false);
  auto S3 = art.absolute_space(zk1.ring, rv.n);
  auto S4 = art.absolute_space(zk2.ring, rv.n);
  auto S5 = art.relative_space(zk2.ring, zk2.ideal, rv.n, false);
  auto S6 = art.relative_space(rv.ring, rv.ideal, rv.n, true);

  // phi : Z/k (+) (0(+)I)  ->  Z/k (+) I, (m, (0,i)) -> (m, i)
  std::vector<Elem> phimap(zk1.ring->size());
  for (Elem x = 0; x < zk1.ring->size(); x++) {
    auto [m, xi] = excision_split(*zk1.ring, x);
    auto [zero_part, i] = excision_split(*ex.ring, xi);
    (void)zero_part;
    phimap[x] = excision_pair(*zk2.ring, m, i);
  }
  RingHom phi = make_hom(zk1.ring, zk2.ring, std::move(phimap));

  struct Step {
    const char* name;
    OrbitMapReport map;
  };
  std::vector<Step> steps;
  steps.push_back({"F1: MSE(Zk(+)J, 0(+)J) -> MSE(B, J)",
                   induced_orbit_map(*S2, *S1, &zk1.f)});
  steps.push_back({"G1: MSE(Zk(+)J, 0(+)J) -> MSE(Zk(+)J)",
                   induced_orbit_map(*S2, *S3, nullptr)});
  steps.push_back({"phi: MSE(Zk(+)J) -> MSE(Zk(+)I)", induced_orbit_map(*S3, *S4, &phi)});
  steps.push_back({"G2: MSE(Zk(+)I, 0(+)I) -> MSE(Zk(+)I)",
                   induced_orbit_map(*S5, *S4, nullptr)});
  steps.push_back({"F2: MSE(Zk(+)I, 0(+)I) -> MSE(R, I)",
                   induced_orbit_map(*S5, *S6, &zk2.f)});
  steps.push_back({"pi2: MSE(B, J) -> MSE(R, I)", induced_orbit_map(*S1, *S6, &ex.pi2)});

  VerdictReport rep = make_pass("double-excision-chain", rv.params);
  rep.model_caveats.push_back("finite model: Z replaced by Z/" + std::to_string(k) +
                              "; the paper's statement is about Z(+)I");
  ordered_json detail = ordered_json::array();
  bool all_bijective = true;
  for (const Step& s : steps) {
    detail.push_back(ordered_json{{"map", s.name},
                                  {"well_defined", s.map.well_defined},
                                  {"injective", s.map.injective},
                                  {"surjective", s.map.surjective}});
    if (!s.map.bijective()) all_bijective = false;
  }
  rep.parameters["maps"] = detail;

  // pi2 is a group homomorphism against the two tables
  auto T1 = art.table(S1);
  auto T6 = art.table(S6);
  const OrbitMapReport& pi2map = steps.back().map;
  bool hom_ok = true;
  std::size_t hom_checks = 0;
  for (std::uint32_t a = 0; a < T1->table.size() && hom_ok; a++)
    for (std::uint32_t b = 0; b < T1->table.size() && hom_ok; b++) {
      hom_checks++;
      if (pi2map.class_map[T1->table[a][b]] !=
          T6->table[pi2map.class_map[a]][pi2map.class_map[b]])
        hom_ok = false;
    }
  rep.parameters["pi2_group_hom"] = hom_ok;
  rep.parameters["pi2_hom_checks"] = hom_checks;

  if (!all_bijective || !hom_ok)
    return make_fail("double-excision-chain", rv.params,
                     ordered_json::array({"chain map failed", detail}));
  return rep;
}

// ---- stable range checks ----

VerdictReport check_sr_condition(Artifacts& art, const Resolved& rv) {
  SrVerdict v = sr_condition(rv.ring, rv.ideal, 1, art.budgets().rows);
  VerdictReport rep = make_pass("sr-condition", rv.params);
  rep.parameters["n"] = 1;
  rep.parameters["holds"] = v.holds;
  rep.parameters["rows_checked"] = v.rows_checked;
  if (!v.holds)
    return make_fail(
        "sr-condition", rv.params,
        ordered_json::array({"Sr_1 fails at " + format_row(*v.counterexample)}));
  return rep;
}

VerdictReport check_stable_range(Artifacts& art, const Resolved& rv) {
  StableRangeReport sr = stable_range(rv.ring, rv.ideal, 4, art.budgets().rows);
  VerdictReport rep = make_pass("stable-range", rv.params);
  ordered_json per_n = ordered_json::array();
  for (const SrVerdict& v : sr.per_n)
    per_n.push_back(ordered_json{{"n", v.n}, {"holds", v.holds}});
  rep.parameters["per_n"] = per_n;
  rep.parameters["sr"] = sr.sr;
  rep.parameters["sd"] = sr.sd;
  // finite rings are semilocal: Sr = 1 is the expected outcome, and the
  // verdicts must be monotone in n
  bool monotone = true;
  for (std::size_t i = 1; i < sr.per_n.size(); i++)
    if (sr.per_n[i - 1].holds && !sr.per_n[i].holds) monotone = false;
  if (!monotone)
    return make_fail("stable-range", rv.params,
                     ordered_json::array({"Sr_n verdicts not monotone"}));
  if (sr.sr != 1)
    return make_fail("stable-range", rv.params,
                     ordered_json::array({"Sr != 1 on a finite ring"}));
  return rep;
}

VerdictReport check_sr_laws(Artifacts& art, const Resolved& rv) {
  if (rv.ring->size() > 16)
    return make_skip("sr-laws", rv.params, "ideal lattice capped at |R| <= 16");
  SrLawsResult laws = sr_laws_check(rv.ring, 4, art.budgets().rows);
  VerdictReport rep = make_pass("sr-laws", rv.params);
  rep.parameters["ideals"] = laws.ideals_found;
  rep.parameters["nested_pairs"] = laws.pairs_checked;
  if (!laws.pass()) {
    ordered_json w = ordered_json::array();
    for (const std::string& s : laws.failures) w.push_back(s);
    return make_fail("sr-laws", rv.params, w);
  }
  return rep;
}

// ---- experiments (the paper's open questions, evidence only) ----

VerdictReport check_question1(Artifacts& art, const Resolved& rv) {
  // Is MSE_n(Z(+)I) -> MSE_n(R(+)I) injective? (finite-model evidence)
  const ExcisionResult& ex = *art.excision(rv.ring, rv.ideal);
  const ZModelResult& zk2 = *art.zmodel(rv.ideal, rv.k);
  std::vector<Elem> hmap(zk2.ring->size());
  for (Elem x = 0; x < zk2.ring->size(); x++) {
    auto [m, i] = excision_split(*zk2.ring, x);
    Elem m1 = rv.ring->of_int(m);
    hmap[x] = excision_pair(*ex.ring, m1, i);
  }
  RingHom h = make_hom(zk2.ring, ex.ring, std::move(hmap));
  auto src = art.absolute_space(zk2.ring, rv.n);
  auto dst = art.absolute_space(ex.ring, rv.n);
  OrbitMapReport map = induced_orbit_map(*src, *dst, &h);
  VerdictReport rep = make_pass("question-1-evidence", rv.params);
  rep.parameters["src_classes"] = src->classes.size();
  rep.parameters["dst_classes"] = dst->classes.size();
  rep.parameters["well_defined"] = map.well_defined;
  rep.parameters["injective_on_model"] = map.injective;
  rep.model_caveats.push_back(
      "evidence for the paper's open question on a finite model only; "
      "nothing is claimed about Z(+)I itself");
  if (!map.well_defined)
    return make_fail("question-1-evidence", rv.params,
                     ordered_json::array({"induced map ill-defined"}));
  return rep;
}

VerdictReport check_question2(Artifacts& art, const Resolved& rv) {
  // Is MSE_n(Z(+)I, 0(+)I) nice iff MSE_n(Z(+)I) is nice? (model evidence)
  const ZModelResult& zk2 = *art.zmodel(rv.ideal, rv.k);
  auto relsp = art.relative_space(zk2.ring, zk2.ideal, rv.n, false);
  auto abssp = art.absolute_space(zk2.ring, rv.n);
  auto rt = art.table(relsp);
  auto at = art.table(abssp);
  bool rel_nice = true, abs_nice = true;
  for (int c = 0; c < rv.n; c++) {
    if (!niceness_check(*relsp, *rt, c).nice) rel_nice = false;
    if (!niceness_check(*abssp, *at, c).nice) abs_nice = false;
  }
  VerdictReport rep = make_pass("question-2-evidence", rv.params);
  rep.parameters["relative_nice_on_model"] = rel_nice;
  rep.parameters["absolute_nice_on_model"] = abs_nice;
  rep.parameters["equivalent_on_model"] = rel_nice == abs_nice;
  rep.model_caveats.push_back(
      "evidence for the paper's open question on a finite model only");
  return rep;
}

// ---------------------------------------------------------------------------
// Suite driver

struct CheckEntry {
  const char* name;
  VerdictReport (*fn)(Artifacts&, const Resolved&);
};

const std::vector<CheckEntry>& all_checks() {
  static const std::vector<CheckEntry> checks = {
      {"ring-axioms", check_ring_axioms},
      {"ideal-closure", check_ideal_closure},
      {"excision-ring", check_excision_ring},
      {"double-ring", check_double_ring},
      {"iso-double-excision", check_iso_double_excision},
      {"local-structure", check_local_structure},
      {"zmodel-excision", check_zmodel},
      {"elementary-group", check_elementary_group},
      {"relative-group-cross-validation", check_relative_cross_validation},
      {"relative-group-n2-record", check_relative_n2},
      {"congruence-groups", check_congruence_groups},
      {"relative-normality", check_relative_normality},
      {"relative-in-congruence", check_relative_in_congruence},
      {"factorize-roundtrip", check_factorize},
      {"um-enumeration", check_um_enumeration},
      {"orbit-absolute", check_orbit_absolute},
      {"orbit-absolute-oracle", check_orbit_absolute_oracle},
      {"orbit-relative", check_orbit_relative},
      {"orbit-triviality", check_orbit_triviality},
      {"class-of-invariance", check_class_of_invariance},
      {"group-table-absolute", check_group_table_absolute},
      {"group-table-relative", check_group_table_relative},
      {"niceness-absolute", check_niceness_absolute},
      {"niceness-relative", check_niceness_relative},
      {"niceness-coherence", check_niceness_coherence},
      {"relative-niceness-criterion", check_relative_niceness_criterion},
      {"wms-relations-absolute", check_wms_absolute},
      {"wms-relations-relative", check_wms_relative},
      {"mennicke-newman", check_mennicke_newman},
      {"theta-conjugation", check_theta},
      {"lemma-a-descent", check_descent},
      {"retract-structure", check_retract_structure},
      {"suslin-retract", check_suslin},
      {"lemma-l", check_lemma_l},
      {"inclusion-injectivity", check_inclusion_injectivity},
      {"double-excision-chain", check_double_excision},
      {"sr-condition", check_sr_condition},
      {"stable-range", check_stable_range},
      {"sr-laws", check_sr_laws},
      {"question-1-evidence", check_question1},
      {"question-2-evidence", check_question2},
  };
  return checks;
}

const std::map<std::string, std::vector<std::string>>& suites() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"rings",
       {"ring-axioms", "ideal-closure", "excision-ring", "double-ring",
        "iso-double-excision", "local-structure", "zmodel-excision"}},
      {"groups",
       {"elementary-group", "relative-group-cross-validation",
        "relative-group-n2-record", "congruence-groups", "relative-normality",
        "relative-in-congruence", "factorize-roundtrip"}},
      {"orbits",
       {"um-enumeration", "orbit-absolute", "orbit-absolute-oracle", "orbit-relative",
        "orbit-triviality", "class-of-invariance"}},
      {"calculus",
       {"group-table-absolute", "group-table-relative", "niceness-absolute",
        "niceness-relative", "niceness-coherence", "wms-relations-absolute",
        "wms-relations-relative", "mennicke-newman", "theta-conjugation",
        "lemma-a-descent"}},
      {"excision",
       {"retract-structure", "suslin-retract", "lemma-l", "inclusion-injectivity",
        "double-excision-chain", "relative-niceness-criterion"}},
      {"sr", {"sr-condition", "stable-range", "sr-laws"}},
      {"experiment", {"question-1-evidence", "question-2-evidence"}},
  };
  return m;
}

}  // namespace

std::vector<std::string> suite_check_names(const std::string& suite) {
  if (suite == "all") {
    std::vector<std::string> names;
    for (const CheckEntry& c : all_checks()) names.push_back(c.name);
    return names;
  }
  auto it = suites().find(suite);
  if (it == suites().end()) throw std::invalid_argument("unknown suite: " + suite);
  return it->second;
}

SuiteResult run_suite(const std::string& suite, const JobContext& job,
                      Artifacts& artifacts, int jobs) {
  std::vector<std::string> names = suite_check_names(suite);
  Resolved rv = resolve(artifacts, job);

  std::map<std::string, const CheckEntry*> by_name;
  for (const CheckEntry& c : all_checks()) by_name[c.name] = &c;

  SuiteResult result;
  result.checks.resize(names.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= names.size()) break;
      const CheckEntry* entry = by_name.at(names[idx]);
      auto start = std::chrono::steady_clock::now();
      VerdictReport rep =
          guard(entry->name, rv, [&]() { return entry->fn(artifacts, rv); });
      auto stop = std::chrono::steady_clock::now();
      result.checks[idx].report = std::move(rep);
      result.checks[idx].elapsed_ms =
          std::chrono::duration<double, std::milli>(stop - start).count();
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; t++) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const CheckOutcome& c : result.checks) {
    switch (c.report.verdict) {
      case VerdictReport::Verdict::Pass: result.passed++; break;
      case VerdictReport::Verdict::Fail: result.failed++; break;
      case VerdictReport::Verdict::Skip:
        result.skipped++;
        if (!c.report.witnesses.empty() &&
            c.report.witnesses[0].is_string() &&
            c.report.witnesses[0].get<std::string>().rfind("budget", 0) == 0)
          result.budget_partial = true;
        break;
    }
  }
  return result;
}

std::vector<CorpusEntry> corpus_rings() {
  std::vector<CorpusEntry> out;
  out.push_back({"z2", RingSpec::zmod(2)});
  out.push_back({"z3", RingSpec::zmod(3)});
  out.push_back({"z4", RingSpec::zmod(4)});
  out.push_back({"z2xz2", RingSpec::product({RingSpec::zmod(2), RingSpec::zmod(2)})});
  out.push_back({"f4", RingSpec::poly_quotient(RingSpec::zmod(2), {"1", "1", "1"})});
  out.push_back(
      {"z2eps", RingSpec::poly_quotient(RingSpec::zmod(2), {"0", "0", "1"})});
  out.push_back({"z8", RingSpec::zmod(8)});
  return out;
}

}  // namespace umrow
