#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "sck/assembler.hpp"
#include "sck/io.hpp"
#include "sck/twist.hpp"

using namespace sck;

namespace {

std::string fx(const std::string& name) { return std::string(SCK_FIXTURE_DIR) + "/" + name; }

std::shared_ptr<const Site> load_site(const std::string& name) {
  return std::make_shared<const Site>(load_assembler_file(fx(name)));
}

TwObject tw(const Site& s, const std::vector<std::string>& names) {
  TwObject o;
  for (const auto& n : names) o.parts.push_back(s.object_index(n));
  return o;
}

TwMorphism mor(const Site& s, const TwObject& src, const TwObject& dst, const std::vector<int>& set_map,
               const std::vector<std::string>& comps) {
  TwMorphism f;
  f.src = src;
  f.dst = dst;
  f.set_map = set_map;
  for (const auto& c : comps) f.components.push_back(s.morphism_index(c));
  validate_tw(s, f);
  return f;
}

bool iso_over_base(const Site& s, const TwMorphism& u, const TwMorphism& v) {
  for (const TwMorphism& f : hom_over(s, u, v))
    for (const TwMorphism& g : hom_over(s, v, u))
      if (tw_compose(s, g, f) == tw_identity(s, u.src) && tw_compose(s, f, g) == tw_identity(s, v.src))
        return true;
  return false;
}

// All formal coproducts with parts drawn from `pool`, sizes 0..max_parts.
std::vector<TwObject> object_pool(const Site& s, const std::vector<std::string>& pool, int max_parts) {
  std::vector<TwObject> out{TwObject{}};
  std::vector<TwObject> frontier{TwObject{}};
  for (int d = 0; d < max_parts; ++d) {
    std::vector<TwObject> next;
    for (const TwObject& o : frontier)
      for (const auto& n : pool) {
        TwObject grown = o;
        grown.parts.push_back(s.object_index(n));
        next.push_back(grown);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("coproduct concatenates strictly and compositions agree") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  TwObject ab = tw(s, {"A", "B"}), x = tw(s, {"X"});
  CHECK(tw_coproduct(tw_coproduct(ab, x), ab) == tw_coproduct(ab, tw_coproduct(x, ab)));
  CHECK(tw_coproduct(TwObject{}, ab) == ab);

  TwMorphism f = mor(s, ab, x, {0, 0}, {"a", "b"});
  TwMorphism idx = tw_identity(s, x);
  CHECK(tw_compose(s, idx, f) == f);
  CHECK(tw_compose(s, f, tw_identity(s, ab)) == f);
  TwMorphism ff = tw_coproduct_mor(f, f);
  CHECK(ff.src.size() == 4);
  CHECK(ff.set_map == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("classification: disjointness, covering fibers, invertible components") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  TwObject x = tw(s, {"X"});

  TwClassification c = classify(s, mor(s, tw(s, {"A", "B"}), x, {0, 0}, {"a", "b"}));
  CHECK(c.sub);
  CHECK(c.cover);
  CHECK_FALSE(c.move);

  c = classify(s, mor(s, tw(s, {"A", "A"}), x, {0, 0}, {"a", "a"}));
  CHECK_FALSE(c.sub);
  CHECK_FALSE(c.cover);

  c = classify(s, mor(s, tw(s, {"A"}), x, {0}, {"a"}));
  CHECK(c.sub);
  CHECK_FALSE(c.cover);

  // Block swap: a covering sub-map that is also a move.
  c = classify(s, mor(s, tw(s, {"A", "B"}), tw(s, {"B", "A"}), {1, 0}, {"id:A", "id:B"}));
  CHECK(c.sub);
  CHECK(c.cover);
  CHECK(c.move);

  // Empty families cover only when the topology says so.
  TwMorphism empty_to_x;
  empty_to_x.dst = x;
  c = classify(s, empty_to_x);
  CHECK(c.sub);
  CHECK_FALSE(c.cover);
  CHECK(c.move);

  auto ec = load_site("empty_cover.json");
  TwMorphism empty2;
  empty2.dst = tw(*ec, {"X"});
  CHECK(classify(*ec, empty2).cover);
}

TEST_CASE("tw_pullback works fiberwise and prunes empty intersections") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  TwObject x = tw(s, {"X"});
  TwMorphism fa = mor(s, tw(s, {"A"}), x, {0}, {"a"});
  TwMorphism fb = mor(s, tw(s, {"B"}), x, {0}, {"b"});
  CHECK(tw_pullback(s, fa, fb).apex.size() == 0);

  TwMorphism cover = mor(s, tw(s, {"A", "B"}), x, {0, 0}, {"a", "b"});
  TwPullback self = tw_pullback(s, cover, cover);
  CHECK(self.apex == tw(s, {"A", "B"}));
  CHECK(self.p.set_map == std::vector<int>{0, 1});
  CHECK(self.q.set_map == std::vector<int>{0, 1});

  TwPullback along_id = tw_pullback(s, cover, tw_identity(s, x));
  CHECK(along_id.apex == tw(s, {"A", "B"}));
}

TEST_CASE("hom_set enumeration and hom_over filtering") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  CHECK(hom_set(s, tw(s, {"A"}), tw(s, {"X"})).size() == 1);
  CHECK(hom_set(s, tw(s, {"A"}), tw(s, {"A", "A"})).size() == 2);
  CHECK(hom_set(s, tw(s, {"X"}), tw(s, {"A"})).empty());
  CHECK(hom_set(s, tw(s, {"A", "B"}), tw(s, {"X"})).size() == 1);

  TwMorphism u = mor(s, tw(s, {"A"}), tw(s, {"X"}), {0}, {"a"});
  TwMorphism v = mor(s, tw(s, {"A", "B"}), tw(s, {"X"}), {0, 0}, {"a", "b"});
  CHECK(hom_over(s, u, v).size() == 1);
  CHECK(hom_over(s, v, u).empty());
}

TEST_CASE("factor through: sub and covering properties descend to the first factor") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  std::vector<TwObject> pool = object_pool(s, {"A", "B", "X"}, 2);
  int checked = 0;
  for (const TwObject& U : pool)
    for (const TwObject& V : pool)
      for (const TwObject& W : pool) {
        if (V.size() > 2 || U.size() > V.size() + 1) continue;
        for (const TwMorphism& f : hom_set(s, U, V))
          for (const TwMorphism& g : hom_set(s, V, W)) {
            TwMorphism gf = tw_compose(s, g, f);
            TwClassification cf = classify(s, f), cg = classify(s, g), cgf = classify(s, gf);
            if (cgf.sub) CHECK(cf.sub);
            if (cgf.cover && cg.cover) CHECK(cf.cover);
            ++checked;
          }
      }
  CHECK(checked > 500);
}

TEST_CASE("base change adjunction: bijection, triangles, unit/counit isos") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  TwObject x = tw(s, {"X"});

  // Fold (surjective set map) and slice inclusion (injective set map).
  TwMorphism fold = mor(s, tw(s, {"X", "X"}), x, {0, 0}, {"id:X", "id:X"});
  TwMorphism incl = mor(s, x, tw(s, {"X", "A"}), {0}, {"id:X"});

  std::vector<TwMorphism> over_x = {
      mor(s, tw(s, {"A"}), x, {0}, {"a"}),
      mor(s, tw(s, {"A", "B"}), x, {0, 0}, {"a", "b"}),
      tw_identity(s, x),
  };
  std::vector<TwMorphism> over_xx = {
      mor(s, tw(s, {"A", "B"}), fold.src, {0, 1}, {"a", "b"}),
      mor(s, tw(s, {"A", "B", "A", "B"}), fold.src, {0, 0, 1, 1}, {"a", "b", "a", "b"}),
      tw_identity(s, fold.src),
  };
  std::vector<TwMorphism> over_xa = {
      mor(s, tw(s, {"A"}), incl.dst, {0}, {"a"}),
      mor(s, tw(s, {"A", "A"}), incl.dst, {0, 1}, {"a", "id:A"}),
      tw_identity(s, incl.dst),
  };

  for (int which = 0; which < 2; ++which) {
    const TwMorphism& sigma = which ? incl : fold;
    const auto& over_base = which ? over_xa : over_x;
    const auto& over_src = which ? over_x : over_xx;
    for (const TwMorphism& q : over_base)
      for (const TwMorphism& p : over_src) {
        TwMorphism sq = sigma_star(s, sigma, q);
        TwMorphism pi = dependent_product(s, sigma, p);
        CHECK(hom_over(s, sq, p).size() == hom_over(s, q, pi).size());
      }

    // Triangle 1: counit . sigma*(unit) = id on sigma* q.
    for (const TwMorphism& q : over_base) {
      TwMorphism sq = sigma_star(s, sigma, q);
      TwMorphism pi_sq = dependent_product(s, sigma, sq);
      TwMorphism eta = dp_unit(s, sigma, q);
      TwMorphism left = tw_compose(s, dp_counit(s, sigma, sq), sigma_star_mor(s, sigma, q, pi_sq, eta));
      CHECK(left == tw_identity(s, sq.src));
    }
    // Triangle 2: Pi(counit) . unit = id on Pi p.
    for (const TwMorphism& p : over_src) {
      TwMorphism pi = dependent_product(s, sigma, p);
      TwMorphism sp = sigma_star(s, sigma, pi);
      TwMorphism eps = dp_counit(s, sigma, p);
      TwMorphism left = tw_compose(s, dependent_product_mor(s, sigma, sp, p, eps), dp_unit(s, sigma, pi));
      CHECK(left == tw_identity(s, pi.src));
    }
  }

  // Surjective set map: the unit is an isomorphism.
  for (const TwMorphism& q : over_x) {
    TwMorphism rt = dependent_product(s, fold, sigma_star(s, fold, q));
    CHECK(iso_over_base(s, q, rt));
  }
  // Injective set map: the counit is an isomorphism.
  for (const TwMorphism& p : over_x) {
    TwMorphism ss = sigma_star(s, incl, dependent_product(s, incl, p));
    CHECK(iso_over_base(s, ss, p));
  }

  // Empty fiber: the product fills in the uncovered part.
  TwMorphism from_empty;
  from_empty.dst = x;
  TwMorphism empty_p;
  CHECK(dependent_product(s, from_empty, empty_p) == tw_identity(s, x));
}

TEST_CASE("base change adjoint with non-identity invertible components") {
  auto ip = load_site("iso_pair.json");
  const Site& s = *ip;
  TwMorphism sigma = mor(s, tw(s, {"A"}), tw(s, {"A2"}), {0}, {"u"});
  TwMorphism p = tw_identity(s, tw(s, {"A"}));
  TwMorphism pi = dependent_product(s, sigma, p);
  CHECK(pi.dst == tw(s, {"A2"}));
  CHECK(pi.src.size() == 1);
  TwMorphism back = sigma_star(s, sigma, pi);
  CHECK(iso_over_base(s, back, p));
  CHECK(hom_over(s, p, back).size() == 1);
}

TEST_CASE("dependent product preserves sub-maps and covering sub-maps") {
  auto hs = load_site("halfsplit.json");
  const Site& s = *hs;
  TwMorphism fold = mor(s, tw(s, {"X", "X"}), tw(s, {"X"}), {0, 0}, {"id:X", "id:X"});

  TwMorphism sub_only = mor(s, tw(s, {"A", "B"}), fold.src, {0, 1}, {"a", "b"});
  TwMorphism pi1 = dependent_product(s, fold, sub_only);
  CHECK(pi1.src.size() == 0);  // disjoint pieces meet nowhere
  CHECK(classify(s, pi1).sub);

  TwMorphism covering = mor(s, tw(s, {"A", "B", "A", "B"}), fold.src, {0, 0, 1, 1}, {"a", "b", "a", "b"});
  CHECK(classify(s, covering).cover);
  TwMorphism pi2 = dependent_product(s, fold, covering);
  CHECK(pi2.src == tw(s, {"A", "B"}));
  TwClassification c = classify(s, pi2);
  CHECK(c.sub);
  CHECK(c.cover);
}

TEST_CASE("functor application prunes collapsed parts") {
  CofiberAssembler cof = load_cofiber_file(fx("cofiber_point_in_halfsplit.json"));
  const Site& L1 = *cof.levels.level1;
  TwObject mixed;
  mixed.parts = {L1.object_index("A"), L1.object_index("d1:P"), L1.object_index("B")};

  TwObject down = apply_functor(cof.levels.d1_1, mixed);
  CHECK(down.size() == 2);
  CHECK(down.parts[0] == cof.levels.level0->object_index("A"));

  TwObject kept = apply_functor(cof.levels.d0_1, mixed);
  CHECK(kept.size() == 3);
  CHECK(kept.parts[1] == cof.levels.level0->object_index("A"));

  TwObject sym;
  sym.parts = {L1.object_index("A"), L1.object_index("d1:P"), L1.object_index("A")};
  TwMorphism swap;
  swap.src = sym;
  swap.dst = sym;
  swap.set_map = {2, 1, 0};
  swap.components = {L1.morphism_index("id:A"), L1.morphism_index("id:d1:P"), L1.morphism_index("id:A")};
  validate_tw(L1, swap);
  // A three-part swap collapses to a two-part swap once the middle part dies.
  TwMorphism image = apply_functor(cof.levels.d1_1, swap);
  CHECK(image.set_map == std::vector<int>{1, 0});
}
