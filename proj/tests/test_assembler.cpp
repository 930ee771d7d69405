#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <set>
#include <string>

#include "sck/assembler.hpp"
#include "sck/io.hpp"

using namespace sck;

namespace {

std::string fx(const std::string& name) { return std::string(SCK_FIXTURE_DIR) + "/" + name; }

std::shared_ptr<const Site> load_site(const std::string& name) {
  return std::make_shared<const Site>(load_assembler_file(fx(name)));
}

}  // namespace

TEST_CASE("bundled sites validate cleanly") {
  for (const char* name : {"point.json", "halfsplit.json", "double_cover.json", "torsion2.json",
                           "empty_cover.json", "vsplit.json", "three_free.json"}) {
    CAPTURE(name);
    ValidationReport rep = validate_assembler(load_assembler_file(fx(name)));
    CHECK(rep.ok());
    CHECK(rep.items.size() == 5);
    CHECK_NOTHROW(Site{load_assembler_file(fx(name))});
  }
}

TEST_CASE("halfsplit: hom sets, disjointness and covering sieves") {
  auto site = load_site("halfsplit.json");
  const Site& s = *site;
  int X = s.object_index("X"), A = s.object_index("A"), B = s.object_index("B");
  int a = s.morphism_index("a"), b = s.morphism_index("b");

  CHECK(s.hom(A, X).size() == 1);
  CHECK(s.hom(X, A).empty());
  CHECK(s.hom(s.initial(), X) == std::vector<int>{s.from_initial(X)});
  CHECK(s.compose(a, s.from_initial(A)) == s.from_initial(X));

  CHECK(s.are_disjoint(a, b));
  CHECK_FALSE(s.are_disjoint(a, a));
  CHECK(s.pullback(a, a).apex == A);
  CHECK(s.pullback(b, b).apex == B);
  CHECK(s.pullback(a, s.identity(X)).apex == A);

  CHECK(s.is_cover(X, {a, b}));
  CHECK(s.is_cover(X, {a, b, s.from_initial(X)}));
  CHECK_FALSE(s.is_cover(X, {a}));
  CHECK(s.is_cover(X, {s.identity(X)}));
  CHECK(s.is_cover(A, {s.identity(A)}));
  CHECK_FALSE(s.is_cover(A, {s.from_initial(A)}));

  // The covering sieves are exactly the maximal one and the declared one.
  CHECK(s.covering_sieves(X) == std::set<unsigned>{s.sieve_of_family(X, {a, b}), 15u});
  CHECK(s.covering_sieves(B) == std::set<unsigned>{3u});
  CHECK(s.covering_sieves(s.initial()) == std::set<unsigned>{0u, 1u});
}

TEST_CASE("pullback synthesis discovers the limit squares") {
  auto dc = load_site("double_cover.json");
  int a1 = dc->morphism_index("a1"), a2 = dc->morphism_index("a2");
  CHECK(dc->pullback(a1, a2).apex == dc->initial());
  CHECK(dc->pullback(a1, a1).apex == dc->object_index("A"));
  CHECK(dc->are_disjoint(a1, a2));

  auto t2 = load_site("torsion2.json");
  for (const char* f : {"a1", "a2"})
    for (const char* g : {"b1", "b2"})
      CHECK(t2->are_disjoint(t2->morphism_index(f), t2->morphism_index(g)));
  CHECK(t2->are_disjoint(t2->morphism_index("a1"), t2->morphism_index("a2")));
}

TEST_CASE("degenerate families and the cover-from-nothing flag") {
  CHECK(check_condition_g(*load_site("point.json")));
  CHECK(check_condition_g(*load_site("halfsplit.json")));
  CHECK(check_condition_g(*load_site("double_cover.json")));
  CHECK(check_condition_g(*load_site("vsplit.json")));
  CHECK_FALSE(check_condition_g(*load_site("empty_cover.json")));
  CHECK_FALSE(check_condition_g(*load_site("torsion2.json")));

  auto ec = load_site("empty_cover.json");
  CHECK(ec->is_cover(ec->object_index("X"), {}));
  auto pt = load_site("point.json");
  CHECK_FALSE(pt->is_cover(pt->object_index("P"), {}));
}

TEST_CASE("structural rejections name the offending entry") {
  CHECK_THROWS_AS(parse_assembler_json(R"({"objects": ["0"], "initial": "0", "extra": 1})", "t"),
                  structural_error);
  CHECK_THROWS_AS(parse_assembler_json(R"({"objects": ["0"]})", "t"), structural_error);
  CHECK_THROWS_AS(parse_assembler_json("nonsense", "t"), structural_error);

  AssemblerSpec s;
  s.objects = {"0", "A", "A"};
  s.initial = "0";
  CHECK_THROWS_WITH_AS(Site{s}, "duplicate object 'A'", structural_error);

  s.objects = {"0", "A"};
  s.initial = "Z";
  CHECK_THROWS_AS(Site{s}, structural_error);

  s.initial = "0";
  s.morphisms = {{"f", "A", "0"}};
  CHECK_THROWS_AS(Site{s}, structural_error);

  s.morphisms = {{"id:A", "A", "A"}};
  CHECK_THROWS_AS(Site{s}, structural_error);

  // Composition table missing a required composite.
  AssemblerSpec t;
  t.objects = {"0", "A", "B", "C"};
  t.initial = "0";
  t.morphisms = {{"f", "A", "B"}, {"g", "B", "C"}};
  CHECK_THROWS_WITH_AS(Site{t}, "missing composite: g after f", structural_error);
}

TEST_CASE("a declared square that is no limit fails the pullback axiom") {
  AssemblerSpec bad = load_assembler_file(fx("halfsplit_bad_pullback.json"));
  ValidationReport rep = validate_assembler(bad);
  CHECK_FALSE(rep.ok());
  bool found = false;
  for (const auto& item : rep.items)
    if (item.axiom == "pullbacks") {
      found = true;
      CHECK_FALSE(item.pass);
      CHECK(item.witness.find("(a, a)") != std::string::npos);
    }
  CHECK(found);
  CHECK_THROWS_AS(Site{bad}, axiom_error);
}

TEST_CASE("wedge: shared initial, separated parts, componentwise covers") {
  AssemblerSpec pt = load_assembler_file(fx("point.json"));
  AssemblerSpec hs = load_assembler_file(fx("halfsplit.json"));

  AssemblerSpec pp = wedge_assembler({pt, pt});
  auto spp = std::make_shared<const Site>(pp);
  CHECK(spp->num_objects() == 3);
  CHECK_NOTHROW(spp->object_index("w0:P"));
  CHECK_NOTHROW(spp->object_index("w1:P"));
  CHECK(spp->hom(spp->object_index("w0:P"), spp->object_index("w1:P")).empty());
  CHECK(validate_assembler(pp).ok());

  AssemblerSpec hp = wedge_assembler({hs, pt});
  auto shp = std::make_shared<const Site>(hp);
  CHECK(shp->num_objects() == 5);
  CHECK(shp->is_cover(shp->object_index("X"),
                      {shp->morphism_index("a"), shp->morphism_index("b")}));
  CHECK(shp->hom(shp->object_index("P"), shp->object_index("X")).empty());
  CHECK(check_condition_g(*shp));

  AssemblerSpec empty = wedge_assembler({});
  CHECK(Site{empty}.num_objects() == 1);
}

TEST_CASE("functor compilation rejects non-continuous and non-flat maps") {
  auto hs = load_site("halfsplit.json");
  auto pt = load_site("point.json");
  auto ec = load_site("empty_cover.json");

  AssemblerMorphism collapse;
  collapse.object_map = {{"A", "P"}, {"B", "P"}, {"X", "P"}};
  collapse.morphism_map = {{"a", "id:P"}, {"b", "id:P"}};
  CHECK_THROWS_AS(compile_functor(hs, pt, collapse), axiom_error);  // limit square lost

  AssemblerMorphism leak;
  leak.object_map = {{"X", "P"}};
  CHECK_THROWS_AS(compile_functor(ec, pt, leak), axiom_error);  // empty cover not preserved

  AssemblerMorphism partial;
  CHECK_THROWS_AS(compile_functor(pt, hs, partial), structural_error);

  AssemblerMorphism ok;
  ok.object_map = {{"P", "A"}};
  CompiledFunctor F = compile_functor(pt, hs, ok);
  CHECK(F.apply_obj(pt->object_index("P")) == hs->object_index("A"));
  CHECK(F.apply_mor(pt->from_initial(pt->object_index("P"))) ==
        hs->from_initial(hs->object_index("A")));
}

TEST_CASE("quotient levels: faces, degeneracies and embeddings") {
  CofiberAssembler cof = load_cofiber_file(fx("cofiber_point_in_halfsplit.json"));
  const Site& L0 = *cof.levels.level0;
  const Site& L1 = *cof.levels.level1;
  const Site& L2 = *cof.levels.level2;

  CHECK(L1.num_objects() == 5);  // 0, A, B, X, d1:P
  CHECK(L2.num_objects() == 6);  // 0, A, B, X, da:P, db:P
  int dP = L1.object_index("d1:P");
  CHECK(cof.levels.d0_1.apply_obj(dP) == L0.object_index("A"));
  CHECK(cof.levels.d1_1.apply_obj(dP) == L0.initial());
  CHECK(cof.levels.s0_0.apply_obj(L0.object_index("A")) == L1.object_index("A"));
  CHECK(cof.levels.s0_1.apply_obj(dP) == L2.object_index("db:P"));
  CHECK(cof.levels.s1_1.apply_obj(dP) == L2.object_index("da:P"));
  CHECK(cof.levels.d2_2.apply_obj(L2.object_index("db:P")) == L1.initial());
  CHECK(cof.levels.d2_2.apply_obj(L2.object_index("da:P")) == dP);

  CHECK(cof.embedD.apply_obj(cof.siteD->object_index("P")) == dP);
  CHECK(cof.embedC.apply_obj(L0.object_index("X")) == L1.object_index("X"));
  CHECK(cof.F.apply_obj(cof.siteD->object_index("P")) == L0.object_index("A"));

  CofiberAssembler tv = load_cofiber_file(fx("cofiber_three_in_vsplit.json"));
  const Site& M1 = *tv.levels.level1;
  CHECK(M1.num_objects() == 7);
  CHECK(tv.levels.d0_1.apply_obj(M1.object_index("d1:Q")) == tv.levels.level0->object_index("Q"));
  CHECK(tv.levels.d1_1.apply_obj(M1.object_index("d1:Q")) == tv.levels.level0->initial());
  CHECK(tv.levels.d0_1.apply_mor(M1.morphism_index("q")) == tv.levels.level0->morphism_index("q"));
  CHECK(tv.levels.d1_1.apply_mor(M1.morphism_index("ini:d1:Q")) ==
        tv.levels.level0->identity(tv.levels.level0->initial()));

  SimplicialAssemblerLevels c = constant_simplicial(load_assembler_file(fx("halfsplit.json")));
  CHECK(c.level0.get() == c.level1.get());
  CHECK(functor_equal(c.d0_1, c.d1_1));
}

TEST_CASE("serialization round-trips") {
  AssemblerSpec hs = load_assembler_file(fx("halfsplit.json"));
  std::string one = assembler_to_json(hs);
  std::string two = assembler_to_json(parse_assembler_json(one, "mem"));
  CHECK(one == two);
}
