#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sck/assembler.hpp"
#include "sck/error.hpp"
#include "sck/sqm.hpp"

using namespace sck;

namespace {

const std::string kFix = SCK_FIXTURE_DIR;

SqmContext halfsplit_ctx() { return make_sqm_context(load_assembler_file(kFix + "/halfsplit.json")); }
SqmContext quotient_ctx() {
  return make_sqm_context(load_cofiber_file(kFix + "/cofiber_point_in_halfsplit.json"));
}
SqmContext three_ctx() { return make_sqm_context(load_assembler_file(kFix + "/three_free.json")); }

TwObject tw(const Site& s, std::initializer_list<const char*> names) {
  TwObject out;
  for (const char* n : names) out.parts.push_back(s.object_index(n));
  return out;
}

// The covering weak equivalence {X} ~> {A|B} of the halfsplit site.
SCSpan halves_span(const Site& l0) {
  SCSpan sp;
  sp.src = tw(l0, {"X"});
  sp.dst = tw(l0, {"A", "B"});
  sp.apex = sp.dst;
  sp.moveleg = tw_identity(l0, sp.dst);
  sp.subleg.src = sp.dst;
  sp.subleg.dst = sp.src;
  sp.subleg.set_map = {0, 0};
  sp.subleg.components = {l0.morphism_index("a"), l0.morphism_index("b")};
  return sp;
}

SqmWord w1(std::vector<SqmLetter> ls) {
  SqmWord w = make_word(std::move(ls));
  w.degree = 1;
  return w;
}
SqmWord w0(std::vector<SqmLetter> ls) {
  SqmWord w = make_word(std::move(ls));
  w.degree = 0;
  return w;
}

SqmWord obj0_word(const SqmContext& ctx, std::initializer_list<const char*> names) {
  return w0({{make_obj0(ctx, tw(ctx.l0(), names)), 1}});
}

// Random degree-1 words mixing object letters, permutation equivalences, the
// halfsplit cover map, and swap atoms.
SqmWord random_word(const SqmContext& ctx, std::mt19937& rng, int len) {
  const Site& l0 = ctx.l0();
  const Site& l1 = ctx.l1();
  std::vector<int> l1objs, l0objs;
  for (int o = 0; o < l1.num_objects(); ++o)
    if (o != l1.initial()) l1objs.push_back(o);
  for (int o = 0; o < l0.num_objects(); ++o)
    if (o != l0.initial()) l0objs.push_back(o);
  auto rnd = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::vector<SqmLetter> ls;
  for (int k = 0; k < len; ++k) {
    int exp = rnd(2) ? 1 : -1;
    switch (rnd(4)) {
      case 0: {  // level-1 object with up to three parts
        TwObject a;
        int n = rnd(3) + 1;
        for (int i = 0; i < n; ++i) a.parts.push_back(l1objs[rnd((int)l1objs.size())]);
        ls.push_back({make_obj1(ctx, a), exp});
        break;
      }
      case 1: {  // permutation weak equivalence
        TwObject a;
        int n = rnd(3) + 1;
        for (int i = 0; i < n; ++i) a.parts.push_back(l0objs[rnd((int)l0objs.size())]);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        ls.push_back({make_weq0(ctx, sc_permutation(l0, a, perm)), exp});
        break;
      }
      case 2: {  // cover map padded by a random identity block
        SCSpan h = halves_span(l0);
        if (rnd(2)) {
          TwObject pad;
          pad.parts.push_back(l0objs[rnd((int)l0objs.size())]);
          h = sc_coproduct(l0, h, sc_identity(l0, pad));
        }
        ls.push_back({make_weq0(ctx, h), exp});
        break;
      }
      default: {  // swap atom
        int s = l0objs[rnd((int)l0objs.size())], t = l0objs[rnd((int)l0objs.size())];
        ls.push_back({tau_generator(ctx, s, t), exp});
        break;
      }
    }
  }
  return w1(std::move(ls));
}

}  // namespace

TEST_CASE("context construction and basis declarations") {
  SqmContext ctx = halfsplit_ctx();
  CHECK(ctx.n0() == 3);
  CHECK(ctx.n1() == 3);
  // Constant levels: every level-1 part is degenerate, so content dies.
  CHECK(ctx.q1.pretty() == "0");
  CHECK_THROWS_AS(make_sqm_context(load_assembler_file(kFix + "/halfsplit.json"), {"A", "B"}),
                  structural_error);
  CHECK_THROWS_AS(make_sqm_context(load_assembler_file(kFix + "/halfsplit.json"),
                                   {"A", "B", "X", "A"}),
                  structural_error);
  CHECK_NOTHROW(make_sqm_context(load_assembler_file(kFix + "/halfsplit.json"), {"X", "A", "B"}));

  SqmContext q = quotient_ctx();
  CHECK(q.n1() == 4);
  // The D copy survives in the content quotient; the C copy is degenerate.
  CHECK(q.q1.pretty() == "Z");
  TwObject dpart = tw(q.l1(), {"d1:P"});
  CHECK_FALSE(q.q1.is_zero(q.vec1(dpart)));
  TwObject cpart = tw(q.l1(), {"A"});
  CHECK(q.q1.is_zero(q.vec1(cpart)));
}

TEST_CASE("degree-0 values live in a class-two group") {
  SqmContext ctx = halfsplit_ctx();
  SqmWord x = obj0_word(ctx, {"A"});
  SqmWord y = obj0_word(ctx, {"X"});
  SqmWord comm = word_concat(word_concat(word_inverse(x), word_inverse(y)), word_concat(x, y));
  Nil2Value v = nil2_value(ctx, comm);
  CHECK(std::all_of(v.a.begin(), v.a.end(), [](const Int& c) { return c == 0; }));
  CHECK_FALSE(v.is_zero());  // the commutator is central but not trivial
  // Commutators are themselves central: conjugating by x does nothing.
  SqmWord conj = word_concat(word_concat(word_inverse(x), comm), x);
  CHECK(nil2_value(ctx, conj) == nil2_value(ctx, comm));
  // Multi-part letters multiply their parts in order.
  SqmWord ab = obj0_word(ctx, {"A", "X"});
  CHECK(nil2_value(ctx, ab) == nil2_value(ctx, word_concat(x, y)));
  CHECK(word_equal(ctx, ab, word_concat(x, y)) == SqmEq::Equal);
  CHECK(word_equal(ctx, word_concat(x, y), word_concat(y, x)) == SqmEq::Different);
}

TEST_CASE("boundary expands letterwise into single parts") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SqmWord bf = boundary(ctx, w1({{make_weq0(ctx, halves_span(l0)), 1}}));
  REQUIRE(bf.letters.size() == 3);
  CHECK(bf.letters[0].gen.obj == tw(l0, {"B"}));
  CHECK(bf.letters[0].exp == -1);
  CHECK(bf.letters[1].gen.obj == tw(l0, {"A"}));
  CHECK(bf.letters[1].exp == -1);
  CHECK(bf.letters[2].gen.obj == tw(l0, {"X"}));
  CHECK(bf.letters[2].exp == 1);
  // Degenerate object letters have vanishing boundary.
  SqmWord bs = boundary(ctx, w1({{make_obj1(ctx, tw(ctx.l1(), {"A", "B"})), 1}}));
  CHECK(nil2_value(ctx, bs).is_zero());
  CHECK(normalize(ctx, bs).letters.empty());
}

TEST_CASE("normalize erases trivial letters and cancels inverses") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  // Degenerate level-1 objects vanish.
  SqmWord degen = w1({{make_obj1(ctx, tw(ctx.l1(), {"A", "X"})), 1}});
  CHECK(normalize(ctx, degen).letters.empty());
  // Identity equivalences vanish.
  SqmWord idw = w1({{make_weq0(ctx, sc_identity(l0, tw(l0, {"A", "B"}))), -1}});
  CHECK(normalize(ctx, idw).letters.empty());
  // Literal inverse pairs cancel.
  SqmLetter h{make_weq0(ctx, halves_span(l0)), 1};
  SqmWord pair = w1({h, {h.gen, -1}});
  CHECK(normalize(ctx, pair).letters.empty());
  // An identity block in front of an equivalence strips away.
  SCSpan padded = sc_coproduct(l0, sc_identity(l0, tw(l0, {"B", "X"})), halves_span(l0));
  SqmWord stripped = normalize(ctx, w1({{make_weq0(ctx, padded), 1}}));
  SqmWord plain = normalize(ctx, w1({h}));
  CHECK(stripped == plain);
}

TEST_CASE("normalize merges adjacent letters and orders swap atoms") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SqmLetter h{make_weq0(ctx, halves_span(l0)), 1};
  SqmWord merged = normalize(ctx, w1({h, h}));
  // One combined equivalence, then a tail of canonical swap atoms.
  REQUIRE(!merged.letters.empty());
  CHECK(merged.letters[0].gen.tag == GenTag::Weq0);
  CHECK(merged.letters[0].gen.span.src == tw(l0, {"X", "X"}));
  CHECK(merged.letters[0].gen.span.dst == tw(l0, {"A", "B", "A", "B"}));
  for (std::size_t i = 1; i < merged.letters.size(); ++i) {
    auto st = is_tau_atom(ctx, merged.letters[i].gen);
    REQUIRE(st.has_value());
    CHECK(st->first <= st->second);
  }
  // A single-part permutation letter is itself a swap atom in disguise.
  SqmWord p = w1({{make_weq0(ctx, sc_permutation(l0, tw(l0, {"A", "B"}), {1, 0})), 1}});
  SqmWord np = normalize(ctx, p);
  REQUIRE(np.letters.size() == 1);
  CHECK(is_tau_atom(ctx, np.letters[0].gen).has_value());
  // Swap atoms in reversed orientation flip and cancel.
  SqmWord taus = w1({{tau_generator(ctx, l0.object_index("X"), l0.object_index("A")), 1},
                     {tau_generator(ctx, l0.object_index("A"), l0.object_index("X")), 1}});
  CHECK(normalize(ctx, taus).letters.empty());
  // Self-swaps square to nothing.
  SqmWord diag = w1({{tau_generator(ctx, l0.object_index("A"), l0.object_index("A")), 1},
                     {tau_generator(ctx, l0.object_index("A"), l0.object_index("A")), -1}});
  CHECK(normalize(ctx, diag).letters.empty());
}

TEST_CASE("normalize is idempotent and invariant-preserving on random words") {
  for (int which = 0; which < 2; ++which) {
    SqmContext ctx = which ? quotient_ctx() : halfsplit_ctx();
    std::mt19937 rng(17 + which);
    for (int trial = 0; trial < 100; ++trial) {
      SqmWord w = random_word(ctx, rng, 1 + trial % 8);
      AbelianShadow before = shadow(ctx, w);
      SqmWord n1w = normalize(ctx, w);  // every step is internally checked
      CHECK(shadow(ctx, n1w) == before);
      CHECK(normalize(ctx, n1w) == n1w);
    }
  }
}

TEST_CASE("pairing is bilinear and antisymmetric") {
  SqmContext ctx = halfsplit_ctx();
  SqmWord u = obj0_word(ctx, {"A"});
  SqmWord up = obj0_word(ctx, {"B", "X"});
  SqmWord v = obj0_word(ctx, {"X", "A"});
  SqmWord lhs = bracket(ctx, word_concat(u, up), v);
  SqmWord rhs = word_concat(bracket(ctx, u, v), bracket(ctx, up, v));
  CHECK(normalize(ctx, lhs) == normalize(ctx, rhs));
  // Antisymmetry: <u,v><v,u> collapses to nothing.
  SqmWord anti = word_concat(bracket(ctx, u, v), bracket(ctx, v, u));
  CHECK(normalize(ctx, anti).letters.empty());
  SqmWord self = word_concat(bracket(ctx, u, u), bracket(ctx, u, u));
  CHECK(normalize(ctx, self).letters.empty());
  // Boundary of the pairing is the reversed commutator.
  SqmWord bound = boundary(ctx, bracket(ctx, u, v));
  SqmWord comm = word_concat(word_concat(word_inverse(v), word_inverse(u)), word_concat(v, u));
  CHECK(nil2_value(ctx, bound) == nil2_value(ctx, comm));
}

TEST_CASE("commutators of degree-1 letters match the boundary pairing") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SqmLetter c{make_weq0(ctx, halves_span(l0)), 1};
  SqmLetter d{make_obj1(ctx, tw(ctx.l1(), {"B", "X"})), 1};
  SqmWord cw = w1({c}), dw = w1({d});
  SqmWord lhs = bracket(ctx, boundary(ctx, cw), boundary(ctx, dw));
  SqmWord rhs = word_concat(word_concat(word_inverse(dw), word_inverse(cw)), word_concat(dw, cw));
  CHECK(shadow(ctx, lhs) == shadow(ctx, rhs));
  CHECK(word_equal(ctx, lhs, rhs) != SqmEq::Different);
}

TEST_CASE("action by degree-0 letters matches block padding") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SqmWord f = w1({{make_weq0(ctx, halves_span(l0)), 1}});
  SqmWord c = obj0_word(ctx, {"B"});
  SqmWord acted = act(ctx, f, c);
  SCSpan paddedspan = sc_coproduct(l0, halves_span(l0), sc_identity(l0, tw(l0, {"B"})));
  SqmWord padded = w1({{make_weq0(ctx, paddedspan), 1}});
  CHECK(shadow(ctx, acted) == shadow(ctx, padded));
}

TEST_CASE("face exchange holds for level-1 equivalences") {
  for (int which = 0; which < 2; ++which) {
    SqmContext ctx = which ? quotient_ctx() : halfsplit_ctx();
    const Site& l1 = ctx.l1();
    std::mt19937 rng(5 + which);
    std::vector<int> l1objs;
    for (int o = 0; o < l1.num_objects(); ++o)
      if (o != l1.initial()) l1objs.push_back(o);
    auto rnd = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    for (int trial = 0; trial < 40; ++trial) {
      TwObject a;
      int n = rnd(3) + 1;
      for (int i = 0; i < n; ++i) a.parts.push_back(l1objs[rnd((int)l1objs.size())]);
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      SCSpan phi = sc_permutation(l1, a, perm);
      auto project = [&](const CompiledFunctor& fn) {
        SCSpan s;
        s.src = apply_functor(fn, phi.src);
        s.dst = apply_functor(fn, phi.dst);
        s.apex = apply_functor(fn, phi.apex);
        s.subleg = apply_functor(fn, phi.subleg);
        s.moveleg = apply_functor(fn, phi.moveleg);
        return s;
      };
      // [face0 phi][src] and [dst][face1 phi] are the two routes around phi.
      SqmWord lhs = w1({{make_weq0(ctx, project(ctx.levels.d0_1)), 1},
                        {make_obj1(ctx, phi.src), 1}});
      SqmWord rhs = w1({{make_obj1(ctx, phi.dst), 1},
                        {make_weq0(ctx, project(ctx.levels.d1_1)), 1}});
      CHECK(shadow(ctx, lhs) == shadow(ctx, rhs));
    }
  }
}

TEST_CASE("equality verdicts are three-valued") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SqmLetter h{make_weq0(ctx, halves_span(l0)), 1};
  SqmWord hw = w1({h});
  CHECK(word_equal(ctx, hw, hw) == SqmEq::Equal);
  // Degenerate object letters are invisible: [1_A][f] equals [f].
  SqmWord padded = w1({{make_obj1(ctx, tw(ctx.l1(), {"A"})), 1}, h});
  CHECK(word_equal(ctx, hw, padded) == SqmEq::Equal);
  SqmWord twice = w1({h, h});
  CHECK(word_equal(ctx, hw, twice) == SqmEq::Different);
  // A self-swap has a silent shadow but does not rewrite away: undecided.
  SqmWord selfswap = w1({{tau_generator(ctx, l0.object_index("A"), l0.object_index("A")), 1}});
  SqmWord empty;
  empty.degree = 1;
  CHECK(word_equal(ctx, selfswap, empty) == SqmEq::Unknown);
}

TEST_CASE("translation round trips between the two alphabets") {
  SqmContext ctx = quotient_ctx();
  const Site& l0 = ctx.l0();
  const Site& l1 = ctx.l1();
  SplittingTable table;

  // Level object -> identity cell -> object reappears literally.
  SqmWord objw = w1({{make_obj1(ctx, tw(l1, {"d1:P", "A"})), 1}});
  SqmWord fg_obj = translate_f(ctx, translate_g(ctx, objw), table);
  CHECK(normalize(ctx, fg_obj) == normalize(ctx, objw));

  // Level equivalence -> degenerate cell -> the degenerate object letter
  // erases and the equivalence survives.
  SqmWord weqw = w1({{make_weq0(ctx, halves_span(l0)), -1}});
  SqmWord fg_weq = translate_f(ctx, translate_g(ctx, weqw), table);
  CHECK(normalize(ctx, fg_weq) == normalize(ctx, weqw));

  // Cell equivalence -> level pair -> same shadow.
  SCSpan phi = sc_permutation(l1, tw(l1, {"A", "d1:P"}), {1, 0});
  SqmWord cellw = w1({{make_weq1(ctx, phi), 1}});
  SqmWord gf_cell = translate_g(ctx, translate_f(ctx, cellw, table));
  CHECK(shadow(ctx, gf_cell) == shadow(ctx, cellw));
  CHECK(word_equal(ctx, gf_cell, cellw) != SqmEq::Different);

  // Cofibration letter through its canonical splitting.
  SCSpan incl = sc_part_inclusion(l0, tw(l0, {"A", "B"}), {0});
  TwObject quot = tw(l0, {"B"});
  CofSplitting entry{incl, quot, canonical_splitting(ctx, incl, quot)};
  table.entries.push_back(entry);
  SqmWord cofw = w1({{make_cof(ctx, incl, quot), 1}});
  SqmWord f_cof = translate_f(ctx, cofw, table);
  REQUIRE(f_cof.letters.size() == 1);
  CHECK(f_cof.letters[0].gen.tag == GenTag::Weq0);
  SqmWord gf_cof = translate_g(ctx, f_cof);
  CHECK(shadow(ctx, gf_cof) == shadow(ctx, cofw));

  // Missing table entries are reported with the offending sequence.
  SCSpan incl2 = sc_part_inclusion(l0, tw(l0, {"A", "X"}), {1});
  SqmWord cofw2 = w1({{make_cof(ctx, incl2, tw(l0, {"A"})), 1}});
  CHECK_THROWS_WITH_AS(translate_f(ctx, cofw2, table),
                       doctest::Contains("no splitting on file"), structural_error);
}

TEST_CASE("splittings satisfy their triangles and nested squares") {
  SqmContext ctx = three_ctx();
  const Site& l0 = ctx.l0();
  TwObject pqr = tw(l0, {"P", "Q", "R"});
  TwObject pq = tw(l0, {"P", "Q"});
  TwObject qr = tw(l0, {"Q", "R"});

  SplittingTable table;
  auto add = [&](const SCSpan& c, const TwObject& q) {
    table.entries.push_back({c, q, canonical_splitting(ctx, c, q)});
  };
  add(sc_part_inclusion(l0, pq, {0}), tw(l0, {"Q"}));            // P >-> PQ
  add(sc_part_inclusion(l0, pqr, {0, 1}), tw(l0, {"R"}));        // PQ >-> PQR
  add(sc_part_inclusion(l0, pqr, {0}), qr);                      // P >-> PQR
  add(sc_part_inclusion(l0, qr, {0}), tw(l0, {"R"}));            // Q >-> QR
  CHECK_NOTHROW(check_splitting_squares(ctx, table));

  // A wrong splitting fails its triangle.
  SqmContext hctx = halfsplit_ctx();
  const Site& h0 = hctx.l0();
  TwObject aa = tw(h0, {"A", "A"});
  SCSpan cof = sc_part_inclusion(h0, aa, {0});
  CofSplitting bad{cof, tw(h0, {"A"}), sc_identity(h0, aa)};
  CHECK_THROWS_AS(check_splitting(hctx, bad), axiom_error);
  CHECK_NOTHROW(check_splitting(hctx, {cof, tw(h0, {"A"}),
                                       canonical_splitting(hctx, cof, tw(h0, {"A"}))}));
}

TEST_CASE("words survive a JSON round trip") {
  SqmContext ctx = quotient_ctx();
  const Site& l0 = ctx.l0();
  SCSpan incl = sc_part_inclusion(l0, tw(l0, {"A", "B"}), {0});
  SqmWord w = w1({{make_weq0(ctx, halves_span(l0)), -1},
                  {make_obj1(ctx, tw(ctx.l1(), {"d1:P"})), 1},
                  {tau_generator(ctx, l0.object_index("A"), l0.object_index("B")), 1}});
  CHECK(parse_word_json(ctx, word_to_json(ctx, w)) == w);
  SqmWord cofw = w1({{make_cof(ctx, incl, tw(l0, {"B"})), -1}});
  CHECK(parse_word_json(ctx, word_to_json(ctx, cofw)) == cofw);
  CHECK_THROWS_AS(parse_word_json(ctx, nlohmann::json{{"foo", 1}}), structural_error);
  CHECK_THROWS_AS(parse_word_json(ctx, nlohmann::json::parse(R"([{"tag":"bad","payload":[]}])")),
                  structural_error);
}
