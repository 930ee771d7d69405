#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "sck/assembler.hpp"
#include "sck/error.hpp"
#include "sck/kgroups.hpp"
#include "sck/sqm.hpp"

using namespace sck;

namespace {

const std::string kFix = SCK_FIXTURE_DIR;

AssemblerSpec spec(const std::string& name) { return load_assembler_file(kFix + "/" + name); }

SqmContext halfsplit_ctx() { return make_sqm_context(spec("halfsplit.json")); }
SqmContext point_quotient_ctx() {
  return make_sqm_context(load_cofiber_file(kFix + "/cofiber_point_in_halfsplit.json"));
}
SqmContext three_quotient_ctx() {
  return make_sqm_context(load_cofiber_file(kFix + "/cofiber_three_in_vsplit.json"));
}

TwObject tw(const Site& s, std::initializer_list<const char*> names) {
  TwObject out;
  for (const char* n : names) out.parts.push_back(s.object_index(n));
  return out;
}

// The permutation weak equivalence from src onto the literal tuple dst,
// matching equal parts greedily left to right.
SCSpan perm_span(const Site& s, const TwObject& src, const TwObject& dst) {
  REQUIRE(src.size() == dst.size());
  std::vector<int> perm(src.parts.size(), -1);
  std::vector<char> used(dst.parts.size(), 0);
  for (size_t i = 0; i < src.parts.size(); ++i) {
    for (size_t j = 0; j < dst.parts.size(); ++j) {
      if (!used[j] && dst.parts[j] == src.parts[i]) {
        perm[i] = static_cast<int>(j);
        used[j] = 1;
        break;
      }
    }
    REQUIRE(perm[i] >= 0);
  }
  SCSpan sp = sc_permutation(s, src, perm);
  REQUIRE(sp.dst == dst);
  return sp;
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

// The covering weak equivalence {P} ~> {Q|R} of the vertical-split site.
SCSpan vsplit_span(const Site& l0) {
  SCSpan sp;
  sp.src = tw(l0, {"P"});
  sp.dst = tw(l0, {"Q", "R"});
  sp.apex = sp.dst;
  sp.moveleg = tw_identity(l0, sp.dst);
  sp.subleg.src = sp.dst;
  sp.subleg.dst = sp.src;
  sp.subleg.set_map = {0, 0};
  sp.subleg.components = {l0.morphism_index("q"), l0.morphism_index("r")};
  return sp;
}

// ---------------------------------------------------------------------------
// Independent diagonal-factor oracle: gcds of k x k minors.  d_k / d_{k-1}
// gives the k-th diagonal entry of any diagonalization of the matrix.
// ---------------------------------------------------------------------------

Int det_minor(const std::vector<std::vector<Int>>& m, std::vector<int> rows,
              std::vector<int> cols) {
  const size_t k = rows.size();
  if (k == 1) return m[rows[0]][cols[0]];
  Int acc = 0, sign = 1;
  for (size_t j = 0; j < k; ++j) {
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    std::vector<int> sub_cols;
    for (size_t t = 0; t < k; ++t)
      if (t != j) sub_cols.push_back(cols[t]);
    acc += sign * m[rows[0]][cols[j]] * det_minor(m, sub_rows, sub_cols);
    sign = -sign;
  }
  return acc;
}

void all_subsets(int n, int k, int start, std::vector<int>& cur,
                 std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    all_subsets(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

std::vector<Int> divisors_by_minors(const std::vector<std::vector<Int>>& rel, int n) {
  const int r = static_cast<int>(rel.size());
  std::vector<Int> out;
  Int prev = 1;
  for (int k = 1; k <= std::min(r, n); ++k) {
    std::vector<std::vector<int>> rs, cs;
    std::vector<int> cur;
    all_subsets(r, k, 0, cur, rs);
    all_subsets(n, k, 0, cur, cs);
    Int g = 0;
    for (const auto& rows : rs)
      for (const auto& cols : cs) g = gcd(g, abs(det_minor(rel, rows, cols)));
    if (g == 0) break;
    out.push_back(g / prev);
    prev = g;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomized degree-one representatives over the three-object quotient
// context.  Index positions are drawn from the four base/subsite classes with
// the mixed classes balanced so that permutation legs exist.
// ---------------------------------------------------------------------------

K1Pair random_pair(const SqmContext& ctx, std::mt19937& rng) {
  const Site& l0 = ctx.l0();
  const Site& sd = *ctx.siteD;
  std::vector<int> dobjs, cobjs;
  for (int o = 0; o < sd.num_objects(); ++o)
    if (o != sd.initial()) dobjs.push_back(o);
  for (int o = 0; o < l0.num_objects(); ++o)
    if (o != l0.initial()) cobjs.push_back(o);
  auto pick = [&](const std::vector<int>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
  };

  // Aligned position lists; 0 = both base, 1 = base/sub, 2 = sub/base,
  // 3 = both sub.  Classes 1 and 2 reuse one multiset of subsite objects so
  // the two codomains stay part-for-part comparable.
  std::vector<std::pair<int, int>> slots;  // (class, payload object)
  const int n_mixed = std::uniform_int_distribution<int>(0, 2)(rng);
  std::vector<int> mixd;
  for (int i = 0; i < n_mixed; ++i) mixd.push_back(pick(dobjs));
  for (int d : mixd) slots.push_back({1, d});
  std::shuffle(mixd.begin(), mixd.end(), rng);
  for (int d : mixd) slots.push_back({2, d});
  for (int i = std::uniform_int_distribution<int>(0, 2)(rng); i > 0; --i)
    slots.push_back({0, pick(cobjs)});
  for (int i = std::uniform_int_distribution<int>(0, 2)(rng); i > 0; --i)
    slots.push_back({3, pick(dobjs)});
  std::shuffle(slots.begin(), slots.end(), rng);

  TwObject v1, w1;
  auto s0 = [&](int c) { return ctx.levels.s0_0.apply_obj(c); };
  auto dd = [&](int d) { return ctx.embedD->apply_obj(d); };
  auto fd = [&](int d) { return ctx.funcD->apply_obj(d); };
  for (auto [cls, o] : slots) {
    switch (cls) {
      case 0: v1.parts.push_back(s0(o)), w1.parts.push_back(s0(o)); break;
      case 1: v1.parts.push_back(s0(fd(o))), w1.parts.push_back(dd(o)); break;
      case 2: v1.parts.push_back(dd(o)), w1.parts.push_back(s0(fd(o))); break;
      default: v1.parts.push_back(dd(o)), w1.parts.push_back(dd(o)); break;
    }
  }

  TwObject b0;
  for (int i = std::uniform_int_distribution<int>(0, 2)(rng); i > 0; --i)
    b0.parts.push_back(pick(cobjs));
  TwObject codf = tw_coproduct(b0, apply_functor(ctx.levels.d1_1, v1));
  TwObject codg = tw_coproduct(b0, apply_functor(ctx.levels.d1_1, w1));
  TwObject a0 = codf;
  std::shuffle(a0.parts.begin(), a0.parts.end(), rng);

  return make_k1_pair(ctx, make_curly(ctx, perm_span(l0, a0, codf), b0, v1),
                      make_curly(ctx, perm_span(l0, a0, codg), b0, w1));
}

// A degree-one word with exactly trivial boundary: whole representative
// words, swap-atom packages, and cancelling junk pairs, concatenated in
// random order.
SqmWord random_kernel_word(const SqmContext& ctx, std::mt19937& rng) {
  const Site& l0 = ctx.l0();
  std::vector<int> cobjs;
  for (int o = 0; o < l0.num_objects(); ++o)
    if (o != l0.initial()) cobjs.push_back(o);
  auto pick = [&](const std::vector<int>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
  };

  std::vector<SqmWord> blocks;
  const int n_blocks = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int b = 0; b < n_blocks; ++b) {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0: blocks.push_back(pair_word(ctx, random_pair(ctx, rng))); break;
      case 1: {
        int s = pick(cobjs), t = pick(cobjs);
        SqmWord w;
        w.degree = 1;
        w.letters.push_back({tau_generator(ctx, s, t), 1});
        w.letters.push_back({tau_generator(ctx, t, s), 1});
        blocks.push_back(w);
        break;
      }
      case 2: {
        int y = pick(cobjs);
        SqmWord w;
        w.degree = 1;
        w.letters.push_back({tau_generator(ctx, y, y), 1});
        blocks.push_back(w);
        break;
      }
      default: {
        TwObject a;
        a.parts.push_back(ctx.levels.s0_0.apply_obj(pick(cobjs)));
        a.parts.push_back(ctx.embedD->apply_obj(
            pick(cobjs)));  // subsite copy of the same-named object
        SqmWord w;
        w.degree = 1;
        w.letters.push_back({make_obj1(ctx, a), 1});
        w.letters.push_back({make_obj1(ctx, a), -1});
        blocks.push_back(w);
        break;
      }
    }
  }
  std::shuffle(blocks.begin(), blocks.end(), rng);
  SqmWord out;
  out.degree = 1;
  for (const SqmWord& b : blocks) out = word_concat(out, b);
  return out;
}

}  // namespace

TEST_CASE("degree-zero presentations of the sample sites") {
  K0Presentation pt = k0(spec("point.json"));
  CHECK(pt.generators == std::vector<std::string>{"P"});
  CHECK(pt.relations.empty());
  CHECK(pt.group.free_rank == 1);
  CHECK(pt.group.torsion.empty());
  CHECK(pt.pretty() == "Z");

  K0Presentation hs = k0(spec("halfsplit.json"));
  CHECK(hs.generators == std::vector<std::string>{"A", "B", "X"});
  REQUIRE(hs.relations.size() == 1);
  CHECK(hs.relations[0] == std::vector<Int>{-1, -1, 1});
  CHECK(hs.group.free_rank == 2);
  CHECK(hs.pretty() == "Z^2");

  K0Presentation dc = k0(spec("double_cover.json"));
  CHECK(dc.generators == std::vector<std::string>{"A", "X"});
  REQUIRE(dc.relations.size() == 1);
  CHECK(dc.relations[0] == std::vector<Int>{-2, 1});
  CHECK(dc.group.snf.divisors == std::vector<Int>{1});
  CHECK(dc.group.free_rank == 1);
  CHECK(dc.group.torsion.empty());
  CHECK(dc.pretty() == "Z");

  K0Presentation t2 = k0(spec("torsion2.json"));
  CHECK(t2.group.free_rank == 1);
  CHECK(t2.group.torsion == std::vector<Int>{2});

  K0Presentation ec = k0(spec("empty_cover.json"));
  CHECK(ec.generators == std::vector<std::string>{"X"});
  REQUIRE(ec.relations.size() == 1);
  CHECK(ec.relations[0] == std::vector<Int>{1});
  CHECK(ec.group.free_rank == 0);
  CHECK(ec.pretty() == "0");
}

TEST_CASE("tuple classes reduce consistently in the degree-zero group") {
  AssemblerSpec hs_spec = spec("halfsplit.json");
  K0Presentation hs = k0(hs_spec);
  Site site(hs_spec);

  CHECK(k0_vector(hs, site, tw(site, {"A", "A", "X"})) == std::vector<Int>{2, 0, 1});
  CHECK(k0_vector(hs, site, TwObject{}) == std::vector<Int>{0, 0, 0});

  // The covering relation becomes invisible after reduction.
  std::vector<Int> x = k0_vector(hs, site, tw(site, {"X"}));
  std::vector<Int> ab = k0_vector(hs, site, tw(site, {"A", "B"}));
  CHECK(hs.group.reduce(x) == hs.group.reduce(ab));
  CHECK(hs.group.is_zero(hs.relations[0]));

  TwObject bad;
  bad.parts.push_back(site.initial());
  CHECK_THROWS_AS(k0_vector(hs, site, bad), structural_error);
}

TEST_CASE("diagonal factors agree with a minor-gcd oracle") {
  for (const char* name : {"point.json", "halfsplit.json", "double_cover.json", "torsion2.json",
                           "vsplit.json", "empty_cover.json"}) {
    K0Presentation p = k0(spec(name));
    CAPTURE(name);
    CHECK(p.group.snf.divisors ==
          divisors_by_minors(p.relations, static_cast<int>(p.generators.size())));
  }
}

TEST_CASE("wedges add ranks and torsion") {
  AssemblerSpec w =
      wedge_assembler({spec("halfsplit.json"), spec("double_cover.json"), spec("torsion2.json")});
  K0Presentation p = k0(w);
  CHECK(p.generators.size() == 8);
  CHECK(p.group.free_rank == 2 + 1 + 1);
  CHECK(p.group.torsion == std::vector<Int>{2});

  K0Presentation none = k0(wedge_assembler({}));
  CHECK(none.generators.empty());
  CHECK(none.pretty() == "0");
}

TEST_CASE("leg constructors police their shapes") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SCSpan halves = halves_span(l0);

  CurlyElement c = make_curly(ctx, halves, tw(l0, {"A"}), tw(l0, {"B"}));
  CHECK(c.b0 == tw(l0, {"A"}));
  CHECK(c.f.dst == tw(l0, {"A", "B"}));

  CHECK_THROWS_AS(make_curly(ctx, halves, tw(l0, {"B"}), tw(l0, {"B"})), structural_error);

  // Mismatched sources, frames, and first faces are all rejected.
  CurlyElement id_ab =
      make_curly(ctx, sc_identity(l0, tw(l0, {"A", "B"})), tw(l0, {"A", "B"}), TwObject{});
  CHECK_THROWS_WITH_AS(make_k1_pair(ctx, c, id_ab),
                       doctest::Contains("share their source"), structural_error);
  CurlyElement halves_flat = make_curly(ctx, halves, tw(l0, {"A", "B"}), TwObject{});
  CHECK_THROWS_WITH_AS(make_k1_pair(ctx, c, halves_flat),
                       doctest::Contains("share their frame"), structural_error);

  SqmContext qctx = point_quotient_ctx();
  const Site& ql0 = qctx.l0();
  TwObject dp;
  dp.parts.push_back(qctx.embedD->apply_obj(qctx.siteD->object_index("P")));
  CurlyElement qa = make_curly(qctx, sc_identity(ql0, tw(ql0, {"A"})), tw(ql0, {"A"}), dp);
  CurlyElement qb =
      make_curly(qctx, sc_identity(ql0, tw(ql0, {"A"})), tw(ql0, {"A"}), TwObject{});
  CHECK_THROWS_WITH_AS(make_k1_pair(qctx, qa, qb), doctest::Contains("first face"),
                       structural_error);

  K1Pair trivial = trivial_k1_pair(ctx);
  CHECK(normalize(ctx, pair_word(ctx, trivial)).letters.empty());
}

TEST_CASE("sums and composites of representatives keep the shadow") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SCSpan halves = halves_span(l0);

  // Two distinct equivalences with equal endpoints: the doubled cover, and
  // the doubled cover followed by the block swap.
  SCSpan f2 = sc_coproduct(l0, halves, halves);
  SCSpan f2s = sc_compose(l0, f2, sc_permutation(l0, f2.dst, {2, 3, 0, 1}));
  REQUIRE(!(sc_equivalent(l0, f2, f2s)));
  TwObject abab = f2.dst;
  K1Pair x = make_k1_pair(ctx, make_curly(ctx, f2, abab, TwObject{}),
                          make_curly(ctx, f2s, abab, TwObject{}));

  SUBCASE("a pair with equal legs is trivial") {
    K1Pair same = make_k1_pair(ctx, x.first, x.first);
    CHECK(normalize(ctx, pair_word(ctx, same)).letters.empty());
    SqmWord empty;
    empty.degree = 1;
    CHECK(shadow(ctx, pair_word(ctx, same)) == shadow(ctx, empty));
  }

  SUBCASE("adding the trivial pair changes nothing visible") {
    CurlyProduct prod = curly_product(ctx, x, trivial_k1_pair(ctx));
    CHECK(shadow(ctx, pair_word(ctx, prod.coproduct)) == shadow(ctx, pair_word(ctx, x)));
    CHECK(word_equal(ctx, pair_word(ctx, prod.coproduct), pair_word(ctx, x)) != SqmEq::Different);
  }

  SUBCASE("the coproduct word matches the concatenation in the shadow") {
    K1Pair y = make_k1_pair(ctx, make_curly(ctx, sc_identity(l0, tw(l0, {"A", "B"})),
                                            tw(l0, {"A"}), tw(l0, {"B"})),
                            make_curly(ctx, sc_identity(l0, tw(l0, {"A", "B"})),
                                       tw(l0, {"A"}), tw(l0, {"B"})));
    CurlyProduct prod = curly_product(ctx, x, y);
    CHECK(prod.coproduct.first.b0 == tw_coproduct(x.first.b0, y.first.b0));
    CHECK(shadow(ctx, pair_word(ctx, prod.coproduct)) ==
          shadow(ctx, word_concat(pair_word(ctx, x), pair_word(ctx, y))));
    CHECK(!prod.composition.has_value());
  }

  SUBCASE("composable pairs also expose a composite representative") {
    TwObject xx = tw(l0, {"X", "X"});
    K1Pair y = make_k1_pair(
        ctx, make_curly(ctx, sc_permutation(l0, xx, {1, 0}), xx, TwObject{}),
        make_curly(ctx, sc_identity(l0, xx), xx, TwObject{}));
    CurlyProduct prod = curly_product(ctx, x, y);
    REQUIRE(prod.composition.has_value());
    SqmWord both = word_concat(pair_word(ctx, x), pair_word(ctx, y));
    CHECK(shadow(ctx, pair_word(ctx, prod.coproduct)) == shadow(ctx, both));
    CHECK(shadow(ctx, pair_word(ctx, *prod.composition)) == shadow(ctx, both));
  }
}

TEST_CASE("canonical form collapses simple kernels and rejects the rest") {
  SqmContext ctx = halfsplit_ctx();
  const Site& l0 = ctx.l0();
  SCSpan halves = halves_span(l0);

  SUBCASE("an equivalence against itself cancels to the trivial pair") {
    SqmWord w;
    w.degree = 1;
    w.letters.push_back({make_weq0(ctx, halves), -1});
    w.letters.push_back({make_weq0(ctx, halves), 1});
    CHECK(canonical_k1(ctx, w) == trivial_k1_pair(ctx));
  }

  SUBCASE("a self-swap atom is absorbed into the frame") {
    SqmWord w;
    w.degree = 1;
    w.letters.push_back({tau_generator(ctx, l0.object_index("A"), l0.object_index("A")), 1});
    K1Pair q = canonical_k1(ctx, w);
    CHECK(shadow(ctx, pair_word(ctx, q)) == shadow(ctx, w));
  }

  SUBCASE("words outside the kernel of the boundary are rejected") {
    SqmWord w;
    w.degree = 1;
    w.letters.push_back({make_weq0(ctx, halves), 1});
    CHECK_THROWS_WITH_AS(canonical_k1(ctx, w), doctest::Contains("kernel"), structural_error);

    SqmWord lone_tau;
    lone_tau.degree = 1;
    lone_tau.letters.push_back(
        {tau_generator(ctx, l0.object_index("A"), l0.object_index("B")), 1});
    CHECK_THROWS_WITH_AS(canonical_k1(ctx, lone_tau), doctest::Contains("kernel"),
                         structural_error);
  }

  SUBCASE("only the level alphabet is accepted") {
    SqmWord w0;
    w0.degree = 0;
    CHECK_THROWS_AS(canonical_k1(ctx, w0), structural_error);

    SqmWord w;
    w.degree = 1;
    w.letters.push_back({make_weq1(ctx, sc_identity(ctx.l1(), tw(ctx.l1(), {"A"}))), 1});
    CHECK_THROWS_AS(canonical_k1(ctx, w), structural_error);
  }
}

TEST_CASE("canonical form handles mixed words over the quotient context") {
  SqmContext ctx = point_quotient_ctx();
  const Site& l0 = ctx.l0();
  int dP = ctx.embedD->apply_obj(ctx.siteD->object_index("P"));
  int sA = ctx.levels.s0_0.apply_obj(l0.object_index("A"));

  TwObject v1, w1;
  v1.parts = {dP, sA};
  w1.parts = {sA, dP};
  SCSpan leg = sc_identity(l0, tw(l0, {"A"}));
  K1Pair p = make_k1_pair(ctx, make_curly(ctx, leg, TwObject{}, v1),
                          make_curly(ctx, leg, TwObject{}, w1));
  SqmWord w = pair_word(ctx, p);

  K1Pair q = canonical_k1(ctx, w);
  CHECK(apply_functor(ctx.levels.d0_1, q.first.v1) == apply_functor(ctx.levels.d0_1, q.second.v1));
  CHECK(shadow(ctx, pair_word(ctx, q)) == shadow(ctx, w));

  K1Pair q2 = canonical_k1(ctx, pair_word(ctx, q));
  CHECK(shadow(ctx, pair_word(ctx, q2)) == shadow(ctx, pair_word(ctx, q)));
}

TEST_CASE("random kernel words canonicalize with stable shadows") {
  SqmContext ctx = three_quotient_ctx();
  std::mt19937 rng(20260814u);
  for (int iter = 0; iter < 50; ++iter) {
    CAPTURE(iter);
    SqmWord w = random_kernel_word(ctx, rng);
    K1Pair q = canonical_k1(ctx, w);
    CHECK(apply_functor(ctx.levels.d0_1, q.first.v1) ==
          apply_functor(ctx.levels.d0_1, q.second.v1));
    CHECK(shadow(ctx, pair_word(ctx, q)) == shadow(ctx, w));
    K1Pair q2 = canonical_k1(ctx, pair_word(ctx, q));
    CHECK(shadow(ctx, pair_word(ctx, q2)) == shadow(ctx, w));
  }
}

TEST_CASE("relative form strips matched positions") {
  SqmContext ctx = three_quotient_ctx();
  const Site& l0 = ctx.l0();
  const Site& sd = *ctx.siteD;
  auto s0 = [&](const char* n) { return ctx.levels.s0_0.apply_obj(l0.object_index(n)); };
  auto dd = [&](const char* n) { return ctx.embedD->apply_obj(sd.object_index(n)); };

  SUBCASE("base-only positions strip entirely") {
    TwObject v1;
    v1.parts = {s0("P"), s0("Q")};
    TwObject pq = tw(l0, {"P", "Q"});
    TwObject qp = tw(l0, {"Q", "P"});
    SCSpan leg = perm_span(l0, qp, pq);
    K1Pair p = make_k1_pair(ctx, make_curly(ctx, leg, TwObject{}, v1),
                            make_curly(ctx, leg, TwObject{}, v1));
    RelativeK1Quad q = relative_k1(ctx, p);
    CHECK(q.C.parts.empty());
    CHECK(q.D.parts.empty());
    CHECK(q.A == qp);
    CHECK(q.B == pq);
    CHECK(shadow(ctx, quad_word(ctx, q)) == shadow(ctx, pair_word(ctx, p)));
  }

  SUBCASE("one mixed position on each side survives") {
    TwObject v1, w1;
    v1.parts = {s0("Q"), dd("Q")};
    w1.parts = {dd("Q"), s0("Q")};
    SCSpan leg = sc_identity(l0, tw(l0, {"Q"}));
    K1Pair p = make_k1_pair(ctx, make_curly(ctx, leg, TwObject{}, v1),
                            make_curly(ctx, leg, TwObject{}, w1));
    RelativeK1Quad q = relative_k1(ctx, p);
    CHECK(q.C == tw(sd, {"Q"}));
    CHECK(q.D == tw(sd, {"Q"}));
    CHECK(shadow(ctx, quad_word(ctx, q)) == shadow(ctx, pair_word(ctx, p)));
  }

  SUBCASE("stripping preserves the shadow on random pairs") {
    std::mt19937 rng(912u);
    for (int iter = 0; iter < 15; ++iter) {
      CAPTURE(iter);
      K1Pair p = random_pair(ctx, rng);
      RelativeK1Quad q = relative_k1(ctx, p);
      CHECK(shadow(ctx, quad_word(ctx, q)) == shadow(ctx, pair_word(ctx, p)));
    }
  }

  SUBCASE("non-inclusions are rejected") {
    AssemblerMorphism collapse;
    collapse.object_map = {{"P", "P"}, {"Q", "P"}, {"R", "P"}};
    SqmContext bad =
        make_sqm_context(cofiber_assembler(spec("vsplit.json"), spec("three_free.json"), collapse));
    CHECK_THROWS_WITH_AS(relative_k1(bad, trivial_k1_pair(bad)), doctest::Contains("inclusion"),
                         structural_error);

    SqmContext constant = halfsplit_ctx();
    CHECK_THROWS_AS(relative_k1(constant, trivial_k1_pair(constant)), structural_error);
  }
}

TEST_CASE("boundary classes reproduce the subsite difference") {
  SqmContext ctx = three_quotient_ctx();
  const Site& l0 = ctx.l0();
  const Site& sd = *ctx.siteD;
  K0Presentation k0d = k0(sd.spec());
  auto s0 = [&](const char* n) { return ctx.levels.s0_0.apply_obj(l0.object_index(n)); };
  auto dd = [&](const char* n) { return ctx.embedD->apply_obj(sd.object_index(n)); };

  // First slot carries the subsite copies of Q and R, second the copy of P;
  // the legs are the identity of {P} and the splitting cover {P} ~> {Q|R}.
  TwObject v1, w1;
  v1.parts = {s0("P"), dd("Q"), dd("R")};
  w1.parts = {dd("P"), s0("Q"), s0("R")};
  K1Pair p = make_k1_pair(
      ctx, make_curly(ctx, sc_identity(l0, tw(l0, {"P"})), TwObject{}, v1),
      make_curly(ctx, vsplit_span(l0), TwObject{}, w1));
  RelativeK1Quad q = relative_k1(ctx, p);
  CHECK(q.C == tw(sd, {"P"}));
  CHECK(q.D == tw(sd, {"Q", "R"}));
  CHECK(shadow(ctx, quad_word(ctx, q)) == shadow(ctx, pair_word(ctx, p)));

  BoundaryClass b = boundary_k1(q, k0d, sd);
  CHECK(b.generator_coords == std::vector<Int>{-1, 1, 1});
  CHECK(b.reduced == k0d.group.reduce({-1, 1, 1}));

  SUBCASE("equal slots bound to zero") {
    RelativeK1Quad same = q;
    same.D = same.C;
    BoundaryClass z = boundary_k1(same, k0d, sd);
    CHECK(z.generator_coords == std::vector<Int>(k0d.generators.size(), 0));
    CHECK(k0d.group.is_zero(z.generator_coords));
  }

  SUBCASE("the boundary is additive over coproducts") {
    std::mt19937 rng(4417u);
    for (int iter = 0; iter < 10; ++iter) {
      CAPTURE(iter);
      K1Pair y = random_pair(ctx, rng);
      BoundaryClass by = boundary_k1(relative_k1(ctx, y), k0d, sd);
      K1Pair xy = curly_product(ctx, p, y).coproduct;
      BoundaryClass bxy = boundary_k1(relative_k1(ctx, xy), k0d, sd);
      std::vector<Int> expect = b.generator_coords;
      for (size_t i = 0; i < expect.size(); ++i) expect[i] += by.generator_coords[i];
      CHECK(bxy.generator_coords == expect);
      CHECK(bxy.reduced == k0d.group.reduce(expect));
    }
  }
}

TEST_CASE("representatives survive a JSON round trip") {
  SqmContext ctx = point_quotient_ctx();
  const Site& l0 = ctx.l0();
  TwObject v1, w1;
  v1.parts = {ctx.embedD->apply_obj(ctx.siteD->object_index("P")),
              ctx.levels.s0_0.apply_obj(l0.object_index("A"))};
  w1.parts = {v1.parts[1], v1.parts[0]};
  SCSpan leg = sc_identity(l0, tw(l0, {"A"}));
  K1Pair p = make_k1_pair(ctx, make_curly(ctx, leg, TwObject{}, v1),
                          make_curly(ctx, leg, TwObject{}, w1));
  CHECK(parse_pair_json(ctx, pair_to_json(ctx, p)) == p);
  CHECK_THROWS_AS(parse_pair_json(ctx, nlohmann::json::object()), structural_error);

  SqmContext ctx3 = three_quotient_ctx();
  const Site& l30 = ctx3.l0();
  TwObject tv, tww;
  tv.parts = {ctx3.levels.s0_0.apply_obj(l30.object_index("P")),
              ctx3.embedD->apply_obj(ctx3.siteD->object_index("Q")),
              ctx3.embedD->apply_obj(ctx3.siteD->object_index("R"))};
  tww.parts = {ctx3.embedD->apply_obj(ctx3.siteD->object_index("P")),
               ctx3.levels.s0_0.apply_obj(l30.object_index("Q")),
               ctx3.levels.s0_0.apply_obj(l30.object_index("R"))};
  K1Pair p3 = make_k1_pair(
      ctx3, make_curly(ctx3, sc_identity(l30, tw(l30, {"P"})), TwObject{}, tv),
      make_curly(ctx3, vsplit_span(l30), TwObject{}, tww));
  RelativeK1Quad q = relative_k1(ctx3, p3);
  CHECK(parse_quad_json(ctx3, quad_to_json(ctx3, q)) == q);

  K0Presentation hs = k0(spec("halfsplit.json"));
  nlohmann::json jk = k0_to_json(hs);
  CHECK(jk.at("group") == "Z^2");
  CHECK(jk.at("generators").size() == 3);
  CHECK(jk.contains("snf_diagonal"));
  CHECK(jk.contains("to_canonical"));
}
