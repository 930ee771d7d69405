#include "sck/kgroups.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "sck/error.hpp"

namespace sck {

namespace {

TwObject obj_apply(const CompiledFunctor& F, const TwObject& a) { return apply_functor(F, a); }

SCSpan span_apply(const CompiledFunctor& F, const SCSpan& s) {
  SCSpan r;
  r.src = apply_functor(F, s.src);
  r.dst = apply_functor(F, s.dst);
  r.apex = apply_functor(F, s.apex);
  r.subleg = apply_functor(F, s.subleg);
  r.moveleg = apply_functor(F, s.moveleg);
  return r;
}

TwObject face0(const SqmContext& ctx, const TwObject& a) {
  return obj_apply(ctx.levels.d0_1, a);
}
TwObject face1(const SqmContext& ctx, const TwObject& a) {
  return obj_apply(ctx.levels.d1_1, a);
}
TwObject degen0(const SqmContext& ctx, const TwObject& a) {
  return obj_apply(ctx.levels.s0_0, a);
}

// Abelianized boundary of a single letter, exponent included.
std::vector<Int> dvec(const SqmContext& ctx, const SqmLetter& l) {
  SqmWord one;
  one.degree = 1;
  one.letters = {l};
  return nil2_value(ctx, boundary(ctx, one)).a;
}

// ---------------------------------------------------------------------------
// Central bookkeeping for the canonicalization.  The subgroup generated by
// the two-part swap atoms is central and abelian, with tau(s,t) inverse to
// tau(t,s) and tau(s,s) of order two, so a value is a skew integer vector
// over ordered object pairs plus an F2 vector over single objects.  The
// boundary of a value is determined by the skew part alone (pair atoms bound
// to free commutator coordinates), so a value that must lie in the kernel of
// the boundary has skew part zero and is realized by self-swap atoms.
// ---------------------------------------------------------------------------
struct TauLedger {
  const SqmContext* ctx;
  std::map<std::pair<int, int>, Int> skew;  // key (s, t) with s < t
  std::vector<uint8_t> diag;                // level-0 object index -> bit

  explicit TauLedger(const SqmContext& c)
      : ctx(&c), diag(static_cast<size_t>(c.l0().num_objects()), 0) {}

  void add_atom(int s, int t, const Int& e) {
    if (s == t) {
      if (e % 2 != 0) diag[static_cast<size_t>(s)] ^= 1;
    } else if (s < t) {
      skew[{s, t}] += e;
    } else {
      skew[{t, s}] -= e;
    }
  }

  void add_atom_letter(const SqmLetter& l, int sign) {
    auto st = is_tau_atom(*ctx, l.gen);
    if (!st) throw internal_error("central correction is not a swap atom");
    add_atom(st->first, st->second, Int(sign * l.exp));
  }

  // <u, v> expanded bilinearly over the degree-0 part basis.
  void add_pairing(const std::vector<Int>& u, const std::vector<Int>& v, int sign) {
    for (int a = 0; a < ctx->n0(); ++a) {
      if (u[static_cast<size_t>(a)] == 0) continue;
      for (int b = 0; b < ctx->n0(); ++b) {
        if (v[static_cast<size_t>(b)] == 0) continue;
        add_atom(ctx->s0_objs[static_cast<size_t>(a)], ctx->s0_objs[static_cast<size_t>(b)],
                 sign * u[static_cast<size_t>(a)] * v[static_cast<size_t>(b)]);
      }
    }
  }

  bool skew_zero() const {
    for (const auto& [k, v] : skew)
      if (v != 0) return false;
    return true;
  }
};

// Left-fold a nonempty run of same-tag generators at exponent +1 into their
// coproduct, sending the emitted central atoms into the ledger with `sign`.
SqmGenerator merge_run(const SqmContext& ctx, const std::vector<SqmGenerator>& gens,
                       TauLedger& led, int sign) {
  SqmGenerator acc = gens.front();
  for (size_t i = 1; i < gens.size(); ++i) {
    bool combined = false;
    for (const SqmLetter& l : merge_same_sign(ctx, {acc, 1}, {gens[i], 1})) {
      if (is_tau_atom(ctx, l.gen)) {
        led.add_atom_letter(l, sign);
      } else if (!combined && l.exp == 1 && l.gen.tag == acc.tag) {
        acc = l.gen;
        combined = true;
      } else {
        throw internal_error("coproduct merge returned an unexpected replacement");
      }
    }
    if (!combined) throw internal_error("coproduct merge lost its combined letter");
  }
  return acc;
}

// Positions of four contiguous blocks rearranged to the order 0,2,1,3.
std::vector<int> swap_middle_blocks(int n0, int n1, int n2, int n3) {
  std::vector<int> perm(static_cast<size_t>(n0 + n1 + n2 + n3));
  int i = 0;
  for (int k = 0; k < n0; ++k, ++i) perm[static_cast<size_t>(i)] = i;
  for (int k = 0; k < n1; ++k, ++i) perm[static_cast<size_t>(i)] = i + n2;
  for (int k = 0; k < n2; ++k, ++i) perm[static_cast<size_t>(i)] = i - n1;
  for (int k = 0; k < n3; ++k, ++i) perm[static_cast<size_t>(i)] = i;
  return perm;
}

SCSpan canonical_weq(const Site& site, const SCSpan& s, const char* what) {
  SCClass cls = sc_classify(site, s);
  if (!cls.is_weak_equivalence) throw structural_error(std::string(what) + " is not a weak equivalence");
  return *cls.canonical;
}

}  // namespace

// ---------------------------------------------------------------------------
// Degree zero.
// ---------------------------------------------------------------------------

K0Presentation k0(const AssemblerSpec& spec) {
  Site site(spec);
  K0Presentation p;
  std::vector<int> pos(static_cast<size_t>(site.num_objects()), -1);
  for (int o = 0; o < site.num_objects(); ++o) {
    if (o == site.initial()) continue;
    pos[static_cast<size_t>(o)] = static_cast<int>(p.generators.size());
    p.generators.push_back(site.object_name(o));
  }
  for (const auto& [target, family] : site.covers()) {
    std::vector<Int> row(p.generators.size(), Int(0));
    row[static_cast<size_t>(pos[static_cast<size_t>(target)])] += 1;
    for (int m : family) row[static_cast<size_t>(pos[static_cast<size_t>(site.src(m))])] -= 1;
    p.relations.push_back(std::move(row));
  }
  p.group = make_abgroup(static_cast<int>(p.generators.size()), p.relations);
  return p;
}

std::vector<Int> k0_vector(const K0Presentation& p, const Site& site, const TwObject& a) {
  std::map<std::string, int> pos;
  for (size_t i = 0; i < p.generators.size(); ++i) pos[p.generators[i]] = static_cast<int>(i);
  std::vector<Int> v(p.generators.size(), Int(0));
  for (int part : a.parts) {
    auto it = pos.find(site.object_name(part));
    if (it == pos.end()) throw structural_error("tuple part is not a presentation generator");
    v[static_cast<size_t>(it->second)] += 1;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Degree-one representatives.
// ---------------------------------------------------------------------------

CurlyElement make_curly(const SqmContext& ctx, const SCSpan& f, const TwObject& b0,
                        const TwObject& v1) {
  validate_tw(ctx.l0(), b0);
  validate_tw(ctx.l1(), v1);
  validate_span(ctx.l0(), f);
  CurlyElement c;
  c.f = canonical_weq(ctx.l0(), f, "leg of a degree-one representative");
  c.b0 = b0;
  c.v1 = v1;
  if (!(c.f.dst == tw_coproduct(b0, face1(ctx, v1))))
    throw structural_error(
        "leg codomain must be the frame followed by the face image of its level-1 object");
  return c;
}

K1Pair make_k1_pair(const SqmContext& ctx, const CurlyElement& first,
                    const CurlyElement& second) {
  if (!(first.f.src == second.f.src))
    throw structural_error("the two legs must share their source object");
  if (!(first.b0 == second.b0)) throw structural_error("the two legs must share their frame");
  if (!(face0(ctx, first.v1) == face0(ctx, second.v1)))
    throw structural_error("the two level-1 objects must have the same first face");
  K1Pair p{first, second};
  if (!nil2_value(ctx, boundary(ctx, pair_word(ctx, p))).is_zero())
    throw internal_error("represented word of a validated pair has nontrivial boundary");
  return p;
}

K1Pair trivial_k1_pair(const SqmContext& ctx) {
  TwObject empty;
  SCSpan id = sc_identity(ctx.l0(), empty);
  CurlyElement c{id, empty, empty};
  return K1Pair{c, c};
}

SqmWord pair_word(const SqmContext& ctx, const K1Pair& p) {
  SqmWord w;
  w.degree = 1;
  w.letters.push_back({make_weq0(ctx, p.first.f), -1});
  if (!p.first.v1.parts.empty()) w.letters.push_back({make_obj1(ctx, p.first.v1), -1});
  if (!p.second.v1.parts.empty()) w.letters.push_back({make_obj1(ctx, p.second.v1), 1});
  w.letters.push_back({make_weq0(ctx, p.second.f), 1});
  return w;
}

CurlyProduct curly_product(const SqmContext& ctx, const K1Pair& x, const K1Pair& y) {
  const Site& l0 = ctx.l0();

  auto leg_coprod = [&](const CurlyElement& cx, const CurlyElement& cy) {
    SCSpan raw = sc_coproduct(l0, cx.f, cy.f);
    TwObject d1x = face1(ctx, cx.v1), d1y = face1(ctx, cy.v1);
    std::vector<int> perm =
        swap_middle_blocks(cx.b0.size(), d1x.size(), cy.b0.size(), d1y.size());
    SCSpan lam = sc_permutation(l0, raw.dst, perm);
    SCSpan f = sc_compose(l0, raw, lam);
    return make_curly(ctx, f, tw_coproduct(cx.b0, cy.b0), tw_coproduct(cx.v1, cy.v1));
  };

  CurlyProduct out;
  out.coproduct = make_k1_pair(ctx, leg_coprod(x.first, y.first), leg_coprod(x.second, y.second));

  if (y.first.b0 == x.first.f.src) {
    auto leg_comp = [&](const CurlyElement& cx, const CurlyElement& cy) {
      TwObject d1x = face1(ctx, cx.v1), d1y = face1(ctx, cy.v1);
      SCSpan padded = sc_coproduct(l0, cx.f, sc_identity(l0, d1y));
      SCSpan comp = sc_compose(l0, cy.f, padded);
      std::vector<int> perm = swap_middle_blocks(cx.b0.size(), d1x.size(), d1y.size(), 0);
      SCSpan lam = sc_permutation(l0, comp.dst, perm);
      SCSpan f = sc_compose(l0, comp, lam);
      return make_curly(ctx, f, cx.b0, tw_coproduct(cy.v1, cx.v1));
    };
    out.composition =
        make_k1_pair(ctx, leg_comp(x.first, y.first), leg_comp(x.second, y.second));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonicalization.
// ---------------------------------------------------------------------------

K1Pair canonical_k1(const SqmContext& ctx, const SqmWord& w) {
  const Site& l0 = ctx.l0();
  if (w.degree != 1) throw structural_error("canonical form expects a degree-1 word");
  for (const SqmLetter& l : w.letters)
    if (l.gen.tag != GenTag::Obj1 && l.gen.tag != GenTag::Weq0)
      throw structural_error(
          "canonical form expects level-alphabet letters (level-1 objects and level-0 "
          "equivalences)");
  if (!nil2_value(ctx, boundary(ctx, w)).is_zero())
    throw structural_error("input not in the kernel of the boundary");

  TauLedger led(ctx);

  // Normal form, with the central atom tail absorbed into the ledger.
  std::vector<SqmLetter> body;
  for (const SqmLetter& l : normalize(ctx, w).letters) {
    if (is_tau_atom(ctx, l.gen))
      led.add_atom_letter(l, 1);
    else
      body.push_back(l);
  }

  // Bucket order: inverse equivalences, inverse objects, objects,
  // equivalences.  Each adjacent exchange x y -> y x costs the central
  // element <boundary(y), boundary(x)>.
  auto bucket = [](const SqmLetter& l) {
    if (l.gen.tag == GenTag::Weq0) return l.exp < 0 ? 0 : 3;
    return l.exp < 0 ? 1 : 2;
  };
  for (bool moved = true; moved;) {
    moved = false;
    for (size_t i = 0; i + 1 < body.size(); ++i) {
      if (bucket(body[i]) <= bucket(body[i + 1])) continue;
      led.add_pairing(dvec(ctx, body[i + 1]), dvec(ctx, body[i]), 1);
      std::swap(body[i], body[i + 1]);
      moved = true;
    }
  }

  // Merge each bucket into one letter.  Inverse buckets merge their
  // underlying letters in reverse order, and their central corrections enter
  // inverted.
  std::vector<SqmGenerator> runs[4];
  for (const SqmLetter& l : body) runs[bucket(l)].push_back(l.gen);
  std::reverse(runs[0].begin(), runs[0].end());
  std::reverse(runs[1].begin(), runs[1].end());

  TwObject empty;
  SCSpan f1 = runs[0].empty() ? sc_identity(l0, empty) : merge_run(ctx, runs[0], led, -1).span;
  TwObject c1 = runs[1].empty() ? empty : merge_run(ctx, runs[1], led, -1).obj;
  TwObject d1 = runs[2].empty() ? empty : merge_run(ctx, runs[2], led, 1).obj;
  SCSpan g1 = runs[3].empty() ? sc_identity(l0, empty) : merge_run(ctx, runs[3], led, 1).span;

  // Stabilize the two object slots onto a common first face: V = C | s0(Z'),
  // W = s0(Z) | D with Z = face0(C), Z' = face0(D).  The appended degenerate
  // letters are trivial, so each replacement costs only its merge atoms.
  TwObject zc = face0(ctx, c1), zd = face0(ctx, d1);
  TwObject v1 = c1, w1 = tw_coproduct(degen0(ctx, zc), d1);
  if (!zd.parts.empty()) {
    if (c1.parts.empty()) {
      v1 = degen0(ctx, zd);
    } else {
      v1 = merge_run(ctx, {make_obj1(ctx, c1), make_obj1(ctx, degen0(ctx, zd))}, led, -1).obj;
    }
  }
  if (zc.parts.empty()) {
    w1 = d1;
  } else if (!d1.parts.empty()) {
    w1 = merge_run(ctx, {make_obj1(ctx, degen0(ctx, zc)), make_obj1(ctx, d1)}, led, 1).obj;
  }
  if (!(face0(ctx, v1) == face0(ctx, w1)))
    throw internal_error("stabilized objects disagree on their first face");

  // Pad the equivalences onto the common frame: f by the g-side target and
  // the face of V, g by the f-side target in front and the face of W behind.
  const TwObject b0 = f1.dst, fo = g1.dst;
  auto pad_weq = [&](const SCSpan& base, const TwObject& prefix, const TwObject& suffix,
                     int sign) {
    std::vector<SqmGenerator> run;
    if (!prefix.parts.empty()) run.push_back(make_weq0(ctx, sc_identity(l0, prefix)));
    run.push_back(make_weq0(ctx, base));
    if (!suffix.parts.empty()) run.push_back(make_weq0(ctx, sc_identity(l0, suffix)));
    return run.size() == 1 ? run.front().span : merge_run(ctx, run, led, sign).span;
  };
  SCSpan fhat = pad_weq(f1, empty, tw_coproduct(fo, face1(ctx, v1)), -1);
  SCSpan ghat = pad_weq(g1, b0, face1(ctx, w1), 1);

  // Match the boundary equation by the lexicographically least permutation
  // of equal parts.
  const TwObject& s = fhat.src;  // A0 | F0 | d1 V
  const TwObject& t = ghat.src;  // B0 | E0 | d1 W
  std::vector<int> perm(static_cast<size_t>(s.size()), -1);
  std::vector<char> used(static_cast<size_t>(t.size()), 0);
  for (int i = 0; i < s.size(); ++i) {
    int pick = -1;
    for (int j = 0; j < t.size(); ++j) {
      if (!used[static_cast<size_t>(j)] && t.parts[static_cast<size_t>(j)] == s.parts[static_cast<size_t>(i)]) {
        pick = j;
        break;
      }
    }
    if (pick < 0) throw structural_error("input not in the kernel of the boundary");
    used[static_cast<size_t>(pick)] = 1;
    perm[static_cast<size_t>(i)] = pick;
  }
  SCSpan pi = sc_permutation(l0, s, perm);
  if (!(pi.dst == t)) throw internal_error("parts permutation misses the target tuple");
  SCSpan gfin = sc_compose(l0, pi, ghat);

  // The inverted permutation letter decomposes into adjacent transpositions,
  // each a swap atom of the two parts exchanged.
  {
    std::vector<int> cur = s.parts, dest = perm;
    for (bool moved = true; moved;) {
      moved = false;
      for (size_t p = 0; p + 1 < dest.size(); ++p) {
        if (dest[p] <= dest[p + 1]) continue;
        led.add_atom(cur[p + 1], cur[p], Int(-1));
        std::swap(cur[p], cur[p + 1]);
        std::swap(dest[p], dest[p + 1]);
        moved = true;
      }
    }
  }

  if (!led.skew_zero())
    throw internal_error("central bookkeeping does not lie in the kernel of the boundary");

  K1Pair out = make_k1_pair(ctx, make_curly(ctx, fhat, tw_coproduct(b0, fo), v1),
                            make_curly(ctx, gfin, tw_coproduct(b0, fo), w1));

  // Realize the leftover self-swap bits as pairs of the form
  // {swap : c|c ~> c|c, identity : c|c ~> c|c} and absorb them.
  for (int o = 0; o < l0.num_objects(); ++o) {
    if (!led.diag[static_cast<size_t>(o)]) continue;
    TwObject cc;
    cc.parts = {o, o};
    K1Pair alpha = make_k1_pair(ctx, make_curly(ctx, tau_generator(ctx, o, o).span, cc, empty),
                                make_curly(ctx, sc_identity(l0, cc), cc, empty));
    out = curly_product(ctx, out, alpha).coproduct;
    led.diag[static_cast<size_t>(o)] = 0;
  }

  if (!(shadow(ctx, pair_word(ctx, out)) == shadow(ctx, w)))
    throw internal_error("canonical representative does not match the input's shadow");
  return out;
}

// ---------------------------------------------------------------------------
// Relative representatives and their boundary.
// ---------------------------------------------------------------------------

RelativeK1Quad relative_k1(const SqmContext& ctx, const K1Pair& p) {
  if (!ctx.siteD || !ctx.funcD || !ctx.embedD)
    throw structural_error(
        "relative representative requires a quotient context over an inclusion of a "
        "subassembler");
  const Site& l0 = ctx.l0();
  const Site& sd = *ctx.siteD;
  const CompiledFunctor& F = *ctx.funcD;

  // The subsite functor must be an inclusion: injective and collapse-free on
  // objects and injective on morphisms.
  {
    std::set<int> seen_obj;
    for (int o = 0; o < sd.num_objects(); ++o) {
      if (o == sd.initial()) continue;
      int im = F.apply_obj(o);
      if (im == l0.initial() || !seen_obj.insert(im).second)
        throw structural_error(
            "relative representative requires the subsite functor to be an inclusion of a "
            "subassembler");
    }
    std::set<int> seen_mor;
    for (int m = 0; m < sd.num_morphisms(); ++m)
      if (!seen_mor.insert(F.apply_mor(m)).second)
        throw structural_error(
            "relative representative requires the subsite functor to be an inclusion of a "
            "subassembler");
  }

  // Subsite preimages of level-1 parts (-1 on the base copy).
  std::vector<int> pre(static_cast<size_t>(ctx.l1().num_objects()), -1);
  for (int o = 0; o < sd.num_objects(); ++o) {
    if (o == sd.initial()) continue;
    pre[static_cast<size_t>(ctx.embedD->apply_obj(o))] = o;
  }

  const TwObject &v = p.first.v1, &wo = p.second.v1;
  if (v.size() != wo.size())
    throw internal_error("paired level-1 objects differ in length over an inclusion");
  const int n = v.size();

  // Ranks: both parts in the base copy 0, mixed 1, both in the subsite 2.
  std::vector<int> rank(static_cast<size_t>(n), 1);
  TwObject quadC, quadD;
  for (int i = 0; i < n; ++i) {
    const int vp = v.parts[static_cast<size_t>(i)], wp = wo.parts[static_cast<size_t>(i)];
    if (ctx.levels.d0_1.apply_obj(vp) != ctx.levels.d0_1.apply_obj(wp))
      throw internal_error("paired level-1 parts disagree on their first face");
    const bool vD = pre[static_cast<size_t>(vp)] >= 0, wD = pre[static_cast<size_t>(wp)] >= 0;
    if (vD == wD) {
      if (vp != wp) throw internal_error("matched same-copy parts differ over an inclusion");
      rank[static_cast<size_t>(i)] = vD ? 2 : 0;
    }
  }
  // Mixed positions: a subsite part in the first slot contributes to D, one
  // in the second slot to C, so that the first leg ends on B extended by the
  // image of C and the second on B extended by the image of D.
  for (int i = 0; i < n; ++i) {
    if (rank[static_cast<size_t>(i)] != 1) continue;
    if (pre[static_cast<size_t>(v.parts[static_cast<size_t>(i)])] >= 0)
      quadD.parts.push_back(pre[static_cast<size_t>(v.parts[static_cast<size_t>(i)])]);
    else
      quadC.parts.push_back(pre[static_cast<size_t>(wo.parts[static_cast<size_t>(i)])]);
  }

  // Stable reorder to [base-base][mixed][subsite-subsite] on both sides.
  std::vector<int> perm(static_cast<size_t>(n), -1);
  {
    int next = 0;
    for (int r = 0; r <= 2; ++r)
      for (int i = 0; i < n; ++i)
        if (rank[static_cast<size_t>(i)] == r) perm[static_cast<size_t>(i)] = next++;
  }

  auto stripped_leg = [&](const CurlyElement& c, const TwObject& v1) {
    SCSpan phi = sc_permutation(ctx.l1(), v1, perm);
    SCSpan dphi = span_apply(ctx.levels.d1_1, phi);
    SCSpan pad = sc_coproduct(l0, sc_identity(l0, c.b0), dphi);
    return canonical_weq(l0, sc_compose(l0, c.f, pad), "stripped relative leg");
  };
  SCSpan fq = stripped_leg(p.first, v);
  SCSpan gq = stripped_leg(p.second, wo);

  RelativeK1Quad q;
  q.A = p.first.f.src;
  q.B = p.first.b0;
  for (int i = 0; i < n; ++i)
    if (rank[static_cast<size_t>(i)] == 0)
      q.B.parts.push_back(ctx.levels.d1_1.apply_obj(v.parts[static_cast<size_t>(i)]));
  q.C = quadC;
  q.D = quadD;
  q.f = fq;
  q.g = gq;

  if (!(q.f.dst == tw_coproduct(q.B, obj_apply(F, q.C))) ||
      !(q.g.dst == tw_coproduct(q.B, obj_apply(F, q.D))))
    throw internal_error("stripped legs do not end on the expected frames");
  return q;
}

SqmWord quad_word(const SqmContext& ctx, const RelativeK1Quad& q) {
  if (!ctx.embedD || !ctx.funcD) throw structural_error("quad words require a quotient context");
  // The first slot pairs the degenerate image of C with the subsite copy of
  // D, the second the subsite copy of C with the degenerate image of D; both
  // slots then share their first face literally.
  TwObject v1 = obj_apply(ctx.levels.s0_0, obj_apply(*ctx.funcD, q.C));
  v1 = tw_coproduct(v1, obj_apply(*ctx.embedD, q.D));
  TwObject w1 = obj_apply(*ctx.embedD, q.C);
  w1 = tw_coproduct(w1, obj_apply(ctx.levels.s0_0, obj_apply(*ctx.funcD, q.D)));
  K1Pair p = make_k1_pair(ctx, make_curly(ctx, q.f, q.B, v1), make_curly(ctx, q.g, q.B, w1));
  return pair_word(ctx, p);
}

BoundaryClass boundary_k1(const RelativeK1Quad& q, const K0Presentation& k0d,
                          const Site& siteD) {
  std::vector<Int> d = k0_vector(k0d, siteD, q.D), c = k0_vector(k0d, siteD, q.C);
  BoundaryClass out;
  out.generator_coords.resize(d.size());
  for (size_t i = 0; i < d.size(); ++i) out.generator_coords[i] = d[i] - c[i];
  out.reduced = k0d.group.reduce(out.generator_coords);
  return out;
}

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

nlohmann::json k0_to_json(const K0Presentation& p) {
  nlohmann::json j;
  j["group"] = p.pretty();
  j["generators"] = p.generators;
  nlohmann::json rel = nlohmann::json::array();
  for (const auto& row : p.relations) {
    nlohmann::json r = nlohmann::json::array();
    for (const Int& x : row) r.push_back(x.str());
    rel.push_back(std::move(r));
  }
  j["relations"] = std::move(rel);
  nlohmann::json div = nlohmann::json::array();
  for (const Int& d : p.group.snf.divisors) div.push_back(d.str());
  j["snf_diagonal"] = std::move(div);
  nlohmann::json basis = nlohmann::json::array();
  for (int r = 0; r < p.group.n; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < p.group.n; ++c) row.push_back(p.group.snf.V.at(c, r).str());
    basis.push_back(std::move(row));
  }
  j["to_canonical"] = std::move(basis);
  return j;
}

nlohmann::json pair_to_json(const SqmContext& ctx, const K1Pair& p) {
  auto leg = [&](const CurlyElement& c) {
    nlohmann::json j;
    j["f"] = span_to_json(ctx.l0(), c.f);
    j["v1"] = tw_object_to_json(ctx.l1(), c.v1);
    return j;
  };
  nlohmann::json j;
  j["b0"] = tw_object_to_json(ctx.l0(), p.first.b0);
  j["first"] = leg(p.first);
  j["second"] = leg(p.second);
  return j;
}

K1Pair parse_pair_json(const SqmContext& ctx, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("b0") || !j.contains("first") || !j.contains("second"))
    throw structural_error("pair file must hold b0, first and second");
  TwObject b0 = parse_tw_object_json(ctx.l0(), j.at("b0"));
  auto leg = [&](const nlohmann::json& je) {
    if (!je.is_object() || !je.contains("f") || !je.contains("v1"))
      throw structural_error("pair leg must hold f and v1");
    return make_curly(ctx, parse_span_json(ctx.l0(), je.at("f")), b0,
                      parse_tw_object_json(ctx.l1(), je.at("v1")));
  };
  return make_k1_pair(ctx, leg(j.at("first")), leg(j.at("second")));
}

nlohmann::json quad_to_json(const SqmContext& ctx, const RelativeK1Quad& q) {
  if (!ctx.siteD) throw structural_error("quads require a quotient context");
  nlohmann::json j;
  j["A"] = tw_object_to_json(ctx.l0(), q.A);
  j["B"] = tw_object_to_json(ctx.l0(), q.B);
  j["C"] = tw_object_to_json(*ctx.siteD, q.C);
  j["D"] = tw_object_to_json(*ctx.siteD, q.D);
  j["f"] = span_to_json(ctx.l0(), q.f);
  j["g"] = span_to_json(ctx.l0(), q.g);
  return j;
}

RelativeK1Quad parse_quad_json(const SqmContext& ctx, const nlohmann::json& j) {
  if (!ctx.siteD || !ctx.funcD) throw structural_error("quads require a quotient context");
  for (const char* k : {"A", "B", "C", "D", "f", "g"})
    if (!j.is_object() || !j.contains(k))
      throw structural_error("quad file must hold A, B, C, D, f and g");
  RelativeK1Quad q;
  q.A = parse_tw_object_json(ctx.l0(), j.at("A"));
  q.B = parse_tw_object_json(ctx.l0(), j.at("B"));
  q.C = parse_tw_object_json(*ctx.siteD, j.at("C"));
  q.D = parse_tw_object_json(*ctx.siteD, j.at("D"));
  q.f = canonical_weq(ctx.l0(), parse_span_json(ctx.l0(), j.at("f")), "quad leg f");
  q.g = canonical_weq(ctx.l0(), parse_span_json(ctx.l0(), j.at("g")), "quad leg g");
  if (!(q.f.src == q.A) || !(q.g.src == q.A))
    throw structural_error("quad legs must start at A");
  if (!(q.f.dst == tw_coproduct(q.B, obj_apply(*ctx.funcD, q.C))) ||
      !(q.g.dst == tw_coproduct(q.B, obj_apply(*ctx.funcD, q.D))))
    throw structural_error("quad legs must end on B extended by the matched subsite image");
  return q;
}

}  // namespace sck
