#include "sck/sqm.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "sck/error.hpp"

namespace sck {

namespace {

// ---------------------------------------------------------------------------
// Index helpers for the two triangular layouts used by the shadow:
//   pairs s <= t (residue, F2) and pairs s > t (commutator coordinates, Z).
// ---------------------------------------------------------------------------

int upper_index(int n0, int s, int t) {  // s <= t
  return s * n0 - (s * (s - 1)) / 2 + (t - s);
}
int upper_count(int n0) { return n0 * (n0 + 1) / 2; }
int lower_index(int s, int t) {  // s > t
  return (s * (s - 1)) / 2 + t;
}
int lower_count(int n0) { return n0 * (n0 - 1) / 2; }

std::vector<int> noninitial_objects(const Site& s) {
  std::vector<int> out;
  for (int o = 0; o < s.num_objects(); ++o)
    if (o != s.initial()) out.push_back(o);
  return out;
}

using Rho = std::vector<uint8_t>;

void rho_xor(Rho& a, const Rho& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

// Symmetric mod-2 pairing: on {s < t} the bit u_s v_t + u_t v_s, on {s, s}
// the bit u_s v_s.
Rho p2(int n0, const std::vector<Int>& u, const std::vector<Int>& v) {
  Rho r(upper_count(n0), 0);
  for (int s = 0; s < n0; ++s) {
    int us = static_cast<int>(u[s] % 2 != 0);
    if (!us) continue;
    for (int t = 0; t < n0; ++t) {
      int vt = static_cast<int>(v[t] % 2 != 0);
      if (!vt) continue;
      int a = std::min(s, t), b = std::max(s, t);
      r[upper_index(n0, a, b)] ^= 1;
    }
  }
  return r;
}

// Self-pairing of a multiset over distinct member pairs: on {s < t} the bit
// m_s m_t, on {s, s} the bit C(m_s, 2).
Rho phi2(int n0, const std::vector<Int>& counts) {
  Rho r(upper_count(n0), 0);
  for (int s = 0; s < n0; ++s) {
    if (counts[s] == 0) continue;
    Int choose2 = counts[s] * (counts[s] - 1) / 2;
    if (choose2 % 2 != 0) r[upper_index(n0, s, s)] ^= 1;
    for (int t = s + 1; t < n0; ++t) {
      if ((counts[s] % 2 != 0) && (counts[t] % 2 != 0)) r[upper_index(n0, s, t)] ^= 1;
    }
  }
  return r;
}

std::vector<Int> vsub(std::vector<Int> a, const std::vector<Int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
std::vector<Int> vadd(std::vector<Int> a, const std::vector<Int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

// ---------------------------------------------------------------------------
// Face/degeneracy helpers.
// ---------------------------------------------------------------------------

TwObject face0(const SqmContext& ctx, const TwObject& a) {
  return apply_functor(ctx.levels.d0_1, a);
}
TwObject face1(const SqmContext& ctx, const TwObject& a) {
  return apply_functor(ctx.levels.d1_1, a);
}
// Single level-1 part image under a face functor; the initial object when the
// part vanishes.
int face_part(const CompiledFunctor& f, int part) { return f.apply_obj(part); }

bool all_degenerate(const SqmContext& ctx, const TwObject& a) {
  for (int p : a.parts)
    if (!ctx.degenerate_l1[p]) return false;
  return true;
}

bool morphism_is_identity(const Site& site, int m) { return m == site.identity(site.src(m)); }

bool tw_morphism_is_identity(const Site& site, const TwMorphism& f) {
  if (!(f.src == f.dst)) return false;
  for (int i = 0; i < f.src.size(); ++i) {
    if (f.set_map[i] != i) return false;
    if (!morphism_is_identity(site, f.components[i])) return false;
  }
  return true;
}

bool span_is_identity(const Site& site, const SCSpan& s) {
  return s.src == s.dst && s.apex == s.dst && tw_morphism_is_identity(site, s.moveleg) &&
         tw_morphism_is_identity(site, s.subleg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Context.
// ---------------------------------------------------------------------------

std::vector<Int> SqmContext::vec0(const TwObject& a) const {
  std::vector<Int> v(n0(), 0);
  for (int p : a.parts) {
    int pos = s0_pos[p];
    if (pos < 0) throw internal_error("vec0: part is not a level-0 basis object");
    v[pos] += 1;
  }
  return v;
}

std::vector<Int> SqmContext::vec1(const TwObject& a) const {
  std::vector<Int> v(n1(), 0);
  for (int p : a.parts) {
    int pos = s1_pos[p];
    if (pos < 0) throw internal_error("vec1: part is not a level-1 basis object");
    v[pos] += 1;
  }
  return v;
}

namespace {

SqmContext build_context(SimplicialAssemblerLevels levels, std::shared_ptr<const Site> siteD,
                         std::optional<CompiledFunctor> funcD, std::optional<CompiledFunctor> embedD,
                         const std::vector<std::string>& declared_s0) {
  SqmContext ctx;
  ctx.levels = std::move(levels);
  ctx.siteD = std::move(siteD);
  ctx.funcD = std::move(funcD);
  ctx.embedD = std::move(embedD);
  const Site& l0 = ctx.l0();
  const Site& l1 = ctx.l1();

  ctx.s0_objs = noninitial_objects(l0);
  ctx.s1_objs = noninitial_objects(l1);
  ctx.s0_pos.assign(l0.num_objects(), -1);
  for (int i = 0; i < static_cast<int>(ctx.s0_objs.size()); ++i) ctx.s0_pos[ctx.s0_objs[i]] = i;
  ctx.s1_pos.assign(l1.num_objects(), -1);
  for (int i = 0; i < static_cast<int>(ctx.s1_objs.size()); ++i) ctx.s1_pos[ctx.s1_objs[i]] = i;

  if (!declared_s0.empty()) {
    std::set<std::string> got(declared_s0.begin(), declared_s0.end());
    if (got.size() != declared_s0.size())
      throw structural_error("part basis declaration repeats a name");
    std::set<std::string> want;
    for (int o : ctx.s0_objs) want.insert(l0.object_name(o));
    if (want != got)
      throw structural_error(
          "part basis declaration does not match the noninitial objects of the site");
  }

  ctx.degenerate_l1.assign(l1.num_objects(), 0);
  for (int o : ctx.s0_objs) {
    int img = ctx.levels.s0_0.apply_obj(o);
    if (img != l1.initial()) ctx.degenerate_l1[img] = 1;
  }

  const int n1 = ctx.n1();
  auto obj_vec = [&](int o) {
    std::vector<Int> v(n1, 0);
    if (o != l1.initial()) v[ctx.s1_pos[o]] += 1;
    return v;
  };

  std::vector<std::vector<Int>> rows;
  // Degenerate parts die in the content quotient.
  for (int o : ctx.s0_objs) rows.push_back(obj_vec(ctx.levels.s0_0.apply_obj(o)));
  // Face additivity over level-2 parts: middle face = outer faces.
  const Site& l2 = *ctx.levels.level2;
  for (int u = 0; u < l2.num_objects(); ++u) {
    if (u == l2.initial()) continue;
    auto row = obj_vec(ctx.levels.d1_2.apply_obj(u));
    row = vsub(std::move(row), obj_vec(ctx.levels.d0_2.apply_obj(u)));
    row = vsub(std::move(row), obj_vec(ctx.levels.d2_2.apply_obj(u)));
    rows.push_back(std::move(row));
  }
  // A part equals each of its pairwise-disjoint covering families.
  for (int x : ctx.s1_objs) {
    std::vector<int> cand;
    for (int m : l1.hom_into(x))
      if (l1.src(m) != l1.initial()) cand.push_back(m);
    int k = static_cast<int>(cand.size());
    if (k > 16) k = 16;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
      std::vector<int> fam;
      for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) fam.push_back(cand[i]);
      bool disjoint = true;
      for (std::size_t i = 0; i < fam.size() && disjoint; ++i)
        for (std::size_t j = i + 1; j < fam.size() && disjoint; ++j)
          if (!l1.are_disjoint(fam[i], fam[j])) disjoint = false;
      if (!disjoint || !l1.is_cover(x, fam)) continue;
      std::vector<Int> row(n1, 0);
      row[ctx.s1_pos[x]] += 1;
      for (int m : fam) row[ctx.s1_pos[l1.src(m)]] -= 1;
      if (std::any_of(row.begin(), row.end(), [](const Int& c) { return c != 0; }))
        rows.push_back(std::move(row));
    }
  }
  ctx.q1 = make_abgroup(n1, rows);
  return ctx;
}

}  // namespace

SqmContext make_sqm_context(const AssemblerSpec& constant_site,
                            const std::vector<std::string>& declared_s0) {
  return build_context(constant_simplicial(constant_site), nullptr, std::nullopt, std::nullopt,
                       declared_s0);
}

SqmContext make_sqm_context(const CofiberAssembler& cof,
                            const std::vector<std::string>& declared_s0) {
  return build_context(cof.levels, cof.siteD, cof.F, cof.embedD, declared_s0);
}

// ---------------------------------------------------------------------------
// Generators and words.
// ---------------------------------------------------------------------------

int generator_degree(const SqmGenerator& g) { return g.tag == GenTag::Obj0 ? 0 : 1; }

SqmGenerator make_obj0(const SqmContext& ctx, TwObject a) {
  validate_tw(ctx.l0(), a);
  SqmGenerator g;
  g.tag = GenTag::Obj0;
  g.obj = std::move(a);
  return g;
}

SqmGenerator make_obj1(const SqmContext& ctx, TwObject a) {
  validate_tw(ctx.l1(), a);
  SqmGenerator g;
  g.tag = GenTag::Obj1;
  g.obj = std::move(a);
  return g;
}

namespace {
SqmGenerator make_weq(const Site& site, GenTag tag, const SCSpan& s) {
  validate_span(site, s);
  SCClass cls = sc_classify(site, s);
  if (!cls.is_weak_equivalence)
    throw structural_error("weak-equivalence letter payload is not a weak equivalence");
  SqmGenerator g;
  g.tag = tag;
  g.span = *cls.canonical;
  return g;
}
}  // namespace

SqmGenerator make_weq0(const SqmContext& ctx, const SCSpan& s) {
  return make_weq(ctx.l0(), GenTag::Weq0, s);
}
SqmGenerator make_weq1(const SqmContext& ctx, const SCSpan& s) {
  return make_weq(ctx.l1(), GenTag::Weq1, s);
}

SqmGenerator make_cof(const SqmContext& ctx, const SCSpan& cofibration, const TwObject& quotient) {
  validate_span(ctx.l0(), cofibration);
  SCClass cls = sc_classify(ctx.l0(), cofibration);
  if (!cls.is_cofibration)
    throw structural_error("cofibration letter payload is not a cofibration");
  std::vector<char> hit(cofibration.dst.size(), 0);
  for (int i = 0; i < cofibration.apex.size(); ++i) hit[cofibration.moveleg.set_map[i]] = 1;
  TwObject comp;
  for (int j = 0; j < cofibration.dst.size(); ++j)
    if (!hit[j]) comp.parts.push_back(cofibration.dst.parts[j]);
  if (!(comp == quotient))
    throw structural_error(
        "cofibration quotient does not list the unimaged target parts in order");
  SqmGenerator g;
  g.tag = GenTag::Cof;
  g.span = cofibration;
  g.quot = quotient;
  return g;
}

namespace {
// General block swap  b | a  ~>  a | b  (either side may be empty, in which
// case the swap is an identity and has no letter).
SqmGenerator block_swap_generator(const SqmContext& ctx, const TwObject& a, const TwObject& b) {
  const Site& l0 = ctx.l0();
  SCSpan sp;
  sp.src = tw_coproduct(b, a);
  sp.dst = tw_coproduct(a, b);
  sp.apex = sp.dst;
  sp.moveleg = tw_identity(l0, sp.dst);
  sp.subleg.src = sp.dst;
  sp.subleg.dst = sp.src;
  const int p = a.size(), m = b.size();
  sp.subleg.set_map.resize(p + m);
  sp.subleg.components.resize(p + m);
  for (int i = 0; i < p; ++i) {
    sp.subleg.set_map[i] = m + i;
    sp.subleg.components[i] = l0.identity(a.parts[i]);
  }
  for (int j = 0; j < m; ++j) {
    sp.subleg.set_map[p + j] = j;
    sp.subleg.components[p + j] = l0.identity(b.parts[j]);
  }
  SqmGenerator g;
  g.tag = GenTag::Weq0;
  g.span = sp;
  return g;
}
}  // namespace

SqmGenerator tau_generator(const SqmContext& ctx, int s_obj, int t_obj) {
  const Site& l0 = ctx.l0();
  if (s_obj == l0.initial() || t_obj == l0.initial())
    throw structural_error("block swap over the initial object");
  TwObject a, b;
  a.parts = {s_obj};
  b.parts = {t_obj};
  return block_swap_generator(ctx, a, b);
}

SqmWord make_word(std::vector<SqmLetter> letters) {
  SqmWord w;
  if (letters.empty()) return w;
  w.degree = generator_degree(letters[0].gen);
  for (const auto& l : letters) {
    if (generator_degree(l.gen) != w.degree) throw structural_error("word mixes letter degrees");
    if (l.exp != 1 && l.exp != -1) throw structural_error("letter exponent must be +1 or -1");
  }
  w.letters = std::move(letters);
  return w;
}

SqmWord word_inverse(const SqmWord& w) {
  SqmWord out;
  out.degree = w.degree;
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
    out.letters.push_back({it->gen, -it->exp});
  return out;
}

SqmWord word_concat(const SqmWord& a, const SqmWord& b) {
  if (a.letters.empty()) return b;
  if (b.letters.empty()) return a;
  if (a.degree != b.degree) throw structural_error("cannot concatenate words of different degrees");
  SqmWord out = a;
  out.letters.insert(out.letters.end(), b.letters.begin(), b.letters.end());
  return out;
}

std::optional<std::pair<TwObject, TwObject>> is_block_swap(const SqmContext& ctx,
                                                           const SqmGenerator& g) {
  if (g.tag != GenTag::Weq0) return std::nullopt;
  const Site& l0 = ctx.l0();
  const SCSpan& sp = g.span;
  if (!(sp.apex == sp.dst) || !tw_morphism_is_identity(l0, sp.moveleg)) return std::nullopt;
  const int n = sp.dst.size();
  for (int i = 0; i < n; ++i)
    if (!morphism_is_identity(l0, sp.subleg.components[i])) return std::nullopt;
  for (int p = 1; p < n; ++p) {
    const int m = n - p;
    bool ok = true;
    for (int i = 0; i < p && ok; ++i)
      if (sp.subleg.set_map[i] != m + i) ok = false;
    for (int j = 0; j < m && ok; ++j)
      if (sp.subleg.set_map[p + j] != j) ok = false;
    if (ok) {
      TwObject a, b;
      a.parts.assign(sp.dst.parts.begin(), sp.dst.parts.begin() + p);
      b.parts.assign(sp.dst.parts.begin() + p, sp.dst.parts.end());
      return std::make_pair(a, b);
    }
  }
  return std::nullopt;
}

std::optional<std::pair<int, int>> is_tau_atom(const SqmContext& ctx, const SqmGenerator& g) {
  auto bs = is_block_swap(ctx, g);
  if (!bs || bs->first.size() != 1 || bs->second.size() != 1) return std::nullopt;
  return std::make_pair(bs->first.parts[0], bs->second.parts[0]);
}

std::string word_to_string(const SqmContext& ctx, const SqmWord& w) {
  const Site& l0 = ctx.l0();
  const Site& l1 = ctx.l1();
  auto obj_str = [&](const Site& s, const TwObject& a) {
    if (a.parts.empty()) return std::string("()");
    std::string out;
    for (std::size_t i = 0; i < a.parts.size(); ++i) {
      if (i) out += "|";
      out += s.object_name(a.parts[i]);
    }
    return out;
  };
  std::string out;
  if (w.letters.empty()) return "1";
  for (const auto& l : w.letters) {
    switch (l.gen.tag) {
      case GenTag::Obj0: out += "[" + obj_str(l0, l.gen.obj) + "]"; break;
      case GenTag::Obj1: out += "[[" + obj_str(l1, l.gen.obj) + "]]"; break;
      case GenTag::Weq0:
        out += "[" + obj_str(l0, l.gen.span.src) + " ~> " + obj_str(l0, l.gen.span.dst) + "]";
        break;
      case GenTag::Weq1:
        out += "[[" + obj_str(l1, l.gen.span.src) + " ~> " + obj_str(l1, l.gen.span.dst) + "]]";
        break;
      case GenTag::Cof:
        out += "[" + obj_str(l0, l.gen.span.src) + " >-> " + obj_str(l0, l.gen.span.dst) + " // " +
               obj_str(l0, l.gen.quot) + "]";
        break;
    }
    if (l.exp < 0) out += "^-1";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Degree-0 values: the free nilpotency-class-2 group on the level-0 basis,
// with the triangular cocycle  omega(a, b)[s > t] = a_s b_t.
// ---------------------------------------------------------------------------

bool Nil2Value::is_zero() const {
  return std::all_of(a.begin(), a.end(), [](const Int& c) { return c == 0; }) &&
         std::all_of(kappa.begin(), kappa.end(), [](const Int& c) { return c == 0; });
}

namespace {

Nil2Value nil2_identity(int n0) {
  Nil2Value v;
  v.a.assign(n0, 0);
  v.kappa.assign(lower_count(n0), 0);
  return v;
}

void nil2_mul(int n0, Nil2Value& acc, const Nil2Value& b) {
  for (int s = 0; s < n0; ++s) {
    if (acc.a[s] == 0) continue;
    for (int t = 0; t < s; ++t) {
      if (b.a[t] == 0) continue;
      acc.kappa[lower_index(s, t)] += acc.a[s] * b.a[t];
    }
  }
  for (std::size_t i = 0; i < acc.kappa.size(); ++i) acc.kappa[i] += b.kappa[i];
  for (int s = 0; s < n0; ++s) acc.a[s] += b.a[s];
}

Nil2Value nil2_inverse(int n0, const Nil2Value& v) {
  Nil2Value out = nil2_identity(n0);
  for (int s = 0; s < n0; ++s) out.a[s] = -v.a[s];
  for (int s = 0; s < n0; ++s)
    for (int t = 0; t < s; ++t)
      out.kappa[lower_index(s, t)] = -v.kappa[lower_index(s, t)] + v.a[s] * v.a[t];
  return out;
}

}  // namespace

Nil2Value nil2_value(const SqmContext& ctx, const SqmWord& w) {
  if (w.degree != 0) throw structural_error("nil2_value expects a degree-0 word");
  const int n0 = ctx.n0();
  Nil2Value acc = nil2_identity(n0);
  for (const auto& l : w.letters) {
    if (l.gen.tag != GenTag::Obj0) throw structural_error("degree-0 word holds a non-Obj0 letter");
    Nil2Value val = nil2_identity(n0);
    for (int p : l.gen.obj.parts) {
      Nil2Value part = nil2_identity(n0);
      part.a[ctx.s0_pos[p]] = 1;
      nil2_mul(n0, val, part);
    }
    if (l.exp < 0) val = nil2_inverse(n0, val);
    nil2_mul(n0, acc, val);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// The shadow.
// ---------------------------------------------------------------------------

namespace {

struct LetterAb {
  std::vector<Int> mu;     // level-1 content over S1
  std::vector<Int> delta;  // boundary abelianization over S0
  Rho rho;                 // residue atom at exponent +1
};

LetterAb letter_ab(const SqmContext& ctx, const SqmGenerator& g) {
  const int n0 = ctx.n0();
  LetterAb out;
  out.mu.assign(ctx.n1(), 0);
  std::vector<Int> a, b;  // the letter's boundary reads [b]^-1 ... [a]
  switch (g.tag) {
    case GenTag::Obj0:
      throw internal_error("letter_ab: degree-0 letter");
    case GenTag::Obj1: {
      a = ctx.vec0(face1(ctx, g.obj));
      b = ctx.vec0(face0(ctx, g.obj));
      out.mu = ctx.vec1(g.obj);
      break;
    }
    case GenTag::Weq0: {
      a = ctx.vec0(g.span.src);
      b = ctx.vec0(g.span.dst);
      break;
    }
    case GenTag::Weq1: {
      a = ctx.vec0(face1(ctx, g.span.src));
      b = ctx.vec0(face0(ctx, g.span.dst));
      out.mu = ctx.vec1(g.span.dst);
      break;
    }
    case GenTag::Cof: {
      a = vadd(ctx.vec0(g.quot), ctx.vec0(g.span.src));
      b = ctx.vec0(g.span.dst);
      break;
    }
  }
  out.delta = vsub(a, b);
  out.rho = phi2(n0, a);
  rho_xor(out.rho, phi2(n0, b));
  rho_xor(out.rho, p2(n0, a, b));
  rho_xor(out.rho, p2(n0, b, b));
  return out;
}

}  // namespace

AbelianShadow shadow(const SqmContext& ctx, const SqmWord& w) {
  const int n0 = ctx.n0();
  AbelianShadow sh;
  sh.residue.assign(upper_count(n0), 0);
  if (w.degree == 0) {
    sh.content = ctx.q1.reduce(std::vector<Int>(ctx.n1(), 0));
    sh.boundary_value = nil2_value(ctx, w);
    return sh;
  }
  std::vector<Int> mu(ctx.n1(), 0);
  std::vector<Int> running_delta(n0, 0);
  for (const auto& l : w.letters) {
    LetterAb la = letter_ab(ctx, l.gen);
    Rho atom = la.rho;
    if (l.exp < 0) rho_xor(atom, p2(n0, la.delta, la.delta));
    rho_xor(sh.residue, p2(n0, running_delta, la.delta));
    rho_xor(sh.residue, atom);
    for (int i = 0; i < n0; ++i) running_delta[i] += (l.exp > 0 ? la.delta[i] : -la.delta[i]);
    for (int i = 0; i < ctx.n1(); ++i) mu[i] += (l.exp > 0 ? la.mu[i] : -la.mu[i]);
  }
  sh.content = ctx.q1.reduce(mu);
  sh.boundary_value = nil2_value(ctx, boundary(ctx, w));
  return sh;
}

// ---------------------------------------------------------------------------
// Structure maps.
// ---------------------------------------------------------------------------

SqmWord boundary(const SqmContext& ctx, const SqmWord& w) {
  if (w.degree != 1) throw structural_error("boundary expects a degree-1 word");
  SqmWord out;
  out.degree = 0;
  auto emit_obj = [&](const TwObject& a, int e) {
    if (e > 0) {
      for (int p : a.parts) {
        TwObject single;
        single.parts = {p};
        out.letters.push_back({make_obj0(ctx, single), 1});
      }
    } else {
      for (auto it = a.parts.rbegin(); it != a.parts.rend(); ++it) {
        TwObject single;
        single.parts = {*it};
        out.letters.push_back({make_obj0(ctx, single), -1});
      }
    }
  };
  for (const auto& l : w.letters) {
    std::vector<std::pair<TwObject, int>> seq;  // boundary of the letter at exponent +1
    switch (l.gen.tag) {
      case GenTag::Obj0: throw structural_error("degree-1 word holds a degree-0 letter");
      case GenTag::Obj1:
        seq = {{face0(ctx, l.gen.obj), -1}, {face1(ctx, l.gen.obj), 1}};
        break;
      case GenTag::Weq0:
        seq = {{l.gen.span.dst, -1}, {l.gen.span.src, 1}};
        break;
      case GenTag::Weq1:
        seq = {{face0(ctx, l.gen.span.dst), -1}, {face1(ctx, l.gen.span.src), 1}};
        break;
      case GenTag::Cof:
        seq = {{l.gen.span.dst, -1}, {l.gen.quot, 1}, {l.gen.span.src, 1}};
        break;
    }
    if (l.exp > 0) {
      for (const auto& [obj, e] : seq) emit_obj(obj, e);
    } else {
      for (auto it = seq.rbegin(); it != seq.rend(); ++it) emit_obj(it->first, -it->second);
    }
  }
  return out;
}

SqmWord bracket(const SqmContext& ctx, const SqmWord& u, const SqmWord& v) {
  if (u.degree != 0 || v.degree != 0) throw structural_error("bracket expects degree-0 words");
  const int n0 = ctx.n0();
  std::vector<Int> a = nil2_value(ctx, u).a;
  std::vector<Int> b = nil2_value(ctx, v).a;
  SqmWord out;
  out.degree = 1;
  for (int s = 0; s < n0; ++s) {
    if (a[s] == 0) continue;
    for (int t = 0; t < n0; ++t) {
      Int c = a[s] * b[t];
      if (c == 0) continue;
      const int e = c > 0 ? 1 : -1;
      SqmGenerator tau = tau_generator(ctx, ctx.s0_objs[s], ctx.s0_objs[t]);
      for (Int k = 0; k < (c > 0 ? c : -c); ++k) out.letters.push_back({tau, e});
    }
  }
  return out;
}

SqmWord act(const SqmContext& ctx, const SqmWord& w1, const SqmWord& w0) {
  if (w1.degree != 1 || w0.degree != 0)
    throw structural_error("act expects a degree-1 word and a degree-0 word");
  SqmWord out = word_concat(w1, bracket(ctx, w0, boundary(ctx, w1)));
  out.degree = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Rewriting.
// ---------------------------------------------------------------------------

namespace {

bool letter_is_tau(const SqmContext& ctx, const SqmLetter& l) {
  return is_tau_atom(ctx, l.gen).has_value();
}

bool erasable(const SqmContext& ctx, const SqmLetter& l) {
  switch (l.gen.tag) {
    case GenTag::Obj0: return l.gen.obj.parts.empty();
    case GenTag::Obj1: return all_degenerate(ctx, l.gen.obj);
    case GenTag::Weq0: return span_is_identity(ctx.l0(), l.gen.span);
    case GenTag::Weq1:
      return span_is_identity(ctx.l1(), l.gen.span) && all_degenerate(ctx, l.gen.span.src);
    case GenTag::Cof:
      return l.gen.quot.parts.empty() && l.gen.span.src == l.gen.span.dst &&
             sc_equivalent(ctx.l0(), l.gen.span, sc_identity(ctx.l0(), l.gen.span.src));
  }
  return false;
}

// Identity-prefix length of a canonical level-0 weak equivalence: the largest
// k such that the first k source and target parts agree and map identically,
// with the rest of the span staying inside the remainder.
int weq0_identity_prefix(const SqmContext& ctx, const SCSpan& sp) {
  const Site& l0 = ctx.l0();
  const int n = std::min(sp.src.size(), sp.dst.size());
  int k = 0;
  while (k < n && sp.dst.parts[k] == sp.src.parts[k] && sp.subleg.set_map[k] == k &&
         morphism_is_identity(l0, sp.subleg.components[k]))
    ++k;
  for (; k > 0; --k) {
    bool closed = true;
    for (int j = k; j < sp.dst.size() && closed; ++j)
      if (sp.subleg.set_map[j] < k) closed = false;
    if (closed) break;
  }
  return k;
}

SCSpan weq0_strip_prefix(const SqmContext& ctx, const SCSpan& sp, int k) {
  SCSpan out;
  out.src.parts.assign(sp.src.parts.begin() + k, sp.src.parts.end());
  out.dst.parts.assign(sp.dst.parts.begin() + k, sp.dst.parts.end());
  out.apex = out.dst;
  out.moveleg = tw_identity(ctx.l0(), out.dst);
  out.subleg.src = out.dst;
  out.subleg.dst = out.src;
  for (int j = k; j < sp.dst.size(); ++j) {
    out.subleg.set_map.push_back(sp.subleg.set_map[j] - k);
    out.subleg.components.push_back(sp.subleg.components[j]);
  }
  return out;
}

void emit_tau(const SqmContext& ctx, std::vector<SqmLetter>& into, int s_obj, int t_obj, int e) {
  if (s_obj == ctx.l0().initial() || t_obj == ctx.l0().initial()) return;
  into.push_back({tau_generator(ctx, s_obj, t_obj), e});
}

// Pull every degenerate part out of a level-1 object letter.  Degenerate
// parts bubble to the front through adjacent part swaps; each swap trades the
// letter for a conjugated one between two central swap atoms, and the
// all-degenerate prefix then drops freely.  Returns the replacement letters.
std::vector<SqmLetter> extract_degenerate_parts(const SqmContext& ctx, const SqmLetter& l) {
  std::vector<int> seq = l.gen.obj.parts;
  std::vector<SqmLetter> left, right;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      if (!ctx.degenerate_l1[seq[k]] && ctx.degenerate_l1[seq[k + 1]]) {
        const int p = seq[k], q = seq[k + 1];
        // [.. p q ..] = [swap(d0 q, d0 p)]^-1 [.. q p ..] [swap(d1 q, d1 p)]
        emit_tau(ctx, left, face_part(ctx.levels.d0_1, q), face_part(ctx.levels.d0_1, p), -1);
        std::vector<SqmLetter> r;
        emit_tau(ctx, r, face_part(ctx.levels.d1_1, q), face_part(ctx.levels.d1_1, p), 1);
        right.insert(right.begin(), r.begin(), r.end());
        std::swap(seq[k], seq[k + 1]);
        moved = true;
        break;
      }
    }
  }
  TwObject stripped;
  for (int p : seq)
    if (!ctx.degenerate_l1[p]) stripped.parts.push_back(p);
  SqmLetter core{make_obj1(ctx, stripped), 1};
  std::vector<SqmLetter> out;
  if (l.exp > 0) {
    out = left;
    out.push_back(core);
    out.insert(out.end(), right.begin(), right.end());
  } else {
    for (auto it = right.rbegin(); it != right.rend(); ++it) out.push_back({it->gen, -it->exp});
    out.push_back({core.gen, -1});
    for (auto it = left.rbegin(); it != left.rend(); ++it) out.push_back({it->gen, -it->exp});
  }
  return out;
}

// Replacement letters for merging two adjacent same-sign letters, together
// with the central swap atoms the merge emits.
std::vector<SqmLetter> merge_obj1(const SqmContext& ctx, const SqmLetter& x, const SqmLetter& y) {
  // [A][B] = [A|B] swap(d0 B, d0 A) swap(d1 A, d0 B), swaps emitted atomwise.
  const TwObject &A = x.gen.obj, &B = y.gen.obj;
  auto swap_letters = [&](const TwObject& u, const TwObject& v, int e) {
    std::vector<SqmLetter> out;
    for (int pu : u.parts)
      for (int pv : v.parts) emit_tau(ctx, out, pu, pv, e);
    return out;
  };
  std::vector<SqmLetter> out;
  if (x.exp > 0) {
    out.push_back({make_obj1(ctx, tw_coproduct(A, B)), 1});
    auto t1 = swap_letters(face0(ctx, B), face0(ctx, A), 1);
    auto t2 = swap_letters(face1(ctx, A), face0(ctx, B), 1);
    out.insert(out.end(), t1.begin(), t1.end());
    out.insert(out.end(), t2.begin(), t2.end());
  } else {
    // [A]^-1 [B]^-1 = ([B][A])^-1, with [B][A] merged as above.
    auto t1 = swap_letters(face0(ctx, A), face0(ctx, B), -1);
    auto t2 = swap_letters(face1(ctx, B), face0(ctx, A), -1);
    out.insert(out.end(), t1.begin(), t1.end());
    out.insert(out.end(), t2.begin(), t2.end());
    out.push_back({make_obj1(ctx, tw_coproduct(B, A)), -1});
  }
  return out;
}

std::vector<SqmLetter> merge_weq0(const SqmContext& ctx, const SqmLetter& x, const SqmLetter& y) {
  // [A ~> B][C ~> D] = [A|C ~> B|D] swap(D, B) swap(A, D), swaps atomwise.
  auto swap_letters = [&](const TwObject& u, const TwObject& v, int e) {
    std::vector<SqmLetter> out;
    for (int pu : u.parts)
      for (int pv : v.parts) emit_tau(ctx, out, pu, pv, e);
    return out;
  };
  std::vector<SqmLetter> out;
  if (x.exp > 0) {
    const SCSpan &f = x.gen.span, &g = y.gen.span;
    out.push_back({make_weq0(ctx, sc_coproduct(ctx.l0(), f, g)), 1});
    auto t1 = swap_letters(g.dst, f.dst, 1);
    auto t2 = swap_letters(f.src, g.dst, 1);
    out.insert(out.end(), t1.begin(), t1.end());
    out.insert(out.end(), t2.begin(), t2.end());
  } else {
    // [f]^-1 [g]^-1 = ([g][f])^-1
    const SCSpan &g = y.gen.span, &f = x.gen.span;
    auto t1 = swap_letters(f.dst, g.dst, -1);
    auto t2 = swap_letters(g.src, f.dst, -1);
    out.insert(out.end(), t1.begin(), t1.end());
    out.insert(out.end(), t2.begin(), t2.end());
    out.push_back({make_weq0(ctx, sc_coproduct(ctx.l0(), g, f)), -1});
  }
  return out;
}

struct TauKey {
  int s, t, e;
  bool operator<(const TauKey& o) const {
    if (s != o.s) return s < o.s;
    if (t != o.t) return t < o.t;
    return e < o.e;  // +(-1=false) ... exponent +1 sorts before -1
  }
};

TauKey tau_key(const SqmContext& ctx, const SqmLetter& l) {
  auto st = *is_tau_atom(ctx, l.gen);
  return TauKey{st.first, st.second, l.exp > 0 ? 0 : 1};
}

// Lexicographic termination measure; every rewrite step must strictly
// decrease it.
std::vector<long long> rewrite_measure(const SqmContext& ctx, const std::vector<SqmLetter>& L) {
  long long degen_parts = 0, non_tau = 0, weq_src_size = 0, total = 0;
  std::vector<char> tau(L.size(), 0);
  for (std::size_t i = 0; i < L.size(); ++i) {
    const auto& l = L[i];
    ++total;
    if (l.gen.tag == GenTag::Obj1)
      for (int p : l.gen.obj.parts) degen_parts += ctx.degenerate_l1[p] ? 1 : 0;
    bool atom = letter_is_tau(ctx, l);
    tau[i] = atom ? 1 : 0;
    if (!atom) {
      ++non_tau;
      if (l.gen.tag == GenTag::Weq0) weq_src_size += l.gen.span.src.size();
    }
  }
  long long displaced = 0;  // pairs: atom strictly left of a non-atom
  long long suffix_non_tau = 0;
  for (std::size_t i = L.size(); i-- > 0;) {
    if (tau[i])
      displaced += suffix_non_tau;
    else
      ++suffix_non_tau;
  }
  long long unflipped = 0, inversions = 0;
  std::vector<TauKey> keys;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!tau[i]) continue;
    auto st = *is_tau_atom(ctx, L[i].gen);
    if (st.first > st.second || (st.first == st.second && L[i].exp < 0)) ++unflipped;
    keys.push_back(tau_key(ctx, L[i]));
  }
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = i + 1; j < keys.size(); ++j)
      if (keys[j] < keys[i]) ++inversions;
  return {degen_parts, non_tau, weq_src_size, total, displaced, unflipped, inversions};
}

bool try_one_step(const SqmContext& ctx, std::vector<SqmLetter>& L, std::string& rule) {
  const auto splice = [&](std::size_t i, std::size_t count, std::vector<SqmLetter> repl) {
    L.erase(L.begin() + i, L.begin() + i + count);
    L.insert(L.begin() + i, repl.begin(), repl.end());
  };
  // Erase trivial letters.
  for (std::size_t i = 0; i < L.size(); ++i)
    if (erasable(ctx, L[i])) {
      rule = "erase trivial letter";
      splice(i, 1, {});
      return true;
    }
  // Cancel literal adjacent inverses.
  for (std::size_t i = 0; i + 1 < L.size(); ++i)
    if (L[i].gen == L[i + 1].gen && L[i].exp == -L[i + 1].exp) {
      rule = "cancel adjacent inverses";
      splice(i, 2, {});
      return true;
    }
  // Pull degenerate parts out of level-1 object letters.
  for (std::size_t i = 0; i < L.size(); ++i)
    if (L[i].gen.tag == GenTag::Obj1 && !all_degenerate(ctx, L[i].gen.obj)) {
      bool has_degen = false;
      for (int p : L[i].gen.obj.parts) has_degen = has_degen || ctx.degenerate_l1[p];
      if (has_degen) {
        rule = "extract degenerate parts";
        splice(i, 1, extract_degenerate_parts(ctx, L[i]));
        return true;
      }
    }
  // Strip identity prefixes from level-0 weak equivalences.
  for (std::size_t i = 0; i < L.size(); ++i)
    if (L[i].gen.tag == GenTag::Weq0) {
      int k = weq0_identity_prefix(ctx, L[i].gen.span);
      if (k > 0) {
        rule = "strip identity prefix";
        SqmGenerator g = make_weq0(ctx, weq0_strip_prefix(ctx, L[i].gen.span, k));
        splice(i, 1, {{g, L[i].exp}});
        return true;
      }
    }
  // Expand multi-part block swaps into atoms.
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (letter_is_tau(ctx, L[i])) continue;
    auto bs = is_block_swap(ctx, L[i].gen);
    if (bs) {
      rule = "expand block swap";
      std::vector<SqmLetter> repl;
      for (int pa : bs->first.parts)
        for (int pb : bs->second.parts) emit_tau(ctx, repl, pa, pb, L[i].exp);
      splice(i, 1, repl);
      return true;
    }
  }
  // Flip atoms into canonical orientation.
  for (std::size_t i = 0; i < L.size(); ++i) {
    auto st = is_tau_atom(ctx, L[i].gen);
    if (!st) continue;
    if (st->first > st->second) {
      rule = "flip swap atom";
      splice(i, 1, {{tau_generator(ctx, st->second, st->first), -L[i].exp}});
      return true;
    }
    if (st->first == st->second && L[i].exp < 0) {
      rule = "flip self-swap exponent";
      splice(i, 1, {{L[i].gen, 1}});
      return true;
    }
  }
  // Move atoms (central) to the right of everything else.
  for (std::size_t i = 0; i + 1 < L.size(); ++i)
    if (letter_is_tau(ctx, L[i]) && !letter_is_tau(ctx, L[i + 1])) {
      rule = "commute swap atom right";
      std::swap(L[i], L[i + 1]);
      return true;
    }
  // Sort the atom tail.
  for (std::size_t i = 0; i + 1 < L.size(); ++i)
    if (letter_is_tau(ctx, L[i]) && letter_is_tau(ctx, L[i + 1]) &&
        tau_key(ctx, L[i + 1]) < tau_key(ctx, L[i])) {
      rule = "sort swap atoms";
      std::swap(L[i], L[i + 1]);
      return true;
    }
  // Cancel equal self-swap pairs (each has order two).
  for (std::size_t i = 0; i + 1 < L.size(); ++i) {
    auto s1 = is_tau_atom(ctx, L[i].gen), s2 = is_tau_atom(ctx, L[i + 1].gen);
    if (s1 && s2 && *s1 == *s2 && s1->first == s1->second && L[i].exp > 0 && L[i + 1].exp > 0) {
      rule = "cancel self-swap pair";
      splice(i, 2, {});
      return true;
    }
  }
  // Merge adjacent same-sign letters of like kind.
  for (std::size_t i = 0; i + 1 < L.size(); ++i) {
    if (L[i].exp != L[i + 1].exp) continue;
    if (L[i].gen.tag == GenTag::Obj1 && L[i + 1].gen.tag == GenTag::Obj1) {
      rule = "merge object letters";
      splice(i, 2, merge_obj1(ctx, L[i], L[i + 1]));
      return true;
    }
    if (L[i].gen.tag == GenTag::Weq0 && L[i + 1].gen.tag == GenTag::Weq0 &&
        !letter_is_tau(ctx, L[i]) && !letter_is_tau(ctx, L[i + 1])) {
      rule = "merge weak-equivalence letters";
      splice(i, 2, merge_weq0(ctx, L[i], L[i + 1]));
      return true;
    }
  }
  return false;
}

SqmWord normalize_degree0(const SqmContext& ctx, const SqmWord& w) {
  Nil2Value target = nil2_value(ctx, w);
  std::vector<SqmLetter> L = w.letters;
  for (long long step = 0;; ++step) {
    if (step > 200000) throw internal_error("degree-0 rewrite failed to terminate");
    bool fired = false;
    for (std::size_t i = 0; i < L.size() && !fired; ++i) {
      if (L[i].gen.obj.parts.empty()) {
        L.erase(L.begin() + i);
        fired = true;
      } else if (L[i].gen.obj.size() > 1) {
        std::vector<SqmLetter> repl;
        const auto& parts = L[i].gen.obj.parts;
        if (L[i].exp > 0) {
          for (int p : parts) repl.push_back({make_obj0(ctx, TwObject{{p}}), 1});
        } else {
          for (auto it = parts.rbegin(); it != parts.rend(); ++it)
            repl.push_back({make_obj0(ctx, TwObject{{*it}}), -1});
        }
        L.erase(L.begin() + i);
        L.insert(L.begin() + i, repl.begin(), repl.end());
        fired = true;
      }
    }
    if (!fired)
      for (std::size_t i = 0; i + 1 < L.size() && !fired; ++i)
        if (L[i].gen == L[i + 1].gen && L[i].exp == -L[i + 1].exp) {
          L.erase(L.begin() + i, L.begin() + i + 2);
          fired = true;
        }
    if (!fired) break;
    SqmWord cur;
    cur.degree = 0;
    cur.letters = L;
    if (!(nil2_value(ctx, cur) == target))
      throw internal_error("degree-0 rewrite step changed the word value");
  }
  SqmWord out;
  out.degree = 0;
  out.letters = std::move(L);
  return out;
}

}  // namespace

SqmWord normalize(const SqmContext& ctx, const SqmWord& w) {
  if (w.degree == 0) return normalize_degree0(ctx, w);
  AbelianShadow target = shadow(ctx, w);
  std::vector<SqmLetter> L = w.letters;
  std::vector<long long> prev = rewrite_measure(ctx, L);
  std::string rule;
  for (long long step = 0;; ++step) {
    if (step > 200000) throw internal_error("rewrite failed to terminate within the step budget");
    if (!try_one_step(ctx, L, rule)) break;
    std::vector<long long> now = rewrite_measure(ctx, L);
    if (!(now < prev))
      throw internal_error("rewrite step failed to decrease the termination measure: " + rule);
    prev = std::move(now);
    SqmWord cur;
    cur.degree = 1;
    cur.letters = L;
    if (!(shadow(ctx, cur) == target))
      throw internal_error("rewrite step changed the word invariant: " + rule);
  }
  SqmWord out;
  out.degree = 1;
  out.letters = std::move(L);
  return out;
}

SqmEq word_equal(const SqmContext& ctx, const SqmWord& a, const SqmWord& b) {
  if (a.degree != b.degree) throw structural_error("cannot compare words of different degrees");
  if (a.degree == 0)
    return nil2_value(ctx, a) == nil2_value(ctx, b) ? SqmEq::Equal : SqmEq::Different;
  if (normalize(ctx, a) == normalize(ctx, b)) return SqmEq::Equal;
  if (!(shadow(ctx, a) == shadow(ctx, b))) return SqmEq::Different;
  return SqmEq::Unknown;
}

std::vector<SqmLetter> merge_same_sign(const SqmContext& ctx, const SqmLetter& x,
                                       const SqmLetter& y) {
  if (x.gen.tag != y.gen.tag || x.exp != y.exp)
    throw structural_error("can only merge letters of the same kind and sign");
  if (x.gen.tag == GenTag::Obj1) return merge_obj1(ctx, x, y);
  if (x.gen.tag == GenTag::Weq0) return merge_weq0(ctx, x, y);
  throw structural_error("can only merge level-1 object or level-0 equivalence letters");
}

// ---------------------------------------------------------------------------
// Splittings and translation.
// ---------------------------------------------------------------------------

SCSpan canonical_splitting(const SqmContext& ctx, const SCSpan& cofibration,
                           const TwObject& quotient) {
  const Site& l0 = ctx.l0();
  SqmGenerator checked = make_cof(ctx, cofibration, quotient);  // validates shape
  const SCSpan& c = checked.span;
  SCSpan a;
  a.src = tw_coproduct(quotient, c.src);
  a.dst = c.dst;
  a.apex = c.dst;
  a.moveleg = tw_identity(l0, c.dst);
  a.subleg.src = c.dst;
  a.subleg.dst = a.src;
  a.subleg.set_map.assign(c.dst.size(), -1);
  a.subleg.components.assign(c.dst.size(), -1);
  std::vector<int> from_apex(c.dst.size(), -1);
  for (int i = 0; i < c.apex.size(); ++i) from_apex[c.moveleg.set_map[i]] = i;
  int r = 0;
  for (int j = 0; j < c.dst.size(); ++j) {
    if (from_apex[j] >= 0) {
      const int i = from_apex[j];
      a.subleg.set_map[j] = quotient.size() + c.subleg.set_map[i];
      a.subleg.components[j] = l0.compose(c.subleg.components[i], l0.inverse(c.moveleg.components[i]));
    } else {
      a.subleg.set_map[j] = r;
      a.subleg.components[j] = l0.identity(c.dst.parts[j]);
      ++r;
    }
  }
  return make_weq0(ctx, a).span;
}

void check_splitting(const SqmContext& ctx, const CofSplitting& s) {
  const Site& l0 = ctx.l0();
  SqmGenerator cof = make_cof(ctx, s.cofibration, s.quotient);
  SqmGenerator alpha = make_weq0(ctx, s.alpha);
  const TwObject qa = tw_coproduct(s.quotient, s.cofibration.src);
  if (!(alpha.span.src == qa) || !(alpha.span.dst == s.cofibration.dst))
    throw structural_error("splitting endpoints do not match the cofibration");
  // Triangle 1: including the subobject and then splitting recovers the
  // cofibration.
  std::vector<int> tail(s.cofibration.src.size());
  std::iota(tail.begin(), tail.end(), s.quotient.size());
  SCSpan incl = sc_part_inclusion(l0, qa, tail);
  SCSpan t1 = sc_compose(l0, incl, alpha.span);
  if (!sc_equivalent(l0, t1, s.cofibration))
    throw axiom_error("splitting triangle failed: inclusion then splitting is not the cofibration");
  // Triangle 2: splitting and then collapsing onto the quotient agrees with
  // collapsing directly.
  std::vector<char> hit(s.cofibration.dst.size(), 0);
  for (int i = 0; i < s.cofibration.apex.size(); ++i) hit[s.cofibration.moveleg.set_map[i]] = 1;
  std::vector<int> qpos;
  for (int j = 0; j < s.cofibration.dst.size(); ++j)
    if (!hit[j]) qpos.push_back(j);
  SCSpan collapse_b = sc_collapse(l0, s.cofibration.dst, qpos);
  std::vector<int> head(s.quotient.size());
  std::iota(head.begin(), head.end(), 0);
  SCSpan collapse_qa = sc_collapse(l0, qa, head);
  SCSpan t2 = sc_compose(l0, alpha.span, collapse_b);
  if (!sc_equivalent(l0, t2, collapse_qa))
    throw axiom_error("splitting triangle failed: splitting then collapsing is not the collapse");
}

const CofSplitting* find_splitting(const SplittingTable& table, const SCSpan& cofibration,
                                   const TwObject& quotient) {
  for (const auto& e : table.entries)
    if (e.cofibration == cofibration && e.quotient == quotient) return &e;
  return nullptr;
}

namespace {

// The induced map of quotients for a composable pair of cofibrations
// A >-> B >-> C: the part of the second span sitting over the first quotient.
SCSpan induced_quotient_cof(const SqmContext& ctx, const SCSpan& c1, const TwObject& q1,
                            const SCSpan& c2, const TwObject& q2) {
  const Site& l0 = ctx.l0();
  std::vector<char> hit1(c1.dst.size(), 0);
  for (int i = 0; i < c1.apex.size(); ++i) hit1[c1.moveleg.set_map[i]] = 1;
  std::vector<int> q1pos;  // B positions of the first quotient
  for (int j = 0; j < c1.dst.size(); ++j)
    if (!hit1[j]) q1pos.push_back(j);
  // C positions of the composite image: second images of first-imaged B parts.
  SCSpan comp = sc_compose(l0, c1, c2);
  std::vector<char> hitc(c2.dst.size(), 0);
  for (int i = 0; i < comp.apex.size(); ++i) hitc[comp.moveleg.set_map[i]] = 1;
  std::vector<int> q2pos;
  for (int j = 0; j < c2.dst.size(); ++j)
    if (!hitc[j]) q2pos.push_back(j);
  std::vector<int> b_to_q1(c1.dst.size(), -1), c_to_q2(c2.dst.size(), -1);
  for (std::size_t k = 0; k < q1pos.size(); ++k) b_to_q1[q1pos[k]] = static_cast<int>(k);
  for (std::size_t k = 0; k < q2pos.size(); ++k) c_to_q2[q2pos[k]] = static_cast<int>(k);
  SCSpan out;
  out.src = q1;
  out.dst = q2;
  for (int i = 0; i < c2.apex.size(); ++i) {
    const int bpos = c2.subleg.set_map[i];
    if (b_to_q1[bpos] < 0) continue;  // sits over the image of A
    out.apex.parts.push_back(c2.apex.parts[i]);
    out.subleg.set_map.push_back(b_to_q1[bpos]);
    out.subleg.components.push_back(c2.subleg.components[i]);
    const int cpos = c2.moveleg.set_map[i];
    if (c_to_q2[cpos] < 0)
      throw internal_error("induced quotient map left the composite quotient");
    out.moveleg.set_map.push_back(c_to_q2[cpos]);
    out.moveleg.components.push_back(c2.moveleg.components[i]);
  }
  out.subleg.src = out.apex;
  out.subleg.dst = q1;
  out.moveleg.src = out.apex;
  out.moveleg.dst = q2;
  validate_span(l0, out);
  return out;
}

}  // namespace

void check_splitting_squares(const SqmContext& ctx, const SplittingTable& table) {
  const Site& l0 = ctx.l0();
  for (const auto& e : table.entries) check_splitting(ctx, e);
  for (const auto& e1 : table.entries) {
    for (const auto& e2 : table.entries) {
      if (!(e2.cofibration.src == e1.cofibration.dst)) continue;
      SCSpan comp = sc_compose(l0, e1.cofibration, e2.cofibration);
      const CofSplitting* ec = nullptr;
      for (const auto& e : table.entries)
        if (e.cofibration.src == comp.src && e.cofibration.dst == comp.dst &&
            sc_equivalent(l0, e.cofibration, comp)) {
          ec = &e;
          break;
        }
      if (!ec) continue;
      SCSpan induced = induced_quotient_cof(ctx, e1.cofibration, e1.quotient, e2.cofibration,
                                            ec->quotient);
      const CofSplitting* eq = nullptr;
      for (const auto& e : table.entries)
        if (e.cofibration.src == induced.src && e.cofibration.dst == induced.dst &&
            sc_equivalent(l0, e.cofibration, induced)) {
          eq = &e;
          break;
        }
      if (!eq) continue;
      // Left route: split the quotient inclusion alongside A, then the
      // composite.  Right route: split the inner cofibration under the outer
      // quotient, then the outer one.
      SCSpan lhs = sc_compose(l0, sc_coproduct(l0, eq->alpha, sc_identity(l0, e1.cofibration.src)),
                              ec->alpha);
      SCSpan rhs = sc_compose(l0, sc_coproduct(l0, sc_identity(l0, e2.quotient), e1.alpha),
                              e2.alpha);
      if (!sc_equivalent(l0, lhs, rhs))
        throw axiom_error("splitting square failed to commute for a nested cofibration pair");
    }
  }
}

SqmWord translate_g(const SqmContext& ctx, const SqmWord& w) {
  if (w.degree == 0) return w;
  SqmWord out;
  out.degree = 1;
  for (const auto& l : w.letters) {
    switch (l.gen.tag) {
      case GenTag::Obj1:
        out.letters.push_back({make_weq1(ctx, sc_identity(ctx.l1(), l.gen.obj)), l.exp});
        break;
      case GenTag::Weq0: {
        SCSpan s;
        s.src = apply_functor(ctx.levels.s0_0, l.gen.span.src);
        s.dst = apply_functor(ctx.levels.s0_0, l.gen.span.dst);
        s.apex = apply_functor(ctx.levels.s0_0, l.gen.span.apex);
        s.subleg = apply_functor(ctx.levels.s0_0, l.gen.span.subleg);
        s.moveleg = apply_functor(ctx.levels.s0_0, l.gen.span.moveleg);
        out.letters.push_back({make_weq1(ctx, s), l.exp});
        break;
      }
      default:
        throw structural_error("translate_g expects object and weak-equivalence letters only");
    }
  }
  return out;
}

SqmWord translate_f(const SqmContext& ctx, const SqmWord& w, const SplittingTable& table) {
  if (w.degree == 0) return w;
  SqmWord out;
  out.degree = 1;
  for (const auto& l : w.letters) {
    std::vector<SqmLetter> block;
    switch (l.gen.tag) {
      case GenTag::Weq1: {
        block.push_back({make_obj1(ctx, l.gen.span.dst), 1});
        SCSpan s;
        s.src = apply_functor(ctx.levels.d1_1, l.gen.span.src);
        s.dst = apply_functor(ctx.levels.d1_1, l.gen.span.dst);
        s.apex = apply_functor(ctx.levels.d1_1, l.gen.span.apex);
        s.subleg = apply_functor(ctx.levels.d1_1, l.gen.span.subleg);
        s.moveleg = apply_functor(ctx.levels.d1_1, l.gen.span.moveleg);
        block.push_back({make_weq0(ctx, s), 1});
        break;
      }
      case GenTag::Cof: {
        const CofSplitting* e = find_splitting(table, l.gen.span, l.gen.quot);
        if (!e)
          throw structural_error(
              "no splitting on file for the cofibration " + tw_to_string(ctx.l0(), l.gen.span.src) +
              " >-> " + tw_to_string(ctx.l0(), l.gen.span.dst) + " with quotient " +
              tw_to_string(ctx.l0(), l.gen.quot));
        check_splitting(ctx, *e);
        block.push_back({make_weq0(ctx, e->alpha), 1});
        break;
      }
      default:
        throw structural_error("translate_f expects cell letters (cofibrations and level-1 maps)");
    }
    if (l.exp > 0) {
      out.letters.insert(out.letters.end(), block.begin(), block.end());
    } else {
      for (auto it = block.rbegin(); it != block.rend(); ++it)
        out.letters.push_back({it->gen, -it->exp});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

nlohmann::json word_to_json(const SqmContext& ctx, const SqmWord& w) {
  nlohmann::json letters = nlohmann::json::array();
  for (const auto& l : w.letters) {
    nlohmann::json e;
    switch (l.gen.tag) {
      case GenTag::Obj0:
        e["tag"] = "obj0";
        e["payload"] = tw_object_to_json(ctx.l0(), l.gen.obj);
        break;
      case GenTag::Obj1:
        e["tag"] = "obj1";
        e["payload"] = tw_object_to_json(ctx.l1(), l.gen.obj);
        break;
      case GenTag::Weq0:
        e["tag"] = "weq0";
        e["payload"] = span_to_json(ctx.l0(), l.gen.span);
        break;
      case GenTag::Weq1:
        e["tag"] = "weq1";
        e["payload"] = span_to_json(ctx.l1(), l.gen.span);
        break;
      case GenTag::Cof:
        e["tag"] = "cof";
        e["payload"] = {{"cofibration", span_to_json(ctx.l0(), l.gen.span)},
                        {"quotient", tw_object_to_json(ctx.l0(), l.gen.quot)}};
        break;
    }
    e["exponent"] = l.exp;
    letters.push_back(std::move(e));
  }
  return nlohmann::json{{"degree", w.degree}, {"letters", std::move(letters)}};
}

SqmWord parse_word_json(const SqmContext& ctx, const nlohmann::json& j) {
  const nlohmann::json* letters = nullptr;
  if (j.is_array()) {
    letters = &j;
  } else if (j.is_object() && j.contains("letters")) {
    letters = &j.at("letters");
  } else {
    throw structural_error("word JSON must be a letter list or an object with a 'letters' key");
  }
  std::vector<SqmLetter> out;
  for (const auto& e : *letters) {
    if (!e.is_object() || !e.contains("tag") || !e.contains("payload"))
      throw structural_error("word letter needs 'tag' and 'payload' keys");
    const std::string tag = e.at("tag").get<std::string>();
    int exp = e.value("exponent", 1);
    if (exp != 1 && exp != -1) throw structural_error("letter exponent must be +1 or -1");
    SqmGenerator g;
    if (tag == "obj0") {
      g = make_obj0(ctx, parse_tw_object_json(ctx.l0(), e.at("payload")));
    } else if (tag == "obj1") {
      g = make_obj1(ctx, parse_tw_object_json(ctx.l1(), e.at("payload")));
    } else if (tag == "weq0") {
      g = make_weq0(ctx, parse_span_json(ctx.l0(), e.at("payload")));
    } else if (tag == "weq1") {
      g = make_weq1(ctx, parse_span_json(ctx.l1(), e.at("payload")));
    } else if (tag == "cof") {
      const auto& p = e.at("payload");
      g = make_cof(ctx, parse_span_json(ctx.l0(), p.at("cofibration")),
                   parse_tw_object_json(ctx.l0(), p.at("quotient")));
    } else {
      throw structural_error("unknown letter tag '" + tag + "'");
    }
    out.push_back({std::move(g), exp});
  }
  SqmWord w = make_word(std::move(out));
  if (j.is_object() && j.contains("degree")) {
    int d = j.at("degree").get<int>();
    if (w.letters.empty())
      w.degree = d;
    else if (w.degree != d)
      throw structural_error("declared word degree does not match its letters");
  }
  return w;
}

}  // namespace sck
