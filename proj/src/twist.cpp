#include "sck/twist.hpp"

#include <algorithm>
#include <map>

namespace sck {

namespace {

constexpr size_t kHomSetBudget = 200000;

int checked_unique(const std::vector<int>& found, const char* what) {
  if (found.size() != 1)
    throw internal_error(std::string(what) + ": expected exactly one mediating morphism, found " +
                         std::to_string(found.size()));
  return found[0];
}

}  // namespace

void validate_tw(const Site& s, const TwObject& a) {
  for (int o : a.parts) {
    if (o < 0 || o >= s.num_objects()) throw structural_error("part index out of range");
    if (o == s.initial()) throw structural_error("the initial object cannot be a part");
  }
}

void validate_tw(const Site& s, const TwMorphism& f) {
  validate_tw(s, f.src);
  validate_tw(s, f.dst);
  if (f.set_map.size() != f.src.parts.size() || f.components.size() != f.src.parts.size())
    throw structural_error("set map and component list must match the source parts");
  for (size_t i = 0; i < f.set_map.size(); ++i) {
    int j = f.set_map[i];
    if (j < 0 || j >= f.dst.size()) throw structural_error("set map lands outside the target parts");
    int c = f.components[i];
    if (c < 0 || c >= s.num_morphisms() || s.src(c) != f.src.parts[i] || s.dst(c) != f.dst.parts[j])
      throw structural_error("component " + std::to_string(i) + " has the wrong endpoints");
  }
}

std::string tw_to_string(const Site& s, const TwObject& a) {
  std::string out = "[";
  for (int i = 0; i < a.size(); ++i) {
    if (i) out += " + ";
    out += s.object_name(a.parts[i]);
  }
  return out + "]";
}

std::string tw_to_string(const Site& s, const TwMorphism& f) {
  std::string out = tw_to_string(s, f.src) + " -> " + tw_to_string(s, f.dst) + " via (";
  for (size_t i = 0; i < f.components.size(); ++i) {
    if (i) out += ", ";
    out += s.morphism_name(f.components[i]) + "@" + std::to_string(f.set_map[i]);
  }
  return out + ")";
}

TwMorphism tw_identity(const Site& s, const TwObject& a) {
  TwMorphism f;
  f.src = f.dst = a;
  for (int i = 0; i < a.size(); ++i) {
    f.set_map.push_back(i);
    f.components.push_back(s.identity(a.parts[i]));
  }
  return f;
}

TwMorphism tw_compose(const Site& s, const TwMorphism& g, const TwMorphism& f) {
  if (f.dst != g.src) throw structural_error("tw_compose: endpoints do not match");
  TwMorphism out;
  out.src = f.src;
  out.dst = g.dst;
  for (size_t i = 0; i < f.set_map.size(); ++i) {
    int mid = f.set_map[i];
    out.set_map.push_back(g.set_map[mid]);
    out.components.push_back(s.compose(g.components[mid], f.components[i]));
  }
  return out;
}

bool tw_is_iso(const Site& s, const TwMorphism& m) {
  if (m.src.size() != m.dst.size()) return false;
  std::vector<char> hit(m.dst.size(), 0);
  for (size_t i = 0; i < m.set_map.size(); ++i) {
    int j = m.set_map[i];
    if (hit[j]) return false;
    hit[j] = 1;
    if (!s.is_iso(m.components[i])) return false;
  }
  return true;
}

TwMorphism tw_inverse(const Site& s, const TwMorphism& m) {
  if (!tw_is_iso(s, m)) throw structural_error("tw_inverse: morphism is not invertible");
  TwMorphism inv;
  inv.src = m.dst;
  inv.dst = m.src;
  inv.set_map.assign(m.dst.size(), -1);
  inv.components.assign(m.dst.size(), -1);
  for (size_t i = 0; i < m.set_map.size(); ++i) {
    int j = m.set_map[i];
    inv.set_map[j] = static_cast<int>(i);
    inv.components[j] = s.inverse(m.components[i]);
  }
  return inv;
}

TwObject tw_coproduct(const TwObject& a, const TwObject& b) {
  TwObject out = a;
  out.parts.insert(out.parts.end(), b.parts.begin(), b.parts.end());
  return out;
}

TwMorphism tw_coproduct_mor(const TwMorphism& f, const TwMorphism& g) {
  TwMorphism out;
  out.src = tw_coproduct(f.src, g.src);
  out.dst = tw_coproduct(f.dst, g.dst);
  out.set_map = f.set_map;
  for (int j : g.set_map) out.set_map.push_back(j + f.dst.size());
  out.components = f.components;
  out.components.insert(out.components.end(), g.components.begin(), g.components.end());
  return out;
}

TwClassification classify(const Site& s, const TwMorphism& f) {
  TwClassification c;
  c.sub = true;
  for (size_t i = 0; i < f.set_map.size() && c.sub; ++i)
    for (size_t k = i + 1; k < f.set_map.size() && c.sub; ++k)
      if (f.set_map[i] == f.set_map[k] && !s.are_disjoint(f.components[i], f.components[k])) c.sub = false;
  if (c.sub) {
    c.cover = true;
    for (int j = 0; j < f.dst.size() && c.cover; ++j) {
      std::vector<int> family;
      for (size_t i = 0; i < f.set_map.size(); ++i)
        if (f.set_map[i] == j) family.push_back(f.components[i]);
      if (!s.is_cover(f.dst.parts[j], family)) c.cover = false;
    }
  }
  c.move = true;
  for (int m : f.components)
    if (!s.is_iso(m)) c.move = false;
  return c;
}

TwPullback tw_pullback(const Site& s, const TwMorphism& f, const TwMorphism& g) {
  if (!(f.dst == g.dst)) throw structural_error("tw_pullback: targets do not match");
  TwPullback out;
  out.p.dst = f.src;
  out.q.dst = g.src;
  for (size_t i = 0; i < f.set_map.size(); ++i) {
    for (size_t k = 0; k < g.set_map.size(); ++k) {
      if (f.set_map[i] != g.set_map[k]) continue;
      SitePullback sp = s.pullback(f.components[i], g.components[k]);
      if (sp.apex == s.initial()) continue;
      out.apex.parts.push_back(sp.apex);
      out.p.set_map.push_back(static_cast<int>(i));
      out.p.components.push_back(sp.p);
      out.q.set_map.push_back(static_cast<int>(k));
      out.q.components.push_back(sp.q);
    }
  }
  out.p.src = out.apex;
  out.q.src = out.apex;
  return out;
}

std::vector<TwMorphism> hom_set(const Site& s, const TwObject& a, const TwObject& b) {
  // Per source part, every (target part, component) choice.
  std::vector<std::vector<std::pair<int, int>>> choices(a.parts.size());
  size_t total = 1;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j)
      for (int m : s.hom(a.parts[i], b.parts[j])) choices[i].push_back({j, m});
    total *= choices[i].size();
    if (choices[i].empty()) return {};
    if (total > kHomSetBudget) throw internal_error("hom_set enumeration is too large");
  }
  std::vector<TwMorphism> out;
  std::vector<size_t> idx(a.parts.size(), 0);
  while (true) {
    TwMorphism f;
    f.src = a;
    f.dst = b;
    for (int i = 0; i < a.size(); ++i) {
      f.set_map.push_back(choices[i][idx[i]].first);
      f.components.push_back(choices[i][idx[i]].second);
    }
    out.push_back(std::move(f));
    int pos = static_cast<int>(a.parts.size()) - 1;
    while (pos >= 0 && ++idx[pos] == choices[pos].size()) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

std::vector<TwMorphism> hom_over(const Site& s, const TwMorphism& u, const TwMorphism& v) {
  if (!(u.dst == v.dst)) throw structural_error("hom_over: the legs have different bases");
  std::vector<TwMorphism> out;
  for (const TwMorphism& h : hom_set(s, u.src, v.src))
    if (tw_compose(s, v, h) == u) out.push_back(h);
  return out;
}

// ---------------------------------------------------------------------------
// Dependent product.
// ---------------------------------------------------------------------------

namespace {

struct DpData {
  TwMorphism pi;                        // apex -> B
  std::vector<int> base;                // apex part -> target part j
  std::vector<std::vector<int>> fiber;  // apex part -> source positions i over j (ascending)
  std::vector<std::vector<int>> tuple;  // apex part -> chosen p-source part per position
  std::vector<std::vector<int>> proj;   // apex part -> site morphism apex -> p.src part
};

void require_invertible(const Site& s, const TwMorphism& sigma) {
  for (int m : sigma.components)
    if (!s.is_iso(m)) throw structural_error("base-change adjoint requires invertible components");
}

DpData dp_data(const Site& s, const TwMorphism& sigma, const TwMorphism& p) {
  require_invertible(s, sigma);
  if (!(p.dst == sigma.src)) throw structural_error("dependent_product: p must be a leg over sigma.src");
  DpData d;
  d.pi.dst = sigma.dst;
  for (int j = 0; j < sigma.dst.size(); ++j) {
    std::vector<int> fiberI;
    for (size_t i = 0; i < sigma.set_map.size(); ++i)
      if (sigma.set_map[i] == j) fiberI.push_back(static_cast<int>(i));
    if (fiberI.empty()) {
      d.pi.src.parts.push_back(sigma.dst.parts[j]);
      d.pi.set_map.push_back(j);
      d.pi.components.push_back(s.identity(sigma.dst.parts[j]));
      d.base.push_back(j);
      d.fiber.push_back({});
      d.tuple.push_back({});
      d.proj.push_back({});
      continue;
    }
    std::vector<std::vector<int>> cand(fiberI.size());
    bool possible = true;
    for (size_t pos = 0; pos < fiberI.size(); ++pos) {
      for (size_t k = 0; k < p.set_map.size(); ++k)
        if (p.set_map[k] == fiberI[pos]) cand[pos].push_back(static_cast<int>(k));
      if (cand[pos].empty()) possible = false;
    }
    if (!possible) continue;
    std::vector<size_t> idx(fiberI.size(), 0);
    while (true) {
      // Composite of each chosen part down to the target part j.
      std::vector<int> legs(fiberI.size());
      for (size_t pos = 0; pos < fiberI.size(); ++pos) {
        int i = fiberI[pos], k = cand[pos][idx[pos]];
        legs[pos] = s.compose(sigma.components[i], p.components[k]);
      }
      int obj = p.src.parts[cand[0][idx[0]]];
      int down = legs[0];
      std::vector<int> projs{s.identity(obj)};
      bool alive = obj != s.initial();
      for (size_t pos = 1; pos < fiberI.size() && alive; ++pos) {
        SitePullback sp = s.pullback(down, legs[pos]);
        if (sp.apex == s.initial()) {
          alive = false;
          break;
        }
        for (int& pr : projs) pr = s.compose(pr, sp.p);
        projs.push_back(sp.q);
        down = s.compose(down, sp.p);
        obj = sp.apex;
      }
      if (alive) {
        d.pi.src.parts.push_back(obj);
        d.pi.set_map.push_back(j);
        d.pi.components.push_back(down);
        d.base.push_back(j);
        d.fiber.push_back(fiberI);
        std::vector<int> tup;
        for (size_t pos = 0; pos < fiberI.size(); ++pos) tup.push_back(cand[pos][idx[pos]]);
        d.tuple.push_back(std::move(tup));
        d.proj.push_back(projs);
      }
      int pos = static_cast<int>(fiberI.size()) - 1;
      while (pos >= 0 && ++idx[pos] == cand[pos].size()) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return d;
}

}  // namespace

TwMorphism sigma_star(const Site& s, const TwMorphism& sigma, const TwMorphism& q) {
  require_invertible(s, sigma);
  if (!(q.dst == sigma.dst)) throw structural_error("sigma_star: q must be a leg over sigma.dst");
  return tw_pullback(s, sigma, q).p;
}

TwMorphism sigma_star_mor(const Site& s, const TwMorphism& sigma, const TwMorphism& q1,
                          const TwMorphism& q2, const TwMorphism& t) {
  if (!(tw_compose(s, q2, t) == q1)) throw structural_error("sigma_star_mor: t is not a morphism over the base");
  TwPullback s1 = tw_pullback(s, sigma, q1);
  TwPullback s2 = tw_pullback(s, sigma, q2);
  TwMorphism out;
  out.src = s1.apex;
  out.dst = s2.apex;
  for (int u = 0; u < s1.apex.size(); ++u) {
    int i = s1.p.set_map[u];
    int l2 = t.set_map[s1.q.set_map[u]];
    int v = -1;
    for (int w = 0; w < s2.apex.size(); ++w)
      if (s2.p.set_map[w] == i && s2.q.set_map[w] == l2) v = w;
    if (v < 0) throw internal_error("sigma_star_mor: image part vanished");
    std::vector<int> found;
    int want_p = s1.p.components[u];
    int want_q = s.compose(t.components[s1.q.set_map[u]], s1.q.components[u]);
    for (int m : s.hom(s1.apex.parts[u], s2.apex.parts[v]))
      if (s.compose(s2.p.components[v], m) == want_p && s.compose(s2.q.components[v], m) == want_q)
        found.push_back(m);
    out.set_map.push_back(v);
    out.components.push_back(checked_unique(found, "sigma_star_mor"));
  }
  return out;
}

TwMorphism dependent_product(const Site& s, const TwMorphism& sigma, const TwMorphism& p) {
  return dp_data(s, sigma, p).pi;
}

TwMorphism dependent_product_mor(const Site& s, const TwMorphism& sigma, const TwMorphism& p1,
                                 const TwMorphism& p2, const TwMorphism& t) {
  if (!(tw_compose(s, p2, t) == p1))
    throw structural_error("dependent_product_mor: t is not a morphism over the base");
  DpData d1 = dp_data(s, sigma, p1);
  DpData d2 = dp_data(s, sigma, p2);
  TwMorphism out;
  out.src = d1.pi.src;
  out.dst = d2.pi.src;
  for (size_t u = 0; u < d1.base.size(); ++u) {
    if (d1.fiber[u].empty()) {
      int v = -1;
      for (size_t w = 0; w < d2.base.size(); ++w)
        if (d2.base[w] == d1.base[u]) v = static_cast<int>(w);
      if (v < 0) throw internal_error("dependent_product_mor: empty-fiber part missing");
      out.set_map.push_back(v);
      out.components.push_back(s.identity(d1.pi.src.parts[u]));
      continue;
    }
    std::vector<int> image_tuple;
    for (int k : d1.tuple[u]) image_tuple.push_back(t.set_map[k]);
    int v = -1;
    for (size_t w = 0; w < d2.base.size(); ++w)
      if (d2.base[w] == d1.base[u] && d2.tuple[w] == image_tuple) v = static_cast<int>(w);
    if (v < 0) throw internal_error("dependent_product_mor: image tuple vanished");
    std::vector<int> found;
    for (int m : s.hom(d1.pi.src.parts[u], d2.pi.src.parts[v])) {
      bool ok = true;
      for (size_t pos = 0; pos < d1.fiber[u].size() && ok; ++pos)
        if (s.compose(d2.proj[v][pos], m) != s.compose(t.components[d1.tuple[u][pos]], d1.proj[u][pos])) ok = false;
      if (ok) found.push_back(m);
    }
    out.set_map.push_back(v);
    out.components.push_back(checked_unique(found, "dependent_product_mor"));
  }
  return out;
}

TwMorphism dp_counit(const Site& s, const TwMorphism& sigma, const TwMorphism& p) {
  DpData d = dp_data(s, sigma, p);
  TwPullback back = tw_pullback(s, sigma, d.pi);
  TwMorphism eps;
  eps.src = back.apex;
  eps.dst = p.src;
  for (int u = 0; u < back.apex.size(); ++u) {
    int i = back.p.set_map[u];
    int t = back.q.set_map[u];
    const std::vector<int>& fib = d.fiber[t];
    auto it = std::find(fib.begin(), fib.end(), i);
    if (it == fib.end()) throw internal_error("dp_counit: part outside its fiber");
    size_t pos = static_cast<size_t>(it - fib.begin());
    eps.set_map.push_back(d.tuple[t][pos]);
    eps.components.push_back(s.compose(d.proj[t][pos], back.q.components[u]));
  }
  if (!(tw_compose(s, p, eps) == back.p)) throw internal_error("dp_counit: not a morphism over the base");
  return eps;
}

TwMorphism dp_unit(const Site& s, const TwMorphism& sigma, const TwMorphism& q) {
  TwPullback sq = tw_pullback(s, sigma, q);
  DpData d = dp_data(s, sigma, sq.p);
  TwMorphism eta;
  eta.src = q.src;
  eta.dst = d.pi.src;
  for (int l = 0; l < q.src.size(); ++l) {
    int j = q.set_map[l];
    std::vector<int> fiberI;
    for (size_t i = 0; i < sigma.set_map.size(); ++i)
      if (sigma.set_map[i] == j) fiberI.push_back(static_cast<int>(i));
    if (fiberI.empty()) {
      int t = -1;
      for (size_t w = 0; w < d.base.size(); ++w)
        if (d.base[w] == j && d.fiber[w].empty()) t = static_cast<int>(w);
      if (t < 0) throw internal_error("dp_unit: empty-fiber part missing");
      eta.set_map.push_back(t);
      eta.components.push_back(q.components[l]);
      continue;
    }
    // The diagonal tuple: over fiber position i choose the pullback part (i, l).
    std::vector<int> diag;
    for (int i : fiberI) {
      int k = -1;
      for (int w = 0; w < sq.apex.size(); ++w)
        if (sq.p.set_map[w] == i && sq.q.set_map[w] == l) k = w;
      if (k < 0) throw internal_error("dp_unit: diagonal pullback part vanished");
      diag.push_back(k);
    }
    int t = -1;
    for (size_t w = 0; w < d.base.size(); ++w)
      if (d.base[w] == j && d.tuple[w] == diag) t = static_cast<int>(w);
    if (t < 0) throw internal_error("dp_unit: diagonal tuple missing");
    std::vector<int> found;
    for (int m : s.hom(q.src.parts[l], d.pi.src.parts[t])) {
      bool ok = true;
      for (size_t pos = 0; pos < fiberI.size() && ok; ++pos) {
        int k = diag[pos];
        int to_part = s.compose(d.proj[t][pos], m);  // q.src part -> pullback part (i, l)
        if (s.compose(sq.q.components[k], to_part) != s.identity(q.src.parts[l])) ok = false;
      }
      if (ok) found.push_back(m);
    }
    eta.set_map.push_back(t);
    eta.components.push_back(checked_unique(found, "dp_unit"));
  }
  if (!(tw_compose(s, d.pi, eta) == q)) throw internal_error("dp_unit: not a morphism over the base");
  return eta;
}

TwObject apply_functor(const CompiledFunctor& F, const TwObject& a) {
  TwObject out;
  for (int o : a.parts) {
    int im = F.apply_obj(o);
    if (im != F.dst->initial()) out.parts.push_back(im);
  }
  return out;
}

TwMorphism apply_functor(const CompiledFunctor& F, const TwMorphism& f) {
  TwMorphism out;
  out.src = apply_functor(F, f.src);
  out.dst = apply_functor(F, f.dst);
  std::vector<int> src_pos(f.src.parts.size(), -1), dst_pos(f.dst.parts.size(), -1);
  int c = 0;
  for (size_t i = 0; i < f.src.parts.size(); ++i)
    if (F.apply_obj(f.src.parts[i]) != F.dst->initial()) src_pos[i] = c++;
  c = 0;
  for (size_t j = 0; j < f.dst.parts.size(); ++j)
    if (F.apply_obj(f.dst.parts[j]) != F.dst->initial()) dst_pos[j] = c++;
  for (size_t i = 0; i < f.src.parts.size(); ++i) {
    if (src_pos[i] < 0) continue;
    int j = f.set_map[i];
    if (dst_pos[j] < 0)
      throw structural_error("functor image collapses the target of a surviving part");
    out.set_map.push_back(dst_pos[j]);
    out.components.push_back(F.apply_mor(f.components[i]));
  }
  return out;
}

}  // namespace sck
