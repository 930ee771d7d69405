#include "sck/assembler.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "sck/io.hpp"

namespace sck {

namespace {

using nlohmann::json;

constexpr int kMaxSieveWidth = 20;  // hom-into width bound for sieve enumeration

std::string quoted(const std::string& s) { return "'" + s + "'"; }

json parse_top_object(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw structural_error(origin + ": invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw structural_error(origin + ": top level must be a JSON object");
  return j;
}

std::string want_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw structural_error(where + " must be a string");
  return j.get<std::string>();
}

}  // namespace

AssemblerSpec parse_assembler_json(const std::string& text, const std::string& origin) {
  json j = parse_top_object(text, origin);
  static const std::vector<std::string> allowed = {"objects",     "initial", "morphisms",
                                                   "composition", "covers",  "pullbacks"};
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw structural_error(origin + ": unknown key " + quoted(item.key()));
  }
  if (!j.contains("objects") || !j.contains("initial"))
    throw structural_error(origin + ": keys 'objects' and 'initial' are required");

  AssemblerSpec s;
  if (!j["objects"].is_array()) throw structural_error(origin + ": 'objects' must be an array");
  for (const auto& o : j["objects"]) s.objects.push_back(want_string(o, origin + ": object name"));
  s.initial = want_string(j["initial"], origin + ": 'initial'");

  if (j.contains("morphisms")) {
    if (!j["morphisms"].is_array()) throw structural_error(origin + ": 'morphisms' must be an array");
    for (const auto& m : j["morphisms"]) {
      if (!m.is_object() || m.size() != 3 || !m.contains("id") || !m.contains("src") || !m.contains("dst"))
        throw structural_error(origin + ": each morphism needs exactly the keys id/src/dst");
      s.morphisms.push_back({want_string(m["id"], origin + ": morphism id"),
                             want_string(m["src"], origin + ": morphism src"),
                             want_string(m["dst"], origin + ": morphism dst")});
    }
  }
  if (j.contains("composition")) {
    if (!j["composition"].is_array()) throw structural_error(origin + ": 'composition' must be an array");
    for (const auto& t : j["composition"]) {
      if (!t.is_array() || t.size() != 3)
        throw structural_error(origin + ": each composition entry is a triple [g, f, gf]");
      s.composition.push_back({want_string(t[0], origin + ": composition entry"),
                               want_string(t[1], origin + ": composition entry"),
                               want_string(t[2], origin + ": composition entry")});
    }
  }
  if (j.contains("covers")) {
    if (!j["covers"].is_array()) throw structural_error(origin + ": 'covers' must be an array");
    for (const auto& c : j["covers"]) {
      if (!c.is_object() || c.size() != 2 || !c.contains("target") || !c.contains("family"))
        throw structural_error(origin + ": each cover needs exactly the keys target/family");
      CoverDecl d;
      d.target = want_string(c["target"], origin + ": cover target");
      if (!c["family"].is_array()) throw structural_error(origin + ": cover family must be an array");
      for (const auto& f : c["family"]) d.family.push_back(want_string(f, origin + ": cover family entry"));
      s.covers.push_back(std::move(d));
    }
  }
  if (j.contains("pullbacks")) {
    if (!j["pullbacks"].is_array()) throw structural_error(origin + ": 'pullbacks' must be an array");
    for (const auto& p : j["pullbacks"]) {
      if (!p.is_object() || p.size() != 5 || !p.contains("f") || !p.contains("g") || !p.contains("apex") ||
          !p.contains("p") || !p.contains("q"))
        throw structural_error(origin + ": each pullback needs exactly the keys f/g/apex/p/q");
      s.pullbacks.push_back({want_string(p["f"], origin + ": pullback f"),
                             want_string(p["g"], origin + ": pullback g"),
                             want_string(p["apex"], origin + ": pullback apex"),
                             want_string(p["p"], origin + ": pullback p"),
                             want_string(p["q"], origin + ": pullback q")});
    }
  }
  return s;
}

std::string assembler_to_json(const AssemblerSpec& spec) {
  json j;
  j["objects"] = spec.objects;
  j["initial"] = spec.initial;
  j["morphisms"] = json::array();
  for (const auto& m : spec.morphisms) j["morphisms"].push_back({{"id", m.id}, {"src", m.src}, {"dst", m.dst}});
  j["composition"] = json::array();
  for (const auto& t : spec.composition) j["composition"].push_back({t[0], t[1], t[2]});
  j["covers"] = json::array();
  for (const auto& c : spec.covers) j["covers"].push_back({{"target", c.target}, {"family", c.family}});
  j["pullbacks"] = json::array();
  for (const auto& p : spec.pullbacks)
    j["pullbacks"].push_back({{"f", p.f}, {"g", p.g}, {"apex", p.apex}, {"p", p.p}, {"q", p.q}});
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Construction and validation.
// ---------------------------------------------------------------------------

namespace {

// Universal-property check for a candidate square over f, g (same codomain).
bool square_is_pullback(const Site& s, int f, int g, int apex, int p, int q, std::string* why) {
  if (s.src(p) != apex || s.src(q) != apex || s.dst(p) != s.src(f) || s.dst(q) != s.src(g)) {
    if (why) *why = "projection endpoints do not match";
    return false;
  }
  if (s.compose(f, p) != s.compose(g, q)) {
    if (why) *why = "square does not commute";
    return false;
  }
  for (int w = 0; w < s.num_objects(); ++w) {
    for (int u : s.hom(w, s.src(f))) {
      for (int v : s.hom(w, s.src(g))) {
        if (s.compose(f, u) != s.compose(g, v)) continue;
        int found = 0;
        for (int m : s.hom(w, apex))
          if (s.compose(p, m) == u && s.compose(q, m) == v) ++found;
        if (found != 1) {
          if (why)
            *why = "cone (" + s.morphism_name(u) + ", " + s.morphism_name(v) + ") from " + s.object_name(w) +
                   " has " + std::to_string(found) + " mediating morphisms";
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

struct SiteBuilder {
  Site& s;
  ValidationReport* report;
  bool category_ok = true;
  bool pullbacks_ok = true;

  SiteBuilder(Site& site, ValidationReport* rep) : s(site), report(rep) {}

  void fail(const std::string& axiom, const std::string& witness) {
    if (report) {
      report->items.push_back({axiom, false, witness});
    } else {
      throw axiom_error(axiom + ": " + witness);
    }
  }
  void pass(const std::string& axiom) {
    if (report) report->items.push_back({axiom, true, ""});
  }
  void skip(const std::string& axiom, const std::string& why) {
    if (report) report->items.push_back({axiom, false, "not checked: " + why});
  }

  // --- structural tables (throws structural_error in both modes) -----------

  void build_structure() {
    const AssemblerSpec& spec = s.spec_;
    if (spec.objects.empty()) throw structural_error("no objects declared");
    for (const auto& name : spec.objects) {
      if (name.empty()) throw structural_error("empty object name");
      if (!s.object_index_.emplace(name, static_cast<int>(s.object_names_.size())).second)
        throw structural_error("duplicate object " + quoted(name));
      s.object_names_.push_back(name);
    }
    auto oit = s.object_index_.find(spec.initial);
    if (oit == s.object_index_.end())
      throw structural_error("initial object " + quoted(spec.initial) + " is not in the object list");
    s.initial_ = oit->second;

    auto add_mor = [&](const std::string& id, int a, int b) {
      if (!s.mor_index_.emplace(id, static_cast<int>(s.mor_names_.size())).second)
        throw structural_error("duplicate morphism id " + quoted(id));
      s.mor_names_.push_back(id);
      s.mor_src_.push_back(a);
      s.mor_dst_.push_back(b);
      return static_cast<int>(s.mor_names_.size()) - 1;
    };

    for (const auto& m : spec.morphisms) {
      if (m.id.empty()) throw structural_error("empty morphism id");
      if (m.id.rfind("id:", 0) == 0 || m.id.rfind("ini:", 0) == 0)
        throw structural_error("morphism id " + quoted(m.id) + " uses a reserved prefix");
      auto a = s.object_index_.find(m.src);
      auto b = s.object_index_.find(m.dst);
      if (a == s.object_index_.end()) throw structural_error("morphism " + quoted(m.id) + ": unknown src " + quoted(m.src));
      if (b == s.object_index_.end()) throw structural_error("morphism " + quoted(m.id) + ": unknown dst " + quoted(m.dst));
      if (a->second == s.initial_ || b->second == s.initial_)
        throw structural_error("morphism " + quoted(m.id) +
                               ": maps touching the initial object are implicit and cannot be declared");
      add_mor(m.id, a->second, b->second);
    }
    s.identity_.assign(s.num_objects(), -1);
    s.from_initial_.assign(s.num_objects(), -1);
    for (int o = 0; o < s.num_objects(); ++o)
      s.identity_[o] = add_mor("id:" + s.object_names_[o], o, o);
    for (int o = 0; o < s.num_objects(); ++o)
      s.from_initial_[o] = (o == s.initial_) ? s.identity_[o] : add_mor("ini:" + s.object_names_[o], s.initial_, o);

    const int n = s.num_morphisms();
    s.comp_.assign(static_cast<size_t>(n) * n, -1);
    auto set_comp = [&](int g, int f, int gf, const char* how) {
      int& cell = s.comp_[static_cast<size_t>(g) * n + f];
      if (cell != -1 && cell != gf)
        throw structural_error("conflicting composites for " + s.mor_names_[g] + " after " + s.mor_names_[f] + " (" +
                               how + "): " + s.mor_names_[cell] + " vs " + s.mor_names_[gf]);
      cell = gf;
    };
    for (int f = 0; f < n; ++f) {
      set_comp(s.identity_[s.mor_dst_[f]], f, f, "identity");
      set_comp(f, s.identity_[s.mor_src_[f]], f, "identity");
      if (s.mor_src_[f] == s.initial_) continue;
      set_comp(f, s.from_initial_[s.mor_src_[f]], s.from_initial_[s.mor_dst_[f]], "initial");
    }
    for (const auto& t : spec.composition) {
      int g = resolve_mor(t[0], "composition");
      int f = resolve_mor(t[1], "composition");
      int gf = resolve_mor(t[2], "composition");
      if (s.mor_dst_[f] != s.mor_src_[g])
        throw structural_error("composition entry (" + t[0] + ", " + t[1] + "): morphisms are not composable");
      if (s.mor_src_[gf] != s.mor_src_[f] || s.mor_dst_[gf] != s.mor_dst_[g])
        throw structural_error("composition entry (" + t[0] + ", " + t[1] + "): endpoints of " + t[2] +
                               " do not match");
      set_comp(g, f, gf, "declared");
    }
    for (int g = 0; g < n; ++g)
      for (int f = 0; f < n; ++f)
        if (s.mor_dst_[f] == s.mor_src_[g] && s.comp_[static_cast<size_t>(g) * n + f] == -1)
          throw structural_error("missing composite: " + s.mor_names_[g] + " after " + s.mor_names_[f]);

    s.hom_.assign(s.num_objects(), std::vector<std::vector<int>>(s.num_objects()));
    s.into_.assign(s.num_objects(), {});
    s.into_pos_.assign(s.num_objects(), {});
    for (int m = 0; m < n; ++m) {
      s.hom_[s.mor_src_[m]][s.mor_dst_[m]].push_back(m);
      s.into_pos_[s.mor_dst_[m]][m] = static_cast<int>(s.into_[s.mor_dst_[m]].size());
      s.into_[s.mor_dst_[m]].push_back(m);
    }

    s.inverse_.assign(n, -1);
    for (int m = 0; m < n; ++m) {
      for (int g : s.hom_[s.mor_dst_[m]][s.mor_src_[m]]) {
        if (s.compose(g, m) == s.identity_[s.mor_src_[m]] && s.compose(m, g) == s.identity_[s.mor_dst_[m]]) {
          s.inverse_[m] = g;
          break;
        }
      }
    }

    for (const auto& c : spec.covers) {
      auto it = s.object_index_.find(c.target);
      if (it == s.object_index_.end()) throw structural_error("cover target " + quoted(c.target) + " is unknown");
      std::vector<int> fam;
      for (const auto& fid : c.family) {
        int f = resolve_mor(fid, "cover of " + c.target);
        if (s.mor_dst_[f] != it->second)
          throw structural_error("cover of " + c.target + ": member " + quoted(fid) + " has the wrong codomain");
        fam.push_back(f);
      }
      s.covers_.emplace_back(it->second, std::move(fam));
    }
  }

  int resolve_mor(const std::string& id, const std::string& where) {
    auto it = s.mor_index_.find(id);
    if (it == s.mor_index_.end()) throw structural_error(where + ": unknown morphism " + quoted(id));
    return it->second;
  }

  // --- axiom stages ---------------------------------------------------------

  void check_category() {
    const int n = s.num_morphisms();
    for (int f = 0; f < n && category_ok; ++f)
      for (int g = 0; g < n && category_ok; ++g) {
        if (s.mor_dst_[f] != s.mor_src_[g]) continue;
        int gf = s.comp_[static_cast<size_t>(g) * n + f];
        for (int h = 0; h < n; ++h) {
          if (s.mor_dst_[g] != s.mor_src_[h]) continue;
          int hg = s.comp_[static_cast<size_t>(h) * n + g];
          if (s.comp_[static_cast<size_t>(h) * n + gf] != s.comp_[static_cast<size_t>(hg) * n + f]) {
            category_ok = false;
            fail("category", "associativity fails on (" + s.mor_names_[h] + ", " + s.mor_names_[g] + ", " +
                                 s.mor_names_[f] + ")");
            break;
          }
        }
      }
    if (category_ok) pass("category");
  }

  void check_initial() {
    if (!category_ok) {
      skip("initial", "category laws failed");
      return;
    }
    for (int o = 0; o < s.num_objects(); ++o) {
      if (static_cast<int>(s.hom_[s.initial_][o].size()) != 1) {
        fail("initial", "object " + s.object_names_[o] + " does not receive exactly one morphism from the initial");
        return;
      }
      if (o != s.initial_ && !s.hom_[o][s.initial_].empty()) {
        fail("initial", "object " + s.object_names_[o] + " maps into the initial object");
        return;
      }
    }
    pass("initial");
  }

  void check_monic() {
    if (!category_ok) {
      skip("monic", "category laws failed");
      return;
    }
    for (int f = 0; f < s.num_morphisms(); ++f) {
      for (int w = 0; w < s.num_objects(); ++w) {
        const auto& hom = s.hom_[w][s.mor_src_[f]];
        for (size_t i = 0; i < hom.size(); ++i)
          for (size_t j = i + 1; j < hom.size(); ++j)
            if (s.compose(f, hom[i]) == s.compose(f, hom[j])) {
              fail("monic", s.mor_names_[f] + " does not cancel " + s.mor_names_[hom[i]] + " vs " +
                                s.mor_names_[hom[j]]);
              return;
            }
      }
    }
    pass("monic");
  }

  void check_pullbacks() {
    if (!category_ok) {
      skip("pullbacks", "category laws failed");
      pullbacks_ok = false;
      return;
    }
    const int n = s.num_morphisms();
    s.pull_.assign(static_cast<size_t>(n) * n, SitePullback{-1, -1, -1});
    auto cell = [&](int f, int g) -> SitePullback& { return s.pull_[static_cast<size_t>(f) * n + g]; };

    bool all_ok = true;
    for (const auto& d : s.spec_.pullbacks) {
      int f = resolve_mor(d.f, "pullback table");
      int g = resolve_mor(d.g, "pullback table");
      int p = resolve_mor(d.p, "pullback table");
      int q = resolve_mor(d.q, "pullback table");
      auto it = s.object_index_.find(d.apex);
      if (it == s.object_index_.end()) throw structural_error("pullback table: unknown apex " + quoted(d.apex));
      if (s.mor_dst_[f] != s.mor_dst_[g])
        throw structural_error("pullback entry (" + d.f + ", " + d.g + "): codomains differ");
      std::string why;
      if (!square_is_pullback(s, f, g, it->second, p, q, &why)) {
        all_ok = false;
        fail("pullbacks", "declared square over (" + d.f + ", " + d.g + ") is not a limit: " + why);
        continue;
      }
      cell(f, g) = {it->second, p, q};
      if (cell(g, f).apex == -1) cell(g, f) = {it->second, q, p};
    }
    for (int f = 0; f < n && all_ok; ++f) {
      for (int g = f; g < n; ++g) {
        if (s.mor_dst_[f] != s.mor_dst_[g] || cell(f, g).apex != -1) continue;
        bool found = false;
        for (int z = 0; z < s.num_objects() && !found; ++z)
          for (int p : s.hom_[z][s.mor_src_[f]]) {
            if (found) break;
            for (int q : s.hom_[z][s.mor_src_[g]]) {
              if (s.compose(f, p) != s.compose(g, q)) continue;
              if (square_is_pullback(s, f, g, z, p, q, nullptr)) {
                cell(f, g) = {z, p, q};
                cell(g, f) = {z, q, p};
                found = true;
                break;
              }
            }
          }
        if (!found) {
          all_ok = false;
          fail("pullbacks", "no limit square exists over (" + s.mor_names_[f] + ", " + s.mor_names_[g] + ")");
          break;
        }
      }
    }
    pullbacks_ok = all_ok;
    if (all_ok) pass("pullbacks");
  }

  // --- topology --------------------------------------------------------------

  bool sieve_closed(int x, unsigned mask) const {
    const auto& into = s.into_[x];
    for (size_t i = 0; i < into.size(); ++i) {
      if (!(mask >> i & 1u)) continue;
      int m = into[i];
      for (int h : s.into_[s.mor_src_[m]]) {
        int c = s.compose(m, h);
        if (!(mask >> s.into_pos_[x].at(c) & 1u)) return false;
      }
    }
    return true;
  }

  unsigned restrict_sieve(int x, unsigned mask, int h) const {
    // h: y -> x; returns {g into y : h.g in mask}.
    int y = s.mor_src_[h];
    unsigned out = 0;
    const auto& into = s.into_[y];
    for (size_t i = 0; i < into.size(); ++i) {
      int c = s.compose(h, into[i]);
      if (mask >> s.into_pos_[x].at(c) & 1u) out |= 1u << i;
    }
    return out;
  }

  void build_topology() {
    const int n = s.num_objects();
    s.covering_.assign(n, {});
    std::vector<std::vector<unsigned>> closed(n);
    for (int x = 0; x < n; ++x) {
      size_t k = s.into_[x].size();
      if (k > kMaxSieveWidth)
        throw internal_error("object " + s.object_names_[x] + " receives too many morphisms for sieve enumeration");
      for (unsigned mask = 0; mask < (1u << k); ++mask)
        if (sieve_closed(x, mask)) closed[x].push_back(mask);
      s.covering_[x].insert((1u << k) - 1u);
    }
    s.covering_[s.initial_].insert(0u);
    for (const auto& [target, fam] : s.covers_) s.covering_[target].insert(s.sieve_of_family(target, fam));

    bool changed = true;
    while (changed) {
      changed = false;
      for (int x = 0; x < n; ++x) {
        std::vector<unsigned> snapshot(s.covering_[x].begin(), s.covering_[x].end());
        for (unsigned mask : snapshot)
          for (int h : s.into_[x])
            if (s.covering_[s.mor_src_[h]].insert(restrict_sieve(x, mask, h)).second) changed = true;
      }
      for (int x = 0; x < n; ++x) {
        for (unsigned cand : closed[x]) {
          if (s.covering_[x].count(cand)) continue;
          for (unsigned t : s.covering_[x]) {
            bool local = true;
            const auto& into = s.into_[x];
            for (size_t i = 0; i < into.size() && local; ++i)
              if (t >> i & 1u)
                if (!s.covering_[s.mor_src_[into[i]]].count(restrict_sieve(x, cand, into[i]))) local = false;
            if (local) {
              s.covering_[x].insert(cand);
              changed = true;
              break;
            }
          }
        }
      }
    }
  }

  void check_site_closure() {
    if (!category_ok || !pullbacks_ok) {
      skip("site-closure", category_ok ? "pullback squares unavailable" : "category laws failed");
      return;
    }
    for (int x = 0; x < s.num_objects(); ++x) {
      if (!s.is_cover(x, {s.identity_[x]})) {
        fail("site-closure", "identity family fails to cover " + s.object_names_[x]);
        return;
      }
    }
    for (const auto& [target, fam] : s.covers_) {
      for (int h : s.into_[target]) {
        std::vector<int> legs;
        for (int f : fam) legs.push_back(s.pullback(f, h).q);
        if (!s.is_cover(s.mor_src_[h], legs)) {
          fail("site-closure", "base change of a declared cover of " + s.object_names_[target] + " along " +
                                   s.mor_names_[h] + " fails to cover " + s.object_names_[s.mor_src_[h]]);
          return;
        }
      }
      for (size_t i = 0; i < fam.size(); ++i) {
        for (const auto& [t2, fam2] : s.covers_) {
          if (t2 != s.mor_src_[fam[i]]) continue;
          std::vector<int> refined;
          for (size_t j = 0; j < fam.size(); ++j)
            if (j != i) refined.push_back(fam[j]);
          for (int g : fam2) refined.push_back(s.compose(fam[i], g));
          if (!s.is_cover(target, refined)) {
            fail("site-closure", "refining member " + s.mor_names_[fam[i]] + " of a cover of " +
                                     s.object_names_[target] + " by a declared cover fails to cover");
            return;
          }
        }
      }
    }
    pass("site-closure");
  }

  void compute_condition_g() {
    if (!category_ok) return;
    for (int x = 0; x < s.num_objects(); ++x) {
      if (x == s.initial_) continue;
      if (s.covering_[x].count(0u)) {
        s.condition_g_ = false;
        return;
      }
    }
    // Refined-family implication, enumerated over declared covers (and the
    // identity cover) as the refinement choices for every finite family.
    for (int x = 0; x < s.num_objects(); ++x) {
      if (x == s.initial_) continue;
      const auto& into = s.into_[x];
      for (unsigned mask = 1; mask < (1u << into.size()); ++mask) {
        std::vector<int> members;
        for (size_t i = 0; i < into.size(); ++i)
          if (mask >> i & 1u) members.push_back(into[i]);
        std::vector<std::vector<const std::vector<int>*>> choices(members.size());
        static const std::vector<int> kIdentityMarker;
        size_t combos = 1;
        for (size_t i = 0; i < members.size(); ++i) {
          choices[i].push_back(&kIdentityMarker);
          for (const auto& [t2, fam2] : s.covers_)
            if (t2 == s.mor_src_[members[i]]) choices[i].push_back(&fam2);
          combos *= choices[i].size();
          if (combos > 200000) throw internal_error("refined-family enumeration is too large");
        }
        for (size_t c = 0; c < combos; ++c) {
          size_t rest = c;
          std::vector<int> refined;
          for (size_t i = 0; i < members.size(); ++i) {
            const auto* choice = choices[i][rest % choices[i].size()];
            rest /= choices[i].size();
            if (choice == &kIdentityMarker)
              refined.push_back(members[i]);
            else
              for (int g : *choice) refined.push_back(s.compose(members[i], g));
          }
          if (s.is_cover(x, refined) && !s.is_cover(x, members)) {
            s.condition_g_ = false;
            return;
          }
        }
      }
    }
    s.condition_g_ = true;
  }

  void run() {
    build_structure();
    check_category();
    check_initial();
    check_monic();
    check_pullbacks();
    if (category_ok) build_topology();
    check_site_closure();
    compute_condition_g();
  }
};

Site::Site(const AssemblerSpec& spec) : spec_(spec) {
  SiteBuilder builder(*this, nullptr);
  builder.run();
}

int Site::object_index(const std::string& name) const {
  auto it = object_index_.find(name);
  if (it == object_index_.end()) throw structural_error("unknown object " + quoted(name));
  return it->second;
}

int Site::morphism_index(const std::string& name) const {
  auto it = mor_index_.find(name);
  if (it == mor_index_.end()) throw structural_error("unknown morphism " + quoted(name));
  return it->second;
}

int Site::compose(int g, int f) const {
  int c = comp_[static_cast<size_t>(g) * num_morphisms() + f];
  if (c == -1) throw internal_error("compose called on a non-composable pair");
  return c;
}

int Site::inverse(int m) const {
  if (inverse_[m] < 0) throw internal_error("inverse of a non-invertible morphism");
  return inverse_[m];
}

SitePullback Site::pullback(int f, int g) const {
  const SitePullback& c = pull_[static_cast<size_t>(f) * num_morphisms() + g];
  if (c.apex == -1) throw internal_error("pullback requested for morphisms without a common codomain");
  return c;
}

bool Site::are_disjoint(int f, int g) const { return pullback(f, g).apex == initial_; }

unsigned Site::sieve_of_family(int target, const std::vector<int>& family) const {
  unsigned mask = 0;
  for (int f : family) {
    if (dst(f) != target) throw structural_error("family member " + mor_names_[f] + " does not land in the target");
    for (int h : into_[src(f)]) mask |= 1u << into_pos_[target].at(compose(f, h));
  }
  return mask;
}

bool Site::is_cover(int target, const std::vector<int>& family) const {
  return covering_[target].count(sieve_of_family(target, family)) > 0;
}

bool ValidationReport::ok() const {
  for (const auto& i : items)
    if (!i.pass) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& i : items) {
    out << i.axiom << ": " << (i.pass ? "PASS" : "FAIL");
    if (!i.pass) out << " -- " << i.witness;
    out << "\n";
  }
  return out.str();
}

ValidationReport validate_assembler(const AssemblerSpec& spec) {
  ValidationReport report;
  Site site;  // see private default construction below via friend builder
  site.spec_ = spec;
  SiteBuilder builder(site, &report);
  builder.run();
  return report;
}

bool check_condition_g(const Site& site) { return site.condition_g(); }

// ---------------------------------------------------------------------------
// Functors.
// ---------------------------------------------------------------------------

CompiledFunctor compile_functor(std::shared_ptr<const Site> src, std::shared_ptr<const Site> dst,
                                const AssemblerMorphism& data) {
  const Site& a = *src;
  const Site& b = *dst;
  CompiledFunctor f;
  f.src = src;
  f.dst = dst;
  f.obj.assign(a.num_objects(), -1);
  f.obj[a.initial()] = b.initial();
  for (int o = 0; o < a.num_objects(); ++o) {
    if (o == a.initial()) continue;
    auto it = data.object_map.find(a.object_name(o));
    if (it == data.object_map.end())
      throw structural_error("object map is missing " + quoted(a.object_name(o)));
    f.obj[o] = b.object_index(it->second);
  }
  for (const auto& kv : data.object_map) a.object_index(kv.first);  // reject unknown keys
  for (const auto& kv : data.morphism_map) a.morphism_index(kv.first);

  f.mor.assign(a.num_morphisms(), -1);
  for (int m = 0; m < a.num_morphisms(); ++m) {
    int fa = f.obj[a.src(m)], fb = f.obj[a.dst(m)];
    auto declared = data.morphism_map.find(a.morphism_name(m));
    if (a.src(m) == a.initial() || fa == b.initial()) {
      f.mor[m] = (fa == b.initial()) ? b.from_initial(fb) : -1;
      if (f.mor[m] == -1) throw internal_error("inconsistent initial image");
      if (declared != data.morphism_map.end() && b.morphism_index(declared->second) != f.mor[m])
        throw axiom_error("morphism map contradicts the forced image of " + a.morphism_name(m));
      continue;
    }
    if (fb == b.initial())
      throw axiom_error("no image is available for " + a.morphism_name(m) +
                        ": its codomain collapses to the initial object but its domain does not");
    if (a.identity(a.src(m)) == m) {
      f.mor[m] = b.identity(fa);
      continue;
    }
    if (declared == data.morphism_map.end())
      throw structural_error("morphism map is missing " + quoted(a.morphism_name(m)));
    int im = b.morphism_index(declared->second);
    if (b.src(im) != fa || b.dst(im) != fb)
      throw axiom_error("image of " + a.morphism_name(m) + " has the wrong endpoints");
    f.mor[m] = im;
  }

  for (int g = 0; g < a.num_morphisms(); ++g)
    for (int m = 0; m < a.num_morphisms(); ++m) {
      if (a.dst(m) != a.src(g)) continue;
      if (f.mor[a.compose(g, m)] != b.compose(f.mor[g], f.mor[m]))
        throw axiom_error("functoriality fails on (" + a.morphism_name(g) + ", " + a.morphism_name(m) + ")");
    }

  for (int x = 0; x < a.num_morphisms(); ++x)
    for (int y = x; y < a.num_morphisms(); ++y) {
      if (a.dst(x) != a.dst(y)) continue;
      SitePullback pb = a.pullback(x, y);
      std::string why;
      if (!square_is_pullback(b, f.mor[x], f.mor[y], f.obj[pb.apex], f.mor[pb.p], f.mor[pb.q], &why))
        throw axiom_error("limit square over (" + a.morphism_name(x) + ", " + a.morphism_name(y) +
                          ") is not preserved: " + why);
    }

  for (const auto& [target, fam] : a.covers()) {
    std::vector<int> image;
    for (int m : fam) image.push_back(f.mor[m]);
    if (!b.is_cover(f.obj[target], image))
      throw axiom_error("cover of " + a.object_name(target) + " is not sent to a cover");
  }
  return f;
}

CompiledFunctor identity_functor(std::shared_ptr<const Site> site) {
  CompiledFunctor f;
  f.src = f.dst = site;
  f.obj.resize(site->num_objects());
  f.mor.resize(site->num_morphisms());
  for (int o = 0; o < site->num_objects(); ++o) f.obj[o] = o;
  for (int m = 0; m < site->num_morphisms(); ++m) f.mor[m] = m;
  return f;
}

CompiledFunctor compose_functor(const CompiledFunctor& outer, const CompiledFunctor& inner) {
  if (outer.src.get() != inner.dst.get()) throw internal_error("compose_functor: endpoints do not match");
  CompiledFunctor f;
  f.src = inner.src;
  f.dst = outer.dst;
  f.obj.resize(inner.obj.size());
  f.mor.resize(inner.mor.size());
  for (size_t o = 0; o < inner.obj.size(); ++o) f.obj[o] = outer.obj[inner.obj[o]];
  for (size_t m = 0; m < inner.mor.size(); ++m) f.mor[m] = outer.mor[inner.mor[m]];
  return f;
}

bool functor_equal(const CompiledFunctor& a, const CompiledFunctor& b) {
  return a.src.get() == b.src.get() && a.dst.get() == b.dst.get() && a.obj == b.obj && a.mor == b.mor;
}

// ---------------------------------------------------------------------------
// Wedge and simplicial levels.
// ---------------------------------------------------------------------------

AssemblerSpec wedge_assembler(const std::vector<AssemblerSpec>& parts, const std::vector<std::string>& prefixes) {
  std::vector<std::string> pre = prefixes;
  if (!pre.empty() && pre.size() != parts.size())
    throw structural_error("wedge: one prefix per part is required");
  std::string initial_name = parts.empty() ? std::string("0") : parts[0].initial;
  if (pre.empty()) {
    std::set<std::string> seen{initial_name};
    bool collision = false;
    for (const auto& p : parts) {
      for (const auto& o : p.objects)
        if (o != p.initial && !seen.insert(o).second) collision = true;
      for (const auto& m : p.morphisms)
        if (!seen.insert("mor:" + m.id).second) collision = true;
    }
    pre.assign(parts.size(), "");
    if (collision)
      for (size_t k = 0; k < parts.size(); ++k) pre[k] = "w" + std::to_string(k) + ":";
  }

  AssemblerSpec out;
  out.initial = initial_name;
  out.objects.push_back(initial_name);
  for (size_t k = 0; k < parts.size(); ++k) {
    const AssemblerSpec& p = parts[k];
    auto ro = [&](const std::string& name) -> std::string {
      return name == p.initial ? initial_name : pre[k] + name;
    };
    auto rm = [&](const std::string& id) -> std::string {
      if (id.rfind("id:", 0) == 0) return "id:" + ro(id.substr(3));
      if (id.rfind("ini:", 0) == 0) return "ini:" + ro(id.substr(4));
      return pre[k] + id;
    };
    for (const auto& o : p.objects)
      if (o != p.initial) out.objects.push_back(ro(o));
    for (const auto& m : p.morphisms) out.morphisms.push_back({rm(m.id), ro(m.src), ro(m.dst)});
    for (const auto& t : p.composition) out.composition.push_back({rm(t[0]), rm(t[1]), rm(t[2])});
    for (const auto& c : p.covers) {
      CoverDecl d;
      d.target = ro(c.target);
      for (const auto& f : c.family) d.family.push_back(rm(f));
      out.covers.push_back(std::move(d));
    }
    for (const auto& pb : p.pullbacks)
      out.pullbacks.push_back({rm(pb.f), rm(pb.g), ro(pb.apex), rm(pb.p), rm(pb.q)});
  }
  return out;
}

namespace {

void check_simplicial_identities(const SimplicialAssemblerLevels& L) {
  auto expect = [](const CompiledFunctor& a, const CompiledFunctor& b, const char* name) {
    if (!functor_equal(a, b)) throw internal_error(std::string("simplicial identity failed: ") + name);
  };
  CompiledFunctor id1 = identity_functor(L.level1);
  CompiledFunctor id0 = identity_functor(L.level0);
  expect(compose_functor(L.d0_1, L.s0_0), id0, "d0.s0 = id");
  expect(compose_functor(L.d1_1, L.s0_0), id0, "d1.s0 = id");
  expect(compose_functor(L.d0_1, L.d1_2), compose_functor(L.d0_1, L.d0_2), "d0.d1 = d0.d0");
  expect(compose_functor(L.d0_1, L.d2_2), compose_functor(L.d1_1, L.d0_2), "d0.d2 = d1.d0");
  expect(compose_functor(L.d1_1, L.d2_2), compose_functor(L.d1_1, L.d1_2), "d1.d2 = d1.d1");
  expect(compose_functor(L.d0_2, L.s0_1), id1, "d0.s0 = id (top)");
  expect(compose_functor(L.d1_2, L.s0_1), id1, "d1.s0 = id (top)");
  expect(compose_functor(L.d2_2, L.s0_1), compose_functor(L.s0_0, L.d1_1), "d2.s0 = s0.d1");
  expect(compose_functor(L.d0_2, L.s1_1), compose_functor(L.s0_0, L.d0_1), "d0.s1 = s0.d0");
  expect(compose_functor(L.d1_2, L.s1_1), id1, "d1.s1 = id");
  expect(compose_functor(L.d2_2, L.s1_1), id1, "d2.s1 = id");
  expect(compose_functor(L.s0_1, L.s0_0), compose_functor(L.s1_1, L.s0_0), "s0.s0 = s1.s0");
}

}  // namespace

SimplicialAssemblerLevels constant_simplicial(const AssemblerSpec& c) {
  SimplicialAssemblerLevels L;
  auto site = std::make_shared<const Site>(c);
  L.level0 = L.level1 = L.level2 = site;
  CompiledFunctor id = identity_functor(site);
  L.d0_1 = L.d1_1 = L.s0_0 = L.d0_2 = L.d1_2 = L.d2_2 = L.s0_1 = L.s1_1 = id;
  check_simplicial_identities(L);
  return L;
}

CofiberAssembler cofiber_assembler(const AssemblerSpec& cSpec, const AssemblerSpec& dSpec,
                                   const AssemblerMorphism& F) {
  for (const AssemblerSpec* spec : {&cSpec, &dSpec}) {
    auto reserved = [](const std::string& n) {
      return n.rfind("d1:", 0) == 0 || n.rfind("da:", 0) == 0 || n.rfind("db:", 0) == 0;
    };
    for (const auto& o : spec->objects)
      if (reserved(o)) throw structural_error("object name " + o + " uses a copy prefix reserved here");
    for (const auto& m : spec->morphisms)
      if (reserved(m.id)) throw structural_error("morphism id " + m.id + " uses a copy prefix reserved here");
  }
  CofiberAssembler out;
  auto siteC = std::make_shared<const Site>(cSpec);
  out.siteD = std::make_shared<const Site>(dSpec);
  out.F = compile_functor(out.siteD, siteC, F);

  SimplicialAssemblerLevels& L = out.levels;
  L.level0 = siteC;
  L.level1 = std::make_shared<const Site>(wedge_assembler({cSpec, dSpec}, {"", "d1:"}));
  L.level2 = std::make_shared<const Site>(wedge_assembler({cSpec, dSpec, dSpec}, {"", "da:", "db:"}));

  const Site& C = *siteC;
  const Site& D = *out.siteD;
  auto dname = [&](const std::string& prefix, const std::string& n) { return prefix + n; };

  // Builds the by-name functor that is the identity on the C part and acts on
  // each D copy as directed: to another D copy, to the F image in C, or to the
  // initial object (collapse).
  enum class CopyAction { kToCopy, kToImage, kCollapse };
  auto make_map = [&](const Site& from, const std::vector<std::pair<std::string, CopyAction>>& copies,
                      const std::vector<std::string>& copy_target) {
    AssemblerMorphism m;
    for (int o = 0; o < from.num_objects(); ++o) {
      if (o == from.initial()) continue;
      const std::string& name = from.object_name(o);
      bool handled = false;
      for (size_t k = 0; k < copies.size() && !handled; ++k) {
        const auto& [prefix, action] = copies[k];
        if (name.rfind(prefix, 0) != 0) continue;
        std::string base = name.substr(prefix.size());
        switch (action) {
          case CopyAction::kToCopy:
            m.object_map[name] = dname(copy_target[k], base);
            break;
          case CopyAction::kToImage:
            m.object_map[name] = C.object_name(out.F.apply_obj(D.object_index(base)));
            break;
          case CopyAction::kCollapse:
            m.object_map[name] = cSpec.initial;
            break;
        }
        handled = true;
      }
      if (!handled) m.object_map[name] = name;  // C part
    }
    for (const auto& md : from.spec().morphisms) {
      bool handled = false;
      for (size_t k = 0; k < copies.size() && !handled; ++k) {
        const auto& [prefix, action] = copies[k];
        if (md.id.rfind(prefix, 0) != 0) continue;
        std::string base = md.id.substr(prefix.size());
        switch (action) {
          case CopyAction::kToCopy:
            m.morphism_map[md.id] = dname(copy_target[k], base);
            break;
          case CopyAction::kToImage:
            m.morphism_map[md.id] = C.morphism_name(out.F.apply_mor(D.morphism_index(base)));
            break;
          case CopyAction::kCollapse:
            break;  // forced image
        }
        handled = true;
      }
      if (!handled) m.morphism_map[md.id] = md.id;  // C part
    }
    return m;
  };

  const Site& L1 = *L.level1;
  const Site& L2 = *L.level2;
  L.d0_1 = compile_functor(L.level1, L.level0, make_map(L1, {{"d1:", CopyAction::kToImage}}, {""}));
  L.d1_1 = compile_functor(L.level1, L.level0, make_map(L1, {{"d1:", CopyAction::kCollapse}}, {""}));
  L.d0_2 = compile_functor(L.level2, L.level1,
                           make_map(L2, {{"da:", CopyAction::kToImage}, {"db:", CopyAction::kToCopy}}, {"", "d1:"}));
  L.d1_2 = compile_functor(L.level2, L.level1,
                           make_map(L2, {{"da:", CopyAction::kToCopy}, {"db:", CopyAction::kToCopy}}, {"d1:", "d1:"}));
  L.d2_2 = compile_functor(L.level2, L.level1,
                           make_map(L2, {{"da:", CopyAction::kToCopy}, {"db:", CopyAction::kCollapse}}, {"d1:", ""}));

  AssemblerMorphism s0_0;
  for (const auto& o : cSpec.objects)
    if (o != cSpec.initial) s0_0.object_map[o] = o;
  for (const auto& m : cSpec.morphisms) s0_0.morphism_map[m.id] = m.id;
  L.s0_0 = compile_functor(L.level0, L.level1, s0_0);

  auto embed_copy = [&](const std::string& prefix) {
    AssemblerMorphism m;
    for (const auto& o : cSpec.objects)
      if (o != cSpec.initial) m.object_map[o] = o;
    for (const auto& mm : cSpec.morphisms) m.morphism_map[mm.id] = mm.id;
    for (const auto& o : dSpec.objects)
      if (o != dSpec.initial) m.object_map["d1:" + o] = prefix + o;
    for (const auto& mm : dSpec.morphisms) m.morphism_map["d1:" + mm.id] = prefix + mm.id;
    return m;
  };
  L.s0_1 = compile_functor(L.level1, L.level2, embed_copy("db:"));
  L.s1_1 = compile_functor(L.level1, L.level2, embed_copy("da:"));

  check_simplicial_identities(L);

  AssemblerMorphism embedD;
  for (const auto& o : dSpec.objects)
    if (o != dSpec.initial) embedD.object_map[o] = "d1:" + o;
  for (const auto& m : dSpec.morphisms) embedD.morphism_map[m.id] = "d1:" + m.id;
  out.embedD = compile_functor(out.siteD, L.level1, embedD);

  AssemblerMorphism embedC;
  for (const auto& o : cSpec.objects)
    if (o != cSpec.initial) embedC.object_map[o] = o;
  for (const auto& m : cSpec.morphisms) embedC.morphism_map[m.id] = m.id;
  out.embedC = compile_functor(L.level0, L.level1, embedC);
  return out;
}

AssemblerSpec load_assembler_file(const std::string& path) {
  return parse_assembler_json(read_text_file(path), path);
}

CofiberAssembler load_cofiber_file(const std::string& path) {
  json j = parse_top_object(read_text_file(path), path);
  static const std::vector<std::string> allowed = {"site", "sub", "object_map", "morphism_map"};
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw structural_error(path + ": unknown key " + quoted(item.key()));
  }
  if (!j.contains("site") || !j.contains("sub") || !j.contains("object_map"))
    throw structural_error(path + ": keys 'site', 'sub' and 'object_map' are required");
  AssemblerSpec c = load_assembler_file(sibling_path(path, want_string(j["site"], path + ": 'site'")));
  AssemblerSpec d = load_assembler_file(sibling_path(path, want_string(j["sub"], path + ": 'sub'")));
  AssemblerMorphism F;
  if (!j["object_map"].is_object()) throw structural_error(path + ": 'object_map' must be an object");
  for (const auto& item : j["object_map"].items())
    F.object_map[item.key()] = want_string(item.value(), path + ": object_map entry");
  if (j.contains("morphism_map")) {
    if (!j["morphism_map"].is_object()) throw structural_error(path + ": 'morphism_map' must be an object");
    for (const auto& item : j["morphism_map"].items())
      F.morphism_map[item.key()] = want_string(item.value(), path + ": morphism_map entry");
  }
  return cofiber_assembler(c, d, F);
}

}  // namespace sck
