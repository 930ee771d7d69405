#include "sck/sc.hpp"

#include <algorithm>
#include <set>

#include "sck/error.hpp"

namespace sck {

namespace {

// Unique isomorphism u: a1.parts[i] -> a2.parts[j] with legs1 = legs2 ∘ u, if
// one exists.  Uniqueness follows from every site morphism being monic.
int matching_component(const Site& site, const SCSpan& s1, const SCSpan& s2, int i, int j) {
  if (s1.subleg.set_map[i] != s2.subleg.set_map[j]) return -1;
  if (s1.moveleg.set_map[i] != s2.moveleg.set_map[j]) return -1;
  for (int u : site.hom(s1.apex.parts[i], s2.apex.parts[j])) {
    if (!site.is_iso(u)) continue;
    if (site.compose(s2.subleg.components[j], u) != s1.subleg.components[i]) continue;
    if (site.compose(s2.moveleg.components[j], u) != s1.moveleg.components[i]) continue;
    return u;
  }
  return -1;
}

bool match_apexes(const std::vector<std::vector<int>>& candidates, size_t i, std::vector<char>& used) {
  if (i == candidates.size()) return true;
  for (int j : candidates[i]) {
    if (used[j]) continue;
    used[j] = 1;
    if (match_apexes(candidates, i + 1, used)) return true;
    used[j] = 0;
  }
  return false;
}

bool injective_index_map(const std::vector<int>& set_map, int dst_size) {
  std::vector<char> hit(dst_size, 0);
  for (int j : set_map) {
    if (hit[j]) return false;
    hit[j] = 1;
  }
  return true;
}

std::string span_label(const Site& site, const SCSpan& s) {
  return tw_to_string(site, s.src) + " <- " + tw_to_string(site, s.apex) + " -> " +
         tw_to_string(site, s.dst);
}

}  // namespace

void validate_span(const Site& site, const SCSpan& s) {
  validate_tw(site, s.subleg);
  validate_tw(site, s.moveleg);
  if (s.subleg.src != s.apex || s.moveleg.src != s.apex)
    throw structural_error("span legs must share the apex");
  if (s.subleg.dst != s.src) throw structural_error("span left leg must end at the source");
  if (s.moveleg.dst != s.dst) throw structural_error("span right leg must end at the target");
  TwClassification left = classify(site, s.subleg);
  if (!left.sub) throw structural_error("span left leg must be a sub-map");
  TwClassification right = classify(site, s.moveleg);
  if (!right.move) throw structural_error("span right leg must be a move");
}

SCSpan sc_identity(const Site& site, const TwObject& a) {
  SCSpan s;
  s.src = s.dst = s.apex = a;
  s.subleg = s.moveleg = tw_identity(site, a);
  return s;
}

bool sc_equivalent(const Site& site, const SCSpan& s1, const SCSpan& s2) {
  if (s1.src != s2.src || s1.dst != s2.dst)
    throw structural_error("sc_equivalent: spans must share source and target");
  if (s1.apex.size() != s2.apex.size()) return false;
  std::vector<std::vector<int>> candidates(s1.apex.size());
  for (int i = 0; i < s1.apex.size(); ++i) {
    for (int j = 0; j < s2.apex.size(); ++j)
      if (matching_component(site, s1, s2, i, j) >= 0) candidates[i].push_back(j);
    if (candidates[i].empty()) return false;
  }
  std::vector<char> used(s2.apex.size(), 0);
  return match_apexes(candidates, 0, used);
}

SCSpan sc_compose(const Site& site, const SCSpan& f, const SCSpan& g) {
  if (f.dst != g.src) throw structural_error("sc_compose: target of f must equal source of g");
  TwPullback pb = tw_pullback(site, f.moveleg, g.subleg);
  SCSpan out;
  out.src = f.src;
  out.dst = g.dst;
  out.apex = pb.apex;
  out.subleg = tw_compose(site, f.subleg, pb.p);
  out.moveleg = tw_compose(site, g.moveleg, pb.q);
  // The fibre product of a sub-map stays a sub-map and the fibre product of a
  // move stays a move; a composite violating that indicates a pullback bug.
  if (!classify(site, out.subleg).sub || !classify(site, out.moveleg).move)
    throw internal_error("sc_compose: composite legs lost their defining properties");
  return out;
}

SCClass sc_classify(const Site& site, const SCSpan& s) {
  validate_span(site, s);
  SCClass out;
  bool covering = classify(site, s.subleg).cover;
  bool injective = injective_index_map(s.moveleg.set_map, s.dst.size());
  bool bijective = injective && s.apex.size() == s.dst.size();
  out.is_cofibration = covering && injective;
  out.is_weak_equivalence = covering && bijective;
  if (out.is_weak_equivalence) {
    SCSpan canon;
    canon.src = s.src;
    canon.dst = s.dst;
    canon.apex = s.dst;
    canon.moveleg = tw_identity(site, s.dst);
    canon.subleg = tw_compose(site, s.subleg, tw_inverse(site, s.moveleg));
    if (!sc_equivalent(site, s, canon))
      throw internal_error("sc_classify: canonical presentation is not equivalent to its input");
    out.canonical = std::move(canon);
  }
  return out;
}

SCSpan sc_coproduct(const Site& site, const SCSpan& f, const SCSpan& g) {
  validate_span(site, f);
  validate_span(site, g);
  SCSpan out;
  out.src = tw_coproduct(f.src, g.src);
  out.dst = tw_coproduct(f.dst, g.dst);
  out.apex = tw_coproduct(f.apex, g.apex);
  out.subleg = tw_coproduct_mor(f.subleg, g.subleg);
  out.moveleg = tw_coproduct_mor(f.moveleg, g.moveleg);
  validate_span(site, out);
  return out;
}

SCSpan sc_permutation(const Site& site, const TwObject& src, const std::vector<int>& perm) {
  validate_tw(site, src);
  if (static_cast<int>(perm.size()) != src.size())
    throw structural_error("sc_permutation: permutation length does not match the part count");
  std::vector<char> used(src.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= src.size() || used[p])
      throw structural_error("sc_permutation: index map is not a permutation");
    used[p] = 1;
  }
  SCSpan out;
  out.src = src;
  out.dst.parts.assign(src.size(), -1);
  for (int i = 0; i < src.size(); ++i) out.dst.parts[perm[i]] = src.parts[i];
  out.apex = out.dst;
  out.moveleg = tw_identity(site, out.dst);
  out.subleg.src = out.dst;
  out.subleg.dst = src;
  out.subleg.set_map.assign(src.size(), -1);
  out.subleg.components.assign(src.size(), -1);
  for (int i = 0; i < src.size(); ++i) {
    out.subleg.set_map[perm[i]] = i;
    out.subleg.components[perm[i]] = site.identity(src.parts[i]);
  }
  validate_span(site, out);
  return out;
}

namespace {
void check_positions(const TwObject& whole, const std::vector<int>& positions) {
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (positions[k] < 0 || positions[k] >= whole.size())
      throw structural_error("part position out of range");
    if (k > 0 && positions[k] <= positions[k - 1])
      throw structural_error("part positions must be strictly increasing");
  }
}
}  // namespace

SCSpan sc_part_inclusion(const Site& site, const TwObject& whole, const std::vector<int>& positions) {
  validate_tw(site, whole);
  check_positions(whole, positions);
  SCSpan out;
  for (int p : positions) out.src.parts.push_back(whole.parts[p]);
  out.dst = whole;
  out.apex = out.src;
  out.subleg = tw_identity(site, out.src);
  out.moveleg.src = out.src;
  out.moveleg.dst = whole;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    out.moveleg.set_map.push_back(positions[k]);
    out.moveleg.components.push_back(site.identity(out.src.parts[k]));
  }
  validate_span(site, out);
  return out;
}

SCSpan sc_collapse(const Site& site, const TwObject& whole, const std::vector<int>& positions) {
  validate_tw(site, whole);
  check_positions(whole, positions);
  SCSpan out;
  out.src = whole;
  for (int p : positions) out.dst.parts.push_back(whole.parts[p]);
  out.apex = out.dst;
  out.moveleg = tw_identity(site, out.dst);
  out.subleg.src = out.dst;
  out.subleg.dst = whole;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    out.subleg.set_map.push_back(positions[k]);
    out.subleg.components.push_back(site.identity(out.dst.parts[k]));
  }
  validate_span(site, out);
  return out;
}

SaturationReport check_saturation(const Site& site,
                                  const std::vector<std::pair<SCSpan, SCSpan>>& samples) {
  SaturationReport report;
  report.condition_g = site.condition_g();
  report.direction_two_required = report.condition_g;
  for (const auto& [f, g] : samples) {
    SCSpan h = sc_compose(site, f, g);
    bool fw = sc_classify(site, f).is_weak_equivalence;
    bool gw = sc_classify(site, g).is_weak_equivalence;
    bool hw = sc_classify(site, h).is_weak_equivalence;
    ++report.pairs_checked;
    if (hw && fw && !gw) {
      report.direction_one_ok = false;
      if (report.witness.empty())
        report.witness = "two-of-three failed forward: f = " + span_label(site, f) +
                         ", g = " + span_label(site, g);
    }
    if (hw && gw && !fw) {
      report.direction_two_ok = false;
      if (report.direction_two_required && report.witness.empty())
        report.witness = "two-of-three failed backward: f = " + span_label(site, f) +
                         ", g = " + span_label(site, g);
    }
  }
  return report;
}

std::vector<SCSpan> enumerate_spans(const Site& site, const TwObject& src, const TwObject& dst,
                                    int max_apex_parts, std::size_t budget) {
  std::vector<int> pool;
  for (int o = 0; o < site.num_objects(); ++o)
    if (o != site.initial()) pool.push_back(o);
  std::vector<SCSpan> out;
  std::vector<TwObject> apexes;
  apexes.emplace_back();
  for (size_t head = 0; head < apexes.size(); ++head) {
    TwObject apex = apexes[head];
    if (apex.size() < max_apex_parts) {
      for (int o : pool) {
        TwObject bigger = apex;
        bigger.parts.push_back(o);
        apexes.push_back(bigger);
      }
    }
    std::vector<TwMorphism> subs;
    for (const TwMorphism& m : hom_set(site, apex, src))
      if (classify(site, m).sub) subs.push_back(m);
    std::vector<TwMorphism> moves;
    for (const TwMorphism& m : hom_set(site, apex, dst))
      if (classify(site, m).move) moves.push_back(m);
    for (const TwMorphism& p : subs) {
      for (const TwMorphism& q : moves) {
        if (out.size() >= budget) throw structural_error("enumerate_spans: budget exceeded");
        SCSpan s;
        s.src = src;
        s.dst = dst;
        s.apex = apex;
        s.subleg = p;
        s.moveleg = q;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

nlohmann::json tw_object_to_json(const Site& site, const TwObject& a) {
  nlohmann::json j = nlohmann::json::array();
  for (int o : a.parts) j.push_back(site.object_name(o));
  return j;
}

TwObject parse_tw_object_json(const Site& site, const nlohmann::json& j) {
  if (!j.is_array()) throw structural_error("a twisted object must be an array of object names");
  TwObject a;
  for (const auto& entry : j) {
    if (!entry.is_string()) throw structural_error("twisted object entries must be strings");
    int o = site.object_index(entry.get<std::string>());
    if (o == site.initial())
      throw structural_error("twisted objects may not list the initial object");
    a.parts.push_back(o);
  }
  return a;
}

nlohmann::json tw_morphism_to_json(const Site& site, const TwMorphism& m) {
  nlohmann::json j;
  j["set_map"] = m.set_map;
  nlohmann::json comps = nlohmann::json::array();
  for (int c : m.components) comps.push_back(site.morphism_name(c));
  j["components"] = comps;
  return j;
}

TwMorphism parse_tw_morphism_json(const Site& site, const nlohmann::json& j, const TwObject& src,
                                  const TwObject& dst) {
  if (!j.is_object() || !j.contains("set_map") || !j.contains("components"))
    throw structural_error("a twisted morphism needs 'set_map' and 'components'");
  for (const auto& kv : j.items())
    if (kv.key() != "set_map" && kv.key() != "components")
      throw structural_error("unknown twisted-morphism key '" + kv.key() + "'");
  TwMorphism m;
  m.src = src;
  m.dst = dst;
  for (const auto& entry : j.at("set_map")) {
    if (!entry.is_number_integer()) throw structural_error("set_map entries must be integers");
    m.set_map.push_back(entry.get<int>());
  }
  for (const auto& entry : j.at("components")) {
    if (!entry.is_string()) throw structural_error("component entries must be morphism names");
    m.components.push_back(site.morphism_index(entry.get<std::string>()));
  }
  validate_tw(site, m);
  return m;
}

nlohmann::json span_to_json(const Site& site, const SCSpan& s) {
  nlohmann::json j;
  j["source"] = tw_object_to_json(site, s.src);
  j["target"] = tw_object_to_json(site, s.dst);
  j["apex"] = tw_object_to_json(site, s.apex);
  j["sub_leg"] = tw_morphism_to_json(site, s.subleg);
  j["move_leg"] = tw_morphism_to_json(site, s.moveleg);
  return j;
}

SCSpan parse_span_json(const Site& site, const nlohmann::json& j) {
  if (!j.is_object()) throw structural_error("a span must be a JSON object");
  static const std::set<std::string> keys = {"source", "target", "apex", "sub_leg", "move_leg"};
  for (const auto& kv : j.items())
    if (!keys.count(kv.key())) throw structural_error("unknown span key '" + kv.key() + "'");
  for (const std::string& k : keys)
    if (!j.contains(k)) throw structural_error("span is missing key '" + k + "'");
  SCSpan s;
  s.src = parse_tw_object_json(site, j.at("source"));
  s.dst = parse_tw_object_json(site, j.at("target"));
  s.apex = parse_tw_object_json(site, j.at("apex"));
  s.subleg = parse_tw_morphism_json(site, j.at("sub_leg"), s.apex, s.src);
  s.moveleg = parse_tw_morphism_json(site, j.at("move_leg"), s.apex, s.dst);
  validate_span(site, s);
  return s;
}

}  // namespace sck
