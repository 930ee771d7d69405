#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sck/assembler.hpp"
#include "sck/twist.hpp"

namespace sck {

// A morphism src ⇝ dst presented by a two-legged diagram
//   src ← apex → dst
// whose left leg has pairwise-disjoint components (a sub-map) and whose right
// leg has invertible components (a move).  Two presentations describe the same
// morphism when an apex isomorphism commutes with both legs; equality of that
// kind is tested by sc_equivalent, not by operator==.
struct SCSpan {
  TwObject src;
  TwObject dst;
  TwObject apex;
  TwMorphism subleg;   // apex -> src
  TwMorphism moveleg;  // apex -> dst
  bool operator==(const SCSpan&) const = default;
};

// Classification of a span.  A cofibration has a covering left leg and an
// injective right index map; a weak equivalence has a covering left leg and a
// bijective right index map.  Every weak equivalence admits a unique
// presentation whose apex equals the target and whose right leg is the
// identity; `canonical` holds it when is_weak_equivalence is true.
struct SCClass {
  bool is_cofibration = false;
  bool is_weak_equivalence = false;
  std::optional<SCSpan> canonical;
};

// Result of the two-of-three audit over a list of composable span pairs.
// Direction one (gf and f weak equivalences imply g is) must hold over any
// valid site.  Direction two (gf and g imply f) is only guaranteed when the
// site passes the refinement condition reported by check_condition_g, so it
// is required exactly when `direction_two_required` is set; the flag
// `direction_two_ok` still records what the samples showed either way.
struct SaturationReport {
  int pairs_checked = 0;
  bool condition_g = false;
  bool direction_one_ok = true;
  bool direction_two_required = false;
  bool direction_two_ok = true;
  std::string witness;

  bool ok() const { return direction_one_ok && (!direction_two_required || direction_two_ok); }
};

// Structural validity: legs share the apex, end on src/dst, left leg is a
// sub-map, right leg is a move.  Throws structural_error otherwise.
void validate_span(const Site& site, const SCSpan& s);

SCSpan sc_identity(const Site& site, const TwObject& a);

// True iff some apex isomorphism carries s1's legs onto s2's.  Requires equal
// source and target objects.
bool sc_equivalent(const Site& site, const SCSpan& s1, const SCSpan& s2);

// Composite of f: A ⇝ B and g: B ⇝ C via the fibre product of f's right leg
// with g's left leg.
SCSpan sc_compose(const Site& site, const SCSpan& f, const SCSpan& g);

SCClass sc_classify(const Site& site, const SCSpan& s);

// Block sum of two spans: (a | c) ⇝ (b | d) acting independently on the two
// summands.
SCSpan sc_coproduct(const Site& site, const SCSpan& f, const SCSpan& g);

// The permutation weak equivalence src ⇝ dst where dst receives src part i at
// position perm[i] (identity components).
SCSpan sc_permutation(const Site& site, const TwObject& src, const std::vector<int>& perm);

// The inclusion of the parts of `whole` selected by `positions` (strictly
// increasing) into `whole`.
SCSpan sc_part_inclusion(const Site& site, const TwObject& whole, const std::vector<int>& positions);

// The collapse of `whole` onto the parts selected by `positions` (strictly
// increasing); the unselected parts map nowhere.
SCSpan sc_collapse(const Site& site, const TwObject& whole, const std::vector<int>& positions);

SaturationReport check_saturation(const Site& site,
                                  const std::vector<std::pair<SCSpan, SCSpan>>& samples);

// Every span src ⇝ dst whose apex uses at most max_apex_parts parts, each a
// noninitial site object.  Spans are emitted in a deterministic order; the
// budget caps the raw candidate count before filtering.
std::vector<SCSpan> enumerate_spans(const Site& site, const TwObject& src, const TwObject& dst,
                                    int max_apex_parts, std::size_t budget = 200000);

nlohmann::json tw_object_to_json(const Site& site, const TwObject& a);
TwObject parse_tw_object_json(const Site& site, const nlohmann::json& j);
nlohmann::json tw_morphism_to_json(const Site& site, const TwMorphism& m);
TwMorphism parse_tw_morphism_json(const Site& site, const nlohmann::json& j, const TwObject& src,
                                  const TwObject& dst);

nlohmann::json span_to_json(const Site& site, const SCSpan& s);
SCSpan parse_span_json(const Site& site, const nlohmann::json& j);

}  // namespace sck
