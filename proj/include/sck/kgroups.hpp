#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sck/assembler.hpp"
#include "sck/intlin.hpp"
#include "sck/sqm.hpp"

namespace sck {

// ---------------------------------------------------------------------------
// Degree-zero group of a site: free abelian on the noninitial objects modulo
// one relation per declared covering family (covered object minus the sum of
// the covering sources), diagonalized exactly over the integers.
// ---------------------------------------------------------------------------

struct K0Presentation {
  std::vector<std::string> generators;      // noninitial object ids, site order
  std::vector<std::vector<Int>> relations;  // rows over the generators
  AbGroup group;

  std::string pretty() const { return group.pretty(); }
};

K0Presentation k0(const AssemblerSpec& spec);

// Part counts of a tuple object over the presentation's generators.
std::vector<Int> k0_vector(const K0Presentation& p, const Site& site, const TwObject& a);

// ---------------------------------------------------------------------------
// Degree-one representatives.
// ---------------------------------------------------------------------------

// One leg: a weak equivalence f: a0 ~> b0 | d1(v1) whose codomain literally
// ends with the face image of v1.
struct CurlyElement {
  SCSpan f;     // canonical weak-equivalence presentation
  TwObject b0;  // the codomain parts not contributed by v1
  TwObject v1;  // level-1 object

  bool operator==(const CurlyElement&) const = default;
};

// Two legs sharing their frame a0, b0, with equal face images d0(v1) = d0(w1).
// Represents the degree-1 word [first.f]^-1 [v1]^-1 [w1] [second.f].
struct K1Pair {
  CurlyElement first, second;

  bool operator==(const K1Pair&) const = default;
};

// Validating constructors.
CurlyElement make_curly(const SqmContext& ctx, const SCSpan& f, const TwObject& b0,
                        const TwObject& v1);
K1Pair make_k1_pair(const SqmContext& ctx, const CurlyElement& first, const CurlyElement& second);
K1Pair trivial_k1_pair(const SqmContext& ctx);

SqmWord pair_word(const SqmContext& ctx, const K1Pair& p);

// Sum of two representatives, and their composite when y's frame target is
// x's frame source.
struct CurlyProduct {
  K1Pair coproduct;
  std::optional<K1Pair> composition;
};

CurlyProduct curly_product(const SqmContext& ctx, const K1Pair& x, const K1Pair& y);

// Canonical representative of a degree-1 word with exactly trivial boundary:
// absorbs central swap atoms into a ledger, sorts the word into the
// four-bucket form (inverse equivalence, inverse object, object,
// equivalence), merges each bucket, stabilizes the two object slots onto a
// common face image, pads the equivalences onto a common frame, matches the
// boundary equation by the lexicographically least parts permutation, and
// absorbs the leftover central cost into the result.  The output's word is
// shadow-equal to the input.
K1Pair canonical_k1(const SqmContext& ctx, const SqmWord& w);

// ---------------------------------------------------------------------------
// Relative representatives over a quotient-by-inclusion context.
// ---------------------------------------------------------------------------

struct RelativeK1Quad {
  TwObject A, B;  // level-0 objects of the base site
  TwObject C, D;  // objects of the subsite
  SCSpan f, g;    // the two stripped legs (base-level spans)

  bool operator==(const RelativeK1Quad&) const = default;
};

// Strips every index position whose two parts both live in the base copy or
// both in the subsite copy, leaving only the mixed data.  Requires the
// context's subsite functor to be an inclusion.
RelativeK1Quad relative_k1(const SqmContext& ctx, const K1Pair& p);

// The degree-1 word a quad stands for, with its subsite objects re-embedded
// into the level-1 alphabet; shadow-equal to the word of the pair it came
// from.
SqmWord quad_word(const SqmContext& ctx, const RelativeK1Quad& q);

// Class of [D] - [C] over the subsite, in generator coordinates and reduced
// canonical coordinates.
struct BoundaryClass {
  std::vector<Int> generator_coords;
  std::vector<Int> reduced;
};

BoundaryClass boundary_k1(const RelativeK1Quad& q, const K0Presentation& k0d, const Site& siteD);

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

nlohmann::json k0_to_json(const K0Presentation& p);
nlohmann::json pair_to_json(const SqmContext& ctx, const K1Pair& p);
K1Pair parse_pair_json(const SqmContext& ctx, const nlohmann::json& j);
nlohmann::json quad_to_json(const SqmContext& ctx, const RelativeK1Quad& q);
RelativeK1Quad parse_quad_json(const SqmContext& ctx, const nlohmann::json& j);

}  // namespace sck
