#pragma once

#include <string>
#include <vector>

#include "sck/assembler.hpp"

namespace sck {

// ---------------------------------------------------------------------------
// Formal finite coproducts of noninitial site objects and the morphisms
// between them: a set map on the parts plus one site morphism per part.
// The coproduct is strictly associative (vector concatenation).
// ---------------------------------------------------------------------------

struct TwObject {
  std::vector<int> parts;  // noninitial site object indices
  bool operator==(const TwObject&) const = default;
  int size() const { return static_cast<int>(parts.size()); }
};

struct TwMorphism {
  TwObject src, dst;
  std::vector<int> set_map;     // src part position -> dst part position
  std::vector<int> components;  // site morphism src.parts[i] -> dst.parts[set_map[i]]
  bool operator==(const TwMorphism&) const = default;
};

void validate_tw(const Site& s, const TwObject& a);
void validate_tw(const Site& s, const TwMorphism& f);
std::string tw_to_string(const Site& s, const TwObject& a);
std::string tw_to_string(const Site& s, const TwMorphism& f);

TwMorphism tw_identity(const Site& s, const TwObject& a);
TwMorphism tw_compose(const Site& s, const TwMorphism& g, const TwMorphism& f);

// Isomorphisms: bijective index map with invertible components.
bool tw_is_iso(const Site& s, const TwMorphism& m);
TwMorphism tw_inverse(const Site& s, const TwMorphism& m);
TwObject tw_coproduct(const TwObject& a, const TwObject& b);
TwMorphism tw_coproduct_mor(const TwMorphism& f, const TwMorphism& g);

// sub: parts with a common target have pairwise-disjoint images.
// cover: sub, and over every target part the component family is a cover.
// move: every component is invertible.
struct TwClassification {
  bool sub = false;
  bool cover = false;
  bool move = false;
};
TwClassification classify(const Site& s, const TwMorphism& f);

// Fiberwise limit square: parts of the apex are the matching part pairs
// (f part i outer, g part k inner) whose site pullback is noninitial.
struct TwPullback {
  TwObject apex;
  TwMorphism p, q;  // p: apex -> f.src, q: apex -> g.src
};
TwPullback tw_pullback(const Site& s, const TwMorphism& f, const TwMorphism& g);

// All morphisms a -> b, ordered deterministically.
std::vector<TwMorphism> hom_set(const Site& s, const TwObject& a, const TwObject& b);
// All h: u.src -> v.src with v . h = u (morphisms over the shared base).
std::vector<TwMorphism> hom_over(const Site& s, const TwMorphism& u, const TwMorphism& v);

// ---------------------------------------------------------------------------
// Base change along sigma and its right adjoint.  sigma must have invertible
// components (its set map is unrestricted).  Slice objects are represented by
// their structure morphism into the base.
// ---------------------------------------------------------------------------

// sigma*(q): the object of the pullback of q along sigma, as a leg over
// sigma.src; equals tw_pullback(sigma, q).p.
TwMorphism sigma_star(const Site& s, const TwMorphism& sigma, const TwMorphism& q);
// Action of sigma* on t: q1 -> q2 over the base.
TwMorphism sigma_star_mor(const Site& s, const TwMorphism& sigma, const TwMorphism& q1,
                          const TwMorphism& q2, const TwMorphism& t);

// The right adjoint on objects: p over sigma.src |-> leg over sigma.dst.
// Over a target part with empty fiber the result is that part itself; over a
// nonempty fiber it is the fiberwise iterated pullback of the restrictions.
TwMorphism dependent_product(const Site& s, const TwMorphism& sigma, const TwMorphism& p);
TwMorphism dependent_product_mor(const Site& s, const TwMorphism& sigma, const TwMorphism& p1,
                                 const TwMorphism& p2, const TwMorphism& t);

// Adjunction structure maps.
TwMorphism dp_unit(const Site& s, const TwMorphism& sigma, const TwMorphism& q);    // q -> Pi sigma* q
TwMorphism dp_counit(const Site& s, const TwMorphism& sigma, const TwMorphism& p);  // sigma* Pi p -> p

// Functor application with collapse: parts sent to the initial object vanish.
TwObject apply_functor(const CompiledFunctor& F, const TwObject& a);
TwMorphism apply_functor(const CompiledFunctor& F, const TwMorphism& f);

}  // namespace sck
