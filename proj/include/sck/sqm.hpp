#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sck/assembler.hpp"
#include "sck/intlin.hpp"
#include "sck/sc.hpp"
#include "sck/twist.hpp"

namespace sck {

// ---------------------------------------------------------------------------
// Word calculus over a fixed simplicial family of sites.  Letters are formal
// generators in degree 0 or 1; words multiply by concatenation and are
// compared through a directed rewrite system plus a computable abelian
// invariant (the "shadow").  Two generator alphabets share the machinery:
//
//   level alphabet:  Obj0  [A0]            degree 0
//                    Obj1  [A1]            degree 1
//                    Weq0  [A0 ~> B0]      degree 1   (weak equivalence span)
//
//   cell alphabet:   Obj0  [A0]            degree 0
//                    Weq1  [A1 ~> B1]      degree 1
//                    Cof   [A0 >-> B0 ->> Q0]  degree 1 (cofibration + quotient)
// ---------------------------------------------------------------------------

enum class GenTag { Obj0, Obj1, Weq0, Weq1, Cof };

struct SqmGenerator {
  GenTag tag = GenTag::Obj0;
  TwObject obj;    // Obj0 / Obj1 payload
  SCSpan span;     // Weq0 / Weq1 payload; for Cof, the cofibration A0 >-> B0
  TwObject quot;   // Cof only: the complement Q0 of the cofibration image
  bool operator==(const SqmGenerator&) const = default;
};

struct SqmLetter {
  SqmGenerator gen;
  int exp = 1;  // +1 or -1
  bool operator==(const SqmLetter&) const = default;
};

struct SqmWord {
  int degree = 1;
  std::vector<SqmLetter> letters;
  bool operator==(const SqmWord&) const = default;
};

// ---------------------------------------------------------------------------
// Context: the simplicial levels, the declared degree-0 part basis, and the
// precomputed quotient lattice used by the shadow's level-1 content vector.
// ---------------------------------------------------------------------------

struct SqmContext {
  SimplicialAssemblerLevels levels;

  // Extra structure when the levels come from a quotient-by-inclusion
  // construction; null/empty for constant levels.
  std::shared_ptr<const Site> siteD;
  std::optional<CompiledFunctor> funcD;    // D -> level 0
  std::optional<CompiledFunctor> embedD;   // D -> level 1

  std::vector<int> s0_objs, s1_objs;  // noninitial object indices, levels 0/1
  std::vector<int> s0_pos, s1_pos;    // object index -> basis position or -1
  std::vector<char> degenerate_l1;    // level-1 object lies in the image of s0

  // Z^{S1} modulo: degenerate parts, the face-map additivity rows from
  // level-2 parts, and one row per pairwise-disjoint covering family of a
  // level-1 part.  Level-1 word content is compared inside this quotient.
  AbGroup q1;

  int n0() const { return static_cast<int>(s0_objs.size()); }
  int n1() const { return static_cast<int>(s1_objs.size()); }
  const Site& l0() const { return *levels.level0; }
  const Site& l1() const { return *levels.level1; }

  std::vector<Int> vec0(const TwObject& a) const;  // part counts over S0
  std::vector<Int> vec1(const TwObject& a) const;  // part counts over S1
};

// `declared_s0`, when nonempty, must list exactly the noninitial level-0
// objects (the free part basis); mismatches throw structural_error.
SqmContext make_sqm_context(const AssemblerSpec& constant_site,
                            const std::vector<std::string>& declared_s0 = {});
SqmContext make_sqm_context(const CofiberAssembler& cof,
                            const std::vector<std::string>& declared_s0 = {});

// ---------------------------------------------------------------------------
// Generator construction (payloads validated against the context's levels;
// weak-equivalence payloads are stored in canonical form).
// ---------------------------------------------------------------------------

SqmGenerator make_obj0(const SqmContext& ctx, TwObject a);
SqmGenerator make_obj1(const SqmContext& ctx, TwObject a);
SqmGenerator make_weq0(const SqmContext& ctx, const SCSpan& s);
SqmGenerator make_weq1(const SqmContext& ctx, const SCSpan& s);
SqmGenerator make_cof(const SqmContext& ctx, const SCSpan& cofibration, const TwObject& quotient);
// The two-part block swap  t | s  ~>  s | t  (level-0 object indices).
SqmGenerator tau_generator(const SqmContext& ctx, int s_obj, int t_obj);

int generator_degree(const SqmGenerator& g);
SqmWord make_word(std::vector<SqmLetter> letters);
SqmWord word_inverse(const SqmWord& w);
SqmWord word_concat(const SqmWord& a, const SqmWord& b);
std::string word_to_string(const SqmContext& ctx, const SqmWord& w);

// Recognizers.  A block swap is a weak equivalence B | A ~> A | B whose
// canonical presentation permutes two complementary blocks with identity
// components; an atom is the two-single-part case.
std::optional<std::pair<TwObject, TwObject>> is_block_swap(const SqmContext& ctx,
                                                           const SqmGenerator& g);
std::optional<std::pair<int, int>> is_tau_atom(const SqmContext& ctx, const SqmGenerator& g);

// ---------------------------------------------------------------------------
// The abelian shadow.  Equal words always have equal shadows; the converse is
// not claimed.  Components:
//   content:   level-1 part counts reduced into the q1 quotient,
//   boundary:  exact value of the word's boundary in the degree-0 group
//              (free nilpotency-class-2 group on S0),
//   residue:   F2 vector over unordered S0 pairs combining per-letter data
//              with positional interleaving; insensitive to every rewrite.
// ---------------------------------------------------------------------------

struct Nil2Value {
  std::vector<Int> a;      // exponent sums over S0
  std::vector<Int> kappa;  // collected commutator coordinates, pairs s > t
  bool operator==(const Nil2Value&) const = default;
  bool is_zero() const;
};

struct AbelianShadow {
  std::vector<Int> content;      // canonical q1 coordinates
  Nil2Value boundary_value;      // exact degree-0 value of the boundary
  std::vector<uint8_t> residue;  // F2 over pairs s <= t
  bool operator==(const AbelianShadow&) const = default;
};

Nil2Value nil2_value(const SqmContext& ctx, const SqmWord& degree0_word);
AbelianShadow shadow(const SqmContext& ctx, const SqmWord& w);

// ---------------------------------------------------------------------------
// Structure maps and rewriting.
// ---------------------------------------------------------------------------

// Degree 1 -> degree 0, letterwise:
//   [A1]            |-> [d0 A1]^-1 [d1 A1]
//   [A0 ~> B0]      |-> [B0]^-1 [A0]
//   [A1 ~> B1]      |-> [d0 B1]^-1 [d1 A1]
//   [A0 >-> B0 ->> Q0] |-> [B0]^-1 [Q0] [A0]
// Degree-0 output is expanded into single-part letters.
SqmWord boundary(const SqmContext& ctx, const SqmWord& w);

// Bilinear pairing through abelianization: on basis parts s, t it yields the
// block-swap atom  t | s ~> s | t.
SqmWord bracket(const SqmContext& ctx, const SqmWord& u, const SqmWord& v);

// Degree-0 action on degree 1:  act(w1, w0) = w1 * <w0, boundary(w1)>.
SqmWord act(const SqmContext& ctx, const SqmWord& w1, const SqmWord& w0);

// Directed rewriting to a fixpoint: degenerate/identity letters erase,
// degenerate parts are pulled out of level-1 objects (emitting central swap
// atoms), identity prefixes strip from weak equivalences, block swaps expand
// into atoms, atoms commute to the right end and sort, adjacent inverse pairs
// cancel, and adjacent same-sign letters of like kind merge into coproducts.
// Every step is checked to preserve the shadow (internal_error otherwise).
// Confluence is not claimed; termination is by a lexicographic measure.
SqmWord normalize(const SqmContext& ctx, const SqmWord& w);

enum class SqmEq { Equal, Different, Unknown };
// Degree 0 is decided exactly; degree 1 is literal-after-normalize, else
// shadow comparison, else Unknown.
SqmEq word_equal(const SqmContext& ctx, const SqmWord& a, const SqmWord& b);

// Exact two-letter coproduct identity for adjacent same-tag, same-sign
// letters (level-1 objects or level-0 equivalences): returns the replacement
// sequence, i.e. the combined letter together with its central swap atoms.
std::vector<SqmLetter> merge_same_sign(const SqmContext& ctx, const SqmLetter& x,
                                       const SqmLetter& y);

// ---------------------------------------------------------------------------
// Translation between the two alphabets.  The cell-to-level direction needs a
// splitting (a weak equivalence Q0 | A0 ~> B0) for every cofibration letter;
// splittings are fixture data, checked against the defining diagrams before
// use, with a canonical choice available for every cofibration span.
// ---------------------------------------------------------------------------

struct CofSplitting {
  SCSpan cofibration;  // A0 >-> B0
  TwObject quotient;   // Q0
  SCSpan alpha;        // weak equivalence Q0 | A0 ~> B0
};

struct SplittingTable {
  std::vector<CofSplitting> entries;
};

SCSpan canonical_splitting(const SqmContext& ctx, const SCSpan& cofibration,
                           const TwObject& quotient);
// alpha is a weak equivalence making the inclusion and collapse triangles
// commute up to span equivalence; throws axiom_error with a witness if not.
void check_splitting(const SqmContext& ctx, const CofSplitting& s);
// For every nested pair of table entries (A >-> B >-> C with the composite
// and quotient sequences also present) the square of splittings must commute
// up to span equivalence.
void check_splitting_squares(const SqmContext& ctx, const SplittingTable& table);
const CofSplitting* find_splitting(const SplittingTable& table, const SCSpan& cofibration,
                                   const TwObject& quotient);

// Level alphabet -> cell alphabet:
//   [A0] |-> [A0],  [A1] |-> [A1 ~> A1] (identity),  [A0 ~> B0] |-> [s0 A0 ~> s0 B0].
SqmWord translate_g(const SqmContext& ctx, const SqmWord& w);
// Cell alphabet -> level alphabet:
//   [A0] |-> [A0],  [A1 ~> B1] |-> [B1][d1 A1 ~> d1 B1],
//   [A0 >-> B0 ->> Q0] |-> [alpha: Q0 | A0 ~> B0]  (alpha from the table).
SqmWord translate_f(const SqmContext& ctx, const SqmWord& w, const SplittingTable& table);

// ---------------------------------------------------------------------------
// JSON: a word is a list of {tag, payload, exponent}.
// ---------------------------------------------------------------------------

nlohmann::json word_to_json(const SqmContext& ctx, const SqmWord& w);
SqmWord parse_word_json(const SqmContext& ctx, const nlohmann::json& j);

}  // namespace sck
