#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sck/rational.hpp"

namespace sck {

// ---------------------------------------------------------------------------
// Exact real arithmetic over a declared finite basis.  Every real that enters
// a computation is a rational coordinate vector over the basis; the basis is
// declared rationally independent by the user (recorded, not proved).
// Equality is coordinate equality.  Ordering is decided by exact interval
// arithmetic over the stated decimal approximations, starting coarse and
// refining on demand up to the configured digit ceiling.
// ---------------------------------------------------------------------------

struct RealBasisElement {
  std::string label;
  Rat approx;            // the stated decimal, exactly as a rational
  int stated_digits = 0; // fractional digits provided
  bool truncated = false; // the decimal ends in "...": only an approximation
};

struct RealBasis {
  std::vector<RealBasisElement> elements;
  int size() const { return static_cast<int>(elements.size()); }
  int index(const std::string& label) const;  // -1 when absent
  int unit() const;  // index of an element exactly equal to one, -1 when absent
};

// Digit ceiling for ordering decisions: SCK1_PRECISION when set, else 64.
int ordering_precision();

struct QLinearReal {
  std::vector<Rat> coords;
  bool operator==(const QLinearReal&) const = default;
};

QLinearReal qreal_zero(const RealBasis& b);
QLinearReal qreal_unit(const RealBasis& b);  // exactly one; needs a unit element
QLinearReal qreal_basis(const RealBasis& b, int i);
QLinearReal qreal_add(const QLinearReal& x, const QLinearReal& y);
QLinearReal qreal_sub(const QLinearReal& x, const QLinearReal& y);
QLinearReal qreal_neg(const QLinearReal& x);
QLinearReal qreal_scale(const Rat& c, const QLinearReal& x);
bool qreal_is_zero(const QLinearReal& x);
// -1, 0, +1; throws precision_error with a refinement hint when the stated
// digits cannot separate the two values within the ceiling.
int qreal_compare(const RealBasis& b, const QLinearReal& x, const QLinearReal& y);
std::string qreal_to_string(const RealBasis& b, const QLinearReal& x);

// ---------------------------------------------------------------------------
// The exterior square of the basis span: finite map from ordered basis index
// pairs i < j to rational coordinates, zero entries pruned.
// ---------------------------------------------------------------------------

struct WedgeElement {
  std::map<std::pair<int, int>, Rat> coords;
  bool is_zero() const { return coords.empty(); }
  bool operator==(const WedgeElement&) const = default;
};

WedgeElement wedge(const QLinearReal& x, const QLinearReal& y);
WedgeElement wedge_add(const WedgeElement& x, const WedgeElement& y);
WedgeElement wedge_sub(const WedgeElement& x, const WedgeElement& y);
nlohmann::json wedge_to_json(const RealBasis& b, const WedgeElement& w);

// ---------------------------------------------------------------------------
// Interval exchange transformations of [0, L): a strictly increasing chain of
// breakpoints 0 = a_0 < a_1 < ... < a_n = L and one translation per piece.
// ---------------------------------------------------------------------------

struct Interval {
  QLinearReal a, b;  // the half-open interval [a, b)
  bool operator==(const Interval&) const = default;
};

struct IntervalFamily {
  std::vector<Interval> intervals;  // overlaps allowed; lengths positive
  bool operator==(const IntervalFamily&) const = default;
};

struct IET {
  QLinearReal length;
  std::vector<QLinearReal> breaks;  // a_0 .. a_n
  std::vector<QLinearReal> trans;   // x_1 .. x_n
  bool operator==(const IET&) const = default;
  int n() const { return static_cast<int>(trans.size()); }
};

IET iet_identity(const RealBasis& b, const QLinearReal& length);

// True iff the breakpoint chain is strictly increasing from zero to the
// length and the translated pieces tile [0, L) with exact endpoint matching.
bool validate_iet(const RealBasis& b, const IET& t);

// Image of a point of [0, L) under the transformation.
QLinearReal iet_apply(const RealBasis& b, const IET& t, const QLinearReal& p);

// The transformation applying h first and then g, on the common refinement of
// h's image pieces against g's domain pieces.  Both must be valid and share
// the length exactly.
IET iet_compose(const RealBasis& b, const IET& g, const IET& h);

IET iet_inverse(const RealBasis& b, const IET& t);

// Collapses adjacent pieces carrying the same translation.
IET merge_equal_translations(const RealBasis& b, const IET& t);

// Interior discontinuity counts (domain side, codomain side), counted after
// collapsing equal-translation neighbours on the respective side.  The two
// counts agree on every valid transformation.
std::pair<int, int> cut_balance(const RealBasis& b, const IET& t);

// ---------------------------------------------------------------------------
// Degree-one representatives over intervals: a shared domain family and one
// translation per interval for each of the two legs into a common codomain.
// ---------------------------------------------------------------------------

struct IntervalK1Pair {
  IntervalFamily domain;
  std::vector<QLinearReal> first, second;
  bool operator==(const IntervalK1Pair&) const = default;
};

// The representative of a transformation: domain pieces, the union leg (all
// translations zero), and the leg given by the piece translations.
IntervalK1Pair psi(const RealBasis& b, const IET& t);

// The invariant of one leg: the sum of length wedge translation over the
// family.  Computed from the raw leg data as given.
WedgeElement saf_hat(const RealBasis& b, const IntervalFamily& domain,
                     const std::vector<QLinearReal>& trans);

// First leg minus second leg.
WedgeElement saf(const RealBasis& b, const IntervalK1Pair& p);

// ---------------------------------------------------------------------------
// JSON.  Coordinate vectors are arrays of rational strings (integers also
// accepted on input).  A transformation file holds basis, optional length
// (default: exactly one, requiring a unit basis element), the full breakpoint
// chain and the translations; a pair file holds basis, intervals and the two
// translation lists.
// ---------------------------------------------------------------------------

RealBasis parse_basis_json(const nlohmann::json& j);
nlohmann::json basis_to_json(const RealBasis& b);

QLinearReal parse_qreal_json(const RealBasis& b, const nlohmann::json& j);
nlohmann::json qreal_to_json(const QLinearReal& x);

IET parse_iet_json(const RealBasis& b, const nlohmann::json& j);
nlohmann::json iet_to_json(const RealBasis& b, const IET& t);

IntervalK1Pair parse_interval_pair_json(const RealBasis& b, const nlohmann::json& j);
nlohmann::json interval_pair_to_json(const RealBasis& b, const IntervalK1Pair& p);

}  // namespace sck
