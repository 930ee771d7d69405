#include "sck/iet.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "sck/error.hpp"

namespace sck {

namespace {

Rat pow10_inv(int digits) {
  Int d = 1;
  for (int i = 0; i < digits; ++i) d *= 10;
  return Rat(Int(1), d);
}

// Truncation of v toward zero at `digits` fractional digits; the error is
// below one unit of the last digit.
Rat truncate_rat(const Rat& v, int digits) {
  Int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Int t = numerator(v) * scale / denominator(v);
  return Rat(t, scale);
}

void check_coords(const RealBasis& b, const QLinearReal& x, const char* what) {
  if (static_cast<int>(x.coords.size()) != b.size())
    throw structural_error(std::string(what) + " has the wrong number of coordinates");
}

int locate_piece(const RealBasis& b, const std::vector<QLinearReal>& breaks,
                 const QLinearReal& p) {
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (qreal_compare(b, p, breaks[i]) >= 0 && qreal_compare(b, p, breaks[i + 1]) < 0)
      return static_cast<int>(i);
  }
  return -1;
}

void check_shape(const RealBasis& b, const IET& t) {
  if (t.trans.empty() || t.breaks.size() != t.trans.size() + 1)
    throw structural_error("transformation needs n + 1 breakpoints for n pieces, n >= 1");
  check_coords(b, t.length, "length");
  for (const QLinearReal& x : t.breaks) check_coords(b, x, "breakpoint");
  for (const QLinearReal& x : t.trans) check_coords(b, x, "translation");
}

}  // namespace

// ---------------------------------------------------------------------------
// Basis and coordinates.
// ---------------------------------------------------------------------------

int RealBasis::index(const std::string& label) const {
  for (int i = 0; i < size(); ++i)
    if (elements[static_cast<size_t>(i)].label == label) return i;
  return -1;
}

int RealBasis::unit() const {
  for (int i = 0; i < size(); ++i) {
    const RealBasisElement& e = elements[static_cast<size_t>(i)];
    if (!e.truncated && e.approx == 1) return i;
  }
  return -1;
}

int ordering_precision() {
  if (const char* env = std::getenv("SCK1_PRECISION")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 1000000) return static_cast<int>(v);
    throw structural_error("SCK1_PRECISION must be a positive digit count");
  }
  return 64;
}

QLinearReal qreal_zero(const RealBasis& b) {
  QLinearReal x;
  x.coords.assign(static_cast<size_t>(b.size()), Rat(0));
  return x;
}

QLinearReal qreal_unit(const RealBasis& b) {
  int u = b.unit();
  if (u < 0) throw structural_error("no basis element is exactly one");
  return qreal_basis(b, u);
}

QLinearReal qreal_basis(const RealBasis& b, int i) {
  if (i < 0 || i >= b.size()) throw structural_error("basis index out of range");
  QLinearReal x = qreal_zero(b);
  x.coords[static_cast<size_t>(i)] = 1;
  return x;
}

QLinearReal qreal_add(const QLinearReal& x, const QLinearReal& y) {
  if (x.coords.size() != y.coords.size())
    throw structural_error("coordinate vectors of different lengths");
  QLinearReal out = x;
  for (size_t i = 0; i < y.coords.size(); ++i) out.coords[i] += y.coords[i];
  return out;
}

QLinearReal qreal_sub(const QLinearReal& x, const QLinearReal& y) {
  return qreal_add(x, qreal_neg(y));
}

QLinearReal qreal_neg(const QLinearReal& x) {
  QLinearReal out = x;
  for (Rat& c : out.coords) c = -c;
  return out;
}

QLinearReal qreal_scale(const Rat& c, const QLinearReal& x) {
  QLinearReal out = x;
  for (Rat& q : out.coords) q *= c;
  return out;
}

bool qreal_is_zero(const QLinearReal& x) {
  for (const Rat& c : x.coords)
    if (c != 0) return false;
  return true;
}

int qreal_compare(const RealBasis& b, const QLinearReal& x, const QLinearReal& y) {
  check_coords(b, x, "comparand");
  check_coords(b, y, "comparand");
  QLinearReal d = qreal_sub(x, y);
  if (qreal_is_zero(d)) return 0;

  const int ceiling = ordering_precision();
  int digits = std::min(16, ceiling);
  while (true) {
    Rat center(0), radius(0);
    bool can_refine = false;
    for (int i = 0; i < b.size(); ++i) {
      const Rat& q = d.coords[static_cast<size_t>(i)];
      if (q == 0) continue;
      const RealBasisElement& e = b.elements[static_cast<size_t>(i)];
      Rat mag = q < 0 ? Rat(-q) : q;
      if (!e.truncated) {
        center += q * e.approx;
      } else if (digits < e.stated_digits) {
        center += q * truncate_rat(e.approx, digits);
        radius += mag * 2 * pow10_inv(digits);
        can_refine = true;
      } else {
        center += q * e.approx;
        radius += mag * pow10_inv(e.stated_digits);
      }
    }
    if (center - radius > 0) return 1;
    if (center + radius < 0) return -1;
    if (radius == 0)
      throw axiom_error(
          "the declared basis is rationally dependent: a nonzero combination is exactly zero");
    if (can_refine && digits < ceiling) {
      digits = std::min(digits * 2, ceiling);
      continue;
    }
    std::ostringstream os;
    os << "ordering undecided at " << digits
       << " digits; raise SCK1_PRECISION or state more digits for:";
    for (int i = 0; i < b.size(); ++i)
      if (d.coords[static_cast<size_t>(i)] != 0 && b.elements[static_cast<size_t>(i)].truncated)
        os << ' ' << b.elements[static_cast<size_t>(i)].label;
    throw precision_error(os.str());
  }
}

std::string qreal_to_string(const RealBasis& b, const QLinearReal& x) {
  std::ostringstream os;
  bool any = false;
  for (int i = 0; i < b.size(); ++i) {
    const Rat& c = x.coords[static_cast<size_t>(i)];
    if (c == 0) continue;
    if (any) os << " + ";
    os << rational_to_string(c) << '*' << b.elements[static_cast<size_t>(i)].label;
    any = true;
  }
  if (!any) os << '0';
  return os.str();
}

// ---------------------------------------------------------------------------
// Wedge coordinates.
// ---------------------------------------------------------------------------

WedgeElement wedge(const QLinearReal& x, const QLinearReal& y) {
  if (x.coords.size() != y.coords.size())
    throw structural_error("coordinate vectors of different lengths");
  WedgeElement w;
  const size_t n = x.coords.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      Rat c = x.coords[i] * y.coords[j] - x.coords[j] * y.coords[i];
      if (c != 0) w.coords[{static_cast<int>(i), static_cast<int>(j)}] = c;
    }
  }
  return w;
}

WedgeElement wedge_add(const WedgeElement& x, const WedgeElement& y) {
  WedgeElement out = x;
  for (const auto& [k, c] : y.coords) {
    Rat r = out.coords.count(k) ? out.coords[k] + c : c;
    if (r == 0)
      out.coords.erase(k);
    else
      out.coords[k] = r;
  }
  return out;
}

WedgeElement wedge_sub(const WedgeElement& x, const WedgeElement& y) {
  WedgeElement neg;
  for (const auto& [k, c] : y.coords) neg.coords[k] = -c;
  return wedge_add(x, neg);
}

nlohmann::json wedge_to_json(const RealBasis& b, const WedgeElement& w) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [k, c] : w.coords) {
    nlohmann::json e;
    e["pair"] = {b.elements[static_cast<size_t>(k.first)].label,
                 b.elements[static_cast<size_t>(k.second)].label};
    e["coefficient"] = rational_to_string(c);
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transformations.
// ---------------------------------------------------------------------------

IET iet_identity(const RealBasis& b, const QLinearReal& length) {
  IET t;
  t.length = length;
  t.breaks = {qreal_zero(b), length};
  t.trans = {qreal_zero(b)};
  check_shape(b, t);
  return t;
}

bool validate_iet(const RealBasis& b, const IET& t) {
  check_shape(b, t);
  if (!qreal_is_zero(t.breaks.front())) return false;
  if (!(t.breaks.back() == t.length)) return false;
  for (size_t i = 0; i + 1 < t.breaks.size(); ++i)
    if (qreal_compare(b, t.breaks[i], t.breaks[i + 1]) >= 0) return false;

  // The translated pieces, ordered by left endpoint, must abut exactly.
  std::vector<int> order(t.trans.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<QLinearReal> lo(t.trans.size()), hi(t.trans.size());
  for (size_t i = 0; i < t.trans.size(); ++i) {
    lo[i] = qreal_add(t.breaks[i], t.trans[i]);
    hi[i] = qreal_add(t.breaks[i + 1], t.trans[i]);
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int c) { return qreal_compare(b, lo[static_cast<size_t>(a)],
                                                     lo[static_cast<size_t>(c)]) < 0; });
  if (!qreal_is_zero(lo[static_cast<size_t>(order.front())])) return false;
  for (size_t k = 0; k + 1 < order.size(); ++k)
    if (!(hi[static_cast<size_t>(order[k])] == lo[static_cast<size_t>(order[k + 1])]))
      return false;
  return hi[static_cast<size_t>(order.back())] == t.length;
}

QLinearReal iet_apply(const RealBasis& b, const IET& t, const QLinearReal& p) {
  check_shape(b, t);
  int i = locate_piece(b, t.breaks, p);
  if (i < 0) throw structural_error("point outside the domain of the transformation");
  return qreal_add(p, t.trans[static_cast<size_t>(i)]);
}

IET iet_compose(const RealBasis& b, const IET& g, const IET& h) {
  if (!(g.length == h.length))
    throw structural_error("composition requires transformations of equal length");
  if (!validate_iet(b, g) || !validate_iet(b, h))
    throw structural_error("composition requires valid transformations");

  // Domain cuts: h's own breakpoints plus the preimages of g's interior
  // breakpoints under h.
  std::vector<QLinearReal> cuts = h.breaks;
  for (int j = 1; j < g.n(); ++j) {
    const QLinearReal& cut = g.breaks[static_cast<size_t>(j)];
    for (int i = 0; i < h.n(); ++i) {
      QLinearReal im_lo = qreal_add(h.breaks[static_cast<size_t>(i)],
                                    h.trans[static_cast<size_t>(i)]);
      QLinearReal im_hi = qreal_add(h.breaks[static_cast<size_t>(i) + 1],
                                    h.trans[static_cast<size_t>(i)]);
      if (qreal_compare(b, cut, im_lo) > 0 && qreal_compare(b, cut, im_hi) < 0) {
        QLinearReal pre = qreal_sub(cut, h.trans[static_cast<size_t>(i)]);
        bool known = false;
        for (const QLinearReal& c : cuts) known = known || c == pre;
        if (!known) cuts.push_back(pre);
        break;
      }
    }
  }
  std::sort(cuts.begin(), cuts.end(),
            [&](const QLinearReal& x, const QLinearReal& y) { return qreal_compare(b, x, y) < 0; });

  IET out;
  out.length = g.length;
  out.breaks = cuts;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    int i = locate_piece(b, h.breaks, cuts[k]);
    if (i < 0) throw internal_error("refined cut left the domain");
    QLinearReal x = h.trans[static_cast<size_t>(i)];
    int j = locate_piece(b, g.breaks, qreal_add(cuts[k], x));
    if (j < 0) throw internal_error("translated cut left the middle domain");
    out.trans.push_back(qreal_add(x, g.trans[static_cast<size_t>(j)]));
  }
  return out;
}

IET iet_inverse(const RealBasis& b, const IET& t) {
  if (!validate_iet(b, t)) throw structural_error("inversion requires a valid transformation");
  std::vector<int> order(t.trans.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int c) {
    return qreal_compare(b, qreal_add(t.breaks[static_cast<size_t>(a)], t.trans[static_cast<size_t>(a)]),
                         qreal_add(t.breaks[static_cast<size_t>(c)], t.trans[static_cast<size_t>(c)])) < 0;
  });
  IET out;
  out.length = t.length;
  out.breaks.push_back(qreal_zero(b));
  for (int i : order) {
    out.breaks.push_back(
        qreal_add(t.breaks[static_cast<size_t>(i) + 1], t.trans[static_cast<size_t>(i)]));
    out.trans.push_back(qreal_neg(t.trans[static_cast<size_t>(i)]));
  }
  return out;
}

IET merge_equal_translations(const RealBasis& b, const IET& t) {
  check_shape(b, t);
  IET out;
  out.length = t.length;
  out.breaks.push_back(t.breaks.front());
  for (int i = 0; i < t.n(); ++i) {
    if (!out.trans.empty() && out.trans.back() == t.trans[static_cast<size_t>(i)]) {
      out.breaks.back() = t.breaks[static_cast<size_t>(i) + 1];
      continue;
    }
    out.breaks.push_back(t.breaks[static_cast<size_t>(i) + 1]);
    out.trans.push_back(t.trans[static_cast<size_t>(i)]);
  }
  return out;
}

std::pair<int, int> cut_balance(const RealBasis& b, const IET& t) {
  IET dom = merge_equal_translations(b, t);
  IET cod = merge_equal_translations(b, iet_inverse(b, t));
  return {dom.n() - 1, cod.n() - 1};
}

// ---------------------------------------------------------------------------
// Representatives and the invariant.
// ---------------------------------------------------------------------------

IntervalK1Pair psi(const RealBasis& b, const IET& t) {
  if (!validate_iet(b, t))
    throw structural_error("representative requires a valid transformation");
  IntervalK1Pair p;
  for (int i = 0; i < t.n(); ++i) {
    p.domain.intervals.push_back(
        {t.breaks[static_cast<size_t>(i)], t.breaks[static_cast<size_t>(i) + 1]});
    p.first.push_back(qreal_zero(b));
    p.second.push_back(t.trans[static_cast<size_t>(i)]);
  }
  return p;
}

WedgeElement saf_hat(const RealBasis& b, const IntervalFamily& domain,
                     const std::vector<QLinearReal>& trans) {
  if (domain.intervals.size() != trans.size())
    throw structural_error("one translation per interval is required");
  WedgeElement out;
  for (size_t i = 0; i < trans.size(); ++i) {
    check_coords(b, domain.intervals[i].a, "interval endpoint");
    check_coords(b, domain.intervals[i].b, "interval endpoint");
    check_coords(b, trans[i], "translation");
    out = wedge_add(out, wedge(qreal_sub(domain.intervals[i].b, domain.intervals[i].a), trans[i]));
  }
  return out;
}

WedgeElement saf(const RealBasis& b, const IntervalK1Pair& p) {
  return wedge_sub(saf_hat(b, p.domain, p.first), saf_hat(b, p.domain, p.second));
}

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

RealBasis parse_basis_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw structural_error("basis must be a nonempty array of {label, approx_decimal}");
  RealBasis b;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("label") || !e.contains("approx_decimal"))
      throw structural_error("basis element must hold label and approx_decimal");
    RealBasisElement el;
    el.label = e.at("label").get<std::string>();
    if (el.label.empty()) throw structural_error("basis label must be nonempty");
    if (b.index(el.label) >= 0)
      throw structural_error("duplicate basis label: " + el.label);
    std::string dec = e.at("approx_decimal").get<std::string>();
    if (dec.size() >= 3 && dec.compare(dec.size() - 3, 3, "...") == 0) {
      el.truncated = true;
      dec.resize(dec.size() - 3);
    }
    Decimal d = parse_decimal(dec);
    el.approx = d.value;
    el.stated_digits = d.fractional_digits;
    b.elements.push_back(el);
  }
  return b;
}

nlohmann::json basis_to_json(const RealBasis& b) {
  nlohmann::json out = nlohmann::json::array();
  for (const RealBasisElement& e : b.elements) {
    nlohmann::json je;
    je["label"] = e.label;
    std::ostringstream os;
    Int scale = 1;
    for (int i = 0; i < e.stated_digits; ++i) scale *= 10;
    Int num = numerator(e.approx) * scale / denominator(e.approx);
    std::string digits = num.str();
    bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits.erase(digits.begin());
    while (static_cast<int>(digits.size()) <= e.stated_digits) digits.insert(digits.begin(), '0');
    if (neg) os << '-';
    os << digits.substr(0, digits.size() - static_cast<size_t>(e.stated_digits));
    if (e.stated_digits > 0)
      os << '.' << digits.substr(digits.size() - static_cast<size_t>(e.stated_digits));
    if (e.truncated) os << "...";
    je["approx_decimal"] = os.str();
    out.push_back(je);
  }
  return out;
}

QLinearReal parse_qreal_json(const RealBasis& b, const nlohmann::json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != b.size())
    throw structural_error("coordinate vector must list one rational per basis element");
  QLinearReal x;
  for (const auto& e : j) {
    if (e.is_string())
      x.coords.push_back(parse_rational(e.get<std::string>()));
    else if (e.is_number_integer())
      x.coords.push_back(Rat(e.get<long long>()));
    else
      throw structural_error("coordinates must be rational strings or integers");
  }
  return x;
}

nlohmann::json qreal_to_json(const QLinearReal& x) {
  nlohmann::json out = nlohmann::json::array();
  for (const Rat& c : x.coords) out.push_back(rational_to_string(c));
  return out;
}

IET parse_iet_json(const RealBasis& b, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("translations"))
    throw structural_error("transformation file must hold breakpoints and translations");
  IET t;
  if (j.contains("length")) {
    t.length = parse_qreal_json(b, j.at("length"));
  } else {
    if (b.unit() < 0)
      throw structural_error("default unit length requires a basis element equal to one");
    t.length = qreal_unit(b);
  }
  for (const auto& e : j.at("breakpoints")) t.breaks.push_back(parse_qreal_json(b, e));
  for (const auto& e : j.at("translations")) t.trans.push_back(parse_qreal_json(b, e));
  check_shape(b, t);
  return t;
}

nlohmann::json iet_to_json(const RealBasis& b, const IET& t) {
  nlohmann::json j;
  j["basis"] = basis_to_json(b);
  j["length"] = qreal_to_json(t.length);
  j["breakpoints"] = nlohmann::json::array();
  for (const QLinearReal& x : t.breaks) j["breakpoints"].push_back(qreal_to_json(x));
  j["translations"] = nlohmann::json::array();
  for (const QLinearReal& x : t.trans) j["translations"].push_back(qreal_to_json(x));
  return j;
}

IntervalK1Pair parse_interval_pair_json(const RealBasis& b, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("intervals") || !j.contains("first") || !j.contains("second"))
    throw structural_error("pair file must hold intervals, first and second");
  IntervalK1Pair p;
  for (const auto& e : j.at("intervals")) {
    if (!e.is_object() || !e.contains("a") || !e.contains("b"))
      throw structural_error("interval must hold endpoints a and b");
    p.domain.intervals.push_back(
        {parse_qreal_json(b, e.at("a")), parse_qreal_json(b, e.at("b"))});
  }
  for (const auto& e : j.at("first")) p.first.push_back(parse_qreal_json(b, e));
  for (const auto& e : j.at("second")) p.second.push_back(parse_qreal_json(b, e));
  if (p.first.size() != p.domain.intervals.size() || p.second.size() != p.first.size())
    throw structural_error("pair file needs one translation per interval on each leg");
  return p;
}

nlohmann::json interval_pair_to_json(const RealBasis& b, const IntervalK1Pair& p) {
  nlohmann::json j;
  j["basis"] = basis_to_json(b);
  j["intervals"] = nlohmann::json::array();
  for (const Interval& iv : p.domain.intervals) {
    nlohmann::json e;
    e["a"] = qreal_to_json(iv.a);
    e["b"] = qreal_to_json(iv.b);
    j["intervals"].push_back(e);
  }
  j["first"] = nlohmann::json::array();
  for (const QLinearReal& x : p.first) j["first"].push_back(qreal_to_json(x));
  j["second"] = nlohmann::json::array();
  for (const QLinearReal& x : p.second) j["second"].push_back(qreal_to_json(x));
  return j;
}

}  // namespace sck
