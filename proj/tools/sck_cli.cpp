// Command-line surface for the exact scissors-congruence toolkit: fixture
// validation, degree-zero groups, degree-one normal forms, relative classes,
// boundary classes, the interval invariant, and composition of interval
// exchanges.  Exit status: 0 success, 1 mathematical failure (axiom or
// invariant broken, ordering precision exhausted), 2 input error.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sck/assembler.hpp"
#include "sck/error.hpp"
#include "sck/iet.hpp"
#include "sck/kgroups.hpp"
#include "sck/sc.hpp"
#include "sck/sqm.hpp"
#include "sck/twist.hpp"

namespace {

using namespace sck;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw structural_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw structural_error(path + ": " + e.what());
  }
}

std::string coords_to_string(const std::vector<Int>& v) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i].str();
  }
  os << ')';
  return os.str();
}

SqmContext context_from_file(const std::string& path) {
  nlohmann::json j = read_json(path);
  if (j.is_object() && j.contains("site") && j.contains("sub"))
    return make_sqm_context(load_cofiber_file(path));
  return make_sqm_context(load_assembler_file(path));
}

void require_same_basis(const RealBasis& a, const RealBasis& b) {
  bool same = a.size() == b.size();
  for (int i = 0; same && i < a.size(); ++i) {
    const RealBasisElement &x = a.elements[static_cast<size_t>(i)],
                           &y = b.elements[static_cast<size_t>(i)];
    same = x.label == y.label && x.approx == y.approx && x.truncated == y.truncated &&
           x.stated_digits == y.stated_digits;
  }
  if (!same) throw structural_error("the input files must declare the same basis");
}

std::string wedge_text(const RealBasis& b, const WedgeElement& w) {
  if (w.is_zero()) return "0\n";
  std::ostringstream os;
  for (const auto& [k, c] : w.coords)
    os << '(' << b.elements[static_cast<size_t>(k.first)].label << ", "
       << b.elements[static_cast<size_t>(k.second)].label << "): " << rational_to_string(c)
       << '\n';
  return os.str();
}

std::string iet_text(const RealBasis& b, const IET& t) {
  std::ostringstream os;
  os << t.n() << " piece" << (t.n() == 1 ? "" : "s") << " on [0, "
     << qreal_to_string(b, t.length) << "):\n";
  for (int i = 0; i < t.n(); ++i)
    os << "  [" << qreal_to_string(b, t.breaks[static_cast<size_t>(i)]) << ", "
       << qreal_to_string(b, t.breaks[static_cast<size_t>(i) + 1]) << ")  +  "
       << qreal_to_string(b, t.trans[static_cast<size_t>(i)]) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int run_validate(const std::string& path, bool json_out) {
  nlohmann::json j = read_json(path);
  nlohmann::json out;

  if (j.is_object() && j.contains("breakpoints")) {
    RealBasis b = parse_basis_json(j.at("basis"));
    IET t = parse_iet_json(b, j);
    bool valid = validate_iet(b, t);
    out["kind"] = "transformation";
    out["valid"] = valid;
    out["pieces"] = t.n();
    if (json_out)
      std::cout << out.dump(2) << '\n';
    else if (valid)
      std::cout << "transformation: valid, " << t.n() << " pieces\n";
    else
      std::cout << "transformation: INVALID (pieces do not exchange the interval)\n";
    return valid ? 0 : 1;
  }

  if (j.is_object() && j.contains("intervals")) {
    RealBasis b = parse_basis_json(j.at("basis"));
    IntervalK1Pair p = parse_interval_pair_json(b, j);
    out["kind"] = "interval-pair";
    out["intervals"] = p.domain.intervals.size();
    if (json_out)
      std::cout << out.dump(2) << '\n';
    else
      std::cout << "interval pair: well formed, " << p.domain.intervals.size()
                << " intervals\n";
    return 0;
  }

  if (j.is_object() && j.contains("site") && j.contains("sub")) {
    CofiberAssembler cof = load_cofiber_file(path);
    out["kind"] = "quotient-map";
    out["ok"] = true;
    out["base_objects"] = cof.levels.level0->num_objects();
    out["sub_objects"] = cof.siteD->num_objects();
    if (json_out)
      std::cout << out.dump(2) << '\n';
    else
      std::cout << "quotient map: ok (base " << cof.levels.level0->num_objects()
                << " objects, sub " << cof.siteD->num_objects() << " objects)\n";
    return 0;
  }

  if (j.is_object() && j.contains("objects")) {
    AssemblerSpec spec = load_assembler_file(path);
    ValidationReport rep = validate_assembler(spec);
    out["kind"] = "site";
    out["ok"] = rep.ok();
    nlohmann::json items = nlohmann::json::array();
    for (const ValidationItem& it : rep.items) {
      nlohmann::json ji;
      ji["axiom"] = it.axiom;
      ji["pass"] = it.pass;
      if (!it.pass) ji["witness"] = it.witness;
      items.push_back(ji);
    }
    out["items"] = items;
    if (json_out) {
      std::cout << out.dump(2) << '\n';
    } else {
      for (const ValidationItem& it : rep.items) {
        if (it.pass)
          std::cout << "pass " << it.axiom << '\n';
        else
          std::cout << "FAIL " << it.axiom << ": " << it.witness << '\n';
      }
      std::cout << (rep.ok() ? "site: all axioms pass\n" : "site: axioms VIOLATED\n");
    }
    return rep.ok() ? 0 : 1;
  }

  throw structural_error(path + ": unrecognized file shape");
}

// ---------------------------------------------------------------------------
// k0
// ---------------------------------------------------------------------------

int run_k0(const std::string& path, bool json_out) {
  K0Presentation p = k0(load_assembler_file(path));
  if (json_out) {
    std::cout << k0_to_json(p).dump(2) << '\n';
    return 0;
  }
  std::cout << "K0 = " << p.pretty() << '\n';
  std::cout << "generators:";
  for (const std::string& g : p.generators) std::cout << ' ' << g;
  std::cout << '\n';
  std::cout << "relations:\n";
  if (p.relations.empty()) std::cout << "  none\n";
  for (const auto& row : p.relations) std::cout << "  " << coords_to_string(row) << '\n';
  std::cout << "snf diagonal:";
  for (const Int& d : p.group.snf.divisors) std::cout << ' ' << d.str();
  if (p.group.snf.divisors.empty()) std::cout << " none";
  std::cout << '\n';
  std::cout << "classes in canonical coordinates:\n";
  for (size_t i = 0; i < p.generators.size(); ++i) {
    std::vector<Int> e(p.generators.size(), Int(0));
    e[i] = 1;
    std::cout << "  " << p.generators[i] << " = " << coords_to_string(p.group.reduce(e))
              << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// k1-normalize / relative / boundary
// ---------------------------------------------------------------------------

int run_k1_normalize(const std::string& ctx_path, const std::string& pair_path,
                     bool json_out) {
  SqmContext ctx = context_from_file(ctx_path);
  K1Pair p = parse_pair_json(ctx, read_json(pair_path));
  K1Pair canon = canonical_k1(ctx, pair_word(ctx, p));
  if (json_out)
    std::cout << pair_to_json(ctx, canon).dump(2) << '\n';
  else
    std::cout << "canonical representative:\n  "
              << word_to_string(ctx, pair_word(ctx, canon)) << '\n';
  return 0;
}

int run_relative(const std::string& cof_path, const std::string& pair_path, bool json_out) {
  CofiberAssembler cof = load_cofiber_file(cof_path);
  SqmContext ctx = make_sqm_context(cof);
  K1Pair p = parse_pair_json(ctx, read_json(pair_path));
  RelativeK1Quad q = relative_k1(ctx, p);
  if (json_out) {
    std::cout << quad_to_json(ctx, q).dump(2) << '\n';
    return 0;
  }
  std::cout << "A = " << tw_to_string(ctx.l0(), q.A) << '\n'
            << "B = " << tw_to_string(ctx.l0(), q.B) << '\n'
            << "C = " << tw_to_string(*ctx.siteD, q.C) << '\n'
            << "D = " << tw_to_string(*ctx.siteD, q.D) << '\n';
  return 0;
}

int run_boundary(const std::string& cof_path, const std::string& quad_path, bool json_out) {
  CofiberAssembler cof = load_cofiber_file(cof_path);
  SqmContext ctx = make_sqm_context(cof);
  RelativeK1Quad q = parse_quad_json(ctx, read_json(quad_path));
  K0Presentation p0 = k0(cof.siteD->spec());
  BoundaryClass bc = boundary_k1(q, p0, *cof.siteD);
  if (json_out) {
    nlohmann::json out;
    out["generators"] = p0.generators;
    nlohmann::json gc = nlohmann::json::array();
    for (const Int& x : bc.generator_coords) gc.push_back(x.str());
    out["generator_coords"] = gc;
    out["group"] = p0.pretty();
    nlohmann::json rd = nlohmann::json::array();
    for (const Int& x : bc.reduced) rd.push_back(x.str());
    out["reduced"] = rd;
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::cout << "boundary over";
  for (const std::string& g : p0.generators) std::cout << ' ' << g;
  std::cout << ": " << coords_to_string(bc.generator_coords) << '\n';
  std::cout << "reduced in " << p0.pretty() << ": " << coords_to_string(bc.reduced) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// saf / iet-compose
// ---------------------------------------------------------------------------

int run_saf(const std::string& path, bool json_out) {
  nlohmann::json j = read_json(path);
  if (!j.is_object() || !j.contains("basis"))
    throw structural_error(path + ": expected a transformation or interval-pair file");
  RealBasis b = parse_basis_json(j.at("basis"));
  WedgeElement w;
  if (j.contains("breakpoints")) {
    IET t = parse_iet_json(b, j);
    if (!validate_iet(b, t)) {
      std::cerr << "failure: not a valid interval exchange\n";
      return 1;
    }
    w = saf(b, psi(b, t));
  } else if (j.contains("first")) {
    w = saf(b, parse_interval_pair_json(b, j));
  } else {
    throw structural_error(path + ": expected a transformation or interval-pair file");
  }
  if (json_out)
    std::cout << wedge_to_json(b, w).dump(2) << '\n';
  else
    std::cout << wedge_text(b, w);
  return 0;
}

int run_iet_compose(const std::string& g_path, const std::string& h_path, bool json_out) {
  nlohmann::json jg = read_json(g_path), jh = read_json(h_path);
  RealBasis bg = parse_basis_json(jg.at("basis"));
  RealBasis bh = parse_basis_json(jh.at("basis"));
  require_same_basis(bg, bh);
  IET g = parse_iet_json(bg, jg);
  IET h = parse_iet_json(bg, jh);
  if (!validate_iet(bg, g) || !validate_iet(bg, h)) {
    std::cerr << "failure: not a valid interval exchange\n";
    return 1;
  }
  IET gh = iet_compose(bg, g, h);
  if (json_out)
    std::cout << iet_to_json(bg, gh).dump(2) << '\n';
  else
    std::cout << iet_text(bg, gh);
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct SuiteResult {
  std::string name;
  bool pass;
  std::string detail;
};

int run_check(const std::string& path, bool json_out) {
  std::vector<SuiteResult> suites;

  AssemblerSpec spec = load_assembler_file(path);
  ValidationReport rep = validate_assembler(spec);
  {
    std::ostringstream d;
    if (rep.ok())
      d << rep.items.size() << " checks";
    else
      d << rep.summary();
    suites.push_back({"axioms", rep.ok(), d.str()});
  }

  if (rep.ok()) {
    Site site(spec);

    // Composable span pairs over tuples of the first two noninitial objects.
    std::vector<int> pool_objs;
    for (int o = 0; o < site.num_objects(); ++o) {
      if (o == site.initial()) continue;
      pool_objs.push_back(o);
      if (pool_objs.size() == 2) break;
    }
    std::vector<TwObject> pool;
    pool.push_back(TwObject{});
    for (int o : pool_objs) pool.push_back(TwObject{{o}});
    if (pool_objs.size() == 2) pool.push_back(TwObject{{pool_objs[0], pool_objs[1]}});

    std::map<std::pair<int, int>, std::vector<SCSpan>> memo;
    auto spans = [&](int a, int b) -> const std::vector<SCSpan>& {
      auto key = std::make_pair(a, b);
      auto it = memo.find(key);
      if (it == memo.end())
        it = memo.emplace(key, enumerate_spans(site, pool[static_cast<size_t>(a)],
                                               pool[static_cast<size_t>(b)], 2))
                 .first;
      return it->second;
    };
    std::vector<std::pair<SCSpan, SCSpan>> samples;
    const size_t sample_cap = 2000;
    for (size_t a = 0; a < pool.size() && samples.size() < sample_cap; ++a)
      for (size_t b = 0; b < pool.size() && samples.size() < sample_cap; ++b)
        for (size_t c = 0; c < pool.size() && samples.size() < sample_cap; ++c)
          for (const SCSpan& f : spans(static_cast<int>(a), static_cast<int>(b))) {
            if (samples.size() >= sample_cap) break;
            for (const SCSpan& g : spans(static_cast<int>(b), static_cast<int>(c))) {
              samples.emplace_back(f, g);
              if (samples.size() >= sample_cap) break;
            }
          }
    SaturationReport sat = check_saturation(site, samples);
    {
      std::ostringstream d;
      d << sat.pairs_checked << " pairs, refinement condition "
        << (sat.condition_g ? "holds" : "absent");
      if (!sat.ok()) d << "; " << sat.witness;
      suites.push_back({"saturation", sat.ok(), d.str()});
    }

    // Word calculus: normalization is idempotent and shadow-preserving on
    // deterministic block-swap and identity words.
    SqmContext ctx = make_sqm_context(spec);
    int words = 0;
    bool words_ok = true;
    std::string witness;
    auto check_word = [&](const SqmWord& w) {
      SqmWord n1 = normalize(ctx, w);
      bool ok = shadow(ctx, w) == shadow(ctx, n1) && normalize(ctx, n1) == n1;
      if (!ok && words_ok) {
        words_ok = false;
        witness = word_to_string(ctx, w);
      }
      ++words;
    };
    for (int s : pool_objs)
      for (int t : pool_objs) {
        SqmWord w = make_word({SqmLetter{tau_generator(ctx, s, t), 1},
                               SqmLetter{tau_generator(ctx, t, s), 1}});
        check_word(w);
      }
    for (int o : pool_objs) {
      SqmGenerator one = make_weq0(ctx, sc_identity(ctx.l0(), TwObject{{o}}));
      check_word(make_word({SqmLetter{one, 1}, SqmLetter{one, -1}}));
    }
    {
      std::ostringstream d;
      d << words << " words";
      if (!words_ok) d << "; witness " << witness;
      suites.push_back({"word-calculus", words_ok, d.str()});
    }
  }

  bool all_ok = true;
  for (const SuiteResult& s : suites) all_ok = all_ok && s.pass;
  if (json_out) {
    nlohmann::json out;
    out["ok"] = all_ok;
    nlohmann::json js = nlohmann::json::array();
    for (const SuiteResult& s : suites) {
      nlohmann::json e;
      e["suite"] = s.name;
      e["pass"] = s.pass;
      e["detail"] = s.detail;
      js.push_back(e);
    }
    out["suites"] = js;
    std::cout << out.dump(2) << '\n';
  } else {
    for (const SuiteResult& s : suites)
      std::cout << (s.pass ? "pass " : "FAIL ") << s.name << " (" << s.detail << ")\n";
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact scissors-congruence toolkit"};
  app.require_subcommand(1);

  std::string file1, file2;
  bool json_out = false;

  CLI::App* c_validate = app.add_subcommand("validate", "Check a fixture file");
  CLI::App* c_k0 = app.add_subcommand("k0", "Degree-zero group of a site");
  CLI::App* c_norm =
      app.add_subcommand("k1-normalize", "Canonical degree-one representative of a pair");
  CLI::App* c_rel =
      app.add_subcommand("relative", "Strip a pair over a quotient map");
  CLI::App* c_bnd =
      app.add_subcommand("boundary", "Boundary class of a stripped quad");
  CLI::App* c_saf =
      app.add_subcommand("saf", "Interval invariant of a transformation or pair");
  CLI::App* c_comp =
      app.add_subcommand("iet-compose", "Compose two transformations (first after second)");
  CLI::App* c_check = app.add_subcommand("check", "Run the axiom and property suites");

  for (CLI::App* c : {c_validate, c_k0, c_saf, c_check}) {
    c->add_option("file", file1, "input file")->required();
    c->add_flag("--json", json_out, "machine-readable output");
  }
  c_norm->add_option("context", file1, "site or quotient-map file")->required();
  c_norm->add_option("pair", file2, "pair file")->required();
  c_rel->add_option("quotient", file1, "quotient-map file")->required();
  c_rel->add_option("pair", file2, "pair file")->required();
  c_bnd->add_option("quotient", file1, "quotient-map file")->required();
  c_bnd->add_option("quad", file2, "quad file")->required();
  c_comp->add_option("outer", file1, "outer transformation file (applied second)")->required();
  c_comp->add_option("inner", file2, "inner transformation file (applied first)")->required();
  for (CLI::App* c : {c_norm, c_rel, c_bnd, c_comp})
    c->add_flag("--json", json_out, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_validate->parsed()) return run_validate(file1, json_out);
    if (c_k0->parsed()) return run_k0(file1, json_out);
    if (c_norm->parsed()) return run_k1_normalize(file1, file2, json_out);
    if (c_rel->parsed()) return run_relative(file1, file2, json_out);
    if (c_bnd->parsed()) return run_boundary(file1, file2, json_out);
    if (c_saf->parsed()) return run_saf(file1, json_out);
    if (c_comp->parsed()) return run_iet_compose(file1, file2, json_out);
    if (c_check->parsed()) return run_check(file1, json_out);
  } catch (const structural_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const axiom_error& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  } catch (const precision_error& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  } catch (const internal_error& e) {
    std::cerr << "internal failure: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
