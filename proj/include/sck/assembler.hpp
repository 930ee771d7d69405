#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sck/error.hpp"

namespace sck {

// ---------------------------------------------------------------------------
// Raw finite-site data, as read from fixture files.  Identities and the
// unique morphisms out of the initial object are implicit: declared morphisms
// run between noninitial objects only and carry unique user-chosen ids.
// ---------------------------------------------------------------------------

struct SiteMorphismData {
  std::string id, src, dst;
};

struct CoverDecl {
  std::string target;
  std::vector<std::string> family;
};

struct PullbackDecl {
  std::string f, g, apex, p, q;
};

struct AssemblerSpec {
  std::vector<std::string> objects;
  std::string initial;
  std::vector<SiteMorphismData> morphisms;
  // Triples (g, f, gf): composing f first and then g yields gf.
  std::vector<std::array<std::string, 3>> composition;
  std::vector<CoverDecl> covers;
  std::vector<PullbackDecl> pullbacks;
};

AssemblerSpec parse_assembler_json(const std::string& text, const std::string& origin);
std::string assembler_to_json(const AssemblerSpec& spec);

// ---------------------------------------------------------------------------
// Compiled, validated site.  Construction runs every axiom check and throws
// structural_error / axiom_error on the first failure; validate_assembler
// (below) runs the same checks but collects pass/fail items instead.
// Instances are immutable after construction.
// ---------------------------------------------------------------------------

struct SitePullback {
  int apex, p, q;  // p: apex -> src(f), q: apex -> src(g)
};

struct ValidationItem {
  std::string axiom;
  bool pass;
  std::string witness;  // empty when passing
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool ok() const;
  std::string summary() const;
};

class Site {
 public:
  explicit Site(const AssemblerSpec& spec);

  const AssemblerSpec& spec() const { return spec_; }

  int num_objects() const { return static_cast<int>(object_names_.size()); }
  int initial() const { return initial_; }
  const std::string& object_name(int o) const { return object_names_[o]; }
  int object_index(const std::string& name) const;

  int num_morphisms() const { return static_cast<int>(mor_src_.size()); }
  const std::string& morphism_name(int m) const { return mor_names_[m]; }
  int morphism_index(const std::string& name) const;
  int src(int m) const { return mor_src_[m]; }
  int dst(int m) const { return mor_dst_[m]; }
  int identity(int obj) const { return identity_[obj]; }
  // The unique morphism initial -> obj (the identity when obj is initial).
  int from_initial(int obj) const { return from_initial_[obj]; }

  int compose(int g, int f) const;  // g after f
  const std::vector<int>& hom(int a, int b) const { return hom_[a][b]; }
  const std::vector<int>& hom_into(int x) const { return into_[x]; }

  bool is_iso(int m) const { return inverse_[m] >= 0; }
  int inverse(int m) const;

  SitePullback pullback(int f, int g) const;  // total: f, g share a codomain
  bool are_disjoint(int f, int g) const;

  const std::vector<std::pair<int, std::vector<int>>>& covers() const { return covers_; }
  bool is_cover(int target, const std::vector<int>& family) const;
  // All covering sieves on x, each a bitmask over hom_into(x) positions.
  const std::set<unsigned>& covering_sieves(int x) const { return covering_[x]; }
  unsigned sieve_of_family(int target, const std::vector<int>& family) const;

  bool condition_g() const { return condition_g_; }

 private:
  friend struct SiteBuilder;
  friend ValidationReport validate_assembler(const AssemblerSpec& spec);
  Site() = default;

  AssemblerSpec spec_;
  std::vector<std::string> object_names_;
  std::map<std::string, int> object_index_;
  int initial_ = -1;
  std::vector<std::string> mor_names_;
  std::map<std::string, int> mor_index_;
  std::vector<int> mor_src_, mor_dst_;
  std::vector<int> identity_, from_initial_;
  std::vector<int> comp_;     // dense [g][f], -1 when not composable
  std::vector<int> inverse_;  // -1 when not iso
  std::vector<std::vector<std::vector<int>>> hom_;
  std::vector<std::vector<int>> into_;
  std::vector<std::map<int, int>> into_pos_;
  std::vector<SitePullback> pull_;  // dense [f][g], apex -1 when codomains differ
  std::vector<std::pair<int, std::vector<int>>> covers_;
  std::vector<std::set<unsigned>> covering_;
  bool condition_g_ = false;
};

// Runs the axiom checks (category laws, initial object, pullback limits,
// monomorphisms, cover closure) and reports each with a witness on failure.
// Unresolvable ids and other malformed-table problems throw structural_error.
ValidationReport validate_assembler(const AssemblerSpec& spec);

// True iff no noninitial object admits an empty-sieve cover and every
// refined-family implication over the declared covers holds.
bool check_condition_g(const Site& site);

// ---------------------------------------------------------------------------
// Morphisms of sites and the simplicial constructions built from them.
// ---------------------------------------------------------------------------

// By-name functor data.  Noninitial objects may map to the initial object
// (collapse); morphism images are forced in that case and may be omitted.
struct AssemblerMorphism {
  std::map<std::string, std::string> object_map;
  std::map<std::string, std::string> morphism_map;
};

// Index-level functor between compiled sites, validated on construction:
// functoriality, initial preservation, pullback preservation, continuity.
struct CompiledFunctor {
  std::shared_ptr<const Site> src, dst;
  std::vector<int> obj;  // object index -> object index
  std::vector<int> mor;  // morphism index -> morphism index

  int apply_obj(int o) const { return obj[o]; }
  int apply_mor(int m) const { return mor[m]; }
};

CompiledFunctor compile_functor(std::shared_ptr<const Site> src,
                                std::shared_ptr<const Site> dst,
                                const AssemblerMorphism& data);
CompiledFunctor identity_functor(std::shared_ptr<const Site> site);
CompiledFunctor compose_functor(const CompiledFunctor& outer, const CompiledFunctor& inner);
bool functor_equal(const CompiledFunctor& a, const CompiledFunctor& b);

// Wedge: one initial object plus the disjoint noninitial parts, no cross
// morphisms, componentwise topology.  `prefixes`, when nonempty, gives one id
// prefix per part; otherwise names are kept and prefixed "w<k>:" only on
// collision.
AssemblerSpec wedge_assembler(const std::vector<AssemblerSpec>& parts,
                              const std::vector<std::string>& prefixes = {});

// Simplicial levels 0..2 with all face/degeneracy functors between them,
// simplicial identities verified on construction.
struct SimplicialAssemblerLevels {
  std::shared_ptr<const Site> level0, level1, level2;
  CompiledFunctor d0_1, d1_1;        // level 1 -> level 0
  CompiledFunctor s0_0;              // level 0 -> level 1
  CompiledFunctor d0_2, d1_2, d2_2;  // level 2 -> level 1
  CompiledFunctor s0_1, s1_1;        // level 1 -> level 2
};

SimplicialAssemblerLevels constant_simplicial(const AssemblerSpec& c);

// Levels of the quotient-by-F construction: level 0 = C, level 1 = C v D
// (D-copy ids prefixed "d1:"), level 2 = C v D v D ("da:", "db:").
struct CofiberAssembler {
  SimplicialAssemblerLevels levels;
  std::shared_ptr<const Site> siteD;
  CompiledFunctor F;       // D -> C = level 0
  CompiledFunctor embedD;  // D -> level 1, onto the "d1:" copy
  CompiledFunctor embedC;  // C -> level 1, identity part
};

CofiberAssembler cofiber_assembler(const AssemblerSpec& cSpec, const AssemblerSpec& dSpec,
                                   const AssemblerMorphism& F);

// File loaders.  A site file holds one AssemblerSpec; a quotient-map file
// holds {"site": <path>, "sub": <path>, "object_map": {...}, "morphism_map":
// {...}} with paths resolved relative to the file itself.
AssemblerSpec load_assembler_file(const std::string& path);
CofiberAssembler load_cofiber_file(const std::string& path);

}  // namespace sck
