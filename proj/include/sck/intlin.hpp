#pragma once

#include <string>
#include <vector>

#include "sck/rational.hpp"

namespace sck {

// Dense integer matrix, row-major.
struct IMat {
  int rows = 0, cols = 0;
  std::vector<Int> a;

  IMat() = default;
  IMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, Int(0)) {}

  Int& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const Int& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  static IMat identity(int n);
  bool operator==(const IMat&) const = default;
};

IMat imat_mul(const IMat& A, const IMat& B);

// D = U * M * V with U, V unimodular and D diagonal, d1 | d2 | ... | dr,
// every diagonal entry nonnegative.
struct SmithResult {
  IMat D, U, V;
  std::vector<Int> divisors;  // the nonzero diagonal entries, in order
  int rank = 0;               // number of nonzero diagonal entries
};

SmithResult smith_normal_form(const IMat& M);

// Finitely generated abelian group presented as Z^n modulo the subgroup
// generated by the rows of a relation matrix.  Elements are coordinate
// vectors over the n ambient generators; reduce() maps them to canonical
// coordinates in which two vectors are equal iff they represent the same
// group element.
struct AbGroup {
  int n = 0;  // ambient rank
  SmithResult snf;
  std::vector<Int> torsion;  // diagonal entries > 1
  int free_rank = 0;

  // Canonical coordinates: torsion coordinates (one per diagonal entry > 1,
  // reduced into [0, d)) followed by the free coordinates.
  std::vector<Int> reduce(const std::vector<Int>& x) const;
  bool is_zero(const std::vector<Int>& x) const;

  // Coordinates of the class of x in (this group) tensor Z/2: one bit per
  // even torsion summand and per free summand, in canonical order.
  std::vector<char> reduce_mod2(const std::vector<Int>& x) const;
  int mod2_rank() const;

  // "Z^r + Z/d1 + ..." (or "0" for the trivial group).
  std::string pretty() const;
};

AbGroup make_abgroup(int n, const std::vector<std::vector<Int>>& relations);

}  // namespace sck
