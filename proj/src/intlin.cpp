#include "sck/intlin.hpp"

#include <utility>

#include "sck/error.hpp"

namespace sck {

IMat IMat::identity(int n) {
  IMat I(n, n);
  for (int i = 0; i < n; ++i) I.at(i, i) = 1;
  return I;
}

IMat imat_mul(const IMat& A, const IMat& B) {
  if (A.cols != B.rows) throw internal_error("matrix product shape mismatch");
  IMat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const Int& a = A.at(i, k);
      if (a == 0) continue;
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += a * B.at(k, j);
    }
  return C;
}

SmithResult smith_normal_form(const IMat& M) {
  const int m = M.rows, n = M.cols;
  SmithResult R;
  R.D = M;
  R.U = IMat::identity(m);
  R.V = IMat::identity(n);
  IMat &D = R.D, &U = R.U, &V = R.V;

  auto row_sub = [&](int dst, int src, const Int& q) {
    for (int c = 0; c < n; ++c) D.at(dst, c) -= q * D.at(src, c);
    for (int c = 0; c < m; ++c) U.at(dst, c) -= q * U.at(src, c);
  };
  auto col_sub = [&](int dst, int src, const Int& q) {
    for (int r = 0; r < m; ++r) D.at(r, dst) -= q * D.at(r, src);
    for (int r = 0; r < n; ++r) V.at(r, dst) -= q * V.at(r, src);
  };
  auto row_swap = [&](int i, int j) {
    if (i == j) return;
    for (int c = 0; c < n; ++c) std::swap(D.at(i, c), D.at(j, c));
    for (int c = 0; c < m; ++c) std::swap(U.at(i, c), U.at(j, c));
  };
  auto col_swap = [&](int i, int j) {
    if (i == j) return;
    for (int r = 0; r < m; ++r) std::swap(D.at(r, i), D.at(r, j));
    for (int r = 0; r < n; ++r) std::swap(V.at(r, i), V.at(r, j));
  };
  auto row_negate = [&](int i) {
    for (int c = 0; c < n; ++c) D.at(i, c) = -D.at(i, c);
    for (int c = 0; c < m; ++c) U.at(i, c) = -U.at(i, c);
  };

  int t = 0;
  while (t < m && t < n) {
    int pi = -1, pj = -1;
    Int best = 0;
    for (int i = t; i < m; ++i)
      for (int j = t; j < n; ++j) {
        Int v = abs(D.at(i, j));
        if (v != 0 && (pi < 0 || v < best)) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    if (pi < 0) break;
    row_swap(t, pi);
    col_swap(t, pj);

    bool clean = false;
    while (!clean) {
      clean = true;
      for (int i = t + 1; i < m; ++i) {
        if (D.at(i, t) == 0) continue;
        Int q = D.at(i, t) / D.at(t, t);
        row_sub(i, t, q);
        if (D.at(i, t) != 0) {
          row_swap(t, i);  // smaller remainder becomes the pivot
          clean = false;
        }
      }
      for (int j = t + 1; j < n; ++j) {
        if (D.at(t, j) == 0) continue;
        Int q = D.at(t, j) / D.at(t, t);
        col_sub(j, t, q);
        if (D.at(t, j) != 0) {
          col_swap(t, j);
          clean = false;
        }
      }
      if (!clean) continue;
      // Divisibility sweep: the pivot must divide every remaining entry so
      // that the final diagonal forms a chain d1 | d2 | ...
      for (int i = t + 1; i < m && clean; ++i)
        for (int j = t + 1; j < n && clean; ++j)
          if (D.at(i, j) % D.at(t, t) != 0) {
            row_sub(t, i, Int(-1));  // pulls a non-multiple into row t
            clean = false;
          }
    }
    if (D.at(t, t) < 0) row_negate(t);
    ++t;
  }

  for (int i = 0; i < t; ++i) {
    if (D.at(i, i) == 0) break;
    R.divisors.push_back(D.at(i, i));
  }
  R.rank = static_cast<int>(R.divisors.size());
  return R;
}

AbGroup make_abgroup(int n, const std::vector<std::vector<Int>>& relations) {
  AbGroup g;
  g.n = n;
  IMat M(static_cast<int>(relations.size()), n);
  for (size_t r = 0; r < relations.size(); ++r) {
    if (static_cast<int>(relations[r].size()) != n)
      throw internal_error("relation row of wrong length");
    for (int c = 0; c < n; ++c) M.at(static_cast<int>(r), c) = relations[r][c];
  }
  g.snf = smith_normal_form(M);
  for (const Int& d : g.snf.divisors)
    if (d > 1) g.torsion.push_back(d);
  g.free_rank = n - g.snf.rank;
  return g;
}

std::vector<Int> AbGroup::reduce(const std::vector<Int>& x) const {
  if (static_cast<int>(x.size()) != n)
    throw internal_error("coordinate vector of wrong length");
  // Canonical coordinates are V^T x; relations become multiples of the
  // diagonal there, so each torsion coordinate reduces mod its divisor and
  // coordinates at divisor 1 vanish.
  std::vector<Int> z(n, Int(0));
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < n; ++r)
      if (x[r] != 0) z[i] += snf.V.at(r, i) * x[r];
  std::vector<Int> out;
  for (int i = 0; i < snf.rank; ++i) {
    const Int& d = snf.divisors[i];
    if (d == 1) continue;
    Int v = z[i] % d;
    if (v < 0) v += d;
    out.push_back(v);
  }
  for (int i = snf.rank; i < n; ++i) out.push_back(z[i]);
  return out;
}

bool AbGroup::is_zero(const std::vector<Int>& x) const {
  for (const Int& v : reduce(x))
    if (v != 0) return false;
  return true;
}

std::vector<char> AbGroup::reduce_mod2(const std::vector<Int>& x) const {
  std::vector<Int> z = reduce(x);
  std::vector<char> out;
  size_t k = 0;
  for (const Int& d : torsion) {
    if (d % 2 == 0) out.push_back(static_cast<char>(z[k] % 2 != 0));
    ++k;
  }
  for (; k < z.size(); ++k) {
    Int v = z[k] % 2;
    out.push_back(static_cast<char>(v != 0));
  }
  return out;
}

int AbGroup::mod2_rank() const {
  int r = free_rank;
  for (const Int& d : torsion)
    if (d % 2 == 0) ++r;
  return r;
}

std::string AbGroup::pretty() const {
  std::string s;
  if (free_rank == 1)
    s = "Z";
  else if (free_rank > 1)
    s = "Z^" + std::to_string(free_rank);
  for (const Int& d : torsion) {
    if (!s.empty()) s += " \xE2\x8A\x95 ";
    s += "Z/" + d.str();
  }
  return s.empty() ? "0" : s;
}

}  // namespace sck
