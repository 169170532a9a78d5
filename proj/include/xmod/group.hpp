#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "xmod/error.hpp"
#include "xmod/linalg.hpp"

namespace xmod {

/// A finite group as a fully validated multiplication table.  Elements
/// are indices into `elements`; all maps are dense arrays over that
/// order.
struct FiniteGroup {
  std::vector<std::string> elements;
  std::vector<std::vector<int>> table;  // table[a][b] = a*b
  int identity = 0;
  std::vector<int> inverse;

  int order() const { return static_cast<int>(elements.size()); }
  int mul(int a, int b) const { return table[a][b]; }
  int inv(int a) const { return inverse[a]; }
  const std::string& name(int a) const { return elements[a]; }

  int conj(int g, int h) const { return mul(mul(g, h), inv(g)); }

  int element_order(int a) const {
    int x = a, n = 1;
    while (x != identity) {
      x = mul(x, a);
      ++n;
    }
    return n;
  }

  bool is_abelian() const {
    for (int a = 0; a < order(); ++a)
      for (int b = 0; b < a; ++b)
        if (mul(a, b) != mul(b, a)) return false;
    return true;
  }

  int index_of(const std::string& name) const {
    for (int i = 0; i < order(); ++i)
      if (elements[i] == name) return i;
    fail("UnknownElement", "no element named '" + name + "'");
  }
};

/// A verified group homomorphism, stored element-wise.
struct GroupHom {
  FiniteGroup source;
  FiniteGroup target;
  std::vector<int> map;  // source index -> target index

  int operator()(int a) const { return map[a]; }
};

/// Validates a raw Cayley table.  Associativity is checked on all
/// |G|^3 triples; identity and inverses must exist.
inline FiniteGroup group_from_table(std::vector<std::string> elements,
                                    std::vector<std::vector<int>> table,
                                    int order_cap = kGroupOrderCap) {
  const int n = static_cast<int>(elements.size());
  if (n == 0) fail("NoIdentity", "empty element set");
  if (n > order_cap) fail("SizeLimit", "group order " + std::to_string(n) + " exceeds cap " + std::to_string(order_cap));
  if (static_cast<int>(table.size()) != n) fail("BadShape", "table row count != element count");
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != n) fail("BadShape", "table row length != element count");
    for (int v : row)
      if (v < 0 || v >= n) fail("BadShape", "table entry out of range");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table[table[a][b]][c] != table[a][table[b][c]])
          fail("NonAssociative", "(" + elements[a] + "," + elements[b] + "," + elements[c] + ")");
  int identity = -1;
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int a = 0; a < n; ++a) ok = ok && table[e][a] == a && table[a][e] == a;
    if (ok) {
      identity = e;
      break;
    }
  }
  if (identity < 0) fail("NoIdentity", "no two-sided neutral element");
  std::vector<int> inverse(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      if (table[a][b] == identity && table[b][a] == identity) {
        inverse[a] = b;
        break;
      }
    if (inverse[a] < 0) fail("NoInverse", elements[a]);
  }
  return FiniteGroup{std::move(elements), std::move(table), identity, std::move(inverse)};
}

/// Validates an element-wise assignment as a homomorphism.
inline GroupHom make_hom(const FiniteGroup& src, const FiniteGroup& dst, std::vector<int> assignment) {
  if (static_cast<int>(assignment.size()) != src.order()) fail("BadShape", "assignment not total on source");
  for (int v : assignment)
    if (v < 0 || v >= dst.order()) fail("BadShape", "assignment value out of range");
  if (assignment[src.identity] != dst.identity)
    fail("NotHomomorphism", "identity does not map to identity");
  for (int a = 0; a < src.order(); ++a)
    for (int b = 0; b < src.order(); ++b)
      if (assignment[src.mul(a, b)] != dst.mul(assignment[a], assignment[b]))
        fail("NotHomomorphism", "(" + src.name(a) + "," + src.name(b) + ")");
  return GroupHom{src, dst, std::move(assignment)};
}

/// Set-theoretic image of a homomorphism, verified closed under
/// product and inverse.  Returned sorted.
inline std::vector<int> subgroup_image(const GroupHom& hom) {
  std::set<int> img(hom.map.begin(), hom.map.end());
  for (int a : img)
    for (int b : img)
      if (!img.count(hom.target.mul(a, b))) fail("NotClosed", "image not closed under product");
  for (int a : img)
    if (!img.count(hom.target.inv(a))) fail("NotClosed", "image not closed under inverse");
  return std::vector<int>(img.begin(), img.end());
}

inline bool is_subgroup(const FiniteGroup& g, const std::vector<int>& subset) {
  std::set<int> s(subset.begin(), subset.end());
  if (!s.count(g.identity)) return false;
  for (int a : s)
    for (int b : s)
      if (!s.count(g.mul(a, b))) return false;
  for (int a : s)
    if (!s.count(g.inv(a))) return false;
  return true;
}

/// Quotient by a normal subgroup: the group of cosets plus the
/// projection homomorphism.
inline std::pair<FiniteGroup, GroupHom> quotient_group(const FiniteGroup& g, const std::vector<int>& normal) {
  if (!is_subgroup(g, normal)) fail("NotSubgroup", "subset is not a subgroup");
  std::set<int> n(normal.begin(), normal.end());
  for (int x = 0; x < g.order(); ++x)
    for (int h : n)
      if (!n.count(g.conj(x, h)))
        fail("NotNormal", "(" + g.name(x) + "," + g.name(h) + ")");
  // left cosets; coset_of[a] = index of the coset containing a
  std::vector<int> coset_of(g.order(), -1);
  std::vector<int> reps;
  for (int a = 0; a < g.order(); ++a) {
    if (coset_of[a] >= 0) continue;
    int c = static_cast<int>(reps.size());
    reps.push_back(a);
    for (int h : n) coset_of[g.mul(a, h)] = c;
  }
  const int q = static_cast<int>(reps.size());
  std::vector<std::string> names(q);
  for (int c = 0; c < q; ++c) names[c] = "[" + g.name(reps[c]) + "]";
  std::vector<std::vector<int>> table(q, std::vector<int>(q));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) table[a][b] = coset_of[g.mul(reps[a], reps[b])];
  FiniteGroup quot = group_from_table(std::move(names), std::move(table));
  GroupHom proj = make_hom(g, quot, coset_of);
  return {std::move(quot), std::move(proj)};
}

// ---------------------------------------------------------------------------
// Built-in groups

inline FiniteGroup cyclic_group(int n) {
  std::vector<std::string> names(n);
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i) {
    names[i] = std::to_string(i);
    for (int j = 0; j < n; ++j) table[i][j] = (i + j) % n;
  }
  return group_from_table(std::move(names), std::move(table));
}

inline FiniteGroup klein_four_group() {
  std::vector<std::string> names = {"e", "a", "b", "c"};
  std::vector<std::vector<int>> table = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  return group_from_table(std::move(names), std::move(table));
}

namespace detail {

inline std::string cycle_notation(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::vector<bool> seen(n, false);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (seen[i] || perm[i] == i) continue;
    out += "(";
    int j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      out += (first ? "" : " ") + std::to_string(j + 1);
      first = false;
      j = perm[j];
    }
    out += ")";
  }
  return out.empty() ? "e" : out;
}

inline std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> all;
  do {
    all.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return all;
}

}  // namespace detail

/// Symmetric group on n letters (n <= 4), elements named in cycle
/// notation.  Composition convention: (p*q)(x) = p(q(x)).
inline FiniteGroup symmetric_group(int n) {
  if (n < 1 || n > 4) fail("SizeLimit", "symmetric(n) supported for n <= 4");
  auto perms = detail::all_permutations(n);
  const int m = static_cast<int>(perms.size());
  std::vector<std::string> names(m);
  for (int i = 0; i < m; ++i) names[i] = detail::cycle_notation(perms[i]);
  auto find = [&](const std::vector<int>& p) {
    for (int i = 0; i < m; ++i)
      if (perms[i] == p) return i;
    fail("Internal", "permutation not found");
  };
  std::vector<std::vector<int>> table(m, std::vector<int>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      std::vector<int> comp(n);
      for (int x = 0; x < n; ++x) comp[x] = perms[i][perms[j][x]];
      table[i][j] = find(comp);
    }
  return group_from_table(std::move(names), std::move(table));
}

/// Even permutations of S_n as an element subset (for normal_pair forms).
/// Parity is read off the cycle-notation name: (#moved points - #cycles) mod 2.
inline std::vector<int> alternating_subset(const FiniteGroup& sym) {
  std::vector<int> subset;
  for (int a = 0; a < sym.order(); ++a) {
    const std::string& nm = sym.elements[a];
    int moved = 0, cycles = 0;
    for (char ch : nm) {
      if (ch == '(') ++cycles;
      if (ch >= '1' && ch <= '9') ++moved;
    }
    if ((moved - cycles) % 2 == 0) subset.push_back(a);
  }
  return subset;
}

}  // namespace xmod
