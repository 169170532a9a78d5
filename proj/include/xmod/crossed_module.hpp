#pragma once

#include <string>
#include <vector>

#include "xmod/groupoid.hpp"

namespace xmod {

/// A crossed module of finite groupoids (G, H, d, c): a groupoid G, a
/// bundle of groups H over the objects of G, a bundle map d sending
/// h in H_x to a loop at x, and for every arrow g an isomorphism
/// c_g : H_src(g) -> H_tgt(g), subject to
///   d(c_g(h)) = g d(h) g^-1   and   c_d(h)(k) = h k h^-1.
/// Groups are handled as one-object groupoids.
struct CrossedModule {
  FiniteGroupoid g;
  GroupBundle h;                      // over the objects of g
  std::vector<std::vector<int>> d;    // d[x][i]: arrow index of the image of fiber element i
  std::vector<std::vector<int>> c;    // c[a][i]: fiber-element index in H_tgt(a) of c_a(i), i in H_src(a)

  const FiniteGroup& fiber(int x) const { return h.fiber[x]; }
  int apply_c(int arrow, int i) const { return c[arrow][i]; }
  int apply_d(int x, int i) const { return d[x][i]; }

  bool group_flavored() const { return g.n_objects() == 1; }

  std::string describe_h(int x, int i) const { return h.fiber[x].name(i) + "@" + g.object_names[x]; }
};

namespace detail {

inline void validate_crossed_module(const CrossedModule& cm) {
  const FiniteGroupoid& g = cm.g;
  if (cm.h.n_objects() != g.n_objects()) fail("BadShape", "bundle base must equal the object set of G");
  if (static_cast<int>(cm.d.size()) != g.n_objects() || static_cast<int>(cm.c.size()) != g.n_arrows())
    fail("BadShape", "d must be indexed by objects and c by arrows");
  // d: fiberwise group homomorphism into loops
  for (int x = 0; x < g.n_objects(); ++x) {
    const FiniteGroup& hx = cm.fiber(x);
    if (static_cast<int>(cm.d[x].size()) != hx.order()) fail("BadShape", "d not total on fiber at " + g.object_names[x]);
    for (int i = 0; i < hx.order(); ++i) {
      int a = cm.d[x][i];
      if (a < 0 || a >= g.n_arrows() || g.src[a] != x || g.tgt[a] != x)
        fail("BadShape", "d(" + cm.describe_h(x, i) + ") is not a loop at its base point");
    }
    if (cm.d[x][hx.identity] != g.unit[x]) fail("NotHomomorphism", "d does not preserve the identity at " + g.object_names[x]);
    for (int i = 0; i < hx.order(); ++i)
      for (int j = 0; j < hx.order(); ++j)
        if (cm.d[x][hx.mul(i, j)] != g.comp[cm.d[x][i]][cm.d[x][j]])
          fail("NotHomomorphism", "d fails on (" + cm.describe_h(x, i) + "," + cm.describe_h(x, j) + ")");
  }
  // c_g: group isomorphism between the endpoint fibers
  for (int a = 0; a < g.n_arrows(); ++a) {
    const FiniteGroup& hs = cm.fiber(g.src[a]);
    const FiniteGroup& ht = cm.fiber(g.tgt[a]);
    if (static_cast<int>(cm.c[a].size()) != hs.order())
      fail("BadShape", "c_" + g.arrow_names[a] + " not total on the source fiber");
    std::vector<bool> hit(ht.order(), false);
    for (int v : cm.c[a]) {
      if (v < 0 || v >= ht.order()) fail("BadShape", "c value out of range");
      hit[v] = true;
    }
    for (bool hbit : hit)
      if (!hbit) fail("NotGroupIso", "c_" + g.arrow_names[a] + " is not bijective");
    for (int i = 0; i < hs.order(); ++i)
      for (int j = 0; j < hs.order(); ++j)
        if (cm.c[a][hs.mul(i, j)] != ht.mul(cm.c[a][i], cm.c[a][j]))
          fail("NotGroupIso", "c_" + g.arrow_names[a] + " fails on (" + hs.name(i) + "," + hs.name(j) + ")");
  }
  // functoriality of c
  for (int x = 0; x < g.n_objects(); ++x) {
    const FiniteGroup& hx = cm.fiber(x);
    for (int i = 0; i < hx.order(); ++i)
      if (cm.c[g.unit[x]][i] != i)
        fail("NotFunctorial", "c at the unit of " + g.object_names[x] + " moves " + hx.name(i));
  }
  for (int a = 0; a < g.n_arrows(); ++a)
    for (int b = 0; b < g.n_arrows(); ++b) {
      if (!g.composable(a, b)) continue;
      int ab = g.comp[a][b];
      for (int i = 0; i < cm.fiber(g.src[b]).order(); ++i)
        if (cm.c[ab][i] != cm.c[a][cm.c[b][i]])
          fail("NotFunctorial", "c_(" + g.arrow_names[a] + " o " + g.arrow_names[b] + ") != c_" + g.arrow_names[a] + " o c_" + g.arrow_names[b]);
    }
  // axiom 1: d(c_g(h)) = g d(h) g^-1
  for (int a = 0; a < g.n_arrows(); ++a) {
    int x = g.src[a], y = g.tgt[a];
    for (int i = 0; i < cm.fiber(x).order(); ++i) {
      int lhs = cm.d[y][cm.c[a][i]];
      int rhs = g.comp[g.comp[a][cm.d[x][i]]][g.inv[a]];
      if (lhs != rhs)
        fail("Axiom1Violation", "g=" + g.arrow_names[a] + ", h=" + cm.describe_h(x, i));
    }
  }
  // axiom 2: c_d(h)(k) = h k h^-1
  for (int x = 0; x < g.n_objects(); ++x) {
    const FiniteGroup& hx = cm.fiber(x);
    for (int i = 0; i < hx.order(); ++i)
      for (int k = 0; k < hx.order(); ++k)
        if (cm.c[cm.d[x][i]][k] != hx.conj(i, k))
          fail("Axiom2Violation", "h=" + cm.describe_h(x, i) + ", k=" + cm.describe_h(x, k));
  }
}

}  // namespace detail

/// Validates and returns a crossed module; all axiom families are
/// checked exhaustively.
inline CrossedModule crossed_module(FiniteGroupoid g, GroupBundle h,
                                    std::vector<std::vector<int>> d,
                                    std::vector<std::vector<int>> c) {
  CrossedModule cm{std::move(g), std::move(h), std::move(d), std::move(c)};
  detail::validate_crossed_module(cm);
  return cm;
}

/// Group-flavored crossed module: G, H groups, d element-wise, c one
/// permutation of H per element of G.
inline CrossedModule crossed_module_of_groups(const FiniteGroup& g, const FiniteGroup& h,
                                              std::vector<int> d, std::vector<std::vector<int>> c) {
  GroupBundle bundle;
  bundle.base_names = {"*"};
  bundle.fiber = {h};
  return crossed_module(group_as_groupoid(g), std::move(bundle), {std::move(d)}, std::move(c));
}

/// The subgroup on `subset` of g as a FiniteGroup of its own, plus the
/// index-in-g of each element.
inline std::pair<FiniteGroup, std::vector<int>> subgroup_as_group(const FiniteGroup& g,
                                                                  const std::vector<int>& subset) {
  if (!is_subgroup(g, subset)) fail("NotSubgroup", "subset is not closed");
  std::vector<int> elems(subset.begin(), subset.end());
  std::sort(elems.begin(), elems.end());
  const int m = static_cast<int>(elems.size());
  auto pos = [&](int a) {
    return static_cast<int>(std::find(elems.begin(), elems.end(), a) - elems.begin());
  };
  std::vector<std::string> names(m);
  std::vector<std::vector<int>> table(m, std::vector<int>(m));
  for (int i = 0; i < m; ++i) {
    names[i] = g.name(elems[i]);
    for (int j = 0; j < m; ++j) table[i][j] = pos(g.mul(elems[i], elems[j]));
  }
  return {group_from_table(std::move(names), std::move(table)), elems};
}

/// Normal subgroup N of G with d the inclusion and c conjugation.
inline CrossedModule from_normal_subgroup(const FiniteGroup& g, const std::vector<int>& normal) {
  auto [h, elems] = subgroup_as_group(g, normal);
  for (int x = 0; x < g.order(); ++x)
    for (int i = 0; i < h.order(); ++i)
      if (std::find(elems.begin(), elems.end(), g.conj(x, elems[i])) == elems.end())
        fail("NotNormal", "(" + g.name(x) + "," + g.name(elems[i]) + ")");
  auto pos = [&elems](int a) {
    return static_cast<int>(std::find(elems.begin(), elems.end(), a) - elems.begin());
  };
  std::vector<int> d(h.order());
  for (int i = 0; i < h.order(); ++i) d[i] = elems[i];
  std::vector<std::vector<int>> c(g.order(), std::vector<int>(h.order()));
  for (int a = 0; a < g.order(); ++a)
    for (int i = 0; i < h.order(); ++i) c[a][i] = pos(g.conj(a, elems[i]));
  return crossed_module_of_groups(g, h, std::move(d), std::move(c));
}

/// ({1}, H) for abelian H: the BH-type crossed module.
inline CrossedModule b_group(const FiniteGroup& h) {
  for (int a = 0; a < h.order(); ++a)
    for (int b = 0; b < a; ++b)
      if (h.mul(a, b) != h.mul(b, a))
        fail("NotAbelian", "(" + h.name(a) + "," + h.name(b) + ")");
  FiniteGroup triv = cyclic_group(1);
  std::vector<int> d(h.order(), 0);
  std::vector<std::vector<int>> c(1, std::vector<int>(h.order()));
  for (int i = 0; i < h.order(); ++i) c[0][i] = i;
  return crossed_module_of_groups(triv, h, std::move(d), std::move(c));
}

/// Crossed module (E/H, H, 1, c) of an extension H >--> E -->> G with
/// H abelian; c is conjugation by coset representatives.
inline CrossedModule from_abelian_extension(const FiniteGroup& e, const std::vector<int>& h_subset) {
  auto [h, elems] = subgroup_as_group(e, h_subset);
  if (!h.is_abelian()) fail("NotAbelian", "kernel of the extension is not abelian");
  for (int x = 0; x < e.order(); ++x)
    for (int n : elems)
      if (std::find(elems.begin(), elems.end(), e.conj(x, n)) == elems.end())
        fail("NotNormal", "(" + e.name(x) + "," + e.name(n) + ")");
  auto [quot, proj] = quotient_group(e, elems);
  auto pos = [&](int a) {
    return static_cast<int>(std::find(elems.begin(), elems.end(), a) - elems.begin());
  };
  // conjugation by any representative of the coset; descends because H is abelian
  std::vector<int> rep(quot.order(), -1);
  for (int x = 0; x < e.order(); ++x)
    if (rep[proj(x)] < 0) rep[proj(x)] = x;
  std::vector<std::vector<int>> c(quot.order(), std::vector<int>(h.order()));
  for (int q = 0; q < quot.order(); ++q)
    for (int i = 0; i < h.order(); ++i) c[q][i] = pos(e.conj(rep[q], elems[i]));
  // internal assertion: independence of the representative
  for (int x = 0; x < e.order(); ++x)
    for (int i = 0; i < h.order(); ++i)
      if (pos(e.conj(x, elems[i])) != c[proj(x)][i])
        fail("ActionNotDescending", "(" + e.name(x) + "," + h.name(i) + ")");
  std::vector<int> d(h.order(), quot.identity);
  return crossed_module_of_groups(quot, h, std::move(d), std::move(c));
}

/// Loops at each object, in increasing arrow order (the element order
/// used by isotropy_bundle).
inline std::vector<std::vector<int>> isotropy_loops(const FiniteGroupoid& g) {
  std::vector<std::vector<int>> loops(g.n_objects());
  for (int a = 0; a < g.n_arrows(); ++a)
    if (g.src[a] == g.tgt[a]) loops[g.src[a]].push_back(a);
  return loops;
}

/// The isotropy crossed module of a groupoid: H the isotropy bundle,
/// d the inclusion, c conjugation.  For finite discrete groupoids the
/// interior isotropy is the full isotropy bundle.
inline CrossedModule from_isotropy(const FiniteGroupoid& g) {
  GroupBundle h = isotropy_bundle(g);
  auto loops = isotropy_loops(g);
  std::vector<std::vector<int>> d(g.n_objects());
  for (int x = 0; x < g.n_objects(); ++x) d[x] = loops[x];
  std::vector<std::vector<int>> c(g.n_arrows());
  for (int a = 0; a < g.n_arrows(); ++a) {
    int x = g.src[a], y = g.tgt[a];
    c[a].resize(loops[x].size());
    for (size_t i = 0; i < loops[x].size(); ++i) {
      int conj = g.comp[g.comp[a][loops[x][i]]][g.inv[a]];
      c[a][i] = static_cast<int>(std::find(loops[y].begin(), loops[y].end(), conj) - loops[y].begin());
    }
  }
  return crossed_module(g, std::move(h), std::move(d), std::move(c));
}

// ---------------------------------------------------------------------------
// Derived consequences of the axioms, re-checked as theorems in tests.

/// ker d is central in each fiber.
inline void verify_kernel_central(const CrossedModule& cm) {
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    const FiniteGroup& hx = cm.fiber(x);
    for (int i = 0; i < hx.order(); ++i) {
      if (cm.d[x][i] != cm.g.unit[x]) continue;
      for (int k = 0; k < hx.order(); ++k)
        if (hx.mul(i, k) != hx.mul(k, i))
          fail("KernelNotCentral", "(" + cm.describe_h(x, i) + "," + cm.describe_h(x, k) + ")");
    }
  }
}

/// d(H_x) is normal in the isotropy group at x.
inline void verify_image_normal(const CrossedModule& cm) {
  auto loops = isotropy_loops(cm.g);
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    std::set<int> image(cm.d[x].begin(), cm.d[x].end());
    for (int a : loops[x])
      for (int i : cm.d[x]) {
        int conj = cm.g.comp[cm.g.comp[a][i]][cm.g.inv[a]];
        if (!image.count(conj))
          fail("ImageNotNormal", "(" + cm.g.arrow_names[a] + "," + cm.g.arrow_names[i] + ")");
      }
  }
}

// ---------------------------------------------------------------------------
// Groupoids built from a crossed module.

/// Arrow indexing shared by the crossed product groupoid and the
/// translation groupoid: pairs (h, g) with h in the fiber over tgt(g).
struct PairArrows {
  std::vector<std::pair<int, int>> pairs;            // (fiber element, arrow of G)
  std::vector<std::vector<int>> index;               // index[g][h] -> pair id
};

inline PairArrows enumerate_pairs_over_tgt(const CrossedModule& cm) {
  PairArrows pa;
  pa.index.resize(cm.g.n_arrows());
  for (int a = 0; a < cm.g.n_arrows(); ++a) {
    int y = cm.g.tgt[a];
    pa.index[a].resize(cm.fiber(y).order());
    for (int i = 0; i < cm.fiber(y).order(); ++i) {
      pa.index[a][i] = static_cast<int>(pa.pairs.size());
      pa.pairs.emplace_back(i, a);
    }
  }
  return pa;
}

/// The crossed product groupoid H x|_c G: arrows (h,g) with h in
/// H_tgt(g), product (h1,g1)(h2,g2) = (h1 c_g1(h2), g1 g2).
inline FiniteGroupoid transformation_groupoid(const CrossedModule& cm) {
  const FiniteGroupoid& g = cm.g;
  PairArrows pa = enumerate_pairs_over_tgt(cm);
  FiniteGroupoid t;
  t.object_names = g.object_names;
  const int n = static_cast<int>(pa.pairs.size());
  for (auto [i, a] : pa.pairs) {
    t.arrow_names.push_back("(" + cm.fiber(g.tgt[a]).name(i) + "," + g.arrow_names[a] + ")");
    t.src.push_back(g.src[a]);
    t.tgt.push_back(g.tgt[a]);
  }
  t.unit.resize(g.n_objects());
  for (int x = 0; x < g.n_objects(); ++x)
    t.unit[x] = pa.index[g.unit[x]][cm.fiber(x).identity];
  t.inv.resize(n);
  t.comp.assign(n, std::vector<int>(n, -1));
  for (int p = 0; p < n; ++p) {
    auto [i1, a1] = pa.pairs[p];
    const FiniteGroup& ht = cm.fiber(g.tgt[a1]);
    t.inv[p] = pa.index[g.inv[a1]][cm.c[g.inv[a1]][ht.inv(i1)]];
    for (int q = 0; q < n; ++q) {
      auto [i2, a2] = pa.pairs[q];
      if (!g.composable(a1, a2)) continue;
      int prod_h = ht.mul(i1, cm.c[a1][i2]);
      t.comp[p][q] = pa.index[g.comp[a1][a2]][prod_h];
    }
  }
  detail::validate_groupoid(t);
  return t;
}

/// The verified morphism H x|_c G -> G, (h,g) -> d(h) g.
inline GroupoidHom transformation_to_base(const CrossedModule& cm, const FiniteGroupoid& hxg) {
  PairArrows pa = enumerate_pairs_over_tgt(cm);
  std::vector<int> obj(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x) obj[x] = x;
  std::vector<int> arr(pa.pairs.size());
  for (size_t p = 0; p < pa.pairs.size(); ++p) {
    auto [i, a] = pa.pairs[p];
    arr[p] = cm.g.comp[cm.d[cm.g.tgt[a]][i]][a];
  }
  return make_groupoid_hom(hxg, cm.g, std::move(obj), std::move(arr));
}

/// The translation groupoid H |x_d G over the arrow space of G:
/// objects are arrows of G, and (h,g) is an arrow from g to d(h)g.
inline FiniteGroupoid translation_groupoid_HdG(const CrossedModule& cm) {
  const FiniteGroupoid& g = cm.g;
  PairArrows pa = enumerate_pairs_over_tgt(cm);
  FiniteGroupoid t;
  t.object_names = g.arrow_names;
  const int n = static_cast<int>(pa.pairs.size());
  auto translated = [&](int i, int a) { return g.comp[cm.d[g.tgt[a]][i]][a]; };
  for (auto [i, a] : pa.pairs) {
    t.arrow_names.push_back("(" + cm.fiber(g.tgt[a]).name(i) + "," + g.arrow_names[a] + ")");
    t.src.push_back(a);
    t.tgt.push_back(translated(i, a));
  }
  t.unit.resize(g.n_arrows());
  for (int a = 0; a < g.n_arrows(); ++a)
    t.unit[a] = pa.index[a][cm.fiber(g.tgt[a]).identity];
  t.inv.resize(n);
  t.comp.assign(n, std::vector<int>(n, -1));
  for (int p = 0; p < n; ++p) {
    auto [i1, a1] = pa.pairs[p];
    const FiniteGroup& ht = cm.fiber(g.tgt[a1]);
    t.inv[p] = pa.index[translated(i1, a1)][ht.inv(i1)];
    for (int q = 0; q < n; ++q) {
      auto [i2, a2] = pa.pairs[q];
      if (translated(i2, a2) != a1) continue;  // src(p) = tgt(q)
      t.comp[p][q] = pa.index[a2][ht.mul(i1, i2)];
    }
  }
  detail::validate_groupoid(t);
  return t;
}

}  // namespace xmod
