#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xmod/crossed_product.hpp"

namespace xmod {

/// A global bisection of a finite groupoid: a section of the source
/// map whose composite with the target map permutes the objects.
struct Bisection {
  const FiniteGroupoid* groupoid = nullptr;
  std::vector<int> section;  // object -> arrow, src(section(x)) = x

  int target_of(int x) const { return groupoid->tgt[section[x]]; }
};

inline Bisection make_bisection(const FiniteGroupoid& k, std::vector<int> section) {
  if (static_cast<int>(section.size()) != k.n_objects()) fail("BadShape", "section not total on objects");
  std::vector<bool> hit(k.n_objects(), false);
  for (int x = 0; x < k.n_objects(); ++x) {
    int a = section[x];
    if (a < 0 || a >= k.n_arrows() || k.src[a] != x) fail("BadShape", "section value is not an arrow out of its object");
    hit[k.tgt[a]] = true;
  }
  for (bool b : hit)
    if (!b) fail("NotBisection", "target composite is not a bijection on objects");
  return Bisection{&k, std::move(section)};
}

/// A groupoid automorphism: compatible bijections on objects and arrows.
struct GroupoidAut {
  const FiniteGroupoid* groupoid = nullptr;
  std::vector<int> object_map;
  std::vector<int> arrow_map;
};

inline GroupoidAut make_groupoid_aut(const FiniteGroupoid& k, std::vector<int> object_map,
                                     std::vector<int> arrow_map) {
  GroupoidHom hom = make_groupoid_hom(k, k, object_map, arrow_map);
  std::vector<bool> hito(k.n_objects(), false), hita(k.n_arrows(), false);
  for (int x : object_map) hito[x] = true;
  for (int a : arrow_map) hita[a] = true;
  for (bool b : hito)
    if (!b) fail("NotBijective", "object map of the automorphism is not bijective");
  for (bool b : hita)
    if (!b) fail("NotBijective", "arrow map of the automorphism is not bijective");
  return GroupoidAut{&k, std::move(hom.object_map), std::move(hom.arrow_map)};
}

// ---------------------------------------------------------------------------
// The group of global bisections and Aut_2(K)

/// All global bisections of K, as a finite group under
/// h_ST(x) = h_S(tgt h_T(x)) . h_T(x).  Returns the group together
/// with the section table (group element -> section).
struct BisectionGroup {
  FiniteGroup group;
  std::vector<std::vector<int>> sections;
};

inline BisectionGroup bisection_group(const FiniteGroupoid& k, long candidate_cap = kAutCandidateCap) {
  // enumerate sections of src with bijective target composite
  std::vector<std::vector<int>> out_arrows(k.n_objects());
  for (int a = 0; a < k.n_arrows(); ++a) out_arrows[k.src[a]].push_back(a);
  long combinations = 1;
  for (int x = 0; x < k.n_objects(); ++x) {
    combinations *= static_cast<long>(out_arrows[x].size());
    if (combinations > candidate_cap) fail("SizeLimit", "too many section candidates");
  }
  std::vector<std::vector<int>> sections;
  std::vector<int> current(k.n_objects(), -1);
  std::vector<bool> used(k.n_objects(), false);
  std::function<void(int)> rec = [&](int x) {
    if (x == k.n_objects()) {
      sections.push_back(current);
      return;
    }
    for (int a : out_arrows[x]) {
      int t = k.tgt[a];
      if (used[t]) continue;
      used[t] = true;
      current[x] = a;
      rec(x + 1);
      used[t] = false;
    }
  };
  rec(0);

  const int n = static_cast<int>(sections.size());
  auto find = [&](const std::vector<int>& s) {
    for (int i = 0; i < n; ++i)
      if (sections[i] == s) return i;
    fail("NotBisection", "bisection product left the enumerated set");
  };
  std::vector<std::string> names(n);
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i) {
    std::string nm = "S[";
    for (int x = 0; x < k.n_objects(); ++x) nm += (x ? "," : "") + k.arrow_names[sections[i][x]];
    names[i] = nm + "]";
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<int> prod(k.n_objects());
      for (int x = 0; x < k.n_objects(); ++x) {
        int hT = sections[j][x];
        int hS = sections[i][k.tgt[hT]];
        prod[x] = k.comp[hS][hT];
      }
      table[i][j] = find(prod);
    }
  return BisectionGroup{group_from_table(std::move(names), std::move(table), 1 << 20), std::move(sections)};
}

/// The automorphism generated by a bisection:
/// on objects x -> tgt h(x), on arrows k -> h(tgt k) . k . h(src k)^-1.
inline GroupoidAut bisection_to_aut(const Bisection& s) {
  const FiniteGroupoid& k = *s.groupoid;
  std::vector<int> omap(k.n_objects()), amap(k.n_arrows());
  for (int x = 0; x < k.n_objects(); ++x) omap[x] = s.target_of(x);
  for (int a = 0; a < k.n_arrows(); ++a)
    amap[a] = k.comp[k.comp[s.section[k.tgt[a]]][a]][k.inv[s.section[k.src[a]]]];
  return make_groupoid_aut(k, std::move(omap), std::move(amap));
}

/// All automorphisms of K by backtracking over object bijections and
/// arrow assignments, with early pruning on endpoints, units, and
/// partial composition.
inline std::vector<GroupoidAut> enumerate_automorphisms(const FiniteGroupoid& k,
                                                        long candidate_cap = kAutCandidateCap) {
  std::vector<GroupoidAut> found;
  std::vector<int> operm(k.n_objects());
  std::iota(operm.begin(), operm.end(), 0);
  long candidates = 0;
  do {
    // arrows sorted so that units come first (their images are forced)
    std::vector<int> amap(k.n_arrows(), -1);
    std::vector<bool> taken(k.n_arrows(), false);
    bool unit_ok = true;
    for (int x = 0; x < k.n_objects(); ++x) {
      int img = k.unit[operm[x]];
      amap[k.unit[x]] = img;
      if (taken[img]) unit_ok = false;
      taken[img] = true;
    }
    if (!unit_ok) continue;
    std::function<bool(int)> rec = [&](int a) -> bool {
      while (a < k.n_arrows() && amap[a] >= 0) ++a;
      if (a == k.n_arrows()) {
        try {
          found.push_back(make_groupoid_aut(k, operm, amap));
        } catch (const Error&) {
        }
        return true;
      }
      for (int img = 0; img < k.n_arrows(); ++img) {
        if (taken[img]) continue;
        if (k.src[img] != operm[k.src[a]] || k.tgt[img] != operm[k.tgt[a]]) continue;
        if (++candidates > candidate_cap) fail("SizeLimit", "automorphism search exceeded the candidate cap");
        amap[a] = img;
        taken[img] = true;
        // prune: composites with already-assigned arrows must match
        bool ok = true;
        for (int b = 0; b < k.n_arrows() && ok; ++b) {
          if (amap[b] < 0) continue;
          if (k.composable(a, b) && amap[k.comp[a][b]] >= 0 &&
              amap[k.comp[a][b]] != k.comp[img][amap[b]])
            ok = false;
          if (k.composable(b, a) && amap[k.comp[b][a]] >= 0 &&
              amap[k.comp[b][a]] != k.comp[amap[b]][img])
            ok = false;
        }
        if (ok) rec(a + 1);
        amap[a] = -1;
        taken[img] = false;
      }
      return false;
    };
    rec(0);
  } while (std::next_permutation(operm.begin(), operm.end()));
  return found;
}

/// The crossed module Aut_2(K) = (Aut(K), S(K), d, c) of a small
/// groupoid: d sends a bisection to its inner automorphism, and
/// automorphisms act on sections by conjugation.
struct Aut2Result {
  CrossedModule cm;
  BisectionGroup bisections;
  std::vector<GroupoidAut> automorphisms;
};

inline Aut2Result aut2(const FiniteGroupoid& k, long candidate_cap = kAutCandidateCap) {
  BisectionGroup bg = bisection_group(k, candidate_cap);
  std::vector<GroupoidAut> auts = enumerate_automorphisms(k, candidate_cap);
  const int na = static_cast<int>(auts.size());
  auto aut_index = [&](const std::vector<int>& omap, const std::vector<int>& amap) {
    for (int i = 0; i < na; ++i)
      if (auts[i].object_map == omap && auts[i].arrow_map == amap) return i;
    fail("Internal", "automorphism composite not found");
  };
  std::vector<std::string> names(na);
  std::vector<std::vector<int>> table(na, std::vector<int>(na));
  for (int i = 0; i < na; ++i) {
    std::string nm = "aut" + std::to_string(i);
    names[i] = nm;
    for (int j = 0; j < na; ++j) {
      std::vector<int> om(k.n_objects()), am(k.n_arrows());
      for (int x = 0; x < k.n_objects(); ++x) om[x] = auts[i].object_map[auts[j].object_map[x]];
      for (int a = 0; a < k.n_arrows(); ++a) am[a] = auts[i].arrow_map[auts[j].arrow_map[a]];
      table[i][j] = aut_index(om, am);
    }
  }
  FiniteGroup autgrp = group_from_table(std::move(names), std::move(table), 1 << 20);

  const int nb = bg.group.order();
  auto section_index = [&](const std::vector<int>& s) {
    for (int i = 0; i < nb; ++i)
      if (bg.sections[i] == s) return i;
    fail("Internal", "conjugated section not found");
  };
  // d: bisection -> its automorphism
  std::vector<int> d(nb);
  for (int i = 0; i < nb; ++i) {
    GroupoidAut a = bisection_to_aut(Bisection{&k, bg.sections[i]});
    d[i] = aut_index(a.object_map, a.arrow_map);
  }
  // c: (phi . S)(x) = phi(S(phi^-1 x))
  std::vector<std::vector<int>> c(na, std::vector<int>(nb));
  for (int i = 0; i < na; ++i) {
    std::vector<int> oinv(k.n_objects());
    for (int x = 0; x < k.n_objects(); ++x) oinv[auts[i].object_map[x]] = x;
    for (int j = 0; j < nb; ++j) {
      std::vector<int> s(k.n_objects());
      for (int x = 0; x < k.n_objects(); ++x) s[x] = auts[i].arrow_map[bg.sections[j][oinv[x]]];
      c[i][j] = section_index(s);
    }
  }
  CrossedModule cm = crossed_module_of_groups(autgrp, bg.group, std::move(d), std::move(c));
  return Aut2Result{std::move(cm), std::move(bg), std::move(auts)};
}

// ---------------------------------------------------------------------------
// Actions of crossed modules on groupoids

/// An action of a crossed module on a groupoid K anchored over X:
/// G acts by isomorphisms between the anchor fibers, H by global
/// bisections of the fibers, subject to
///   alpha_d(h)(k) = kappa_h(tgt k) . k . kappa_h(src k)^-1
///   kappa_c_g(h)(y) = alpha_g(kappa_h(alpha_g^-1(y))).
struct CMGroupoidAction {
  CrossedModule cm;
  FiniteGroupoid k;
  std::vector<int> rho;                      // objects of K -> X
  std::vector<std::vector<int>> alpha_obj;   // per arrow of G: total object map of K (restricted to the fiber)
  std::vector<std::vector<int>> alpha_arr;   // per arrow of G: total arrow map of K
  std::vector<std::vector<std::vector<int>>> kappa;  // kappa[x][h]: object of K_x -> arrow of K_x
};

namespace detail {

inline void validate_cm_groupoid_action(const CMGroupoidAction& act) {
  const CrossedModule& cm = act.cm;
  const FiniteGroupoid& k = act.k;
  if (static_cast<int>(act.rho.size()) != k.n_objects()) fail("BadShape", "anchor not total on objects");
  for (int a = 0; a < k.n_arrows(); ++a)
    if (act.rho[k.src[a]] != act.rho[k.tgt[a]])
      fail("AnchorNotInvariant", "arrow " + k.arrow_names[a] + " crosses anchor fibers");
  if (static_cast<int>(act.alpha_obj.size()) != cm.g.n_arrows() ||
      static_cast<int>(act.alpha_arr.size()) != cm.g.n_arrows())
    fail("BadShape", "alpha must be indexed by the arrows of G");

  // alpha_g: a groupoid isomorphism K_s -> K_t between anchor fibers
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    int s = cm.g.src[g], t = cm.g.tgt[g];
    for (int y = 0; y < k.n_objects(); ++y) {
      if (act.rho[y] != s) continue;
      int img = act.alpha_obj[g][y];
      if (img < 0 || img >= k.n_objects() || act.rho[img] != t)
        fail("AnchorNotInvariant", "alpha_" + cm.g.arrow_names[g] + " does not map the fiber over source to the fiber over target");
    }
    for (int a = 0; a < k.n_arrows(); ++a) {
      if (act.rho[k.src[a]] != s) continue;
      int img = act.alpha_arr[g][a];
      if (img < 0 || img >= k.n_arrows()) fail("BadShape", "alpha arrow image out of range");
      if (k.src[img] != act.alpha_obj[g][k.src[a]] || k.tgt[img] != act.alpha_obj[g][k.tgt[a]])
        fail("BadShape", "alpha_" + cm.g.arrow_names[g] + " breaks endpoints at " + k.arrow_names[a]);
    }
    for (int a = 0; a < k.n_arrows(); ++a)
      for (int b = 0; b < k.n_arrows(); ++b) {
        if (act.rho[k.src[a]] != s || act.rho[k.src[b]] != s) continue;
        if (!k.composable(a, b)) continue;
        if (act.alpha_arr[g][k.comp[a][b]] != k.comp[act.alpha_arr[g][a]][act.alpha_arr[g][b]])
          fail("BadShape", "alpha_" + cm.g.arrow_names[g] + " is not a groupoid morphism");
      }
    for (int y = 0; y < k.n_objects(); ++y)
      if (act.rho[y] == s && act.alpha_arr[g][k.unit[y]] != k.unit[act.alpha_obj[g][y]])
        fail("BadShape", "alpha_" + cm.g.arrow_names[g] + " breaks units");
  }
  // functoriality of alpha
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    int u = cm.g.unit[x];
    for (int y = 0; y < k.n_objects(); ++y)
      if (act.rho[y] == x && act.alpha_obj[u][y] != y)
        fail("BadShape", "alpha at a unit of G moves objects");
  }
  for (int g1 = 0; g1 < cm.g.n_arrows(); ++g1)
    for (int g2 = 0; g2 < cm.g.n_arrows(); ++g2) {
      if (!cm.g.composable(g1, g2)) continue;
      int g12 = cm.g.comp[g1][g2];
      int s2 = cm.g.src[g2];
      for (int y = 0; y < k.n_objects(); ++y)
        if (act.rho[y] == s2 && act.alpha_obj[g12][y] != act.alpha_obj[g1][act.alpha_obj[g2][y]])
          fail("BadShape", "alpha is not functorial on objects");
      for (int a = 0; a < k.n_arrows(); ++a)
        if (act.rho[k.src[a]] == s2 && act.alpha_arr[g12][a] != act.alpha_arr[g1][act.alpha_arr[g2][a]])
          fail("BadShape", "alpha is not functorial on arrows");
    }
  // kappa: bisections of the anchor fibers
  if (static_cast<int>(act.kappa.size()) != cm.g.n_objects()) fail("BadShape", "kappa must be indexed by X");
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    if (static_cast<int>(act.kappa[x].size()) != cm.fiber(x).order())
      fail("BadShape", "kappa not total on the fiber at " + cm.g.object_names[x]);
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      const auto& sec = act.kappa[x][h];
      std::set<int> targets;
      for (int y = 0; y < k.n_objects(); ++y) {
        if (act.rho[y] != x) {
          if (sec[y] >= 0) fail("BadShape", "kappa defined outside its fiber");
          continue;
        }
        int a = sec[y];
        if (a < 0 || a >= k.n_arrows() || k.src[a] != y || act.rho[k.tgt[a]] != x)
          fail("BisectionAxiomViolation", "kappa_" + cm.describe_h(x, h) + " is not a section at " + k.object_names[y]);
        targets.insert(k.tgt[a]);
      }
      int fiber_size = 0;
      for (int y = 0; y < k.n_objects(); ++y)
        if (act.rho[y] == x) ++fiber_size;
      if (static_cast<int>(targets.size()) != fiber_size)
        fail("BisectionAxiomViolation", "kappa_" + cm.describe_h(x, h) + " is not a bisection");
    }
  }
  // axiom 1: alpha_d(h)(a) = kappa_h(tgt a) . a . kappa_h(src a)^-1
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      int loop = cm.d[x][h];
      for (int a = 0; a < k.n_arrows(); ++a) {
        if (act.rho[k.src[a]] != x) continue;
        int lhs = act.alpha_arr[loop][a];
        int rhs = k.comp[k.comp[act.kappa[x][h][k.tgt[a]]][a]][k.inv[act.kappa[x][h][k.src[a]]]];
        if (lhs != rhs)
          fail("BisectionAxiomViolation", "h=" + cm.describe_h(x, h) + ", arrow=" + k.arrow_names[a]);
      }
    }
  // axiom 2: kappa_{c_g(h)}(y) = alpha_g(kappa_h(alpha_g^-1(y)))
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    int s = cm.g.src[g], t = cm.g.tgt[g];
    int ginv = cm.g.inv[g];
    for (int h = 0; h < cm.fiber(s).order(); ++h) {
      int ch = cm.c[g][h];
      for (int y = 0; y < k.n_objects(); ++y) {
        if (act.rho[y] != t) continue;
        int lhs = act.kappa[t][ch][y];
        int rhs = act.alpha_arr[g][act.kappa[s][h][act.alpha_obj[ginv][y]]];
        if (lhs != rhs)
          fail("ConjugationAxiomViolation", "g=" + cm.g.arrow_names[g] + ", h=" + cm.describe_h(s, h) + ", y=" + k.object_names[y]);
      }
    }
  }
}

}  // namespace detail

inline CMGroupoidAction cm_groupoid_action(CrossedModule cm, FiniteGroupoid k, std::vector<int> rho,
                                           std::vector<std::vector<int>> alpha_obj,
                                           std::vector<std::vector<int>> alpha_arr,
                                           std::vector<std::vector<std::vector<int>>> kappa) {
  CMGroupoidAction act{std::move(cm), std::move(k), std::move(rho), std::move(alpha_obj),
                       std::move(alpha_arr), std::move(kappa)};
  detail::validate_cm_groupoid_action(act);
  return act;
}

/// An action on an equivalence-relation groupoid is determined by the
/// object action alone (arrows and bisections are reconstructed
/// uniquely).  `object_maps[g]` must lift the X-action.
inline CMGroupoidAction cm_action_on_equivalence_relation(const CrossedModule& cm, const FiniteGroupoid& k,
                                                          std::vector<int> rho,
                                                          const std::vector<std::vector<int>>& object_maps) {
  // principality check
  for (int a = 0; a < k.n_arrows(); ++a)
    if (k.src[a] == k.tgt[a] && a != k.unit[k.src[a]])
      fail("BadShape", "groupoid has nontrivial isotropy; not an equivalence relation");
  auto arrow_between = [&](int from, int to) {
    for (int a = 0; a < k.n_arrows(); ++a)
      if (k.src[a] == from && k.tgt[a] == to) return a;
    return -1;
  };
  std::vector<std::vector<int>> alpha_arr(cm.g.n_arrows(), std::vector<int>(k.n_arrows(), -1));
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    int s = cm.g.src[g];
    for (int a = 0; a < k.n_arrows(); ++a) {
      if (rho[k.src[a]] != s) continue;
      int img = arrow_between(object_maps[g][k.src[a]], object_maps[g][k.tgt[a]]);
      if (img < 0)
        fail("BadShape", "object action does not preserve the equivalence relation at " + k.arrow_names[a]);
      alpha_arr[g][a] = img;
    }
  }
  std::vector<std::vector<std::vector<int>>> kappa(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      std::vector<int> sec(k.n_objects(), -1);
      int loop = cm.d[x][h];
      for (int y = 0; y < k.n_objects(); ++y) {
        if (rho[y] != x) continue;
        int a = arrow_between(y, object_maps[loop][y]);
        if (a < 0) fail("BisectionAxiomViolation", "alpha_d(h) does not stay in the equivalence class at " + k.object_names[y]);
        sec[y] = a;
      }
      kappa[x].push_back(std::move(sec));
    }
  return cm_groupoid_action(cm, k, std::move(rho), object_maps, std::move(alpha_arr), std::move(kappa));
}

/// The left translation action of a crossed module on its translation
/// groupoid H |x_d G: g acts by (h, g') -> (c_g(h), g g'), and h maps
/// to the constant bisection g' -> (h, g').
inline CMGroupoidAction translation_action(const CrossedModule& cm) {
  FiniteGroupoid k = translation_groupoid_HdG(cm);
  PairArrows pa = enumerate_pairs_over_tgt(cm);
  // objects of K are the arrows of G, anchored by their target
  std::vector<int> rho(cm.g.n_arrows());
  for (int a = 0; a < cm.g.n_arrows(); ++a) rho[a] = cm.g.tgt[a];
  std::vector<std::vector<int>> alpha_obj(cm.g.n_arrows()), alpha_arr(cm.g.n_arrows());
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    alpha_obj[g].assign(k.n_objects(), -1);
    alpha_arr[g].assign(k.n_arrows(), -1);
    int s = cm.g.src[g];
    for (int gp = 0; gp < cm.g.n_arrows(); ++gp)
      if (cm.g.tgt[gp] == s) alpha_obj[g][gp] = cm.g.comp[g][gp];
    for (int p = 0; p < k.n_arrows(); ++p) {
      auto [h, gp] = pa.pairs[p];
      if (cm.g.tgt[gp] != s) continue;
      alpha_arr[g][p] = pa.index[cm.g.comp[g][gp]][cm.c[g][h]];
    }
  }
  std::vector<std::vector<std::vector<int>>> kappa(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      std::vector<int> sec(k.n_objects(), -1);
      for (int gp = 0; gp < cm.g.n_arrows(); ++gp)
        if (cm.g.tgt[gp] == x) sec[gp] = pa.index[gp][h];
      kappa[x].push_back(std::move(sec));
    }
  return cm_groupoid_action(cm, std::move(k), std::move(rho), std::move(alpha_obj), std::move(alpha_arr),
                            std::move(kappa));
}

/// The action induced on the groupoid algebra C*(K): alpha pushes the
/// delta basis forward, and u_h is the sum of the delta functions of
/// the bisection's arrows.
inline CMAction induced_algebra_action(const CMGroupoidAction& act, double tol = kTolAlg) {
  const CrossedModule& cm = act.cm;
  const FiniteGroupoid& k = act.k;
  // fiber the algebra over X through the anchor
  StarAlgebra alg = groupoid_algebra(k, act.rho, cm.g.object_names);
  AlgPtr ap = alg_ptr(std::move(alg));
  std::vector<Mat> alpha;
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    int s = cm.g.src[g], t = cm.g.tgt[g];
    const auto& sblk = ap->blocks[s];
    const auto& tblk = ap->blocks[t];
    Mat m = Mat::Zero(tblk.size(), sblk.size());
    std::vector<int> pos(ap->dim, -1);
    for (size_t r = 0; r < tblk.size(); ++r) pos[tblk[r]] = static_cast<int>(r);
    for (size_t c = 0; c < sblk.size(); ++c) m(pos[act.alpha_arr[g][sblk[c]]], static_cast<int>(c)) = 1.0;
    alpha.push_back(std::move(m));
  }
  std::vector<std::vector<Vec>> u(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      Vec uh = Vec::Zero(ap->dim);
      for (int y = 0; y < k.n_objects(); ++y)
        if (act.rho[y] == x) uh(act.kappa[x][h][y]) += 1.0;
      u[x].push_back(std::move(uh));
    }
  GroupoidAlgebraAction ga = groupoid_algebra_action(cm.g, ap, std::move(alpha), tol);
  return cm_action(cm, ap, std::move(ga), std::move(u), tol);
}

/// The explicit intertwiner C*(H |x_d G) -> C0(G) x| H,
/// d_(h,g) -> e_{d(h)g} (x) d_h, aligning the induced translation
/// action with the canonical action on the crossed product.
inline EquivariantMap translation_bridge(const CMAction& induced, const CMAction& canonical,
                                         const CanonicalBHResult& bh, const CrossedModule& cm,
                                         double tol = kTolAlg) {
  PairArrows pa = enumerate_pairs_over_tgt(cm);
  std::vector<std::vector<int>> harrow(cm.g.n_objects());
  {
    int next = 0;
    for (int x = 0; x < cm.g.n_objects(); ++x)
      for (int i = 0; i < cm.fiber(x).order(); ++i) harrow[x].push_back(next++);
  }
  const StarAlgebra& src = *induced.algebra;  // C*(H |x G): basis = pairs (h,g)
  const StarAlgebra& dst = *canonical.algebra;
  Mat m = Mat::Zero(dst.dim, src.dim);
  for (int p = 0; p < src.dim; ++p) {
    auto [h, g] = pa.pairs[p];
    int x = cm.g.tgt[g];
    int dh_g = cm.g.comp[cm.d[x][h]][g];
    // position of the point dh_g inside the fiber of C0(G) at x: the
    // coefficient algebra basis is indexed by the arrows of G with tgt x
    int pos = -1, count = 0;
    for (int a = 0; a < cm.g.n_arrows(); ++a) {
      if (cm.g.tgt[a] != x) continue;
      if (a == dh_g) pos = count;
      ++count;
    }
    m(bh.product.arrow_basis[harrow[x][h]][pos], p) = 1.0;
  }
  StarHom hom = make_star_hom(induced.algebra, canonical.algebra, std::move(m), tol);
  return equivariant_map(induced, canonical, std::move(hom), tol);
}

}  // namespace xmod
