#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xmod/group.hpp"

namespace xmod {

/// A finite groupoid: a small category with all arrows invertible.
/// `comp[a][b]` is the composite "b then a", defined exactly when
/// src(a) = tgt(b), stored as -1 otherwise.  The Haar system is the
/// counting system (weight 1 per arrow) throughout.
struct FiniteGroupoid {
  std::vector<std::string> object_names;
  std::vector<std::string> arrow_names;
  std::vector<int> src, tgt;            // arrow -> object
  std::vector<int> unit;                // object -> arrow
  std::vector<std::vector<int>> comp;   // comp[a][b], -1 when not composable
  std::vector<int> inv;                 // arrow -> arrow

  int n_objects() const { return static_cast<int>(object_names.size()); }
  int n_arrows() const { return static_cast<int>(arrow_names.size()); }
  bool composable(int a, int b) const { return src[a] == tgt[b]; }
  int mul(int a, int b) const { return comp[a][b]; }  // a after b

  /// Objects grouped into connected components (orbits).
  std::vector<int> orbit_of() const {
    std::vector<int> rep(n_objects());
    for (int i = 0; i < n_objects(); ++i) rep[i] = i;
    std::function<int(int)> find = [&](int x) { return rep[x] == x ? x : rep[x] = find(rep[x]); };
    for (int a = 0; a < n_arrows(); ++a) {
      int u = find(src[a]), v = find(tgt[a]);
      if (u != v) rep[std::max(u, v)] = std::min(u, v);
    }
    std::map<int, int> relabel;
    std::vector<int> orbit(n_objects());
    for (int i = 0; i < n_objects(); ++i) {
      int r = find(i);
      if (!relabel.count(r)) relabel[r] = static_cast<int>(relabel.size());
      orbit[i] = relabel[r];
    }
    return orbit;
  }

  int arrow_index(const std::string& name) const {
    for (int a = 0; a < n_arrows(); ++a)
      if (arrow_names[a] == name) return a;
    fail("UnknownArrow", "no arrow named '" + name + "'");
  }

  int object_index(const std::string& name) const {
    for (int x = 0; x < n_objects(); ++x)
      if (object_names[x] == name) return x;
    fail("UnknownObject", "no object named '" + name + "'");
  }
};

/// A bundle of finite groups over a finite object set.
struct GroupBundle {
  std::vector<std::string> base_names;
  std::vector<FiniteGroup> fiber;  // one group per base point

  int n_objects() const { return static_cast<int>(base_names.size()); }
};

/// A verified morphism of finite groupoids.
struct GroupoidHom {
  FiniteGroupoid source;
  FiniteGroupoid target;
  std::vector<int> object_map;
  std::vector<int> arrow_map;
};

namespace detail {

inline void validate_groupoid(const FiniteGroupoid& g) {
  const int no = g.n_objects(), na = g.n_arrows();
  if (static_cast<int>(g.src.size()) != na || static_cast<int>(g.tgt.size()) != na ||
      static_cast<int>(g.inv.size()) != na || static_cast<int>(g.unit.size()) != no ||
      static_cast<int>(g.comp.size()) != na)
    fail("BadShape", "groupoid maps have inconsistent sizes");
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < na; ++b) {
      int c = g.comp[a][b];
      if (g.composable(a, b)) {
        if (c < 0) fail("NotCategory", "missing composite " + g.arrow_names[a] + " o " + g.arrow_names[b]);
        if (g.src[c] != g.src[b] || g.tgt[c] != g.tgt[a])
          fail("NotCategory", "composite " + g.arrow_names[a] + " o " + g.arrow_names[b] + " has wrong endpoints");
      } else if (c >= 0) {
        fail("NotCategory", "composite defined on non-composable pair (" + g.arrow_names[a] + "," + g.arrow_names[b] + ")");
      }
    }
  for (int x = 0; x < no; ++x) {
    int u = g.unit[x];
    if (u < 0 || u >= na || g.src[u] != x || g.tgt[u] != x) fail("NoUnits", "unit at object " + g.object_names[x]);
    for (int a = 0; a < na; ++a) {
      if (g.tgt[a] == x && g.comp[u][a] != a) fail("NoUnits", "unit at " + g.object_names[x] + " not left-neutral on " + g.arrow_names[a]);
      if (g.src[a] == x && g.comp[a][u] != a) fail("NoUnits", "unit at " + g.object_names[x] + " not right-neutral on " + g.arrow_names[a]);
    }
  }
  for (int a = 0; a < na; ++a) {
    int i = g.inv[a];
    if (i < 0 || i >= na || g.src[i] != g.tgt[a] || g.tgt[i] != g.src[a])
      fail("NoInverses", g.arrow_names[a]);
    if (g.comp[a][i] != g.unit[g.tgt[a]] || g.comp[i][a] != g.unit[g.src[a]])
      fail("NoInverses", g.arrow_names[a] + " has no two-sided inverse");
  }
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < na; ++b) {
      if (!g.composable(a, b)) continue;
      for (int c = 0; c < na; ++c) {
        if (!g.composable(b, c)) continue;
        if (g.comp[g.comp[a][b]][c] != g.comp[a][g.comp[b][c]])
          fail("NotCategory", "associativity fails on (" + g.arrow_names[a] + "," + g.arrow_names[b] + "," + g.arrow_names[c] + ")");
      }
    }
}

}  // namespace detail

/// Builds a verified groupoid from raw data.  Units and inverses are
/// inferred from the composition table when present.
inline FiniteGroupoid groupoid_from_data(std::vector<std::string> objects,
                                         std::vector<std::string> arrows,
                                         std::vector<int> src, std::vector<int> tgt,
                                         std::vector<std::vector<int>> comp) {
  FiniteGroupoid g;
  g.object_names = std::move(objects);
  g.arrow_names = std::move(arrows);
  g.src = std::move(src);
  g.tgt = std::move(tgt);
  g.comp = std::move(comp);
  const int na = g.n_arrows();
  // infer units: for each object, an arrow neutral on everything composable
  g.unit.assign(g.n_objects(), -1);
  for (int x = 0; x < g.n_objects(); ++x) {
    for (int u = 0; u < na; ++u) {
      if (g.src[u] != x || g.tgt[u] != x) continue;
      bool neutral = true;
      for (int a = 0; a < na && neutral; ++a) {
        if (g.tgt[a] == x && g.comp[u][a] != a) neutral = false;
        if (g.src[a] == x && g.comp[a][u] != a) neutral = false;
      }
      if (neutral) {
        g.unit[x] = u;
        break;
      }
    }
    if (g.unit[x] < 0) fail("NoUnits", "no unit at object " + g.object_names[x]);
  }
  g.inv.assign(na, -1);
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < na; ++b)
      if (g.composable(a, b) && g.composable(b, a) && g.comp[a][b] == g.unit[g.tgt[a]] &&
          g.comp[b][a] == g.unit[g.src[a]]) {
        g.inv[a] = b;
        break;
      }
    if (g.inv[a] < 0) fail("NoInverses", g.arrow_names[a]);
  }
  detail::validate_groupoid(g);
  return g;
}

/// A group seen as a one-object groupoid.
inline FiniteGroupoid group_as_groupoid(const FiniteGroup& grp, const std::string& object_name = "*") {
  FiniteGroupoid g;
  g.object_names = {object_name};
  g.arrow_names = grp.elements;
  const int n = grp.order();
  g.src.assign(n, 0);
  g.tgt.assign(n, 0);
  g.unit = {grp.identity};
  g.inv = grp.inverse;
  g.comp.assign(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g.comp[a][b] = grp.mul(a, b);
  detail::validate_groupoid(g);
  return g;
}

/// The pair groupoid on n objects: arrows (i,j) from j to i.
inline FiniteGroupoid pair_groupoid(int n) {
  FiniteGroupoid g;
  for (int i = 0; i < n; ++i) g.object_names.push_back(std::to_string(i + 1));
  auto id = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g.arrow_names.push_back("(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      g.src.push_back(j);
      g.tgt.push_back(i);
    }
  g.unit.resize(n);
  for (int i = 0; i < n; ++i) g.unit[i] = id(i, i);
  g.inv.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.inv[id(i, j)] = id(j, i);
  g.comp.assign(n * n, std::vector<int>(n * n, -1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g.comp[id(i, j)][id(j, k)] = id(i, k);
  detail::validate_groupoid(g);
  return g;
}

/// Transformation groupoid X x| G of a group action: arrows (x,g) with
/// src (x,g) = x, tgt (x,g) = g.x.
inline FiniteGroupoid action_groupoid(const FiniteGroup& grp, const std::vector<std::string>& set,
                                      const std::vector<std::vector<int>>& action) {
  const int nx = static_cast<int>(set.size());
  if (static_cast<int>(action.size()) != grp.order()) fail("BadShape", "action map not total on group");
  for (const auto& row : action) {
    if (static_cast<int>(row.size()) != nx) fail("BadShape", "action row not total on set");
    std::vector<bool> hit(nx, false);
    for (int v : row) {
      if (v < 0 || v >= nx) fail("BadShape", "action value out of range");
      hit[v] = true;
    }
    for (bool h : hit)
      if (!h) fail("NotAction", "action of an element is not a bijection");
  }
  for (int x = 0; x < nx; ++x)
    if (action[grp.identity][x] != x) fail("NotAction", "identity moves point " + set[x]);
  for (int a = 0; a < grp.order(); ++a)
    for (int b = 0; b < grp.order(); ++b)
      for (int x = 0; x < nx; ++x)
        if (action[grp.mul(a, b)][x] != action[a][action[b][x]])
          fail("NotAction", "(" + grp.name(a) + "," + grp.name(b) + "," + set[x] + ")");

  FiniteGroupoid g;
  g.object_names = set;
  auto id = [&](int x, int a) { return x * grp.order() + a; };
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < grp.order(); ++a) {
      g.arrow_names.push_back("(" + set[x] + "," + grp.name(a) + ")");
      g.src.push_back(x);
      g.tgt.push_back(action[a][x]);
    }
  const int na = nx * grp.order();
  g.unit.resize(nx);
  for (int x = 0; x < nx; ++x) g.unit[x] = id(x, grp.identity);
  g.inv.resize(na);
  g.comp.assign(na, std::vector<int>(na, -1));
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < grp.order(); ++a) {
      g.inv[id(x, a)] = id(action[a][x], grp.inv(a));
      for (int y = 0; y < nx; ++y)
        for (int b = 0; b < grp.order(); ++b)
          if (action[b][y] == x) g.comp[id(x, a)][id(y, b)] = id(y, grp.mul(a, b));
    }
  detail::validate_groupoid(g);
  return g;
}

/// A bundle of groups viewed as the groupoid whose arrows are the
/// disjoint union of the fibers (all loops).  Arrow order: by base
/// point, then by fiber element.
inline FiniteGroupoid bundle_as_groupoid(const GroupBundle& bundle) {
  FiniteGroupoid g;
  g.object_names = bundle.base_names;
  std::vector<int> offset(bundle.n_objects() + 1, 0);
  for (int x = 0; x < bundle.n_objects(); ++x) {
    offset[x + 1] = offset[x] + bundle.fiber[x].order();
    for (int i = 0; i < bundle.fiber[x].order(); ++i) {
      g.arrow_names.push_back(bundle.fiber[x].name(i) + "@" + bundle.base_names[x]);
      g.src.push_back(x);
      g.tgt.push_back(x);
    }
  }
  const int na = offset.back();
  g.unit.resize(bundle.n_objects());
  g.inv.resize(na);
  g.comp.assign(na, std::vector<int>(na, -1));
  for (int x = 0; x < bundle.n_objects(); ++x) {
    const FiniteGroup& f = bundle.fiber[x];
    g.unit[x] = offset[x] + f.identity;
    for (int i = 0; i < f.order(); ++i) {
      g.inv[offset[x] + i] = offset[x] + f.inv(i);
      for (int j = 0; j < f.order(); ++j) g.comp[offset[x] + i][offset[x] + j] = offset[x] + f.mul(i, j);
    }
  }
  detail::validate_groupoid(g);
  return g;
}

/// Isotropy bundle: the fiber at x is the group of loops at x.  For a
/// finite discrete groupoid the interior isotropy equals the full
/// isotropy bundle.
inline GroupBundle isotropy_bundle(const FiniteGroupoid& g) {
  GroupBundle b;
  b.base_names = g.object_names;
  for (int x = 0; x < g.n_objects(); ++x) {
    std::vector<int> loops;
    for (int a = 0; a < g.n_arrows(); ++a)
      if (g.src[a] == x && g.tgt[a] == x) loops.push_back(a);
    std::vector<std::string> names;
    for (int a : loops) names.push_back(g.arrow_names[a]);
    const int m = static_cast<int>(loops.size());
    std::vector<std::vector<int>> table(m, std::vector<int>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        int c = g.comp[loops[i]][loops[j]];
        int k = static_cast<int>(std::find(loops.begin(), loops.end(), c) - loops.begin());
        table[i][j] = k;
      }
    b.fiber.push_back(group_from_table(std::move(names), std::move(table)));
  }
  return b;
}

/// Validates object/arrow maps as a groupoid morphism.
inline GroupoidHom make_groupoid_hom(const FiniteGroupoid& src_g, const FiniteGroupoid& dst_g,
                                     std::vector<int> object_map, std::vector<int> arrow_map) {
  if (static_cast<int>(object_map.size()) != src_g.n_objects() ||
      static_cast<int>(arrow_map.size()) != src_g.n_arrows())
    fail("BadShape", "groupoid hom maps not total");
  for (int a = 0; a < src_g.n_arrows(); ++a) {
    int fa = arrow_map[a];
    if (dst_g.src[fa] != object_map[src_g.src[a]] || dst_g.tgt[fa] != object_map[src_g.tgt[a]])
      fail("NotGroupoidHom", "endpoints not preserved at " + src_g.arrow_names[a]);
  }
  for (int x = 0; x < src_g.n_objects(); ++x)
    if (arrow_map[src_g.unit[x]] != dst_g.unit[object_map[x]])
      fail("NotGroupoidHom", "unit not preserved at object " + src_g.object_names[x]);
  for (int a = 0; a < src_g.n_arrows(); ++a)
    for (int b = 0; b < src_g.n_arrows(); ++b)
      if (src_g.composable(a, b) &&
          arrow_map[src_g.comp[a][b]] != dst_g.comp[arrow_map[a]][arrow_map[b]])
        fail("NotGroupoidHom", "composition not preserved on (" + src_g.arrow_names[a] + "," + src_g.arrow_names[b] + ")");
  return GroupoidHom{src_g, dst_g, std::move(object_map), std::move(arrow_map)};
}

/// Quotient of G by a wide, conjugation-invariant sub-bundle of its
/// isotropy: arrows are orbits of the left H-action g -> hg.  Returns
/// the quotient and the projection morphism.
inline std::pair<FiniteGroupoid, GroupoidHom> quotient_groupoid(const FiniteGroupoid& g,
                                                                const GroupBundle& bundle,
                                                                const std::vector<std::vector<int>>& fiber_arrows) {
  // fiber_arrows[x] lists the arrow indices of g forming the fiber at x
  if (bundle.n_objects() != g.n_objects()) fail("BadShape", "bundle base must be the object set");
  std::set<int> in_h;
  for (int x = 0; x < g.n_objects(); ++x)
    for (int a : fiber_arrows[x]) {
      if (g.src[a] != x || g.tgt[a] != x) fail("BadShape", "bundle element is not a loop at its base point");
      in_h.insert(a);
    }
  // conjugation invariance
  for (int a = 0; a < g.n_arrows(); ++a)
    for (int h : fiber_arrows[g.src[a]]) {
      int c = g.comp[g.comp[a][h]][g.inv[a]];
      if (!in_h.count(c)) fail("NotInvariant", "(" + g.arrow_names[a] + "," + g.arrow_names[h] + ")");
    }
  // orbits of g -> hg, h in fiber at tgt(g)
  std::vector<int> orbit(g.n_arrows(), -1);
  std::vector<int> reps;
  for (int a = 0; a < g.n_arrows(); ++a) {
    if (orbit[a] >= 0) continue;
    int c = static_cast<int>(reps.size());
    reps.push_back(a);
    for (int h : fiber_arrows[g.tgt[a]]) orbit[g.comp[h][a]] = c;
  }
  FiniteGroupoid q;
  q.object_names = g.object_names;
  const int m = static_cast<int>(reps.size());
  for (int c = 0; c < m; ++c) {
    q.arrow_names.push_back("[" + g.arrow_names[reps[c]] + "]");
    q.src.push_back(g.src[reps[c]]);
    q.tgt.push_back(g.tgt[reps[c]]);
  }
  q.unit.resize(g.n_objects());
  for (int x = 0; x < g.n_objects(); ++x) q.unit[x] = orbit[g.unit[x]];
  q.inv.resize(m);
  q.comp.assign(m, std::vector<int>(m, -1));
  for (int c = 0; c < m; ++c) {
    q.inv[c] = orbit[g.inv[reps[c]]];
    for (int d = 0; d < m; ++d)
      if (q.src[c] == q.tgt[d]) q.comp[c][d] = orbit[g.comp[reps[c]][reps[d]]];
  }
  detail::validate_groupoid(q);
  std::vector<int> obj_id(g.n_objects());
  for (int x = 0; x < g.n_objects(); ++x) obj_id[x] = x;
  GroupoidHom proj = make_groupoid_hom(g, q, obj_id, orbit);
  return {std::move(q), std::move(proj)};
}

}  // namespace xmod
