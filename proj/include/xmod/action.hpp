#pragma once

#include <array>
#include <optional>
#include <vector>

#include "xmod/crossed_module.hpp"
#include "xmod/star_algebra.hpp"

namespace xmod {

/// An action of a finite groupoid G on an algebra fibered over its
/// objects: one *-isomorphism fiber(A, src g) -> fiber(A, tgt g) per
/// arrow, stored as a matrix on block coordinates.
struct GroupoidAlgebraAction {
  FiniteGroupoid g;
  AlgPtr algebra;
  std::vector<Mat> alpha;  // per arrow

  /// alpha_g on block coordinates.
  const Mat& mat(int arrow) const { return alpha[arrow]; }

  /// alpha_g applied to a full coordinate vector supported on the
  /// source block; result supported on the target block.
  Vec apply_big(int arrow, const Vec& big) const {
    return scatter_block(*algebra, g.tgt[arrow], alpha[arrow] * gather_block(*algebra, g.src[arrow], big));
  }
};

namespace detail {

inline void validate_groupoid_action(const GroupoidAlgebraAction& act, double tol = kTolAlg) {
  const StarAlgebra& a = *act.algebra;
  const FiniteGroupoid& g = act.g;
  if (a.n_objects() != g.n_objects())
    fail("FiberMismatch", "algebra must be fibered over the object set of the acting groupoid");
  if (static_cast<int>(act.alpha.size()) != g.n_arrows()) fail("BadShape", "one matrix per arrow required");
  for (int ar = 0; ar < g.n_arrows(); ++ar) {
    int s = g.src[ar], t = g.tgt[ar];
    const Mat& m = act.alpha[ar];
    const auto& sb = a.blocks[s];
    const auto& tb = a.blocks[t];
    if (m.rows() != static_cast<int>(tb.size()) || m.cols() != static_cast<int>(sb.size()))
      fail("BadShape", "alpha_" + g.arrow_names[ar] + " has wrong shape");
    if (sb.size() != tb.size() || (sb.size() > 0 && linalg::rank_of(m, tol) != static_cast<int>(sb.size())))
      fail("NotStarIso", "alpha_" + g.arrow_names[ar] + " is not invertible");
    // unital: alpha_g(p_s) = p_t
    Vec ps = gather_block(a, s, a.block_projection(s));
    Vec pt = gather_block(a, t, a.block_projection(t));
    if (sb.size() > 0 && (m * ps - pt).cwiseAbs().maxCoeff() > tol) fail("NotStarIso", "alpha_" + g.arrow_names[ar] + " does not preserve the fiber unit");
    // multiplicative and star-preserving on the source fiber basis
    for (size_t i = 0; i < sb.size(); ++i) {
      Vec fi = scatter_block(a, t, m.col(static_cast<int>(i)));
      Vec si = act.apply_big(ar, a.star_basis(sb[i]));
      if ((a.star(fi) - si).cwiseAbs().maxCoeff() > tol)
        fail("NotStarIso", "alpha_" + g.arrow_names[ar] + " does not preserve star");
      for (size_t j = 0; j < sb.size(); ++j) {
        Vec fj = scatter_block(a, t, m.col(static_cast<int>(j)));
        Vec prod_src = Vec::Zero(a.dim);
        for (auto& [k, c] : a.mult[sb[i]][sb[j]].terms) prod_src(k) = c;
        Vec lhs = act.apply_big(ar, prod_src);
        Vec rhs = a.mul(fi, fj);
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
          fail("NotStarIso", "alpha_" + g.arrow_names[ar] + " is not multiplicative");
      }
    }
  }
  // functoriality
  for (int x = 0; x < g.n_objects(); ++x) {
    const Mat& m = act.alpha[g.unit[x]];
    if (linalg::inf_norm(Mat(m - Mat::Identity(m.rows(), m.cols()))) > tol)
      fail("NotFunctorial", "alpha at the unit of " + g.object_names[x] + " is not the identity");
  }
  for (int ar = 0; ar < g.n_arrows(); ++ar)
    for (int br = 0; br < g.n_arrows(); ++br) {
      if (!g.composable(ar, br)) continue;
      Mat lhs = act.alpha[g.comp[ar][br]];
      Mat rhs = act.alpha[ar] * act.alpha[br];
      if (linalg::inf_norm(Mat(lhs - rhs)) > tol)
        fail("NotFunctorial", "alpha_(" + g.arrow_names[ar] + " o " + g.arrow_names[br] + ") != composition");
    }
}

}  // namespace detail

inline GroupoidAlgebraAction groupoid_algebra_action(FiniteGroupoid g, AlgPtr algebra,
                                                     std::vector<Mat> alpha, double tol = kTolAlg) {
  GroupoidAlgebraAction act{std::move(g), std::move(algebra), std::move(alpha)};
  detail::validate_groupoid_action(act, tol);
  return act;
}

/// Trivial action of a group(oid) on an algebra over one object.
inline GroupoidAlgebraAction trivial_action(const FiniteGroupoid& g, AlgPtr algebra) {
  if (g.n_objects() != 1) fail("BadShape", "trivial_action needs a one-object groupoid");
  std::vector<Mat> alpha(g.n_arrows(), Mat::Identity(algebra->dim, algebra->dim));
  return groupoid_algebra_action(g, std::move(algebra), std::move(alpha));
}

/// The translation action of G on C0(X), X the object space:
/// alpha_g maps e_{src(g)} to e_{tgt(g)}.
inline GroupoidAlgebraAction object_translation_action(const FiniteGroupoid& g) {
  AlgPtr a = alg_ptr(functions_on(g.object_names));
  std::vector<Mat> alpha(g.n_arrows(), Mat::Identity(1, 1));
  return groupoid_algebra_action(g, std::move(a), std::move(alpha));
}

/// Left translation of a group G on C0(G) (one fiber of dimension |G|).
inline GroupoidAlgebraAction left_translation_action(const FiniteGroup& grp) {
  std::vector<std::string> pts;
  for (int i = 0; i < grp.order(); ++i) pts.push_back(grp.name(i));
  AlgPtr cp = alg_ptr(collapse_fibering(functions_on(pts)));
  std::vector<Mat> alpha;
  for (int g = 0; g < grp.order(); ++g) {
    Mat m = Mat::Zero(grp.order(), grp.order());
    for (int x = 0; x < grp.order(); ++x) m(grp.mul(g, x), x) = 1.0;  // (g.f)(y) = f(g^-1 y)
    alpha.push_back(std::move(m));
  }
  return groupoid_algebra_action(group_as_groupoid(grp), std::move(cp), std::move(alpha));
}

/// Permutation action of a group on a function algebra (one fiber).
inline GroupoidAlgebraAction permutation_action(const FiniteGroup& grp, const StarAlgebra& functions,
                                                const std::vector<std::vector<int>>& point_maps) {
  std::vector<Mat> alpha;
  const int n = functions.dim;
  for (int g = 0; g < grp.order(); ++g) {
    Mat m = Mat::Zero(n, n);
    for (int x = 0; x < n; ++x) m(point_maps[g][x], x) = 1.0;
    alpha.push_back(std::move(m));
  }
  return groupoid_algebra_action(group_as_groupoid(grp), alg_ptr(collapse_fibering(functions)), std::move(alpha));
}

// ---------------------------------------------------------------------------
// Crossed-module actions

/// An action (alpha, u) of a crossed module on a fibered algebra:
/// alpha an action of G, u_h a unitary of the fiber at the base point
/// of h, subject to alpha_d(h) = Ad(u_h) and alpha_g(u_h) = u_{c_g(h)}.
struct CMAction {
  CrossedModule cm;
  AlgPtr algebra;
  GroupoidAlgebraAction alpha;
  std::vector<std::vector<Vec>> u;  // u[x][h]: full coordinate vector supported on block x

  const Vec& unitary(int x, int h) const { return u[x][h]; }
};

namespace detail {

inline void validate_cm_action(const CMAction& act, double tol = kTolAlg) {
  validate_groupoid_action(act.alpha, tol);
  const StarAlgebra& a = *act.algebra;
  const CrossedModule& cm = act.cm;
  if (act.algebra.get() != act.alpha.algebra.get()) fail("BadShape", "alpha must act on the same algebra");
  if (static_cast<int>(act.u.size()) != cm.g.n_objects()) fail("BadShape", "u must be indexed by objects");
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    const FiniteGroup& hx = cm.fiber(x);
    if (static_cast<int>(act.u[x].size()) != hx.order()) fail("BadShape", "u not total on the fiber at " + cm.g.object_names[x]);
    Vec px = a.block_projection(x);
    for (int h = 0; h < hx.order(); ++h) {
      const Vec& uh = act.u[x][h];
      if (uh.size() != a.dim) fail("BadShape", "u value has wrong dimension");
      for (int k = 0; k < a.dim; ++k)
        if (std::abs(uh(k)) > tol && a.block_of[k] != x)
          fail("BadShape", "u_" + cm.describe_h(x, h) + " is not supported on its fiber");
      if ((a.mul(uh, a.star(uh)) - px).cwiseAbs().maxCoeff() > tol ||
          (a.mul(a.star(uh), uh) - px).cwiseAbs().maxCoeff() > tol)
        fail("NotUnitary", "u_" + cm.describe_h(x, h) + " is not unitary in its fiber");
    }
    if ((act.u[x][hx.identity] - px).cwiseAbs().maxCoeff() > tol)
      fail("NotUnitary", "u at the identity of " + cm.g.object_names[x] + " is not the fiber unit");
    for (int h1 = 0; h1 < hx.order(); ++h1)
      for (int h2 = 0; h2 < hx.order(); ++h2) {
        Vec lhs = act.u[x][hx.mul(h1, h2)];
        Vec rhs = a.mul(act.u[x][h1], act.u[x][h2]);
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
          fail("NotUnitary", "u is not multiplicative on (" + cm.describe_h(x, h1) + "," + cm.describe_h(x, h2) + ")");
      }
    // covariance 1: alpha_d(h)(a) = u_h a u_h^*
    for (int h = 0; h < hx.order(); ++h) {
      int loop = cm.d[x][h];
      const Vec& uh = act.u[x][h];
      Vec uhs = a.star(uh);
      for (int i : a.blocks[x]) {
        Vec ei = Vec::Zero(a.dim);
        ei(i) = 1;
        Vec lhs = act.alpha.apply_big(loop, ei);
        Vec rhs = a.mul(a.mul(uh, ei), uhs);
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
          fail("Covariance1Violation", "h=" + cm.describe_h(x, h) + ", basis=" + std::to_string(i));
      }
    }
  }
  // covariance 2: alpha_g(u_h) = u_{c_g(h)}
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar) {
    int s = cm.g.src[ar], t = cm.g.tgt[ar];
    for (int h = 0; h < cm.fiber(s).order(); ++h) {
      Vec lhs = act.alpha.apply_big(ar, act.u[s][h]);
      Vec rhs = act.u[t][cm.c[ar][h]];
      if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
        fail("Covariance2Violation", "g=" + cm.g.arrow_names[ar] + ", h=" + cm.describe_h(s, h));
    }
  }
}

}  // namespace detail

inline CMAction cm_action(CrossedModule cm, AlgPtr algebra, GroupoidAlgebraAction alpha,
                          std::vector<std::vector<Vec>> u, double tol = kTolAlg) {
  CMAction act{std::move(cm), std::move(algebra), std::move(alpha), std::move(u)};
  detail::validate_cm_action(act, tol);
  return act;
}

/// Green twisted system: the crossed-module action of (G, N) for a
/// normal subgroup N of G.
inline CMAction green_action(const FiniteGroup& g, const std::vector<int>& normal, AlgPtr algebra,
                             std::vector<Mat> alpha_per_element, std::vector<Vec> u_per_element,
                             double tol = kTolAlg) {
  CrossedModule cm = from_normal_subgroup(g, normal);
  GroupoidAlgebraAction alpha = groupoid_algebra_action(cm.g, algebra, std::move(alpha_per_element), tol);
  return cm_action(cm, algebra, std::move(alpha), {std::move(u_per_element)}, tol);
}

/// The trivial action of a crossed module on C0(X) with u == 1 (the
/// action underlying the crossed module C*-algebra).
inline CMAction cstar_defining_action(const CrossedModule& cm) {
  GroupoidAlgebraAction alpha = object_translation_action(cm.g);
  AlgPtr a = alpha.algebra;
  std::vector<std::vector<Vec>> u(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    u[x].assign(cm.fiber(x).order(), a->block_projection(x));
  return cm_action(cm, a, std::move(alpha), std::move(u));
}

// ---------------------------------------------------------------------------
// Equivariant maps

/// A *-homomorphism intertwining two actions of the same crossed
/// module: pi(alpha_g(a)) = beta_g(pi(a)) and pi(u_h a) = v_h pi(a).
struct EquivariantMap {
  const CMAction* source = nullptr;
  const CMAction* target = nullptr;
  StarHom hom;
};

inline EquivariantMap equivariant_map(const CMAction& src, const CMAction& dst, StarHom hom,
                                      double tol = kTolAlg) {
  if (hom.source.get() != src.algebra.get() || hom.target.get() != dst.algebra.get())
    fail("BadShape", "hom endpoints must be the action algebras");
  const CrossedModule& cm = src.cm;
  const StarAlgebra& a = *src.algebra;
  const StarAlgebra& b = *dst.algebra;
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar)
    for (int i : a.blocks[cm.g.src[ar]]) {
      Vec ei = Vec::Zero(a.dim);
      ei(i) = 1;
      Vec lhs = hom(src.alpha.apply_big(ar, ei));
      Vec rhs = dst.alpha.apply_big(ar, hom(ei));
      if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
        fail("NotEquivariant", "alpha not intertwined at g=" + cm.g.arrow_names[ar] + ", basis=" + std::to_string(i));
    }
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h)
      for (int i : a.blocks[x]) {
        Vec ei = Vec::Zero(a.dim);
        ei(i) = 1;
        Vec lhs = hom(a.mul(src.unitary(x, h), ei));
        Vec rhs = b.mul(dst.unitary(x, h), hom(ei));
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
          fail("NotEquivariant", "u not intertwined at h=" + cm.describe_h(x, h) + ", basis=" + std::to_string(i));
      }
  return EquivariantMap{&src, &dst, std::move(hom)};
}

// ---------------------------------------------------------------------------
// Diagonal actions

/// The diagonal action on the fiberwise tensor product:
/// (alpha (x) beta)_g = alpha_g (x) beta_g, (u (x) v)_h = u_h (x) v_h.
inline CMAction diagonal_action(const CMAction& act1, const CMAction& act2) {
  const StarAlgebra& a = *act1.algebra;
  const StarAlgebra& b = *act2.algebra;
  if (act1.cm.g.n_arrows() != act2.cm.g.n_arrows() || act1.cm.g.n_objects() != act2.cm.g.n_objects())
    fail("FiberMismatch", "diagonal action needs two actions of the same crossed module");
  for (int x = 0; x < act1.cm.g.n_objects(); ++x)
    if (act1.cm.fiber(x).order() != act2.cm.fiber(x).order())
      fail("FiberMismatch", "diagonal action needs two actions of the same crossed module");
  DiagonalTensorResult tens = diagonal_tensor_with_basis(a, b);
  AlgPtr t = alg_ptr(std::move(tens.algebra));
  const CrossedModule& cm = act1.cm;
  // pair index lookup per block of the tensor algebra
  std::map<std::pair<int, int>, int> pos;
  for (int p = 0; p < t->dim; ++p) pos[{tens.pairs[p][0], tens.pairs[p][1]}] = p;
  std::vector<Mat> alpha;
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar) {
    int s = cm.g.src[ar], tt = cm.g.tgt[ar];
    const auto& sb = t->blocks[s];
    const auto& tb = t->blocks[tt];
    Mat m = Mat::Zero(tb.size(), sb.size());
    for (size_t col = 0; col < sb.size(); ++col) {
      auto [ia, ib] = tens.pairs[sb[col]];
      Vec va = act1.alpha.apply_big(ar, Vec::Unit(a.dim, ia));
      Vec vb = act2.alpha.apply_big(ar, Vec::Unit(b.dim, ib));
      for (size_t row = 0; row < tb.size(); ++row) {
        auto [ja, jb] = tens.pairs[tb[row]];
        m(static_cast<int>(row), static_cast<int>(col)) = va(ja) * vb(jb);
      }
    }
    alpha.push_back(std::move(m));
  }
  std::vector<std::vector<Vec>> u(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    const FiniteGroup& hx = cm.fiber(x);
    for (int h = 0; h < hx.order(); ++h) {
      Vec w = Vec::Zero(t->dim);
      const Vec& ua = act1.unitary(x, h);
      const Vec& ub = act2.unitary(x, h);
      for (int p : t->blocks[x]) w(p) = ua(tens.pairs[p][0]) * ub(tens.pairs[p][1]);
      u[x].push_back(std::move(w));
    }
  }
  GroupoidAlgebraAction ga = groupoid_algebra_action(cm.g, t, std::move(alpha));
  return cm_action(cm, t, std::move(ga), std::move(u));
}

// ---------------------------------------------------------------------------
// Pontryagin duality for B-group actions

/// The complete character table of a finite abelian group, with values
/// snapped to exact roots of unity and verified against the
/// orthogonality relations.
struct CharacterGroup {
  FiniteGroup group;
  Mat values;  // values(chi, h)

  int count() const { return static_cast<int>(values.rows()); }
};

inline CharacterGroup characters(const FiniteGroup& h) {
  if (!h.is_abelian()) fail("NotAbelian", "character group needs an abelian group");
  const int n = h.order();
  StarAlgebra ch = group_algebra(h);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);  // fixed seed: the table must not depend on the caller
  WedderburnResult wd = wedderburn_decomposition(ch, rng);
  if (static_cast<int>(wd.projections.size()) != n) fail("DecompositionUnstable", "abelian group algebra did not split into lines");
  Mat vals(n, n);
  for (int c = 0; c < n; ++c) {
    // p_chi = |H|^-1 sum_h conj(chi(h)) delta_h
    for (int e = 0; e < n; ++e) {
      cplx raw = std::conj(wd.projections[c](e) * static_cast<double>(n));
      int ord = h.element_order(e);
      double ang = std::arg(raw);
      int k = static_cast<int>(std::llround(ang * ord / (2 * M_PI)));
      cplx snapped = std::polar(1.0, 2 * M_PI * k / ord);
      if (std::abs(raw - snapped) > 1e-6) fail("DecompositionUnstable", "character value did not snap to a root of unity");
      vals(c, e) = snapped;
    }
  }
  // canonical order: lexicographic in the snapped angle indices, so the
  // trivial character comes first
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int c) {
    std::vector<int> k(n);
    for (int e = 0; e < n; ++e) {
      double ang = std::arg(vals(c, e));
      if (ang < -1e-9) ang += 2 * M_PI;
      k[e] = static_cast<int>(std::llround(ang * n / (2 * M_PI))) % n;
    }
    return k;
  };
  std::sort(order.begin(), order.end(), [&](int l, int r) { return key(l) < key(r); });
  Mat sorted(n, n);
  for (int c = 0; c < n; ++c) sorted.row(c) = vals.row(order[c]);
  CharacterGroup cg{h, std::move(sorted)};
  // homomorphism property and orthogonality
  for (int c = 0; c < n; ++c) {
    if (std::abs(cg.values(c, h.identity) - cplx(1)) > kTolAlg) fail("DecompositionUnstable", "character not normalized");
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (std::abs(cg.values(c, h.mul(a, b)) - cg.values(c, a) * cg.values(c, b)) > kTolAlg)
          fail("DecompositionUnstable", "character is not multiplicative");
  }
  for (int c1 = 0; c1 < n; ++c1)
    for (int c2 = 0; c2 < n; ++c2) {
      cplx s = 0;
      for (int e = 0; e < n; ++e) s += cg.values(c1, e) * std::conj(cg.values(c2, e));
      if (std::abs(s - (c1 == c2 ? cplx(n) : cplx(0))) > kTolAlg * n)
        fail("DecompositionUnstable", "orthogonality relations fail");
    }
  return cg;
}

/// Result of re-fibering an algebra with a central B-group action over
/// the dual group.
struct PontryaginResult {
  CharacterGroup chars;
  StarAlgebra refibered;      // fibered over the characters, in a new basis
  Mat to_new;                 // coordinates: new = to_new * old
  Mat from_new;               // inverse
  std::vector<Vec> projections;  // spectral projections in the old coordinates
};

/// Spectral decomposition of a B-group action: p_chi = |H|^-1 sum_h
/// conj(chi(h)) u_h, and the algebra refibered over the dual group.
inline PontryaginResult pontryagin_decompose(const CMAction& act, double tol = kTolAlg) {
  const CrossedModule& cm = act.cm;
  if (!cm.group_flavored() || cm.g.n_arrows() != 1)
    fail("BadShape", "pontryagin_decompose needs a B-group crossed module (trivial G)");
  const FiniteGroup& h = cm.fiber(0);
  const StarAlgebra& a = *act.algebra;
  // u must be central
  for (int hh = 0; hh < h.order(); ++hh) {
    const Vec& uh = act.unitary(0, hh);
    for (int i = 0; i < a.dim; ++i) {
      Vec ei = Vec::Unit(a.dim, i);
      if ((a.mul(uh, ei) - a.mul(ei, uh)).cwiseAbs().maxCoeff() > tol)
        fail("NotCentral", "u_" + h.name(hh) + " fails to commute with basis " + std::to_string(i));
    }
  }
  CharacterGroup cg = characters(h);
  const int n = h.order();
  std::vector<Vec> proj;
  for (int c = 0; c < n; ++c) {
    Vec p = Vec::Zero(a.dim);
    for (int hh = 0; hh < n; ++hh) p += std::conj(cg.values(c, hh)) * act.unitary(0, hh);
    proj.push_back(p / static_cast<double>(n));
  }
  // partition of unity by orthogonal self-adjoint central idempotents
  Vec sum = Vec::Zero(a.dim);
  for (auto& p : proj) sum += p;
  if ((sum - a.unit).cwiseAbs().maxCoeff() > tol) fail("DecompositionUnstable", "spectral projections do not sum to 1");
  for (int c1 = 0; c1 < n; ++c1) {
    if ((a.star(proj[c1]) - proj[c1]).cwiseAbs().maxCoeff() > tol) fail("DecompositionUnstable", "spectral projection not self-adjoint");
    for (int c2 = 0; c2 < n; ++c2) {
      Vec prod = a.mul(proj[c1], proj[c2]);
      Vec expect = c1 == c2 ? proj[c1] : Vec(Vec::Zero(a.dim));
      if ((prod - expect).cwiseAbs().maxCoeff() > tol) fail("DecompositionUnstable", "spectral projections not orthogonal");
    }
  }
  // new basis adapted to the blocks p_chi A
  std::vector<Vec> cols;
  std::vector<int> block;
  for (int c = 0; c < n; ++c) {
    Mat img(a.dim, a.dim);
    for (int i = 0; i < a.dim; ++i) img.col(i) = a.mul_basis_right(proj[c], i);
    Mat basis = linalg::orthonormalize(img, tol);
    for (int j = 0; j < basis.cols(); ++j) {
      cols.push_back(basis.col(j));
      block.push_back(c);
    }
  }
  if (static_cast<int>(cols.size()) != a.dim) fail("DecompositionUnstable", "spectral subspaces do not fill the algebra");
  Mat s(a.dim, a.dim);
  for (int j = 0; j < a.dim; ++j) s.col(j) = cols[j];
  Mat sinv = s.inverse();
  std::vector<std::vector<SparseVec>> mult(a.dim, std::vector<SparseVec>(a.dim));
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j)
      mult[i][j] = SparseVec::from_dense(sinv * a.mul(s.col(i), s.col(j)), 1e-13);
  Mat star(a.dim, a.dim);
  for (int j = 0; j < a.dim; ++j) star.col(j) = sinv * a.star(s.col(j));
  // star(v) in new coords: sinv * star_old(s * v) = star_new * conj(v); columns computed on basis
  Vec unit = sinv * a.unit;
  std::vector<std::string> names;
  for (int c = 0; c < n; ++c) names.push_back("chi" + std::to_string(c));
  StarAlgebra ref = algebra_from_structure(std::move(mult), std::move(star), std::move(unit),
                                           std::move(names), std::move(block), tol);
  return PontryaginResult{std::move(cg), std::move(ref), std::move(sinv), std::move(s), std::move(proj)};
}

/// Reconstructs the B-group action from an algebra fibered over the
/// dual group: u_h = sum_chi chi(h) p_chi.
inline CMAction pontryagin_compose(const CharacterGroup& cg, const StarAlgebra& over_dual) {
  if (over_dual.n_objects() != cg.count()) fail("BadShape", "algebra must be fibered over the character set");
  CrossedModule cm = b_group(cg.group);
  // the crossed module lives over one object; the algebra keeps its own
  // dual fibering, so the action algebra is re-fibered to a single block
  StarAlgebra flat = over_dual;
  flat.object_names = {"*"};
  flat.block_of.assign(flat.dim, 0);
  flat.blocks = {std::vector<int>(flat.dim)};
  std::iota(flat.blocks[0].begin(), flat.blocks[0].end(), 0);
  AlgPtr fp = alg_ptr(std::move(flat));
  std::vector<Vec> u;
  for (int h = 0; h < cg.group.order(); ++h) {
    Vec uh = Vec::Zero(fp->dim);
    for (int c = 0; c < cg.count(); ++c) uh += cg.values(c, h) * over_dual.block_projection(c);
    u.push_back(std::move(uh));
  }
  GroupoidAlgebraAction alpha = trivial_action(cm.g, fp);
  return cm_action(cm, fp, std::move(alpha), {std::move(u)});
}

// ---------------------------------------------------------------------------
// Invariant ideals: restriction and quotient actions

struct ActionExtension {
  std::optional<CMAction> ideal_action;  // empty when the ideal is zero
  CMAction quotient_action;
  Mat ideal_basis;            // block-aligned orthonormal basis of I in A
  std::optional<StarHom> inclusion;      // I -> A (non-unital)
  StarHom projection;                    // A -> A/I
};

namespace detail {

/// Block-aligned orthonormal basis of an ideal of a fibered algebra.
inline std::pair<Mat, std::vector<int>> block_align_ideal(const StarAlgebra& a, const Mat& basis, double tol) {
  std::vector<Vec> cols;
  std::vector<int> blocks;
  for (int x = 0; x < a.n_objects(); ++x) {
    const auto& idx = a.blocks[x];
    if (idx.empty()) continue;
    Mat restricted(static_cast<int>(idx.size()), basis.cols());
    for (size_t r = 0; r < idx.size(); ++r) restricted.row(static_cast<int>(r)) = basis.row(idx[r]);
    Mat ib = linalg::orthonormalize(restricted, tol);
    for (int c = 0; c < ib.cols(); ++c) {
      Vec big = Vec::Zero(a.dim);
      for (size_t r = 0; r < idx.size(); ++r) big(idx[r]) = ib(static_cast<int>(r), c);
      cols.push_back(std::move(big));
      blocks.push_back(x);
    }
  }
  if (static_cast<int>(cols.size()) != basis.cols())
    fail("NotIdeal", "ideal is not compatible with the fibering");
  Mat m(a.dim, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) m.col(static_cast<int>(j)) = cols[j];
  return {std::move(m), std::move(blocks)};
}

}  // namespace detail

/// Restriction of an action to an invariant ideal (a unital algebra of
/// its own, being a direct summand) together with the quotient action.
/// The two results form an extension of actions.
inline ActionExtension restrict_and_quotient(const CMAction& act, const Ideal& ideal, double tol = kTolAlg) {
  const StarAlgebra& a = *act.algebra;
  const CrossedModule& cm = act.cm;
  verify_ideal(a, ideal.basis, tol);
  // invariance under every alpha_g
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar)
    for (int c = 0; c < ideal.basis.cols(); ++c) {
      Vec part = scatter_block(a, cm.g.src[ar], gather_block(a, cm.g.src[ar], ideal.basis.col(c)));
      Vec moved = act.alpha.apply_big(ar, part);
      if (!linalg::in_span(ideal.basis, moved, tol))
        fail("NotInvariant", "alpha_" + cm.g.arrow_names[ar] + " moves ideal direction " + std::to_string(c));
    }

  // quotient action
  auto [quot, proj] = quotient_algebra(act.algebra, ideal, tol);
  AlgPtr qp = proj.target;
  std::vector<Mat> qalpha;
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar) {
    int s = cm.g.src[ar], t = cm.g.tgt[ar];
    const auto& sb = qp->blocks[s];
    const auto& tb = qp->blocks[t];
    Mat m(static_cast<int>(tb.size()), static_cast<int>(sb.size()));
    for (size_t col = 0; col < sb.size(); ++col) {
      // lift the quotient basis vector, act, project back
      Vec lift = Vec::Zero(a.dim);
      // rows of proj.matrix are the complement basis vectors (conjugated)
      lift = proj.matrix.row(sb[col]).adjoint();
      Vec moved = act.alpha.apply_big(ar, lift);
      Vec back = proj.matrix * moved;
      for (size_t row = 0; row < tb.size(); ++row) m(static_cast<int>(row), static_cast<int>(col)) = back(tb[row]);
    }
    qalpha.push_back(std::move(m));
  }
  std::vector<std::vector<Vec>> qu(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) qu[x].push_back(proj.matrix * act.unitary(x, h));
  GroupoidAlgebraAction qga = groupoid_algebra_action(cm.g, qp, std::move(qalpha), tol);
  CMAction quotient_action = cm_action(cm, qp, std::move(qga), std::move(qu), tol);

  ActionExtension ext{std::nullopt, std::move(quotient_action), Mat(), std::nullopt, std::move(proj)};
  if (ideal.basis.cols() == 0) return ext;  // zero ideal: nothing to restrict

  // the ideal as a unital algebra: block-aligned basis plus its own unit
  auto [ibasis, iblocks] = detail::block_align_ideal(a, ideal.basis, tol);
  const int k = static_cast<int>(ibasis.cols());
  Mat iproj = ibasis.adjoint();
  // identity of the ideal: solve q * b = b for all basis directions
  Mat sys(a.dim * k, k);
  Vec rhs(a.dim * k);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < k; ++j) sys.block(c * a.dim, j, a.dim, 1) = a.mul(ibasis.col(j), ibasis.col(c));
    rhs.segment(c * a.dim, a.dim) = ibasis.col(c);
  }
  Vec qcoords = sys.colPivHouseholderQr().solve(rhs);
  Vec q = ibasis * qcoords;
  if ((a.mul(q, q) - q).cwiseAbs().maxCoeff() > 1e-7 || (a.star(q) - q).cwiseAbs().maxCoeff() > 1e-7)
    fail("NotIdeal", "invariant ideal has no self-adjoint unit (not a direct summand)");
  for (int c = 0; c < k; ++c) {
    if ((a.mul(q, ibasis.col(c)) - ibasis.col(c)).cwiseAbs().maxCoeff() > 1e-7)
      fail("NotIdeal", "candidate unit is not neutral on the ideal");
  }
  std::vector<std::vector<SparseVec>> imult(k, std::vector<SparseVec>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      imult[i][j] = SparseVec::from_dense(iproj * a.mul(ibasis.col(i), ibasis.col(j)));
  Mat istar(k, k);
  for (int j = 0; j < k; ++j) istar.col(j) = iproj * a.star(ibasis.col(j));
  Vec iunit = iproj * q;
  std::vector<int> iblock = iblocks;
  StarAlgebra ialg = algebra_from_structure(std::move(imult), std::move(istar), std::move(iunit),
                                            a.object_names, std::move(iblock), tol);
  AlgPtr ip = alg_ptr(std::move(ialg));
  std::vector<Mat> ialpha;
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar) {
    int s = cm.g.src[ar], t = cm.g.tgt[ar];
    const auto& sb = ip->blocks[s];
    const auto& tb = ip->blocks[t];
    Mat m(static_cast<int>(tb.size()), static_cast<int>(sb.size()));
    for (size_t col = 0; col < sb.size(); ++col) {
      Vec moved = act.alpha.apply_big(ar, ibasis.col(sb[col]));
      Vec back = iproj * moved;
      for (size_t row = 0; row < tb.size(); ++row) m(static_cast<int>(row), static_cast<int>(col)) = back(tb[row]);
    }
    ialpha.push_back(std::move(m));
  }
  std::vector<std::vector<Vec>> iu(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      Vec qx = scatter_block(a, x, gather_block(a, x, q));
      iu[x].push_back(iproj * a.mul(act.unitary(x, h), qx));
    }
  GroupoidAlgebraAction iga = groupoid_algebra_action(cm.g, ip, std::move(ialpha), tol);
  ext.ideal_action = cm_action(cm, ip, std::move(iga), std::move(iu), tol);
  ext.ideal_basis = ibasis;
  ext.inclusion = StarHom{ip, act.algebra, ibasis};
  return ext;
}

}  // namespace xmod
