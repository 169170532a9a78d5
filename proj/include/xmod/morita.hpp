#pragma once

#include <string>
#include <vector>

#include "xmod/crossed_product.hpp"

namespace xmod {

/// A linking presentation of an equivariant Morita equivalence: an
/// action (D, delta, w) together with an invariant projection p such
/// that p and 1-p are full.  The corners pDp and (1-p)D(1-p) inherit
/// actions (delta restricted, w compressed).
struct LinkingData {
  const CMAction* ambient = nullptr;
  Vec p;                        // self-adjoint idempotent, invariant
  Vec p_perp;
  CMAction corner_p;            // action on pDp
  CMAction corner_q;            // action on (1-p)D(1-p)
  Mat basis_p;                  // orthonormal basis of pDp inside D
  Mat basis_q;
};

namespace detail {

/// Corner pDp as a fibered algebra with unit p, plus its basis in D.
inline std::pair<AlgPtr, Mat> corner_algebra(const StarAlgebra& d, const Vec& p, double tol) {
  std::vector<Vec> cols;
  std::vector<int> blocks;
  for (int x = 0; x < d.n_objects(); ++x) {
    const auto& idx = d.blocks[x];
    if (idx.empty()) continue;
    Mat img(d.dim, idx.size());
    for (size_t r = 0; r < idx.size(); ++r)
      img.col(static_cast<int>(r)) = d.mul(d.mul(p, Vec::Unit(d.dim, idx[r])), p);
    Mat basis = linalg::orthonormalize(img, tol);
    for (int c = 0; c < basis.cols(); ++c) {
      cols.push_back(basis.col(c));
      blocks.push_back(x);
    }
  }
  const int m = static_cast<int>(cols.size());
  if (m == 0) fail("NotProjection", "corner is zero");
  Mat basis(d.dim, m);
  for (int j = 0; j < m; ++j) basis.col(j) = cols[j];
  Mat proj = basis.adjoint();
  std::vector<std::vector<SparseVec>> mult(m, std::vector<SparseVec>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      mult[i][j] = SparseVec::from_dense(proj * d.mul(basis.col(i), basis.col(j)));
  Mat star(m, m);
  for (int j = 0; j < m; ++j) star.col(j) = proj * d.star(basis.col(j));
  Vec unit = proj * p;
  StarAlgebra corner = algebra_from_structure(std::move(mult), std::move(star), std::move(unit),
                                              d.object_names, std::move(blocks), tol);
  return {alg_ptr(std::move(corner)), std::move(basis)};
}

/// The compressed action on a corner: alpha restricted, u compressed by p.
inline CMAction corner_action(const CMAction& amb, const AlgPtr& corner, const Mat& basis, const Vec& p,
                              double tol) {
  const StarAlgebra& d = *amb.algebra;
  const CrossedModule& cm = amb.cm;
  Mat proj = basis.adjoint();
  std::vector<Mat> alpha;
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    int s = cm.g.src[g], t = cm.g.tgt[g];
    const auto& sb = corner->blocks[s];
    const auto& tb = corner->blocks[t];
    Mat m(static_cast<int>(tb.size()), static_cast<int>(sb.size()));
    for (size_t c = 0; c < sb.size(); ++c) {
      Vec moved = amb.alpha.apply_big(g, basis.col(sb[c]));
      Vec back = proj * moved;
      for (size_t r = 0; r < tb.size(); ++r) m(static_cast<int>(r), static_cast<int>(c)) = back(tb[r]);
    }
    alpha.push_back(std::move(m));
  }
  std::vector<std::vector<Vec>> u(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      Vec px = scatter_block(d, x, gather_block(d, x, p));
      u[x].push_back(proj * d.mul(d.mul(px, amb.unitary(x, h)), px));
    }
  GroupoidAlgebraAction ga = groupoid_algebra_action(cm.g, corner, std::move(alpha), tol);
  return cm_action(cm, corner, std::move(ga), std::move(u), tol);
}

}  // namespace detail

/// Validates a linking presentation: p self-adjoint idempotent,
/// invariant under alpha, commuting with u, with both corners full.
inline LinkingData linking(const CMAction& amb, const Vec& p, double tol = kTolAlg) {
  const StarAlgebra& d = *amb.algebra;
  const CrossedModule& cm = amb.cm;
  if ((d.mul(p, p) - p).cwiseAbs().maxCoeff() > tol) fail("NotProjection", "p is not idempotent");
  if ((d.star(p) - p).cwiseAbs().maxCoeff() > tol) fail("NotProjection", "p is not self-adjoint");
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    Vec ps = scatter_block(d, cm.g.src[g], gather_block(d, cm.g.src[g], p));
    Vec pt = scatter_block(d, cm.g.tgt[g], gather_block(d, cm.g.tgt[g], p));
    if ((amb.alpha.apply_big(g, ps) - pt).cwiseAbs().maxCoeff() > tol)
      fail("NotInvariant", "alpha_" + cm.g.arrow_names[g] + " moves p");
  }
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h)
      if ((d.mul(amb.unitary(x, h), p) - d.mul(p, amb.unitary(x, h))).cwiseAbs().maxCoeff() > tol)
        fail("NotInvariant", "u_" + cm.describe_h(x, h) + " does not commute with p");
  Vec q = d.unit - p;
  // fullness: the ideal generated by p (resp. 1-p) is all of D
  for (const auto& [proj, name] : {std::pair<const Vec*, const char*>{&p, "p"}, {&q, "1-p"}}) {
    Mat gen(d.dim, 1);
    gen.col(0) = *proj;
    Ideal ideal = ideal_generated(d, gen, tol);
    if (ideal.dimension() != d.dim) fail("NotFull", std::string(name) + " is not full");
  }
  auto [cp, bp] = detail::corner_algebra(d, p, tol);
  auto [cq, bq] = detail::corner_algebra(d, q, tol);
  LinkingData out;
  out.ambient = &amb;
  out.p = p;
  out.p_perp = q;
  out.corner_p = detail::corner_action(amb, cp, bp, p, tol);
  out.corner_q = detail::corner_action(amb, cq, bq, q, tol);
  out.basis_p = std::move(bp);
  out.basis_q = std::move(bq);
  return out;
}

struct MoritaReport {
  std::vector<int> blocks_p, blocks_q;
  int corner_dim_p = 0, corner_dim_q = 0;
  int product_dim_p = 0, product_dim_q = 0;
  bool equal_block_count = false;
  bool image_projection_full = false;
  bool corner_commutes = false;  // corner of D x| (G,H) at p ~ (pDp) x| (G,H)

  bool pass() const { return equal_block_count && image_projection_full && corner_commutes; }
};

/// Morita invariance of the crossed product: the corner crossed
/// products have the same number of Wedderburn blocks (the Morita
/// invariant in finite dimensions), the image of p in D x| (G,H) is
/// again full, and compressing the crossed product of D by that image
/// reproduces the crossed product of the corner.
inline MoritaReport verify_morita(const LinkingData& link, uint64_t seed = 0, double tol = kTolAlg) {
  MoritaReport rep;
  const CMAction& amb = *link.ambient;
  CMCrossedProduct pp = cm_crossed_product(link.corner_p, tol);
  CMCrossedProduct pq = cm_crossed_product(link.corner_q, tol);
  rep.corner_dim_p = link.corner_p.algebra->dim;
  rep.corner_dim_q = link.corner_q.algebra->dim;
  rep.product_dim_p = pp.quotient_dimension();
  rep.product_dim_q = pq.quotient_dimension();
  rep.blocks_p = wedderburn(*pp.quotient, seed);
  rep.blocks_q = wedderburn(*pq.quotient, seed);
  rep.equal_block_count = rep.blocks_p.size() == rep.blocks_q.size();

  CMCrossedProduct pd = cm_crossed_product(amb, tol);
  Vec image_p = pd.i_a(link.p);
  Vec image_q = pd.i_a(link.p_perp);
  const StarAlgebra& dq = *pd.quotient;
  bool full = true;
  for (const Vec* v : {&image_p, &image_q}) {
    Mat gen(dq.dim, 1);
    gen.col(0) = *v;
    full = full && ideal_generated(dq, gen, tol).dimension() == dq.dim;
  }
  rep.image_projection_full = full;

  // corner of D x| (G,H) at the image of p vs (pDp) x| (G,H)
  auto corner_blocks = [&](const Vec& pr) {
    auto [calg, cbasis] = detail::corner_algebra(dq, pr, tol);
    return std::pair<int, std::vector<int>>(calg->dim, wedderburn(*calg, seed));
  };
  auto [dim_cp, blocks_cp] = corner_blocks(image_p);
  auto [dim_cq, blocks_cq] = corner_blocks(image_q);
  rep.corner_commutes = dim_cp == rep.product_dim_p && blocks_cp == rep.blocks_p &&
                        dim_cq == rep.product_dim_q && blocks_cq == rep.blocks_q;
  return rep;
}

struct BimoduleReport {
  int module_dim = 0;
  bool compat_left_module = false;    // gamma_g(a.xi) = alpha_g(a).gamma_g(xi)
  bool compat_right_module = false;   // gamma_g(xi.b) = gamma_g(xi).beta_g(b)
  bool compat_left_inner = false;     // alpha_g<xi|eta>_A = <gamma xi|gamma eta>_A
  bool compat_right_inner = false;    // beta_g<xi|eta>_B = <gamma xi|gamma eta>_B
  bool twist_identity = false;        // gamma_d(h)(xi) = u_h . xi . v_h^*
  bool determination = false;         // w_h xi = u_h xi and xi w_h = xi v_h

  bool pass() const {
    return compat_left_module && compat_right_module && compat_left_inner && compat_right_inner &&
           twist_identity && determination;
  }
};

/// Extracts the imprimitivity bimodule E = pD(1-p) and verifies the
/// equivariance identities of the bimodule picture elementwise.  These
/// are theorems for valid LinkingData; the report flags which identity
/// would fail.
inline BimoduleReport bimodule_check(const LinkingData& link, double tol = kTolAlg) {
  BimoduleReport rep;
  const CMAction& amb = *link.ambient;
  const StarAlgebra& d = *amb.algebra;
  const CrossedModule& cm = amb.cm;
  // E = p D (1-p), block-aligned like the corners
  std::vector<Vec> cols;
  for (int x = 0; x < d.n_objects(); ++x) {
    const auto& idx = d.blocks[x];
    if (idx.empty()) continue;
    Mat img(d.dim, idx.size());
    for (size_t r = 0; r < idx.size(); ++r)
      img.col(static_cast<int>(r)) = d.mul(d.mul(link.p, Vec::Unit(d.dim, idx[r])), link.p_perp);
    Mat basis = linalg::orthonormalize(img, tol);
    for (int c = 0; c < basis.cols(); ++c) cols.push_back(basis.col(c));
  }
  rep.module_dim = static_cast<int>(cols.size());

  auto gamma = [&](int g, const Vec& xi) { return amb.alpha.apply_big(g, xi); };
  bool l_mod = true, r_mod = true, l_inn = true, r_inn = true, twist = true, det = true;
  for (int g = 0; g < cm.g.n_arrows(); ++g) {
    int s = cm.g.src[g];
    for (const Vec& xi_full : cols) {
      Vec xi = scatter_block(d, s, gather_block(d, s, xi_full));
      if (xi.cwiseAbs().maxCoeff() < tol) continue;  // xi lives over another object
      // module compatibilities against the corner bases
      for (int c = 0; c < link.basis_p.cols(); ++c) {
        Vec a = scatter_block(d, s, gather_block(d, s, link.basis_p.col(c)));
        Vec lhs = gamma(g, d.mul(a, xi));
        Vec rhs = d.mul(gamma(g, a), gamma(g, xi));
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) l_mod = false;
      }
      for (int c = 0; c < link.basis_q.cols(); ++c) {
        Vec b = scatter_block(d, s, gather_block(d, s, link.basis_q.col(c)));
        Vec lhs = gamma(g, d.mul(xi, b));
        Vec rhs = d.mul(gamma(g, xi), gamma(g, b));
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) r_mod = false;
      }
      for (const Vec& eta_full : cols) {
        Vec eta = scatter_block(d, s, gather_block(d, s, eta_full));
        // <xi|eta>_A = xi eta^*, <xi|eta>_B = xi^* eta
        Vec lhs_a = gamma(g, d.mul(xi, d.star(eta)));
        Vec rhs_a = d.mul(gamma(g, xi), d.star(gamma(g, eta)));
        if ((lhs_a - rhs_a).cwiseAbs().maxCoeff() > tol) l_inn = false;
        Vec lhs_b = gamma(g, d.mul(d.star(xi), eta));
        Vec rhs_b = d.mul(d.star(gamma(g, xi)), gamma(g, eta));
        if ((lhs_b - rhs_b).cwiseAbs().maxCoeff() > tol) r_inn = false;
      }
    }
  }
  // twist: gamma_d(h)(xi) = u_h xi v_h^* with the compressed unitaries,
  // and the determination identities w_h xi = u_h xi, xi w_h = xi v_h
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      const Vec& w = amb.unitary(x, h);
      Vec u = d.mul(d.mul(link.p, w), link.p);         // p w p
      Vec v = d.mul(d.mul(link.p_perp, w), link.p_perp);
      for (const Vec& xi_full : cols) {
        Vec xi = scatter_block(d, x, gather_block(d, x, xi_full));
        if (xi.cwiseAbs().maxCoeff() < tol) continue;
        Vec lhs = gamma(cm.d[x][h], xi);
        Vec rhs = d.mul(d.mul(u, xi), d.star(v));
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) twist = false;
        if ((d.mul(w, xi) - d.mul(u, xi)).cwiseAbs().maxCoeff() > tol) det = false;
        if ((d.mul(xi, w) - d.mul(xi, v)).cwiseAbs().maxCoeff() > tol) det = false;
      }
    }
  rep.compat_left_module = l_mod;
  rep.compat_right_module = r_mod;
  rep.compat_left_inner = l_inn;
  rep.compat_right_inner = r_inn;
  rep.twist_identity = twist;
  rep.determination = det;
  return rep;
}

}  // namespace xmod
