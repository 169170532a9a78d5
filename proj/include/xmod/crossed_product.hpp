#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xmod/action.hpp"

namespace xmod {

/// An ordinary crossed product A x| G for a groupoid action, with its
/// canonical representations.  Basis elements are pairs (g, r): arrow
/// g of G and a basis vector of fiber(A, tgt g).  The product is the
/// convolution (a (x) d_g)(b (x) d_g') = a alpha_g(b) (x) d_gg' and the
/// star is (a (x) d_g)^* = alpha_g^-1(a^*) (x) d_g^-1, i.e. the
/// counting-measure convolution algebra of sections of r^*(A).
struct CrossedProductResult {
  GroupoidAlgebraAction action;      // the input action
  AlgPtr algebra;                    // A x| G
  AlgPtr acting_algebra;             // groupoid algebra of G (source of i_g)
  std::vector<int> basis_arrow;      // per basis index: its arrow
  std::vector<int> basis_fiber_pos;  // per basis index: position in the fiber block
  std::vector<std::vector<int>> arrow_basis;  // per arrow: its basis indices
  StarHom i_a;
  StarHom i_g;
};

inline CrossedProductResult crossed_product(const GroupoidAlgebraAction& act, double tol = kTolAlg) {
  const StarAlgebra& a = *act.algebra;
  const FiniteGroupoid& g = act.g;
  CrossedProductResult out;
  out.action = act;

  // enumerate the basis
  out.arrow_basis.resize(g.n_arrows());
  for (int ar = 0; ar < g.n_arrows(); ++ar) {
    for (size_t r = 0; r < a.blocks[g.tgt[ar]].size(); ++r) {
      out.arrow_basis[ar].push_back(static_cast<int>(out.basis_arrow.size()));
      out.basis_arrow.push_back(ar);
      out.basis_fiber_pos.push_back(static_cast<int>(r));
    }
  }
  const int d = static_cast<int>(out.basis_arrow.size());
  if (d == 0) fail("BadShape", "crossed product is zero-dimensional");
  if (d > kMaxAlgebraDim) fail("SizeLimit", "crossed product dimension " + std::to_string(d) + " exceeds cap");

  std::vector<std::vector<SparseVec>> mult(d, std::vector<SparseVec>(d));
  for (int ar = 0; ar < g.n_arrows(); ++ar) {
    if (out.arrow_basis[ar].empty()) continue;
    int tb = g.tgt[ar];
    const auto& tblk = a.blocks[tb];
    for (int q = 0; q < d; ++q) {
      int br = out.basis_arrow[q];
      if (!g.composable(ar, br)) continue;
      int cr = g.comp[ar][br];
      // alpha_g(b) once per (arrow, q); then multiply by each fiber basis a
      SparseVec moved = SparseVec::from_dense(
          act.apply_big(ar, Vec::Unit(a.dim, a.blocks[g.tgt[br]][out.basis_fiber_pos[q]])));
      for (size_t fp = 0; fp < tblk.size(); ++fp) {
        int p = out.arrow_basis[ar][fp];
        SparseVec lhs;
        lhs.terms = {{tblk[fp], 1.0}};
        SparseVec prod = a.mul_sparse(lhs, moved);
        for (auto& [k, c] : prod.terms) {
          // k lies in the tgt block; translate to its fiber position
          int pos = static_cast<int>(std::lower_bound(tblk.begin(), tblk.end(), k) - tblk.begin());
          mult[p][q].add(out.arrow_basis[cr][pos], c);
        }
      }
    }
  }
  Mat star = Mat::Zero(d, d);
  for (int p = 0; p < d; ++p) {
    int ar = out.basis_arrow[p];
    int iar = g.inv[ar];
    Vec starred = act.apply_big(iar, a.star_basis(a.blocks[g.tgt[ar]][out.basis_fiber_pos[p]]));
    const auto& sblk = a.blocks[g.src[ar]];
    for (size_t k = 0; k < sblk.size(); ++k) star(out.arrow_basis[iar][k], p) = starred(sblk[k]);
  }
  Vec unit = Vec::Zero(d);
  for (int x = 0; x < g.n_objects(); ++x) {
    const auto& blk = a.blocks[x];
    for (size_t r = 0; r < blk.size(); ++r) unit(out.arrow_basis[g.unit[x]][r]) = a.unit(blk[r]);
  }
  // fibering over the orbit set of G, so the projections are central
  std::vector<int> orbit = g.orbit_of();
  int n_orbits = orbit.empty() ? 0 : 1 + *std::max_element(orbit.begin(), orbit.end());
  std::vector<std::string> names;
  for (int i = 0; i < n_orbits; ++i) names.push_back("orbit" + std::to_string(i));
  std::vector<int> block(d);
  for (int p = 0; p < d; ++p) block[p] = orbit[g.tgt[out.basis_arrow[p]]];

  auto conv = std::make_shared<ConvolutionInfo>();
  conv->n_objects = g.n_objects();
  conv->arrow_tgt = g.tgt;
  conv->arrow_basis = out.arrow_basis;
  conv->fiber_at_object.assign(g.n_objects(), nullptr);
  for (int x = 0; x < g.n_objects(); ++x)
    if (!a.blocks[x].empty()) conv->fiber_at_object[x] = alg_ptr(fiber(a, x).algebra);

  out.algebra = alg_ptr(algebra_from_structure(std::move(mult), std::move(star), std::move(unit),
                                               std::move(names), std::move(block), tol, std::move(conv)));

  // canonical representations
  Mat ia = Mat::Zero(d, a.dim);
  for (int x = 0; x < g.n_objects(); ++x) {
    const auto& blk = a.blocks[x];
    for (size_t r = 0; r < blk.size(); ++r) ia.col(blk[r]) = Vec::Unit(d, out.arrow_basis[g.unit[x]][r]);
  }
  out.i_a = make_star_hom(act.algebra, out.algebra, std::move(ia), tol);
  out.acting_algebra = alg_ptr(groupoid_algebra(g));
  Mat ig = Mat::Zero(d, g.n_arrows());
  for (int ar = 0; ar < g.n_arrows(); ++ar) {
    const auto& blk = a.blocks[g.tgt[ar]];
    for (size_t r = 0; r < blk.size(); ++r) ig(out.arrow_basis[ar][r], ar) = a.unit(blk[r]);
  }
  out.i_g = make_star_hom(out.acting_algebra, out.algebra, std::move(ig), tol);

  // covariance of (i_a, i_g) on corner-matched fibers
  const StarAlgebra& cp = *out.algebra;
  for (int ar = 0; ar < g.n_arrows(); ++ar) {
    SparseVec vg = SparseVec::from_dense(out.i_g.matrix.col(ar));
    SparseVec vgs = SparseVec::from_dense(cp.star(out.i_g.matrix.col(ar)));
    for (int i : a.blocks[g.src[ar]]) {
      SparseVec ia = SparseVec::from_dense(out.i_a.matrix.col(i));
      Vec lhs = cp.mul_sparse(cp.mul_sparse(vg, ia), vgs).to_dense(d);
      Vec rhs = out.i_a(act.apply_big(ar, Vec::Unit(a.dim, i)));
      if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
        fail("CovarianceFailed", "i_G d_g i_A(a) i_G d_g^* != i_A(alpha_g a) at arrow " + g.arrow_names[ar]);
    }
  }
  return out;
}

/// Crossed product of a fiberwise action of a group bundle: the direct
/// sum over x of B_x x| H_x, fibered over the base.
inline CrossedProductResult bundle_crossed_product(const GroupBundle& bundle, const AlgPtr& algebra,
                                                   const std::vector<std::vector<Mat>>& fiber_actions,
                                                   double tol = kTolAlg) {
  FiniteGroupoid hg = bundle_as_groupoid(bundle);
  std::vector<Mat> alpha;
  for (int x = 0; x < bundle.n_objects(); ++x)
    for (int i = 0; i < bundle.fiber[x].order(); ++i) alpha.push_back(fiber_actions[x][i]);
  GroupoidAlgebraAction act = groupoid_algebra_action(hg, algebra, std::move(alpha), tol);
  return crossed_product(act, tol);
}

// ---------------------------------------------------------------------------
// The canonical action on B x| H (Example-style: beta becomes alpha on
// the crossed product, u = i_H)

struct CanonicalBHResult {
  CMAction action;                   // the action of (G,H) on B x| H
  CrossedProductResult product;      // B x| H with i_B
};

/// For beta an action of G on B, the crossed product A = B x| H (H
/// acting through beta o d fiberwise) carries the canonical action:
/// alpha_g(i_B(b)) = i_B(beta_g(b)), alpha_g(i_H(h)) = i_H(c_g(h)),
/// u = i_H.
inline CanonicalBHResult canonical_action_on_BH(const CrossedModule& cm, const GroupoidAlgebraAction& beta,
                                                double tol = kTolAlg) {
  const StarAlgebra& b = *beta.algebra;
  if (b.n_objects() != cm.g.n_objects()) fail("FiberMismatch", "B must be fibered over the object set of G");
  std::vector<std::vector<Mat>> fiber_actions(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x)
    for (int i = 0; i < cm.fiber(x).order(); ++i) fiber_actions[x].push_back(beta.mat(cm.d[x][i]));
  CrossedProductResult cp = bundle_crossed_product(cm.h, beta.algebra, fiber_actions, tol);
  const StarAlgebra& a = *cp.algebra;

  // H-arrow index of (x, h) inside the bundle groupoid
  std::vector<std::vector<int>> harrow(cm.g.n_objects());
  {
    int next = 0;
    for (int x = 0; x < cm.g.n_objects(); ++x)
      for (int i = 0; i < cm.fiber(x).order(); ++i) harrow[x].push_back(next++);
  }

  // alpha_g: (b (x) d_h) -> (beta_g b (x) d_{c_g h}), a map between the
  // fiber blocks of A
  std::vector<Mat> alpha;
  for (int ar = 0; ar < cm.g.n_arrows(); ++ar) {
    int s = cm.g.src[ar], t = cm.g.tgt[ar];
    const auto& sblk = a.blocks[s];
    const auto& tblk = a.blocks[t];
    Mat m = Mat::Zero(tblk.size(), sblk.size());
    std::vector<int> pos_in_tblk(a.dim, -1);
    for (size_t r = 0; r < tblk.size(); ++r) pos_in_tblk[tblk[r]] = static_cast<int>(r);
    for (size_t col = 0; col < sblk.size(); ++col) {
      int p = sblk[col];
      int h = cp.basis_arrow[p] - harrow[s][0];                 // fiber element at x = s
      int rb = cp.basis_fiber_pos[p];                           // basis position in B_s
      int ch = cm.c[ar][h];
      Vec moved = beta.apply_big(ar, Vec::Unit(b.dim, b.blocks[s][rb]));
      const auto& btblk = b.blocks[t];
      for (size_t k = 0; k < btblk.size(); ++k) {
        int target_basis = cp.arrow_basis[harrow[t][ch]][k];
        m(pos_in_tblk[target_basis], static_cast<int>(col)) = moved(btblk[k]);
      }
    }
    alpha.push_back(std::move(m));
  }
  std::vector<std::vector<Vec>> u(cm.g.n_objects());
  for (int x = 0; x < cm.g.n_objects(); ++x) {
    const auto& bblk = b.blocks[x];
    for (int h = 0; h < cm.fiber(x).order(); ++h) {
      Vec uh = Vec::Zero(a.dim);
      for (size_t r = 0; r < bblk.size(); ++r) uh(cp.arrow_basis[harrow[x][h]][r]) = b.unit(bblk[r]);
      u[x].push_back(std::move(uh));
    }
  }
  GroupoidAlgebraAction alpha_act = groupoid_algebra_action(cm.g, cp.algebra, std::move(alpha), tol);
  CMAction act = cm_action(cm, cp.algebra, std::move(alpha_act), std::move(u), tol);
  return CanonicalBHResult{std::move(act), std::move(cp)};
}

// ---------------------------------------------------------------------------
// rho_* and sigma_*: the coequalizer ingredients

/// The two *-homomorphisms A x| (H x|_c G) => A x| G whose coequalizer
/// is the crossed product by the crossed module.  On the delta basis:
/// rho(a (x) d_(h,g)) = a (x) d_{d(h)g}, sigma(a (x) d_(h,g)) =
/// a u_h (x) d_g (the integrated forms of the covariant pairs
/// (i_A, rho, i_G) and (i_A, sigma, i_G)).
struct RhoSigmaPair {
  FiniteGroupoid hxg;
  CrossedProductResult domain;    // A x| (H x|_c G)
  CrossedProductResult codomain;  // A x| G
  StarHom rho;
  StarHom sigma;
  StarHom embedding;              // A x| G -> A x| (H x|_c G), a (x) d_g -> a (x) d_(1,g)
};

inline RhoSigmaPair rho_sigma(const CMAction& act, double tol = kTolAlg) {
  const CrossedModule& cm = act.cm;
  const StarAlgebra& a = *act.algebra;
  RhoSigmaPair out;
  out.hxg = transformation_groupoid(cm);
  PairArrows pa = enumerate_pairs_over_tgt(cm);

  // bar-alpha action of H x|_c G: alpha_{d(h)g}
  std::vector<Mat> bar_alpha;
  for (auto [h, g] : pa.pairs) bar_alpha.push_back(act.alpha.mat(cm.g.comp[cm.d[cm.g.tgt[g]][h]][g]));
  GroupoidAlgebraAction bar = groupoid_algebra_action(out.hxg, act.algebra, std::move(bar_alpha), tol);
  out.domain = crossed_product(bar, tol);
  out.codomain = crossed_product(act.alpha, tol);

  const int dd = out.domain.algebra->dim;
  const int dc = out.codomain.algebra->dim;
  Mat rho = Mat::Zero(dc, dd);
  Mat sigma = Mat::Zero(dc, dd);
  for (int p = 0; p < dd; ++p) {
    int pair_arrow = out.domain.basis_arrow[p];
    auto [h, g] = pa.pairs[pair_arrow];
    int r = out.domain.basis_fiber_pos[p];
    int t = cm.g.tgt[g];
    int dh_g = cm.g.comp[cm.d[t][h]][g];
    rho(out.codomain.arrow_basis[dh_g][r], p) = 1.0;
    // a u_h in the fiber at tgt(g)
    Vec prod = a.mul(Vec::Unit(a.dim, a.blocks[t][r]), act.unitary(t, h));
    const auto& tblk = a.blocks[t];
    for (size_t k = 0; k < tblk.size(); ++k)
      if (std::abs(prod(tblk[k])) > 1e-14) sigma(out.codomain.arrow_basis[g][k], p) = prod(tblk[k]);
  }
  try {
    out.rho = make_star_hom(out.domain.algebra, out.codomain.algebra, std::move(rho), tol);
    out.sigma = make_star_hom(out.domain.algebra, out.codomain.algebra, std::move(sigma), tol);
  } catch (const Error& e) {
    fail("HomomorphismCheckFailed", e.what());
  }

  // canonical embedding A x| G -> M(A x| (H x|_c G)) on the delta basis
  Mat emb = Mat::Zero(dd, dc);
  for (int q = 0; q < dc; ++q) {
    int g = out.codomain.basis_arrow[q];
    int r = out.codomain.basis_fiber_pos[q];
    int t = cm.g.tgt[g];
    emb(out.domain.arrow_basis[pa.index[g][cm.fiber(t).identity]][r], q) = 1.0;
  }
  out.embedding = make_star_hom(out.codomain.algebra, out.domain.algebra, std::move(emb), tol);

  // rho and sigma are bimodule maps over A x| G through the embedding
  {
    const StarAlgebra& dom = *out.domain.algebra;
    const StarAlgebra& cod = *out.codomain.algebra;
    std::vector<SparseVec> rho_cols(dd), sig_cols(dd), emb_cols(dc);
    for (int p = 0; p < dd; ++p) rho_cols[p] = SparseVec::from_dense(out.rho.matrix.col(p));
    for (int p = 0; p < dd; ++p) sig_cols[p] = SparseVec::from_dense(out.sigma.matrix.col(p));
    for (int q = 0; q < dc; ++q) emb_cols[q] = SparseVec::from_dense(out.embedding.matrix.col(q));
    auto apply_cols = [&](const std::vector<SparseVec>& cols, const SparseVec& v) {
      SparseVec r;
      for (auto& [k, c] : v.terms)
        for (auto& [t2, c2] : cols[k].terms) r.add(t2, c * c2, 0.0);
      return r;
    };
    auto expect_equal = [&](const SparseVec& l, const SparseVec& r, const char* what) {
      SparseVec diff = l;
      for (auto& [t2, c2] : r.terms) diff.add(t2, -c2, 0.0);
      for (auto& [t2, c2] : diff.terms)
        if (std::abs(c2) > tol) fail("HomomorphismCheckFailed", what);
    };
    for (int q = 0; q < dc; ++q) {
      SparseVec xq;
      xq.terms = {{q, 1.0}};
      for (int p = 0; p < dd; ++p) {
        SparseVec fp;
        fp.terms = {{p, 1.0}};
        SparseVec xf = dom.mul_sparse(emb_cols[q], fp);
        SparseVec fx = dom.mul_sparse(fp, emb_cols[q]);
        expect_equal(apply_cols(rho_cols, xf), cod.mul_sparse(xq, rho_cols[p]),
                     "rho is not an A x| G bimodule map");
        expect_equal(apply_cols(rho_cols, fx), cod.mul_sparse(rho_cols[p], xq),
                     "rho is not an A x| G bimodule map");
        expect_equal(apply_cols(sig_cols, xf), cod.mul_sparse(xq, sig_cols[p]),
                     "sigma is not an A x| G bimodule map");
        expect_equal(apply_cols(sig_cols, fx), cod.mul_sparse(sig_cols[p], xq),
                     "sigma is not an A x| G bimodule map");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The crossed product by a crossed module (the coequalizer)

struct CMCrossedProduct {
  RhoSigmaPair maps;
  Ideal relator_ideal;          // I_H = ideal generated by range(rho - sigma)
  AlgPtr quotient;              // A x| (G,H)
  StarHom projection;           // A x| G -> quotient
  StarHom i_a;                  // A -> quotient
  StarHom i_g;                  // C*(G) -> quotient

  int full_dimension() const { return maps.codomain.algebra->dim; }
  int ideal_dimension() const { return relator_ideal.dimension(); }
  int quotient_dimension() const { return quotient->dim; }
};

inline CMCrossedProduct cm_crossed_product(const CMAction& act, double tol = kTolAlg) {
  CMCrossedProduct out;
  out.maps = rho_sigma(act, tol);
  Mat range = out.maps.rho.matrix - out.maps.sigma.matrix;
  int range_rank = linalg::rank_of(range, tol);
  out.relator_ideal = ideal_generated(*out.maps.codomain.algebra, range, tol);
  // the range of rho - sigma is already a two-sided ideal
  if (out.relator_ideal.extra_iterations != 0 || out.relator_ideal.dimension() != range_rank)
    fail("VerificationFailed", "range(rho - sigma) is not already an ideal");
  auto [quot, proj] = quotient_algebra(out.maps.codomain.algebra, out.relator_ideal, tol);
  out.quotient = proj.target;
  out.projection = std::move(proj);
  out.i_a = make_star_hom(act.algebra, out.quotient,
                          Mat(out.projection.matrix * out.maps.codomain.i_a.matrix), tol);
  out.i_g = make_star_hom(out.maps.codomain.acting_algebra, out.quotient,
                          Mat(out.projection.matrix * out.maps.codomain.i_g.matrix), tol);
  return out;
}

/// The crossed module C*-algebra: C0(X) x| (G,H) for the translation
/// action with u = 1.
inline CMCrossedProduct cm_cstar(const CrossedModule& cm, double tol = kTolAlg) {
  return cm_crossed_product(cstar_defining_action(cm), tol);
}

// ---------------------------------------------------------------------------
// Covariant representations (group case) and the integrated form

/// A covariant representation (pi, V) of a crossed-module action in a
/// target algebra: pi a unital *-homomorphism, V a unitary
/// representation of G with V_g pi(a) V_g^* = pi(alpha_g(a)) and
/// V_d(h) = pi(u_h).
struct CovariantRep {
  const CMAction* action = nullptr;
  AlgPtr target;
  StarHom pi;
  std::vector<Vec> v;  // per group element
};

inline CovariantRep covariant_rep(const CMAction& act, const AlgPtr& target, Mat pi_matrix,
                                  std::vector<Vec> v, double tol = kTolAlg) {
  if (!act.cm.group_flavored()) fail("BadShape", "covariant representations are implemented for group crossed modules");
  const StarAlgebra& a = *act.algebra;
  const StarAlgebra& t = *target;
  StarHom pi = make_star_hom(act.algebra, target, std::move(pi_matrix), tol);
  if ((pi(a.unit) - t.unit).cwiseAbs().maxCoeff() > tol) fail("NotCovariant", "pi is not unital");
  const FiniteGroupoid& g = act.cm.g;
  if (static_cast<int>(v.size()) != g.n_arrows()) fail("BadShape", "V must be total on G");
  for (int ga = 0; ga < g.n_arrows(); ++ga) {
    if ((t.mul(v[ga], t.star(v[ga])) - t.unit).cwiseAbs().maxCoeff() > tol ||
        (t.mul(t.star(v[ga]), v[ga]) - t.unit).cwiseAbs().maxCoeff() > tol)
      fail("NotCovariant", "V_" + g.arrow_names[ga] + " is not unitary");
    for (int gb = 0; gb < g.n_arrows(); ++gb)
      if ((v[g.comp[ga][gb]] - t.mul(v[ga], v[gb])).cwiseAbs().maxCoeff() > tol)
        fail("NotCovariant", "V is not multiplicative at (" + g.arrow_names[ga] + "," + g.arrow_names[gb] + ")");
    for (int i = 0; i < a.dim; ++i) {
      Vec lhs = t.mul(t.mul(v[ga], pi.matrix.col(i)), t.star(v[ga]));
      Vec rhs = pi(act.alpha.apply_big(ga, Vec::Unit(a.dim, i)));
      if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
        fail("NotCovariant", "V_g pi(a) V_g^* != pi(alpha_g(a)) at g=" + g.arrow_names[ga] + ", basis " + std::to_string(i));
    }
  }
  for (int h = 0; h < act.cm.fiber(0).order(); ++h) {
    Vec lhs = v[act.cm.d[0][h]];
    Vec rhs = pi(act.unitary(0, h));
    if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
      fail("TwistViolation", "V_d(h) != pi(u_h) at h=" + act.cm.fiber(0).name(h));
  }
  CovariantRep rep;
  rep.action = &act;
  rep.target = target;
  rep.pi = std::move(pi);
  rep.v = std::move(v);
  return rep;
}

/// Integrated form: the unique *-homomorphism out of the crossed
/// product with f o i_A = pi and f o i_G = V.
inline StarHom integrate(const CovariantRep& rep, const CMCrossedProduct& prod, double tol = kTolAlg) {
  const StarAlgebra& t = *rep.target;
  const CrossedProductResult& full = prod.maps.codomain;
  const StarAlgebra& a = *rep.action->algebra;
  Mat m = Mat::Zero(t.dim, full.algebra->dim);
  for (int p = 0; p < full.algebra->dim; ++p) {
    int g = full.basis_arrow[p];
    int i = a.blocks[0][full.basis_fiber_pos[p]];
    m.col(p) = t.mul(rep.pi.matrix.col(i), rep.v[g]);
  }
  // must kill the relator ideal, then descend along the projection
  for (int c = 0; c < prod.relator_ideal.basis.cols(); ++c)
    if ((m * prod.relator_ideal.basis.col(c)).cwiseAbs().maxCoeff() > tol * 10)
      fail("TwistViolation", "integrated form does not vanish on I_H");
  Mat lift = prod.projection.matrix.adjoint();  // isometric section of the quotient
  return make_star_hom(prod.quotient, rep.target, Mat(m * lift), tol);
}

/// Reads a covariant representation off a *-homomorphism out of the
/// crossed product (the inverse of `integrate`).
inline CovariantRep extract_covariant(const CMAction& act, const CMCrossedProduct& prod,
                                      const StarHom& f, double tol = kTolAlg) {
  std::vector<Vec> v;
  for (int g = 0; g < act.cm.g.n_arrows(); ++g) v.push_back(f(prod.i_g.matrix.col(g)));
  return covariant_rep(act, f.target, Mat(f.matrix * prod.i_a.matrix), std::move(v), tol);
}

/// The standard covariant representation of C0(G) x| H on l^2(G):
/// C0(G) acts by multiplication, G and H by left translation.
inline CovariantRep standard_representation(const CMAction& act, const CanonicalBHResult& bh,
                                            const AlgPtr& matrices, double tol = kTolAlg) {
  const CrossedModule& cm = act.cm;
  const FiniteGroup gq = [&] {
    // group elements = arrows of the one-object groupoid
    const FiniteGroupoid& g = cm.g;
    std::vector<std::vector<int>> table(g.n_arrows(), std::vector<int>(g.n_arrows()));
    for (int i = 0; i < g.n_arrows(); ++i)
      for (int j = 0; j < g.n_arrows(); ++j) table[i][j] = g.comp[i][j];
    return group_from_table(g.arrow_names, table);
  }();
  const int n = gq.order();
  const StarAlgebra& a = *act.algebra;
  auto unit_idx = [n](int i, int j) { return i * n + j; };
  Mat pi = Mat::Zero(n * n, a.dim);
  for (int p = 0; p < a.dim; ++p) {
    int harrow = bh.product.basis_arrow[p];  // bundle arrow = element of H
    int point = bh.product.basis_fiber_pos[p];  // point of G (C0(G) coordinate)
    int dh = cm.d[0][harrow];
    // e_point (x) d_h acts on l^2(G) as E_{point, d(h)^-1 point}
    pi(unit_idx(point, gq.mul(gq.inv(dh), point)), p) = 1.0;
  }
  std::vector<Vec> v;
  for (int g = 0; g < n; ++g) {
    Vec vg = Vec::Zero(n * n);
    for (int x = 0; x < n; ++x) vg(unit_idx(gq.mul(g, x), x)) = 1.0;
    v.push_back(std::move(vg));
  }
  return covariant_rep(act, matrices, std::move(pi), std::move(v), tol);
}

// ---------------------------------------------------------------------------
// Functoriality

/// The map induced on crossed products by an equivariant map, with the
/// rho/sigma naturality squares checked on the way.
struct InducedMaps {
  StarHom on_full;       // A x| G -> B x| G
  StarHom on_domain;     // A x| (HxG) -> B x| (HxG)
  StarHom on_quotient;   // A x| (G,H) -> B x| (G,H)
};

inline InducedMaps induced_cm_hom(const EquivariantMap& f, const CMCrossedProduct& pa,
                                  const CMCrossedProduct& pb, double tol = kTolAlg) {
  const StarAlgebra& a = *f.source->algebra;
  const CrossedProductResult& fa = pa.maps.codomain;
  const CrossedProductResult& fb = pb.maps.codomain;
  const StarAlgebra& balg = *f.target->algebra;
  auto lift_map = [&](const CrossedProductResult& ca, const CrossedProductResult& cb) {
    Mat m = Mat::Zero(cb.algebra->dim, ca.algebra->dim);
    for (int p = 0; p < ca.algebra->dim; ++p) {
      int g = ca.basis_arrow[p];
      int t = ca.action.g.tgt[g];
      Vec img = f.hom(Vec::Unit(a.dim, a.blocks[t][ca.basis_fiber_pos[p]]));
      const auto& tblk = balg.blocks[t];
      for (size_t k = 0; k < tblk.size(); ++k)
        if (std::abs(img(tblk[k])) > 1e-14) m(cb.arrow_basis[g][k], p) = img(tblk[k]);
    }
    return m;
  };
  InducedMaps out;
  out.on_full = make_star_hom(fa.algebra, fb.algebra, lift_map(fa, fb), tol);
  out.on_domain = make_star_hom(pa.maps.domain.algebra, pb.maps.domain.algebra,
                                lift_map(pa.maps.domain, pb.maps.domain), tol);
  // naturality squares with rho and sigma
  Mat sq1 = pb.maps.rho.matrix * out.on_domain.matrix - out.on_full.matrix * pa.maps.rho.matrix;
  Mat sq2 = pb.maps.sigma.matrix * out.on_domain.matrix - out.on_full.matrix * pa.maps.sigma.matrix;
  if (linalg::inf_norm(sq1) > tol || linalg::inf_norm(sq2) > tol)
    fail("VerificationFailed", "rho/sigma naturality squares do not commute");
  // descend to the coequalizers
  for (int c = 0; c < pa.relator_ideal.basis.cols(); ++c) {
    Vec moved = pb.projection.matrix * (out.on_full.matrix * pa.relator_ideal.basis.col(c));
    if (moved.cwiseAbs().maxCoeff() > tol)
      fail("VerificationFailed", "induced map does not preserve the relator ideal");
  }
  Mat lift = pa.projection.matrix.adjoint();
  out.on_quotient = make_star_hom(pa.quotient, pb.quotient,
                                  Mat(pb.projection.matrix * out.on_full.matrix * lift), tol);
  return out;
}

// ---------------------------------------------------------------------------
// Crossed products in stages: (B x| H) x| (G,H) ~ B x| G

struct Thm51Report {
  int dim_full = 0;        // (B x| H) x| G
  int dim_ideal = 0;       // I_H
  int dim_lhs = 0;         // (B x| H) x| (G,H)
  int dim_rhs = 0;         // B x| G
  std::vector<int> blocks_lhs, blocks_rhs;
  bool theta_ok = false;          // iterated-product identification is a *-isomorphism
  bool chi_surjective = false;    // chi_*: B x| (H x|_c G) ->> B x| G
  bool kernel_equals_ideal = false;
  bool iso_ok = false;            // induced quotient map is a *-isomorphism
  bool blocks_match = false;

  bool pass() const { return theta_ok && chi_surjective && kernel_equals_ideal && iso_ok && blocks_match; }
};

/// Verifies the crossed-products-in-stages theorem on a concrete
/// instance: builds the canonical action on B x| H, forms its crossed
/// product by (G, H), and checks it against B x| G through the
/// explicit chain
///   (B x| H) x| G  ~  B x| (H x|_c G)  --chi-->  B x| G,
/// with ker(chi o theta) = I_H by containment and dimension.
inline Thm51Report verify_thm51(const CrossedModule& cm, const GroupoidAlgebraAction& beta,
                                uint64_t seed = 0, double tol = kTolAlg) {
  Thm51Report rep;
  CanonicalBHResult bh = canonical_action_on_BH(cm, beta, tol);
  CMCrossedProduct lhs = cm_crossed_product(bh.action, tol);
  rep.dim_full = lhs.full_dimension();
  rep.dim_ideal = lhs.ideal_dimension();
  rep.dim_lhs = lhs.quotient_dimension();

  CrossedProductResult rhs = crossed_product(beta, tol);
  rep.dim_rhs = rhs.algebra->dim;

  // theta: (B x| H) x| G -> B x| (H x|_c G), ((b (x) d_h) (x) d_g) -> (b (x) d_(h,g))
  const StarAlgebra& b = *beta.algebra;
  PairArrows pa = enumerate_pairs_over_tgt(cm);
  std::vector<Mat> bar_alpha;
  for (auto [h, g] : pa.pairs) bar_alpha.push_back(beta.mat(cm.g.comp[cm.d[cm.g.tgt[g]][h]][g]));
  FiniteGroupoid hxg = transformation_groupoid(cm);
  GroupoidAlgebraAction bar = groupoid_algebra_action(hxg, beta.algebra, std::move(bar_alpha), tol);
  CrossedProductResult bhg = crossed_product(bar, tol);

  const CrossedProductResult& full = lhs.maps.codomain;  // (B x| H) x| G
  const StarAlgebra& a = *bh.action.algebra;             // B x| H
  std::vector<std::vector<int>> harrow(cm.g.n_objects());
  {
    int next = 0;
    for (int x = 0; x < cm.g.n_objects(); ++x)
      for (int i = 0; i < cm.fiber(x).order(); ++i) harrow[x].push_back(next++);
  }
  Mat theta = Mat::Zero(bhg.algebra->dim, full.algebra->dim);
  for (int p = 0; p < full.algebra->dim; ++p) {
    int g = full.basis_arrow[p];
    int t = cm.g.tgt[g];
    int apos = full.basis_fiber_pos[p];
    int abase = a.blocks[t][apos];
    int h = bh.product.basis_arrow[abase] - harrow[t][0];
    int rb = bh.product.basis_fiber_pos[abase];
    theta(bhg.arrow_basis[pa.index[g][h]][rb], p) = 1.0;
  }
  StarHom theta_hom;
  try {
    theta_hom = make_star_hom(full.algebra, bhg.algebra, std::move(theta), tol);
    rep.theta_ok = linalg::rank_of(theta_hom.matrix, tol) == full.algebra->dim &&
                   bhg.algebra->dim == full.algebra->dim;
  } catch (const Error&) {
    rep.theta_ok = false;
    return rep;
  }

  // chi_*: B x| (H x|_c G) -> B x| G induced by (h,g) -> d(h) g
  Mat chi = Mat::Zero(rhs.algebra->dim, bhg.algebra->dim);
  for (int p = 0; p < bhg.algebra->dim; ++p) {
    auto [h, g] = pa.pairs[bhg.basis_arrow[p]];
    int dh_g = cm.g.comp[cm.d[cm.g.tgt[g]][h]][g];
    chi(rhs.arrow_basis[dh_g][bhg.basis_fiber_pos[p]], p) = 1.0;
  }
  StarHom chi_hom;
  try {
    chi_hom = make_star_hom(bhg.algebra, rhs.algebra, std::move(chi), tol);
  } catch (const Error&) {
    return rep;
  }
  rep.chi_surjective = linalg::rank_of(chi_hom.matrix, tol) == rhs.algebra->dim;

  // ker(chi o theta) = I_H: containment I_H <= ker plus equal dimensions
  Mat composed = chi_hom.matrix * theta_hom.matrix;
  bool contained = true;
  for (int c = 0; c < lhs.relator_ideal.basis.cols(); ++c)
    if ((composed * lhs.relator_ideal.basis.col(c)).cwiseAbs().maxCoeff() > tol) contained = false;
  int ker_dim = full.algebra->dim - linalg::rank_of(composed, tol);
  rep.kernel_equals_ideal = contained && ker_dim == rep.dim_ideal;

  // the induced map on the coequalizer is a *-isomorphism onto B x| G
  try {
    Mat lift = lhs.projection.matrix.adjoint();
    StarHom induced = make_star_hom(lhs.quotient, rhs.algebra, Mat(composed * lift), tol);
    rep.iso_ok = rep.dim_lhs == rep.dim_rhs &&
                 linalg::rank_of(induced.matrix, tol) == rep.dim_rhs;
  } catch (const Error&) {
    rep.iso_ok = false;
  }

  rep.blocks_lhs = wedderburn(*lhs.quotient, seed);
  rep.blocks_rhs = wedderburn(*rhs.algebra, seed);
  rep.blocks_match = rep.blocks_lhs == rep.blocks_rhs;
  return rep;
}

// ---------------------------------------------------------------------------
// Exactness of the crossed product functor

struct ExactnessReport {
  int dim_ideal_product = 0;     // I x| (G,H)
  int dim_full_product = 0;      // A x| (G,H)
  int dim_quotient_product = 0;  // (A/I) x| (G,H)
  bool zero_ideal = false;
  bool injective = false;
  bool surjective = false;
  bool middle_exact = false;
  bool dims_add = false;

  bool pass() const {
    return zero_ideal || (injective && surjective && middle_exact && dims_add);
  }
};

/// Verifies that an invariant ideal induces an extension of crossed
/// products: I x| (G,H) >--> A x| (G,H) -->> (A/I) x| (G,H).
inline ExactnessReport verify_exactness(const CMAction& act, const Ideal& ideal, double tol = kTolAlg) {
  ExactnessReport rep;
  ActionExtension ext = restrict_and_quotient(act, ideal, tol);
  CMCrossedProduct full = cm_crossed_product(act, tol);
  rep.dim_full_product = full.quotient_dimension();
  if (!ext.ideal_action) {
    rep.zero_ideal = true;
    rep.dim_quotient_product = cm_crossed_product(ext.quotient_action, tol).quotient_dimension();
    return rep;
  }
  CMCrossedProduct left = cm_crossed_product(*ext.ideal_action, tol);
  CMCrossedProduct right = cm_crossed_product(ext.quotient_action, tol);
  rep.dim_ideal_product = left.quotient_dimension();
  rep.dim_quotient_product = right.quotient_dimension();

  EquivariantMap incl = equivariant_map(*ext.ideal_action, act, StarHom{ext.ideal_action->algebra, act.algebra, ext.ideal_basis}, tol);
  EquivariantMap surj = equivariant_map(act, ext.quotient_action,
                                        StarHom{act.algebra, ext.quotient_action.algebra, ext.projection.matrix}, tol);
  InducedMaps iota = induced_cm_hom(incl, left, full, tol);
  InducedMaps pi = induced_cm_hom(surj, full, right, tol);

  rep.injective = linalg::rank_of(iota.on_quotient.matrix, tol) == rep.dim_ideal_product;
  rep.surjective = linalg::rank_of(pi.on_quotient.matrix, tol) == rep.dim_quotient_product;
  // middle exactness: im(iota) <= ker(pi) elementwise, then dimensions
  Mat comp = pi.on_quotient.matrix * iota.on_quotient.matrix;
  bool contained = linalg::inf_norm(comp) <= tol;
  int ker_dim = rep.dim_full_product - linalg::rank_of(pi.on_quotient.matrix, tol);
  rep.middle_exact = contained && ker_dim == linalg::rank_of(iota.on_quotient.matrix, tol);
  rep.dims_add = rep.dim_ideal_product + rep.dim_quotient_product == rep.dim_full_product;
  return rep;
}

}  // namespace xmod
