#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "xmod/groupoid.hpp"
#include "xmod/linalg.hpp"

namespace xmod {

/// Sparse coordinate vector, sorted by index.
struct SparseVec {
  std::vector<std::pair<int, cplx>> terms;

  void add(int k, cplx v, double drop = 1e-14) {
    if (std::abs(v) <= drop) return;
    auto it = std::lower_bound(terms.begin(), terms.end(), k,
                               [](const auto& p, int key) { return p.first < key; });
    if (it != terms.end() && it->first == k) {
      it->second += v;
      if (std::abs(it->second) <= drop) terms.erase(it);
    } else {
      terms.insert(it, {k, v});
    }
  }

  static SparseVec from_dense(const Vec& v, double drop = 1e-14) {
    SparseVec s;
    for (int k = 0; k < v.size(); ++k)
      if (std::abs(v(k)) > drop) s.terms.emplace_back(k, v(k));
    return s;
  }

  Vec to_dense(int dim) const {
    Vec v = Vec::Zero(dim);
    for (auto& [k, c] : terms) v(k) = c;
    return v;
  }
};

struct StarAlgebra;
using AlgPtr = std::shared_ptr<const StarAlgebra>;

/// Convolution bookkeeping carried by groupoid algebras and crossed
/// products so the I-norm can be evaluated.
struct ConvolutionInfo {
  int n_objects = 0;                          // objects of the underlying groupoid
  std::vector<int> arrow_tgt;                 // per arrow
  std::vector<std::vector<int>> arrow_basis;  // per arrow: basis indices, ordered as the fiber basis
  std::vector<AlgPtr> fiber_at_object;        // coefficient algebra per object
};

/// GNS data of the canonical trace tr(L_a); computed once at
/// validation time (it doubles as the C*-realizability certificate).
struct GnsData {
  Mat gram;      // M_ij = tr(L_{e_i^* e_j})
  Mat w, winv;   // M = W^H W
  double lambda_min = 0, lambda_max = 0;
};

/// A finite-dimensional unital *-algebra over C given by structure
/// constants, fibered over a finite object set by basis-aligned
/// central projections.  The multiplier algebra M(A) is identified
/// with A throughout: every finite-dimensional C*-algebra is unital.
struct StarAlgebra {
  int dim = 0;
  std::vector<std::vector<SparseVec>> mult;  // mult[i][j] = e_i * e_j
  Mat star_mat;                              // star(v) = star_mat * conj(v)
  Vec unit;
  std::vector<std::string> object_names;     // fibering base; size >= 1
  std::vector<int> block_of;                 // basis index -> object
  std::shared_ptr<const ConvolutionInfo> conv;
  GnsData gns;
  std::vector<std::vector<int>> blocks;      // per object: its basis indices

  int n_objects() const { return static_cast<int>(object_names.size()); }

  Vec star(const Vec& v) const { return star_mat * v.conjugate(); }

  Vec star_basis(int i) const { return star_mat.col(i); }

  /// e_i * v
  Vec mul_basis_left(int i, const Vec& v) const {
    Vec r = Vec::Zero(dim);
    for (int j = 0; j < dim; ++j) {
      if (v(j) == cplx(0)) continue;
      for (auto& [k, c] : mult[i][j].terms) r(k) += c * v(j);
    }
    return r;
  }

  /// v * e_j
  Vec mul_basis_right(const Vec& v, int j) const {
    Vec r = Vec::Zero(dim);
    for (int i = 0; i < dim; ++i) {
      if (v(i) == cplx(0)) continue;
      for (auto& [k, c] : mult[i][j].terms) r(k) += c * v(i);
    }
    return r;
  }

  SparseVec mul_sparse(const SparseVec& a, const SparseVec& b) const {
    static thread_local std::vector<cplx> scratch;
    static thread_local std::vector<int> touched;
    if (static_cast<int>(scratch.size()) < dim) scratch.assign(dim, cplx(0));
    for (auto& [i, ci] : a.terms)
      for (auto& [j, cj] : b.terms)
        for (auto& [k, c] : mult[i][j].terms) {
          if (scratch[k] == cplx(0)) touched.push_back(k);
          scratch[k] += ci * cj * c;
        }
    SparseVec r;
    std::sort(touched.begin(), touched.end());
    for (int k : touched) {
      if (std::abs(scratch[k]) > 1e-14) r.terms.emplace_back(k, scratch[k]);
      scratch[k] = cplx(0);
    }
    touched.clear();
    return r;
  }

  Vec mul(const Vec& a, const Vec& b) const {
    Vec r = Vec::Zero(dim);
    for (int i = 0; i < dim; ++i) {
      if (a(i) == cplx(0)) continue;
      for (int j = 0; j < dim; ++j) {
        if (b(j) == cplx(0)) continue;
        cplx f = a(i) * b(j);
        for (auto& [k, c] : mult[i][j].terms) r(k) += c * f;
      }
    }
    return r;
  }

  /// Matrix of left multiplication by v.
  Mat left_operator(const Vec& v) const {
    Mat l = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      if (v(i) == cplx(0)) continue;
      for (int j = 0; j < dim; ++j)
        for (auto& [k, c] : mult[i][j].terms) l(k, j) += c * v(i);
    }
    return l;
  }

  Mat right_operator(const Vec& v) const {
    Mat r = Mat::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
      if (v(j) == cplx(0)) continue;
      for (int i = 0; i < dim; ++i)
        for (auto& [k, c] : mult[i][j].terms) r(k, i) += c * v(j);
    }
    return r;
  }

  double trace_of_left(const Vec& v) const {
    cplx t = 0;
    for (int i = 0; i < dim; ++i) {
      if (v(i) == cplx(0)) continue;
      for (int j = 0; j < dim; ++j)
        for (auto& [k, c] : mult[i][j].terms)
          if (k == j) t += c * v(i);
    }
    return t.real();
  }

  /// Central projection onto the block of object x (the unit restricted
  /// to that block).
  Vec block_projection(int x) const {
    Vec p = Vec::Zero(dim);
    for (int i : blocks[x]) p(i) = unit(i);
    return p;
  }

  int object_index(const std::string& name) const {
    for (int x = 0; x < n_objects(); ++x)
      if (object_names[x] == name) return x;
    fail("UnknownObject", "no fibering object named '" + name + "'");
  }
};

inline AlgPtr alg_ptr(StarAlgebra a) { return std::make_shared<const StarAlgebra>(std::move(a)); }

/// A verified (not necessarily unital) *-homomorphism given by its
/// coordinate matrix.
struct StarHom {
  AlgPtr source;
  AlgPtr target;
  Mat matrix;

  Vec operator()(const Vec& v) const { return matrix * v; }
};

namespace detail {

inline void validate_star_algebra(StarAlgebra& a, double tol, bool check_cstar);

}  // namespace detail

/// Builds and fully validates a StarAlgebra.  `block_of` may be empty
/// for a single-object fibering.
inline StarAlgebra algebra_from_structure(std::vector<std::vector<SparseVec>> mult, Mat star_mat,
                                          Vec unit, std::vector<std::string> object_names = {},
                                          std::vector<int> block_of = {}, double tol = kTolAlg,
                                          std::shared_ptr<const ConvolutionInfo> conv = nullptr) {
  StarAlgebra a;
  a.dim = static_cast<int>(unit.size());
  if (a.dim < 1) fail("BadShape", "algebra must have positive dimension");
  if (a.dim > max_algebra_dim())
    fail("SizeLimit", "algebra dimension " + std::to_string(a.dim) + " exceeds cap " + std::to_string(max_algebra_dim()));
  a.mult = std::move(mult);
  a.star_mat = std::move(star_mat);
  a.unit = std::move(unit);
  if (object_names.empty()) {
    a.object_names = {"*"};
    a.block_of.assign(a.dim, 0);
  } else {
    a.object_names = std::move(object_names);
    a.block_of = std::move(block_of);
  }
  a.conv = std::move(conv);
  detail::validate_star_algebra(a, tol, true);
  return a;
}

namespace detail {

inline void compute_gns(StarAlgebra& a, double tol) {
  const int n = a.dim;
  Eigen::VectorXcd traces(n);
  for (int k = 0; k < n; ++k) {
    cplx t = 0;
    for (int j = 0; j < n; ++j)
      for (auto& [idx, c] : a.mult[k][j].terms)
        if (idx == j) t += c;
    traces(k) = t;
  }
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    SparseVec si = SparseVec::from_dense(a.star_basis(i));
    for (int j = 0; j < n; ++j) {
      // e_i^* e_j paired with the trace functional
      cplx val = 0;
      for (auto& [k, ck] : si.terms)
        for (auto& [idx, c] : a.mult[k][j].terms) val += ck * c * traces(idx);
      m(i, j) = val;
    }
  }
  if (linalg::inf_norm(Mat(m - m.adjoint())) > tol * std::max(1.0, linalg::inf_norm(m)))
    fail("NotCStar", "canonical trace form is not hermitian");
  auto eig = linalg::hermitian_eig((m + m.adjoint()) / 2.0);
  double lo = eig.values(0), hi = eig.values(n - 1);
  // C*-realizability: the form must be positive definite.  A merely
  // positive semidefinite kernel would admit a nilpotent part (e.g.
  // dual numbers), which no C*-algebra has.
  if (lo <= 1e-7 * std::max(1.0, hi)) fail("NotCStar", "trace form has eigenvalue " + std::to_string(lo));
  a.gns.gram = m;
  RealVec sq = eig.values.cwiseSqrt();
  a.gns.w = sq.asDiagonal() * eig.vectors.adjoint();
  a.gns.winv = eig.vectors * sq.cwiseInverse().asDiagonal();
  a.gns.lambda_min = lo;
  a.gns.lambda_max = hi;
}

inline void validate_star_algebra(StarAlgebra& a, double tol, bool check_cstar) {
  const int n = a.dim;
  if (static_cast<int>(a.mult.size()) != n) fail("BadShape", "mult tensor has wrong shape");
  for (auto& row : a.mult)
    if (static_cast<int>(row.size()) != n) fail("BadShape", "mult tensor has wrong shape");
  if (a.star_mat.rows() != n || a.star_mat.cols() != n) fail("BadShape", "star matrix has wrong shape");
  if (static_cast<int>(a.block_of.size()) != n) fail("BadShape", "fibering not total on basis");
  for (int i : a.block_of)
    if (i < 0 || i >= a.n_objects()) fail("BadFibering", "block label out of range");
  a.blocks.assign(a.n_objects(), {});
  for (int i = 0; i < n; ++i) a.blocks[a.block_of[i]].push_back(i);

  double scale = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (auto& [k, c] : a.mult[i][j].terms) scale = std::max(scale, std::abs(c));
  const double eps = tol * scale;

  // unit is two-sided neutral
  for (int i = 0; i < n; ++i) {
    Vec ei = Vec::Unit(n, i);
    if ((a.mul_basis_right(a.unit, i) - ei).cwiseAbs().maxCoeff() > eps)
      fail("BadUnit", "unit not left-neutral on basis " + std::to_string(i));
    if ((a.mul_basis_left(i, a.unit) - ei).cwiseAbs().maxCoeff() > eps)
      fail("BadUnit", "unit not right-neutral on basis " + std::to_string(i));
  }

  // star: involutive and anti-multiplicative (conjugate-linearity is
  // structural: star(v) = S conj(v))
  Mat invol = a.star_mat * a.star_mat.conjugate();
  if (linalg::inf_norm(Mat(invol - Mat::Identity(n, n))) > eps) fail("BadInvolution", "star is not involutive");
  {
    std::vector<SparseVec> scols(n);
    for (int i = 0; i < n; ++i) scols[i] = SparseVec::from_dense(a.star_basis(i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        SparseVec lhs;
        for (auto& [k, c] : a.mult[i][j].terms)
          for (auto& [t, ct] : scols[k].terms) lhs.add(t, std::conj(c) * ct, 0.0);
        SparseVec rhs = a.mul_sparse(scols[j], scols[i]);
        for (auto& [t, ct] : rhs.terms) lhs.add(t, -ct, 0.0);
        for (auto& [t, ct] : lhs.terms)
          if (std::abs(ct) > eps)
            fail("BadInvolution", "(e_" + std::to_string(i) + " e_" + std::to_string(j) + ")* != e_j* e_i*");
      }
  }

  // associativity on all basis triples, via a reusable dense scratch
  {
    Vec scratch = Vec::Zero(n);
    std::vector<int> touched;
    touched.reserve(16);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto& ij = a.mult[i][j].terms;
        for (int k = 0; k < n; ++k) {
          const auto& jk = a.mult[j][k].terms;
          if (ij.empty() && jk.empty()) continue;
          for (auto& [r, c] : ij)
            for (auto& [s, c2] : a.mult[r][k].terms) {
              if (scratch(s) == cplx(0)) touched.push_back(s);
              scratch(s) += c * c2;
            }
          for (auto& [s, c] : jk)
            for (auto& [r, c2] : a.mult[i][s].terms) {
              if (scratch(r) == cplx(0)) touched.push_back(r);
              scratch(r) -= c * c2;
            }
          for (int t : touched) {
            if (std::abs(scratch(t)) > eps)
              fail("NotAssociative", "triple (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")");
            scratch(t) = 0;
          }
          touched.clear();
        }
      }
  }

  // fibering: basis-aligned blocks, block-diagonal product, block-stable star
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (auto& [k, c] : a.mult[i][j].terms) {
        if (a.block_of[i] != a.block_of[j])
          fail("BadFibering", "product of basis elements from different blocks is nonzero");
        if (a.block_of[k] != a.block_of[i]) fail("BadFibering", "product leaves its block");
      }
  for (int i = 0; i < n; ++i) {
    Vec s = a.star_basis(i);
    for (int k = 0; k < n; ++k)
      if (std::abs(s(k)) > eps && a.block_of[k] != a.block_of[i])
        fail("BadFibering", "star does not preserve blocks");
  }
  for (int x = 0; x < a.n_objects(); ++x) {
    Vec p = a.block_projection(x);
    if ((a.mul(p, p) - p).cwiseAbs().maxCoeff() > eps) fail("BadFibering", "block projection not idempotent");
    if ((a.star(p) - p).cwiseAbs().maxCoeff() > eps) fail("BadFibering", "block projection not self-adjoint");
    for (int i = 0; i < n; ++i)
      if ((a.mul_basis_right(p, i) - a.mul_basis_left(i, p)).cwiseAbs().maxCoeff() > eps)
        fail("BadFibering", "block projection not central");
  }
  // Sum of block projections is the unit by construction (they are the
  // unit's block restrictions), and the left regular representation is
  // faithful because the algebra is unital: L_a(1) = a.
  if (check_cstar) compute_gns(a, tol);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Standard models

/// Full matrix algebra M_n with matrix-unit basis e_(i,j) at index i*n+j.
inline StarAlgebra matrix_algebra(int n) {
  const int d = n * n;
  std::vector<std::vector<SparseVec>> mult(d, std::vector<SparseVec>(d));
  auto id = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          if (j == k) mult[id(i, j)][id(k, l)].add(id(i, l), 1.0);
  Mat star = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) star(id(j, i), id(i, j)) = 1.0;
  Vec unit = Vec::Zero(d);
  for (int i = 0; i < n; ++i) unit(id(i, i)) = 1.0;
  return algebra_from_structure(std::move(mult), std::move(star), std::move(unit));
}

/// C0(X) for a finite set X, fibered over X by the coordinate projections.
inline StarAlgebra functions_on(const std::vector<std::string>& points) {
  const int d = static_cast<int>(points.size());
  if (d == 0) fail("BadShape", "functions_on needs a nonempty set");
  std::vector<std::vector<SparseVec>> mult(d, std::vector<SparseVec>(d));
  for (int i = 0; i < d; ++i) mult[i][i].add(i, 1.0);
  Mat star = Mat::Identity(d, d);
  Vec unit = Vec::Ones(d);
  std::vector<int> block(d);
  std::iota(block.begin(), block.end(), 0);
  return algebra_from_structure(std::move(mult), std::move(star), std::move(unit), points, block);
}

/// Direct sum, fibered over the disjoint union of the two object sets.
inline StarAlgebra direct_sum(const StarAlgebra& a, const StarAlgebra& b) {
  const int d = a.dim + b.dim;
  std::vector<std::vector<SparseVec>> mult(d, std::vector<SparseVec>(d));
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j)
      for (auto& [k, c] : a.mult[i][j].terms) mult[i][j].add(k, c);
  for (int i = 0; i < b.dim; ++i)
    for (int j = 0; j < b.dim; ++j)
      for (auto& [k, c] : b.mult[i][j].terms) mult[a.dim + i][a.dim + j].add(a.dim + k, c);
  Mat star = Mat::Zero(d, d);
  star.topLeftCorner(a.dim, a.dim) = a.star_mat;
  star.bottomRightCorner(b.dim, b.dim) = b.star_mat;
  Vec unit(d);
  unit << a.unit, b.unit;
  std::vector<std::string> objects;
  std::vector<int> block(d);
  for (int x = 0; x < a.n_objects(); ++x) objects.push_back("L." + a.object_names[x]);
  for (int x = 0; x < b.n_objects(); ++x) objects.push_back("R." + b.object_names[x]);
  for (int i = 0; i < a.dim; ++i) block[i] = a.block_of[i];
  for (int i = 0; i < b.dim; ++i) block[a.dim + i] = a.n_objects() + b.block_of[i];
  return algebra_from_structure(std::move(mult), std::move(star), std::move(unit), std::move(objects), std::move(block));
}

/// Convolution algebra of a finite groupoid with counting Haar system:
/// delta_g * delta_h = delta_gh (when composable), delta_g^* =
/// delta_{g^-1}.  The fibering is taken over the orbit set by default
/// so that the block projections are actually central; an explicit
/// finer partition may be supplied when the groupoid's arrows respect it.
inline StarAlgebra groupoid_algebra(const FiniteGroupoid& k,
                                    std::optional<std::vector<int>> object_partition = std::nullopt,
                                    std::vector<std::string> partition_names = {}) {
  const int d = k.n_arrows();
  std::vector<int> part;
  if (object_partition) {
    part = *object_partition;
    for (int a = 0; a < d; ++a)
      if (part[k.src[a]] != part[k.tgt[a]])
        fail("BadFibering", "arrow " + k.arrow_names[a] + " crosses the requested fibering");
    if (partition_names.empty()) {
      int m = 1 + *std::max_element(part.begin(), part.end());
      for (int i = 0; i < m; ++i) partition_names.push_back("b" + std::to_string(i));
    }
  } else {
    part = k.orbit_of();
    int m = 1 + (part.empty() ? -1 : *std::max_element(part.begin(), part.end()));
    for (int i = 0; i < m; ++i) partition_names.push_back("orbit" + std::to_string(i));
  }
  std::vector<std::vector<SparseVec>> mult(d, std::vector<SparseVec>(d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (k.composable(a, b)) mult[a][b].add(k.comp[a][b], 1.0);
  Mat star = Mat::Zero(d, d);
  for (int a = 0; a < d; ++a) star(k.inv[a], a) = 1.0;
  Vec unit = Vec::Zero(d);
  for (int x = 0; x < k.n_objects(); ++x) unit(k.unit[x]) += 1.0;
  std::vector<int> block(d);
  for (int a = 0; a < d; ++a) block[a] = part[k.tgt[a]];

  auto conv = std::make_shared<ConvolutionInfo>();
  conv->n_objects = k.n_objects();
  conv->arrow_tgt = k.tgt;
  conv->arrow_basis.resize(d);
  for (int a = 0; a < d; ++a) conv->arrow_basis[a] = {a};
  static const AlgPtr scalar_fiber = alg_ptr(functions_on({"pt"}));
  conv->fiber_at_object.assign(k.n_objects(), scalar_fiber);
  return algebra_from_structure(std::move(mult), std::move(star), std::move(unit),
                                std::move(partition_names), std::move(block), kTolAlg, std::move(conv));
}

inline StarAlgebra group_algebra(const FiniteGroup& g) { return groupoid_algebra(group_as_groupoid(g)); }

// ---------------------------------------------------------------------------
// Center, block decomposition

/// Orthonormal basis of the center, via the nullspace of the stacked
/// commutator map.
inline Mat center(const StarAlgebra& a) {
  const int n = a.dim;
  Mat k = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Mat ci = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      for (auto& [r, c] : a.mult[i][j].terms) ci(r, j) += c;
      for (auto& [r, c] : a.mult[j][i].terms) ci(r, j) -= c;
    }
    k += ci.adjoint() * ci;
  }
  return linalg::psd_kernel(k, kTolAlg);
}

struct WedderburnResult {
  std::vector<int> block_sizes;     // ascending
  std::vector<Vec> projections;     // minimal central projections, matching order
};

/// Numerical Wedderburn decomposition: diagonalise a random
/// self-adjoint central element in the GNS inner product, cluster its
/// eigenvalues, and read off the minimal central projections.  Each
/// block dimension must be a perfect square within the eigenvalue
/// tolerance; otherwise the draw is retried (up to 3 times).
inline WedderburnResult wedderburn_decomposition(const StarAlgebra& a, std::mt19937_64& rng,
                                                 double tol_eig = kTolEig) {
  Mat z = center(a);
  const int zc = static_cast<int>(z.cols());
  // self-adjoint spanning set of the center
  Mat sa(a.dim, 2 * zc);
  for (int c = 0; c < zc; ++c) {
    Vec v = z.col(c);
    sa.col(2 * c) = v + a.star(v);
    sa.col(2 * c + 1) = cplx(0, 1) * (v - a.star(v));
  }
  Mat sabasis = linalg::orthonormalize(sa);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::string last_error = "no attempt";
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vec c0 = Vec::Zero(a.dim);
    for (int j = 0; j < sabasis.cols(); ++j) c0 += gauss(rng) * sabasis.col(j);
    c0 = (c0 + a.star(c0)) / 2.0;
    Mat lt = a.gns.w * a.left_operator(c0) * a.gns.winv;
    auto eig = linalg::hermitian_eig((lt + lt.adjoint()) / 2.0);
    double spread = std::max(1.0, eig.values(a.dim - 1) - eig.values(0));
    // cluster eigenvalues
    std::vector<std::pair<int, int>> clusters;  // [begin, end)
    int begin = 0;
    for (int i = 1; i <= a.dim; ++i) {
      if (i == a.dim || eig.values(i) - eig.values(i - 1) > tol_eig * spread * 100) {
        clusters.emplace_back(begin, i);
        begin = i;
      }
    }
    WedderburnResult result;
    bool ok = true;
    for (auto [b, e] : clusters) {
      Mat vcols = eig.vectors.middleCols(b, e - b);
      Mat proj_op = a.gns.winv * (vcols * vcols.adjoint()) * a.gns.w;
      Vec p = proj_op * a.unit;
      double m = a.trace_of_left(p);
      int mi = static_cast<int>(std::llround(m));
      int di = static_cast<int>(std::llround(std::sqrt(std::max(0.0, m))));
      if (std::abs(m - mi) > 1e-6 * std::max(1.0, m) || di * di != mi || mi <= 0) {
        last_error = "block dimension " + std::to_string(m) + " is not a perfect square";
        ok = false;
        break;
      }
      // sanity: p is a self-adjoint idempotent
      if ((a.mul(p, p) - p).cwiseAbs().maxCoeff() > 1e-6 || (a.star(p) - p).cwiseAbs().maxCoeff() > 1e-6) {
        last_error = "central projection candidate failed idempotency";
        ok = false;
        break;
      }
      result.block_sizes.push_back(di);
      result.projections.push_back(std::move(p));
    }
    if (!ok) continue;
    int total = 0;
    for (int dsz : result.block_sizes) total += dsz * dsz;
    if (total != a.dim) {
      last_error = "block dimensions sum to " + std::to_string(total) + " instead of " + std::to_string(a.dim);
      continue;
    }
    // sort blocks ascending, keeping projections aligned
    std::vector<int> order(result.block_sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int l, int r) { return result.block_sizes[l] < result.block_sizes[r]; });
    WedderburnResult sorted;
    for (int idx : order) {
      sorted.block_sizes.push_back(result.block_sizes[idx]);
      sorted.projections.push_back(std::move(result.projections[idx]));
    }
    return sorted;
  }
  fail("DecompositionUnstable", last_error);
}

/// Multiset of Wedderburn block sizes (ascending).
inline std::vector<int> wedderburn(const StarAlgebra& a, uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  return wedderburn_decomposition(a, rng).block_sizes;
}

// ---------------------------------------------------------------------------
// Ideals and quotients

struct Ideal {
  Mat basis;                 // orthonormal columns
  int extra_iterations = 0;  // closure passes that added new directions

  int dimension() const { return static_cast<int>(basis.cols()); }
};

/// Checks that span(basis) is a *-closed two-sided ideal of a.
inline void verify_ideal(const StarAlgebra& a, const Mat& basis, double tol = kTolAlg) {
  for (int c = 0; c < basis.cols(); ++c) {
    Vec v = basis.col(c);
    if (!linalg::in_span(basis, a.star(v), tol)) fail("NotIdeal", "not closed under star");
    for (int i = 0; i < a.dim; ++i) {
      if (!linalg::in_span(basis, a.mul_basis_left(i, v), tol)) fail("NotIdeal", "not closed under left multiplication");
      if (!linalg::in_span(basis, a.mul_basis_right(v, i), tol)) fail("NotIdeal", "not closed under right multiplication");
    }
  }
}

/// Smallest *-closed two-sided ideal containing the given vectors,
/// computed by iterated span closure.  `extra_iterations` counts the
/// passes (beyond the initial span) that actually enlarged the space.
inline Ideal ideal_generated(const StarAlgebra& a, const Mat& generators, double tol = kTolAlg) {
  if (generators.cols() == 0) return Ideal{Mat(a.dim, 0), 0};
  Mat basis = linalg::orthonormalize(generators, tol);
  int iterations = 0;
  for (;;) {
    std::vector<Vec> found;
    for (int c = 0; c < basis.cols(); ++c) {
      Vec v = basis.col(c);
      Vec sv = a.star(v);
      if (!linalg::in_span(basis, sv, tol)) found.push_back(sv);
      for (int i = 0; i < a.dim; ++i) {
        Vec l = a.mul_basis_left(i, v);
        if (!linalg::in_span(basis, l, tol)) found.push_back(std::move(l));
        Vec r = a.mul_basis_right(v, i);
        if (!linalg::in_span(basis, r, tol)) found.push_back(std::move(r));
      }
    }
    if (found.empty()) break;
    ++iterations;
    Mat ext(a.dim, basis.cols() + static_cast<int>(found.size()));
    ext.leftCols(basis.cols()) = basis;
    for (size_t i = 0; i < found.size(); ++i) ext.col(basis.cols() + static_cast<int>(i)) = found[i];
    Mat next = linalg::orthonormalize(ext, tol);
    basis = std::move(next);
  }
  return Ideal{std::move(basis), iterations};
}

/// Quotient algebra A/I realised on the orthogonal complement of I
/// (coordinate inner product), blockwise so the fibering survives.
/// Returns the quotient and the projection *-homomorphism.  Blocks
/// fully contained in I disappear from the quotient fibering.
inline std::pair<StarAlgebra, StarHom> quotient_algebra(const AlgPtr& a, const Ideal& ideal,
                                                        double tol = kTolAlg) {
  verify_ideal(*a, ideal.basis, tol);
  const int n = a->dim;
  // complement, computed per fiber block so the quotient basis stays aligned
  std::vector<Vec> comp_cols;
  std::vector<int> comp_block;
  for (int x = 0; x < a->n_objects(); ++x) {
    const auto& idx = a->blocks[x];
    if (idx.empty()) continue;
    Mat restricted(static_cast<int>(idx.size()), ideal.basis.cols());
    for (size_t r = 0; r < idx.size(); ++r) restricted.row(static_cast<int>(r)) = ideal.basis.row(idx[r]);
    Mat ib = linalg::orthonormalize(restricted, tol);
    Mat cb = linalg::orthogonal_complement(ib, static_cast<int>(idx.size()), tol);
    for (int c = 0; c < cb.cols(); ++c) {
      Vec big = Vec::Zero(n);
      for (size_t r = 0; r < idx.size(); ++r) big(idx[r]) = cb(static_cast<int>(r), c);
      comp_cols.push_back(std::move(big));
      comp_block.push_back(x);
    }
  }
  const int q = static_cast<int>(comp_cols.size());
  if (q == 0) fail("BadShape", "quotient by the whole algebra is zero-dimensional");
  Mat c(n, q);
  for (int j = 0; j < q; ++j) c.col(j) = comp_cols[j];
  Mat proj = c.adjoint();

  std::vector<std::vector<SparseVec>> mult(q, std::vector<SparseVec>(q));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      mult[i][j] = SparseVec::from_dense(proj * a->mul(c.col(i), c.col(j)));
  Mat star = Mat::Zero(q, q);
  for (int j = 0; j < q; ++j) star.col(j) = proj * a->star(c.col(j));
  Vec unit = proj * a->unit;

  // the full object set survives; blocks swallowed by the ideal become empty
  StarAlgebra quot = algebra_from_structure(std::move(mult), std::move(star), std::move(unit),
                                            a->object_names, std::move(comp_block), tol);
  AlgPtr qp = alg_ptr(std::move(quot));
  StarHom hom{a, qp, std::move(proj)};
  return {*qp, std::move(hom)};
}

// ---------------------------------------------------------------------------
// Homomorphism validation

inline StarHom make_star_hom(const AlgPtr& src, const AlgPtr& dst, Mat matrix, double tol = kTolAlg) {
  if (matrix.rows() != dst->dim || matrix.cols() != src->dim) fail("BadShape", "hom matrix has wrong shape");
  double scale = std::max(1.0, linalg::inf_norm(matrix));
  const double eps = tol * scale * scale;
  std::vector<SparseVec> cols(src->dim);
  for (int i = 0; i < src->dim; ++i) cols[i] = SparseVec::from_dense(matrix.col(i));
  for (int i = 0; i < src->dim; ++i) {
    Vec sfi = dst->star(matrix.col(i));
    Vec fsi = matrix * src->star_basis(i);
    if ((sfi - fsi).cwiseAbs().maxCoeff() > eps)
      fail("NotStarHom", "star not preserved on basis " + std::to_string(i));
    for (int j = 0; j < src->dim; ++j) {
      // f(e_i e_j) - f(e_i) f(e_j), all sparse
      SparseVec lhs;
      for (auto& [k, c] : src->mult[i][j].terms)
        for (auto& [t, ct] : cols[k].terms) lhs.add(t, c * ct, 0.0);
      SparseVec rhs = dst->mul_sparse(cols[i], cols[j]);
      for (auto& [t, ct] : rhs.terms) lhs.add(t, -ct, 0.0);
      for (auto& [t, ct] : lhs.terms)
        if (std::abs(ct) > eps)
          fail("NotStarHom", "multiplicativity fails on (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  return StarHom{src, dst, std::move(matrix)};
}

// ---------------------------------------------------------------------------
// Fibers and diagonal tensor products

struct FiberResult {
  StarAlgebra algebra;
  std::vector<int> indices;  // basis indices of the parent block
};

/// The fiber p_x A p_x as a unital StarAlgebra of its own.
inline FiberResult fiber(const StarAlgebra& a, int x) {
  if (x < 0 || x >= a.n_objects()) fail("UnknownObject", "fiber index out of range");
  const auto& idx = a.blocks[x];
  if (idx.empty()) fail("UnknownObject", "fiber at " + a.object_names[x] + " is zero");
  const int m = static_cast<int>(idx.size());
  std::vector<int> pos(a.dim, -1);
  for (int r = 0; r < m; ++r) pos[idx[r]] = r;
  std::vector<std::vector<SparseVec>> mult(m, std::vector<SparseVec>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (auto& [k, c] : a.mult[idx[i]][idx[j]].terms) mult[i][j].add(pos[k], c);
  Mat star = Mat::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    Vec s = a.star_basis(idx[j]);
    for (int r = 0; r < m; ++r) star(r, j) = s(idx[r]);
  }
  Vec unit(m);
  for (int r = 0; r < m; ++r) unit(r) = a.unit(idx[r]);
  StarAlgebra f = algebra_from_structure(std::move(mult), std::move(star), std::move(unit),
                                         {a.object_names[x]}, std::vector<int>(m, 0));
  return {std::move(f), idx};
}

/// The same algebra with its fibering coarsened to a single object.
/// No re-validation is needed: a coarser fibering is always valid.
inline StarAlgebra collapse_fibering(StarAlgebra a, const std::string& object_name = "*") {
  a.object_names = {object_name};
  a.block_of.assign(a.dim, 0);
  a.blocks = {std::vector<int>(a.dim)};
  std::iota(a.blocks[0].begin(), a.blocks[0].end(), 0);
  return a;
}

/// Block coordinates of the object-x component of a full vector.
inline Vec gather_block(const StarAlgebra& a, int x, const Vec& big) {
  const auto& idx = a.blocks[x];
  Vec v(idx.size());
  for (size_t r = 0; r < idx.size(); ++r) v(static_cast<int>(r)) = big(idx[r]);
  return v;
}

inline Vec scatter_block(const StarAlgebra& a, int x, const Vec& block_vec) {
  Vec big = Vec::Zero(a.dim);
  const auto& idx = a.blocks[x];
  for (size_t r = 0; r < idx.size(); ++r) big(idx[r]) = block_vec(static_cast<int>(r));
  return big;
}

struct DiagonalTensorResult {
  StarAlgebra algebra;
  std::vector<std::array<int, 2>> pairs;  // basis index -> (index in A, index in B)
};

/// Fiberwise tensor product of two algebras over the same object set.
/// Object sets are identified positionally.
inline DiagonalTensorResult diagonal_tensor_with_basis(const StarAlgebra& a, const StarAlgebra& b) {
  if (a.n_objects() != b.n_objects()) fail("FiberMismatch", "algebras are fibered over different sets");
  struct Pair {
    int i, j, block;
  };
  std::vector<Pair> basis;
  std::vector<std::vector<int>> lookup(a.dim, std::vector<int>(b.dim, -1));
  for (int x = 0; x < a.n_objects(); ++x)
    for (int i : a.blocks[x])
      for (int j : b.blocks[x]) {
        lookup[i][j] = static_cast<int>(basis.size());
        basis.push_back({i, j, x});
      }
  const int d = static_cast<int>(basis.size());
  if (d == 0) fail("BadShape", "diagonal tensor is zero");
  std::vector<std::vector<SparseVec>> mult(d, std::vector<SparseVec>(d));
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) {
      if (basis[p].block != basis[q].block) continue;
      for (auto& [ka, ca] : a.mult[basis[p].i][basis[q].i].terms)
        for (auto& [kb, cb] : b.mult[basis[p].j][basis[q].j].terms)
          mult[p][q].add(lookup[ka][kb], ca * cb);
    }
  Mat star = Mat::Zero(d, d);
  for (int p = 0; p < d; ++p) {
    Vec sa = a.star_basis(basis[p].i);
    Vec sb = b.star_basis(basis[p].j);
    for (int ka = 0; ka < a.dim; ++ka) {
      if (sa(ka) == cplx(0)) continue;
      for (int kb = 0; kb < b.dim; ++kb) {
        if (sb(kb) == cplx(0) || lookup[ka][kb] < 0) continue;
        star(lookup[ka][kb], p) = sa(ka) * sb(kb);
      }
    }
  }
  Vec unit = Vec::Zero(d);
  for (int p = 0; p < d; ++p) unit(p) = a.unit(basis[p].i) * b.unit(basis[p].j);
  std::vector<int> block(d);
  for (int p = 0; p < d; ++p) block[p] = basis[p].block;
  DiagonalTensorResult out;
  out.algebra = algebra_from_structure(std::move(mult), std::move(star), std::move(unit), a.object_names, std::move(block));
  for (auto& p : basis) out.pairs.push_back({p.i, p.j});
  return out;
}

inline StarAlgebra diagonal_tensor(const StarAlgebra& a, const StarAlgebra& b) {
  return diagonal_tensor_with_basis(a, b).algebra;
}

// ---------------------------------------------------------------------------
// Norms

/// Operator norm: largest singular value of left multiplication in the
/// GNS inner product of the canonical trace.
inline double operator_norm(const StarAlgebra& a, const Vec& v) {
  return linalg::spectral_norm(a.gns.w * a.left_operator(v) * a.gns.winv);
}

/// The I-norm of a convolution-algebra element: the maximum of the two
/// sup-over-objects integrals (counting measure) of fiberwise norms,
/// for the element and its adjoint.
inline double i_norm(const StarAlgebra& a, const Vec& v) {
  if (!a.conv) fail("NotConvolutionAlgebra", "I-norm needs a convolution structure");
  const auto& cv = *a.conv;
  auto one_sided = [&](const Vec& f) {
    std::vector<double> per_object(cv.n_objects, 0.0);
    for (size_t arrow = 0; arrow < cv.arrow_basis.size(); ++arrow) {
      const auto& idx = cv.arrow_basis[arrow];
      const StarAlgebra& fib = *cv.fiber_at_object[cv.arrow_tgt[arrow]];
      Vec coeff(idx.size());
      for (size_t r = 0; r < idx.size(); ++r) coeff(static_cast<int>(r)) = f(idx[r]);
      if (coeff.cwiseAbs().maxCoeff() == 0.0) continue;
      per_object[cv.arrow_tgt[arrow]] += operator_norm(fib, coeff);
    }
    return *std::max_element(per_object.begin(), per_object.end());
  };
  return std::max(one_sided(v), one_sided(a.star(v)));
}

struct Norms {
  double operator_norm = 0;
  std::optional<double> i_norm;
};

inline Norms norms(const StarAlgebra& a, const Vec& v) {
  Norms n;
  n.operator_norm = operator_norm(a, v);
  if (a.conv) n.i_norm = i_norm(a, v);
  return n;
}

}  // namespace xmod
