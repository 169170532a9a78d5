#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "xmod/error.hpp"

namespace xmod {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;

/// Structural identities (associativity, homomorphism checks, ...).
inline constexpr double kTolAlg = 1e-9;
/// Eigenvalue clustering in the block decomposition.
inline constexpr double kTolEig = 1e-8;

inline constexpr int kGroupOrderCap = 24;
inline constexpr int kMaxAlgebraDim = 1024;
inline constexpr long kAutCandidateCap = 10000;

/// Runtime-adjustable algebra dimension cap (the CLI's --max-dim).
inline int& max_algebra_dim() {
  static int cap = kMaxAlgebraDim;
  return cap;
}

namespace linalg {

inline double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
inline double inf_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Modified Gram-Schmidt with re-orthogonalisation.  Returns an
/// orthonormal basis of the column span; columns whose residual falls
/// below `tol` (relative to the input scale) are dropped.
inline Mat orthonormalize(const Mat& cols, double tol = kTolAlg) {
  if (cols.cols() == 0) return Mat(cols.rows(), 0);
  double scale = std::max(1.0, inf_norm(cols));
  Mat q(cols.rows(), cols.cols());
  int r = 0;
  for (int j = 0; j < cols.cols(); ++j) {
    Vec v = cols.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < r; ++k) v -= q.col(k).dot(v) * q.col(k);
    double n = v.norm();
    if (n > tol * scale * std::sqrt(static_cast<double>(cols.rows()))) {
      q.col(r++) = v / n;
    }
  }
  return q.leftCols(r);
}

/// Residual of v against the span of the orthonormal columns of basis.
inline double span_residual(const Mat& basis, const Vec& v) {
  Vec r = v;
  for (int k = 0; k < basis.cols(); ++k) r -= basis.col(k).dot(r) * basis.col(k);
  return r.norm();
}

inline bool in_span(const Mat& basis, const Vec& v, double tol = kTolAlg) {
  return span_residual(basis, v) <= tol * std::max(1.0, v.norm());
}

inline int rank_of(const Mat& m, double tol = kTolAlg) { return static_cast<int>(orthonormalize(m, tol).cols()); }

/// Orthonormal basis of the orthogonal complement of span(basis) inside C^n.
/// `basis` must already have orthonormal columns.
inline Mat orthogonal_complement(const Mat& basis, int n, double tol = kTolAlg) {
  Mat ext(n, basis.cols() + n);
  ext.leftCols(basis.cols()) = basis;
  ext.rightCols(n) = Mat::Identity(n, n);
  Mat q = orthonormalize(ext, tol);
  return q.rightCols(q.cols() - basis.cols());
}

struct HermEig {
  RealVec values;  // ascending
  Mat vectors;
};

inline HermEig hermitian_eig(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) fail("EigensolverFailed", "self-adjoint eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Kernel of a positive semidefinite matrix: eigenvectors whose
/// eigenvalue is below tol relative to the largest one.
inline Mat psd_kernel(const Mat& k, double tol = kTolAlg) {
  HermEig e = hermitian_eig(k);
  double top = std::max(1.0, e.values.size() ? e.values.maxCoeff() : 0.0);
  int cnt = 0;
  while (cnt < e.values.size() && e.values(cnt) <= tol * top) ++cnt;
  return e.vectors.leftCols(cnt);
}

inline double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline Mat random_gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline Mat random_unitary(std::mt19937_64& rng, int n) {
  Mat a = random_gaussian(rng, n, n);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  // fix phases so the diagonal of R is positive; keeps the draw Haar-like
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

}  // namespace linalg
}  // namespace xmod
