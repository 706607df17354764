#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace qdual::span {

/// Bilinear structure over generators: the (positive) energy inner product
/// and the symplectic form.
template <class G>
struct Ops {
  std::function<double(const G&, const G&)> inner;
  std::function<double(const G&, const G&)> sympl;
};

template <class G>
Eigen::MatrixXd gram_inner(const Ops<G>& ops, const std::vector<G>& a, const std::vector<G>& b) {
  Eigen::MatrixXd m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = ops.inner(a[i], b[j]);
  return m;
}

template <class G>
Eigen::MatrixXd gram_sympl(const Ops<G>& ops, const std::vector<G>& a, const std::vector<G>& b) {
  Eigen::MatrixXd m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = ops.sympl(a[i], b[j]);
  return m;
}

/// Working frame: an energy-orthonormal basis of the span of its generators,
/// together with the symplectic form expressed in frame coordinates. All
/// subspace computations happen in these coordinates, where the inner
/// product is Euclidean; gaps are then explicit residual norms and stay at
/// machine precision instead of the sqrt(1 - sigma^2) floor.
template <class G>
struct Frame {
  std::vector<G> gens;
  Eigen::MatrixXd basis;   // gens x rank, energy-orthonormal columns
  Eigen::MatrixXd sympl;   // rank x rank, antisymmetric
  Eigen::MatrixXd gram;    // generator Gram (kept for coordinate maps)

  int rank() const { return static_cast<int>(basis.cols()); }
};

/// Rank-revealing whitening of the generator Gram with iterated Cholesky
/// refinement; drops generators below `drop_tol` relative eigenvalue.
template <class G>
Eigen::MatrixXd whiten(const Eigen::MatrixXd& gram, double drop_tol, int* dropped) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const auto& vals = es.eigenvalues();
  double vmax = vals.size() ? vals.maxCoeff() : 0.0;
  if (vmax <= 0.0) {
    if (dropped) *dropped = static_cast<int>(gram.rows());
    return Eigen::MatrixXd(gram.rows(), 0);
  }
  std::vector<int> keep;
  for (int i = 0; i < vals.size(); ++i)
    if (vals[i] > drop_tol * vmax) keep.push_back(i);
  Eigen::MatrixXd basis(gram.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j)
    basis.col(j) = es.eigenvectors().col(keep[j]) / std::sqrt(vals[keep[j]]);
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::MatrixXd m = basis.transpose() * gram * basis;
    double err = (m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).norm();
    if (err < 1e-15 * std::max(1.0, std::sqrt(static_cast<double>(m.rows())))) break;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) break;
    basis = basis * llt.matrixL().toDenseMatrix().transpose().inverse();
  }
  if (dropped) *dropped = static_cast<int>(gram.rows() - keep.size());
  return basis;
}

/// When `reduce_null` is set, the frame is restricted to the symplectically
/// nondegenerate sector: directions in the kernel of the symplectic matrix
/// are projected away. The symplectic form between the remaining vectors is
/// unchanged (the removed directions pair to zero with everything), so
/// complement computations are exact in the reduced frame. On the lattice
/// such null directions are the region-constant class (scalar, massless)
/// and the boundary gauge-flux classes (EM) whose continuum norms diverge.
template <class G>
Frame<G> make_frame(std::vector<G> gens, const Ops<G>& ops, double drop_tol = 1e-10,
                    int* dropped = nullptr, bool reduce_null = false, int* null_dim = nullptr) {
  Frame<G> f;
  f.gens = std::move(gens);
  f.gram = gram_inner(ops, f.gens, f.gens);
  f.basis = whiten<G>(f.gram, drop_tol, dropped);
  Eigen::MatrixXd s = gram_sympl(ops, f.gens, f.gens);
  f.sympl = f.basis.transpose() * s * f.basis;
  if (null_dim) *null_dim = 0;
  if (reduce_null && f.rank() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.sympl, Eigen::ComputeFullU);
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    int keep = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (smax > 0.0 && svd.singularValues()(i) > 1e-10 * smax) ++keep;
    if (keep < f.rank()) {
      if (null_dim) *null_dim = f.rank() - keep;
      Eigen::MatrixXd u = svd.matrixU().leftCols(keep);
      f.basis = f.basis * u;
      f.sympl = u.transpose() * f.sympl * u;
    }
  }
  return f;
}

/// Orthonormal columns spanning the same space as the input columns
/// (Euclidean QR with column pivoting; relative rank threshold).
inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m, double rank_tol = 1e-10) {
  if (m.cols() == 0) return m;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(rank_tol);
  int r = static_cast<int>(qr.rank());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
  return q;
}

/// Coordinates of subspace generators in the frame, orthonormalized.
/// All generators must lie in the frame span (they do in every pipeline
/// here, where subspace generators are subsets of the frame generators).
template <class G>
Eigen::MatrixXd subspace_in_frame(const Frame<G>& frame, const Ops<G>& ops,
                                  const std::vector<G>& gens, double rank_tol = 1e-10) {
  if (gens.empty()) return Eigen::MatrixXd(frame.rank(), 0);
  Eigen::MatrixXd cross = gram_inner(ops, frame.gens, gens);  // frame gens x subspace gens
  Eigen::MatrixXd coords = frame.basis.transpose() * cross;   // rank x subspace gens
  return orthonormal_columns(coords, rank_tol);
}

/// ||P_A (1 - P_B)|| via the explicit residual matrix A - B (B^T A).
inline double frame_gap_one_sided(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0) return 0.0;
  if (a.cols() > b.cols()) return 1.0;
  Eigen::MatrixXd r = a - b * (b.transpose() * a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double frame_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::max(frame_gap_one_sided(a, b), frame_gap_one_sided(b, a));
}

/// tr((1 - P_B) P_A): non-increasing as A shrinks.
inline double frame_excess_energy(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd r = a - b * (b.transpose() * a);
  return r.squaredNorm();
}

/// Largest distance of an A-column from span(B).
inline double frame_max_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0) return 0.0;
  Eigen::MatrixXd r = a - b * (b.transpose() * a);
  double worst = 0.0;
  for (int j = 0; j < r.cols(); ++j) worst = std::max(worst, r.col(j).norm());
  return worst;
}

/// {x in frame : sigma(x, v) = 0 for all v in span(V)}: the kernel of
/// (S V)^T, orthonormalized.
template <class G>
Eigen::MatrixXd frame_sympl_complement(const Frame<G>& frame, const Eigen::MatrixXd& v,
                                       double svd_tol = 1e-10) {
  const int n = frame.rank();
  if (v.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd y = frame.sympl * v;  // n x r
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeFullU);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  std::vector<int> null_cols;
  for (int i = 0; i < n; ++i) {
    double sv = i < svd.singularValues().size() ? svd.singularValues()(i) : 0.0;
    if (smax == 0.0 || sv <= svd_tol * smax) null_cols.push_back(i);
  }
  Eigen::MatrixXd out(n, null_cols.size());
  for (std::size_t j = 0; j < null_cols.size(); ++j) out.col(j) = svd.matrixU().col(null_cols[j]);
  return out;
}

}  // namespace qdual::span
