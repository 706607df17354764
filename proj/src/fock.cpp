#include "qdual/fock.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "qdual/errors.hpp"

namespace qdual::fock {

namespace {

void enumerate_basis(int n, int k, std::vector<int>& cur, int used,
                     std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int m = 0; m + used <= k; ++m) {
    cur.push_back(m);
    enumerate_basis(n, k, cur, used + m, out);
    cur.pop_back();
  }
}

double block_norm(const CMat& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace

FockContext::FockContext(int n_modes, int cutoff) : n_(n_modes), k_(cutoff) {
  if (n_modes < 1 || n_modes > 4)
    throw std::invalid_argument("fock: n_modes must be 1..4");
  if (cutoff < 1 || cutoff > 24) throw std::invalid_argument("fock: cutoff must be 1..24");
  std::vector<int> cur;
  enumerate_basis(n_, k_, cur, 0, basis_);

  std::map<std::vector<int>, int> index;
  for (int i = 0; i < dim(); ++i) index[basis_[i]] = i;

  a_.assign(n_, CMat::Zero(dim(), dim()));
  for (int i = 0; i < dim(); ++i) {
    for (int mode = 0; mode < n_; ++mode) {
      if (basis_[i][mode] == 0) continue;
      std::vector<int> lower = basis_[i];
      lower[mode] -= 1;
      a_[mode](index[lower], i) = std::sqrt(static_cast<double>(basis_[i][mode]));
    }
  }
}

int FockContext::total_occupation(int index) const {
  int s = 0;
  for (int m : basis_[index]) s += m;
  return s;
}

CMat FockContext::field_operator(const CVec& f) const {
  if (f.size() != n_) throw std::invalid_argument("fock: one-particle vector size mismatch");
  CMat phi = CMat::Zero(dim(), dim());
  for (int mode = 0; mode < n_; ++mode) {
    phi += std::conj(f(mode)) * a_[mode];
    phi += f(mode) * a_[mode].adjoint();
  }
  return phi;
}

CMat FockContext::weyl(const CVec& f) const {
  CMat phi = field_operator(f);
  Eigen::SelfAdjointEigenSolver<CMat> es(phi);
  CVec expvals(dim());
  for (int i = 0; i < dim(); ++i)
    expvals(i) = std::exp(std::complex<double>(0.0, es.eigenvalues()(i)));
  return es.eigenvectors() * expvals.asDiagonal() * es.eigenvectors().adjoint();
}

CMat FockContext::low_block(int max_occ) const {
  CMat p = CMat::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    if (total_occupation(i) <= max_occ) p(i, i) = 1.0;
  return p;
}

std::complex<double> FockContext::vacuum_expectation(const CMat& op) const {
  return op(0, 0);  // the basis enumeration starts at the vacuum (0,...,0)
}

double weyl_relation_residual(const FockContext& ctx, const CVec& f, const CVec& g) {
  CMat wf = ctx.weyl(f), wg = ctx.weyl(g), wfg = ctx.weyl(f + g);
  std::complex<double> phase = std::exp(std::complex<double>(0.0, -sympl(f, g)));
  CMat r = wf * wg - phase * wfg;
  CMat p = ctx.low_block(ctx.cutoff() / 2);
  return block_norm(p * r * p);
}

CommutationReport commutation_vs_symplectic(const FockContext& ctx, const CVec& f, const CVec& g) {
  CMat wf = ctx.weyl(f), wg = ctx.weyl(g);
  CMat p = ctx.low_block(ctx.cutoff() / 2);
  CommutationReport rep;
  rep.sigma = sympl(f, g);
  rep.measured = block_norm(p * (wf * wg - wg * wf) * p);
  std::complex<double> factor = std::exp(std::complex<double>(0.0, -2.0 * rep.sigma)) - 1.0;
  rep.predicted = std::abs(factor) * block_norm(p * (wg * wf) * p);
  return rep;
}

RealSubspace relative_symplectic_complement(const RealSubspace& v, const RealSubspace& h,
                                            double tol) {
  if (h.vectors.empty()) return {};
  const int r = static_cast<int>(h.vectors.size());
  const int c = static_cast<int>(v.vectors.size());
  Eigen::MatrixXd s(c, r);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) s(j, i) = sympl(v.vectors[j], h.vectors[i]);
  RealSubspace out;
  if (c == 0) return h;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullV);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  for (int i = 0; i < r; ++i) {
    double sv = i < svd.singularValues().size() ? svd.singularValues()(i) : 0.0;
    if (smax == 0.0 || sv <= tol * smax) {
      CVec dir = CVec::Zero(h.vectors[0].size());
      for (int k = 0; k < r; ++k) dir += svd.matrixV()(k, i) * h.vectors[k];
      out.vectors.push_back(dir);
    }
  }
  return out;
}

namespace {

// Orthonormal span (complex) of vectorized matrices; returns the basis as
// columns and the rank under the relative tolerance.
CMat matrix_span(const std::vector<CMat>& mats, double tol, int* rank) {
  const int d2 = static_cast<int>(mats[0].size());
  CMat stack(d2, mats.size());
  for (std::size_t j = 0; j < mats.size(); ++j)
    stack.col(j) = Eigen::Map<const CVec>(mats[j].data(), d2);
  Eigen::JacobiSVD<CMat> svd(stack, Eigen::ComputeThinU);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (smax > 0.0 && svd.singularValues()(i) > tol * smax) ++r;
  *rank = r;
  return svd.matrixU().leftCols(r);
}

std::vector<CMat> weyl_monomials(const FockContext& ctx, const std::vector<CVec>& gens) {
  std::vector<CMat> mats;
  mats.push_back(CMat::Identity(ctx.dim(), ctx.dim()));
  for (const auto& h : gens) {
    mats.push_back(ctx.weyl(h));
    mats.push_back(ctx.weyl(-h));
  }
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i; j < gens.size(); ++j)
      mats.push_back(ctx.weyl(gens[i]) * ctx.weyl(gens[j]));
  return mats;
}

}  // namespace

CommutantReport relative_commutant_dims(const FockContext& ctx, const RealSubspace& v,
                                        const RealSubspace& h, int samples) {
  if (ctx.n_modes() > 2 || ctx.cutoff() > 10)
    throw BudgetError("relative_commutant_dims: capped at n <= 2 modes and K <= 10");
  if (h.vectors.empty()) throw std::invalid_argument("commutant: empty ambient subspace");

  const double tol = 1e-6;
  CommutantReport rep;
  const int low_occ = ctx.cutoff() / 2;
  rep.low_block_occupation = low_occ;
  CMat p = ctx.low_block(low_occ);

  // Span of low-degree Weyl monomials over H.
  auto mats = weyl_monomials(ctx, h.vectors);
  int mrank = 0;
  CMat basis = matrix_span(mats, 1e-10, &mrank);
  rep.monomial_rank = mrank;

  // Commutation constraints against sampled Weyl generators of V.
  std::vector<CMat> constraints;
  for (const auto& vv : v.vectors) {
    for (int s = 1; s <= samples; ++s) {
      double t = static_cast<double>(s) / samples;
      constraints.push_back(ctx.weyl(t * vv));
    }
  }

  const int d = ctx.dim();
  if (constraints.empty()) {
    rep.dim_commutant = mrank;
  } else {
    CMat a(static_cast<int>(constraints.size()) * d * d, mrank);
    for (int alpha = 0; alpha < mrank; ++alpha) {
      CMat m = Eigen::Map<const CMat>(basis.col(alpha).data(), d, d);
      for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
        CMat c = p * (m * constraints[ci] - constraints[ci] * m) * p;
        a.block(static_cast<int>(ci) * d * d, alpha, d * d, 1) =
            Eigen::Map<const CVec>(c.data(), d * d);
      }
    }
    Eigen::JacobiSVD<CMat> svd(a);
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    double smin = smax;
    int null_dim = 0;
    for (int i = 0; i < std::min<int>(mrank, svd.singularValues().size()); ++i) {
      double sv = svd.singularValues()(i);
      if (smax == 0.0 || sv <= tol * smax)
        ++null_dim;
      else
        smin = std::min(smin, sv);
    }
    null_dim += std::max(0, mrank - static_cast<int>(svd.singularValues().size()));
    rep.dim_commutant = null_dim;
    rep.constraint_condition = smin > 0.0 ? smax / smin : 0.0;
  }

  // Prediction: Weyl monomials over the sigma-complement of V inside H.
  RealSubspace vc = relative_symplectic_complement(v, h);
  std::vector<CMat> pred_mats;
  if (vc.vectors.empty()) {
    pred_mats.push_back(CMat::Identity(d, d));
  } else {
    pred_mats = weyl_monomials(ctx, vc.vectors);
  }
  // Compare within the same low block to match the constrained side.
  for (auto& m : pred_mats) m = p * m * p;
  std::vector<CMat> comm_like = pred_mats;
  int prank = 0;
  matrix_span(comm_like, tol, &prank);
  rep.dim_predicted = prank;
  rep.difference = rep.dim_commutant - rep.dim_predicted;
  return rep;
}

}  // namespace qdual::fock
