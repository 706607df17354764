#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace qdual::fock {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// One-particle pairing <f, g> = sum_i conj(f_i) g_i; the real inner product
/// is its real part and the symplectic form its imaginary part.
inline std::complex<double> pairing(const CVec& f, const CVec& g) { return f.dot(g); }
inline double real_inner(const CVec& f, const CVec& g) { return pairing(f, g).real(); }
inline double sympl(const CVec& f, const CVec& g) { return pairing(f, g).imag(); }

/// Truncated bosonic Fock space over n modes with total occupation <= K.
/// Dimension C(n + K, n); ladder commutators are exact below the cutoff
/// boundary. Field operators follow Phi(f) = a(f) + a†(f) with a antilinear,
/// so the vacuum two-point function is <Omega, Phi(f) Phi(g) Omega> = <f, g>.
class FockContext {
 public:
  FockContext(int n_modes, int cutoff);

  int n_modes() const { return n_; }
  int cutoff() const { return k_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<std::vector<int>>& basis() const { return basis_; }
  int total_occupation(int index) const;

  const CMat& annihilator(int mode) const { return a_[mode]; }
  CMat field_operator(const CVec& f) const;
  /// exp(i Phi(f)) through the eigendecomposition of the truncated Phi.
  CMat weyl(const CVec& f) const;
  /// Diagonal projector onto total occupation <= max_occ.
  CMat low_block(int max_occ) const;
  std::complex<double> vacuum_expectation(const CMat& op) const;

 private:
  int n_;
  int k_;
  std::vector<std::vector<int>> basis_;
  std::vector<CMat> a_;
};

/// || W(f) W(g) - e^{-i sigma(f,g)} W(f+g) || on the occupation <= K/2 block.
double weyl_relation_residual(const FockContext& ctx, const CVec& f, const CVec& g);

struct CommutationReport {
  double measured = 0.0;   // || [W(f), W(g)] || on the low block
  double predicted = 0.0;  // |e^{-2i sigma} - 1| * || W(g) W(f) || on the block
  double sigma = 0.0;
};

CommutationReport commutation_vs_symplectic(const FockContext& ctx, const CVec& f, const CVec& g);

struct RealSubspace {
  std::vector<CVec> vectors;  // real-linear span
};

/// sigma-complement of V inside H (real linear algebra on the spans).
RealSubspace relative_symplectic_complement(const RealSubspace& v, const RealSubspace& h,
                                            double tol = 1e-10);

struct CommutantReport {
  int dim_commutant = 0;   // solutions of the low-block commutation constraints
  int dim_predicted = 0;   // span of Weyl monomials over the sigma-complement
  int difference = 0;
  double constraint_condition = 0.0;
  int monomial_rank = 0;
  int low_block_occupation = 0;
};

/// Finite-truncation commutant comparison (heuristic; capped at two modes
/// and K <= 10, larger requests are refused).
CommutantReport relative_commutant_dims(const FockContext& ctx, const RealSubspace& v,
                                        const RealSubspace& h, int samples = 2);

}  // namespace qdual::fock
