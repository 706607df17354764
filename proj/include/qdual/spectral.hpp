#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "qdual/lattice.hpp"

namespace qdual::spectral {

/// omega(p)^s as a Fourier multiplier. For m = 0 and s < 0 the zero mode of
/// f must vanish (relative tolerance 1e-10); it is projected out of the
/// result in every massless case. `strict = false` skips the zero-mode
/// check and projects silently (quotient-sector semantics used by the
/// one-particle spaces, where data is zero-mean by construction).
LatticeField apply_omega_power(const LatticeField& f, double s, bool strict = true);

/// Free-field norm sqrt( (1/L^d) sum_k |fhat|^2 |p_k|^{sign} ). The p = 0
/// term is excluded; sign = -1 requires a zero-mean field.
double norm_pm(const LatticeField& f, int sign);

/// Lattice sampling of rho_n(x) = n^d rho(n x) for the standard smooth bump
/// rho(u) ~ exp(-1/(1-|u|^2)), renormalized so that sum * a^d = 1 exactly.
/// Requires 1/n >= 2a.
LatticeField mollifier(const LatticeGrid& grid, int n);

/// Periodic quadrature convolution (f*k)(x) = a^d sum_y f(y) k(x-y).
LatticeField convolve(const LatticeField& f, const LatticeField& k);

struct PowerIterationResult {
  double estimate = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct MultOperatorOptions {
  int max_iterations = 200;
  double rel_tol = 1e-10;
  std::uint64_t seed = 0x9d2c5680u;
};

/// Power-iteration estimate of the L2 -> L2 operator norm of
/// omega^{sign/2} M_chi omega^{-sign/2} (zero-mean sector when m = 0).
PowerIterationResult mult_operator_norm_estimate(const LatticeField& chi, int sign,
                                                 const MultOperatorOptions& opts = {});

/// Hilbert-Schmidt norm of (omega^{sign/2} T_chi omega^{-sign/2} - T_chi)
/// restricted to the infrared block P_{[0,1]} (columns with omega <= 1).
/// Refuses when rows * cols exceeds the entry budget.
double infrared_hs_norm(const LatticeField& chi, int sign,
                        std::int64_t max_entries = (std::int64_t{1} << 25));

struct SchurReport {
  double row_sum_sup = 0.0;   // sup_p sum_q |K(p,q)|
  double col_sum_sup = 0.0;   // sup_q sum_p |K(p,q)|
  double geometric_mean = 0.0;
  double block_norm_estimate = 0.0;
  bool bound_holds = false;
};

/// Schur bound data for the ultraviolet block
/// P_{(1,inf)} (omega^{sign/2} T_chi omega^{-sign/2} - T_chi) P_{(1,inf)}.
SchurReport schur_bound_check(const LatticeField& chi, int sign,
                              const MultOperatorOptions& opts = {});

/// Pair of Cauchy components (f0, f1) for operators acting on data.
struct FieldPair {
  LatticeField f0;
  LatticeField f1;
};

/// Spacetime dilation induced on Cauchy data: f0 -> lambda^{(d-1)/2} f0(lambda x),
/// f1 -> lambda^{(d+1)/2} f1(lambda x) (the time-derivative component picks up
/// the chain-rule factor). Band-limited (Fourier) resampling; throws when the
/// scaled support would wrap around the torus. `massless` asserts m = 0,
/// the regime where the operator is unitary.
FieldPair dilation(const FieldPair& f, double lambda, bool massless);

/// Family member phi(x) = x + amp * g(|x|/r0) * x with the standard bump g;
/// identity outside |x| < r0. Sup norms are sampled on a fine radial mesh.
struct DiffeoSpec {
  int dim = 2;
  double r0 = 1.0;
  double amplitude = 0.0;
  double a_sup = 0.0;  // sup |phi(x) - x|
  double b_sup = 0.0;  // sup |Dphi(x) - 1| (matrix 2-norm)

  std::array<double, kMaxDim> map(const std::array<double, kMaxDim>& x) const;
};

DiffeoSpec radial_shear(int dim, double r0, double amplitude);
/// Chooses the amplitude so that b_sup == b_target.
DiffeoSpec radial_shear_with_b(int dim, double r0, double b_target);

/// f o phi on both components via band-limited evaluation at phi(x).
FieldPair diffeo_pullback(const FieldPair& f, const DiffeoSpec& phi);

/// Operator-norm estimate of f -> f o phi on the |p|^{sign}-weighted norm
/// (zero-mean sector), via power iteration on the adjoint-composed map.
PowerIterationResult diffeo_operator_norm(const LatticeGrid& grid, const DiffeoSpec& phi,
                                          int sign, const MultOperatorOptions& opts = {});

/// Dimensional constant A_s with intgral_{R^d} |e^{i p.z} - 1|^2 / |z|^{d+2s} dz
/// = A_s |p|^{2s}, computed by radial quadrature at the reference |p| = 1.
double fractional_constant(int dim, double s);

struct FractionalIdentity {
  double lhs = 0.0;  // a^{2d} sum_{x != y} |f(x)-f(y)|^2 / dist(x,y)^{d+2s}
  double rhs = 0.0;  // A_s (1/L^d) sum_k |fhat|^2 |p_k|^{2s}
  double a_s = 0.0;
};

/// Both sides of the fractional Sobolev identity for s in (0,1). The double
/// sum is evaluated through the autocorrelation identity
/// sum_y |f(y+z)-f(y)|^2 = 2(|f|^2 - C(z)), which is exact on the torus.
FractionalIdentity fractional_identity(const LatticeField& f, double s);

/// Symbol table helpers shared with other modules.
std::vector<double> omega_symbol(const LatticeGrid& grid, double power);

}  // namespace qdual::spectral
