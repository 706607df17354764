#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qdual/lattice.hpp"
#include "qdual/masks.hpp"
#include "qdual/propagator.hpp"
#include "qdual/span_engine.hpp"

namespace qdual::scalar {

/// Scalar one-particle Cauchy datum (f0, f1). In the massless sector the
/// factory removes the zero modes: f0 is stored through its zero-mean class
/// representative and f1 must carry no net charge on the lattice.
struct CauchyDatum {
  LatticeGrid grid;  // carries the mass
  LatticeField f0;
  LatticeField f1;

  static CauchyDatum make(const LatticeGrid& grid, LatticeField f0, LatticeField f1);
};

/// sigma(f, g) = <f0, g1> - <f1, g0> (quadrature weight a^d).
double symplectic_form(const CauchyDatum& f, const CauchyDatum& g);

/// (f, g)_R = <f0, omega g0> + <f1, omega^{-1} g1>; the coefficients are the
/// unique normalization for which J^2 = -1, sigma(f, Jg) = (f, g)_R and the
/// form is positive.
double energy_inner(const CauchyDatum& f, const CauchyDatum& g);
double energy_norm(const CauchyDatum& f);

/// J (f0, f1) = (-omega^{-1} f1, omega f0).
CauchyDatum complex_structure(const CauchyDatum& f);
/// (f0, f1) -> (f0, -f1).
CauchyDatum time_reversal(const CauchyDatum& f);
/// psi(f) = (-f1, f0); <psi(f), g> = sigma(f, g).
CauchyDatum psi(const CauchyDatum& f);
CauchyDatum psi_inverse(const CauchyDatum& f);

CauchyDatum datum_sub(const CauchyDatum& a, const CauchyDatum& b);

/// Generator of a subspace: a sparse pair of site lists, or a dense datum.
struct Gen {
  std::vector<std::pair<std::int64_t, double>> s0, s1;
  std::shared_ptr<const CauchyDatum> dense;
  // cached omega- and omega^{-1}-weighted components for dense generators
  std::shared_ptr<const LatticeField> w0, w1;
};

/// Kernel tables and bilinear callbacks for one (grid, mass) ambient.
class Ambient {
 public:
  explicit Ambient(const LatticeGrid& grid);

  const LatticeGrid& grid() const { return grid_; }
  bool massless() const { return grid_.mass() == 0.0; }

  double inner(const Gen& a, const Gen& b) const;
  double sympl(const Gen& a, const Gen& b) const;
  span::Ops<Gen> ops() const;

  Gen delta0(std::int64_t site) const;
  Gen delta1(std::int64_t site) const;
  Gen diff1(std::int64_t site, std::int64_t anchor) const;
  Gen from_datum(const CauchyDatum& d) const;

  /// Generators of the local space over a mask: delta data per site; in the
  /// massless sector the f0 part uses delta class representatives and the
  /// f1 part zero-charge chain differences. Full-mask dimensions are
  /// 2 N^d (massive) and 2 N^d - 2 (massless).
  std::vector<Gen> local_generators(const Mask& mask) const;

 private:
  LatticeGrid grid_;
  std::vector<double> kplus_;   // position kernel of omega
  std::vector<double> kminus_;  // position kernel of omega^{-1} (zero mode dropped when m=0)
};

/// Subspace expressed in the coordinates of a workspace frame.
struct Subspace {
  Eigen::MatrixXd coords;  // frame.rank x r, orthonormal columns
  int rank() const { return static_cast<int>(coords.cols()); }
};

/// Energy-orthonormal frame over the local space of an ambient mask; all
/// subspace operations run in its coordinates.
class Workspace {
 public:
  Workspace(const Ambient& amb, const Mask& ambient_mask);

  const Ambient& ambient() const { return *amb_; }
  int rank() const { return frame_.rank(); }

  /// Dimension of the removed symplectically null sector (see make_frame).
  int null_dim() const { return null_dim_; }

  Subspace local_subspace(const Mask& mask) const;
  Subspace span_of_data(const std::vector<CauchyDatum>& data) const;
  /// {f in workspace : sigma(f, g) = 0 for all g in V}.
  Subspace symplectic_complement(const Subspace& v) const;
  double gap(const Subspace& a, const Subspace& b) const;
  double excess_energy(const Subspace& a, const Subspace& b) const;
  double max_residual(const Subspace& a, const Subspace& b) const;

 private:
  const Ambient* amb_;
  span::Frame<Gen> frame_;
  int null_dim_ = 0;
};

struct DualityReport {
  double gap_forward = 0.0;
  double gap_dual = 0.0;
  int dim_ambient = 0;
  int dim_region = 0;
  int dim_complement_mask = 0;
  int dim_complement_space = 0;
  std::string note;
};

/// Relative duality on masks: the complement mask is the exact partition
/// M \ B (the lattice rendering of the open-set convention; the shared
/// boundary ring has measure zero in the continuum and belongs to exactly
/// one side here). Finite-dimensional duality is exact; gaps reflect
/// orthonormalization roundoff only, and the report says so.
DualityReport duality_check(const Ambient& amb, const Mask& region, const Mask& ambient_mask);

struct OuterRegularityRow {
  int index = 0;
  int dim = 0;
  int dim_excess_vs_base = 0;
  double sup_gap_vs_base = 0.0;        // saturates at 1 for strict inflation
  double excess_energy_vs_base = 0.0;  // tr((1-P_B) P_k): monotone series
  double gap_vs_closure = 0.0;         // against H(B + one ring)
};

/// Shrinking-neighborhood scan. Every neighborhood must contain the lattice
/// closure (B plus one ring); the `gap_vs_closure` series reaches zero when
/// the family shrinks to the one-ring inflation, while the base-relative
/// series stops at the documented positive lattice floor.
std::vector<OuterRegularityRow> outer_regularity_scan(const Ambient& amb, const Mask& region,
                                                      const std::vector<Mask>& neighborhoods,
                                                      const Mask& ambient_mask);

struct MollifierRow {
  int n = 0;
  double error = 0.0;
  bool support_ok = false;
};

std::vector<MollifierRow> mollifier_convergence(const Ambient& amb, const CauchyDatum& f,
                                                const std::vector<int>& schedule);

struct DensityReport {
  std::vector<std::vector<double>> residuals;  // per target, per family size
  std::vector<int> family_sizes;
};

/// Projects targets onto the span of Cauchy data propagated from sources
/// supported in the forward cone; residuals are non-increasing along the
/// enrichment schedule. Requires m > 0.
DensityReport forward_cone_density_residual(const Ambient& amb,
                                            const std::vector<CauchyDatum>& targets,
                                            const std::vector<propagator::SpacetimeSource>& family,
                                            const propagator::PropagatorKernel& kernel,
                                            const std::vector<int>& schedule);

}  // namespace qdual::scalar
