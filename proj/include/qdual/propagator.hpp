#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "qdual/lattice.hpp"
#include "qdual/spectral.hpp"

namespace qdual::propagator {

/// Lattice Klein-Gordon commutator function, continuum in time:
/// Delta(t, x) with mode coefficients sin(omega t)/omega and the sign fixed
/// so that Delta(0,.) = 0 and dt Delta(0,.) is the lattice delta (1/a^d at
/// the origin). For m = 0 the zero mode takes the t-linear limit.
/// Per-t slices are cached behind a lock; all queries are const.
class PropagatorKernel {
 public:
  explicit PropagatorKernel(const LatticeGrid& grid) : grid_(grid) {}

  const LatticeGrid& grid() const { return grid_; }
  /// Wraparound guard: |t| must stay below L/2.
  double horizon() const { return grid_.length() / 2.0; }

  /// Full slice Delta(t, .).
  std::shared_ptr<const LatticeField> slice(double t) const;
  /// Spectral time derivative dt Delta(t, .).
  std::shared_ptr<const LatticeField> slice_dt(double t) const;
  double value(double t, std::int64_t site) const { return (*slice(t))[site]; }

 private:
  void check_horizon(double t) const;
  LatticeGrid grid_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const LatticeField>> cache_;
  mutable std::map<double, std::shared_ptr<const LatticeField>> cache_dt_;
};

double commutator_function(const PropagatorKernel& kernel, double t, std::int64_t site);

struct HuygensReport {
  double interior_max = 0.0;
  double peak = 0.0;
  double ratio = 0.0;
  double shell_width = 0.0;
};

/// Interior suppression of Delta(t, .): max over |x| < t - w against the
/// global peak. Requires m = 0 and odd d for the Huygens statement; the
/// massive case is the control. w defaults to 4a.
HuygensReport huygens_check(const PropagatorKernel& kernel, double t, double shell_width = -1.0,
                            bool require_massless_odd = true);

/// Test function supported on finitely many time slices; the time integral
/// is discretized with the given weights.
struct SpacetimeSource {
  LatticeGrid grid;
  std::vector<double> times;          // strictly increasing
  std::vector<LatticeField> slices;   // same grid
  std::vector<double> weights;        // one per slice; defaults to 1

  SpacetimeSource(const LatticeGrid& g, std::vector<double> t, std::vector<LatticeField> s,
                  std::vector<double> w = {});
};

/// Cauchy data (u(0), dt u(0)) of u = sum_j w_j Delta(. - t_j) * g_j.
/// The massless zero mode grows linearly in time; it is reported through the
/// returned pair untouched (downstream scalar-space uses project it out).
spectral::FieldPair propagate_to_cauchy_data(const SpacetimeSource& src,
                                             const PropagatorKernel& kernel);

struct SupportReport {
  double outside_max = 0.0;
  double peak = 0.0;
  double fraction = 0.0;   // outside_max / peak
  double eval_time = 0.0;
  double shell_width = 0.0;
};

/// Retarded propagation u_+(t) = sum_j w_j theta(t - t_j) Delta(t - t_j) * g_j
/// evaluated at `t_eval`; reports the field fraction outside the forward
/// causal shadow of the source inflated by `shell_width`.
SupportReport retarded_support_check(const SpacetimeSource& src, const PropagatorKernel& kernel,
                                     double t_eval, double shell_width);

/// Control: the same field measured against the backward causal shadow
/// (which the forward-propagated field escapes); the fraction is O(1).
SupportReport advanced_control_check(const SpacetimeSource& src, const PropagatorKernel& kernel,
                                     double t_eval, double shell_width);

}  // namespace qdual::propagator
