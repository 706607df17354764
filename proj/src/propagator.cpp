#include "qdual/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdual/fft.hpp"

namespace qdual::propagator {

namespace {

std::vector<double> delta_symbol(const LatticeGrid& grid, double t, bool derivative) {
  std::vector<double> sym(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    double w = grid.omega(i);
    if (derivative) {
      sym[i] = std::cos(w * t);
    } else {
      sym[i] = w == 0.0 ? t : std::sin(w * t) / w;
    }
  }
  return sym;
}

LatticeField symbol_to_field(const LatticeGrid& grid, const std::vector<double>& sym) {
  // Field whose Fourier coefficients (physics normalization) are `sym`.
  SpectralField fh{grid, std::vector<cplx>(sym.begin(), sym.end())};
  return inverse_fourier(fh);
}

}  // namespace

void PropagatorKernel::check_horizon(double t) const {
  if (std::abs(t) >= horizon())
    throw std::invalid_argument("propagator: |t| exceeds the wraparound horizon L/2");
}

std::shared_ptr<const LatticeField> PropagatorKernel::slice(double t) const {
  check_horizon(t);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(t);
  if (it != cache_.end()) return it->second;
  auto f = std::make_shared<const LatticeField>(symbol_to_field(grid_, delta_symbol(grid_, t, false)));
  cache_[t] = f;
  return f;
}

std::shared_ptr<const LatticeField> PropagatorKernel::slice_dt(double t) const {
  check_horizon(t);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_dt_.find(t);
  if (it != cache_dt_.end()) return it->second;
  auto f = std::make_shared<const LatticeField>(symbol_to_field(grid_, delta_symbol(grid_, t, true)));
  cache_dt_[t] = f;
  return f;
}

double commutator_function(const PropagatorKernel& kernel, double t, std::int64_t site) {
  return kernel.value(t, site);
}

HuygensReport huygens_check(const PropagatorKernel& kernel, double t, double shell_width,
                            bool require_massless_odd) {
  const LatticeGrid& g = kernel.grid();
  if (require_massless_odd) {
    if (g.mass() != 0.0) throw std::invalid_argument("huygens_check requires m = 0");
    if (g.dim() % 2 == 0) throw std::invalid_argument("huygens_check requires odd d");
  }
  if (shell_width < 0.0) shell_width = 4.0 * g.spacing();
  if (t <= shell_width) throw std::invalid_argument("huygens_check: t must exceed the shell width");

  auto slice = kernel.slice(t);
  HuygensReport rep;
  rep.shell_width = shell_width;
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    double v = std::abs((*slice)[i]);
    rep.peak = std::max(rep.peak, v);
    auto x = g.torus_position(i);
    double r2 = 0.0;
    for (int ax = 0; ax < g.dim(); ++ax) r2 += x[ax] * x[ax];
    if (std::sqrt(r2) < t - shell_width) rep.interior_max = std::max(rep.interior_max, v);
  }
  rep.ratio = rep.peak > 0.0 ? rep.interior_max / rep.peak : 0.0;
  return rep;
}

SpacetimeSource::SpacetimeSource(const LatticeGrid& g, std::vector<double> t,
                                 std::vector<LatticeField> s, std::vector<double> w)
    : grid(g), times(std::move(t)), slices(std::move(s)), weights(std::move(w)) {
  if (times.size() != slices.size()) throw std::invalid_argument("source: times/slices mismatch");
  if (weights.empty()) weights.assign(times.size(), 1.0);
  if (weights.size() != times.size()) throw std::invalid_argument("source: weights mismatch");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("source: times must be strictly increasing");
  for (const auto& sl : slices)
    if (!sl.grid.same_geometry(g)) throw std::invalid_argument("source: slice grid mismatch");
}

spectral::FieldPair propagate_to_cauchy_data(const SpacetimeSource& src,
                                             const PropagatorKernel& kernel) {
  const LatticeGrid& g = kernel.grid();
  if (!src.grid.same_geometry(g)) throw std::invalid_argument("propagate: grid mismatch");
  for (double t : src.times)
    if (std::abs(t) >= kernel.horizon())
      throw std::invalid_argument("propagate: source time beyond horizon");

  // Duhamel sums per momentum mode: u(0) picks sin(-omega t_j)/omega, the
  // derivative picks cos(omega t_j).
  std::vector<cplx> acc0(g.sites(), cplx(0, 0)), acc1(g.sites(), cplx(0, 0));
  for (std::size_t j = 0; j < src.times.size(); ++j) {
    auto gh = fourier(src.slices[j]);
    const double tj = src.times[j], wj = src.weights[j];
    for (std::int64_t k = 0; k < g.sites(); ++k) {
      double w = g.omega(k);
      double s0 = w == 0.0 ? -tj : std::sin(-w * tj) / w;
      double s1 = std::cos(w * tj);
      acc0[k] += wj * s0 * gh.v[k];
      acc1[k] += wj * s1 * gh.v[k];
    }
  }
  LatticeField f0 = inverse_fourier(SpectralField{g, std::move(acc0)});
  LatticeField f1 = inverse_fourier(SpectralField{g, std::move(acc1)});
  return spectral::FieldPair{std::move(f0), std::move(f1)};
}

namespace {

SupportReport support_check_impl(const SpacetimeSource& src, const PropagatorKernel& kernel,
                                 double t_eval, double shell_width, bool backward_shadow) {
  const LatticeGrid& g = kernel.grid();
  if (!src.grid.same_geometry(g)) throw std::invalid_argument("support check: grid mismatch");
  LatticeField u(g);
  for (std::size_t j = 0; j < src.times.size(); ++j) {
    double dt = t_eval - src.times[j];
    if (dt <= 0.0) continue;  // retarded step function
    auto sl = kernel.slice(dt);
    // u += w_j * Delta(dt) * g_j (quadrature convolution)
    auto gh = fourier(src.slices[j]);
    auto dh = fourier(*sl);
    for (std::int64_t k = 0; k < g.sites(); ++k) gh.v[k] *= dh.v[k] * src.weights[j];
    LatticeField term = inverse_fourier(gh);
    add_scaled(u, term, 1.0);
  }

  // Causal shadow: union over slices of supp g_j inflated by the reach
  // (t_eval - t_j) + w forward, or w - (t_eval - t_j) for the backward
  // control, which the propagated field escapes entirely.
  std::vector<bool> inside(g.sites(), false);
  for (std::size_t j = 0; j < src.times.size(); ++j) {
    double peak = 0.0;
    for (double x : src.slices[j].v) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) continue;
    std::vector<std::int64_t> supp;
    for (std::int64_t i = 0; i < g.sites(); ++i)
      if (std::abs(src.slices[j].v[i]) > 1e-14 * peak) supp.push_back(i);
    double dt = t_eval - src.times[j];
    double reach = backward_shadow ? shell_width - dt : dt + shell_width;
    if (reach <= 0.0) continue;
    for (std::int64_t i = 0; i < g.sites(); ++i) {
      if (inside[i]) continue;
      for (std::int64_t y : supp) {
        if (g.torus_distance(i, y) < reach) {
          inside[i] = true;
          break;
        }
      }
    }
  }

  SupportReport rep;
  rep.eval_time = t_eval;
  rep.shell_width = shell_width;
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    double v = std::abs(u.v[i]);
    rep.peak = std::max(rep.peak, v);
    if (!inside[i]) rep.outside_max = std::max(rep.outside_max, v);
  }
  rep.fraction = rep.peak > 0.0 ? rep.outside_max / rep.peak : 0.0;
  return rep;
}

}  // namespace

SupportReport retarded_support_check(const SpacetimeSource& src, const PropagatorKernel& kernel,
                                     double t_eval, double shell_width) {
  return support_check_impl(src, kernel, t_eval, shell_width, false);
}

SupportReport advanced_control_check(const SpacetimeSource& src, const PropagatorKernel& kernel,
                                     double t_eval, double shell_width) {
  return support_check_impl(src, kernel, t_eval, shell_width, true);
}

}  // namespace qdual::propagator
