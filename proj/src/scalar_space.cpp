#include "qdual/scalar_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdual/spectral.hpp"

namespace qdual::scalar {

namespace {

constexpr double kSectorTol = 1e-10;

void check_same(const CauchyDatum& a, const CauchyDatum& b) {
  if (a.grid != b.grid) throw std::invalid_argument("cauchy data on different ambients");
}

double sparse_kernel_pair(const LatticeGrid& grid, const std::vector<double>& kernel,
                          const std::vector<std::pair<std::int64_t, double>>& a,
                          const std::vector<std::pair<std::int64_t, double>>& b) {
  // a^{2d} sum_{x,y} a(x) kernel(x - y) b(y)
  double s = 0.0;
  for (const auto& [xi, xv] : a) {
    Coords cx = grid.coords(xi);
    for (const auto& [yi, yv] : b) {
      Coords cy = grid.coords(yi);
      Coords d{0, 0, 0};
      for (int ax = 0; ax < grid.dim(); ++ax) d[ax] = cx[ax] - cy[ax];
      s += xv * yv * kernel[grid.index(d)];
    }
  }
  double a_d = grid.cell_volume();
  return s * a_d * a_d;
}

double sparse_dot(const std::vector<std::pair<std::int64_t, double>>& a,
                  const std::vector<std::pair<std::int64_t, double>>& b) {
  double s = 0.0;
  for (const auto& [xi, xv] : a)
    for (const auto& [yi, yv] : b)
      if (xi == yi) s += xv * yv;
  return s;
}

double sparse_field_dot(const std::vector<std::pair<std::int64_t, double>>& a,
                        const LatticeField& f) {
  double s = 0.0;
  for (const auto& [xi, xv] : a) s += xv * f[xi];
  return s;
}

}  // namespace

CauchyDatum CauchyDatum::make(const LatticeGrid& grid, LatticeField f0, LatticeField f1) {
  if (!f0.grid.same_geometry(grid) || !f1.grid.same_geometry(grid))
    throw std::invalid_argument("cauchy datum: component grid mismatch");
  f0.grid = grid;
  f1.grid = grid;
  if (grid.mass() == 0.0) {
    f0 = remove_mean(f0);
    f1 = remove_mean(f1);
  }
  return CauchyDatum{grid, std::move(f0), std::move(f1)};
}

double symplectic_form(const CauchyDatum& f, const CauchyDatum& g) {
  check_same(f, g);
  return inner_l2(f.f0, g.f1) - inner_l2(f.f1, g.f0);
}

double energy_inner(const CauchyDatum& f, const CauchyDatum& g) {
  check_same(f, g);
  LatticeField wg0 = spectral::apply_omega_power(g.f0, 1.0, false);
  LatticeField wg1 = spectral::apply_omega_power(g.f1, -1.0, false);
  return inner_l2(f.f0, wg0) + inner_l2(f.f1, wg1);
}

double energy_norm(const CauchyDatum& f) { return std::sqrt(energy_inner(f, f)); }

CauchyDatum complex_structure(const CauchyDatum& f) {
  LatticeField j0 = spectral::apply_omega_power(f.f1, -1.0, false);
  for (auto& x : j0.v) x = -x;
  LatticeField j1 = spectral::apply_omega_power(f.f0, 1.0);
  return CauchyDatum{f.grid, std::move(j0), std::move(j1)};
}

CauchyDatum time_reversal(const CauchyDatum& f) {
  CauchyDatum g = f;
  for (auto& x : g.f1.v) x = -x;
  return g;
}

CauchyDatum psi(const CauchyDatum& f) {
  LatticeField p0 = f.f1;
  for (auto& x : p0.v) x = -x;
  return CauchyDatum{f.grid, std::move(p0), f.f0};
}

CauchyDatum psi_inverse(const CauchyDatum& f) {
  LatticeField p1 = f.f0;
  for (auto& x : p1.v) x = -x;
  return CauchyDatum{f.grid, f.f1, std::move(p1)};
}

CauchyDatum datum_sub(const CauchyDatum& a, const CauchyDatum& b) {
  check_same(a, b);
  CauchyDatum r = a;
  add_scaled(r.f0, b.f0, -1.0);
  add_scaled(r.f1, b.f1, -1.0);
  return r;
}

// --- ambient -----------------------------------------------------------------

Ambient::Ambient(const LatticeGrid& grid) : grid_(grid) {
  auto wplus = spectral::omega_symbol(grid, 1.0);
  auto wminus = spectral::omega_symbol(grid, -1.0);  // zero mode already 0 when m=0
  kplus_ = inverse_fourier(SpectralField{grid, std::vector<cplx>(wplus.begin(), wplus.end())}).v;
  kminus_ = inverse_fourier(SpectralField{grid, std::vector<cplx>(wminus.begin(), wminus.end())}).v;
}

double Ambient::inner(const Gen& a, const Gen& b) const {
  if (a.dense && b.dense) {
    return inner_l2(a.dense->f0, *b.w0) + inner_l2(a.dense->f1, *b.w1);
  }
  if (a.dense) return inner(b, a);
  if (b.dense) {
    double a_d = grid_.cell_volume();
    return a_d * (sparse_field_dot(a.s0, *b.w0) + sparse_field_dot(a.s1, *b.w1));
  }
  return sparse_kernel_pair(grid_, kplus_, a.s0, b.s0) +
         sparse_kernel_pair(grid_, kminus_, a.s1, b.s1);
}

double Ambient::sympl(const Gen& a, const Gen& b) const {
  if (a.dense && b.dense)
    return inner_l2(a.dense->f0, b.dense->f1) - inner_l2(a.dense->f1, b.dense->f0);
  if (a.dense) return -sympl(b, a);
  if (b.dense) {
    double a_d = grid_.cell_volume();
    return a_d * (sparse_field_dot(a.s0, b.dense->f1) - sparse_field_dot(a.s1, b.dense->f0));
  }
  double a_d = grid_.cell_volume();
  return a_d * (sparse_dot(a.s0, b.s1) - sparse_dot(a.s1, b.s0));
}

span::Ops<Gen> Ambient::ops() const {
  return span::Ops<Gen>{
      [this](const Gen& a, const Gen& b) { return inner(a, b); },
      [this](const Gen& a, const Gen& b) { return sympl(a, b); },
  };
}

Gen Ambient::delta0(std::int64_t site) const {
  Gen g;
  g.s0 = {{site, 1.0}};
  return g;
}

Gen Ambient::delta1(std::int64_t site) const {
  Gen g;
  g.s1 = {{site, 1.0}};
  return g;
}

Gen Ambient::diff1(std::int64_t site, std::int64_t anchor) const {
  Gen g;
  g.s1 = {{site, 1.0}, {anchor, -1.0}};
  return g;
}

Gen Ambient::from_datum(const CauchyDatum& d) const {
  if (d.grid != grid_) throw std::invalid_argument("datum ambient mismatch");
  Gen g;
  g.dense = std::make_shared<CauchyDatum>(d);
  g.w0 = std::make_shared<LatticeField>(spectral::apply_omega_power(d.f0, 1.0, false));
  g.w1 = std::make_shared<LatticeField>(spectral::apply_omega_power(d.f1, -1.0, false));
  return g;
}


std::vector<Gen> Ambient::local_generators(const Mask& mask) const {
  if (mask.empty()) throw std::invalid_argument("local_generators: empty mask");
  Mask sorted = mask;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Gen> gens;
  gens.reserve(2 * sorted.size());
  for (auto site : sorted) gens.push_back(delta0(site));
  if (massless()) {
    // chain differences: the zero-charge span with a well conditioned Gram
    for (std::size_t i = 1; i < sorted.size(); ++i)
      gens.push_back(diff1(sorted[i], sorted[i - 1]));
  } else {
    for (auto site : sorted) gens.push_back(delta1(site));
  }
  return gens;
}

Workspace::Workspace(const Ambient& amb, const Mask& ambient_mask) : amb_(&amb) {
  frame_ = span::make_frame(amb.local_generators(ambient_mask), amb.ops(), 1e-10, nullptr,
                            /*reduce_null=*/true, &null_dim_);
}

Subspace Workspace::local_subspace(const Mask& mask) const {
  if (mask.empty()) return Subspace{Eigen::MatrixXd(frame_.rank(), 0)};
  return Subspace{span::subspace_in_frame(frame_, amb_->ops(), amb_->local_generators(mask))};
}

Subspace Workspace::span_of_data(const std::vector<CauchyDatum>& data) const {
  std::vector<Gen> gens;
  gens.reserve(data.size());
  for (const auto& d : data) gens.push_back(amb_->from_datum(d));
  return Subspace{span::subspace_in_frame(frame_, amb_->ops(), gens)};
}

Subspace Workspace::symplectic_complement(const Subspace& v) const {
  return Subspace{span::frame_sympl_complement(frame_, v.coords)};
}

double Workspace::gap(const Subspace& a, const Subspace& b) const {
  return span::frame_gap(a.coords, b.coords);
}

double Workspace::excess_energy(const Subspace& a, const Subspace& b) const {
  return span::frame_excess_energy(a.coords, b.coords);
}

double Workspace::max_residual(const Subspace& a, const Subspace& b) const {
  return span::frame_max_residual(a.coords, b.coords);
}

DualityReport duality_check(const Ambient& amb, const Mask& region, const Mask& ambient_mask) {
  Mask b = region, m = ambient_mask;
  std::sort(b.begin(), b.end());
  std::sort(m.begin(), m.end());
  if (!std::includes(m.begin(), m.end(), b.begin(), b.end()))
    throw std::invalid_argument("duality_check: region must lie inside the ambient mask");
  Mask comp = mask_difference(m, b);

  Workspace w(amb, m);
  Subspace vb = w.local_subspace(b);
  Subspace vc = w.local_subspace(comp);

  DualityReport rep;
  rep.dim_ambient = w.rank();
  rep.dim_region = vb.rank();
  rep.dim_complement_mask = vc.rank();
  Subspace fwd = w.symplectic_complement(vc);
  rep.dim_complement_space = fwd.rank();
  rep.gap_forward = w.gap(fwd, vb);
  Subspace dual = w.symplectic_complement(vb);
  rep.gap_dual = w.gap(dual, vc);
  rep.note =
      "finite-dimensional duality is exact: local spans and the canonical symplectic "
      "pairing make the complement of H(M\\B) in H(M) equal to H(B); reported gaps "
      "measure orthonormalization and SVD roundoff only";
  return rep;
}

std::vector<OuterRegularityRow> outer_regularity_scan(const Ambient& amb, const Mask& region,
                                                      const std::vector<Mask>& neighborhoods,
                                                      const Mask& ambient_mask) {
  Mask closure = inflate(amb.grid(), region, 1);
  Mask ambient_sorted = ambient_mask;
  std::sort(ambient_sorted.begin(), ambient_sorted.end());
  Mask closure_in;
  for (auto s : closure)
    if (std::binary_search(ambient_sorted.begin(), ambient_sorted.end(), s))
      closure_in.push_back(s);

  Workspace w(amb, ambient_mask);
  Subspace base = w.local_subspace(region);
  Subspace closure_span = w.local_subspace(closure_in);

  std::vector<OuterRegularityRow> rows;
  Mask prev;
  bool first = true;
  for (std::size_t k = 0; k < neighborhoods.size(); ++k) {
    Mask nb = neighborhoods[k];
    std::sort(nb.begin(), nb.end());
    if (!std::includes(nb.begin(), nb.end(), closure_in.begin(), closure_in.end()))
      throw std::invalid_argument("outer_regularity_scan: neighborhood must contain the closure");
    if (!first && !std::includes(prev.begin(), prev.end(), nb.begin(), nb.end()))
      throw std::invalid_argument("outer_regularity_scan: neighborhoods must shrink");
    prev = nb;
    first = false;

    Subspace vk = w.local_subspace(nb);
    OuterRegularityRow row;
    row.index = static_cast<int>(k);
    row.dim = vk.rank();
    row.dim_excess_vs_base = vk.rank() - base.rank();
    row.sup_gap_vs_base = w.gap(vk, base);
    row.excess_energy_vs_base = w.excess_energy(vk, base);
    row.gap_vs_closure = w.gap(vk, closure_span);
    rows.push_back(row);
  }
  return rows;
}

std::vector<MollifierRow> mollifier_convergence(const Ambient& amb, const CauchyDatum& f,
                                                const std::vector<int>& schedule) {
  const LatticeGrid& g = amb.grid();
  if (f.grid != g) throw std::invalid_argument("mollifier_convergence: ambient mismatch");

  CauchyDatum psif = psi(f);
  // Support of psi(f) = supp f0 union supp f1 and the margin check.
  double peak = 0.0;
  for (double x : psif.f0.v) peak = std::max(peak, std::abs(x));
  for (double x : psif.f1.v) peak = std::max(peak, std::abs(x));
  std::vector<bool> support(g.sites(), false);
  double rad = 0.0;
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    if (std::abs(psif.f0.v[i]) > 1e-12 * peak || std::abs(psif.f1.v[i]) > 1e-12 * peak) {
      support[i] = true;
      auto x = g.torus_position(i);
      for (int ax = 0; ax < g.dim(); ++ax) rad = std::max(rad, std::abs(x[ax]));
    }
  }
  int nmin = *std::min_element(schedule.begin(), schedule.end());
  if (rad + 1.0 / nmin >= g.length() / 2.0 - g.spacing())
    throw std::invalid_argument("mollifier_convergence: support margin violated");

  std::vector<MollifierRow> rows;
  for (int n : schedule) {
    LatticeField rho = spectral::mollifier(g, n);
    LatticeField c0 = spectral::convolve(psif.f0, rho);
    LatticeField c1 = spectral::convolve(psif.f1, rho);
    CauchyDatum fn = psi_inverse(CauchyDatum{g, std::move(c0), std::move(c1)});

    MollifierRow row;
    row.n = n;
    row.error = energy_norm(datum_sub(fn, f));

    // supp f_n inside supp psi(f) + ball(1/n), site by site (threshold
    // 1e-12 of the peak absorbs FFT roundoff).
    double fnpeak = 0.0;
    for (double x : fn.f0.v) fnpeak = std::max(fnpeak, std::abs(x));
    for (double x : fn.f1.v) fnpeak = std::max(fnpeak, std::abs(x));
    bool ok = true;
    const double reach = 1.0 / n + 1e-9;
    for (std::int64_t i = 0; i < g.sites() && ok; ++i) {
      if (std::abs(fn.f0.v[i]) <= 1e-12 * fnpeak && std::abs(fn.f1.v[i]) <= 1e-12 * fnpeak)
        continue;
      bool near = false;
      for (std::int64_t y = 0; y < g.sites(); ++y) {
        if (!support[y]) continue;
        if (g.torus_distance(i, y) <= reach) {
          near = true;
          break;
        }
      }
      if (!near) ok = false;
    }
    row.support_ok = ok;
    rows.push_back(row);
  }
  return rows;
}

DensityReport forward_cone_density_residual(const Ambient& amb,
                                            const std::vector<CauchyDatum>& targets,
                                            const std::vector<propagator::SpacetimeSource>& family,
                                            const propagator::PropagatorKernel& kernel,
                                            const std::vector<int>& schedule) {
  if (family.empty()) throw std::invalid_argument("density: empty family");
  if (amb.grid().mass() <= 0.0) throw std::invalid_argument("density: requires m > 0");

  std::vector<CauchyDatum> data;
  data.reserve(family.size());
  for (const auto& src : family) {
    auto pair = propagate_to_cauchy_data(src, kernel);
    data.push_back(CauchyDatum::make(amb.grid(), std::move(pair.f0), std::move(pair.f1)));
  }

  // Gram of the family and of targets against the family.
  const int nf = static_cast<int>(data.size());
  Eigen::MatrixXd gram(nf, nf);
  for (int i = 0; i < nf; ++i)
    for (int j = i; j < nf; ++j) gram(i, j) = gram(j, i) = energy_inner(data[i], data[j]);

  DensityReport rep;
  rep.family_sizes = schedule;
  for (const auto& h : targets) {
    Eigen::VectorXd cross(nf);
    for (int i = 0; i < nf; ++i) cross(i) = energy_inner(data[i], h);
    double hn = energy_norm(h);
    std::vector<double> series;
    for (int m : schedule) {
      if (m <= 0 || m > nf) throw std::invalid_argument("density: schedule size out of range");
      int dropped = 0;
      Eigen::MatrixXd basis = span::whiten<Gen>(gram.topLeftCorner(m, m), 1e-12, &dropped);
      Eigen::VectorXd coeff = basis * (basis.transpose() * cross.head(m));
      // explicit residual datum: no cancellation of near-equal norms
      CauchyDatum resid = h;
      for (int j = 0; j < m; ++j) {
        if (coeff(j) == 0.0) continue;
        add_scaled(resid.f0, data[j].f0, -coeff(j));
        add_scaled(resid.f1, data[j].f1, -coeff(j));
      }
      series.push_back(hn > 0 ? energy_norm(resid) / hn : 0.0);
    }
    rep.residuals.push_back(std::move(series));
  }
  return rep;
}

}  // namespace qdual::scalar
