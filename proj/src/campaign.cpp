#include "qdual/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

#include "qdual/em_space.hpp"
#include "qdual/errors.hpp"
#include "qdual/fock.hpp"
#include "qdual/geometry.hpp"
#include "qdual/masks.hpp"
#include "qdual/propagator.hpp"
#include "qdual/scalar_space.hpp"
#include "qdual/spectral.hpp"

namespace qdual::campaign {

namespace {

using report::json;

double jd(const json& p, const std::string& key, double def) {
  return p.contains(key) ? p.at(key).get<double>() : def;
}
int ji(const json& p, const std::string& key, int def) {
  return p.contains(key) ? p.at(key).get<int>() : def;
}
std::vector<int> jvi(const json& p, const std::string& key, std::vector<int> def) {
  if (!p.contains(key)) return def;
  return p.at(key).get<std::vector<int>>();
}
std::vector<double> jvd(const json& p, const std::string& key, std::vector<double> def) {
  if (!p.contains(key)) return def;
  return p.at(key).get<std::vector<double>>();
}

/// Smooth random band-limited field: gaussian coefficients damped at the
/// scale `band` (fraction of the Nyquist momentum), zero mean.
LatticeField random_smooth_field(const LatticeGrid& grid, std::mt19937_64& rng,
                                 double band = 0.25) {
  std::normal_distribution<double> dist;
  LatticeField white(grid);
  for (auto& x : white.v) x = dist(rng);
  const double pmax = std::numbers::pi / grid.spacing();
  std::vector<double> damp(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    double p = grid.momentum_norm(i);
    damp[i] = p == 0.0 ? 0.0 : std::exp(-0.5 * std::pow(p / (band * pmax), 2));
  }
  return apply_multiplier(white, damp);
}

LatticeField bump_field_at(const LatticeGrid& grid, double r0,
                           const std::vector<double>& center) {
  LatticeField f(grid);
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    auto x = grid.torus_position(i);
    double r2 = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax) {
      double ctr = ax < static_cast<int>(center.size()) ? center[ax] : 0.0;
      double d = x[ax] - ctr;
      double L = grid.length();
      d -= L * std::round(d / L);
      r2 += d * d;
    }
    double u2 = r2 / (r0 * r0);
    f.v[i] = u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0;
  }
  return f;
}

/// Compact zero-charge field: opposite bumps with disjoint supports.
LatticeField dipole_field(const LatticeGrid& grid, double r0, double sep) {
  LatticeField plus = bump_field_at(grid, r0, {sep});
  LatticeField minus = bump_field_at(grid, r0, {-sep});
  for (std::int64_t i = 0; i < grid.sites(); ++i) plus.v[i] -= minus.v[i];
  return plus;
}

/// Compactly supported smooth bump exp(-1/(1-r^2/r0^2)) centered at 0.
LatticeField bump_field(const LatticeGrid& grid, double r0) {
  LatticeField f(grid);
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    auto x = grid.torus_position(i);
    double r2 = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax) r2 += x[ax] * x[ax];
    double u2 = r2 / (r0 * r0);
    f.v[i] = u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0;
  }
  return f;
}

geom::Point random_point(int dim, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> c(dim + 1);
  for (auto& x : c) x = u(rng);
  return geom::Point(c);
}

// ---------------------------------------------------------------------------
// job handlers
// ---------------------------------------------------------------------------

using Handler = std::function<JobResult(const json&, std::uint64_t)>;

JobResult geometry_interval_probes(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int count = ji(p, "probes", 2000);
  std::mt19937_64 rng(seed);
  bool ok = true;
  using geom::IntervalKind;
  ok &= geom::interval_kind(geom::Point::of({0, 0, 0}), geom::Point::of({1, 0, 0})) ==
        IntervalKind::Timelike;
  ok &= geom::interval_kind(geom::Point::of({0, 0, 0}), geom::Point::of({0, 1, 0})) ==
        IntervalKind::Spacelike;
  ok &= geom::interval_kind(geom::Point::of({0, 0, 0}), geom::Point::of({1, 1, 0})) ==
        IntervalKind::Lightlike;
  int mism = 0;
  for (int i = 0; i < count; ++i) {
    auto x = random_point(dim, rng, 2.0);
    auto y = random_point(dim, rng, 2.0);
    auto t = random_point(dim, rng, 1.0);
    auto k1 = geom::interval_kind(x, y);
    if (geom::interval_kind(y, x) != k1) ++mism;
    if (geom::interval_kind(x + t, y + t) != k1) ++mism;
    // spatial reflection of the first axis applied to both points
    auto xr = x, yr = y;
    xr.x[1] = -xr.x[1];
    yr.x[1] = -yr.x[1];
    if (geom::interval_kind(xr, yr) != k1) ++mism;
  }
  ok &= mism == 0;
  r.pass = ok;
  r.details = {{"probes", count}, {"mismatches", mism}};
  return r;
}

JobResult geometry_complement_probes(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const double r_in = jd(p, "r_inner", 1.0);
  const double r_out = jd(p, "r_outer", 2.0);
  const int probes = ji(p, "probes", 10000);
  std::mt19937_64 rng(seed);

  geom::SurfacePatch inner{geom::FlatTimeSlice{0.0},
                           geom::BallBase{std::vector<double>(dim, 0.0), r_in}};
  geom::SurfacePatch outer{geom::FlatTimeSlice{0.0},
                           geom::BallBase{std::vector<double>(dim, 0.0), r_out}};
  geom::Region reg = geom::Region::diamond(inner);
  geom::Region amb = geom::Region::diamond(outer);
  geom::Region comp = geom::causal_complement(reg, amb);

  // Sample of the inner region for the double-loop spacelike test.
  std::vector<geom::Point> sample;
  while (static_cast<int>(sample.size()) < 8000) {
    auto x = random_point(dim, rng, r_in);
    if (geom::contains(reg, x)) sample.push_back(x);
  }

  int mism = 0;
  int inside = 0;
  int skipped = 0;
  std::uniform_real_distribution<double> u(-r_out, r_out);
  for (int i = 0; i < probes; ++i) {
    auto x = random_point(dim, rng, r_out);
    if (!geom::contains(amb, x)) continue;
    bool all_spacelike = true;
    bool grazing = false;
    for (const auto& y : sample) {
      geom::Point d = x - y;
      double q = d.minkowski_sq();
      // probes within the sampling resolution of the causal boundary are
      // skipped; the sampled region cannot resolve them
      if (std::abs(q) < 3e-2) grazing = true;
      if (q >= 0.0) {
        all_spacelike = false;
        break;
      }
    }
    if (grazing && all_spacelike) {
      ++skipped;
      continue;
    }
    bool in_comp = geom::contains(comp, x);
    if (in_comp) ++inside;
    if (in_comp != all_spacelike) ++mism;
  }
  // annulus picture: the complement base must be exactly r_in < |y| < r_out
  int base_mism = 0;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> y(dim + 1, 0.0);
    for (int ax = 1; ax <= dim; ++ax) y[ax] = u(rng);
    geom::Point pt{y};
    double rr = pt.spatial_norm();
    bool expect = rr > r_in && rr < r_out;
    if (geom::contains(comp, pt) != expect) ++base_mism;
  }
  r.pass = mism == 0 && base_mism == 0;
  r.details = {{"probes", probes},
               {"complement_hits", inside},
               {"boundary_band_skipped", skipped},
               {"predicate_mismatches", mism},
               {"annulus_mismatches", base_mism}};
  return r;
}

JobResult geometry_ray_inversion(const json& p, std::uint64_t seed) {
  JobResult r;
  const int probes = ji(p, "probes", 1000);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    auto x = random_point(2, rng, 2.0);
    if (std::abs(x.minkowski_sq()) < 1e-3) continue;
    auto y = geom::ray_inversion(geom::ray_inversion(x));
    for (std::size_t c = 0; c < x.x.size(); ++c)
      worst = std::max(worst, std::abs(y.x[c] - x.x[c]) / x.scale());
  }
  auto v1 = geom::ray_inversion(geom::Point::of({-1, 0, 0}));
  double e1 = std::abs(v1.x[0] - 1.0) + std::abs(v1.x[1]) + std::abs(v1.x[2]);
  auto v2 = geom::ray_inversion(geom::Point::of({-0.5, 0.25, 0}));
  double e2 = std::abs(v2.x[0] - 8.0 / 3.0) + std::abs(v2.x[1] + 4.0 / 3.0) + std::abs(v2.x[2]);
  r.pass = worst < 1e-12 && e1 < 1e-12 && e2 < 1e-12;
  r.details = {{"involution_residual", worst}, {"vertex_image_error", e1},
               {"hyperboloid_image_error", e2}};
  return r;
}

JobResult geometry_conformal(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const double T = jd(p, "T", 1.0);
  const int probes = ji(p, "probes", 1000);
  std::mt19937_64 rng(seed);
  geom::ConformalMap phi(T, dim);
  geom::Region cone = phi.image_cone();

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int outside = 0;
  double roundtrip = 0.0;
  for (int i = 0; i < probes; ++i) {
    // random point of V+
    std::vector<double> c(dim + 1, 0.0);
    double rad = 0.0;
    for (int ax = 1; ax <= dim; ++ax) {
      c[ax] = 3.0 * u(rng);
      rad += c[ax] * c[ax];
    }
    c[0] = std::sqrt(rad) + 0.05 + 4.0 * std::abs(u(rng));
    geom::Point x{c};
    auto y = phi.map(x);
    if (!geom::contains(cone, y)) ++outside;
    auto back = phi.inverse(y);
    for (std::size_t k = 0; k < c.size(); ++k)
      roundtrip = std::max(roundtrip, std::abs(back.x[k] - x.x[k]) / x.scale());
  }
  // hyperboloid points land on the flat slice t = -T/2
  double slice_err = 0.0;
  const double cpar = phi.hyperboloid_c();
  for (int i = 0; i < probes; ++i) {
    double eta = 2.5 * std::abs(u(rng)) + 1e-3;
    std::vector<double> dir(dim, 0.0);
    double nn = 0.0;
    for (auto& dcomp : dir) {
      dcomp = u(rng);
      nn += dcomp * dcomp;
    }
    nn = std::sqrt(std::max(nn, 1e-12));
    std::vector<double> c(dim + 1, 0.0);
    c[0] = cpar * std::cosh(eta);
    for (int ax = 0; ax < dim; ++ax) c[ax + 1] = cpar * std::sinh(eta) * dir[ax] / nn;
    auto y = phi.map(geom::Point{c});
    slice_err = std::max(slice_err, std::abs(y.x[0] + T / 2.0));
    double inball = 0.0;
    for (int ax = 1; ax <= dim; ++ax) inball += y.x[ax] * y.x[ax];
    if (std::sqrt(inball) >= T / 2.0) ++outside;
  }
  // the apex of V+ maps, as a boundary limit, to the lower vertex (-T, 0)
  std::vector<double> apex(dim + 1, 0.0);
  apex[0] = 1e-9;
  auto lower = phi.map(geom::Point{apex});
  double vertex_err = std::abs(lower.x[0] + T);

  r.pass = outside == 0 && roundtrip < 1e-12 && slice_err < 1e-9 && vertex_err < 1e-6;
  r.details = {{"outside_count", outside},
               {"roundtrip_residual", roundtrip},
               {"hyperboloid_to_slice_error", slice_err},
               {"apex_to_lower_vertex_error", vertex_err}};
  return r;
}

JobResult propagator_identity(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 64);
  const double mass = jd(p, "mass", 0.0);
  const double a = jd(p, "spacing", 1.0);
  const double tol = jd(p, "tol", 1e-10);
  LatticeGrid grid(dim, n, a, mass);
  propagator::PropagatorKernel kernel(grid);

  auto zero = kernel.slice(0.0);
  double z = 0.0;
  for (double x : zero->v) z = std::max(z, std::abs(x));

  auto dt = kernel.slice_dt(0.0);
  double deltaval = 1.0 / grid.cell_volume();
  double derr = 0.0;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    double want = i == 0 ? deltaval : 0.0;
    derr = std::max(derr, std::abs(dt->v[i] - want));
  }
  derr /= deltaval;
  r.pass = z < tol && derr < tol;
  r.details = {{"dim", dim},       {"n", n},   {"mass", mass},
               {"slice0_max", z},  {"delta_rel_err", derr}};
  return r;
}

JobResult propagator_huygens(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int n = ji(p, "n", 32);
  const double L = jd(p, "L", 32.0);
  const double mass = jd(p, "mass", 0.0);
  const double t = jd(p, "t", 12.0);
  const double w = jd(p, "shell_width", 5.0);
  const double max_ratio = jd(p, "max_ratio", 0.08);
  LatticeGrid grid(3, n, L / n, mass);
  propagator::PropagatorKernel kernel(grid);
  auto rep = propagator::huygens_check(kernel, t, w, mass == 0.0);
  r.pass = mass == 0.0 ? rep.ratio < max_ratio : rep.ratio > jd(p, "min_ratio", 0.2);
  r.details = {{"n", n},       {"mass", mass},          {"t", t},
               {"shell_width", w}, {"interior_max", rep.interior_max},
               {"peak", rep.peak}, {"ratio", rep.ratio}};
  return r;
}

JobResult propagator_support(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const double L = jd(p, "L", 32.0);
  const double mass = jd(p, "mass", 0.0);
  auto ns = jvi(p, "n_values", {64, 128});
  double t_eval = jd(p, "t_eval", L / 8.0);
  std::vector<double> fractions;
  double adv_fraction = 0.0, w_used = 0.0;
  for (int n : ns) {
    LatticeGrid grid(2, n, L / n, mass);
    propagator::PropagatorKernel kernel(grid);
    LatticeField g0 = bump_field(grid, 1.5);
    propagator::SpacetimeSource src(grid, {0.0}, {g0});
    double w = jd(p, "shell_width", 4.0 * grid.spacing());
    w_used = w;
    auto ret = propagator::retarded_support_check(src, kernel, t_eval, w);
    fractions.push_back(ret.fraction);
    adv_fraction = propagator::advanced_control_check(src, kernel, t_eval, w).fraction;
  }
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < fractions.size(); ++i)
    if (fractions[i + 1] > fractions[i]) decreasing = false;
  r.pass = fractions.back() < jd(p, "max_fraction", 1e-3) && decreasing && adv_fraction > 0.05;
  r.details = {{"retarded_fractions", fractions},
               {"advanced_fraction", adv_fraction},
               {"shell_width", w_used},
               {"refinement_decreasing", decreasing},
               {"t_eval", t_eval}};
  return r;
}

JobResult spectral_mult_operator(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const double L = jd(p, "L", 16.0);
  auto ns = jvi(p, "n_values", {32, 64});
  const double max_drift = jd(p, "max_rel_drift", 0.10);
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (int sign : {+1, -1}) {
    std::vector<double> est;
    for (int n : ns) {
      LatticeGrid grid(dim, n, L / n, 0.0);
      LatticeField chi = bump_field(grid, L / 4.0);
      spectral::MultOperatorOptions opts;
      opts.seed = seed;
      auto res = spectral::mult_operator_norm_estimate(chi, sign, opts);
      est.push_back(res.estimate);
      rows.push_back({static_cast<double>(sign), static_cast<double>(n), res.estimate,
                      res.converged ? 1.0 : 0.0});
    }
    for (std::size_t i = 0; i + 1 < est.size(); ++i)
      if (std::abs(est[i + 1] - est[i]) > max_drift * est[i]) ok = false;
  }
  r.pass = ok;
  r.details = {{"L", L}, {"n_values", ns}};
  r.series["mult_operator"] = {{"sign", "n", "estimate", "converged"}, rows};
  return r;
}

JobResult spectral_hs(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const double L = jd(p, "L", 16.0);
  auto ns = jvi(p, "n_values", {32, 64});
  const double max_drift = jd(p, "max_rel_drift", 0.05);
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (int sign : {+1, -1}) {
    std::vector<double> vals;
    for (int n : ns) {
      LatticeGrid grid(dim, n, L / n, 0.0);
      LatticeField chi = bump_field(grid, L / 4.0);
      double hs = spectral::infrared_hs_norm(chi, sign);
      vals.push_back(hs);
      rows.push_back({static_cast<double>(sign), static_cast<double>(n), hs});
    }
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
      if (std::abs(vals[i + 1] - vals[i]) > max_drift * vals[i]) ok = false;
  }
  r.pass = ok;
  r.details = {{"L", L}, {"n_values", ns}};
  r.series["infrared_hs"] = {{"sign", "n", "hs_norm"}, rows};
  return r;
}

JobResult spectral_schur(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const double L = jd(p, "L", 16.0);
  auto ns = jvi(p, "n_values", {32, 64});
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (int sign : {+1, -1}) {
    std::vector<double> bounds;
    for (int n : ns) {
      LatticeGrid grid(dim, n, L / n, 0.0);
      LatticeField chi = bump_field(grid, L / 4.0);
      spectral::MultOperatorOptions opts;
      opts.seed = seed;
      auto rep = spectral::schur_bound_check(chi, sign, opts);
      ok &= rep.bound_holds;
      bounds.push_back(rep.geometric_mean);
      rows.push_back({static_cast<double>(sign), static_cast<double>(n), rep.row_sum_sup,
                      rep.col_sum_sup, rep.geometric_mean, rep.block_norm_estimate,
                      rep.bound_holds ? 1.0 : 0.0});
    }
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
      if (std::abs(bounds[i + 1] - bounds[i]) > jd(p, "max_rel_drift", 0.10) * bounds[i])
        ok = false;
  }
  r.pass = ok;
  r.details = {{"L", L}, {"n_values", ns}};
  r.series["schur"] = {
      {"sign", "n", "row_sum_sup", "col_sum_sup", "geometric_mean", "block_norm", "bound_holds"},
      rows};
  return r;
}

JobResult spectral_dilation(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 128);
  const double L = jd(p, "L", 16.0);
  LatticeGrid grid(dim, n, L / n, 0.0);
  // compact data in the admissible massless sector: any bump for f0 (the
  // |p|^{+1} norm ignores the zero mode), a zero-charge dipole for f1
  LatticeField f0 = bump_field(grid, L / 8.0);
  LatticeField f1 = dipole_field(grid, L / 12.0, L / 8.0);
  spectral::FieldPair f{f0, f1};
  auto norm_of = [&](const spectral::FieldPair& x) {
    // band-limited resampling leaves a tiny spurious mean; the sector
    // projection removes it before the singular norm
    double n0 = spectral::norm_pm(x.f0, +1);
    double n1 = spectral::norm_pm(remove_mean(x.f1), -1);
    return std::sqrt(n0 * n0 + n1 * n1);
  };
  double base = norm_of(f);
  double lam = jd(p, "lambda", 0.9);
  auto d = spectral::dilation(f, lam, true);
  double rel = std::abs(norm_of(d) - base) / base;

  std::vector<std::vector<double>> rows;
  double prev = 1e300;
  bool decreasing = true;
  for (double l : jvd(p, "lambda_series", {0.9, 0.95, 0.99})) {
    auto dl = spectral::dilation(f, l, true);
    spectral::FieldPair diff{dl.f0, dl.f1};
    add_scaled(diff.f0, f.f0, -1.0);
    add_scaled(diff.f1, f.f1, -1.0);
    double err = norm_of(diff);
    rows.push_back({l, err});
    if (err > prev) decreasing = false;
    prev = err;
  }
  r.pass = rel < jd(p, "norm_tol", 1e-3) && decreasing;
  r.details = {{"lambda", lam}, {"norm_rel_change", rel}, {"strong_convergence_decreasing", decreasing}};
  r.series["dilation_convergence"] = {{"lambda", "error"}, rows};
  return r;
}

JobResult spectral_diffeo(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 64);
  const double L = jd(p, "L", 16.0);
  const double slack = jd(p, "slack", 1.05);
  LatticeGrid grid(dim, n, L / n, 0.0);
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (double b : jvd(p, "b_values", {0.05, 0.1, 0.2})) {
    auto phi = spectral::radial_shear_with_b(dim, L / 4.0, b);
    spectral::MultOperatorOptions opts;
    opts.seed = seed;
    opts.max_iterations = 60;
    opts.rel_tol = 1e-8;
    for (int sign : {+1, -1}) {
      auto est = spectral::diffeo_operator_norm(grid, phi, sign, opts);
      double bound2 = std::pow(1.0 - phi.b_sup, -2.0 * dim) *
                      std::pow(1.0 + phi.b_sup, dim + (sign > 0 ? 1.0 : -1.0));
      bool holds = est.estimate * est.estimate <= bound2 * slack;
      ok &= holds;
      rows.push_back({b, static_cast<double>(sign), est.estimate,
                      std::sqrt(bound2), holds ? 1.0 : 0.0});
    }
  }
  // strong convergence to the identity along the family
  LatticeField f0 = bump_field(grid, L / 6.0);
  LatticeField f1 = dipole_field(grid, L / 12.0, L / 8.0);
  spectral::FieldPair f{f0, f1};
  double prev = 1e300;
  bool decreasing = true;
  for (double b : {0.2, 0.1, 0.05}) {
    auto phi = spectral::radial_shear_with_b(dim, L / 4.0, b);
    auto pb = spectral::diffeo_pullback(f, phi);
    add_scaled(pb.f0, f.f0, -1.0);
    add_scaled(pb.f1, f.f1, -1.0);
    double err = std::sqrt(std::pow(spectral::norm_pm(pb.f0, +1), 2) +
                           std::pow(spectral::norm_pm(remove_mean(pb.f1), -1), 2));
    if (err > prev) decreasing = false;
    prev = err;
  }
  ok &= decreasing;
  r.pass = ok;
  r.details = {{"slack", slack}, {"convergence_decreasing", decreasing}};
  r.series["diffeo_bounds"] = {{"b", "sign", "norm_estimate", "bound", "holds"}, rows};
  return r;
}

JobResult spectral_fractional(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int n = ji(p, "n", 128);
  const double L = jd(p, "L", 16.0);
  const double s = jd(p, "s", 0.5);
  LatticeGrid grid(2, n, L / n, 0.0);
  LatticeField f = bump_field(grid, 0.18 * L);
  const double q = 2.0 * std::numbers::pi * ji(p, "modulation", 6) / L;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    auto x = grid.torus_position(i);
    f.v[i] *= std::cos(q * x[0]);
  }
  auto id = spectral::fractional_identity(f, s);
  double ratio = id.lhs / id.rhs;
  double a12 = spectral::fractional_constant(1, 0.5);
  r.pass = std::abs(a12 - 2.0 * std::numbers::pi) < 1e-4 && ratio > jd(p, "ratio_min", 0.9) &&
           ratio < jd(p, "ratio_max", 1.1);
  r.details = {{"A_half_d1", a12}, {"lhs", id.lhs}, {"rhs", id.rhs},
               {"A_s", id.a_s},    {"ratio", ratio}};
  return r;
}

JobResult spectral_mollifier(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 64);
  const double a = jd(p, "spacing", 1.0 / 64.0);
  LatticeGrid grid(dim, n, a, 0.0);
  bool ok = true;
  json details = json::object();
  for (int nn : jvi(p, "schedule", {4, 8})) {
    LatticeField rho = spectral::mollifier(grid, nn);
    double total = 0.0;
    for (double v : rho.v) total += v;
    total *= grid.cell_volume();
    ok &= std::abs(total - 1.0) < 1e-12;
    // evenness and support
    for (std::int64_t i = 0; i < grid.sites(); ++i) {
      Coords c = grid.coords(i);
      Coords neg{0, 0, 0};
      for (int ax = 0; ax < dim; ++ax) neg[ax] = -c[ax];
      if (rho.v[i] != rho.v[grid.index(neg)]) ok = false;
      auto x = grid.torus_position(i);
      double rr = 0.0;
      for (int ax = 0; ax < dim; ++ax) rr += x[ax] * x[ax];
      if (std::sqrt(rr) > 1.0 / nn + 1e-12 && rho.v[i] != 0.0) ok = false;
    }
    details["n" + std::to_string(nn) + "_integral"] = total;
  }
  r.pass = ok;
  r.details = details;
  return r;
}

JobResult scalar_structure(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 32);
  const double mass = jd(p, "mass", 1.0);
  std::mt19937_64 rng(seed);
  LatticeGrid grid(dim, n, 0.5, mass);
  double worst_j = 0.0, worst_compat = 0.0, worst_iso = 0.0, worst_rev = 0.0, worst_psi = 0.0;
  for (int it = 0; it < 5; ++it) {
    auto f = scalar::CauchyDatum::make(grid, random_smooth_field(grid, rng),
                                       random_smooth_field(grid, rng));
    auto g = scalar::CauchyDatum::make(grid, random_smooth_field(grid, rng),
                                       random_smooth_field(grid, rng));
    auto jjf = scalar::complex_structure(scalar::complex_structure(f));
    add_scaled(jjf.f0, f.f0, 1.0);
    add_scaled(jjf.f1, f.f1, 1.0);
    worst_j = std::max(worst_j, scalar::energy_norm(jjf) / scalar::energy_norm(f));
    double compat = std::abs(scalar::symplectic_form(f, scalar::complex_structure(g)) -
                             scalar::energy_inner(f, g));
    worst_compat = std::max(worst_compat, compat / (scalar::energy_norm(f) * scalar::energy_norm(g)));
    worst_iso = std::max(worst_iso,
                         std::abs(scalar::energy_norm(scalar::complex_structure(f)) -
                                  scalar::energy_norm(f)) / scalar::energy_norm(f));
    auto tf = scalar::time_reversal(f), tg = scalar::time_reversal(g);
    worst_rev = std::max(worst_rev, std::abs(scalar::energy_inner(tf, tg) -
                                             scalar::energy_inner(f, g)));
    worst_rev = std::max(worst_rev, std::abs(scalar::symplectic_form(tf, tg) +
                                             scalar::symplectic_form(f, g)));
    auto pf = scalar::psi(f);
    double pairing = inner_l2(pf.f0, g.f0) + inner_l2(pf.f1, g.f1);
    worst_psi = std::max(worst_psi, std::abs(pairing - scalar::symplectic_form(f, g)));
  }
  r.pass = worst_j < 1e-12 && worst_compat < 1e-12 && worst_iso < 1e-12 && worst_rev < 1e-10 &&
           worst_psi < 1e-10;
  r.details = {{"J_squared_residual", worst_j},
               {"sigma_J_compatibility", worst_compat},
               {"J_isometry_residual", worst_iso},
               {"time_reversal_residual", worst_rev},
               {"psi_pairing_residual", worst_psi}};
  return r;
}

JobResult scalar_duality(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 16);
  const double mass = jd(p, "mass", 1.0);
  const double tol = jd(p, "tol", 1e-8);
  LatticeGrid grid(dim, n, 1.0, mass);
  scalar::Ambient amb(grid);
  Mask ambient = box_mask(grid, {}, jd(p, "box_half", n / 2.0 - 1.5));
  Mask region = ball_mask(grid, {}, jd(p, "ball_radius", n / 5.0));
  auto rep = scalar::duality_check(amb, region, ambient);
  r.pass = rep.gap_forward < tol && rep.gap_dual < tol;
  r.details = {{"dim", dim},
               {"n", n},
               {"mass", mass},
               {"gap_forward", rep.gap_forward},
               {"gap_dual", rep.gap_dual},
               {"dim_ambient", rep.dim_ambient},
               {"dim_region", rep.dim_region},
               {"dim_complement_space", rep.dim_complement_space},
               {"note", rep.note}};
  return r;
}

JobResult scalar_outer_regularity(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 16);
  const double mass = jd(p, "mass", 1.0);
  LatticeGrid grid(dim, n, 1.0, mass);
  scalar::Ambient amb(grid);
  Mask region = ball_mask(grid, {}, jd(p, "ball_radius", 2.2));
  std::vector<Mask> neighborhoods;
  std::vector<int> rings = jvi(p, "rings", {4, 3, 2, 1});
  for (int k : rings) neighborhoods.push_back(inflate(grid, region, k));
  auto rows = scalar::outer_regularity_scan(amb, region, neighborhoods, full_mask(grid));

  bool ok = true;
  std::vector<std::vector<double>> series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    series.push_back({static_cast<double>(rings[i]), static_cast<double>(row.dim),
                      static_cast<double>(row.dim_excess_vs_base), row.sup_gap_vs_base,
                      row.excess_energy_vs_base, row.gap_vs_closure});
    if (i > 0) {
      ok &= rows[i].excess_energy_vs_base <= rows[i - 1].excess_energy_vs_base + 1e-9;
      ok &= rows[i].dim_excess_vs_base <= rows[i - 1].dim_excess_vs_base;
      ok &= rows[i].gap_vs_closure <= rows[i - 1].gap_vs_closure + 1e-9;
    }
  }
  // the family shrinks to the one-ring closure: zero gap against it, and a
  // positive documented floor against the base
  ok &= rows.back().gap_vs_closure < 1e-8;
  ok &= rows.back().dim_excess_vs_base > 0;
  r.pass = ok;
  r.details = {{"floor_dim_excess", rows.back().dim_excess_vs_base},
               {"floor_excess_energy", rows.back().excess_energy_vs_base},
               {"closure_gap_at_one_ring", rows.back().gap_vs_closure}};
  r.series["outer_regularity"] = {
      {"rings", "dim", "dim_excess", "sup_gap", "excess_energy", "gap_vs_closure"}, series};
  return r;
}

JobResult scalar_mollifier_convergence(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 64);
  const double a = jd(p, "spacing", 1.0 / 64.0);
  // massive grid: compact supports survive the sector conventions verbatim
  LatticeGrid grid(dim, n, a, jd(p, "mass", 1.0));
  scalar::Ambient amb(grid);
  // band-limited compact datum
  LatticeField f0 = bump_field(grid, jd(p, "r0", 0.12));
  LatticeField f1 = bump_field(grid, jd(p, "r1", 0.10));
  auto f = scalar::CauchyDatum::make(grid, std::move(f0), std::move(f1));
  auto rows = scalar::mollifier_convergence(amb, f, jvi(p, "schedule", {4, 8, 16}));
  bool ok = true;
  std::vector<std::vector<double>> series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    series.push_back({static_cast<double>(rows[i].n), rows[i].error,
                      rows[i].support_ok ? 1.0 : 0.0});
    ok &= rows[i].support_ok;
    if (i > 0) ok &= rows[i].error < rows[i - 1].error;
  }
  r.pass = ok;
  r.details = {{"schedule_length", rows.size()}};
  r.series["mollifier_convergence"] = {{"n", "energy_error", "support_ok"}, series};
  return r;
}

JobResult scalar_density(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 32);
  const double mass = jd(p, "mass", 1.0);
  const double a = jd(p, "spacing", 1.0);
  LatticeGrid grid(dim, n, a, mass);
  scalar::Ambient amb(grid);
  propagator::PropagatorKernel kernel(grid);
  std::mt19937_64 rng(seed);

  // family of sources supported inside the forward cone
  std::vector<propagator::SpacetimeSource> family;
  const int family_size = ji(p, "family_size", 32);
  std::uniform_real_distribution<double> ushift(-1.0, 1.0);
  for (int i = 0; i < family_size; ++i) {
    double t = 2.0 * a + (i % 4) * a;
    double rad = 0.5 * t;
    LatticeField slice = bump_field(grid, rad);
    // translate the bump within the cone slice
    Coords shift{static_cast<std::int64_t>(std::lround(ushift(rng) * rad / (2.0 * a))),
                 static_cast<std::int64_t>(std::lround(ushift(rng) * rad / (2.0 * a))), 0};
    LatticeField moved(grid);
    for (std::int64_t s = 0; s < grid.sites(); ++s) {
      Coords c = grid.coords(s);
      for (int ax = 0; ax < dim; ++ax) c[ax] -= shift[ax];
      moved.v[s] = slice.v[grid.index(c)];
    }
    for (std::int64_t s = 0; s < grid.sites(); ++s) moved.v[s] *= 1.0 + 0.3 * ushift(rng);
    family.emplace_back(grid, std::vector<double>{t}, std::vector<LatticeField>{moved});
  }
  std::vector<scalar::CauchyDatum> targets;
  const int ntargets = ji(p, "targets", 3);
  for (int i = 0; i < ntargets; ++i)
    targets.push_back(scalar::CauchyDatum::make(grid, random_smooth_field(grid, rng, 0.15),
                                                random_smooth_field(grid, rng, 0.15)));
  auto schedule = jvi(p, "schedule", {8, 16, 32});
  auto rep = scalar::forward_cone_density_residual(amb, targets, family, kernel, schedule);
  bool ok = true;
  std::vector<std::vector<double>> series;
  for (std::size_t t = 0; t < rep.residuals.size(); ++t) {
    for (std::size_t k = 0; k < rep.residuals[t].size(); ++k) {
      series.push_back({static_cast<double>(t), static_cast<double>(rep.family_sizes[k]),
                        rep.residuals[t][k]});
      if (k > 0) ok &= rep.residuals[t][k] <= rep.residuals[t][k - 1] + 1e-10;
    }
  }
  r.pass = ok;
  r.details = {{"family_size", family_size}, {"targets", ntargets}, {"mass", mass}};
  r.series["density_residuals"] = {{"target", "family_size", "residual"}, series};
  return r;
}

JobResult em_structure(const json& p, std::uint64_t seed) {
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 16);
  std::mt19937_64 rng(seed);
  LatticeGrid grid(dim, n, 1.0, 0.0);
  const double tol = jd(p, "tol", 1e-10);

  // random transverse datum
  em::VectorField a, e;
  for (int ax = 0; ax < dim; ++ax) {
    a.push_back(random_smooth_field(grid, rng));
    e.push_back(random_smooth_field(grid, rng));
  }
  e = em::transverse_project(e);
  auto u = em::EMDatum::make(grid, a, e);

  // gauge shift by a gradient
  LatticeField phi = random_smooth_field(grid, rng);
  em::VectorField a2 = a;
  auto gphi = em::gradient(phi);
  for (int ax = 0; ax < dim; ++ax) add_scaled(a2[ax], gphi[ax], 1.0);
  auto u2 = em::EMDatum::make(grid, a2, e);

  em::VectorField av, ev;
  for (int ax = 0; ax < dim; ++ax) {
    av.push_back(random_smooth_field(grid, rng));
    ev.push_back(random_smooth_field(grid, rng));
  }
  ev = em::transverse_project(ev);
  auto v = em::EMDatum::make(grid, av, ev);

  double base_n = em::em_norm(u);
  double gauge_inner = std::abs(em::em_inner(u, v) - em::em_inner(u2, v));
  double gauge_sympl = std::abs(em::em_symplectic(u, v) - em::em_symplectic(u2, v));
  bool support_equal = em::gauge_class_support(u) == em::gauge_class_support(u2);
  // projector identities
  auto pt = em::transverse_project(a);
  auto pt2 = em::transverse_project(pt);
  double idem = 0.0, divres = 0.0, kergrad = 0.0;
  auto div = em::divergence(em::transverse_project(a));
  for (int ax = 0; ax < dim; ++ax) {
    for (std::int64_t i = 0; i < grid.sites(); ++i)
      idem = std::max(idem, std::abs(pt[ax].v[i] - pt2[ax].v[i]));
  }
  for (std::int64_t i = 0; i < grid.sites(); ++i) divres = std::max(divres, std::abs(div.v[i]));
  auto ptg = em::transverse_project(gphi);
  for (int ax = 0; ax < dim; ++ax)
    for (std::int64_t i = 0; i < grid.sites(); ++i)
      kergrad = std::max(kergrad, std::abs(ptg[ax].v[i]));

  // pure gauge datum has zero class
  auto pure = em::EMDatum::make(grid, gphi, em::VectorField(dim, LatticeField(grid)));
  double pure_norm = em::em_norm(pure);
  bool pure_supp_empty = em::gauge_class_support(pure).empty();

  r.pass = gauge_inner < tol * std::max(1.0, base_n) && gauge_sympl < tol && support_equal &&
           idem < 1e-12 && divres < 1e-10 && kergrad < 1e-11 && pure_norm < tol &&
           pure_supp_empty;
  r.details = {{"gauge_inner_shift", gauge_inner},
               {"gauge_sympl_shift", gauge_sympl},
               {"support_gauge_invariant", support_equal},
               {"projector_idempotence", idem},
               {"divergence_of_transverse", divres},
               {"projector_kills_gradients", kergrad},
               {"pure_gauge_norm", pure_norm}};
  return r;
}

JobResult em_duality(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int dim = ji(p, "dim", 2);
  const int n = ji(p, "n", 16);
  const double tol = jd(p, "tol", 1e-6);
  LatticeGrid grid(dim, n, 1.0, 0.0);
  em::Ambient amb(grid);
  Mask ambient = box_mask(grid, {}, jd(p, "box_half", n / 2.0 - 1.5));
  Mask region = ball_mask(grid, {}, jd(p, "ball_radius", dim == 2 ? n / 5.0 : n / 6.0));
  auto rep = em::em_duality_check(amb, region, ambient);
  r.pass = rep.gap_forward < tol && rep.gap_dual < tol;
  r.details = {{"dim", dim},
               {"n", n},
               {"gap_forward", rep.gap_forward},
               {"gap_dual", rep.gap_dual},
               {"dim_ambient", rep.dim_ambient},
               {"dim_region", rep.dim_region},
               {"region_edges", rep.region_edges},
               {"complement_edges", rep.complement_edges},
               {"straddling_edges", rep.straddling_edges},
               {"note", rep.note}};
  return r;
}

JobResult em_boost_region(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int n = ji(p, "n", 32);
  const double T = jd(p, "T", 12.0);
  const double eps = jd(p, "eps", 0.5);
  auto vdir = jvd(p, "v", {1.0, 0.0});
  const double tol = jd(p, "tol", 1e-6);
  LatticeGrid grid(2, n, jd(p, "spacing", 0.5), 0.0);
  em::Ambient amb(grid);
  auto rep = em::boost_region_duality(amb, 1.0 / T, vdir, eps, T);
  r.pass = rep.mask_ok && rep.duality.gap_forward < tol && rep.duality.gap_dual < tol &&
           rep.chi_split_remainder < tol;
  r.details = {{"n", n},
               {"T", T},
               {"eps", eps},
               {"mask_sites", rep.mask_sites},
               {"basis_sites", rep.basis_sites},
               {"gap_forward", rep.duality.gap_forward},
               {"gap_dual", rep.duality.gap_dual},
               {"chi_split_remainder", rep.chi_split_remainder}};
  return r;
}

JobResult fock_ccr(const json& p, std::uint64_t seed) {
  JobResult r;
  const int nmodes = ji(p, "n_modes", 2);
  const int k = ji(p, "cutoff", 12);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  fock::FockContext ctx(nmodes, k);

  auto rand_vec = [&](double scale) {
    fock::CVec f(nmodes);
    for (int i = 0; i < nmodes; ++i) f(i) = scale * std::complex<double>(dist(rng), dist(rng));
    return fock::CVec(f / std::max(1.0, f.norm()));
  };

  double worst_2pt = 0.0, worst_comm = 0.0;
  for (int it = 0; it < 4; ++it) {
    fock::CVec f = rand_vec(1.0), g = rand_vec(1.0);
    auto phif = ctx.field_operator(f);
    auto phig = ctx.field_operator(g);
    auto two = ctx.vacuum_expectation(phif * phig);
    worst_2pt = std::max(worst_2pt, std::abs(two - fock::pairing(f, g)));
    // commutator on low occupation states
    fock::CMat comm = phif * phig - phig * phif;
    fock::CMat pl = ctx.low_block(k - 2);
    fock::CMat want = std::complex<double>(0.0, 2.0 * fock::sympl(f, g)) *
                      fock::CMat::Identity(ctx.dim(), ctx.dim());
    worst_comm = std::max(worst_comm, ((pl * (comm - want) * pl).norm()));
  }

  fock::CVec f1 = rand_vec(1.0);
  double vac = std::abs(ctx.vacuum_expectation(ctx.weyl(f1)) -
                        std::exp(-0.5 * fock::real_inner(f1, f1)));

  // Weyl relation residual decreasing in the cutoff
  fock::CVec fa = rand_vec(0.5), fb = rand_vec(0.5);
  std::vector<std::vector<double>> rows;
  double prev = 1e300;
  bool decreasing = true;
  for (int kk : jvi(p, "cutoffs", {8, 12, 16})) {
    fock::FockContext cc(nmodes, kk);
    double res = fock::weyl_relation_residual(cc, fa, fb);
    rows.push_back({static_cast<double>(kk), res});
    if (res > prev) decreasing = false;
    prev = res;
  }

  auto crep = fock::commutation_vs_symplectic(ctx, fa, fb);
  double cerr = std::abs(crep.measured - crep.predicted);

  r.pass = worst_2pt < 1e-10 && worst_comm < 1e-8 && vac < jd(p, "vacuum_tol", 1e-6) &&
           decreasing && cerr < jd(p, "commutation_tol", 1e-5);
  r.details = {{"two_point_residual", worst_2pt},
               {"ccr_commutator_residual", worst_comm},
               {"weyl_vacuum_residual", vac},
               {"relation_residual_decreasing", decreasing},
               {"commutation_prediction_error", cerr}};
  r.series["weyl_relation"] = {{"cutoff", "residual"}, rows};
  return r;
}

JobResult fock_commutant(const json& p, std::uint64_t seed) {
  (void)seed;
  JobResult r;
  const int k = ji(p, "cutoff", 10);
  fock::FockContext ctx(1, k);
  fock::CVec e1(1);
  e1 << std::complex<double>(0.55, 0.0);

  fock::RealSubspace h;
  h.vectors.push_back(e1);
  h.vectors.push_back(std::complex<double>(0.0, 1.0) * e1);
  fock::RealSubspace v;
  v.vectors.push_back(e1);

  auto rep = fock::relative_commutant_dims(ctx, v, h);
  bool worked_case = rep.difference == 0;

  fock::RealSubspace vfull = h;
  auto rep2 = fock::relative_commutant_dims(ctx, vfull, h);
  bool trivial_case = rep2.dim_commutant == 1 && rep2.dim_predicted == 1;

  r.pass = worked_case && trivial_case;
  r.details = {{"dim_commutant", rep.dim_commutant},
               {"dim_predicted", rep.dim_predicted},
               {"difference", rep.difference},
               {"constraint_condition", rep.constraint_condition},
               {"full_subspace_dims", {rep2.dim_commutant, rep2.dim_predicted}}};
  return r;
}

const std::map<std::string, Handler>& handler_registry() {
  static const std::map<std::string, Handler> reg = {
      {"geometry.interval_probes", geometry_interval_probes},
      {"geometry.complement_probes", geometry_complement_probes},
      {"geometry.ray_inversion", geometry_ray_inversion},
      {"geometry.conformal", geometry_conformal},
      {"propagator.identity", propagator_identity},
      {"propagator.huygens", propagator_huygens},
      {"propagator.retarded_support", propagator_support},
      {"spectral.mult_operator", spectral_mult_operator},
      {"spectral.infrared_hs", spectral_hs},
      {"spectral.schur", spectral_schur},
      {"spectral.dilation", spectral_dilation},
      {"spectral.diffeo", spectral_diffeo},
      {"spectral.fractional", spectral_fractional},
      {"spectral.mollifier", spectral_mollifier},
      {"scalar.structure", scalar_structure},
      {"scalar.duality", scalar_duality},
      {"scalar.outer_regularity", scalar_outer_regularity},
      {"scalar.mollifier_convergence", scalar_mollifier_convergence},
      {"scalar.forward_cone_density", scalar_density},
      {"em.structure", em_structure},
      {"em.duality", em_duality},
      {"em.boost_region", em_boost_region},
      {"fock.ccr", fock_ccr},
      {"fock.commutant", fock_commutant},
  };
  return reg;
}

}  // namespace

Campaign parse_campaign(const json& j) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  Campaign c;
  if (!j.contains("name") || !j.at("name").is_string())
    throw SchemaError("config requires a string 'name'");
  c.name = j.at("name").get<std::string>();
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw SchemaError("'seed' must be an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (!j.contains("jobs") || !j.at("jobs").is_array())
    throw SchemaError("config requires an array 'jobs'");
  for (const auto& item : j.at("jobs")) {
    if (!item.is_object()) throw SchemaError("each job must be an object");
    if (!item.contains("module") || !item.at("module").is_string())
      throw SchemaError("each job requires a string 'module'");
    if (!item.contains("operation") || !item.at("operation").is_string())
      throw SchemaError("each job requires a string 'operation'");
    Job job;
    job.module = item.at("module").get<std::string>();
    job.operation = item.at("operation").get<std::string>();
    job.params = item.contains("params") ? item.at("params") : json::object();
    if (!job.params.is_object()) throw SchemaError("'params' must be an object");
    std::string key = job.module + "." + job.operation;
    if (!handler_registry().count(key))
      throw SchemaError("unknown operation '" + key + "'");
    c.jobs.push_back(std::move(job));
  }
  return c;
}

Campaign load_campaign(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_campaign(j);
}

report::json config_schema() {
  json ops = json::array();
  for (const auto& [key, fn] : handler_registry()) {
    (void)fn;
    ops.push_back(key);
  }
  return json{
      {"$schema", "http://json-schema.org/draft-07/schema#"},
      {"title", "qdual campaign config"},
      {"type", "object"},
      {"required", {"name", "jobs"}},
      {"properties",
       {{"name", {{"type", "string"}}},
        {"seed", {{"type", "integer"}, {"default", 1}}},
        {"output_dir", {{"type", "string"}}},
        {"jobs",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"module", "operation"}},
            {"properties",
             {{"module", {{"type", "string"}}},
              {"operation", {{"type", "string"}}},
              {"params", {{"type", "object"}}}}}}}}}}},
      {"known_operations", ops}};
}

const std::vector<std::pair<std::string, report::json>>& canned_suites() {
  static const std::vector<std::pair<std::string, report::json>> suites = [] {
    std::vector<std::pair<std::string, report::json>> s;
    auto mk = [](const std::string& name, std::initializer_list<json> jobs) {
      json j{{"name", name}, {"seed", 1}, {"jobs", json::array()}};
      for (const auto& job : jobs) j["jobs"].push_back(job);
      return j;
    };
    s.emplace_back("scalar-duality",
                   mk("scalar-duality",
                      {json{{"module", "scalar"}, {"operation", "duality"},
                            {"params", {{"dim", 2}, {"n", 16}, {"mass", 1.0}}}},
                       json{{"module", "scalar"}, {"operation", "duality"},
                            {"params", {{"dim", 2}, {"n", 16}, {"mass", 0.0}}}}}));
    s.emplace_back("em-duality",
                   mk("em-duality",
                      {json{{"module", "em"}, {"operation", "structure"},
                            {"params", {{"dim", 2}, {"n", 16}}}},
                       json{{"module", "em"}, {"operation", "duality"},
                            {"params", {{"dim", 2}, {"n", 16}}}}}));
    s.emplace_back("boost-region",
                   mk("boost-region",
                      {json{{"module", "em"}, {"operation", "boost_region"},
                            {"params", {{"n", 32}, {"T", 12.0}, {"eps", 0.5}}}}}));
    s.emplace_back("mollifier",
                   mk("mollifier",
                      {json{{"module", "spectral"}, {"operation", "mollifier"}, {"params", json::object()}},
                       json{{"module", "scalar"}, {"operation", "mollifier_convergence"},
                            {"params", {{"schedule", {4, 8, 16}}}}}}));
    s.emplace_back("schur",
                   mk("schur",
                      {json{{"module", "spectral"}, {"operation", "schur"},
                            {"params", {{"n_values", {32, 64}}}}},
                       json{{"module", "spectral"}, {"operation", "mult_operator"},
                            {"params", {{"n_values", {32, 64}}}}},
                       json{{"module", "spectral"}, {"operation", "infrared_hs"},
                            {"params", {{"n_values", {32, 64}}}}}}));
    s.emplace_back("huygens",
                   mk("huygens",
                      {json{{"module", "propagator"}, {"operation", "huygens"},
                            {"params", {{"mass", 0.0}, {"n", 32}, {"t", 12.0}, {"max_ratio", 0.12}}}},
                       json{{"module", "propagator"}, {"operation", "huygens"},
                            {"params", {{"mass", 2.0}, {"n", 32}, {"t", 12.0}, {"min_ratio", 0.2}}}}}));
    s.emplace_back("fock-ccr",
                   mk("fock-ccr",
                      {json{{"module", "fock"}, {"operation", "ccr"}, {"params", json::object()}},
                       json{{"module", "fock"}, {"operation", "commutant"}, {"params", json::object()}}}));
    s.emplace_back("outer-regularity",
                   mk("outer-regularity",
                      {json{{"module", "scalar"}, {"operation", "outer_regularity"},
                            {"params", {{"dim", 2}, {"n", 16}}}}}));
    return s;
  }();
  return suites;
}

JobResult run_job(const Job& job, std::uint64_t seed) {
  const std::string key = job.module + "." + job.operation;
  auto it = handler_registry().find(key);
  if (it == handler_registry().end()) throw SchemaError("unknown operation '" + key + "'");
  try {
    return it->second(job.params, seed);
  } catch (const BudgetError& e) {
    JobResult r;
    r.pass = false;
    r.budget_refused = true;
    r.details = {{"budget_refusal", e.what()}};
    return r;
  }
}

int run(const Campaign& campaign, const std::filesystem::path& outdir, int parallel_jobs) {
  std::filesystem::create_directories(outdir);
  const int njobs = static_cast<int>(campaign.jobs.size());
  std::vector<JobResult> results(njobs);

  auto worker = [&](int idx) {
    const Job& job = campaign.jobs[idx];
    std::uint64_t seed = campaign.seed * 0x9e3779b97f4a7c15ull + 0x100001b3ull * (idx + 1);
    JobResult res = run_job(job, seed);
    res.name = job.module + "." + job.operation + "#" + std::to_string(idx);
    results[idx] = std::move(res);
  };

  if (parallel_jobs <= 1) {
    for (int i = 0; i < njobs; ++i) worker(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> pool;
    for (int t = 0; t < parallel_jobs; ++t) {
      pool.push_back(std::async(std::launch::async, [&] {
        for (int i = next.fetch_add(1); i < njobs; i = next.fetch_add(1)) worker(i);
      }));
    }
    for (auto& f : pool) f.get();
  }

  Summary summary;
  summary.total = njobs;
  for (int i = 0; i < njobs; ++i) {
    const auto& res = results[i];
    json j{{"job", res.name},
           {"module", campaign.jobs[i].module},
           {"operation", campaign.jobs[i].operation},
           {"parameters", campaign.jobs[i].params},
           {"pass", res.pass},
           {"details", res.details}};
    report::write_json(outdir / (res.name + ".json"), j);
    for (const auto& [sname, data] : res.series)
      report::write_csv(outdir / (res.name + "." + sname + ".csv"), data.first, data.second);
    if (res.pass)
      ++summary.passed;
    else {
      ++summary.failed;
      summary.failed_jobs.push_back(res.name);
    }
    summary.budget_refused |= res.budget_refused;
  }
  json sj{{"campaign", campaign.name},
          {"seed", campaign.seed},
          {"total", summary.total},
          {"passed", summary.passed},
          {"failed", summary.failed},
          {"failed_jobs", summary.failed_jobs}};
  report::write_json(outdir / "campaign_summary.json", sj);
  if (summary.budget_refused) return 3;
  return summary.failed == 0 ? 0 : 1;
}

}  // namespace qdual::campaign
