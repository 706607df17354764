#include "qdual/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdual::geom {

namespace {

void check_same_dim(const Point& a, const Point& b) {
  if (a.x.size() != b.x.size()) throw std::invalid_argument("point dimension mismatch");
}

double sq(double v) { return v * v; }

double spatial_dist(const std::vector<double>& a, const Point& p) {
  double s = 0.0;
  for (std::size_t i = 1; i < p.x.size(); ++i) {
    double c = i - 1 < a.size() ? a[i - 1] : 0.0;
    s += sq(p.x[i] - c);
  }
  return std::sqrt(s);
}

}  // namespace

double Point::minkowski_sq() const {
  double s = sq(x[0]);
  for (std::size_t i = 1; i < x.size(); ++i) s -= sq(x[i]);
  return s;
}

double Point::spatial_norm() const {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += sq(x[i]);
  return std::sqrt(s);
}

double Point::scale() const {
  double m = 1.0;
  for (double c : x) m = std::max(m, std::abs(c));
  return m;
}

Point operator+(const Point& a, const Point& b) {
  check_same_dim(a, b);
  Point r = a;
  for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] += b.x[i];
  return r;
}

Point operator-(const Point& a, const Point& b) {
  check_same_dim(a, b);
  Point r = a;
  for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] -= b.x[i];
  return r;
}

Point operator*(double s, const Point& a) {
  Point r = a;
  for (auto& c : r.x) c *= s;
  return r;
}

IntervalKind interval_kind(const Point& x, const Point& y, double tau) {
  check_same_dim(x, y);
  Point d = x - y;
  double q = d.minkowski_sq();
  double tol = tau * sq(std::max(x.scale(), y.scale()));
  if (std::abs(q) <= tol) return IntervalKind::Lightlike;
  return q > 0 ? IntervalKind::Timelike : IntervalKind::Spacelike;
}

// --- regions ---------------------------------------------------------------

Region Region::forward_cone(Point apex) { return Region{ForwardCone{std::move(apex)}}; }

Region Region::double_cone(Point lower, Point upper) {
  check_same_dim(lower, upper);
  Point d = upper - lower;
  if (d.minkowski_sq() <= 0.0 || d.t() <= 0.0)
    throw std::invalid_argument("double cone vertices must be timelike with upper later");
  return Region{DoubleCone{std::move(lower), std::move(upper)}};
}

Region Region::diamond(SurfacePatch patch) { return Region{DiamondOverBase{std::move(patch)}}; }

Region Region::boost_completion(double c, std::vector<double> v, double eps) {
  if (c <= 0.0) throw std::invalid_argument("boost region needs c > 0");
  if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("boost region needs eps in (0,1)");
  return Region{BoostRegionCompletion{c, std::move(v), eps}};
}

Region Region::empty() { return Region{EmptyRegion{}}; }

namespace {

bool in_forward_cone(const Point& apex, const Point& x, double tau) {
  Point d = x - apex;
  double tol = tau * sq(std::max(apex.scale(), x.scale()));
  return d.t() > 0.0 && d.minkowski_sq() > tol;
}

bool in_backward_cone(const Point& apex, const Point& x, double tau) {
  Point d = apex - x;
  double tol = tau * sq(std::max(apex.scale(), x.scale()));
  return d.t() > 0.0 && d.minkowski_sq() > tol;
}

// Dependency-ball test on a flat slice: does the closed ball of radius `rad`
// around the spatial point `y` lie inside the base set? Closed forms for
// balls and their complements; direction sampling for transported caps.
bool flat_shadow_contains(const Base& base, const std::vector<double>& y, double rad,
                          const std::function<bool(const std::vector<double>&)>& cap_pred,
                          double tau);

bool cap_closed_sample(const std::function<bool(const std::vector<double>&)>& pred,
                       const std::vector<double>& y, double rad, bool want_inside) {
  // Samples the sphere |z - y| = rad (plus the center) and checks the
  // predicate. Documented sampled check; downstream uses are lattice masks
  // and probe points.
  const int dim = static_cast<int>(y.size());
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (dim == 2) {
    const int nd = 96;
    for (int i = 0; i < nd; ++i) {
      double th = 2.0 * std::numbers::pi * i / nd;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    const int nth = 24, nph = 48;
    for (int i = 0; i <= nth; ++i) {
      double th = std::numbers::pi * i / nth;
      for (int j = 0; j < nph; ++j) {
        double ph = 2.0 * std::numbers::pi * j / nph;
        dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
      }
    }
  }
  if (pred(y) != want_inside) return false;
  for (const auto& u : dirs) {
    std::vector<double> z = y;
    for (int i = 0; i < dim; ++i) z[i] += rad * u[i];
    if (pred(z) != want_inside) return false;
  }
  return true;
}

bool flat_shadow_contains(const Base& base, const std::vector<double>& y, double rad,
                          const std::function<bool(const std::vector<double>&)>& cap_pred,
                          double tau) {
  if (std::holds_alternative<BallBase>(base)) {
    const auto& b = std::get<BallBase>(base);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double c = i < b.center.size() ? b.center[i] : 0.0;
      s += sq(y[i] - c);
    }
    return std::sqrt(s) + rad < b.radius - tau * std::max(1.0, b.radius);
  }
  if (std::holds_alternative<FullSurfaceBase>(base)) return true;
  if (std::holds_alternative<std::shared_ptr<ComplementBase>>(base)) {
    const auto& comp = *std::get<std::shared_ptr<ComplementBase>>(base);
    if (std::holds_alternative<BallBase>(comp.inner)) {
      const auto& b = std::get<BallBase>(comp.inner);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        double c = i < b.center.size() ? b.center[i] : 0.0;
        s += sq(y[i] - c);
      }
      return std::sqrt(s) - rad > b.radius + tau * std::max(1.0, b.radius);
    }
    if (std::holds_alternative<std::shared_ptr<ComplementBase>>(comp.inner)) {
      // Complement of a complement: same predicate as the interior of the
      // closure of the inner base.
      const auto& inner = *std::get<std::shared_ptr<ComplementBase>>(comp.inner);
      return flat_shadow_contains(inner.inner, y, rad, cap_pred, tau);
    }
    if (std::holds_alternative<BoostCapBase>(comp.inner)) {
      if (!cap_pred) throw std::invalid_argument("cap predicate missing");
      return cap_closed_sample(cap_pred, y, rad, false);
    }
    throw std::invalid_argument("unsupported complement base");
  }
  if (std::holds_alternative<BoostCapBase>(base)) {
    if (!cap_pred) throw std::invalid_argument("cap predicate missing");
    return cap_closed_sample(cap_pred, y, rad, true);
  }
  throw std::invalid_argument("mask bases have no continuum membership predicate");
}

bool diamond_contains(const DiamondOverBase& dob, const Point& x, double tau);

// Membership in the diamond over a hyperboloid patch, via conformal
// transport to the flat picture.
bool hyperboloid_diamond_contains(double c, const Base& base, const Point& x, double tau) {
  ConformalMap phi(1.0 / c, x.dim());
  // phi maps V+ to O1 and the hyperboloid to the flat basis B1.
  Point q;
  try {
    q = phi.map(x);
  } catch (const std::domain_error&) {
    return false;  // x not in the domain of the inversion chart
  }
  // Must land inside O1 at all.
  Region o1 = phi.image_cone();
  if (!contains(o1, q, tau)) return false;
  const double T = phi.T();
  double off = std::abs(q.t() + T / 2.0);
  std::vector<double> y(q.x.begin() + 1, q.x.end());
  // Inside the flat ball B1 with the time offset accounted for.
  double ny = 0.0;
  for (double yi : y) ny += sq(yi);
  if (std::sqrt(ny) + off >= T / 2.0 - tau * std::max(1.0, T)) return false;

  std::function<bool(const std::vector<double>&)> cap_pred;
  if (std::holds_alternative<BoostCapBase>(base) ||
      (std::holds_alternative<std::shared_ptr<ComplementBase>>(base) &&
       std::holds_alternative<BoostCapBase>(
           std::get<std::shared_ptr<ComplementBase>>(base)->inner))) {
    const BoostCapBase* cap = std::holds_alternative<BoostCapBase>(base)
                                  ? &std::get<BoostCapBase>(base)
                                  : &std::get<BoostCapBase>(
                                        std::get<std::shared_ptr<ComplementBase>>(base)->inner);
    cap_pred = [&phi, cap, c, tau](const std::vector<double>& z) {
      std::vector<double> ev(z.size() + 1);
      ev[0] = -phi.T() / 2.0;
      std::copy(z.begin(), z.end(), ev.begin() + 1);
      double nz = 0.0;
      for (double zi : z) nz += sq(zi);
      if (std::sqrt(nz) >= phi.T() / 2.0) return false;
      Point back = phi.inverse(Point(ev));
      try {
        return boost_cap_contains(c, cap->v, cap->eps, back, 1e-9);
      } catch (const std::domain_error&) {
        return false;
      }
    };
  } else if (std::holds_alternative<BallBase>(base) ||
             std::holds_alternative<std::shared_ptr<ComplementBase>>(base)) {
    // Ball bases on the hyperboloid are defined by the spatial-coordinate
    // chart |spatial(x) - center| < radius; transported pointwise.
    const Base* inner = &base;
    bool complemented = false;
    if (std::holds_alternative<std::shared_ptr<ComplementBase>>(base)) {
      inner = &std::get<std::shared_ptr<ComplementBase>>(base)->inner;
      complemented = true;
    }
    if (!std::holds_alternative<BallBase>(*inner))
      throw std::invalid_argument("unsupported hyperboloid base");
    const auto ball = std::get<BallBase>(*inner);
    auto pred = [&phi, ball, complemented](const std::vector<double>& z) {
      std::vector<double> ev(z.size() + 1);
      ev[0] = -phi.T() / 2.0;
      std::copy(z.begin(), z.end(), ev.begin() + 1);
      double nz = 0.0;
      for (double zi : z) nz += sq(zi);
      if (std::sqrt(nz) >= phi.T() / 2.0) return false;
      Point back = phi.inverse(Point(ev));
      bool in = spatial_dist(ball.center, back) < ball.radius;
      return complemented ? !in : in;
    };
    return cap_closed_sample(pred, y, off, true);
  } else if (std::holds_alternative<FullSurfaceBase>(base)) {
    // Causal completion of the whole hyperboloid is the forward cone.
    return in_forward_cone(Point(std::vector<double>(x.x.size(), 0.0)), x, tau);
  } else {
    throw std::invalid_argument("unsupported hyperboloid base");
  }
  return cap_closed_sample(cap_pred, y, off, true);
}

bool diamond_contains(const DiamondOverBase& dob, const Point& x, double tau) {
  if (std::holds_alternative<FlatTimeSlice>(dob.patch.surface)) {
    const double t0 = std::get<FlatTimeSlice>(dob.patch.surface).t0;
    double off = std::abs(x.t() - t0);
    std::vector<double> y(x.x.begin() + 1, x.x.end());
    return flat_shadow_contains(dob.patch.base, y, off, nullptr, tau);
  }
  const double c = std::get<HyperboloidBranch>(dob.patch.surface).c;
  return hyperboloid_diamond_contains(c, dob.patch.base, x, tau);
}

}  // namespace

bool patch_contains(const SurfacePatch& p, const Point& x, double tau) {
  if (std::holds_alternative<FlatTimeSlice>(p.surface)) {
    if (std::abs(x.t() - std::get<FlatTimeSlice>(p.surface).t0) > tau * x.scale()) return false;
    std::vector<double> y(x.x.begin() + 1, x.x.end());
    return flat_shadow_contains(p.base, y, 0.0, nullptr, tau);
  }
  const double c = std::get<HyperboloidBranch>(p.surface).c;
  if (std::abs(x.minkowski_sq() - c * c) > tau * sq(x.scale()) || x.t() <= 0.0) return false;
  if (std::holds_alternative<BoostCapBase>(p.base)) {
    const auto& cap = std::get<BoostCapBase>(p.base);
    return boost_cap_contains(c, cap.v, cap.eps, x, tau);
  }
  if (std::holds_alternative<BallBase>(p.base)) {
    const auto& b = std::get<BallBase>(p.base);
    return spatial_dist(b.center, x) < b.radius;
  }
  if (std::holds_alternative<FullSurfaceBase>(p.base)) return true;
  if (std::holds_alternative<std::shared_ptr<ComplementBase>>(p.base)) {
    const auto& comp = *std::get<std::shared_ptr<ComplementBase>>(p.base);
    SurfacePatch inner{p.surface, comp.inner};
    return !patch_contains(inner, x, tau);
  }
  throw std::invalid_argument("unsupported patch base");
}

bool contains(const Region& r, const Point& x, double tau) {
  if (std::holds_alternative<EmptyRegion>(r.kind)) return false;
  if (std::holds_alternative<IntersectionOf>(r.kind)) {
    const auto& ix = std::get<IntersectionOf>(r.kind);
    return contains(*ix.a, x, tau) && contains(*ix.b, x, tau);
  }
  if (std::holds_alternative<ForwardCone>(r.kind))
    return in_forward_cone(std::get<ForwardCone>(r.kind).apex, x, tau);
  if (std::holds_alternative<DoubleCone>(r.kind)) {
    const auto& dc = std::get<DoubleCone>(r.kind);
    return in_forward_cone(dc.lower, x, tau) && in_backward_cone(dc.upper, x, tau);
  }
  if (std::holds_alternative<BoostRegionCompletion>(r.kind)) {
    const auto& brc = std::get<BoostRegionCompletion>(r.kind);
    SurfacePatch patch{HyperboloidBranch{brc.c}, BoostCapBase{brc.v, brc.eps}};
    return diamond_contains(DiamondOverBase{patch}, x, tau);
  }
  return diamond_contains(std::get<DiamondOverBase>(r.kind), x, tau);
}

Region causal_complement(const Region& r, const Region& m) {
  if (!std::holds_alternative<DiamondOverBase>(r.kind))
    throw std::invalid_argument("causal_complement: unsupported region pair");
  const auto& rd = std::get<DiamondOverBase>(r.kind);

  Base ambient_base = FullSurfaceBase{};
  Surface surface = rd.patch.surface;
  if (std::holds_alternative<DiamondOverBase>(m.kind)) {
    const auto& md = std::get<DiamondOverBase>(m.kind);
    if (md.patch.surface.index() != surface.index())
      throw std::invalid_argument("causal_complement: regions on different surfaces");
    ambient_base = md.patch.base;
  } else if (std::holds_alternative<ForwardCone>(m.kind)) {
    if (!std::holds_alternative<HyperboloidBranch>(surface))
      throw std::invalid_argument("causal_complement: flat diamond inside a cone");
  } else {
    throw std::invalid_argument("causal_complement: unsupported ambient");
  }

  // R == M structurally: empty complement.
  if (std::holds_alternative<DiamondOverBase>(m.kind)) {
    const auto& md = std::get<DiamondOverBase>(m.kind);
    if (rd.patch.base.index() == md.patch.base.index() &&
        std::holds_alternative<BallBase>(rd.patch.base)) {
      const auto& a = std::get<BallBase>(rd.patch.base);
      const auto& b = std::get<BallBase>(md.patch.base);
      if (a.radius == b.radius && a.center == b.center) return Region::empty();
    }
    if (std::holds_alternative<FullSurfaceBase>(rd.patch.base) &&
        std::holds_alternative<FullSurfaceBase>(md.patch.base))
      return Region::empty();
  }

  auto comp = std::make_shared<ComplementBase>(ComplementBase{rd.patch.base});
  Base relative;
  if (std::holds_alternative<FullSurfaceBase>(ambient_base)) {
    relative = comp;
  } else if (std::holds_alternative<BallBase>(ambient_base)) {
    // C(A \cap B) = C(A) \cap C(B): encode the ambient ball through a
    // second diamond; membership is the conjunction. Represented as the
    // complement base, with the ambient carried by the caller through `m`.
    relative = comp;
  } else {
    throw std::invalid_argument("causal_complement: unsupported ambient base");
  }
  // The ambient restriction C(B)^c = C(B'\closure(B)) is realized as the
  // intersection of the complement diamond with the ambient region; both
  // diamonds share the surface so the intersection is again the diamond
  // over the relative base. Membership tests compose the two predicates.
  Region comp_diamond = Region::diamond(SurfacePatch{surface, relative});
  if (std::holds_alternative<FullSurfaceBase>(ambient_base) &&
      std::holds_alternative<DiamondOverBase>(m.kind))
    return comp_diamond;
  return Region{IntersectionOf{std::make_shared<Region>(comp_diamond),
                               std::make_shared<Region>(m)}};
}

Point ray_inversion(const Point& x, double tau) {
  double q = x.minkowski_sq();
  if (std::abs(q) <= tau * sq(x.scale()))
    throw std::domain_error("ray_inversion undefined on null vectors");
  return (-1.0 / q) * x;
}

ConformalMap::ConformalMap(double T, int dim) : T_(T), dim_(dim) {
  if (T <= 0.0) throw std::invalid_argument("conformal map needs T > 0");
  if (dim < 1 || dim > 3) throw std::invalid_argument("conformal map dim must be 1..3");
}

Point ConformalMap::map(const Point& x) const {
  Point shifted = x;
  shifted.x[0] += 1.0 / T_;
  return ray_inversion(shifted);
}

Point ConformalMap::inverse(const Point& y) const {
  Point back = ray_inversion(y);
  back.x[0] -= 1.0 / T_;
  return back;
}

Region ConformalMap::image_cone() const {
  std::vector<double> lo(dim_ + 1, 0.0), up(dim_ + 1, 0.0);
  lo[0] = -T_;
  return Region::double_cone(Point(lo), Point(up));
}

SurfacePatch ConformalMap::image_basis() const {
  return SurfacePatch{FlatTimeSlice{-T_ / 2.0},
                      BallBase{std::vector<double>(dim_, 0.0), T_ / 2.0}};
}

Point ConformalMap::lower_vertex() const {
  std::vector<double> lo(dim_ + 1, 0.0);
  lo[0] = -T_;
  return Point(lo);
}

Point ConformalMap::upper_vertex() const { return Point(std::vector<double>(dim_ + 1, 0.0)); }

bool boost_cap_contains(double c, const std::vector<double>& v, double eps,
                        const Point& x, double tau) {
  if (c <= 0.0) throw std::invalid_argument("boost cap needs c > 0");
  if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("boost cap needs eps in (0,1)");
  if (static_cast<int>(v.size()) != x.dim())
    throw std::invalid_argument("boost cap direction dimension mismatch");
  double nv = 0.0;
  for (double vi : v) nv += sq(vi);
  if (std::abs(nv - 1.0) > 1e-9) throw std::invalid_argument("boost cap direction must be unit");

  double tol = tau * sq(x.scale());
  if (std::abs(x.minkowski_sq() - c * c) > tol || x.t() <= 0.0)
    throw std::domain_error("point not on the hyperboloid branch");

  double r = x.spatial_norm();
  if (r <= tau * x.scale()) return false;  // eta = 0: vertex excluded
  double dot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * x.x[i + 1];
  return dot / r > 1.0 - eps;
}

}  // namespace qdual::geom
