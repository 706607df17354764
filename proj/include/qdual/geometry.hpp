#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <variant>
#include <vector>

namespace qdual::geom {

/// Event in Minkowski R^{d+1}; coords[0] is time, signature (+,-,...,-).
struct Point {
  std::vector<double> x;

  Point() = default;
  explicit Point(std::vector<double> c) : x(std::move(c)) {}
  static Point of(std::initializer_list<double> c) { return Point(std::vector<double>(c)); }

  int dim() const { return static_cast<int>(x.size()) - 1; }
  double t() const { return x[0]; }
  /// Minkowski square x.x = t^2 - |spatial|^2.
  double minkowski_sq() const;
  double spatial_norm() const;
  /// Coordinate scale used for relative tolerances.
  double scale() const;
};

Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(double s, const Point& a);

enum class IntervalKind { Timelike, Lightlike, Spacelike };

/// Default absolute tolerance for boundary classification, relative to the
/// coordinate scale of the inputs.
inline constexpr double kDefaultGeomTol = 1e-12;

/// Sign classification of (x-y)^2; Lightlike within tau * scale^2.
IntervalKind interval_kind(const Point& x, const Point& y, double tau = kDefaultGeomTol);

// --- Cauchy surfaces and bases -------------------------------------------

struct FlatTimeSlice {
  double t0 = 0.0;
};
/// {x : x0 >= 0, x.x = c^2}.
struct HyperboloidBranch {
  double c = 1.0;
};
using Surface = std::variant<FlatTimeSlice, HyperboloidBranch>;

struct BallBase {
  std::vector<double> center;  // surface coordinates (spatial for flat slices)
  double radius = 1.0;
};
struct BoostCapBase {
  std::vector<double> v;  // unit spatial direction
  double eps = 0.1;
};
struct FullSurfaceBase {};
struct ComplementBase;  // complement of another base within the surface
struct MaskBase {
  std::vector<std::int64_t> sites;  // lattice use; membership handled upstream
};
using Base = std::variant<BallBase, BoostCapBase, FullSurfaceBase,
                          std::shared_ptr<ComplementBase>, MaskBase>;
struct ComplementBase {
  Base inner;
};

struct SurfacePatch {
  Surface surface;
  Base base;
};

/// Membership of a point lying on the patch's surface (within tau*scale).
bool patch_contains(const SurfacePatch& p, const Point& x, double tau = kDefaultGeomTol);

// --- Regions ---------------------------------------------------------------

struct ForwardCone {
  Point apex;
};
struct DoubleCone {
  Point lower;  // earlier vertex
  Point upper;  // later vertex; must be timelike to `lower`
};
struct DiamondOverBase {
  SurfacePatch patch;
};
struct BoostRegionCompletion {
  double c = 1.0;
  std::vector<double> v;
  double eps = 0.1;
};
struct EmptyRegion {};
struct Region;
/// Intersection of two regions; produced by relative causal complements.
struct IntersectionOf {
  std::shared_ptr<Region> a;
  std::shared_ptr<Region> b;
};

struct Region {
  std::variant<ForwardCone, DoubleCone, DiamondOverBase, BoostRegionCompletion, EmptyRegion,
               IntersectionOf>
      kind;

  static Region forward_cone(Point apex);
  static Region double_cone(Point lower, Point upper);
  static Region diamond(SurfacePatch patch);
  static Region boost_completion(double c, std::vector<double> v, double eps);
  static Region empty();
};

/// Open-set membership predicate; boundary points resolve to false within
/// tau * coordinate scale.
bool contains(const Region& r, const Point& x, double tau = kDefaultGeomTol);

/// Interior of the causal complement of `r` inside the ambient region `m`,
/// for diamonds sharing a Cauchy surface of `m`: reduces to the set
/// complement of the base within the ambient base.
Region causal_complement(const Region& r, const Region& m);

/// x -> -x / x.x; involutive on non-null points.
Point ray_inversion(const Point& x, double tau = kDefaultGeomTol);

/// Conformal equivalence phi between the forward cone V+ and the double cone
/// O1 with vertices 0 (upper) and (-T, 0) (lower), built as ray inversion
/// composed with the translation by (1/T, 0). It maps the hyperboloid
/// {x0 >= 0, x.x = c^2} with c = 1/T onto the flat basis
/// B1 = {(-T/2, y) : |y| < T/2} of O1. The apex of V+ is sent, as a boundary
/// limit, to the lower vertex (-T, 0); future timelike infinity corresponds
/// to the upper vertex 0.
class ConformalMap {
 public:
  ConformalMap(double T, int dim);

  double T() const { return T_; }
  double hyperboloid_c() const { return 1.0 / T_; }
  int dim() const { return dim_; }

  Point map(const Point& x) const;          // phi : V+ -> O1
  Point inverse(const Point& y) const;      // phi^{-1} : O1 -> V+
  Region image_cone() const;                // O1
  SurfacePatch image_basis() const;         // B1 (flat slice t = -T/2, ball T/2)
  Point lower_vertex() const;               // boundary image of the apex of V+
  Point upper_vertex() const;

 private:
  double T_;
  int dim_;
};

/// True iff x = (c cosh eta, c sinh eta u) with eta > 0 and (u, v) > 1 - eps.
/// The vertex (c, 0) (eta = 0) is excluded. Throws if x is not on the
/// hyperboloid branch within tau * scale.
bool boost_cap_contains(double c, const std::vector<double>& v, double eps,
                        const Point& x, double tau = kDefaultGeomTol);

}  // namespace qdual::geom
