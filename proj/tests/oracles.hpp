#pragma once

// Independent oracles used by the test suites. These deliberately avoid the
// implementation paths they check: brute-force geometry sampling, explicit
// time stepping, and direct double sums.

#include <cmath>
#include <numbers>
#include <vector>

#include "qdual/geometry.hpp"
#include "qdual/lattice.hpp"
#include "qdual/spectral.hpp"

namespace oracles {

// Diamond membership by brute force: every non-spacelike line through x must
// meet the base ball on the t = t0 slice. A line with unit velocity v
// (|v| <= 1) through x hits the slice at y = x_spatial + (t0 - x_t) v.
inline bool diamond_contains_bruteforce(const qdual::geom::Point& x, double t0,
                                        const std::vector<double>& center, double radius,
                                        int directions = 720) {
  const int dim = x.dim();
  double dt = t0 - x.t();
  std::vector<std::vector<double>> vels;
  if (dim == 1) {
    for (int i = -directions; i <= directions; ++i)
      vels.push_back({static_cast<double>(i) / directions});
  } else {
    for (int i = 0; i < directions; ++i) {
      double th = 2.0 * std::numbers::pi * i / directions;
      for (double speed : {1.0, 0.7, 0.35, 0.05}) {
        vels.push_back({speed * std::cos(th), speed * std::sin(th)});
      }
    }
    vels.push_back(std::vector<double>(dim, 0.0));
  }
  for (const auto& v : vels) {
    double r2 = 0.0;
    for (int ax = 0; ax < dim; ++ax) {
      double c = ax < static_cast<int>(center.size()) ? center[ax] : 0.0;
      double y = x.x[ax + 1] + dt * v[ax] - c;
      r2 += y * y;
    }
    if (std::sqrt(r2) >= radius) return false;
  }
  return true;
}

// Leapfrog integration of d^2/dt^2 u = -(|p|^2 + m^2) u per Fourier mode
// (spectral Laplacian, second-order time stepping): an independent route to
// the Cauchy data of a propagated source.
struct LeapfrogResult {
  qdual::LatticeField u0;
  qdual::LatticeField u1;
};

inline LeapfrogResult leapfrog_to_origin(const qdual::LatticeField& slice, double t_source,
                                         double dt) {
  using namespace qdual;
  const LatticeGrid& g = slice.grid;
  // initial data at t_source: u = 0, du/dt = slice (a delta-in-time source)
  auto omega2 = spectral::omega_symbol(g, 2.0);
  std::vector<cplx> u(g.sites(), cplx(0, 0));
  auto vhat = fourier(slice);
  std::vector<cplx> v(vhat.v);

  double remaining = -t_source;  // integrate from t_source to 0
  int nsteps = static_cast<int>(std::ceil(std::abs(remaining) / dt));
  double h = remaining / nsteps;

  // velocity Verlet in Fourier space with acceleration a = -omega^2 u
  std::vector<cplx> acc(g.sites());
  for (std::int64_t k = 0; k < g.sites(); ++k) acc[k] = -omega2[k] * u[k];
  for (int s = 0; s < nsteps; ++s) {
    for (std::int64_t k = 0; k < g.sites(); ++k) {
      u[k] += h * v[k] + 0.5 * h * h * acc[k];
    }
    for (std::int64_t k = 0; k < g.sites(); ++k) {
      cplx newacc = -omega2[k] * u[k];
      v[k] += 0.5 * h * (acc[k] + newacc);
      acc[k] = newacc;
    }
  }
  LeapfrogResult out{LatticeField(g), LatticeField(g)};
  out.u0 = inverse_fourier(SpectralField{g, u});
  out.u1 = inverse_fourier(SpectralField{g, v});
  return out;
}

// Direct double sum of the fractional seminorm (torus metric, diagonal
// excluded); quadratic cost, for small grids only.
inline double fractional_lhs_direct(const qdual::LatticeField& f, double s) {
  using namespace qdual;
  const LatticeGrid& g = f.grid;
  const int d = g.dim();
  double acc = 0.0;
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    for (std::int64_t j = 0; j < g.sites(); ++j) {
      if (i == j) continue;
      double dist = g.torus_distance(i, j);
      double diff = f.v[i] - f.v[j];
      acc += diff * diff / std::pow(dist, d + 2.0 * s);
    }
  }
  return acc * g.cell_volume() * g.cell_volume();
}

}  // namespace oracles
