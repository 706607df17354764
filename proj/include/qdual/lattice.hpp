#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace qdual {

using cplx = std::complex<double>;

constexpr int kMaxDim = 3;
using Coords = std::array<std::int64_t, kMaxDim>;

/// Periodic spatial lattice: `dim` axes, `n` sites per axis, spacing `a`,
/// Klein-Gordon mass `m`. Momenta are p_k = 2*pi*k/L per axis with
/// k in {-n/2, ..., n/2-1}; the dispersion is the continuum
/// omega(p) = sqrt(|p|^2 + m^2) evaluated at lattice momenta.
///
/// Fourier convention (fixed for the whole library):
///   fhat(p_k) = a^d sum_x f(x) e^{-i p_k . x}
///   f(x)      = (1/L^d) sum_k fhat(p_k) e^{+i p_k . x}
/// so <f,g> = a^d sum_x f g = (1/L^d) sum_k conj(fhat) ghat  (Parseval).
class LatticeGrid {
 public:
  LatticeGrid(int dim, int n, double spacing, double mass);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double spacing() const { return spacing_; }
  double mass() const { return mass_; }
  double length() const { return spacing_ * n_; }
  std::int64_t sites() const { return sites_; }
  /// Quadrature weight a^d.
  double cell_volume() const { return cell_; }

  bool operator==(const LatticeGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && spacing_ == o.spacing_ && mass_ == o.mass_;
  }
  bool operator!=(const LatticeGrid& o) const { return !(*this == o); }
  /// Same geometry, mass ignored.
  bool same_geometry(const LatticeGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && spacing_ == o.spacing_;
  }

  Coords coords(std::int64_t idx) const;
  std::int64_t index(const Coords& c) const;  // coordinates taken mod n
  /// Momentum components of mode index (same row-major layout as sites).
  std::array<double, kMaxDim> momentum(std::int64_t idx) const;
  double momentum_norm(std::int64_t idx) const;
  double omega(std::int64_t idx) const;

  /// Torus (minimum-image) position of a site, components in [-L/2, L/2).
  std::array<double, kMaxDim> torus_position(std::int64_t idx) const;
  /// Torus distance between two sites.
  double torus_distance(std::int64_t i, std::int64_t j) const;

 private:
  int dim_;
  int n_;
  double spacing_;
  double mass_;
  std::int64_t sites_;
  double cell_;
};

/// Real scalar field over the sites of a grid.
struct LatticeField {
  LatticeGrid grid;
  std::vector<double> v;

  explicit LatticeField(const LatticeGrid& g) : grid(g), v(g.sites(), 0.0) {}
  LatticeField(const LatticeGrid& g, std::vector<double> values);

  double& operator[](std::int64_t i) { return v[i]; }
  double operator[](std::int64_t i) const { return v[i]; }
};

/// Complex Fourier coefficients of a field (same layout as site indices).
struct SpectralField {
  LatticeGrid grid;
  std::vector<cplx> v;
};

/// fhat with the a^d sum normalization above.
SpectralField fourier(const LatticeField& f);
/// Inverse of `fourier`; imaginary residue is dropped (callers arrange
/// Hermitian-symmetric inputs).
LatticeField inverse_fourier(const SpectralField& fh);

/// Quadrature inner product a^d sum_x f g.
double inner_l2(const LatticeField& f, const LatticeField& g);
double norm_l2(const LatticeField& f);

/// Applies a real Fourier multiplier m(p); `symbol` receives the mode index.
LatticeField apply_multiplier(const LatticeField& f,
                              const std::vector<double>& symbol);

void add_scaled(LatticeField& dst, const LatticeField& src, double s);
double mean(const LatticeField& f);
/// f minus its mean.
LatticeField remove_mean(const LatticeField& f);

}  // namespace qdual
