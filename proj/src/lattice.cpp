#include "qdual/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qdual/fft.hpp"

namespace qdual {

namespace {
bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

LatticeGrid::LatticeGrid(int dim, int n, double spacing, double mass)
    : dim_(dim), n_(n), spacing_(spacing), mass_(mass) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dim must be 1..3");
  if (n < 4 || !is_pow2(n)) throw std::invalid_argument("grid n must be a power of two >= 4");
  if (spacing <= 0.0) throw std::invalid_argument("grid spacing must be positive");
  if (mass < 0.0) throw std::invalid_argument("grid mass must be nonnegative");
  sites_ = 1;
  for (int i = 0; i < dim; ++i) sites_ *= n;
  cell_ = std::pow(spacing, dim);
}

Coords LatticeGrid::coords(std::int64_t idx) const {
  Coords c{0, 0, 0};
  for (int ax = dim_ - 1; ax >= 0; --ax) {
    c[ax] = idx % n_;
    idx /= n_;
  }
  return c;
}

std::int64_t LatticeGrid::index(const Coords& c) const {
  std::int64_t idx = 0;
  for (int ax = 0; ax < dim_; ++ax) {
    std::int64_t w = ((c[ax] % n_) + n_) % n_;
    idx = idx * n_ + w;
  }
  return idx;
}

std::array<double, kMaxDim> LatticeGrid::momentum(std::int64_t idx) const {
  const double dp = 2.0 * std::numbers::pi / length();
  Coords c = coords(idx);
  std::array<double, kMaxDim> p{0.0, 0.0, 0.0};
  for (int ax = 0; ax < dim_; ++ax) {
    std::int64_t k = c[ax] < n_ / 2 ? c[ax] : c[ax] - n_;
    p[ax] = dp * static_cast<double>(k);
  }
  return p;
}

double LatticeGrid::momentum_norm(std::int64_t idx) const {
  auto p = momentum(idx);
  double s = 0.0;
  for (int ax = 0; ax < dim_; ++ax) s += p[ax] * p[ax];
  return std::sqrt(s);
}

double LatticeGrid::omega(std::int64_t idx) const {
  auto p = momentum(idx);
  double s = mass_ * mass_;
  for (int ax = 0; ax < dim_; ++ax) s += p[ax] * p[ax];
  return std::sqrt(s);
}

std::array<double, kMaxDim> LatticeGrid::torus_position(std::int64_t idx) const {
  Coords c = coords(idx);
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  for (int ax = 0; ax < dim_; ++ax) {
    std::int64_t k = c[ax] < n_ / 2 ? c[ax] : c[ax] - n_;
    x[ax] = spacing_ * static_cast<double>(k);
  }
  return x;
}

double LatticeGrid::torus_distance(std::int64_t i, std::int64_t j) const {
  Coords a = coords(i), b = coords(j);
  double s = 0.0;
  for (int ax = 0; ax < dim_; ++ax) {
    std::int64_t d = std::abs(a[ax] - b[ax]);
    d = std::min(d, n_ - d);
    double x = spacing_ * static_cast<double>(d);
    s += x * x;
  }
  return std::sqrt(s);
}

LatticeField::LatticeField(const LatticeGrid& g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
  if (static_cast<std::int64_t>(v.size()) != g.sites())
    throw std::invalid_argument("field size does not match grid");
}

SpectralField fourier(const LatticeField& f) {
  std::vector<cplx> in(f.v.begin(), f.v.end());
  auto out = dft_forward(f.grid.dim(), f.grid.n(), in);
  const double w = f.grid.cell_volume();
  for (auto& z : out) z *= w;
  return SpectralField{f.grid, std::move(out)};
}

LatticeField inverse_fourier(const SpectralField& fh) {
  auto out = dft_inverse(fh.grid.dim(), fh.grid.n(), fh.v);
  // dft_inverse divides by N^d; the convention wants 1/L^d together with the
  // a^d already folded into fhat, so the net factor is 1/a^d here.
  const double w = 1.0 / fh.grid.cell_volume();
  LatticeField f(fh.grid);
  for (std::int64_t i = 0; i < fh.grid.sites(); ++i) f.v[i] = out[i].real() * w;
  return f;
}

double inner_l2(const LatticeField& f, const LatticeField& g) {
  if (f.grid != g.grid) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) s += f.v[i] * g.v[i];
  return s * f.grid.cell_volume();
}

double norm_l2(const LatticeField& f) { return std::sqrt(inner_l2(f, f)); }

LatticeField apply_multiplier(const LatticeField& f, const std::vector<double>& symbol) {
  if (static_cast<std::int64_t>(symbol.size()) != f.grid.sites())
    throw std::invalid_argument("symbol size does not match grid");
  std::vector<cplx> in(f.v.begin(), f.v.end());
  auto fh = dft_forward(f.grid.dim(), f.grid.n(), in);
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) fh[i] *= symbol[i];
  auto out = dft_inverse(f.grid.dim(), f.grid.n(), fh);
  LatticeField g(f.grid);
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) g.v[i] = out[i].real();
  return g;
}

void add_scaled(LatticeField& dst, const LatticeField& src, double s) {
  if (dst.grid != src.grid) throw std::invalid_argument("grid mismatch");
  for (std::int64_t i = 0; i < dst.grid.sites(); ++i) dst.v[i] += s * src.v[i];
}

double mean(const LatticeField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s / static_cast<double>(f.v.size());
}

LatticeField remove_mean(const LatticeField& f) {
  LatticeField g = f;
  double m = mean(f);
  for (auto& x : g.v) x -= m;
  return g;
}

}  // namespace qdual

#include "qdual/masks.hpp"

namespace qdual {

Mask ball_mask(const LatticeGrid& grid, const std::vector<double>& center, double radius) {
  Mask m;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    auto x = grid.torus_position(i);
    double s = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax) {
      double c = ax < static_cast<int>(center.size()) ? center[ax] : 0.0;
      double d = x[ax] - c;
      // wrap the difference onto the torus
      double L = grid.length();
      d = d - L * std::round(d / L);
      s += d * d;
    }
    if (std::sqrt(s) < radius) m.push_back(i);
  }
  return m;
}

Mask box_mask(const LatticeGrid& grid, const std::vector<double>& center, double half_width) {
  Mask m;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    auto x = grid.torus_position(i);
    bool in = true;
    for (int ax = 0; ax < grid.dim(); ++ax) {
      double c = ax < static_cast<int>(center.size()) ? center[ax] : 0.0;
      double L = grid.length();
      double d = x[ax] - c;
      d = d - L * std::round(d / L);
      if (std::abs(d) >= half_width) in = false;
    }
    if (in) m.push_back(i);
  }
  return m;
}

Mask inflate(const LatticeGrid& grid, const Mask& mask, int rings) {
  if (rings <= 0) return mask;
  std::vector<bool> in(grid.sites(), false);
  for (auto s : mask) in[s] = true;
  for (int r = 0; r < rings; ++r) {
    std::vector<bool> next = in;
    for (std::int64_t i = 0; i < grid.sites(); ++i) {
      if (!in[i]) continue;
      Coords c = grid.coords(i);
      // Chebyshev one-ring
      const int d = grid.dim();
      int span = 1;
      for (int ax = 0; ax < d; ++ax) span *= 3;
      for (int off = 0; off < span; ++off) {
        Coords cc = c;
        int o = off;
        for (int ax = 0; ax < d; ++ax) {
          cc[ax] = c[ax] + (o % 3) - 1;
          o /= 3;
        }
        next[grid.index(cc)] = true;
      }
    }
    in = next;
  }
  Mask out;
  for (std::int64_t i = 0; i < grid.sites(); ++i)
    if (in[i]) out.push_back(i);
  return out;
}

Mask mask_difference(const Mask& a, const Mask& b) {
  Mask sa = a, sb = b, out;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
  return out;
}

Mask mask_union(const Mask& a, const Mask& b) {
  Mask sa = a, sb = b, out;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
  return out;
}

bool mask_contains(const Mask& m, std::int64_t site) {
  return std::binary_search(m.begin(), m.end(), site);
}

Mask translate_mask(const LatticeGrid& grid, const Mask& m, const Coords& shift) {
  Mask out;
  out.reserve(m.size());
  for (auto s : m) {
    Coords c = grid.coords(s);
    for (int ax = 0; ax < grid.dim(); ++ax) c[ax] += shift[ax];
    out.push_back(grid.index(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qdual
