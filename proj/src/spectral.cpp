#include "qdual/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qdual/errors.hpp"
#include "qdual/fft.hpp"

namespace qdual::spectral {

namespace {

constexpr double kZeroModeTol = 1e-10;

bool massless(const LatticeGrid& g) { return g.mass() == 0.0; }

void require_zero_mean(const LatticeField& f, const char* what) {
  double scale = 0.0;
  for (double x : f.v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return;
  if (std::abs(mean(f)) > kZeroModeTol * scale)
    throw std::domain_error(std::string(what) + ": zero mode must vanish in the massless sector");
}

std::vector<double> random_zero_mean(const LatticeGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  std::vector<double> v(grid.sites());
  double m = 0.0;
  for (auto& x : v) {
    x = dist(rng);
    m += x;
  }
  m /= static_cast<double>(v.size());
  for (auto& x : v) x -= m;
  return v;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> omega_symbol(const LatticeGrid& grid, double power) {
  std::vector<double> sym(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    double w = grid.omega(i);
    if (w == 0.0) {
      sym[i] = power > 0.0 ? 0.0 : (power == 0.0 ? 1.0 : 0.0);
    } else {
      sym[i] = std::pow(w, power);
    }
  }
  return sym;
}

LatticeField apply_omega_power(const LatticeField& f, double s, bool strict) {
  if (strict && massless(f.grid) && s < 0.0) require_zero_mean(f, "apply_omega_power");
  return apply_multiplier(f, omega_symbol(f.grid, s));
}

double norm_pm(const LatticeField& f, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("norm_pm: sign must be +-1");
  if (sign < 0) require_zero_mean(f, "norm_pm");
  auto fh = fourier(f);
  const double Ld = std::pow(f.grid.length(), f.grid.dim());
  double s = 0.0;
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) {
    double p = f.grid.momentum_norm(i);
    if (p == 0.0) continue;
    s += std::norm(fh.v[i]) * (sign > 0 ? p : 1.0 / p);
  }
  return std::sqrt(s / Ld);
}

LatticeField mollifier(const LatticeGrid& grid, int n) {
  if (n <= 0) throw std::invalid_argument("mollifier: n must be positive");
  if (1.0 / n < 2.0 * grid.spacing())
    throw std::invalid_argument("mollifier: radius 1/n not resolvable (needs 1/n >= 2a)");
  LatticeField rho(grid);
  const double radius = 1.0 / n;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    auto x = grid.torus_position(i);
    double r2 = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax) r2 += x[ax] * x[ax];
    double u2 = r2 / (radius * radius);
    rho.v[i] = u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0;
  }
  double total = 0.0;
  for (double v : rho.v) total += v;
  total *= grid.cell_volume();
  if (total <= 0.0) throw std::invalid_argument("mollifier: degenerate sampling");
  for (auto& v : rho.v) v /= total;
  return rho;
}

LatticeField convolve(const LatticeField& f, const LatticeField& k) {
  if (!f.grid.same_geometry(k.grid)) throw std::invalid_argument("convolve: grid mismatch");
  auto fh = fourier(f);
  auto kh = fourier(k);
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) fh.v[i] *= kh.v[i];
  return inverse_fourier(fh);
}

namespace {

// chi-conjugated multiplier map: project zero mode (massless), multiply by
// omega^{sa}, multiply by chi in position space, multiply by omega^{sb}.
std::vector<double> apply_chain(const LatticeGrid& grid, const std::vector<double>& chi,
                                const std::vector<double>& wa, const std::vector<double>& wb,
                                const std::vector<double>& in) {
  std::vector<cplx> buf(in.begin(), in.end());
  auto hat = dft_forward(grid.dim(), grid.n(), buf);
  for (std::int64_t i = 0; i < grid.sites(); ++i) hat[i] *= wb[i];
  auto mid = dft_inverse(grid.dim(), grid.n(), hat);
  for (std::int64_t i = 0; i < grid.sites(); ++i) mid[i] = mid[i].real() * chi[i];
  hat = dft_forward(grid.dim(), grid.n(), mid);
  for (std::int64_t i = 0; i < grid.sites(); ++i) hat[i] *= wa[i];
  auto out = dft_inverse(grid.dim(), grid.n(), hat);
  std::vector<double> res(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) res[i] = out[i].real();
  return res;
}

}  // namespace

PowerIterationResult mult_operator_norm_estimate(const LatticeField& chi, int sign,
                                                 const MultOperatorOptions& opts) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +-1");
  const LatticeGrid& grid = chi.grid;
  auto wp = omega_symbol(grid, 0.5 * sign);
  auto wm = omega_symbol(grid, -0.5 * sign);

  std::mt19937_64 rng(opts.seed);
  std::vector<double> v = random_zero_mean(grid, rng);
  double nv = l2(v);
  for (auto& x : v) x /= nv;

  PowerIterationResult res;
  double prev = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // w = A^T A v with A = w_+ M_chi w_-.
    auto av = apply_chain(grid, chi.v, wp, wm, v);
    auto w = apply_chain(grid, chi.v, wm, wp, av);
    double lambda = l2(w);
    res.iterations = it;
    if (lambda == 0.0) {
      res.estimate = 0.0;
      res.converged = true;
      return res;
    }
    res.estimate = std::sqrt(lambda);
    for (std::int64_t i = 0; i < grid.sites(); ++i) v[i] = w[i] / lambda;
    if (it > 1 && std::abs(res.estimate - prev) <= opts.rel_tol * res.estimate) {
      res.converged = true;
      break;
    }
    prev = res.estimate;
  }
  return res;
}

namespace {

// Modes of the infrared block (omega <= 1), excluding the massless zero mode.
std::vector<std::int64_t> infrared_modes(const LatticeGrid& grid) {
  std::vector<std::int64_t> ir;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    double w = grid.omega(i);
    if (w == 0.0) continue;
    if (w <= 1.0) ir.push_back(i);
  }
  return ir;
}

std::int64_t mode_difference(const LatticeGrid& grid, std::int64_t p, std::int64_t q) {
  Coords a = grid.coords(p), b = grid.coords(q);
  Coords d{0, 0, 0};
  for (int ax = 0; ax < grid.dim(); ++ax) d[ax] = a[ax] - b[ax];
  return grid.index(d);
}

}  // namespace

double infrared_hs_norm(const LatticeField& chi, int sign, std::int64_t max_entries) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +-1");
  const LatticeGrid& grid = chi.grid;
  auto cols = infrared_modes(grid);
  std::int64_t rows = grid.sites() - (massless(grid) ? 1 : 0);
  if (rows * static_cast<std::int64_t>(cols.size()) > max_entries)
    throw BudgetError("infrared_hs_norm: matrix exceeds the entry budget");

  auto chih = fourier(chi);
  std::vector<double> chiabs2(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) chiabs2[i] = std::norm(chih.v[i]);
  auto ws = omega_symbol(grid, 0.5 * sign);
  const double Ld = std::pow(grid.length(), grid.dim());
  const double invL2d = 1.0 / (Ld * Ld);

  double hs2 = 0.0;
  for (std::int64_t p = 0; p < grid.sites(); ++p) {
    double wp = grid.omega(p);
    if (wp == 0.0 && massless(grid)) continue;
    for (std::int64_t q : cols) {
      double factor = ws[p] / ws[q] - 1.0;
      if (factor == 0.0) continue;
      hs2 += factor * factor * chiabs2[mode_difference(grid, p, q)] * invL2d;
    }
  }
  return std::sqrt(hs2);
}

SchurReport schur_bound_check(const LatticeField& chi, int sign,
                              const MultOperatorOptions& opts) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +-1");
  const LatticeGrid& grid = chi.grid;
  std::vector<std::int64_t> uv;
  for (std::int64_t i = 0; i < grid.sites(); ++i)
    if (grid.omega(i) > 1.0) uv.push_back(i);

  SchurReport rep;
  if (uv.empty()) return rep;

  auto chih = fourier(chi);
  std::vector<double> chiabs(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) chiabs[i] = std::abs(chih.v[i]);
  auto ws = omega_symbol(grid, 0.5 * sign);
  const double Ld = std::pow(grid.length(), grid.dim());

  std::vector<double> colsum(uv.size(), 0.0);
  double rowmax = 0.0;
  for (std::size_t ip = 0; ip < uv.size(); ++ip) {
    double rowsum = 0.0;
    for (std::size_t iq = 0; iq < uv.size(); ++iq) {
      double factor = std::abs(ws[uv[ip]] / ws[uv[iq]] - 1.0);
      if (factor == 0.0) continue;
      double k = factor * chiabs[mode_difference(grid, uv[ip], uv[iq])] / Ld;
      rowsum += k;
      colsum[iq] += k;
    }
    rowmax = std::max(rowmax, rowsum);
  }
  rep.row_sum_sup = rowmax;
  rep.col_sum_sup = *std::max_element(colsum.begin(), colsum.end());
  rep.geometric_mean = std::sqrt(rep.row_sum_sup * rep.col_sum_sup);

  // Direct estimate of the block norm: power iteration over
  // P_uv (w^{s} T w^{-s} - T) P_uv applied through FFTs.
  std::vector<double> uvmask(grid.sites(), 0.0);
  for (auto i : uv) uvmask[i] = 1.0;
  auto wp = omega_symbol(grid, 0.5 * sign);
  auto wm = omega_symbol(grid, -0.5 * sign);

  auto apply_block = [&](const std::vector<double>& in, bool transpose) {
    // in: coefficients over modes (real vector on mode indices).
    std::vector<cplx> hat(grid.sites());
    for (std::int64_t i = 0; i < grid.sites(); ++i) hat[i] = in[i] * uvmask[i];
    const auto& w1 = transpose ? wp : wm;
    const auto& w2 = transpose ? wm : wp;
    std::vector<cplx> h1(hat);
    for (std::int64_t i = 0; i < grid.sites(); ++i) h1[i] *= w1[i];
    auto pos = dft_inverse(grid.dim(), grid.n(), h1);
    for (std::int64_t i = 0; i < grid.sites(); ++i) pos[i] *= chi.v[i];
    auto conv = dft_forward(grid.dim(), grid.n(), pos);
    for (std::int64_t i = 0; i < grid.sites(); ++i) conv[i] *= w2[i];
    // minus the plain convolution block
    auto pos2 = dft_inverse(grid.dim(), grid.n(), hat);
    for (std::int64_t i = 0; i < grid.sites(); ++i) pos2[i] *= chi.v[i];
    auto conv2 = dft_forward(grid.dim(), grid.n(), pos2);
    std::vector<double> out(grid.sites());
    for (std::int64_t i = 0; i < grid.sites(); ++i)
      out[i] = (conv[i] - conv2[i]).real() * uvmask[i];
    return out;
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(grid.sites(), 0.0);
  for (auto i : uv) v[i] = dist(rng);
  double nv = l2(v);
  for (auto& x : v) x /= nv;
  double est = 0.0, prev = -1.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    auto av = apply_block(v, false);
    auto w = apply_block(av, true);
    double lambda = l2(w);
    if (lambda == 0.0) {
      est = 0.0;
      break;
    }
    est = std::sqrt(lambda);
    for (std::int64_t i = 0; i < grid.sites(); ++i) v[i] = w[i] / lambda;
    if (prev >= 0.0 && std::abs(est - prev) <= opts.rel_tol * est) break;
    prev = est;
  }
  rep.block_norm_estimate = est;
  rep.bound_holds = est <= rep.geometric_mean * (1.0 + 1e-8) + 1e-14;
  return rep;
}

// --- dilation and diffeomorphism pullback ----------------------------------

namespace {

double support_radius_inf(const LatticeField& f) {
  double peak = 0.0;
  for (double x : f.v) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;
  double rad = 0.0;
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) {
    if (std::abs(f.v[i]) > 1e-14 * peak) {
      auto x = f.grid.torus_position(i);
      for (int ax = 0; ax < f.grid.dim(); ++ax) rad = std::max(rad, std::abs(x[ax]));
    }
  }
  return rad;
}

// Band-limited evaluation of f at the scaled points lambda * x for all grid
// sites, axis-separable.
std::vector<double> scale_resample(const LatticeField& f, double lambda) {
  const LatticeGrid& g = f.grid;
  const int n = g.n(), d = g.dim();
  const double dp = 2.0 * std::numbers::pi / g.length();
  const double a = g.spacing();

  // Per-axis transform matrix E[x, k] = exp(i lambda p_k x_a), x_a the
  // torus coordinate of site x.
  std::vector<cplx> E(static_cast<std::size_t>(n) * n);
  for (int x = 0; x < n; ++x) {
    double xa = a * (x < n / 2 ? x : x - n);
    for (int k = 0; k < n; ++k) {
      double pk = dp * (k < n / 2 ? k : k - n);
      double ph = lambda * pk * xa;
      E[static_cast<std::size_t>(x) * n + k] = cplx(std::cos(ph), std::sin(ph));
    }
  }

  std::vector<cplx> cur(f.v.begin(), f.v.end());
  cur = dft_forward(d, n, cur);  // plain DFT coefficients
  // Contract one axis at a time: result(x_ax, rest) = sum_k E[x,k] cur(k, rest).
  std::int64_t total = g.sites();
  std::vector<cplx> next(total);
  std::int64_t stride = total;
  for (int ax = 0; ax < d; ++ax) {
    stride /= n;
    std::fill(next.begin(), next.end(), cplx(0.0, 0.0));
    for (std::int64_t outer = 0; outer < total / (n * stride); ++outer) {
      for (int x = 0; x < n; ++x) {
        for (int k = 0; k < n; ++k) {
          cplx e = E[static_cast<std::size_t>(x) * n + k];
          const std::int64_t base_in = outer * n * stride + k * stride;
          const std::int64_t base_out = outer * n * stride + x * stride;
          for (std::int64_t inner = 0; inner < stride; ++inner)
            next[base_out + inner] += e * cur[base_in + inner];
        }
      }
    }
    std::swap(cur, next);
  }
  std::vector<double> out(total);
  const double norm = 1.0 / static_cast<double>(total);
  for (std::int64_t i = 0; i < total; ++i) out[i] = cur[i].real() * norm;
  return out;
}

}  // namespace

FieldPair dilation(const FieldPair& f, double lambda, bool massless_flag) {
  if (lambda <= 0.0) throw std::invalid_argument("dilation: lambda must be positive");
  if (!f.f0.grid.same_geometry(f.f1.grid))
    throw std::invalid_argument("dilation: component grid mismatch");
  if (massless_flag && f.f0.grid.mass() != 0.0)
    throw std::invalid_argument("dilation: massless flag on a massive grid");
  const LatticeGrid& g = f.f0.grid;
  double rad = std::max(support_radius_inf(f.f0), support_radius_inf(f.f1));
  double needed = rad * std::max(lambda, 1.0 / lambda);
  if (needed >= g.length() / 2.0 - 2.0 * g.spacing())
    throw std::invalid_argument("dilation: scaled support wraps around the torus");

  const int d = g.dim();
  const double pre0 = std::pow(lambda, 0.5 * (d - 1));
  const double pre1 = std::pow(lambda, 0.5 * (d + 1));
  LatticeField g0(g, scale_resample(f.f0, lambda));
  LatticeField g1(g, scale_resample(f.f1, lambda));
  for (auto& x : g0.v) x *= pre0;
  for (auto& x : g1.v) x *= pre1;
  return FieldPair{std::move(g0), std::move(g1)};
}

std::array<double, kMaxDim> DiffeoSpec::map(const std::array<double, kMaxDim>& x) const {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
  double u2 = r2 / (r0 * r0);
  std::array<double, kMaxDim> y = x;
  if (u2 >= 1.0) return y;
  double gfun = std::exp(-1.0 / (1.0 - u2));
  for (int i = 0; i < dim; ++i) y[i] += amplitude * gfun * x[i];
  return y;
}

namespace {

// |Dphi(x) - 1| along a radial mesh; for the radial family the Jacobian is
// g I + g' r rhat rhat^T scaled by the amplitude, with eigenvalues
// amp*(g + g' u^2 ... ) along rhat and amp*g transverse.
void radial_sups(int dim, double r0, double amplitude, double* a_sup, double* b_sup) {
  (void)dim;
  const int samples = 20000;
  double amax = 0.0, bmax = 0.0;
  for (int i = 1; i < samples; ++i) {
    double u = static_cast<double>(i) / samples;  // r / r0
    double g = std::exp(-1.0 / (1.0 - u * u));
    double gp = g * (-2.0 * u) / ((1.0 - u * u) * (1.0 - u * u));  // d/du
    double radial = std::abs(amplitude) * std::abs(g + u * gp);
    double transv = std::abs(amplitude) * g;
    amax = std::max(amax, std::abs(amplitude) * g * u * r0);
    bmax = std::max(bmax, std::max(radial, transv));
  }
  *a_sup = amax;
  *b_sup = bmax;
}

}  // namespace

DiffeoSpec radial_shear(int dim, double r0, double amplitude) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("diffeo dim must be 1..3");
  if (r0 <= 0.0) throw std::invalid_argument("diffeo r0 must be positive");
  DiffeoSpec s;
  s.dim = dim;
  s.r0 = r0;
  s.amplitude = amplitude;
  radial_sups(dim, r0, amplitude, &s.a_sup, &s.b_sup);
  if (s.b_sup >= 1.0) throw std::invalid_argument("diffeo family requires b < 1");
  return s;
}

DiffeoSpec radial_shear_with_b(int dim, double r0, double b_target) {
  double a0, b0;
  radial_sups(dim, r0, 1.0, &a0, &b0);
  return radial_shear(dim, r0, b_target / b0);
}

namespace {

// Nonuniform band-limited evaluation g(x) = (1/N^d) sum_k Fhat(k) e^{i p_k phi(x)}
// and its adjoint, both via per-point per-axis phase tables.
class NonuniformEval {
 public:
  NonuniformEval(const LatticeGrid& grid, const DiffeoSpec& phi) : g_(grid) {
    const int n = g_.n(), d = g_.dim();
    points_.resize(g_.sites());
    for (std::int64_t i = 0; i < g_.sites(); ++i) {
      auto x = g_.torus_position(i);
      points_[i] = phi.map(x);
    }
    (void)n;
    (void)d;
  }

  // out(x) = (1/N^d) sum_k in(k) e^{+i p_k . phi(x)}
  std::vector<cplx> forward(const std::vector<cplx>& in) const {
    return contract(in, +1.0, true);
  }
  // out(k) = sum_x in(x) e^{-i p_k . phi(x)}
  std::vector<cplx> adjoint(const std::vector<cplx>& in) const {
    return contract(in, -1.0, false);
  }

 private:
  std::vector<cplx> contract(const std::vector<cplx>& in, double sgn, bool to_points) const {
    const int n = g_.n(), d = g_.dim();
    const double dp = 2.0 * std::numbers::pi / g_.length();
    const std::int64_t total = g_.sites();
    std::vector<cplx> out(total, cplx(0, 0));
    std::vector<cplx> ph0(n), ph1(n);
    for (std::int64_t ix = 0; ix < total; ++ix) {
      const auto& y = points_[ix];
      for (int ax = 0; ax < d; ++ax) {
        auto& tab = ax == 0 ? ph0 : ph1;
        cplx w = std::exp(cplx(0.0, sgn * dp * y[ax]));
        cplx acc(1.0, 0.0);
        for (int k = 0; k < n / 2; ++k) {
          tab[k] = acc;
          acc *= w;
        }
        cplx winv = std::conj(w);
        acc = winv;
        for (int k = n - 1; k >= n / 2; --k) {
          tab[k] = acc;
          acc *= winv;
        }
        // Note: k = n/2 entry corresponds to the negative Nyquist frequency.
        std::swap(tab[n / 2], tab[n / 2]);
      }
      if (d == 1) {
        if (to_points) {
          cplx s(0, 0);
          for (int k = 0; k < n; ++k) s += in[k] * ph0[k];
          out[ix] = s / static_cast<double>(total);
        } else {
          for (int k = 0; k < n; ++k) out[k] += in[ix] * ph0[k];
        }
      } else if (d == 2) {
        if (to_points) {
          cplx s(0, 0);
          for (int k0 = 0; k0 < n; ++k0) {
            cplx row(0, 0);
            const cplx* base = &in[static_cast<std::size_t>(k0) * n];
            for (int k1 = 0; k1 < n; ++k1) row += base[k1] * ph1[k1];
            s += ph0[k0] * row;
          }
          out[ix] = s / static_cast<double>(total);
        } else {
          for (int k0 = 0; k0 < n; ++k0) {
            cplx e0 = in[ix] * ph0[k0];
            cplx* base = &out[static_cast<std::size_t>(k0) * n];
            for (int k1 = 0; k1 < n; ++k1) base[k1] += e0 * ph1[k1];
          }
        }
      } else {
        throw BudgetError("diffeo pullback limited to d <= 2");
      }
    }
    return out;
  }

  LatticeGrid g_;
  std::vector<std::array<double, kMaxDim>> points_;
};

LatticeField pullback_field(const LatticeField& f, const NonuniformEval& ev) {
  std::vector<cplx> in(f.v.begin(), f.v.end());
  auto hat = dft_forward(f.grid.dim(), f.grid.n(), in);
  auto vals = ev.forward(hat);
  LatticeField out(f.grid);
  for (std::int64_t i = 0; i < f.grid.sites(); ++i) out.v[i] = vals[i].real();
  return out;
}

}  // namespace

FieldPair diffeo_pullback(const FieldPair& f, const DiffeoSpec& phi) {
  if (!f.f0.grid.same_geometry(f.f1.grid))
    throw std::invalid_argument("diffeo_pullback: component grid mismatch");
  if (phi.b_sup >= 1.0) throw std::invalid_argument("diffeo_pullback: b >= 1");
  if (phi.r0 >= f.f0.grid.length() / 2.0)
    throw std::invalid_argument("diffeo_pullback: deformation region exceeds the torus");
  NonuniformEval ev(f.f0.grid, phi);
  return FieldPair{pullback_field(f.f0, ev), pullback_field(f.f1, ev)};
}

PowerIterationResult diffeo_operator_norm(const LatticeGrid& grid, const DiffeoSpec& phi,
                                          int sign, const MultOperatorOptions& opts) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +-1");
  NonuniformEval ev(grid, phi);
  const std::int64_t total = grid.sites();

  // Weighted conjugation: A = W^{1/2} D W^{-1/2} with W = |p|^{sign} on the
  // zero-mean sector; power iteration on A^T A.
  std::vector<double> whalf(total), winvhalf(total);
  for (std::int64_t i = 0; i < total; ++i) {
    double p = grid.momentum_norm(i);
    if (p == 0.0) {
      whalf[i] = 0.0;
      winvhalf[i] = 0.0;
    } else {
      whalf[i] = std::pow(p, 0.5 * sign);
      winvhalf[i] = 1.0 / whalf[i];
    }
  }

  auto applyA = [&](const std::vector<cplx>& coef) {
    std::vector<cplx> hat(coef);
    for (std::int64_t i = 0; i < total; ++i) hat[i] *= winvhalf[i];
    auto vals = ev.forward(hat);  // f o phi in position space
    auto hat2 = dft_forward(grid.dim(), grid.n(), vals);
    for (std::int64_t i = 0; i < total; ++i) hat2[i] *= whalf[i];
    return hat2;
  };
  auto applyAT = [&](const std::vector<cplx>& coef) {
    std::vector<cplx> hat(coef);
    for (std::int64_t i = 0; i < total; ++i) hat[i] *= whalf[i];
    // F^H = N^d * F^{-1} and E_fwd^H = (1/N^d) E^H: the factors cancel
    auto pos = dft_inverse(grid.dim(), grid.n(), hat);
    auto hat2 = ev.adjoint(pos);
    for (std::int64_t i = 0; i < total; ++i) hat2[i] *= winvhalf[i];
    return hat2;
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> dist;
  std::vector<cplx> v(total);
  for (std::int64_t i = 0; i < total; ++i) v[i] = dist(rng);
  v[0] = 0.0;
  auto nrm = [&](const std::vector<cplx>& z) {
    double s = 0.0;
    for (const auto& c : z) s += std::norm(c);
    return std::sqrt(s);
  };
  double nv = nrm(v);
  for (auto& c : v) c /= nv;

  PowerIterationResult res;
  double prev = -1.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    auto w = applyAT(applyA(v));
    double lambda = nrm(w);
    res.iterations = it;
    if (lambda == 0.0) {
      res.converged = true;
      res.estimate = 0.0;
      return res;
    }
    res.estimate = std::sqrt(lambda);
    for (std::int64_t i = 0; i < total; ++i) v[i] = w[i] / lambda;
    if (prev >= 0.0 && std::abs(res.estimate - prev) <= opts.rel_tol * res.estimate) {
      res.converged = true;
      break;
    }
    prev = res.estimate;
  }
  return res;
}

// --- fractional identity ----------------------------------------------------

namespace {

double angular_factor(int dim, double r) {
  // integral over S^{d-1} of 2 (1 - cos(r u_1)).
  if (dim == 1) return 4.0 * (1.0 - std::cos(r));
  if (dim == 2) return 4.0 * std::numbers::pi * (1.0 - std::cyl_bessel_j(0.0, r));
  double sinc = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
  return 8.0 * std::numbers::pi * (1.0 - sinc);
}

double angular_limit(int dim) {
  if (dim == 1) return 4.0;
  if (dim == 2) return 4.0 * std::numbers::pi;
  return 8.0 * std::numbers::pi;
}

}  // namespace

double fractional_constant(int dim, double s) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("fractional_constant: dim 1..3");
  if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("fractional_constant: s in (0,1)");
  // Gauss-Legendre 8 points per panel.
  static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
  static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  const double R = 2000.0;
  const double panel = 0.25;
  const int npanels = static_cast<int>(R / panel);
  double total = 0.0;
  for (int ip = 0; ip < npanels; ++ip) {
    double lo = ip * panel, hi = lo + panel;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
      double r = mid + half * gx[i];
      if (r <= 0.0) continue;
      acc += gw[i] * angular_factor(dim, r) * std::pow(r, -1.0 - 2.0 * s);
    }
    total += acc * half;
  }
  total += angular_limit(dim) * std::pow(R, -2.0 * s) / (2.0 * s);
  return total;
}

FractionalIdentity fractional_identity(const LatticeField& f, double s) {
  if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("fractional_identity: s in (0,1)");
  const LatticeGrid& g = f.grid;
  const int d = g.dim();

  // Autocorrelation C(z) = sum_y f(y+z) f(y) via the plain DFT.
  std::vector<cplx> in(f.v.begin(), f.v.end());
  auto hat = dft_forward(d, g.n(), in);
  for (auto& z : hat) z = std::norm(z);
  auto corr = dft_inverse(d, g.n(), hat);
  double sum2 = 0.0;
  for (double x : f.v) sum2 += x * x;

  const double a2d = g.cell_volume() * g.cell_volume();
  double lhs = 0.0;
  for (std::int64_t z = 0; z < g.sites(); ++z) {
    if (z == 0) continue;
    auto pos = g.torus_position(z);
    double r2 = 0.0;
    for (int ax = 0; ax < d; ++ax) r2 += pos[ax] * pos[ax];
    double dist = std::sqrt(r2);
    double dz = 2.0 * (sum2 - corr[z].real());
    lhs += dz / std::pow(dist, d + 2.0 * s);
  }
  lhs *= a2d;

  FractionalIdentity out;
  out.a_s = fractional_constant(d, s);
  auto fh = fourier(f);
  const double Ld = std::pow(g.length(), d);
  double rhs = 0.0;
  for (std::int64_t k = 0; k < g.sites(); ++k) {
    double p = g.momentum_norm(k);
    if (p == 0.0) continue;
    rhs += std::norm(fh.v[k]) * std::pow(p, 2.0 * s);
  }
  out.rhs = out.a_s * rhs / Ld;
  out.lhs = lhs;
  return out;
}

}  // namespace qdual::spectral
