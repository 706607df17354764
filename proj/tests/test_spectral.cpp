#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qdual/errors.hpp"
#include "qdual/spectral.hpp"

using namespace qdual;
using namespace qdual::spectral;

namespace {

LatticeField random_zero_mean(const LatticeGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  LatticeField f(g);
  for (auto& x : f.v) x = dist(rng);
  return remove_mean(f);
}

LatticeField bump(const LatticeGrid& g, double r0) {
  LatticeField f(g);
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    auto x = g.torus_position(i);
    double r2 = 0.0;
    for (int ax = 0; ax < g.dim(); ++ax) r2 += x[ax] * x[ax];
    double u2 = r2 / (r0 * r0);
    f.v[i] = u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0;
  }
  return f;
}

}  // namespace

TEST_CASE("omega powers") {
  LatticeGrid massive(2, 16, 0.5, 1.0);
  // constant field is fixed by every power when m = 1 (omega(0) = 1)
  LatticeField c(massive);
  for (auto& x : c.v) x = 3.25;
  for (double s : {0.5, -0.5, 2.0}) {
    LatticeField r = apply_omega_power(c, s);
    for (auto v : r.v) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
  }

  // single massless mode is scaled by |p|
  LatticeGrid massless(1, 32, 0.5, 0.0);
  double p1 = 2.0 * std::numbers::pi / massless.length();
  LatticeField mode(massless);
  for (std::int64_t i = 0; i < massless.sites(); ++i)
    mode.v[i] = std::cos(p1 * i * massless.spacing());
  LatticeField r = apply_omega_power(mode, 1.0);
  for (std::int64_t i = 0; i < massless.sites(); ++i)
    CHECK(r.v[i] == doctest::Approx(p1 * mode.v[i]).epsilon(1e-10));

  // round trip +1/2 then -1/2 on zero-mean fields
  LatticeGrid g2(2, 16, 0.5, 0.0);
  LatticeField f = random_zero_mean(g2, 17);
  LatticeField rt = apply_omega_power(apply_omega_power(f, 0.5), -0.5);
  for (std::int64_t i = 0; i < g2.sites(); ++i)
    CHECK(std::abs(rt.v[i] - f.v[i]) < 1e-12);

  // zero-mode violation for massless negative powers
  LatticeField bad(g2);
  for (auto& x : bad.v) x = 1.0;
  CHECK_THROWS(apply_omega_power(bad, -0.5));

  // self-adjointness and multiplier commutation
  LatticeField a = random_zero_mean(g2, 19), b = random_zero_mean(g2, 23);
  CHECK(inner_l2(a, apply_omega_power(b, 0.5)) ==
        doctest::Approx(inner_l2(apply_omega_power(a, 0.5), b)).epsilon(1e-12));
  LatticeField ab = apply_omega_power(apply_omega_power(a, 0.5), -1.0);
  LatticeField ba = apply_omega_power(apply_omega_power(a, -1.0), 0.5);
  for (std::int64_t i = 0; i < g2.sites(); ++i) CHECK(std::abs(ab.v[i] - ba.v[i]) < 1e-12);
}

TEST_CASE("free-field norms") {
  LatticeGrid g(1, 64, 0.25, 0.0);
  LatticeField zero(g);
  CHECK(norm_pm(zero, +1) == 0.0);

  // single unit-amplitude mode at |p| = 2pi/L: norm^2 = |p| L^d / 2 in the
  // fixed normalization (|cos|^2 integrates to L/2)
  double p1 = 2.0 * std::numbers::pi / g.length();
  LatticeField mode(g);
  for (std::int64_t i = 0; i < g.sites(); ++i) mode.v[i] = std::cos(p1 * i * g.spacing());
  double want = std::sqrt(p1 * g.length() / 2.0);
  CHECK(norm_pm(mode, +1) == doctest::Approx(want).epsilon(1e-12));

  // norm_minus coincides with the L2 norm of omega^{-1/2} f when m = 0
  LatticeField f = random_zero_mean(g, 29);
  CHECK(norm_pm(f, -1) ==
        doctest::Approx(norm_l2(apply_omega_power(f, -0.5))).epsilon(1e-10));
}

TEST_CASE("mollifier") {
  LatticeGrid g(2, 64, 1.0 / 64.0, 0.0);
  for (int n : {4, 8, 16}) {
    LatticeField rho = mollifier(g, n);
    double total = 0.0;
    for (double v : rho.v) total += v;
    CHECK(total * g.cell_volume() == doctest::Approx(1.0).epsilon(1e-13));
    for (std::int64_t i = 0; i < g.sites(); ++i) {
      Coords c = g.coords(i);
      Coords neg{-c[0], -c[1], 0};
      CHECK(rho.v[i] == rho.v[g.index(neg)]);
      auto x = g.torus_position(i);
      if (std::sqrt(x[0] * x[0] + x[1] * x[1]) > 1.0 / n) CHECK(rho.v[i] == 0.0);
    }
  }
  CHECK_THROWS(mollifier(g, 64));  // unresolvable radius
}

TEST_CASE("convolution") {
  LatticeGrid g(2, 16, 0.5, 0.0);
  LatticeField f = bump(g, 2.0);

  // identity kernel: the lattice delta 1/a^d at the origin
  LatticeField delta(g);
  delta.v[0] = 1.0 / g.cell_volume();
  LatticeField conv = convolve(f, delta);
  for (std::int64_t i = 0; i < g.sites(); ++i)
    CHECK(conv.v[i] == doctest::Approx(f.v[i]).epsilon(1e-11));

  // symmetry
  LatticeField k = bump(g, 1.0);
  LatticeField fk = convolve(f, k), kf = convolve(k, f);
  for (std::int64_t i = 0; i < g.sites(); ++i) CHECK(std::abs(fk.v[i] - kf.v[i]) < 1e-12);

  // exact commutation with a one-site translation
  LatticeField ft(g);
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    Coords c = g.coords(i);
    c[0] -= 1;
    ft.v[i] = f.v[g.index(c)];
  }
  LatticeField conv_t = convolve(ft, k);
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    Coords c = g.coords(i);
    c[0] -= 1;
    CHECK(std::abs(conv_t.v[i] - fk.v[g.index(c)]) < 1e-11);
  }

  // support additivity: indicator * mollifier stays in B + ball(1/n)
  LatticeGrid gm(2, 64, 1.0 / 64.0, 0.0);
  LatticeField ind(gm);
  for (std::int64_t i = 0; i < gm.sites(); ++i) {
    auto x = gm.torus_position(i);
    if (std::sqrt(x[0] * x[0] + x[1] * x[1]) < 0.2) ind.v[i] = 1.0;
  }
  LatticeField rho = mollifier(gm, 8);
  LatticeField sm = convolve(ind, rho);
  double peak = 0.0;
  for (double v : sm.v) peak = std::max(peak, std::abs(v));
  for (std::int64_t i = 0; i < gm.sites(); ++i) {
    auto x = gm.torus_position(i);
    double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    if (r > 0.2 + 1.0 / 8.0 + 2.0 * gm.spacing()) CHECK(std::abs(sm.v[i]) < 1e-12 * peak);
  }

  LatticeGrid other(2, 32, 0.5, 0.0);
  CHECK_THROWS(convolve(f, LatticeField(other)));
}

TEST_CASE("multiplication operator norm") {
  LatticeGrid g(2, 32, 0.5, 0.0);
  // chi == 1: the conjugated operator is the identity on the zero-mean sector
  LatticeField one(g);
  for (auto& x : one.v) x = 1.0;
  auto res = mult_operator_norm_estimate(one, +1);
  CHECK(res.estimate == doctest::Approx(1.0).epsilon(1e-8));

  LatticeField zero(g);
  auto rz = mult_operator_norm_estimate(zero, -1);
  CHECK(rz.estimate == 0.0);
}

TEST_CASE("infrared Hilbert-Schmidt block") {
  LatticeGrid g(2, 16, 0.5, 0.0);
  LatticeField zero(g);
  CHECK(infrared_hs_norm(zero, +1) == 0.0);

  // constant chi: kernel factor vanishes at p = q and chihat is a delta
  LatticeField one(g);
  for (auto& x : one.v) x = 1.0;
  CHECK(infrared_hs_norm(one, +1) < 1e-14);
  CHECK(infrared_hs_norm(one, -1) < 1e-14);

  LatticeGrid big(2, 256, 0.1, 0.0);
  LatticeField chi(big);
  CHECK_THROWS_AS(infrared_hs_norm(chi, +1, 1000), BudgetError);
}

TEST_CASE("schur report") {
  LatticeGrid g(2, 16, 0.5, 0.0);
  LatticeField zero(g);
  auto rep = schur_bound_check(zero, +1);
  CHECK(rep.row_sum_sup == 0.0);
  CHECK(rep.col_sum_sup == 0.0);
  CHECK(rep.block_norm_estimate == 0.0);

  LatticeField chi = bump(g, 2.0);
  for (int sign : {+1, -1}) {
    auto r = schur_bound_check(chi, sign);
    CHECK(r.bound_holds);
    CHECK(r.block_norm_estimate <= r.geometric_mean * (1.0 + 1e-8));
  }
}

TEST_CASE("dilation") {
  LatticeGrid g(2, 64, 0.25, 0.0);
  FieldPair f{bump(g, 2.0), bump(g, 1.5)};
  // lambda = 1 is the identity
  auto same = dilation(f, 1.0, true);
  for (std::int64_t i = 0; i < g.sites(); ++i) {
    CHECK(std::abs(same.f0.v[i] - f.f0.v[i]) < 1e-10);
    CHECK(std::abs(same.f1.v[i] - f.f1.v[i]) < 1e-10);
  }
  // wraparound guard
  FieldPair wide{bump(g, 7.0), bump(g, 7.0)};
  CHECK_THROWS(dilation(wide, 2.0, true));
  LatticeGrid gm(2, 64, 0.25, 1.0);
  FieldPair fm{bump(gm, 2.0), bump(gm, 1.5)};
  CHECK_THROWS(dilation(fm, 0.9, true));  // massless flag on a massive grid
}

TEST_CASE("diffeo family and pullback") {
  auto phi = radial_shear_with_b(2, 4.0, 0.1);
  CHECK(phi.b_sup == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(phi.a_sup > 0.0);
  CHECK_THROWS(radial_shear(2, 4.0, 5.0));  // b >= 1

  // identity member: operator norm estimate stays at 1 within slack
  LatticeGrid g(2, 32, 0.5, 0.0);
  auto id = radial_shear(2, 4.0, 0.0);
  MultOperatorOptions opts;
  opts.max_iterations = 40;
  opts.rel_tol = 1e-7;
  auto est = diffeo_operator_norm(g, id, +1, opts);
  CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-6));

  // pullback by the identity member is the identity
  FieldPair f{bump(g, 3.0), bump(g, 2.0)};
  auto pb = diffeo_pullback(f, id);
  for (std::int64_t i = 0; i < g.sites(); ++i)
    CHECK(std::abs(pb.f0.v[i] - f.f0.v[i]) < 1e-10);
}

TEST_CASE("fractional identity") {
  // quadrature constant: d=1, s=1/2 must give 2 pi
  CHECK(std::abs(fractional_constant(1, 0.5) - 2.0 * std::numbers::pi) < 1e-4);
  CHECK_THROWS(fractional_constant(1, 1.5));

  LatticeGrid g(2, 16, 0.5, 0.0);
  LatticeField zero(g);
  auto idz = fractional_identity(zero, 0.5);
  CHECK(idz.lhs == 0.0);
  CHECK(idz.rhs == 0.0);
  CHECK(idz.a_s > 0.0);

  // the autocorrelation route equals the direct double sum
  LatticeField f = bump(g, 1.5);
  auto id = fractional_identity(f, 0.5);
  double direct = oracles::fractional_lhs_direct(f, 0.5);
  CHECK(id.lhs == doctest::Approx(direct).epsilon(1e-10));
}
