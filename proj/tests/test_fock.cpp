#include <doctest.h>

#include <cmath>
#include <random>

#include "qdual/errors.hpp"
#include "qdual/fock.hpp"

using namespace qdual::fock;

namespace {

CVec unit(std::complex<double> z) {
  CVec f(1);
  f << z;
  return f;
}

}  // namespace

TEST_CASE("ladder commutators are exact below the cutoff") {
  FockContext ctx(2, 8);
  CHECK(ctx.dim() == 45);  // C(10, 2)
  for (int mode = 0; mode < 2; ++mode) {
    CMat comm = ctx.annihilator(mode) * ctx.annihilator(mode).adjoint() -
                ctx.annihilator(mode).adjoint() * ctx.annihilator(mode);
    for (int i = 0; i < ctx.dim(); ++i) {
      if (ctx.total_occupation(i) < ctx.cutoff())
        CHECK(comm(i, i).real() == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS(FockContext(5, 4));
}

TEST_CASE("field operators: two-point function and CCR") {
  FockContext ctx(2, 10);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 5; ++trial) {
    CVec f(2), g(2);
    for (int i = 0; i < 2; ++i) {
      f(i) = std::complex<double>(dist(rng), dist(rng)) * 0.5;
      g(i) = std::complex<double>(dist(rng), dist(rng)) * 0.5;
    }
    CMat phif = ctx.field_operator(f);
    CHECK((phif - phif.adjoint()).norm() < 1e-12);
    // vacuum two-point function
    auto two = ctx.vacuum_expectation(phif * ctx.field_operator(g));
    CHECK(std::abs(two - pairing(f, g)) < 1e-12);
    // [Phi(f), Phi(g)] = 2 i sigma on low states
    CMat comm = phif * ctx.field_operator(g) - ctx.field_operator(g) * phif;
    CMat p = ctx.low_block(ctx.cutoff() - 2);
    CMat want = std::complex<double>(0, 2.0 * sympl(f, g)) * CMat::Identity(ctx.dim(), ctx.dim());
    CHECK((p * (comm - want) * p).norm() < 1e-10);
  }
  CHECK(ctx.field_operator(CVec::Zero(2)).norm() == 0.0);
}

TEST_CASE("weyl operators") {
  FockContext ctx(1, 12);
  CVec zero = CVec::Zero(1);
  CHECK((ctx.weyl(zero) - CMat::Identity(ctx.dim(), ctx.dim())).norm() < 1e-12);

  CVec f = unit(std::complex<double>(0.6, 0.3));
  CMat w = ctx.weyl(f);
  CHECK((w * w.adjoint() - CMat::Identity(ctx.dim(), ctx.dim())).norm() < 1e-10);
  CHECK((w * ctx.weyl(-f) - CMat::Identity(ctx.dim(), ctx.dim())).norm() < 1e-8);

  // vacuum expectation: coherent overlap e^{-|f|^2/2}
  CVec g = unit(std::complex<double>(1.0, 0.0));
  double vac = std::abs(ctx.vacuum_expectation(ctx.weyl(g)) - std::exp(-0.5));
  CHECK(vac < 1e-6);
}

TEST_CASE("weyl relation residual") {
  CVec f = unit(std::complex<double>(0.4, 0.2));
  CVec g = unit(std::complex<double>(-0.1, 0.45));
  double prev = 1e300;
  for (int k : {8, 12, 16}) {
    FockContext ctx(1, k);
    double res = weyl_relation_residual(ctx, f, g);
    CHECK(res < prev);
    prev = res;
  }
  FockContext ctx(1, 16);
  // f = g: compares W(f)^2 to W(2f)
  CHECK(weyl_relation_residual(ctx, f, f) < 1e-6);
  // real-proportional arguments commute: residual at the same scale
  CVec f2 = 0.5 * f;
  CHECK(weyl_relation_residual(ctx, f, f2) < 1e-8);
}

TEST_CASE("commutation versus the symplectic phase") {
  FockContext ctx(2, 14);
  // sigma = 0: commuting
  CVec a = CVec::Zero(2), b = CVec::Zero(2);
  a(0) = 0.5;
  b(0) = 0.3;  // parallel real vectors
  auto rep0 = commutation_vs_symplectic(ctx, a, b);
  CHECK(rep0.measured < 1e-6);

  // sigma = pi/2 through a single mode: |e^{-i pi} - 1| = 2
  FockContext c1(1, 14);
  double s = std::sqrt(std::numbers::pi / 2.0);
  CVec fa = unit(s), fb = unit(std::complex<double>(0.0, s));
  auto rep = commutation_vs_symplectic(c1, fa, fb);
  CHECK(rep.sigma == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(rep.measured == doctest::Approx(rep.predicted).epsilon(1e-2));

  std::mt19937_64 rng(9);
  std::normal_distribution<double> dist;
  for (int t = 0; t < 4; ++t) {
    CVec f(2), g(2);
    for (int i = 0; i < 2; ++i) {
      f(i) = std::complex<double>(dist(rng), dist(rng)) * 0.35;
      g(i) = std::complex<double>(dist(rng), dist(rng)) * 0.35;
    }
    auto r = commutation_vs_symplectic(ctx, f, g);
    CHECK(std::abs(r.measured - r.predicted) < 1e-5);
  }
}

TEST_CASE("relative commutants at finite truncation") {
  FockContext ctx(1, 10);
  CVec e1 = unit(0.55);
  RealSubspace h{{e1, std::complex<double>(0, 1) * e1}};
  RealSubspace v{{e1}};

  // sigma-complement of the real line is itself
  RealSubspace vc = relative_symplectic_complement(v, h);
  REQUIRE(vc.vectors.size() == 1);
  CHECK(std::abs(sympl(vc.vectors[0], e1)) < 1e-12);

  auto rep = relative_commutant_dims(ctx, v, h);
  CHECK(rep.difference == 0);
  CHECK(rep.dim_commutant == rep.dim_predicted);

  // V = H: both sides collapse to the scalars
  auto repf = relative_commutant_dims(ctx, h, h);
  CHECK(repf.dim_commutant == 1);
  CHECK(repf.dim_predicted == 1);

  // basis-choice invariance: rotate the generators of V
  RealSubspace vrot{{unit(std::complex<double>(0.55, 0.0) * std::polar(1.0, 0.0))}};
  auto rep2 = relative_commutant_dims(ctx, vrot, h);
  CHECK(rep2.dim_commutant == rep.dim_commutant);

  // the cap refuses larger problems
  FockContext big(2, 12);
  CHECK_THROWS_AS(relative_commutant_dims(big, v, h), qdual::BudgetError);
}
