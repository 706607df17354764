#include <doctest.h>

#include <random>

#include "qdual/lattice.hpp"
#include "qdual/masks.hpp"

using namespace qdual;

TEST_CASE("fourier roundtrip and Parseval") {
  LatticeGrid grid(2, 16, 0.5, 1.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  LatticeField f(grid);
  for (auto& x : f.v) x = dist(rng);

  auto fh = fourier(f);
  LatticeField back = inverse_fourier(fh);
  double err = 0.0;
  for (std::int64_t i = 0; i < grid.sites(); ++i)
    err = std::max(err, std::abs(back.v[i] - f.v[i]));
  CHECK(err < 1e-12);

  // Hermitian symmetry of the transform of a real field
  double herm = 0.0;
  for (std::int64_t i = 0; i < grid.sites(); ++i) {
    Coords c = grid.coords(i);
    Coords neg{0, 0, 0};
    for (int ax = 0; ax < grid.dim(); ++ax) neg[ax] = -c[ax];
    herm = std::max(herm, std::abs(fh.v[i] - std::conj(fh.v[grid.index(neg)])));
  }
  CHECK(herm < 1e-10);

  // Parseval with the fixed normalization
  double pos = inner_l2(f, f);
  double mom = 0.0;
  for (const auto& z : fh.v) mom += std::norm(z);
  mom /= std::pow(grid.length(), grid.dim());
  CHECK(pos == doctest::Approx(mom).epsilon(1e-12));
}

TEST_CASE("grid invariants") {
  CHECK_THROWS(LatticeGrid(2, 10, 1.0, 0.0));  // not a power of two
  CHECK_THROWS(LatticeGrid(2, 2, 1.0, 0.0));   // too small
  CHECK_THROWS(LatticeGrid(2, 16, -1.0, 0.0));
  CHECK_THROWS(LatticeGrid(2, 16, 1.0, -1.0));
  CHECK_THROWS(LatticeGrid(4, 16, 1.0, 0.0));

  LatticeGrid grid(3, 8, 0.25, 2.0);
  CHECK(grid.sites() == 512);
  CHECK(grid.length() == doctest::Approx(2.0));
  CHECK(grid.omega(0) == doctest::Approx(2.0));  // dispersion at p=0 is the mass
}

TEST_CASE("multiplier application is the identity for symbol one") {
  LatticeGrid grid(1, 32, 1.0, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  LatticeField f(grid);
  for (auto& x : f.v) x = dist(rng);
  std::vector<double> one(grid.sites(), 1.0);
  LatticeField g = apply_multiplier(f, one);
  for (std::int64_t i = 0; i < grid.sites(); ++i)
    CHECK(g.v[i] == doctest::Approx(f.v[i]).epsilon(1e-12));
}

TEST_CASE("masks: ball, inflate, difference, translate") {
  LatticeGrid grid(2, 16, 1.0, 1.0);
  Mask ball = ball_mask(grid, {}, 2.5);
  CHECK(ball.size() == 21);  // |x| < 2.5 on the integer lattice

  Mask ring = inflate(grid, ball, 1);
  CHECK(ring.size() > ball.size());
  Mask shell = mask_difference(ring, ball);
  CHECK(shell.size() == ring.size() - ball.size());

  Coords shift{3, -2, 0};
  Mask moved = translate_mask(grid, ball, shift);
  CHECK(moved.size() == ball.size());
  CHECK(mask_union(ball, moved).size() <= ball.size() + moved.size());
}
