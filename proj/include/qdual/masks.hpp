#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "qdual/lattice.hpp"

namespace qdual {

using Mask = std::vector<std::int64_t>;  // sorted site indices

Mask ball_mask(const LatticeGrid& grid, const std::vector<double>& center, double radius);
Mask box_mask(const LatticeGrid& grid, const std::vector<double>& center, double half_width);
/// Mask plus `rings` layers of Chebyshev-adjacent sites (the lattice closure
/// convention uses one ring).
Mask inflate(const LatticeGrid& grid, const Mask& mask, int rings);
Mask mask_difference(const Mask& a, const Mask& b);
Mask mask_union(const Mask& a, const Mask& b);
bool mask_contains(const Mask& m, std::int64_t site);
Mask translate_mask(const LatticeGrid& grid, const Mask& m, const Coords& shift);

inline Mask full_mask(const LatticeGrid& grid) {
  Mask m(grid.sites());
  for (std::int64_t i = 0; i < grid.sites(); ++i) m[i] = i;
  return m;
}

}  // namespace qdual
