#pragma once
// Regular part H of the Dirichlet Green function, its derivatives, and the
// family of harmonic extensions with prescribed singular boundary data.
//
// H(x,y) = G(x,y) + (1/2pi) log|x-y| is harmonic in x with boundary trace
// (1/2pi) log|x-y|. On the unit disk the image-charge closed form
// H(x,y) = (1/4pi) log(|x|^2|y|^2 - 2 x.y + 1) is used when the domain's
// analytic flag is set; otherwise H(.,y) is one Dirichlet solve.

#include "gelfand/geometry.hpp"
#include "gelfand/poisson.hpp"

namespace gelfand {

// Closed form on the unit disk (any x, y with |y| < 1).
double regular_part_disk(Vec2 x, Vec2 y);

// H(., y) as a mesh field (numeric path; works on any domain).
GridFunction regular_part_field(const Domain& d, Vec2 y);

// H(x, y). Uses the closed form when available, else a solve + interpolation.
double regular_part(const Domain& d, Vec2 x, Vec2 y);

struct RegularPartDerivatives {
  Vec2 grad_x;                   // gradient of H(., at) at x = at
  double mixed[2][2] = {{0, 0}, {0, 0}};  // d^2 H / dx_i dy_j at (at, at)
  double mixed_trace = 0.0;               // mixed[0][0] + mixed[1][1]
  Vec2 grad_mixed_trace;         // x-gradient of the mixed trace at (at, at)
};

// order 1: grad_x only. order 2: also the mixed second derivatives and the
// x-gradient of their trace. Central differences with one Richardson level;
// on numeric domains the x-steps are snapped to mesh nodes.
RegularPartDerivatives regular_part_derivatives(const Domain& d, int order, Vec2 at);

// Harmonic extensions of the boundary data
//   L1: log^2|x-xi|   L2: ((x1-xi1)^2-(x2-xi2)^2)/|x-xi|^2
//   L3: (x1-xi1)(x2-xi2)/|x-xi|^2   I: 1/|x-xi|^2
struct HarmonicFamily {
  double L1 = 0, L2 = 0, L3 = 0, I = 0;  // values at xi
};
struct HarmonicFamilyFields {
  GridFunction L1, L2, L3, I;
};

HarmonicFamilyFields harmonic_extension_family_fields(const Domain& d, Vec2 xi);
HarmonicFamily harmonic_extension_family(const Domain& d, Vec2 xi);

}  // namespace gelfand
