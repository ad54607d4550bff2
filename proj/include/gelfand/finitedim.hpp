#pragma once
// The finite-dimensional equation grad P(xi) = eta0 for a homogeneous
// polynomial P of degree N+1: nodal-line count M, the degree formula 1-M, an
// independent winding-number oracle, and the explicit polar-reduction solver
// with stability classification.

#include <vector>

#include "gelfand/homopoly.hpp"

namespace gelfand {

struct CriticalPoint {
  Vec2 xi;
  double r = 0.0, t = 0.0;    // polar coordinates
  double hess_det = 0.0;      // det Hess P at xi
  int local_degree = 0;       // sign of hess_det (0 if degenerate)
  bool degenerate = false;
  bool stable = false;        // nondegenerate => stable
};

struct CriticalPointReport {
  std::vector<CriticalPoint> solutions;
  int M = 0;                  // nodal-line count of P
  int degree_formula = 0;     // 1 - M
  int degree_winding = 0;     // independent oracle
  double containment_radius = 0.0;  // every solution has r <= this bound
  double residual_max = 0.0;  // max |grad P(xi) - eta0| over solutions
};

// Number of distinct roots of p(t) in [0, pi). Requires admissibility
// (polar_min_invariant > 0), which makes every root simple.
int nodal_line_count(const HomogeneousPoly& P);

inline int degree_formula(const HomogeneousPoly& P) {
  return 1 - nodal_line_count(P);
}

// Winding number of grad P - eta0 around the circle of radius R, by adaptive
// polygonal angle accumulation (refined until each increment < pi/2).
int degree_winding(const HomogeneousPoly& P, Vec2 eta0, double R);

// Radius bound (r0^2 / C)^(1/2N) with C = polar_min_invariant, r0 = |eta0|:
// all solutions lie inside, and any larger R is valid for degree_winding.
double containment_radius(const HomogeneousPoly& P, Vec2 eta0);

// Solve grad P(xi) = eta0 via the polar reduction, classify each solution by
// the Hessian determinant, and cross-check the degree count.
CriticalPointReport solve_reduced_equation(const HomogeneousPoly& P, Vec2 eta0);

}  // namespace gelfand
