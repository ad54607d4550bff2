#pragma once
// Homogeneous polynomials P(xi) of degree d in two variables, with the polar
// form P(r e^{it}) = r^d p(t). Stored as coefficients over the monomial basis
// xi1^(d-k) xi2^k; p and its t-derivatives are evaluated exactly by the chain
// rule from the gradient/Hessian on the unit circle.

#include <Eigen/Dense>

#include "gelfand/geometry.hpp"

namespace gelfand {

struct HomogeneousPoly {
  int degree = 0;
  Eigen::VectorXd coef;  // size degree+1; coef[k] multiplies xi1^(d-k) xi2^k

  HomogeneousPoly() = default;
  HomogeneousPoly(int d, Eigen::VectorXd c) : degree(d), coef(std::move(c)) {}

  double eval(Vec2 xi) const;
  Vec2 grad(Vec2 xi) const;
  Eigen::Matrix2d hess(Vec2 xi) const;

  // Polar form values on the unit circle.
  double p(double t) const { return eval({std::cos(t), std::sin(t)}); }
  double dp(double t) const;
  double ddp(double t) const;

  // Q_M = Re((xi1 + i xi2)^M).
  static HomogeneousPoly harmonic_mode(int M);
};

// min over [0, 2pi] of (d^2) p(t)^2 + p'(t)^2, with d = degree: the quantity
// whose positivity makes the polar reduction solvable. Grid scan (4096
// intervals) with golden-section refinement near small minima.
double polar_min_invariant(const HomogeneousPoly& P);

// Admissible iff the invariant above is bounded away from zero relative to
// its maximum over the circle (threshold 1e-12).
bool is_admissible(const HomogeneousPoly& P);

}  // namespace gelfand
