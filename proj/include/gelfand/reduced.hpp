#pragma once
// The reduced functional F(xi) = H(xi,xi) + (1/4pi) log V(xi), the
// interaction functional E(x,xi), admissible potentials of order N, the
// homogeneous polynomial P (prefactor 4 pi^2/(N+1)), and the vector eta0.

#include <string>
#include <vector>

#include "gelfand/greens.hpp"
#include "gelfand/homopoly.hpp"

namespace gelfand {

// V(x) = exp(logV(x)) with logV a bivariate polynomial: positive by
// construction, with exact derivatives.
struct Potential {
  Eigen::MatrixXd log_coef;  // log_coef(i,j) multiplies x^i y^j

  double log_v(Vec2 p) const;
  double v(Vec2 p) const { return std::exp(log_v(p)); }
  Vec2 grad_log_v(Vec2 p) const;
  // gradient of (Laplace log V) at the origin, exact from coefficients
  Vec2 grad_laplace_log_v0() const;

  static Potential constant(double V0);
};

struct ReducedFunctional {
  const Domain* dom = nullptr;
  Potential pot;
  int N = 2;
  // deriv[k][j] = d^k F / dx^(k-j) dy^j at 0, for k = 1..N+1 (index 0 unused)
  std::vector<Eigen::VectorXd> deriv;
  double fd_noise = 0.0;  // worst Richardson discrepancy over all entries
};

ReducedFunctional make_reduced_functional(const Domain& d, const Potential& pot,
                                          int N);

double eval_F(const ReducedFunctional& rf, Vec2 xi);
double eval_E(const ReducedFunctional& rf, Vec2 x, Vec2 xi);

// x-derivatives of E(., xi) at x = xi, through third order (all distinct
// partials). Computed from the jet of g(x) = 8pi(H(x,xi) - H(xi,xi)) +
// logV(x) - logV(xi) via E = e^g - 1.
struct EDerivatives {
  double E1 = 0, E2 = 0;
  double E11 = 0, E12 = 0, E22 = 0;
  double E111 = 0, E112 = 0, E122 = 0, E222 = 0;
};
EDerivatives eval_E_derivatives(const ReducedFunctional& rf, Vec2 xi);

// P(xi) = (4 pi^2/(N+1)) <D^{N+1}F(0), xi, ..., xi>.
HomogeneousPoly build_P(const ReducedFunctional& rf);

struct AdmissibilityReport {
  bool admissible = false;
  double max_low_order = 0.0;   // largest |derivative| of order <= N at 0
  double tolerance = 0.0;       // threshold used for the above
  double polar_min = 0.0;       // min over the circle of (N+1)^2 p^2 + p'^2
  std::string failure;          // empty if admissible
};
AdmissibilityReport admissibility_check(const ReducedFunctional& rf);

// eta0 with the common factor (V(0)/8) e^{8 pi H(0,0)}; formula switches on
// N = 2 vs N >= 3.
Vec2 compute_eta0(const ReducedFunctional& rf);

// logV := 4pi (target - T_{N+1}[R]) + offset, with T_{N+1}[R] the Taylor
// polynomial at 0 of the Robin function R(x) = H(x,x) through order N+1.
// The resulting F has vanishing derivatives at 0 through order N and
// D^{N+1}F = D^{N+1} target.
Potential build_admissible_potential(const Domain& d, const HomogeneousPoly& target,
                                     int N, double offset = 0.0);

}  // namespace gelfand
