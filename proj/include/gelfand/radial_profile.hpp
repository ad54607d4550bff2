#pragma once
// The radial profile w1 solving
//   -w1'' - w1'/r - 8 w1/(1+r^2)^2 = 4 r^2/(1+r^2)^2  on (0, inf),
// regular at 0 and normalized so that w1(r) = -2 log^2 r + 4 log r + o(1).
//
// Built by variation of constants around the homogeneous solution
// w0(r) = (1-r^2)/(1+r^2):
//   w1(r) = w0(r) (u0 - A(r)) - Phi(1) r(1+r)/(1+r^2),
//   A(r) = int_0^r psi,  psi(s) = (Phi(s) - Phi(1))/(1-s)^2  (removable at 1),
//   Phi(s) = g(s) (1+s^2)^2 / (s (1+s)^2),
//   g(s) = int_0^s 4t^3(1-t^2)/(1+t^2)^3 dt  (closed form),
// with u0 fixed so the asymptote -2 log^2 r + 4 log r carries no additive
// constant (numerically u0 = -(3 + pi^2/6)).

#include <vector>

namespace gelfand {

struct RadialProfile {
  double r_min = 0.0, r_max = 0.0;
  double u0 = 0.0;           // calibration constant; also w1(0)
  double asymptote_bound = 0.0;  // sup |(w1 + 2log^2 r - 4log r) r^2/log^2 r|
  std::vector<double> grid;  // log-spaced radii (plus 0)
  std::vector<double> w;     // w1 at grid
  std::vector<double> dw;    // w1' at grid
  std::vector<double> A;     // cumulative integral of psi at grid

  double value(double r) const;       // asymptote beyond r_max
  double derivative(double r) const;
};

RadialProfile solve_w1(double r_max = 1e4);

// Closed forms used across the correction assembly.
double w_hat2(double y1, double y2);  // (y1^2-y2^2)/(1+|y|^2)
double w_hat3(double y1, double y2);  // y1 y2 /(1+|y|^2)

}  // namespace gelfand
