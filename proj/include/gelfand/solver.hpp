#pragma once
// Damped Newton solver for the discretized problem -Lap u = rho^2 V e^u with
// zero Dirichlet data, a seeding helper that samples an ansatz (assembled on
// a coarse mesh) at the nodes of a finer per-rho mesh, a branch driver that
// locates the discrete concentration point before the final Newton run, and
// blow-up diagnostics (peak, height, mass, far-field supremum).

#include <Eigen/Dense>

#include "gelfand/ansatz.hpp"

namespace gelfand {

struct NewtonOptions {
  int max_iterations = 40;
  int max_backtracks = 25;
  double tolerance = 1e-9;  // relative to the seed residual, inf-norm
  bool verbose = false;     // one line per accepted step on stderr
};

struct NewtonResult {
  GridFunction u;
  bool converged = false;
  int iterations = 0;
  double initial_residual = 0.0;  // ||A u0 - rho^2 V e^{u0}||_inf
  double final_residual = 0.0;
  std::vector<double> history;    // residual after each accepted step
};

NewtonResult solve_gelfand(const Domain& d, const Potential& pot, double rho,
                           const GridFunction& seed,
                           const NewtonOptions& opts = {});

// Pointwise evaluation of the ansatz at the nodes of another (usually finer)
// mesh; the boundary trace is zero like the ansatz itself.
GridFunction sample_ansatz(const Ansatz& a, const Domain& fine);

// Sub-mesh estimate of the concentration point: e^u-weighted centroid of the
// nodes within 5 mu of the maximum.
Vec2 peak_centroid(const Domain& d, const GridFunction& u, double mu);

// Branch solve with an explicit position search. The discrete solution
// concentrates a little away from the asymptotic prediction, and the basin of
// a plain Newton run is position-limited: a damped step can only translate
// the bubble a small fraction of mu, so Newton crawls when the seed position
// is off. The driver instead pins the position with two linear constraints
// B_i^T u = B_i^T seed (B_i = e^U psi_i, the translation modes), solves the
// bordered system fast at fixed xi, and reads the two Lagrange multipliers
// lambda(xi) - the discrete analogue of the reduced equation. A Broyden
// iteration moves xi to the zero of lambda; once the predicted position
// update falls below settle_fraction * mu, the pinned iterate is an
// unconstrained solution to within ||B lambda|| and plain Newton polishes it.
struct BranchOptions {
  int max_outer = 12;             // Broyden iterations on the position
  int inner_iterations = 25;      // pinned Newton iterations per position
  double settle_fraction = 0.02;  // of mu: accepted position uncertainty
  double fd_fraction = 0.2;       // of mu: finite-difference Jacobian step
  double trust_fraction = 2.0;    // of mu: cap on one position update
  bool have_jacobian = false;     // warm-start the Broyden Jacobian
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
  NewtonOptions newton;           // final unconstrained polish
};
struct BranchResult {
  NewtonResult newton;      // the final unconstrained run
  Vec2 xi_seed, xi;         // requested and settled concentration points
  int outer = 0;            // position updates taken
  int multiplier_evals = 0; // bordered solves (including the Jacobian setup)
  double multiplier_norm = 0.0;      // |lambda| at the accepted position
  Eigen::Matrix2d jacobian;          // final Broyden Jacobian (d lambda/d xi)
};
BranchResult solve_branch(const ReducedFunctional& rf,
                          const RadialProfile& profile, double rho, Vec2 xi_start,
                          const Domain& fine, const BranchOptions& opts = {});

struct BlowupDiagnostics {
  Vec2 peak;           // node of the maximum of u
  double height = 0.0; // u at that node
  double mass = 0.0;   // midpoint quadrature of rho^2 V e^u
  double sup_far = 0.0; // sup of |u| at distance >= far_radius from the peak
};
BlowupDiagnostics blowup_diagnostics(const Domain& d, const Potential& pot,
                                     double rho, const GridFunction& u,
                                     double far_radius = 0.25);

}  // namespace gelfand
