#pragma once
// Correction terms around the projected bubble: the local correction w_hat
// (radial profile w1 plus the closed-form anisotropic parts, combined with
// second derivatives of the interaction functional E), its projection to zero
// boundary trace, the global correction W_tilde (Dirichlet solve against the
// Taylor-subtracted interaction remainder), the auxiliary Theta, and the
// implicitly defined concentration parameter tau.

#include "gelfand/radial_profile.hpp"
#include "gelfand/reduced.hpp"

namespace gelfand {

struct CorrectionBundle {
  const Domain* dom = nullptr;
  const ReducedFunctional* rf = nullptr;
  const RadialProfile* profile = nullptr;
  double rho = 0.0;
  double tau = 0.0;
  Vec2 xi;

  EDerivatives ed;                 // derivatives of E(., xi) at xi
  double c111 = 0, c112 = 0, c122 = 0, c222 = 0;  // (4/3) third derivatives
  HarmonicFamily fam;              // L1, L2, L3, I evaluated at xi
  double H_xi = 0.0;               // H(xi, xi)
  RegularPartDerivatives hder;     // grad_x H and mixed trace at the origin
  Vec2 grad_dlv;                   // grad(Laplace log V)(0)

  GridFunction h_field;            // H(., xi) mesh field (numeric domains only)
  GridFunction wtilde2;            // smooth part of W_tilde (boundary -W_tilde1)
  double wtilde_xi = 0.0;          // W_tilde(xi) (= wtilde2 at xi)
  GridFunction hw;                 // harmonic extension of the w_hat trace

  int tau_iterations = 0;
  double tau_contraction = 0.0;    // last successive-difference ratio
};

// Assembles everything: E derivatives, harmonic family, W_tilde, tau (fixed
// point), and the projection field hw, in that order.
CorrectionBundle make_correction_bundle(const ReducedFunctional& rf,
                                        const RadialProfile& profile, double rho,
                                        Vec2 xi);

// w_hat(y) = ((E11+E22)/2) w1(|y|) + ((E11-E22)/2) w_hat2(y) + 2 E12 w_hat3(y).
double eval_w_hat(const CorrectionBundle& b, Vec2 y);

// Closed-form singular part of W_tilde (vanishes at xi, -Lap = leading cubic
// of the right-hand side).
double eval_w_tilde1(const CorrectionBundle& b, Vec2 x);

// W_tilde = W_tilde1 + W_tilde2.
double eval_w_tilde(const CorrectionBundle& b, Vec2 x);

// Bounded remainder f2 = f - f1 of the W_tilde right-hand side, frozen along
// rays inside radius max(1e-3, 3h) around xi.
double w_tilde_rhs_smooth(const CorrectionBundle& b, Vec2 x);

// Singular leading part f1 (exactly -Lap of the closed-form W_tilde1);
// O(1/|x-xi|), evaluated without cancellation. Zero at x = xi.
double w_tilde_rhs_singular(const CorrectionBundle& b, Vec2 x);

// P w_hat((x-xi)/(rho tau)) = w_hat - harmonic extension of its trace.
double eval_p_w_hat(const CorrectionBundle& b, Vec2 x);
GridFunction project_w_hat(const CorrectionBundle& b);

// Both sides of the near-xi expansion of P w_hat (constant terms only; the
// discrepancy is the expansion's error term).
struct WhExpansion {
  double lhs = 0.0;
  double rhs = 0.0;
};
WhExpansion wh_expansion(const CorrectionBundle& b, Vec2 x);

// Theta(x-xi) with the log V third-derivative term and the boundary-effect
// term through grad_x H(0,0); Theta(0) = 0.
double eval_theta(const CorrectionBundle& b, Vec2 x);

// Fixed-point solve of the implicit tau equation on a bundle whose fields
// except tau/hw are filled. Returns tau (also stored in the bundle).
double solve_tau(CorrectionBundle& b);

}  // namespace gelfand
