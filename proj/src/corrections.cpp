#include "gelfand/corrections.hpp"

#include <cmath>
#include <stdexcept>

namespace gelfand {

namespace {

const double kPi = 3.14159265358979323846;

bool analytic_domain(const Domain& d) {
  return d.kind == DomainKind::UnitDisk && d.analytic_regular_part;
}

// Interaction E(x, xi) through the precomputed H field on numeric domains.
double eval_E_bundle(const CorrectionBundle& b, Vec2 x) {
  double Hx = analytic_domain(*b.dom) ? regular_part_disk(x, b.xi)
                                      : b.h_field.eval(x);
  double g = 8.0 * kPi * (Hx - b.H_xi) + b.rf->pot.log_v(x) - b.rf->pot.log_v(b.xi);
  return std::expm1(g);
}

// Full right-hand side of the W_tilde problem: 8/|x-xi|^4 times the Taylor
// remainder of E past second order. Only evaluated away from xi.
double w_tilde_rhs_full(const CorrectionBundle& b, Vec2 x) {
  Vec2 dx = x - b.xi;
  double r2 = dx.x * dx.x + dx.y * dx.y;
  double lin = b.ed.E1 * dx.x + b.ed.E2 * dx.y;
  double quad = 0.5 * (b.ed.E11 * dx.x * dx.x + 2.0 * b.ed.E12 * dx.x * dx.y +
                       b.ed.E22 * dx.y * dx.y);
  return 8.0 / (r2 * r2) * (eval_E_bundle(b, x) - lin - quad);
}

// Leading cubic part f1 of the right-hand side, with exact potential
// W_tilde1 (see eval_w_tilde1).
double w_tilde_rhs_cubic(const CorrectionBundle& b, Vec2 x) {
  Vec2 dx = x - b.xi;
  double r2 = dx.x * dx.x + dx.y * dx.y;
  double s = 0.75 * (b.c111 + b.c122) * dx.x / r2 +
             0.75 * (b.c112 + b.c222) * dx.y / r2;
  double cub1 = dx.x * (dx.x * dx.x - 3.0 * dx.y * dx.y);
  double cub2 = dx.y * (3.0 * dx.x * dx.x - dx.y * dx.y);
  s += 0.25 * (b.c111 - 3.0 * b.c122) * cub1 / (r2 * r2) +
       0.25 * (3.0 * b.c112 - b.c222) * cub2 / (r2 * r2);
  return s;
}

double freeze_radius(const CorrectionBundle& b) {
  return std::max(1e-3, 3.0 * b.dom->h);
}

void build_w_tilde(CorrectionBundle& b) {
  const Domain& d = *b.dom;
  ScalarField rhs = [&b](Vec2 x) { return w_tilde_rhs_smooth(b, x); };
  ScalarField bc = [&b](Vec2 x) { return -eval_w_tilde1(b, x); };
  b.wtilde2 = poisson_solve(d, rhs, bc);
  b.wtilde_xi = b.wtilde2.eval(b.xi);  // W_tilde1(xi) = 0
}

}  // namespace

double w_tilde_rhs_singular(const CorrectionBundle& b, Vec2 x) {
  Vec2 dx = x - b.xi;
  if (dx.x * dx.x + dx.y * dx.y < 1e-28) return 0.0;
  return w_tilde_rhs_cubic(b, x);
}

double w_tilde_rhs_smooth(const CorrectionBundle& b, Vec2 x) {
  Vec2 dx = x - b.xi;
  double r = dx.norm();
  double fr = freeze_radius(b);
  if (r < fr) {
    // freeze along rays: the remainder is O(1/r), continuous in angle
    if (r < 1e-14) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) {
        double a = 2.0 * kPi * (k + 0.5) / 8;
        Vec2 p = b.xi + Vec2{fr * std::cos(a), fr * std::sin(a)};
        s += w_tilde_rhs_full(b, p) - w_tilde_rhs_cubic(b, p);
      }
      return s / 8;
    }
    x = b.xi + dx * (fr / r);
  }
  return w_tilde_rhs_full(b, x) - w_tilde_rhs_cubic(b, x);
}

double eval_w_tilde1(const CorrectionBundle& b, Vec2 x) {
  Vec2 dx = x - b.xi;
  double r2 = dx.x * dx.x + dx.y * dx.y;
  if (r2 < 1e-28) return 0.0;
  double logr = 0.5 * std::log(r2);
  double s = -(0.375 * (b.c111 + b.c122) * dx.x +
               0.375 * (b.c112 + b.c222) * dx.y) *
             logr;
  double cub1 = dx.x * (dx.x * dx.x - 3.0 * dx.y * dx.y);
  double cub2 = dx.y * (3.0 * dx.x * dx.x - dx.y * dx.y);
  s += (b.c111 - 3.0 * b.c122) / 32.0 * cub1 / r2 +
       (3.0 * b.c112 - b.c222) / 32.0 * cub2 / r2;
  return s;
}

double eval_w_tilde(const CorrectionBundle& b, Vec2 x) {
  return eval_w_tilde1(b, x) + b.wtilde2.eval(x);
}

double eval_w_hat(const CorrectionBundle& b, Vec2 y) {
  double r = y.norm();
  return 0.5 * (b.ed.E11 + b.ed.E22) * b.profile->value(r) +
         0.5 * (b.ed.E11 - b.ed.E22) * w_hat2(y.x, y.y) +
         2.0 * b.ed.E12 * w_hat3(y.x, y.y);
}

double solve_tau(CorrectionBundle& b) {
  double logv = b.rf->pot.log_v(b.xi);
  double base = 0.5 * (logv + 8.0 * kPi * b.H_xi) - 0.5 * std::log(8.0);
  double trace = b.ed.E11 + b.ed.E22;
  auto bracket = [&](double tau) {
    double ell = std::log(1.0 / (b.rho * tau));
    return 2.0 * b.fam.I -
           trace * (4.0 * kPi * (1.0 - ell) * b.H_xi + (2.0 - ell) * ell) +
           trace * b.fam.L1 - 0.5 * (b.ed.E11 - b.ed.E22) * b.fam.L2 -
           2.0 * b.ed.E12 * b.fam.L3 + b.wtilde_xi;
  };
  double tau = std::exp(base);  // rho -> 0 limit as the seed
  double prev_step = 0.0;
  b.tau_contraction = 0.0;
  for (int k = 0; k < 200; ++k) {
    double next =
        std::exp(base + 0.5 * b.rho * b.rho * tau * tau * bracket(tau));
    double step = std::abs(next - tau);
    if (prev_step > 0.0) b.tau_contraction = step / prev_step;
    prev_step = step;
    tau = next;
    b.tau_iterations = k + 1;
    if (step < 1e-12) {
      if (tau < 0.05 || tau > 20.0)
        throw std::runtime_error("solve_tau: tau outside [1/20, 20]");
      b.tau = tau;
      return tau;
    }
  }
  throw std::runtime_error("solve_tau: no convergence in 200 iterations (rho too large)");
}

double eval_p_w_hat(const CorrectionBundle& b, Vec2 x) {
  Vec2 y = (x - b.xi) * (1.0 / (b.rho * b.tau));
  return eval_w_hat(b, y) - b.hw.eval(x);
}

GridFunction project_w_hat(const CorrectionBundle& b) {
  const Domain& d = *b.dom;
  if (b.rho * b.tau < 4.0 * d.h)
    throw std::runtime_error("project_w_hat: bubble under-resolved (rho tau < 4h)");
  GridFunction out(d);
  for (int k = 0; k < d.n_interior(); ++k) {
    Vec2 y = (d.interior_pos(k) - b.xi) * (1.0 / (b.rho * b.tau));
    out.interior[k] = eval_w_hat(b, y) - b.hw.interior[k];
  }
  return out;  // boundary stays exactly zero
}

WhExpansion wh_expansion(const CorrectionBundle& b, Vec2 x) {
  WhExpansion e;
  e.lhs = eval_p_w_hat(b, x);
  Vec2 dx = x - b.xi;
  double ell = std::log(1.0 / (b.rho * b.tau));
  double trace = b.ed.E11 + b.ed.E22;
  Vec2 y = dx * (1.0 / (b.rho * b.tau));
  e.rhs = eval_w_hat(b, y) -
          32.0 * kPi * kPi * std::log(1.0 / b.rho) * b.hder.mixed_trace *
              (b.hder.grad_x.x * dx.x + b.hder.grad_x.y * dx.y) -
          trace * (4.0 * kPi * (1.0 - ell) * b.H_xi + (2.0 - ell) * ell) +
          trace * b.fam.L1 - 0.5 * (b.ed.E11 - b.ed.E22) * b.fam.L2 -
          2.0 * b.ed.E12 * b.fam.L3;
  return e;
}

double eval_theta(const CorrectionBundle& b, Vec2 x) {
  Vec2 dx = x - b.xi;
  double r = dx.norm();
  if (r < 1e-300) return 0.0;
  double s = 0.5 * (b.grad_dlv.x * dx.x + b.grad_dlv.y * dx.y) *
                 std::log(1.0 / r) -
             32.0 * kPi * kPi * std::log(1.0 / b.rho) * b.hder.mixed_trace *
                 (b.hder.grad_x.x * dx.x + b.hder.grad_x.y * dx.y);
  return b.rho * b.rho * b.tau * b.tau * s;
}

CorrectionBundle make_correction_bundle(const ReducedFunctional& rf,
                                        const RadialProfile& profile, double rho,
                                        Vec2 xi) {
  if (rho <= 0.0 || rho > 0.1)
    throw std::invalid_argument("make_correction_bundle: rho in (0, 0.1]");
  CorrectionBundle b;
  b.dom = rf.dom;
  b.rf = &rf;
  b.profile = &profile;
  b.rho = rho;
  b.xi = xi;

  const Domain& d = *rf.dom;
  b.ed = eval_E_derivatives(rf, xi);
  b.c111 = 4.0 / 3.0 * b.ed.E111;
  b.c112 = 4.0 / 3.0 * b.ed.E112;
  b.c122 = 4.0 / 3.0 * b.ed.E122;
  b.c222 = 4.0 / 3.0 * b.ed.E222;
  b.fam = harmonic_extension_family(d, xi);
  b.H_xi = regular_part(d, xi, xi);
  b.hder = regular_part_derivatives(d, 2, {0, 0});
  b.grad_dlv = rf.pot.grad_laplace_log_v0();
  if (!analytic_domain(d)) b.h_field = regular_part_field(d, xi);

  build_w_tilde(b);
  solve_tau(b);

  double scale = 1.0 / (b.rho * b.tau);
  b.hw = harmonic_extension(d, [&b, scale](Vec2 p) {
    return eval_w_hat(b, (p - b.xi) * scale);
  });
  return b;
}

}  // namespace gelfand
