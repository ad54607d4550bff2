#include <doctest.h>

#include <cmath>

#include "gelfand/corrections.hpp"

using namespace gelfand;

namespace {
const double kPi = 3.14159265358979323846;

const RadialProfile& profile() {
  static RadialProfile p = solve_w1(1e4);
  return p;
}

HomogeneousPoly cubic_target(double alpha) {  // alpha x^3 - x y^2
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c[0] = alpha;
  c[2] = -1.0;
  return HomogeneousPoly(3, c);
}

Potential mild_cubic() {  // log V = log 8 + x(x^2+y^2)/2
  Potential pot;
  pot.log_coef = Eigen::MatrixXd::Zero(4, 4);
  pot.log_coef(0, 0) = std::log(8.0);
  pot.log_coef(3, 0) = 0.5;
  pot.log_coef(1, 2) = 0.5;
  return pot;
}
}  // namespace

TEST_CASE("constant potential on the disk: tau = 1 + O(rho^2), no global correction") {
  Domain d = Domain::unit_disk(1.0 / 64);
  ReducedFunctional rf = make_reduced_functional(d, Potential::constant(8.0), 2);
  CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});
  // V = 8, H(.,0) = 0 on the disk: the interaction E vanishes identically,
  // so W_tilde = 0 and the tau equation reduces to log tau^2 = 2 rho^2 tau^2 I
  CHECK(std::abs(b.ed.E11) < 1e-9);
  CHECK(b.wtilde2.max_abs() < 1e-9);
  CHECK(std::abs(b.tau - 1.0) < 1e-4);
  CHECK(b.tau == doctest::Approx(1.0 + 1e-6).epsilon(1e-8));  // I(0,0) = 1
  CHECK(b.tau_contraction < 0.5);
  CHECK(b.tau > 0.1);
  CHECK(b.tau < 10.0);
}

TEST_CASE("tau approaches its small-rho limit monotonically (cubic potential)") {
  Domain d = Domain::unit_disk(1.0 / 64);
  Potential pot = build_admissible_potential(d, cubic_target(1.0), 2, std::log(648.0));
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  double tau0 = std::sqrt(648.0 / 8.0);  // sqrt(V(0)/8) e^{4 pi H(0,0)}, H(0,0)=0
  // this strongly varying potential supports the implicit equation only for
  // small rho; at rho = 8e-3 the fixed point correctly reports failure
  CHECK_THROWS(make_correction_bundle(rf, profile(), 8e-3, {0, 0}));
  // at rho = 2e-3 the equation still solves but tau slightly exceeds 10
  {
    CorrectionBundle b2 = make_correction_bundle(rf, profile(), 2e-3, {0, 0});
    CHECK(b2.tau > 10.0);
    CHECK(b2.tau < 12.0);
  }
  double prev_gap = -1.0, prev_tau = 0.0, prev_step = -1.0;
  for (double rho : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
    CorrectionBundle b = make_correction_bundle(rf, profile(), rho, {0, 0});
    double gap = std::abs(b.tau - tau0);
    if (prev_gap >= 0.0) CHECK(gap < prev_gap);
    if (prev_tau > 0.0) {
      double step = std::abs(b.tau - prev_tau);
      if (prev_step >= 0.0) CHECK(step < prev_step);
      prev_step = step;
    }
    CHECK(b.tau_contraction < 0.5);
    prev_gap = gap;
    prev_tau = b.tau;
  }
  CHECK(prev_gap < 0.05);  // rho = 1e-3 is already close to the limit
}

TEST_CASE("W_tilde is radially symmetric for a radial potential") {
  Domain d = Domain::unit_disk(1.0 / 128);
  Potential pot = Potential::constant(8.0);
  pot.log_coef = Eigen::MatrixXd::Zero(3, 3);
  pot.log_coef(0, 0) = std::log(8.0);
  pot.log_coef(2, 0) = 1.0;
  pot.log_coef(0, 2) = 1.0;  // log V = log 8 + |x|^2
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});
  // quarter-turn images of a node map to nodes: discrete symmetry is exact
  double ref = eval_w_tilde(b, {0.25, 0.125});
  CHECK(eval_w_tilde(b, {-0.125, 0.25}) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(eval_w_tilde(b, {-0.25, -0.125}) == doctest::Approx(ref).epsilon(1e-9));
  // same radius, different angle (3-4-5 nodes): continuum symmetry up to O(h^2)
  double a = eval_w_tilde(b, {0.25, 0.1875});
  double c = eval_w_tilde(b, {0.3125, 0.0});
  CHECK(std::abs(a - c) < 1e-4);
}

TEST_CASE("near-centre expansion of W_tilde against the log-gradient law") {
  Domain d = Domain::unit_disk(1.0 / 128);
  ReducedFunctional rf = make_reduced_functional(d, mild_cubic(), 2);
  CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});
  // grad(Laplace log V)(0) = (4, 0) exactly for this potential
  CHECK(b.grad_dlv.x == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(b.grad_dlv.y == 0.0);
  double w0 = eval_w_tilde(b, b.xi);
  CHECK(w0 == doctest::Approx(b.wtilde_xi).epsilon(1e-9));
  for (double s : {0.05, 0.1, 0.2}) {
    for (Vec2 e : {Vec2{1, 0}, Vec2{0, 1}, Vec2{-0.6, 0.8}}) {
      Vec2 x = b.xi + e * s;
      double main = 0.5 * (b.grad_dlv.x * (x.x - b.xi.x) +
                           b.grad_dlv.y * (x.y - b.xi.y)) *
                    std::log(1.0 / s);
      double res = eval_w_tilde(b, x) - w0 - main;
      // error envelope O(|x-xi|); measured constants are below 0.011
      CHECK(std::abs(res) < 0.05 * s);
    }
  }
  // the log-gradient term is the dominant part of the variation, so the
  // expansion is a genuine prediction, not a vacuous bound
  double with = std::abs(eval_w_tilde(b, {0.05, 0}) - w0 -
                         0.5 * b.grad_dlv.x * 0.05 * std::log(1.0 / 0.05));
  double without = std::abs(eval_w_tilde(b, {0.05, 0}) - w0);
  CHECK(with * 50.0 < without);
}

TEST_CASE("right-hand side integrability and W_tilde mesh convergence") {
  const double p = 1.2;
  double lp[2], wxi[2];
  double hs[2] = {1.0 / 64, 1.0 / 128};
  for (int m = 0; m < 2; ++m) {
    Domain d = Domain::unit_disk(hs[m]);
    ReducedFunctional rf = make_reduced_functional(d, mild_cubic(), 2);
    CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});
    double s = 0.0;
    for (int k = 0; k < d.n_interior(); ++k) {
      Vec2 x = d.interior_pos(k);
      double f = w_tilde_rhs_smooth(b, x);
      // add back the closed-form cubic part to get the full right-hand side
      Vec2 dx = x - b.xi;
      double r2 = dx.norm2();
      if (r2 > 1e-12) {
        double cub1 = dx.x * (dx.x * dx.x - 3 * dx.y * dx.y);
        double cub2 = dx.y * (3 * dx.x * dx.x - dx.y * dx.y);
        f += 0.75 * (b.c111 + b.c122) * dx.x / r2 +
             0.75 * (b.c112 + b.c222) * dx.y / r2 +
             0.25 * (b.c111 - 3 * b.c122) * cub1 / (r2 * r2) +
             0.25 * (3 * b.c112 - b.c222) * cub2 / (r2 * r2);
      }
      s += std::pow(std::abs(f), p) * hs[m] * hs[m];
    }
    lp[m] = std::pow(s, 1.0 / p);
    wxi[m] = b.wtilde_xi;
  }
  CHECK(lp[0] > 0.0);
  CHECK(std::abs(lp[1] - lp[0]) < 0.25 * lp[0]);
  double h = hs[1];
  CHECK(std::abs(wxi[1] - wxi[0]) < 0.1 * h * h * std::abs(std::log(h)));

  // the strongly varying admissible cubic drives W_tilde to O(10^3); there
  // the mesh sensitivity is only asserted relative to that scale
  double strong[2];
  for (int m = 0; m < 2; ++m) {
    Domain d = Domain::unit_disk(hs[m]);
    Potential pot =
        build_admissible_potential(d, cubic_target(1.0), 2, std::log(648.0));
    ReducedFunctional rf = make_reduced_functional(d, pot, 2);
    CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});
    strong[m] = b.wtilde_xi;
  }
  CHECK(std::abs(strong[1] - strong[0]) < 0.02 * std::abs(strong[0]));
}

TEST_CASE("local correction assembly and projection on the disk") {
  Domain d = Domain::unit_disk(1.0 / 64);
  Potential pot = build_admissible_potential(d, cubic_target(1.0), 2, std::log(648.0));
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});

  // admissibility pins the second derivatives: E11 = E22 = 4, E12 = 0
  CHECK(b.ed.E11 == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(b.ed.E22 == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(std::abs(b.ed.E12) < 1e-3);
  // so the combination reduces to 4 w1(|y|) plus tiny anisotropic parts
  CHECK(eval_w_hat(b, {1, 0}) ==
        doctest::Approx(4.0 * profile().value(1.0)).epsilon(1e-3));

  // harmonic-extension family at the centre: L1 = L2 = L3 = 0, I = 1
  CHECK(std::abs(b.fam.L1) < 1e-4);
  CHECK(std::abs(b.fam.L2) < 1e-4);
  CHECK(std::abs(b.fam.L3) < 1e-4);
  CHECK(b.fam.I == doctest::Approx(1.0).epsilon(1e-4));

  // constant-term expansion of the projection: the discrepancy is a small
  // x-independent offset (measured ~0.03 against both sides of size 60-90)
  double diff0 = 0.0;
  for (double s : {0.1, 0.2, 0.3}) {
    WhExpansion e = wh_expansion(b, {s, 0});
    CHECK(std::abs(e.lhs) > 50.0);
    CHECK(std::abs(e.lhs - e.rhs) < 0.1);
    if (s == 0.1) diff0 = e.lhs - e.rhs;
  }
  WhExpansion ey = wh_expansion(b, {0.0, 0.25});
  CHECK(ey.lhs - ey.rhs == doctest::Approx(diff0).epsilon(1e-2));
}

TEST_CASE("projected field vanishes on the boundary; grid and analytic agree") {
  Domain d = Domain::unit_disk(1.0 / 64);
  // mildly varying potential with all three anisotropic coefficients active;
  // tau ~ 9 keeps rho tau >= 4h at rho = 8e-3 on this mesh
  Potential pot;
  pot.log_coef = Eigen::MatrixXd::Zero(3, 3);
  pot.log_coef(0, 0) = std::log(648.0);
  pot.log_coef(2, 0) = 0.3;
  pot.log_coef(0, 2) = -0.3;
  pot.log_coef(1, 1) = 0.2;
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  CorrectionBundle b = make_correction_bundle(rf, profile(), 8e-3, {0, 0});
  CHECK(b.ed.E11 == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(b.ed.E22 == doctest::Approx(-0.6).epsilon(1e-6));
  CHECK(b.ed.E12 == doctest::Approx(0.2).epsilon(1e-6));
  GridFunction pw = project_w_hat(b);
  CHECK(pw.boundary.cwiseAbs().maxCoeff() == 0.0);
  int i, j;
  d.nearest_node({0.4, 0.2}, i, j);
  int k = d.interior_at(i, j);
  REQUIRE(k >= 0);
  Vec2 x = d.interior_pos(k);
  CHECK(pw.interior[k] == doctest::Approx(eval_p_w_hat(b, x)).epsilon(1e-9));

  // under-resolved request throws
  CorrectionBundle b2 = make_correction_bundle(rf, profile(), 1e-4, {0, 0});
  CHECK_THROWS(project_w_hat(b2));
}

TEST_CASE("Theta: odd, vanishing at the centre, boundary term absent on the disk") {
  Domain d = Domain::unit_disk(1.0 / 64);
  Potential pot = build_admissible_potential(d, cubic_target(1.0), 2, std::log(648.0));
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  CorrectionBundle b = make_correction_bundle(rf, profile(), 1e-3, {0, 0});
  CHECK(eval_theta(b, b.xi) == 0.0);
  for (Vec2 dx : {Vec2{0.1, 0.05}, Vec2{-0.2, 0.3}}) {
    CHECK(eval_theta(b, b.xi + dx) + eval_theta(b, b.xi - dx) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  // grad_x H(0,0) = 0 on the disk: only the log V term remains
  Vec2 dx{0.1, 0.0};
  double expect = b.rho * b.rho * b.tau * b.tau * 0.5 * b.grad_dlv.x * dx.x *
                  std::log(1.0 / dx.norm());
  CHECK(eval_theta(b, b.xi + dx) == doctest::Approx(expect).epsilon(1e-6));
}
