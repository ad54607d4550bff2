#include <doctest.h>

#include <cmath>

#include "gelfand/fd.hpp"
#include "gelfand/finitedim.hpp"
#include "gelfand/reduced.hpp"

using namespace gelfand;

namespace {
const double kPi = 3.14159265358979323846;

HomogeneousPoly cubic_target(double alpha) {  // alpha x^3 - x y^2
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c[0] = alpha;
  c[2] = -1.0;
  return HomogeneousPoly(3, c);
}

HomogeneousPoly radial4() {  // |xi|^4
  Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
  c[0] = 1.0;
  c[2] = 2.0;
  c[4] = 1.0;
  return HomogeneousPoly(4, c);
}
}  // namespace

TEST_CASE("finite-difference stencils differentiate polynomials exactly") {
  auto f = [](Vec2 p) {
    return 1.0 + p.x + 0.5 * p.x * p.x * p.y + p.y * p.y * p.y - p.x * p.x * p.x * p.y;
  };
  CHECK(fd_partial(f, {0, 0}, 1, 0, 0.1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fd_partial(f, {0, 0}, 2, 1, 0.1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fd_partial(f, {0, 0}, 0, 3, 0.1) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(fd_partial(f, {0, 0}, 3, 1, 0.1) == doctest::Approx(-6.0).epsilon(1e-8));
}

TEST_CASE("reduced functional values on the disk") {
  Domain d = Domain::unit_disk(1.0 / 64);
  ReducedFunctional rf8 = make_reduced_functional(d, Potential::constant(8.0), 2);
  CHECK(eval_F(rf8, {0, 0}) == doctest::Approx(std::log(8.0) / (4 * kPi)).epsilon(1e-10));
  ReducedFunctional rf1 = make_reduced_functional(d, Potential::constant(1.0), 2);
  CHECK(eval_F(rf1, {0, 0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_F(rf1, {0.5, 0}) ==
        doctest::Approx(std::log(0.75) / (2 * kPi)).epsilon(1e-10));
  CHECK(eval_E(rf1, {0.3, 0.2}, {0.3, 0.2}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("first derivative identity between E and F") {
  Domain d = Domain::unit_disk(1.0 / 64);
  Potential pot;
  pot.log_coef = Eigen::MatrixXd::Zero(3, 3);
  pot.log_coef(0, 0) = 0.4;
  pot.log_coef(1, 0) = 0.3;
  pot.log_coef(0, 2) = 0.2;
  pot.log_coef(1, 1) = -0.1;
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  Vec2 xi{0.2, 0.1};
  EDerivatives e = eval_E_derivatives(rf, xi);
  auto F = [&](Vec2 p) { return eval_F(rf, p); };
  double Fx = fd_partial(F, xi, 1, 0, 1e-3);
  double Fy = fd_partial(F, xi, 0, 1, 1e-3);
  CHECK(e.E1 == doctest::Approx(4 * kPi * Fx).epsilon(1e-4));
  CHECK(e.E2 == doctest::Approx(4 * kPi * Fy).epsilon(1e-4));
  // cross-check E1 against direct differencing of eval_E
  auto Ex = [&](Vec2 p) { return eval_E(rf, p, xi); };
  CHECK(e.E1 == doctest::Approx(fd_partial(Ex, xi, 1, 0, 1e-3)).epsilon(1e-6));
  CHECK(e.E22 == doctest::Approx(fd_partial(Ex, xi, 0, 2, 1e-3)).epsilon(1e-5));
  CHECK(e.E112 == doctest::Approx(fd_partial(Ex, xi, 2, 1, 5e-3)).epsilon(1e-3));
}

TEST_CASE("admissible cubic potential on the disk") {
  Domain d = Domain::unit_disk(1.0 / 64);
  double alpha = 1.0;
  double c0 = std::log(648.0);
  Potential pot = build_admissible_potential(d, cubic_target(alpha), 2, c0);
  CHECK(pot.v({0, 0}) == doctest::Approx(648.0).epsilon(1e-10));
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);

  AdmissibilityReport rep = admissibility_check(rf);
  CHECK(rep.admissible);
  CHECK(rep.max_low_order < 1e-5 * (1 + 8 * kPi * kPi));
  CHECK(rep.polar_min > 0);

  HomogeneousPoly P = build_P(rf);
  CHECK(P.coef[0] == doctest::Approx(8 * kPi * kPi * alpha).epsilon(1e-6));
  CHECK(std::abs(P.coef[1]) < 1e-4);
  CHECK(P.coef[2] == doctest::Approx(-8 * kPi * kPi).epsilon(1e-6));
  CHECK(std::abs(P.coef[3]) < 1e-4);

  // second-derivative identity at the blow-up point (admissibility cancels
  // the Robin Hessian): E_ij -> -8 pi d^2_{x_i y_j} H(0,0)
  EDerivatives e = eval_E_derivatives(rf, {0, 0});
  CHECK(e.E11 == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(e.E22 == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(std::abs(e.E12) < 1e-3);

  // interaction bound |E| <= C(|xi|^2 |x-xi| + |x-xi|^2) near 0
  for (double s : {0.02, 0.05, 0.1}) {
    Vec2 xi{s, 0.5 * s};
    for (double t : {0.002, 0.01, 0.04}) {
      Vec2 x = xi + Vec2{t, -t};
      double dx = (x - xi).norm();
      double bound = s * s * dx + dx * dx;
      CHECK(std::abs(eval_E(rf, x, xi)) < 60.0 * bound);
    }
  }
}

TEST_CASE("zero target is flagged non-admissible") {
  Domain d = Domain::unit_disk(1.0 / 64);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  Potential pot = build_admissible_potential(d, HomogeneousPoly(3, z), 2, 0.0);
  ReducedFunctional rf = make_reduced_functional(d, pot, 2);
  AdmissibilityReport rep = admissibility_check(rf);
  CHECK_FALSE(rep.admissible);
}

TEST_CASE("eta0 for the cubic family on the disk, and the alpha root") {
  Domain d = Domain::unit_disk(1.0 / 64);
  double c0 = std::log(648.0);
  auto eta_of = [&](double alpha) {
    Potential pot = build_admissible_potential(d, cubic_target(alpha), 2, c0);
    ReducedFunctional rf = make_reduced_functional(d, pot, 2);
    return compute_eta0(rf);
  };
  // closed form: eta0 = -4 pi^2 (6 alpha - 2) (V(0)/8) e_1, V(0) = 648
  Vec2 e1 = eta_of(1.0);
  CHECK(e1.x == doctest::Approx(-4 * kPi * kPi * 4 * 81.0).epsilon(1e-6));
  CHECK(std::abs(e1.y) < 1e-6 * std::abs(e1.x));
  Vec2 e0 = eta_of(0.0);
  CHECK(e0.x == doctest::Approx(4 * kPi * kPi * 2 * 81.0).epsilon(1e-6));
  // eta0.x is affine in alpha; its root is alpha = 1/3
  double alpha0 = -e0.x / (e1.x - e0.x);
  CHECK(alpha0 == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("eta0 vanishes for order >= 3 on the disk") {
  Domain d = Domain::unit_disk(1.0 / 64);
  Potential pot = build_admissible_potential(d, radial4(), 3, std::log(648.0));
  ReducedFunctional rf = make_reduced_functional(d, pot, 3);
  CHECK(admissibility_check(rf).admissible);
  Vec2 eta = compute_eta0(rf);
  CHECK(std::abs(eta.x) < 2e-3);
  CHECK(std::abs(eta.y) < 2e-3);
}

TEST_CASE("eta0 is nonzero on the square with a hole (order 3)") {
  double h = 1.0 / 64;
  Domain d = Domain::square_with_hole(h, {0.6, 0});
  Potential pot = build_admissible_potential(d, radial4(), 3, 0.0);
  ReducedFunctional rf = make_reduced_functional(d, pot, 3);
  CHECK(admissibility_check(rf).admissible);
  Vec2 eta = compute_eta0(rf);
  CHECK(eta.norm() > 10.0 * 2e-3);
}

TEST_CASE("order-2 formula merges into the general one under the cancellation choice") {
  // On a domain with nonzero H-derivatives, pick the cubic logV terms so that
  // -pi grad(Laplace logV)(0) equals 16 pi^2 grad(mixed trace); then the N=2
  // and N>=3 brackets coincide.
  double h = 1.0 / 64;
  Domain d = Domain::square_with_hole(h, {0.6, 0});
  RegularPartDerivatives der = regular_part_derivatives(d, 2, {0, 0});
  double H00 = regular_part(d, {0, 0}, {0, 0});

  Potential pot = build_admissible_potential(d, cubic_target(1.0), 2, 0.0);
  // overwrite the pure-cubic coefficients so grad(Laplace logV)(0) is the
  // prescribed cancellation value (keeps D^3 logV's other structure)
  Vec2 want{-16 * kPi * der.grad_mixed_trace.x, -16 * kPi * der.grad_mixed_trace.y};
  Vec2 cur = pot.grad_laplace_log_v0();
  pot.log_coef(3, 0) += (want.x - cur.x) / 6.0;
  pot.log_coef(0, 3) += (want.y - cur.y) / 6.0;

  ReducedFunctional rf2 = make_reduced_functional(d, pot, 2);
  Vec2 eta2 = compute_eta0(rf2);
  double common = (pot.v({0, 0}) / 8.0) * std::exp(8 * kPi * H00);
  double c3 = 64 * kPi * kPi * kPi;
  Vec2 eta_general{
      (c3 * der.mixed_trace * der.grad_x.x + 16 * kPi * kPi * der.grad_mixed_trace.x) *
          common,
      (c3 * der.mixed_trace * der.grad_x.y + 16 * kPi * kPi * der.grad_mixed_trace.y) *
          common};
  CHECK(eta2.x == doctest::Approx(eta_general.x).epsilon(1e-8));
  CHECK(eta2.y == doctest::Approx(eta_general.y).epsilon(1e-8));
}
