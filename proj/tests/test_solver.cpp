#include <doctest.h>

#include <cmath>

#include "gelfand/solver.hpp"

using namespace gelfand;

namespace {
const double kPi = 3.14159265358979323846;

const RadialProfile& profile() {
  static RadialProfile p = solve_w1(1e4);
  return p;
}

// radial setting: V = 8 on the unit disk, bubble at the centre
const ReducedFunctional& radial_rf() {
  static Domain d = Domain::unit_disk(1.0 / 64);
  static ReducedFunctional rf =
      make_reduced_functional(d, Potential::constant(8.0), 2);
  return rf;
}
}  // namespace

TEST_CASE("zero forcing: the solver returns the zero solution in one step") {
  Domain d = Domain::unit_disk(1.0 / 32);
  GridFunction seed(d);
  seed.interior = Eigen::VectorXd::Constant(d.n_interior(), 0.3);
  NewtonResult r = solve_gelfand(d, Potential::constant(8.0), 0.0, seed);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK(r.u.interior.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("minimal branch from the zero seed scales like rho^2") {
  // u is a small perturbation of rho^2 V t with -Lap t = 1: on the disk
  // t(0) = 1/4, so ||u||_inf is close to 2 rho^2
  Domain d = Domain::unit_disk(1.0 / 64);
  GridFunction zero(d);
  double prev = 0.0;
  for (double rho : {2e-2, 1e-2}) {
    NewtonResult r = solve_gelfand(d, Potential::constant(8.0), rho, zero);
    CHECK(r.converged);
    double m = r.u.interior.maxCoeff();
    CHECK(m == doctest::Approx(2.0 * rho * rho).epsilon(0.05));
    if (prev > 0) CHECK(prev / m == doctest::Approx(4.0).epsilon(0.05));
    prev = m;
  }
}

TEST_CASE("mismatched seed mesh throws") {
  Domain d = Domain::unit_disk(1.0 / 32);
  Domain d2 = Domain::unit_disk(1.0 / 48);
  GridFunction seed(d2);
  CHECK_THROWS_AS(solve_gelfand(d, Potential::constant(8.0), 0.01, seed),
                  std::invalid_argument);
}

TEST_CASE("ansatz-seeded Newton at a radial configuration") {
  double rho = 0.05;
  Ansatz a = assemble_ansatz(radial_rf(), profile(), rho, {0, 0}, true, false);
  double mu = rho * a.tau;
  Domain fine = Domain::unit_disk(mu / 6.0);
  GridFunction seed = sample_ansatz(a, fine);

  SUBCASE("sampling agrees with pointwise evaluation") {
    for (int k : {0, fine.n_interior() / 3, fine.n_interior() - 1})
      CHECK(seed.interior[k] ==
            doctest::Approx(eval_W(a, fine.interior_pos(k))).epsilon(1e-12));
  }

  SUBCASE("converges fast, stays near the ansatz, quadratic tail") {
    NewtonResult r = solve_gelfand(fine, radial_rf().pot, rho, seed);
    CHECK(r.converged);
    CHECK(r.iterations <= 8);
    CHECK((r.u.interior - seed.interior).cwiseAbs().maxCoeff() <= 0.5);
    // quadratic convergence certificate on the last resolvable pair
    REQUIRE(r.history.size() >= 2);
    double fk = r.history[r.history.size() - 2];
    double fk1 = r.history[r.history.size() - 1];
    CHECK(fk1 / (fk * fk) < 10.0);

    BlowupDiagnostics b = blowup_diagnostics(fine, radial_rf().pot, rho, r.u);
    CHECK(b.peak.norm() < 2 * fine.h);
    // height of the projected bubble: 4 log(1/mu) + 8 pi H(0,0), H = 0 here
    CHECK(b.height ==
          doctest::Approx(4.0 * std::log(1.0 / mu)).epsilon(0.02));
    CHECK(b.mass / (8 * kPi) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(b.sup_far < b.height);
    CHECK(peak_centroid(fine, r.u, mu).norm() < fine.h);
  }
}

TEST_CASE("branch driver recentres an off-centre seed in the radial case") {
  // V = 8 is radial, so the discrete concentration point is the origin; a
  // seed one bubble-width off must slide back and match the centred solve
  double rho = 0.05;
  Ansatz a0 = assemble_ansatz(radial_rf(), profile(), rho, {0, 0}, true, false);
  double mu = rho * a0.tau;
  Domain fine = Domain::unit_disk(mu / 6.0);

  BranchResult br =
      solve_branch(radial_rf(), profile(), rho, {mu, 0.0}, fine, {});
  CHECK(br.newton.converged);
  CHECK(br.xi.norm() < 0.1 * mu);
  CHECK(br.multiplier_evals <= 12);

  GridFunction centred = sample_ansatz(a0, fine);
  NewtonResult direct = solve_gelfand(fine, radial_rf().pot, rho, centred);
  REQUIRE(direct.converged);
  CHECK((br.newton.u.interior - direct.u.interior).cwiseAbs().maxCoeff() < 0.1);
}
