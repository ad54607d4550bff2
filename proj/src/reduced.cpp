#include "gelfand/reduced.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "gelfand/fd.hpp"

namespace gelfand {

namespace {

const double kPi = 3.14159265358979323846;

double poly_eval(const Eigen::MatrixXd& c, Vec2 p) {
  double s = 0.0;
  double xi = 1.0;
  for (int i = 0; i < c.rows(); ++i) {
    double yj = 1.0;
    for (int j = 0; j < c.cols(); ++j) {
      s += c(i, j) * xi * yj;
      yj *= p.y;
    }
    xi *= p.x;
  }
  return s;
}

// Exact partial d^a/dx^a d^b/dy^b of the polynomial at `p`.
double poly_partial(const Eigen::MatrixXd& c, int a, int b, Vec2 p) {
  double s = 0.0;
  for (int i = a; i < c.rows(); ++i)
    for (int j = b; j < c.cols(); ++j) {
      double f = 1.0;
      for (int q = 0; q < a; ++q) f *= (i - q);
      for (int q = 0; q < b; ++q) f *= (j - q);
      s += c(i, j) * f * std::pow(p.x, i - a) * std::pow(p.y, j - b);
    }
  return s;
}

// Snap delta to a positive even multiple of h so that the Richardson half-step
// still lands on mesh nodes.
double snap_even(double delta, double h) {
  return 2.0 * h * std::max(1.0, std::round(delta / (2.0 * h)));
}

bool analytic_domain(const Domain& d) {
  return d.kind == DomainKind::UnitDisk && d.analytic_regular_part;
}

void require_node(const Domain& d, Vec2 at, const char* who) {
  int i, j;
  d.nearest_node(at, i, j);
  Vec2 node{d.x0 + i * d.h, d.y0 + j * d.h};
  if ((node - at).norm() > 1e-9 * (1.0 + at.norm()))
    throw std::invalid_argument(std::string(who) +
                                ": point must be a mesh node on numeric domains");
}

// Robin function R(p) = H(p,p) with memoization (numeric domains pay one
// Dirichlet solve per distinct sample point).
ScalarField robin_function(const Domain& d) {
  if (analytic_domain(d))
    return [](Vec2 p) { return regular_part_disk(p, p); };
  auto cache = std::make_shared<std::map<std::pair<long long, long long>, double>>();
  const Domain* dom = &d;
  return [dom, cache](Vec2 p) {
    std::pair<long long, long long> key{std::llround(p.x * 1e12),
                                        std::llround(p.y * 1e12)};
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    double v = regular_part(*dom, p, p);
    (*cache)[key] = v;
    return v;
  };
}

double fd_step_for_order(const Domain& d, int order) {
  double delta = order <= 2 ? 1e-2 : 2.5e-2;
  if (!analytic_domain(d)) delta = snap_even(delta, d.h);
  return delta;
}

}  // namespace

double Potential::log_v(Vec2 p) const { return poly_eval(log_coef, p); }

Vec2 Potential::grad_log_v(Vec2 p) const {
  return {poly_partial(log_coef, 1, 0, p), poly_partial(log_coef, 0, 1, p)};
}

Vec2 Potential::grad_laplace_log_v0() const {
  Vec2 g{0, 0};
  g.x = poly_partial(log_coef, 3, 0, {0, 0}) + poly_partial(log_coef, 1, 2, {0, 0});
  g.y = poly_partial(log_coef, 0, 3, {0, 0}) + poly_partial(log_coef, 2, 1, {0, 0});
  return g;
}

Potential Potential::constant(double V0) {
  Potential p;
  p.log_coef = Eigen::MatrixXd::Zero(1, 1);
  p.log_coef(0, 0) = std::log(V0);
  return p;
}

ReducedFunctional make_reduced_functional(const Domain& d, const Potential& pot,
                                          int N) {
  if (N < 2) throw std::invalid_argument("make_reduced_functional: N >= 2");
  ReducedFunctional rf;
  rf.dom = &d;
  rf.pot = pot;
  rf.N = N;
  if (!analytic_domain(d)) require_node(d, {0, 0}, "make_reduced_functional");
  ScalarField R = robin_function(d);
  auto F = [&](Vec2 p) { return R(p) + pot.log_v(p) / (4.0 * kPi); };
  rf.deriv.resize(N + 2);
  for (int k = 1; k <= N + 1; ++k) {
    double delta = fd_step_for_order(d, k);
    rf.deriv[k] = Eigen::VectorXd::Zero(k + 1);
    for (int j = 0; j <= k; ++j) {
      double noise = 0.0;
      rf.deriv[k][j] = fd_partial(F, {0, 0}, k - j, j, delta, &noise);
      rf.fd_noise = std::max(rf.fd_noise, noise);
    }
  }
  return rf;
}

double eval_F(const ReducedFunctional& rf, Vec2 xi) {
  return regular_part(*rf.dom, xi, xi) + rf.pot.log_v(xi) / (4.0 * kPi);
}

double eval_E(const ReducedFunctional& rf, Vec2 x, Vec2 xi) {
  double g = 8.0 * kPi * (regular_part(*rf.dom, x, xi) -
                          regular_part(*rf.dom, xi, xi)) +
             rf.pot.log_v(x) - rf.pot.log_v(xi);
  return std::expm1(g);
}

EDerivatives eval_E_derivatives(const ReducedFunctional& rf, Vec2 xi) {
  const Domain& d = *rf.dom;
  // jet of g(x) = 8pi(H(x,xi) - H(xi,xi)) + logV(x) - logV(xi) at x = xi
  std::function<double(Vec2)> Hx;
  GridFunction field;
  if (analytic_domain(d)) {
    Hx = [xi](Vec2 p) { return regular_part_disk(p, xi); };
  } else {
    require_node(d, xi, "eval_E_derivatives");
    field = regular_part_field(d, xi);
    Hx = [&field](Vec2 p) { return field.eval(p); };
  }
  double g1[3], g2[3][3], g3[4];  // g3 indexed by number of y-derivatives
  for (int a = 1; a <= 3; ++a) {
    double delta = fd_step_for_order(d, a);
    for (int j = 0; j <= a; ++j) {
      double hpart = fd_partial(Hx, xi, a - j, j, delta);
      double vpart = poly_partial(rf.pot.log_coef, a - j, j, xi);
      double val = 8.0 * kPi * hpart + vpart;
      if (a == 1) g1[j + 1] = val;     // g1[1] = g_x, g1[2] = g_y
      if (a == 2) g2[a - j][j] = val;  // indexed (x-count, y-count)
      if (a == 3) g3[j] = val;         // indexed by y-count
    }
  }
  double gx = g1[1], gy = g1[2];
  double gxx = g2[2][0], gxy = g2[1][1], gyy = g2[0][2];
  double gxxx = g3[0], gxxy = g3[1], gxyy = g3[2], gyyy = g3[3];

  EDerivatives e;
  e.E1 = gx;
  e.E2 = gy;
  e.E11 = gxx + gx * gx;
  e.E12 = gxy + gx * gy;
  e.E22 = gyy + gy * gy;
  e.E111 = gxxx + 3.0 * gxx * gx + gx * gx * gx;
  e.E112 = gxxy + gxx * gy + 2.0 * gxy * gx + gx * gx * gy;
  e.E122 = gxyy + gyy * gx + 2.0 * gxy * gy + gx * gy * gy;
  e.E222 = gyyy + 3.0 * gyy * gy + gy * gy * gy;
  return e;
}

HomogeneousPoly build_P(const ReducedFunctional& rf) {
  int d = rf.N + 1;
  Eigen::VectorXd c(d + 1);
  double binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    c[k] = 4.0 * kPi * kPi / d * binom * rf.deriv[d][k];
    binom = binom * (d - k) / (k + 1);
  }
  return HomogeneousPoly(d, c);
}

AdmissibilityReport admissibility_check(const ReducedFunctional& rf) {
  AdmissibilityReport rep;
  HomogeneousPoly P = build_P(rf);
  double scale = 0.0;
  for (int j = 0; j <= rf.N + 1; ++j)
    scale = std::max(scale, std::abs(rf.deriv[rf.N + 1][j]));
  rep.tolerance = 1e-5 * (1.0 + scale);
  for (int k = 1; k <= rf.N; ++k)
    for (int j = 0; j <= k; ++j)
      rep.max_low_order = std::max(rep.max_low_order, std::abs(rf.deriv[k][j]));
  rep.polar_min = polar_min_invariant(P);
  if (rep.max_low_order > rep.tolerance) {
    rep.failure = "derivatives of order <= N do not vanish at 0";
  } else if (!is_admissible(P)) {
    rep.failure = "p and p' share a zero on the circle";
  } else {
    rep.admissible = true;
  }
  return rep;
}

Vec2 compute_eta0(const ReducedFunctional& rf) {
  const Domain& d = *rf.dom;
  RegularPartDerivatives der = regular_part_derivatives(d, 2, {0, 0});
  double H00 = regular_part(d, {0, 0}, {0, 0});
  double common = (rf.pot.v({0, 0}) / 8.0) * std::exp(8.0 * kPi * H00);
  double c3 = 64.0 * kPi * kPi * kPi;
  Vec2 bracket;
  if (rf.N == 2) {
    Vec2 gdlv = rf.pot.grad_laplace_log_v0();
    bracket = {c3 * der.mixed_trace * der.grad_x.x - kPi * gdlv.x,
               c3 * der.mixed_trace * der.grad_x.y - kPi * gdlv.y};
  } else {
    bracket = {c3 * der.mixed_trace * der.grad_x.x +
                   16.0 * kPi * kPi * der.grad_mixed_trace.x,
               c3 * der.mixed_trace * der.grad_x.y +
                   16.0 * kPi * kPi * der.grad_mixed_trace.y};
  }
  return bracket * common;
}

Potential build_admissible_potential(const Domain& d, const HomogeneousPoly& target,
                                     int N, double offset) {
  if (target.degree != N + 1)
    throw std::invalid_argument(
        "build_admissible_potential: target degree must be N+1");
  if (!analytic_domain(d)) require_node(d, {0, 0}, "build_admissible_potential");
  ScalarField R = robin_function(d);
  Potential pot;
  pot.log_coef = Eigen::MatrixXd::Zero(N + 2, N + 2);
  // Taylor coefficients of the Robin function through order N+1
  for (int k = 0; k <= N + 1; ++k) {
    double delta = fd_step_for_order(d, std::max(k, 1));
    for (int j = 0; j <= k; ++j) {
      int a = k - j, b = j;
      double Rab = (k == 0) ? R({0, 0}) : fd_partial(R, {0, 0}, a, b, delta);
      double fa = 1.0, fb = 1.0;
      for (int q = 2; q <= a; ++q) fa *= q;
      for (int q = 2; q <= b; ++q) fb *= q;
      pot.log_coef(a, b) -= 4.0 * kPi * Rab / (fa * fb);
    }
  }
  for (int k = 0; k <= N + 1; ++k)
    pot.log_coef(N + 1 - k, k) += 4.0 * kPi * target.coef[k];
  pot.log_coef(0, 0) += offset;
  return pot;
}

}  // namespace gelfand
