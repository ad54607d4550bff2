#include "gelfand/finitedim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gelfand {

namespace {

const double kPi = 3.14159265358979323846;
const double kTwoPi = 2.0 * kPi;

// Signed angle from a to b, in (-pi, pi].
double turn(Vec2 a, Vec2 b) {
  return std::atan2(a.x * b.y - a.y * b.x, a.dot(b));
}

}  // namespace

int nodal_line_count(const HomogeneousPoly& P) {
  if (!is_admissible(P))
    throw std::runtime_error("nodal_line_count: polynomial is not admissible");
  // Roots of p on [0, pi); admissibility makes them simple, so sign changes
  // capture all of them.
  const int n = 2048;
  int count = 0;
  double prev = P.p(0.0);
  for (int i = 1; i <= n; ++i) {
    double t = i * kPi / n;
    double cur = P.p(t);
    if ((prev < 0 && cur >= 0) || (prev > 0 && cur <= 0)) ++count;
    prev = cur;
  }
  return count;
}

double containment_radius(const HomogeneousPoly& P, Vec2 eta0) {
  double C = polar_min_invariant(P);
  double r0 = eta0.norm();
  if (r0 == 0.0) return 0.0;
  int N = P.degree - 1;
  if (N < 1) return 0.0;  // linear P: gradient is constant
  return std::pow(r0 * r0 / C, 1.0 / (2.0 * N));
}

int degree_winding(const HomogeneousPoly& P, Vec2 eta0, double R) {
  auto field = [&](double t) -> Vec2 {
    Vec2 xi{R * std::cos(t), R * std::sin(t)};
    return P.grad(xi) - eta0;
  };
  struct Node { double t; Vec2 v; };
  std::vector<Node> pts;
  const int n0 = 256;
  pts.reserve(n0 + 1);
  for (int i = 0; i <= n0; ++i) {
    double t = i * kTwoPi / n0;
    Vec2 v = field(t);
    if (v.norm() == 0.0)
      throw std::runtime_error("degree_winding: zero of the field on the circle");
    pts.push_back({t, v});
  }
  // Refine every segment whose turn is >= pi/2 by bisection, up to 2^20 points.
  size_t cap = 1u << 20;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Node> next;
    next.reserve(pts.size() * 2);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      next.push_back(pts[i]);
      if (std::abs(turn(pts[i].v, pts[i + 1].v)) >= kPi / 2) {
        double tm = 0.5 * (pts[i].t + pts[i + 1].t);
        Vec2 vm = field(tm);
        if (vm.norm() == 0.0)
          throw std::runtime_error("degree_winding: zero of the field on the circle");
        next.push_back({tm, vm});
        changed = true;
      }
    }
    next.push_back(pts.back());
    pts.swap(next);
    if (pts.size() > cap)
      throw std::runtime_error("degree_winding: refinement cap exceeded");
  }
  double total = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) total += turn(pts[i].v, pts[i + 1].v);
  return static_cast<int>(std::lround(total / kTwoPi));
}

CriticalPointReport solve_reduced_equation(const HomogeneousPoly& P, Vec2 eta0) {
  const int d = P.degree;
  const int N = d - 1;
  if (!is_admissible(P))
    throw std::runtime_error("solve_reduced_equation: polynomial not admissible");

  CriticalPointReport rep;
  rep.M = nodal_line_count(P);
  rep.degree_formula = 1 - rep.M;
  rep.containment_radius = containment_radius(P, eta0);
  double Rw = 1.25 * rep.containment_radius + 1.0;
  rep.degree_winding = degree_winding(P, eta0, Rw);

  double r0 = eta0.norm();
  double coef_scale = 1.0 + P.coef.cwiseAbs().maxCoeff();

  auto classify = [&](CriticalPoint& s) {
    Eigen::Matrix2d H = P.hess(s.xi);
    s.hess_det = H.determinant();
    double scale = coef_scale * coef_scale * d * d * (d - 1.0) * (d - 1.0) *
                   std::pow(std::max(s.r, 1e-12), 2.0 * N - 2.0);
    s.degenerate = std::abs(s.hess_det) < 1e-8 * scale;
    s.local_degree = s.degenerate ? 0 : (s.hess_det > 0 ? 1 : -1);
    s.stable = !s.degenerate;
  };

  if (r0 == 0.0) {
    // Admissibility: xi = 0 is the only critical point.
    CriticalPoint s;
    s.xi = {0, 0};
    classify(s);
    rep.solutions.push_back(s);
    rep.residual_max = 0.0;
    return rep;
  }

  double t0 = std::atan2(eta0.y, eta0.x);

  // Polar reduction: with v(t) = (d p(t), -p'(t)) (never zero), the system
  //   d r^N p(t) = r0 cos(t - t0),   r^N p'(t) = -r0 sin(t - t0)
  // holds iff the angle of v equals t - t0 (mod 2pi), with r then recovered
  // from |v(t)| r^N = r0.
  const int n = 4096;
  std::vector<double> ts(n + 1), phi(n + 1);
  std::vector<Vec2> vs(n + 1);
  for (int i = 0; i <= n; ++i) {
    ts[i] = i * kTwoPi / n;
    vs[i] = {d * P.p(ts[i]), -P.dp(ts[i])};
  }
  phi[0] = std::atan2(vs[0].y, vs[0].x);
  for (int i = 1; i <= n; ++i) phi[i] = phi[i - 1] + turn(vs[i - 1], vs[i]);

  auto g_at = [&](int i, double t) {
    // continuous angle mismatch near sample i
    Vec2 v{d * P.p(t), -P.dp(t)};
    return phi[i] + turn(vs[i], v) - (t - t0);
  };

  auto radius_at = [&](double t) {
    double p = P.p(t), q = P.dp(t);
    double s = d * d * p * p + q * q;
    return std::pow(r0 * r0 / s, 1.0 / (2.0 * N));
  };

  std::vector<Vec2> roots;
  for (int i = 0; i < n; ++i) {
    double ga = phi[i] - (ts[i] - t0);
    double gb = phi[i + 1] - (ts[i + 1] - t0);
    // find integer k with ga - 2 pi k and gb - 2 pi k of opposite sign
    int klo = static_cast<int>(std::floor(std::min(ga, gb) / kTwoPi));
    int khi = static_cast<int>(std::ceil(std::max(ga, gb) / kTwoPi));
    for (int k = klo; k <= khi; ++k) {
      double fa = ga - kTwoPi * k, fb = gb - kTwoPi * k;
      if (fa == 0.0) fa = 1e-300;
      if ((fa < 0) == (fb < 0)) continue;
      double lo = ts[i], hi = ts[i + 1];
      double flo = fa;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = g_at(i, mid) - kTwoPi * k;
        if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; } else { hi = mid; }
      }
      double t = 0.5 * (lo + hi);
      double r = radius_at(t);
      roots.push_back({r * std::cos(t), r * std::sin(t)});
    }
  }

  // Newton polish and deduplication.
  rep.residual_max = 0.0;
  for (Vec2 xi : roots) {
    for (int it = 0; it < 60; ++it) {
      Vec2 F = P.grad(xi) - eta0;
      if (F.norm() <= 1e-13 * (1.0 + r0)) break;
      Eigen::Matrix2d H = P.hess(xi);
      double det = H.determinant();
      if (std::abs(det) < 1e-14 * (1.0 + std::abs(H(0, 0)) + std::abs(H(1, 1))))
        break;
      Eigen::Vector2d step = H.inverse() * Eigen::Vector2d(F.x, F.y);
      xi = {xi.x - step[0], xi.y - step[1]};
    }
    bool dup = false;
    for (const CriticalPoint& s : rep.solutions)
      if ((s.xi - xi).norm() < 1e-7 * (1.0 + s.r)) { dup = true; break; }
    if (dup) continue;
    CriticalPoint s;
    s.xi = xi;
    s.r = xi.norm();
    s.t = std::atan2(xi.y, xi.x);
    classify(s);
    rep.solutions.push_back(s);
    rep.residual_max = std::max(rep.residual_max, (P.grad(xi) - eta0).norm());
  }
  return rep;
}

}  // namespace gelfand
