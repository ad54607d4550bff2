#include "gelfand/homopoly.hpp"

#include <cmath>
#include <stdexcept>

namespace gelfand {

namespace {
double ipow(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}
}  // namespace

double HomogeneousPoly::eval(Vec2 xi) const {
  double s = 0.0;
  for (int k = 0; k <= degree; ++k)
    s += coef[k] * ipow(xi.x, degree - k) * ipow(xi.y, k);
  return s;
}

Vec2 HomogeneousPoly::grad(Vec2 xi) const {
  Vec2 g{0, 0};
  for (int k = 0; k <= degree; ++k) {
    if (degree - k > 0)
      g.x += coef[k] * (degree - k) * ipow(xi.x, degree - k - 1) * ipow(xi.y, k);
    if (k > 0) g.y += coef[k] * k * ipow(xi.x, degree - k) * ipow(xi.y, k - 1);
  }
  return g;
}

Eigen::Matrix2d HomogeneousPoly::hess(Vec2 xi) const {
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  for (int k = 0; k <= degree; ++k) {
    int a = degree - k, b = k;
    double c = coef[k];
    if (a >= 2) H(0, 0) += c * a * (a - 1) * ipow(xi.x, a - 2) * ipow(xi.y, b);
    if (b >= 2) H(1, 1) += c * b * (b - 1) * ipow(xi.x, a) * ipow(xi.y, b - 2);
    if (a >= 1 && b >= 1)
      H(0, 1) += c * a * b * ipow(xi.x, a - 1) * ipow(xi.y, b - 1);
  }
  H(1, 0) = H(0, 1);
  return H;
}

double HomogeneousPoly::dp(double t) const {
  Vec2 e{std::cos(t), std::sin(t)};
  return grad(e).dot({-e.y, e.x});
}

double HomogeneousPoly::ddp(double t) const {
  Vec2 e{std::cos(t), std::sin(t)};
  Vec2 ep{-e.y, e.x};
  Eigen::Matrix2d H = hess(e);
  double quad = H(0, 0) * ep.x * ep.x + 2.0 * H(0, 1) * ep.x * ep.y +
                H(1, 1) * ep.y * ep.y;
  // e'' = -e, and Euler's identity gives grad.e = degree * p.
  return quad - degree * eval(e);
}

HomogeneousPoly HomogeneousPoly::harmonic_mode(int M) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(M + 1);
  double binom = 1.0;
  for (int k = 0; k <= M; ++k) {
    if (k % 2 == 0) c[k] = (k / 2 % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (M - k) / (k + 1);
  }
  return HomogeneousPoly(M, c);
}

bool is_admissible(const HomogeneousPoly& P) {
  if (P.degree < 1 || P.coef.size() != P.degree + 1) return false;
  const double twoPi = 2.0 * 3.14159265358979323846;
  double mx = 0.0;
  for (int i = 0; i < 4096; ++i) {
    double t = i * twoPi / 4096;
    double p = P.p(t), q = P.dp(t);
    mx = std::max(mx, static_cast<double>(P.degree) * P.degree * p * p + q * q);
  }
  return polar_min_invariant(P) > 1e-12 * mx;
}

double polar_min_invariant(const HomogeneousPoly& P) {
  const double twoPi = 2.0 * 3.14159265358979323846;
  const int n = 4096;
  auto f = [&](double t) {
    double p = P.p(t), q = P.dp(t);
    return static_cast<double>(P.degree) * P.degree * p * p + q * q;
  };
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = f(i * twoPi / n);
  double best = v[0];
  for (int i = 0; i < n; ++i) {
    if (v[i] > v[(i + n - 1) % n] || v[i] > v[(i + 1) % n]) continue;
    // golden-section refinement of the local minimum
    double a = (i - 1) * twoPi / n, b = (i + 1) * twoPi / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-12) {
      if (f1 < f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - g * (b - a); f1 = f(x1);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + g * (b - a); f2 = f(x2);
      }
    }
    best = std::min(best, std::min(f1, f2));
  }
  return best;
}

}  // namespace gelfand
