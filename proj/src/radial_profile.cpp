#include "gelfand/radial_profile.hpp"

#include <cmath>
#include <stdexcept>

namespace gelfand {

namespace {

const double kPhi1 = 1.5 - 2.0 * std::log(2.0);

double w0(double r) { return (1.0 - r * r) / (1.0 + r * r); }
double dw0(double r) {
  double q = 1.0 + r * r;
  return -4.0 * r / (q * q);
}

// g(s) = int_0^s 4 t^3 (1-t^2)/(1+t^2)^3 dt, in closed form.
double g_int(double s) {
  double q = 1.0 + s * s;
  return -2.0 * std::log(q) - 6.0 / q + 2.0 / (q * q) + 4.0;
}

double Phi(double s) {
  if (s < 1e-9) return 0.0;  // Phi ~ s^3 near 0
  double q = 1.0 + s * s;
  return g_int(s) * q * q / (s * (1.0 + s) * (1.0 + s));
}

// psi(s) = (Phi(s) - Phi(1))/(1-s)^2, removable at s = 1 since Phi'(1) = 0.
struct Psi {
  double phi2, phi3;  // Phi''(1), Phi'''(1) by finite differences
  Psi() {
    double d = 1e-3;
    auto second = [&](double dd) {
      return (Phi(1 + dd) - 2.0 * kPhi1 + Phi(1 - dd)) / (dd * dd);
    };
    phi2 = (4.0 * second(d / 2) - second(d)) / 3.0;
    phi3 = (Phi(1 + 2 * d) - 2.0 * Phi(1 + d) + 2.0 * Phi(1 - d) -
            Phi(1 - 2 * d)) /
           (2.0 * d * d * d);
  }
  double operator()(double s) const {
    if (std::abs(1.0 - s) < 1e-3)
      return phi2 / 2.0 + phi3 * (s - 1.0) / 6.0;
    double u = 1.0 - s;
    return (Phi(s) - kPhi1) / (u * u);
  }
};

// 7-point Gauss-Legendre on [a,b].
double gauss7(const Psi& f, double a, double b) {
  static const double x[7] = {-0.9491079123427585, -0.7415311855993945,
                              -0.4058451513773972, 0.0,
                              0.4058451513773972,  0.7415311855993945,
                              0.9491079123427585};
  static const double w[7] = {0.1294849661688697, 0.2797053914892766,
                              0.3818300505051189, 0.4179591836734694,
                              0.3818300505051189, 0.2797053914892766,
                              0.1294849661688697};
  double c = 0.5 * (a + b), hl = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < 7; ++i) s += w[i] * f(c + hl * x[i]);
  return s * hl;
}

double tail_term(double r) {  // the non-homogeneous smooth part
  return -kPhi1 * r * (1.0 + r) / (1.0 + r * r);
}
double dtail_term(double r) {
  double q = 1.0 + r * r;
  return -kPhi1 * (1.0 + 2.0 * r - r * r) / (q * q);
}

const Psi& psi() {
  static Psi p;
  return p;
}

}  // namespace

RadialProfile solve_w1(double r_max) {
  if (r_max < 100.0) throw std::invalid_argument("solve_w1: r_max >= 100");
  RadialProfile p;
  p.r_min = 1e-6;
  p.r_max = r_max;

  const int n = 9600;
  p.grid.resize(n + 1);
  p.A.resize(n + 1);
  p.grid[0] = 0.0;
  p.A[0] = 0.0;
  double lr0 = std::log(p.r_min), lr1 = std::log(r_max);
  for (int i = 1; i <= n; ++i)
    p.grid[i] = std::exp(lr0 + (lr1 - lr0) * (i - 1) / (n - 1));
  for (int i = 1; i <= n; ++i)
    p.A[i] = p.A[i - 1] + gauss7(psi(), p.grid[i - 1], p.grid[i]);

  // Calibration: choose u0 so that the additive constant in the expansion
  //   w1 = -2 log^2 r + 4 log r + O(log r / r^2)
  // vanishes. Matching the asymptote at a single large radius R determines
  // u0 up to O(log R / R^2); extend the cumulative integral of psi well past
  // r_max so the match error is below 1e-9.
  {
    double R = std::max(1e6, r_max), Acal = p.A[n];
    int extra = 400;
    double la = std::log(r_max), lb = std::log(R);
    for (int i = 0; i < extra; ++i)
      Acal += gauss7(psi(), std::exp(la + (lb - la) * i / extra),
                     std::exp(la + (lb - la) * (i + 1) / extra));
    double L = std::log(R);
    p.u0 = Acal + (-2.0 * L * L + 4.0 * L - tail_term(R)) / w0(R);
  }

  p.w.resize(n + 1);
  p.dw.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    double r = p.grid[i];
    p.w[i] = w0(r) * (p.u0 - p.A[i]) + tail_term(r);
    p.dw[i] = dw0(r) * (p.u0 - p.A[i]) - w0(r) * psi()(r) + dtail_term(r);
  }

  // asymptote certificate
  p.asymptote_bound = 0.0;
  for (int i = 0; i <= n; ++i) {
    double r = p.grid[i];
    if (r < 20.0) continue;
    double l = std::log(r);
    double dev = (p.w[i] + 2.0 * l * l - 4.0 * l) * r * r / (l * l);
    p.asymptote_bound = std::max(p.asymptote_bound, std::abs(dev));
  }
  return p;
}

double RadialProfile::value(double r) const {
  if (r <= 0.0) return u0;
  if (r >= r_max) {
    double l = std::log(r);
    return -2.0 * l * l + 4.0 * l;
  }
  if (r <= r_min) return w0(r) * (u0 + kPhi1 * r) + tail_term(r);  // A ~ -Phi1 r
  // locate the log-spaced interval
  int n = static_cast<int>(grid.size()) - 1;
  double lr0 = std::log(r_min), lr1 = std::log(r_max);
  double s = (std::log(r) - lr0) / (lr1 - lr0) * (n - 1) + 1.0;
  int i = std::min(std::max(static_cast<int>(s), 1), n - 1);
  double a = grid[i], b = grid[i + 1];
  // Hermite interpolation of A (its derivative psi is known exactly)
  double hl = b - a, t = (r - a) / hl;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  double Ar = h00 * A[i] + h10 * hl * psi()(a) + h01 * A[i + 1] +
              h11 * hl * psi()(b);
  return w0(r) * (u0 - Ar) + tail_term(r);
}

double RadialProfile::derivative(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= r_max) return (-4.0 * std::log(r) + 4.0) / r;
  double Ar;
  if (r <= r_min) {
    Ar = -kPhi1 * r;
  } else {
    int n = static_cast<int>(grid.size()) - 1;
    double lr0 = std::log(r_min), lr1 = std::log(r_max);
    double s = (std::log(r) - lr0) / (lr1 - lr0) * (n - 1) + 1.0;
    int i = std::min(std::max(static_cast<int>(s), 1), n - 1);
    double a = grid[i], b = grid[i + 1];
    double hl = b - a, t = (r - a) / hl;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    Ar = h00 * A[i] + h10 * hl * psi()(a) + h01 * A[i + 1] + h11 * hl * psi()(b);
  }
  return dw0(r) * (u0 - Ar) - w0(r) * psi()(r) + dtail_term(r);
}

double w_hat2(double y1, double y2) {
  return (y1 * y1 - y2 * y2) / (1.0 + y1 * y1 + y2 * y2);
}

double w_hat3(double y1, double y2) {
  return y1 * y2 / (1.0 + y1 * y1 + y2 * y2);
}

}  // namespace gelfand
