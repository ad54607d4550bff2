#include "gelfand/greens.hpp"

#include <cmath>
#include <stdexcept>

namespace gelfand {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Nodal samples of a solved field around a base node, for finite differences
// that only ever touch exact mesh nodes.
struct NodalField {
  const Domain* d;
  const Eigen::VectorXd* v;
  int bi, bj;
  double at(int di, int dj) const {
    int k = d->interior_at(bi + di, bj + dj);
    if (k < 0)
      throw std::runtime_error("regular_part_derivatives: stencil leaves domain");
    return (*v)[k];
  }
};

// First derivative along axis ax, steps m and 2m nodes, one Richardson level.
double nodal_d1(const NodalField& f, int ax, int m, double h) {
  auto D = [&](int mm) {
    int dx = ax == 0 ? mm : 0, dy = ax == 0 ? 0 : mm;
    return (f.at(dx, dy) - f.at(-dx, -dy)) / (2.0 * mm * h);
  };
  return (4.0 * D(m) - D(2 * m)) / 3.0;
}

// Second derivative d^2/dx_ax1 dx_ax2, same Richardson scheme.
double nodal_d2(const NodalField& f, int ax1, int ax2, int m, double h) {
  auto D = [&](int mm) -> double {
    double s = mm * h;
    if (ax1 == ax2) {
      int dx = ax1 == 0 ? mm : 0, dy = ax1 == 0 ? 0 : mm;
      return (f.at(dx, dy) - 2.0 * f.at(0, 0) + f.at(-dx, -dy)) / (s * s);
    }
    return (f.at(mm, mm) - f.at(mm, -mm) - f.at(-mm, mm) + f.at(-mm, -mm)) /
           (4.0 * s * s);
  };
  return (4.0 * D(m) - D(2 * m)) / 3.0;
}

// One Richardson level for a continuous-step difference quotient.
template <class F>
double rich(const F& D, double delta) {
  return (4.0 * D(delta / 2) - D(delta)) / 3.0;
}

Vec2 axis(int i) { return i == 0 ? Vec2{1, 0} : Vec2{0, 1}; }

}  // namespace

double regular_part_disk(Vec2 x, Vec2 y) {
  // (1/4pi) log(|x|^2 |y|^2 - 2 x.y + 1); smooth across y = 0.
  double q = x.norm2() * y.norm2() - 2.0 * x.dot(y) + 1.0;
  return std::log(q) / (4.0 * kPi);
}

GridFunction regular_part_field(const Domain& d, Vec2 y) {
  return harmonic_extension(
      d, [y](Vec2 p) { return std::log((p - y).norm()) / (2.0 * kPi); });
}

double regular_part(const Domain& d, Vec2 x, Vec2 y) {
  if (d.kind == DomainKind::UnitDisk && d.analytic_regular_part)
    return regular_part_disk(x, y);
  return regular_part_field(d, y).eval(x);
}

RegularPartDerivatives regular_part_derivatives(const Domain& d, int order,
                                                Vec2 at) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("regular_part_derivatives: order must be 1 or 2");
  RegularPartDerivatives out;

  if (d.kind == DomainKind::UnitDisk && d.analytic_regular_part) {
    const double del = 1e-3;
    for (int i = 0; i < 2; ++i) {
      Vec2 ei = axis(i);
      auto D = [&](double s) {
        return (regular_part_disk(at + ei * s, at) -
                regular_part_disk(at - ei * s, at)) /
               (2.0 * s);
      };
      (i == 0 ? out.grad_x.x : out.grad_x.y) = rich(D, del);
    }
    if (order == 1) return out;
    // Mixed second derivative at (x, y) by the 4-point cross difference.
    auto mixed_at = [&](Vec2 x, Vec2 y, int i, int j, double s) {
      Vec2 ei = axis(i), ej = axis(j);
      return (regular_part_disk(x + ei * s, y + ej * s) -
              regular_part_disk(x + ei * s, y - ej * s) -
              regular_part_disk(x - ei * s, y + ej * s) +
              regular_part_disk(x - ei * s, y - ej * s)) /
             (4.0 * s * s);
    };
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        auto D = [&](double s) { return mixed_at(at, at, i, j, s); };
        out.mixed[i][j] = rich(D, del);
      }
    out.mixed_trace = out.mixed[0][0] + out.mixed[1][1];
    auto trace_at = [&](Vec2 x) {
      auto D0 = [&](double s) { return mixed_at(x, at, 0, 0, s); };
      auto D1 = [&](double s) { return mixed_at(x, at, 1, 1, s); };
      return rich(D0, del) + rich(D1, del);
    };
    for (int k = 0; k < 2; ++k) {
      Vec2 ek = axis(k);
      auto D = [&](double s) {
        return (trace_at(at + ek * s) - trace_at(at - ek * s)) / (2.0 * s);
      };
      (k == 0 ? out.grad_mixed_trace.x : out.grad_mixed_trace.y) = rich(D, del);
    }
    return out;
  }

  // Numeric path: finite differences on solved fields, sampled at mesh nodes
  // (interpolating between nodes would feed cell-scale kinks into the third
  // differences). x-step snapped to the grid, y-step continuous.
  const double h = d.h;
  const double del = std::max(std::sqrt(h), 1e-3);
  const int m = std::max(1, static_cast<int>(std::lround(del / h)));
  int bi, bj;
  d.nearest_node(at, bi, bj);
  Vec2 base = {d.x0 + bi * h, d.y0 + bj * h};
  if ((base - at).norm() > 1e-9 * (1.0 + at.norm()))
    throw std::invalid_argument(
        "regular_part_derivatives: evaluation point must lie on a mesh node "
        "for numeric domains");

  GridFunction F0 = regular_part_field(d, base);
  NodalField f0{&d, &F0.interior, bi, bj};
  out.grad_x = {nodal_d1(f0, 0, m, h), nodal_d1(f0, 1, m, h)};
  if (order == 1) return out;

  // For each y-direction j and y-step dy: difference field
  // (H(., base+dy e_j) - H(., base-dy e_j)) / (2 dy), then x-derivatives of it.
  const double dys[2] = {del, del / 2};
  double mixed_s[2][2][2];        // [step][i][j]
  double grad_trace_s[2][2];      // [step][k]
  for (int s = 0; s < 2; ++s) {
    double dy = dys[s];
    grad_trace_s[s][0] = grad_trace_s[s][1] = 0.0;
    for (int j = 0; j < 2; ++j) {
      GridFunction Fp = regular_part_field(d, base + axis(j) * dy);
      GridFunction Fm = regular_part_field(d, base - axis(j) * dy);
      Eigen::VectorXd diff = (Fp.interior - Fm.interior) / (2.0 * dy);
      NodalField g{&d, &diff, bi, bj};
      for (int i = 0; i < 2; ++i) mixed_s[s][i][j] = nodal_d1(g, i, m, h);
      for (int k = 0; k < 2; ++k)
        grad_trace_s[s][k] += nodal_d2(g, k, j, m, h);  // d/dx_k of mixed[j][j]
    }
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.mixed[i][j] = (4.0 * mixed_s[1][i][j] - mixed_s[0][i][j]) / 3.0;
  out.mixed_trace = out.mixed[0][0] + out.mixed[1][1];
  out.grad_mixed_trace = {
      (4.0 * grad_trace_s[1][0] - grad_trace_s[0][0]) / 3.0,
      (4.0 * grad_trace_s[1][1] - grad_trace_s[0][1]) / 3.0};
  return out;
}

HarmonicFamilyFields harmonic_extension_family_fields(const Domain& d, Vec2 xi) {
  HarmonicFamilyFields out;
  out.L1 = harmonic_extension(d, [xi](Vec2 p) {
    double l = std::log((p - xi).norm());
    return l * l;
  });
  out.L2 = harmonic_extension(d, [xi](Vec2 p) {
    Vec2 q = p - xi;
    return (q.x * q.x - q.y * q.y) / q.norm2();
  });
  out.L3 = harmonic_extension(d, [xi](Vec2 p) {
    Vec2 q = p - xi;
    return q.x * q.y / q.norm2();
  });
  out.I = harmonic_extension(d, [xi](Vec2 p) { return 1.0 / (p - xi).norm2(); });
  return out;
}

HarmonicFamily harmonic_extension_family(const Domain& d, Vec2 xi) {
  HarmonicFamilyFields f = harmonic_extension_family_fields(d, xi);
  return {f.L1.eval(xi), f.L2.eval(xi), f.L3.eval(xi), f.I.eval(xi)};
}

}  // namespace gelfand
