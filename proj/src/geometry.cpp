#include "gelfand/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <limits>

#include "gelfand/poisson.hpp"

namespace gelfand {

namespace {

// Root of phi along the segment node -> node + t*h*dir, t in (0,1],
// with phi(node) < 0 <= phi(node + h*dir). Bisection; returns t.
double crossing_fraction(const std::function<double(Vec2)>& phi, Vec2 a, Vec2 dir,
                         double h) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (phi({a.x + mid * h * dir.x, a.y + mid * h * dir.y}) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::max(0.5 * (lo + hi), 1e-8);
}

const int DX[4] = {1, -1, 0, 0};
const int DY[4] = {0, 0, 1, -1};

}  // namespace

Domain Domain::from_level_set(DomainKind kind, double h,
                              const std::function<double(Vec2)>& phi,
                              double xmin, double xmax, double ymin, double ymax) {
  Domain d;
  d.kind = kind;
  d.h = h;
  d.level_set_ = phi;
  // Grid with the origin exactly on a node and one spare ring of nodes.
  int mxlo = static_cast<int>(std::ceil(-xmin / h)) + 2;
  int mxhi = static_cast<int>(std::ceil(xmax / h)) + 2;
  int mylo = static_cast<int>(std::ceil(-ymin / h)) + 2;
  int myhi = static_cast<int>(std::ceil(ymax / h)) + 2;
  d.x0 = -mxlo * h;
  d.y0 = -mylo * h;
  d.nx = mxlo + mxhi + 1;
  d.ny = mylo + myhi + 1;

  d.interior_of_node.assign(static_cast<size_t>(d.nx) * d.ny, -1);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      Vec2 p{d.x0 + i * h, d.y0 + j * h};
      if (phi(p) < 0.0) {
        d.interior_of_node[d.flat(i, j)] = static_cast<int>(d.node_of_interior.size());
        d.node_of_interior.push_back(d.flat(i, j));
      }
    }

  d.arms.resize(d.node_of_interior.size());
  for (int k = 0; k < d.n_interior(); ++k) {
    int f = d.node_of_interior[k];
    int i = f % d.nx, j = f / d.nx;
    Vec2 p = d.node_pos(f);
    for (int a = 0; a < 4; ++a) {
      int nb = d.interior_at(i + DX[a], j + DY[a]);
      Arm& arm = d.arms[k][a];
      if (nb >= 0) {
        arm.neighbor = nb;
        arm.length = h;
      } else {
        Vec2 dir{static_cast<double>(DX[a]), static_cast<double>(DY[a])};
        double t = crossing_fraction(phi, p, dir, h);
        arm.neighbor = -1;
        arm.length = t * h;
        arm.boundary_id = static_cast<int>(d.boundary_points.size());
        d.boundary_points.push_back({p.x + t * h * dir.x, p.y + t * h * dir.y});
      }
    }
  }
  return d;
}

Domain Domain::unit_disk(double h, bool analytic_regular_part) {
  Domain d = from_level_set(
      DomainKind::UnitDisk, h, [](Vec2 p) { return p.norm() - 1.0; }, -1, 1, -1, 1);
  d.analytic_regular_part = analytic_regular_part;
  d.multiply_connected = false;
  return d;
}

Domain Domain::annulus(double inner_radius, double h) {
  if (!(inner_radius > 0.0 && inner_radius < 1.0))
    throw std::invalid_argument("annulus: inner radius must be in (0,1)");
  double a = inner_radius;
  Domain d = from_level_set(
      DomainKind::Annulus, h,
      [a](Vec2 p) { return std::max(p.norm() - 1.0, a - p.norm()); }, -1, 1, -1, 1);
  d.annulus_inner = a;
  d.multiply_connected = true;
  return d;
}

Domain Domain::grid_mask(const std::vector<uint8_t>& mask, int nx, int ny, double h,
                         Vec2 node0) {
  if (static_cast<int>(mask.size()) != nx * ny)
    throw std::invalid_argument("grid_mask: mask size mismatch");
  Domain d;
  d.kind = DomainKind::GridMask;
  d.h = h;
  d.nx = nx;
  d.ny = ny;
  d.x0 = node0.x;
  d.y0 = node0.y;
  auto included = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < nx && j < ny && mask[j * nx + i] != 0;
  };
  // Interior: included node with all four neighbours included.
  d.interior_of_node.assign(static_cast<size_t>(nx) * ny, -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (included(i, j) && included(i + 1, j) && included(i - 1, j) &&
          included(i, j + 1) && included(i, j - 1)) {
        d.interior_of_node[d.flat(i, j)] = static_cast<int>(d.node_of_interior.size());
        d.node_of_interior.push_back(d.flat(i, j));
      }
  d.arms.resize(d.node_of_interior.size());
  for (int k = 0; k < d.n_interior(); ++k) {
    int f = d.node_of_interior[k];
    int i = f % nx, j = f / nx;
    for (int a = 0; a < 4; ++a) {
      int nb = d.interior_at(i + DX[a], j + DY[a]);
      Arm& arm = d.arms[k][a];
      arm.length = h;
      if (nb >= 0) {
        arm.neighbor = nb;
      } else {
        arm.neighbor = -1;
        arm.boundary_id = static_cast<int>(d.boundary_points.size());
        d.boundary_points.push_back(
            {d.x0 + (i + DX[a]) * h, d.y0 + (j + DY[a]) * h});
      }
    }
  }
  // Connectivity of the interior (flood fill) and hole detection on the
  // excluded nodes (an excluded region not touching the grid border is a hole).
  if (!d.node_of_interior.empty()) {
    std::vector<uint8_t> seen(d.node_of_interior.size(), 0);
    std::deque<int> q{0};
    seen[0] = 1;
    size_t count = 1;
    while (!q.empty()) {
      int k = q.front();
      q.pop_front();
      for (int a = 0; a < 4; ++a) {
        int nb = d.arms[k][a].neighbor;
        if (nb >= 0 && !seen[nb]) {
          seen[nb] = 1;
          ++count;
          q.push_back(nb);
        }
      }
    }
    if (count != d.node_of_interior.size())
      throw std::runtime_error("grid_mask: interior region is not connected");
  }
  {
    std::vector<uint8_t> outside(static_cast<size_t>(nx) * ny, 0);
    std::deque<int> q;
    auto push = [&](int i, int j) {
      if (i < 0 || j < 0 || i >= nx || j >= ny) return;
      int f = j * nx + i;
      if (!outside[f] && mask[f] == 0) {
        outside[f] = 1;
        q.push_back(f);
      }
    };
    for (int i = 0; i < nx; ++i) { push(i, 0); push(i, ny - 1); }
    for (int j = 0; j < ny; ++j) { push(0, j); push(nx - 1, j); }
    while (!q.empty()) {
      int f = q.front();
      q.pop_front();
      push(f % nx + 1, f / nx);
      push(f % nx - 1, f / nx);
      push(f % nx, f / nx + 1);
      push(f % nx, f / nx - 1);
    }
    d.multiply_connected = false;
    for (int f = 0; f < nx * ny; ++f)
      if (mask[f] == 0 && !outside[f]) { d.multiply_connected = true; break; }
  }
  return d;
}

Domain Domain::square_with_hole(double h, Vec2 origin, double hole_half_width) {
  // Snap the translation and the hole half-width to the grid so every boundary
  // segment passes through nodes exactly.
  double sx = std::round(origin.x / h) * h;
  double sy = std::round(origin.y / h) * h;
  int m = static_cast<int>(std::round(1.0 / h));
  int w = static_cast<int>(std::round(hole_half_width / h));
  int nx = 2 * m + 1, ny = 2 * m + 1;
  std::vector<uint8_t> mask(static_cast<size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int qi = i - m, qj = j - m;  // node at (qi*h, qj*h) in the unshifted square
      bool in_square = std::abs(qi) <= m && std::abs(qj) <= m;
      bool in_hole = std::abs(qi) < w && std::abs(qj) < w;
      mask[j * nx + i] = (in_square && !in_hole) ? 1 : 0;
    }
  Domain d = grid_mask(mask, nx, ny, h, {-m * h - sx, -m * h - sy});
  return d;
}

Domain Domain::unit_square(double h) {
  int m = static_cast<int>(std::round(1.0 / h));
  int n = m + 1;
  std::vector<uint8_t> mask(static_cast<size_t>(n) * n, 1);
  return grid_mask(mask, n, n, h, {0.0, 0.0});
}

double Domain::dist_to_boundary(Vec2 p) const {
  switch (kind) {
    case DomainKind::UnitDisk:
      return 1.0 - p.norm();
    case DomainKind::Annulus:
      return std::min(1.0 - p.norm(), p.norm() - annulus_inner);
    case DomainKind::GridMask: {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& b : boundary_points) best = std::min(best, (p - b).norm());
      return best;
    }
  }
  return 0.0;
}

bool Domain::contains(Vec2 p) const {
  if (level_set_) return level_set_(p) < 0.0;
  int i, j;
  nearest_node(p, i, j);
  return interior_at(i, j) >= 0;
}

const PoissonSolver& Domain::solver() const {
  if (!solver_cache_) solver_cache_ = std::make_shared<PoissonSolver>(*this);
  return *solver_cache_;
}

}  // namespace gelfand
